#pragma once

#include "gravalloc/types.hpp"

namespace gravalloc {

// g(z) = z / |z|^d
template <typename Scalar>
VecT<Scalar> g_kernel(const VecT<Scalar>& z) {
  using std::pow;
  using std::sqrt;
  Scalar r2 = z.squaredNorm();
  if (r2 == Scalar(0)) throw SingularityError("g(0) is undefined");
  const int d = static_cast<int>(z.size());
  Scalar inv = Scalar(1) / (pow(r2, Scalar(d) / Scalar(2)));
  return z * inv;
}

// Jacobian of g: (I - d zz^T/|z|^2) / |z|^d
Mat g_jacobian(const Vec& z);

// |z|^{2-d}, the potential kernel up to the factor -1/(d-2).
double newton_kernel(const Vec& z);

// Fast inline kernel used in hot loops; r2 = |z|^2 > 0.
inline double inv_pow_d(double r2, int d) {
  switch (d) {
    case 3:
      return 1.0 / (r2 * std::sqrt(r2));
    case 4:
      return 1.0 / (r2 * r2);
    case 5:
      return 1.0 / (r2 * r2 * std::sqrt(r2));
    case 6:
      return 1.0 / (r2 * r2 * r2);
    default:
      return std::pow(r2, -0.5 * d);
  }
}

}  // namespace gravalloc
