#include "gravalloc/kernel.hpp"

namespace gravalloc {

Mat g_jacobian(const Vec& z) {
  const int d = static_cast<int>(z.size());
  double r2 = z.squaredNorm();
  if (r2 == 0.0) throw SingularityError("Dg(0) is undefined");
  double inv = inv_pow_d(r2, d);
  Mat J = Mat::Identity(d, d) - (static_cast<double>(d) / r2) * (z * z.transpose());
  return J * inv;
}

double newton_kernel(const Vec& z) {
  double r2 = z.squaredNorm();
  if (r2 == 0.0) throw SingularityError("potential kernel singular at 0");
  return std::pow(r2, -0.5 * (static_cast<double>(z.size()) - 2.0));
}

}  // namespace gravalloc
