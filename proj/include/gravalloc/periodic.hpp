#pragma once

#include "gravalloc/types.hpp"

#include <memory>
#include <vector>

namespace gravalloc {

// Periodic kernel on the torus of side S with a neutralizing uniform background:
// G(r) = grad psi(r), Laplace psi = d kappa_d (sum_n delta(r - nS) - 1/S^d).
// Near the origin G(r) = g(r) - kappa_d r / S^d + C(r) with C smooth and odd;
// C is tabulated on the fundamental cell for d <= 4 and multilinearly interpolated.
class PeriodicKernel {
 public:
  PeriodicKernel(int d, double side, bool tabulate = true);

  static std::shared_ptr<const PeriodicKernel> get(int d, double side);

  int dim() const { return d_; }
  double side() const { return side_; }
  double volume() const { return volume_; }

  // r must be a minimum image (each |r_i| <= S/2).
  Vec residual(const Vec& r) const;
  void residual(const double* r, double* out) const;
  Vec force(const Vec& r) const;  // full G(r)
  // d = 3 table lookup, inlined for the hot loop; requires tabulated().
  inline void residual3(const double* r, double* out) const;

  // Ewald sums without the table.
  Vec residual_direct(const Vec& r) const;
  Vec force_direct(const Vec& r) const;
  double potential_direct(const Vec& r) const;  // psi(r) up to an additive constant

  // Bound on the operator norm of DC over the cell.
  double residual_lipschitz() const { return lip_; }
  bool tabulated() const { return !table_.empty(); }

  Vec min_image(const Vec& r) const {
    Vec out = r;
    for (int i = 0; i < d_; ++i) out[i] -= side_ * std::round(out[i] / side_);
    return out;
  }

 private:
  void build_table();
  // real-space n = 0 term minus g(r), regular at 0
  Vec near_term(const Vec& r) const;

  int d_;
  double side_;
  double volume_;
  double alpha_;
  double kappa_;
  std::vector<Vec> images_;   // lattice translations n S for the real-space sum (n != 0)
  std::vector<Vec> kvecs_;    // half of the reciprocal vectors
  std::vector<double> kcoef_; // 2 d kappa_d / V exp(-k^2/4a^2) / k^2
  int n_table_ = 0;
  double h_table_ = 0.0;
  std::vector<double> table_;  // (n+1)^d nodes, d components each
  std::vector<long> strides_;
  double inv_h_ = 0.0;
  double lip_ = 0.0;
};

inline void PeriodicKernel::residual3(const double* r, double* out) const {
  const double hs = 0.5 * side_;
  const long np = n_table_ + 1;
  double t[3];
  long b = 0;
  long stride = 1;
  for (int i = 0; i < 3; ++i) {
    double u = (r[i] + hs) * inv_h_;
    long k = static_cast<long>(u);
    k = k < 0 ? 0 : (k > n_table_ - 1 ? n_table_ - 1 : k);
    t[i] = u - k;
    b += k * stride;
    stride *= np;
  }
  const long s1 = np, s2 = np * np;
  const double* p = table_.data() + 3 * b;
  const double u0 = 1.0 - t[0], u1 = 1.0 - t[1], u2 = 1.0 - t[2];
  const double w00 = u1 * u2, w10 = t[1] * u2, w01 = u1 * t[2], w11 = t[1] * t[2];
  const double* q00 = p;
  const double* q10 = p + 3 * s1;
  const double* q01 = p + 3 * s2;
  const double* q11 = p + 3 * (s1 + s2);
  for (int c = 0; c < 3; ++c) {
    double a = w00 * q00[c] + w10 * q10[c] + w01 * q01[c] + w11 * q11[c];
    double e = w00 * q00[3 + c] + w10 * q10[3 + c] + w01 * q01[3 + c] + w11 * q11[3 + c];
    out[c] = u0 * a + t[0] * e;
  }
}

}  // namespace gravalloc
