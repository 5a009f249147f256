#pragma once

#include "gravalloc/types.hpp"

#include <functional>

namespace gravalloc {

using State = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim + 1, 1>;

// Dormand-Prince 5(4) single step with FSAL.
class Dopri5 {
 public:
  using Rhs = std::function<void(const State& y, State& dy)>;

  explicit Dopri5(Rhs f) : f_(std::move(f)) {}

  // Start at y with derivative k1 = f(y). On return ynew, k1new = f(ynew),
  // err the embedded error estimate (componentwise).
  void step(const State& y, const State& k1, double h, State& ynew, State& k1new, State& err) const;

 private:
  Rhs f_;
};

// Scaled RMS error norm with sc_i = atol + rtol max(|y_i|, |ynew_i|), over the first m components.
double error_norm(const State& err, const State& y, const State& ynew, double atol, double rtol, int m);

}  // namespace gravalloc
