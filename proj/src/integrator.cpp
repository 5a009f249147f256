#include "gravalloc/integrator.hpp"

namespace gravalloc {

namespace {

constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// b - b*
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

}  // namespace

void Dopri5::step(const State& y, const State& k1, double h, State& ynew, State& k1new, State& err) const {
  const auto n = y.size();
  State k2(n), k3(n), k4(n), k5(n), k6(n), t(n);
  t = y + h * a21 * k1;
  f_(t, k2);
  t = y + h * (a31 * k1 + a32 * k2);
  f_(t, k3);
  t = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
  f_(t, k4);
  t = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
  f_(t, k5);
  t = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
  f_(t, k6);
  ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  f_(ynew, k1new);
  err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k1new);
}

double error_norm(const State& err, const State& y, const State& ynew, double atol, double rtol, int m) {
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
    double q = err[i] / sc;
    s += q * q;
  }
  return std::sqrt(s / m);
}

}  // namespace gravalloc
