#include "gravalloc/boxes.hpp"

#include <algorithm>
#include <cmath>

namespace gravalloc {

namespace {

int ceil_log2(double v) {
  int p = 0;
  while (std::ldexp(1.0, p) < v) ++p;
  while (p > 0 && std::ldexp(1.0, p - 1) >= v) --p;
  return p;
}

double box_volume(int d, double L, double W) { return 2.0 * L * std::pow(2.0 * W, d - 1); }

}  // namespace

BoxScales box_scales(int d, double R, double eps, double A) {
  if (d < 3 || d > kMaxDim) throw ParameterError("dimension out of range");
  if (!(eps > 0.0 && eps < 1.0 / (2.0 * (d - 2)))) throw ParameterError("need 0 < eps < 1/(2(d-2))");
  if (!(R > 1.0)) throw ParameterError("R must exceed 1");
  if (!(A >= 1.0)) throw ParameterError("A must be at least 1");
  BoxScales s;
  s.d = d;
  s.eps = eps;
  s.R = R;
  s.A = A;
  s.p1 = ceil_log2(R);
  s.p2 = ceil_log2(std::pow(R, eps));
  if (s.p1 - 2 * s.p2 < 1) throw ParameterError("R too small for eps: no shells");
  if (std::ldexp(1.0, s.p2) < A) throw ParameterError("R too small: smallest cube side below A");
  return s;
}

double distance_to_v0(const BoxScales& s, const double* y) {
  double L = std::ldexp(1.0, s.p1), W = std::ldexp(1.0, 2 * s.p2);
  double t = std::max(0.0, std::abs(y[0]) - L);
  double q = t * t;
  for (int i = 1; i < s.d; ++i) {
    t = std::max(0.0, std::abs(y[i]) - W);
    q += t * t;
  }
  return std::sqrt(q);
}

bool dominated(const BoxScales& s, const double* y, double a) {
  if (a != std::floor(a)) return false;
  return a >= s.A && a <= std::ldexp(distance_to_v0(s, y), -s.p2);
}

Vec BoxPartition::center(std::size_t i) const {
  const int d = scales.d;
  Vec c(d);
  for (int j = 0; j < d; ++j) c[j] = centers[i * d + j];
  return c;
}

long BoxPartition::locate(const Vec& x) const {
  const int d = scales.d;
  for (std::size_t i = 0; i < size(); ++i) {
    double h = 0.5 * sides[i];
    bool in = true;
    for (int j = 0; j < d && in; ++j) in = std::abs(x[j] - centers[i * d + j]) <= h;
    if (in) return static_cast<long>(i);
  }
  return -1;
}

BoxPartition partition_dominated_boxes(int d, double R, double eps, double A) {
  BoxPartition out;
  out.scales = box_scales(d, R, eps, A);
  const BoxScales& s = out.scales;
  const int shells = s.p1 - 2 * s.p2;
  const double Lp = std::ldexp(1.0, s.p1 + 1);
  out.target_volume = box_volume(d, Lp, Lp) - box_volume(d, Lp, std::ldexp(1.0, 2 * s.p2 + 1));
  out.bound = std::pow(2.0, 3 * d) * std::pow(R, 1.0 + (d - 2) * eps);
  out.per_level.assign(shells, 0);
  std::vector<int> id(d);
  double y[kMaxDim];
  for (int i = 1; i <= shells; ++i) {
    const double si = std::ldexp(1.0, 2 * s.p2 + i), so = 2.0 * si;
    const double a = std::ldexp(1.0, s.p2 + i - 1);
    const long n1 = std::lround(2.0 * Lp / a), nt = std::lround(2.0 * so / a);
    // grid cubes of V_{i+1} outside V_i: some transverse index beyond +-si
    std::fill(id.begin(), id.end(), 0);
    while (true) {
      y[0] = -Lp + a * (id[0] + 0.5);
      bool outside = false;
      for (int j = 1; j < d; ++j) {
        y[j] = -so + a * (id[j] + 0.5);
        outside = outside || std::abs(y[j]) - 0.5 * a >= si;
      }
      if (outside) {
        out.centers.insert(out.centers.end(), y, y + d);
        out.sides.push_back(a);
        out.level.push_back(i);
        ++out.per_level[i - 1];
        out.volume_sum += std::pow(a, d);
        if (!dominated(s, y, a)) ++out.not_dominated;
      }
      int j = 0;
      while (j < d && ++id[j] >= (j == 0 ? n1 : nt)) {
        id[j] = 0;
        ++j;
      }
      if (j == d) break;
    }
  }
  return out;
}

}  // namespace gravalloc
