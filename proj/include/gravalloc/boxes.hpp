#pragma once

#include "gravalloc/types.hpp"

#include <cstdint>
#include <vector>

namespace gravalloc {

// Half-widths: Box(L, W) = [-L, L] x [-W, W]^{d-1}.
struct BoxScales {
  int d = 3;
  double eps = 0.0;
  double R = 0.0;
  int p1 = 0;  // smallest with 2^p1 >= R
  int p2 = 0;  // smallest with 2^p2 >= R^eps
  double A = 2.0;
};

// Cube side a centred at y dominated by V0 = Box(2^p1, 2^{2 p2}): a integer,
// A <= a <= 2^{-p2} dist(y, V0), distance to the nearest point of V0.
bool dominated(const BoxScales& s, const double* y, double a);
double distance_to_v0(const BoxScales& s, const double* y);

struct BoxPartition {
  BoxScales scales;
  std::vector<double> centers;  // flat, d per cube
  std::vector<double> sides;
  std::vector<int> level;       // shell index i (1-based)
  std::vector<std::int64_t> per_level;
  double bound = 0.0;           // 2^{3d} R^{1+(d-2) eps}
  double volume_sum = 0.0;
  double target_volume = 0.0;   // Vol(V+) - Vol(2 V0)
  std::int64_t not_dominated = 0;

  std::size_t size() const { return sides.size(); }
  Vec center(std::size_t i) const;
  bool count_ok() const { return static_cast<double>(size()) <= bound; }
  // index of the cube containing x (closed cubes; first hit), or -1
  long locate(const Vec& x) const;
};

BoxScales box_scales(int d, double R, double eps, double A = 2.0);
BoxPartition partition_dominated_boxes(int d, double R, double eps, double A = 2.0);

}  // namespace gravalloc
