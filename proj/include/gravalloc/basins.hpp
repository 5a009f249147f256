#pragma once

#include "gravalloc/flow.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace gravalloc {

inline constexpr std::int32_t kUnallocated = -1;

// Labels on the cell-centred grid lower + (i + 1/2) h, i in [0, n)^d.
struct BasinMap {
  int d = 3;
  int n = 0;
  double spacing = 0.0;
  Vec lower;
  std::vector<std::int32_t> label;
  std::vector<std::size_t> counts;  // per star
  std::size_t timeouts = 0;
  std::size_t integrated = 0;  // trajectories actually run
  std::size_t refined = 0;

  std::size_t size() const { return label.size(); }
  Vec point(std::size_t index) const;
  double cell_volume(int star) const { return counts[star] * std::pow(spacing, d); }
  void write_csv(std::ostream& out) const;
  void write_binary(std::ostream& out) const;
};

struct BasinPolicy {
  FlowPolicy flow;
  int coarse_stride = 8;  // must divide n and be a power of two
  bool refine = true;
  double refine_rtol_factor = 0.01;
  int threads = 0;  // 0: hardware concurrency
  double max_timeout_fraction = 0.05;
};

// Torus fields only; every grid point is flowed (or filled from an agreeing block) to its star.
BasinMap assign_basins(const PeriodicField& field, int n, BasinPolicy policy = {});

struct CellStats {
  int star = -1;
  double volume = 0.0;
  double diameter = 0.0;  // X
  double tentacle = 0.0;  // Z_R
  double R = 0.0;
  std::vector<double> Y;  // distances of uniform cell points to the star
};

CellStats cell_statistics(const BasinMap& map, const PeriodicField& field, int star, double R, std::size_t samples,
                          std::uint64_t seed);

}  // namespace gravalloc
