#pragma once

#include "gravalloc/types.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <vector>

namespace gravalloc {

using MultiIndex = std::array<int, kMaxDim>;

long polydim(int k, int d);

// Graded lexicographic: by degree, then x_1 exponent descending, recursively.
// Degree 0 included only on request.
std::vector<MultiIndex> multi_indices(int d, int k, bool include_zero = false);
int degree(const MultiIndex& a, int d);

double monomial(const Vec& x, const MultiIndex& a);

struct MomentVector {
  int k = 1;
  int d = 1;
  Eigen::VectorXd entries;
};

MomentVector moment_map(const Vec& x, int k);

// Least m >= 1 with (k e/(m+1))^{m+1} <= delta/(2 d 2^k).
int m0(int d, int k, double delta);

struct DensityEstimate {
  double estimate = 0.0;
  double lower_bound = 0.0;  // bootstrap lower confidence bound
  double bandwidth = 0.0;
  long dim = 0;
  std::size_t replicas = 0;
};

// Kernel density of the normalized moment sum at 0, for uniform points on [-1,1]^d.
DensityEstimate empirical_density_check(int n, int k, int d, std::size_t replicas, std::uint64_t seed,
                                        int bootstrap = 200, double level = 0.95);

}  // namespace gravalloc
