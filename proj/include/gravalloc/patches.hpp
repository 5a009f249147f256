#pragma once

#include "gravalloc/moments.hpp"

#include <Eigen/Core>

#include <utility>
#include <vector>

namespace gravalloc {

// beta (1 + (x1 + L)/(2L)) times surface measure on P_{L,W} = {|x1| <= L, |x_perp| = W}.
struct NuMeasure {
  int d = 3;
  double L = 1.0;
  double W = 1.0;
  double beta = 1.0;

  double density(double x1) const { return beta * (1.0 + (x1 + L) / (2.0 * L)); }
  // integral of the density over [a,b]
  double linear_mass(double a, double b) const;
  double sphere_area() const;  // area of the cross-section sphere of radius W
  double total() const { return linear_mass(-L, L) * sphere_area(); }
};

NuMeasure nu_measure(int d, double L, double W, double beta = 1.0);

// Product cell: x1 interval times a box in hyperspherical angles
// (theta_1..theta_{m-1} in [0,pi], phi in [0,2pi)), m = d - 2.
struct Patch {
  NuMeasure nu;
  double x1_lo = 0.0;
  double x1_hi = 0.0;
  std::vector<std::pair<double, double>> angles;
  double mass = 0.0;

  int dim() const { return nu.d; }
  // u in [0,1]^{d-1} to the surface, by per-coordinate inverse CDFs of the
  // restricted measure; u uniform gives the normalized patch measure.
  Vec map(const double* u) const;
  Vec center() const;
  // Mass recomputed from the coordinate marginals.
  double measure() const;
  // Max pairwise distance over a res^{d-1} grid including the boundary.
  double diameter(int res = 7) const;
  // Tensor Gauss-Legendre rule in the native coordinates (weights sum to 1).
  void quadrature(int order, PointList& nodes, std::vector<double>& weights) const;
};

struct PatchDecomposition {
  NuMeasure nu;
  double tau = 0.0;
  int bands = 0;
  int cells_per_band = 0;
  std::vector<Patch> patches;
  double max_diameter = 0.0;
  double C_hat = 0.0;  // max diameter / tau
  double tau_eff = 0.0;  // (mass per patch)^{1/(d-1)}

  std::size_t size() const { return patches.size(); }
};

PatchDecomposition partition_cylinder(int d, double L, double W, double tau, double beta = 1.0);

// Equal-area partition of the unit sphere S^m into n product-angle cells.
std::vector<std::vector<std::pair<double, double>>> sphere_cells(int m, int n);

struct CubatureRule {
  int patch = -1;
  PointList points;
  int k = 1;
  double delta = 0.0;
  double certified = 0.0;  // bound on |mean (w-y)^a - nu_D avg (w-y)^a| over the host cylinder
  Eigen::VectorXd centred_error;  // per multi-index, about the patch center
  int iterations = 0;
};

// Nodes per native coordinate: 2k+2, or 2k+3 for d >= 5. Equal-weight rules with
// fewer nodes do not always exist on the sin-weighted collar intervals (sin^2
// weight near the pole for d = 5).
int default_n1(int d, int k);

// n = n1^{d-1} points: tensor product of equal-weight 1D rules in the native
// coordinates, matching patch moments up to degree k.
// Certification covers every y on the host cylinder (|y1| <= nu.L, |y_perp| = W).
CubatureRule fit_patch_points(const Patch& patch, int n, int k, double delta, int patch_id = -1);

}  // namespace gravalloc
