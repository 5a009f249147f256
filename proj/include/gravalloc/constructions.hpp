#pragma once

#include "gravalloc/patches.hpp"
#include "gravalloc/pointfield.hpp"

#include <cstdint>
#include <functional>
#include <string>

namespace gravalloc {

// ---- attracting galaxy ----

struct GalaxyConfig {
  int d = 3;
  double R = 50.0;
  double gamma = 1.0;
  double M = 0.5;        // radius of V- = Cyl(R, M); 2M <= R^{2 eps}
  long k = 0;            // surplus stars
  double eps = 0.02;
  double eta = 0.0;      // 0: largest value in (0.5,1) with Vol(U) integer
  bool background = true;  // also draw the Vol(U) typical stars of U

  void validate() const;
};

struct Galaxy {
  GalaxyConfig cfg;
  double eta = 0.0;
  double volume_U = 0.0;  // integer by choice of eta
  Region U;               // Cyl(R, eta R) + 10 R e1
  Region V_minus;         // Cyl(R, M)
  Region emptied;         // 2 V0
  PointList background;   // Vol(U) uniform points in U
  PointList surplus;      // k uniform points in U

  Vec surplus_force(const Vec& x) const;  // F5
};

double galaxy_eta(int d, double R);
Galaxy build_galaxy(const GalaxyConfig& cfg, std::uint64_t seed);

// Every term of F5(x)_1 lies in [lo, hi] k / R^{d-1} for x in V-, from the
// geometry alone: z1 - x1 in [8R, 12R] and |z - x| between 8R and the far corner.
struct GalaxyBounds {
  double lo = 0.0;
  double hi = 0.0;
};
GalaxyBounds galaxy_f5_bounds(const GalaxyConfig& cfg, double eta);

// ---- wormhole ----

struct WormholeConfig {
  int d = 4;
  double R = 10.0;
  double gamma = 1.0;
  double eps = 0.01;
  double lambda = 0.5;
  int k = 3;             // moment degree of the patch rules
  int n1 = 0;            // nodes per coordinate, 0: default_n1
  double tau = 0.0;      // patch scale, 0: eta W R^{-eps} with eta = 0.75
  double delta = 1e-6;   // patch moment tolerance
  double rho = -1.0;     // perturbation radius, < 0: R^{-3d}
  std::size_t max_points = 10000000;

  void validate() const;
};

struct WormholeParams {
  double W = 0.0;
  double beta = 0.0;
  double rho = 0.0;
  double tau = 0.0;
  double L = 0.0;        // half-length of the charged surface (= R)
  int n1 = 0;
  int n = 0;
  double unit_n = 0.0;   // beta tau^{d-1}: stars per patch if each point were a unit star
};

WormholeParams wormhole_params(const WormholeConfig& cfg);

struct Wormhole {
  WormholeConfig cfg;
  WormholeParams par;
  PatchDecomposition patches;
  std::vector<double> coords;  // A, flat, perturbed into the layer
  std::vector<double> mass;    // per point: patch mass / n
  double certified = 0.0;      // worst patch certificate

  std::size_t size() const { return mass.size(); }
  Vec point(std::size_t i) const;
  Vec force(const Vec& x) const;  // F^{4,1}
};

// Throws CertificationError (with patch id) from the patch rules and
// QualityError when the point count would exceed cfg.max_points.
Wormhole build_wormhole(const WormholeConfig& cfg, std::uint64_t seed);
std::size_t wormhole_point_estimate(const WormholeConfig& cfg);

// G(x) = int over the curved surface of g(z - x) dnu(z), nu = beta nu_{R,W}.
Vec continuous_wormhole_force(const WormholeConfig& cfg, const Vec& x, double rel_tol = 1e-10);
// Same measure, any half-length, radius and scale.
Vec surface_force(int d, double L, double W, double beta, const Vec& x, double rel_tol = 1e-10);

// Integral over the sphere {z1 = x1 + s, |z_perp| = W} (surface measure) of
// g(z - x), x at transverse distance rho: {axial, transverse along x_perp}.
std::pair<double, double> ring_force(int d, double W, double s, double rho);

struct EquilibriumResult {
  Vec value;            // H'_M(x), truncated
  double tail = 0.0;    // bound on the truncated part
  double scale = 0.0;   // integral of |ring force| over the same range
  double relative = 0.0;
};

// Infinite cylinder of radius M, truncated at |z1 - x1| <= T.
EquilibriumResult equilibrium_check(int d, double M, const Vec& x, double T_factor = 1000.0, double rel_tol = 1e-12);

// ---- force condition ----

struct ForceConditionReport {
  double min_f1 = 0.0;
  double max_f1 = 0.0;
  double min_fn = 0.0;   // over boundary probes
  double scale = 0.0;    // R^{1-gamma}
  double xi = 0.0;       // smallest xi with the condition true, inf if none
  bool verdict = false;  // true for xi_max
  double xi_max = 0.0;
  std::size_t interior_probes = 0;
  std::size_t boundary_probes = 0;
};

// V = Cyl(L, W) + offset e1; probes on a grid with `per_axis` points along x1
// and a radial/angular pattern across; boundary probes on |x_perp| = W.
ForceConditionReport verify_E1(const std::function<Vec(const Vec&)>& force, int d, double L, double W, double R,
                               double gamma, double xi_max, int per_axis = 9);

}  // namespace gravalloc
