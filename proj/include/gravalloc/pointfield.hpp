#pragma once

#include "gravalloc/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gravalloc {

enum class DomainMode { Box, Torus };

struct DomainSpec {
  int d = 3;
  DomainMode mode = DomainMode::Box;
  double side = 1.0;
  bool origin_centered = true;

  void validate() const;
  double volume() const { return std::pow(side, d); }
  Vec lower() const;
  bool contains(const Vec& x) const;
};

struct StarField {
  PointList points;
  double intensity = 1.0;
  DomainSpec domain;
  std::uint64_t seed = 0;

  int dim() const { return domain.d; }
  std::size_t size() const { return points.size(); }
};

// Homogeneous Poisson process restricted to the domain.
StarField sample_poisson(const DomainSpec& domain, double intensity, std::uint64_t seed);

enum class RegionKind { Box, Cylinder, Ball, Annulus, Complement, Intersection };

// Closed sets. Box(L,W) = [-L,L] x [-W,W]^{d-1}, Cyl(L,W) = {|x1| <= L, |x_perp| <= W},
// both translated by `center`.
struct Region {
  RegionKind kind = RegionKind::Ball;
  int d = 3;
  double L = 0.0;
  double W = 0.0;
  double r = 0.0;  // ball radius, annulus inner radius
  double p = 0.0;  // annulus outer radius
  Vec center;
  std::vector<Region> parts;

  static Region box(int d, double L, double W);
  static Region box(double L, double W, const Vec& center);
  static Region cylinder(int d, double L, double W);
  static Region shifted_cylinder(double L, double W, const Vec& offset);
  static Region ball(const Vec& center, double r);
  static Region annulus(const Vec& center, double q, double p);
  static Region complement(const Region& inner);
  static Region intersection(std::vector<Region> parts);

  bool bounded() const;
  bool contains(const Vec& x) const;
  // Axis-aligned bounding box of a bounded region.
  std::pair<Vec, Vec> bounds() const;
  void validate() const;
};

struct VolumeResult {
  double value = 0.0;
  double error = 0.0;
};

// Exact for primitives; intersections fall back to quadrature with an error estimate.
VolumeResult region_volume_with_error(const Region& r, double tol = 1e-8);
double region_volume(const Region& r);

// Curved boundary {|x1| <= L, |x_perp| = W} with optional caps.
struct CylinderSurface {
  int d = 3;
  double L = 1.0;
  double W = 1.0;
  bool include_caps = false;

  double area() const;
  // Volume of {x : dist(x, curved part) <= rho}.
  double layer_volume(double rho) const;
  bool layer_contains(const Vec& x, double rho) const;
};

// Bounds of the Poisson deviation lemma. The concentration part uses a fixed
// constant delta = kPoissonDelta.
inline constexpr double kPoissonDelta = 1.0;
enum class PoissonPart { UpperTail, Concentration, PointMass };
// For PointMass, t is the integer n and c the lower-bound constant.
double poisson_bound(double lambda, double t, PoissonPart part, double c = 1.0);
// Largest c such that P(X=n) >= c/sqrt(n) exp(-(n-lambda)^2/lambda) on the given grid.
double fit_pointmass_constant(const std::vector<double>& lambdas, int n_max_factor = 4);

double poisson_pmf(double lambda, long n);
double poisson_tail(double lambda, long n);  // P(X >= n)

// JSONL: header record then one point per line, 17 significant digits.
void write_jsonl(std::ostream& out, const StarField& field);
StarField read_jsonl(std::istream& in);

}  // namespace gravalloc
