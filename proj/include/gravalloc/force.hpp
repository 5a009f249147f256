#pragma once

#include "gravalloc/kernel.hpp"
#include "gravalloc/pointfield.hpp"
#include "gravalloc/regions.hpp"

#include <optional>

namespace gravalloc {

struct ForceVector {
  Vec value;
  double error = 0.0;  // quadrature / truncation estimate

  double first() const { return value[0]; }
  // F(x)_n, the cylindrical radial component at the evaluation point x
  double radial(const Vec& x) const { return cylindrical_radial(value, x); }
};

enum class Ordering { DistanceOrderedAnnuli, TorusMinimumImage };

struct ForcePolicy {
  Ordering ordering = Ordering::DistanceOrderedAnnuli;
  double growth = 2.0;
  double tol = 1e-3;
  std::optional<double> max_radius;
  double initial_radius = 1.0;

  void validate() const;
  static ForcePolicy torus(double tol = 1e-6) {
    ForcePolicy p;
    p.ordering = Ordering::TorusMinimumImage;
    p.tol = tol;
    return p;
  }
};

enum class PotentialKind { Stationary, Restricted, Difference };

struct PotentialValue {
  double value = 0.0;
  PotentialKind kind = PotentialKind::Restricted;
  double error = 0.0;
};

// Evaluations closer than this to a star are rejected.
inline constexpr double kStarGuard = 1e-6;

// Sum over stars in A of g(z - x) minus the integral over A of g(z - x).
// A with bounded complement is handled as F(x) - F(x | complement).
ForceVector force_restricted(const Vec& x, const StarField& field, const Region& A, double tol = 1e-6,
                             const ForcePolicy* total_policy = nullptr);

ForceVector force_total(const Vec& x, const StarField& field, const ForcePolicy& policy);

// Restricted potential U(x|A) = (1/(d-2)) [ -sum |z-x|^{2-d} + int_A |z-x|^{2-d} ].
PotentialValue potential(const Vec& x, const StarField& field, const Region& A, double tol = 1e-8);
// Stationary potential, d >= 5 only.
PotentialValue potential_total(const Vec& x, const StarField& field, const ForcePolicy& policy);

// U(y|A) - U(x|A).
PotentialValue potential_diff(const Vec& x, const Vec& y, const StarField& field, const Region& A,
                              double tol = 1e-8);
// Unrestricted difference: origin-ordered sum (box) or periodic potential (torus).
PotentialValue potential_diff_total(const Vec& x, const Vec& y, const StarField& field, const ForcePolicy& policy);

double divergence_probe(const Vec& x, const StarField& field, const Region& A, double h, double tol = 1e-9);

// -integral over the box of g(z - x), computed on the uncancelled slabs only.
ForceVector empty_box_expected_force(const Region& box, const Vec& x, double tol = 1e-10);

}  // namespace gravalloc
