#pragma once

#include "gravalloc/force.hpp"
#include "gravalloc/periodic.hpp"

#include <memory>

namespace gravalloc {

struct Nearest {
  int index = -1;
  double distance = std::numeric_limits<double>::infinity();
};

// Vector field driving the flow. Implementations are immutable and thread safe.
class ForceField {
 public:
  virtual ~ForceField() = default;

  virtual int dim() const = 0;
  virtual const PointList& stars() const = 0;

  // Force at x plus the nearest star; x has dim() entries.
  virtual Nearest force(const double* x, double* out) const = 0;
  Vec force(const Vec& x) const;
  virtual Nearest nearest(const Vec& x) const;

  // A scalar U with grad U = -F, up to an additive constant.
  virtual bool has_potential() const { return false; }
  virtual double potential(const Vec& x) const;

  // Map a position back into the fundamental domain (torus) or leave it alone.
  virtual void wrap(double*) const {}
  virtual bool inside(const Vec&) const { return true; }
  // Displacement from a to b respecting periodicity.
  virtual Vec displacement(const Vec& a, const Vec& b) const { return b - a; }

  // Radius r such that every flow started in B(star, r) reaches the star
  // without leaving the ball; 0 when no certificate is available.
  virtual double capture_radius(int) const { return 0.0; }

  // Constant divergence of F away from stars, if there is one.
  virtual std::optional<double> divergence() const { return std::nullopt; }
};

// Torus field with the periodic Ewald kernel.
class PeriodicField final : public ForceField {
 public:
  explicit PeriodicField(const StarField& field);

  int dim() const override { return d_; }
  const PointList& stars() const override { return stars_; }
  Nearest force(const double* x, double* out) const override;
  using ForceField::force;
  bool has_potential() const override { return true; }
  double potential(const Vec& x) const override;
  void wrap(double* x) const override;
  Vec displacement(const Vec& a, const Vec& b) const override { return kernel_->min_image(b - a); }
  double capture_radius(int i) const override { return capture_[i]; }
  std::optional<double> divergence() const override;

  const PeriodicKernel& kernel() const { return *kernel_; }
  const Vec& lower() const { return lower_; }
  double side() const { return side_; }

 private:
  int d_;
  double side_;
  double kv_ = 0.0;  // kappa_d / volume
  Vec lower_;
  PointList stars_;
  std::vector<double> flat_;  // star coordinates, contiguous
  std::shared_ptr<const PeriodicKernel> kernel_;
  std::vector<double> capture_;
};

// F(x | A) for a bounded region A. Balls use closed forms; other regions go
// through the adaptive background quadrature.
class RestrictedField final : public ForceField {
 public:
  RestrictedField(const StarField& field, const Region& A, double tol = 1e-9);

  int dim() const override { return d_; }
  const PointList& stars() const override { return stars_; }
  Nearest force(const double* x, double* out) const override;
  using ForceField::force;
  bool has_potential() const override { return true; }
  double potential(const Vec& x) const override;
  double capture_radius(int i) const override { return capture_.empty() ? 0.0 : capture_[i]; }
  std::optional<double> divergence() const override { return std::nullopt; }

  const Region& region() const { return region_; }

 private:
  int d_;
  Region region_;
  double tol_;
  PointList stars_;  // stars inside A only
  std::vector<double> capture_;
};

// Unrestricted box-mode field: distance-ordered annular summation.
class OrderedSumField final : public ForceField {
 public:
  OrderedSumField(const StarField& field, ForcePolicy policy);

  int dim() const override { return field_.dim(); }
  const PointList& stars() const override { return field_.points; }
  Nearest force(const double* x, double* out) const override;
  using ForceField::force;
  bool has_potential() const override { return true; }
  // d >= 5: stationary potential; d = 3,4: difference against a fixed anchor.
  double potential(const Vec& x) const override;
  bool inside(const Vec& x) const override { return field_.domain.contains(x); }

 private:
  StarField field_;
  ForcePolicy policy_;
  Vec anchor_;
};

std::unique_ptr<ForceField> make_field(const StarField& field, const ForcePolicy& policy);

}  // namespace gravalloc
