#include "gravalloc/fields.hpp"

#include "gravalloc/kernel.hpp"

namespace gravalloc {

Vec ForceField::force(const Vec& x) const {
  Vec out(dim());
  force(x.data(), out.data());
  return out;
}

Nearest ForceField::nearest(const Vec& x) const {
  Nearest best;
  const auto& s = stars();
  for (std::size_t i = 0; i < s.size(); ++i) {
    double r = displacement(x, s[i]).norm();
    if (r < best.distance) best = {static_cast<int>(i), r};
  }
  return best;
}

double ForceField::potential(const Vec&) const { throw UnsupportedError("field has no potential"); }

namespace {

// Largest r in (0, rmax) with r^{1-d} >= 2 (f0 + r lip(r)); lip nondecreasing.
template <class Lip>
double solve_capture(int d, double f0, double rmax, Lip&& lip) {
  auto ok = [&](double r) { return std::pow(r, 1.0 - d) >= 2.0 * (f0 + r * lip(r)); };
  double lo = 0.0, hi = rmax;
  if (ok(hi)) return hi;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (ok(mid)) lo = mid;
    else hi = mid;
  }
  return lo;
}

}  // namespace

PeriodicField::PeriodicField(const StarField& field)
    : d_(field.dim()), side_(field.domain.side), lower_(field.domain.lower()), stars_(field.points) {
  if (field.domain.mode != DomainMode::Torus) throw ParameterError("periodic field needs a torus domain");
  kernel_ = PeriodicKernel::get(d_, side_);
  kv_ = kappa(d_) / kernel_->volume();
  flat_.reserve(stars_.size() * d_);
  for (const auto& z : stars_) {
    for (int i = 0; i < d_; ++i) flat_.push_back(z[i]);
  }
  const int n = static_cast<int>(stars_.size());
  capture_.assign(n, 0.0);
  if (!kernel_->tabulated()) return;
  const double kv = kappa(d_) / kernel_->volume();
  const double lipc = kernel_->residual_lipschitz();
  for (int i = 0; i < n; ++i) {
    Vec f = Vec::Zero(d_);
    std::vector<double> dist;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      Vec r = kernel_->min_image(stars_[j] - stars_[i]);
      f += kernel_->force(r);
      dist.push_back(r.norm());
    }
    double dmin = side_;
    for (double D : dist) dmin = std::min(dmin, D);
    double f0 = f.norm();
    capture_[i] = solve_capture(d_, f0, 0.5 * dmin, [&](double r) {
      double s = n * (kv + lipc);
      for (double D : dist) s += (d_ - 1.0) / std::pow(D - r, d_);
      return s;
    });
  }
}

Nearest PeriodicField::force(const double* x, double* out) const {
  const int d = d_;
  const double S = side_, inv = 1.0 / side_;
  const double kv = kv_;
  Nearest best;
  double best2 = std::numeric_limits<double>::infinity();
  const std::size_t n = stars_.size();
  if (d == 3 && kernel_->tabulated()) {
    double f0 = 0, f1 = 0, f2 = 0;
    double r[3], c[3];
    for (std::size_t j = 0; j < n; ++j) {
      const double* z = &flat_[3 * j];
      for (int i = 0; i < 3; ++i) {
        double v = z[i] - x[i];
        r[i] = v - S * std::nearbyint(v * inv);
      }
      double r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
      if (r2 < best2) {
        best2 = r2;
        best.index = static_cast<int>(j);
      }
      kernel_->residual3(r, c);
      double w = (r2 > 0.0 ? 1.0 / (r2 * std::sqrt(r2)) : 0.0) - kv;
      f0 += w * r[0] + c[0];
      f1 += w * r[1] + c[1];
      f2 += w * r[2] + c[2];
    }
    out[0] = f0;
    out[1] = f1;
    out[2] = f2;
    best.distance = std::sqrt(best2);
    return best;
  }
  Vec f = Vec::Zero(d);
  Vec r(d);
  for (std::size_t j = 0; j < n; ++j) {
    for (int i = 0; i < d; ++i) {
      double v = flat_[d * j + i] - x[i];
      r[i] = v - S * std::nearbyint(v * inv);
    }
    double r2 = r.squaredNorm();
    if (r2 < best2) {
      best2 = r2;
      best.index = static_cast<int>(j);
    }
    if (r2 == 0.0) continue;
    f += kernel_->force(r);
  }
  for (int i = 0; i < d; ++i) out[i] = f[i];
  best.distance = std::sqrt(best2);
  return best;
}

double PeriodicField::potential(const Vec& x) const {
  double s = 0.0;
  for (const auto& z : stars_) s += kernel_->potential_direct(kernel_->min_image(z - x));
  return s;
}

void PeriodicField::wrap(double* x) const {
  for (int i = 0; i < d_; ++i) {
    double u = x[i] - lower_[i];
    u -= side_ * std::floor(u / side_);
    if (u >= side_) u -= side_;
    x[i] = lower_[i] + u;
  }
}

std::optional<double> PeriodicField::divergence() const {
  return d_ * kappa(d_) * static_cast<double>(stars_.size()) / kernel_->volume();
}

RestrictedField::RestrictedField(const StarField& field, const Region& A, double tol)
    : d_(field.dim()), region_(A), tol_(tol) {
  if (!A.bounded()) throw UnsupportedError("restricted field needs a bounded region");
  for (const auto& z : field.points) {
    if (A.contains(z)) stars_.push_back(z);
  }
  if (A.kind != RegionKind::Ball) return;
  const int n = static_cast<int>(stars_.size());
  capture_.assign(n, 0.0);
  const double lipb = (d_ - 1.0) * kappa(d_);
  for (int i = 0; i < n; ++i) {
    Vec f(d_);
    force(stars_[i].data(), f.data());  // the self term is skipped at r = 0
    std::vector<double> dist;
    double dmin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      dist.push_back((stars_[j] - stars_[i]).norm());
      dmin = std::min(dmin, dist.back());
    }
    if (dist.empty()) dmin = A.r;
    capture_[i] = solve_capture(d_, f.norm(), 0.5 * dmin, [&](double r) {
      double s = lipb;
      for (double D : dist) s += (d_ - 1.0) / std::pow(D - r, d_);
      return s;
    });
  }
}

Nearest RestrictedField::force(const double* xp, double* out) const {
  Eigen::Map<const Vec> xm(xp, d_);
  Vec x = xm;
  Vec f = Vec::Zero(d_);
  Nearest best;
  for (std::size_t j = 0; j < stars_.size(); ++j) {
    Vec v = stars_[j] - x;
    double r2 = v.squaredNorm();
    if (r2 < best.distance * best.distance) best = {static_cast<int>(j), std::sqrt(r2)};
    if (r2 == 0.0) continue;
    f += v * inv_pow_d(r2, d_);
  }
  if (region_.kind == RegionKind::Ball) {
    Vec v = region_.center - x;
    double rho = v.norm();
    double k = kappa(d_);
    if (rho <= region_.r) f -= k * v;
    else f -= k * std::pow(region_.r, d_) * v * inv_pow_d(rho * rho, d_);
  } else {
    f -= background_force(region_, x, tol_).value;
  }
  for (int i = 0; i < d_; ++i) out[i] = f[i];
  return best;
}

double RestrictedField::potential(const Vec& x) const {
  double s = 0.0;
  for (const auto& z : stars_) s -= std::pow((z - x).squaredNorm(), 0.5 * (2.0 - d_));
  if (region_.kind == RegionKind::Ball) {
    double rho = (x - region_.center).norm();
    double k = kappa(d_), r = region_.r;
    if (rho <= r) s += 0.5 * k * (d_ * r * r - (d_ - 2.0) * rho * rho);
    else s += k * std::pow(r, d_) * std::pow(rho, 2.0 - d_);
  } else {
    s += background_potential(region_, x, tol_).value;
  }
  return s / (d_ - 2.0);
}

OrderedSumField::OrderedSumField(const StarField& field, ForcePolicy policy)
    : field_(field), policy_(policy), anchor_(Vec::Zero(field.dim())) {
  if (field.domain.mode != DomainMode::Box) throw ParameterError("ordered summation needs a box domain");
  policy_.validate();
  if (!field.domain.origin_centered) anchor_ = field.domain.lower().array() + 0.5 * field.domain.side;
}

Nearest OrderedSumField::force(const double* xp, double* out) const {
  Vec x = Eigen::Map<const Vec>(xp, dim());
  Nearest best = ForceField::nearest(x);
  Vec f = force_total(x, field_, policy_).value;
  for (int i = 0; i < dim(); ++i) out[i] = f[i];
  return best;
}

double OrderedSumField::potential(const Vec& x) const {
  if (dim() >= 5) return potential_total(x, field_, policy_).value;
  return potential_diff_total(anchor_, x, field_, policy_).value;
}

std::unique_ptr<ForceField> make_field(const StarField& field, const ForcePolicy& policy) {
  if (field.domain.mode == DomainMode::Torus) return std::make_unique<PeriodicField>(field);
  return std::make_unique<OrderedSumField>(field, policy);
}

}  // namespace gravalloc
