#include "gravalloc/force.hpp"

#include "gravalloc/periodic.hpp"

#include <algorithm>
#include <numeric>

namespace gravalloc {

void ForcePolicy::validate() const {
  if (!(tol > 0.0)) throw ParameterError("force tolerance must be positive");
  if (!(growth > 1.0)) throw ParameterError("annulus growth factor must exceed 1");
  if (!(initial_radius > 0.0)) throw ParameterError("initial radius must be positive");
}

namespace {

void guard(const Vec& x, const Vec& z) {
  if ((z - x).norm() < kStarGuard) throw SingularityError("evaluation point within the star guard radius");
}

double quad_rel_tol(double tol) { return std::clamp(tol / 100.0, 1e-12, 1e-6); }

Vec star_sum(const Vec& x, const StarField& field, const Region& A) {
  const int d = field.dim();
  Vec s = Vec::Zero(d);
  for (const auto& z : field.points) {
    if (!A.contains(z)) continue;
    guard(x, z);
    Vec v = z - x;
    s += v * inv_pow_d(v.squaredNorm(), d);
  }
  return s;
}

double distance_outside_box(const Vec& lo, const Vec& hi, const Vec& x) {
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    double t = std::max({lo[i] - x[i], 0.0, x[i] - hi[i]});
    s += t * t;
  }
  return std::sqrt(s);
}

double boundary_distance(const Region& A, const Vec& x) {
  switch (A.kind) {
    case RegionKind::Ball:
      return std::abs((x - A.center).norm() - A.r);
    case RegionKind::Annulus: {
      double r = (x - A.center).norm();
      return std::min(std::abs(r - A.r), std::abs(r - A.p));
    }
    case RegionKind::Box: {
      auto [lo, hi] = A.bounds();
      if (!A.contains(x)) return distance_outside_box(lo, hi, x);
      return std::min((x - lo).minCoeff(), (hi - x).minCoeff());
    }
    case RegionKind::Cylinder: {
      Vec y = x - A.center;
      double s = y.tail(A.d - 1).norm();
      double a = std::abs(y[0]) - A.L;
      double b = s - A.W;
      if (a <= 0.0 && b <= 0.0) return std::min(-a, -b);
      return std::hypot(std::max(a, 0.0), std::max(b, 0.0));
    }
    case RegionKind::Complement:
      return boundary_distance(A.parts[0], x);
    case RegionKind::Intersection: {
      double m = std::numeric_limits<double>::infinity();
      for (const auto& p : A.parts) m = std::min(m, boundary_distance(p, x));
      return m;
    }
  }
  return 0.0;
}

ForceVector torus_force(const Vec& x, const StarField& field) {
  const int d = field.dim();
  auto ker = PeriodicKernel::get(d, field.domain.side);
  ForceVector out;
  out.value = Vec::Zero(d);
  for (const auto& z : field.points) {
    Vec r = ker->min_image(z - x);
    if (r.norm() < kStarGuard) throw SingularityError("evaluation point within the star guard radius");
    out.value += ker->force(r);
  }
  return out;
}

// Stars sorted by distance from x; ties broken lexicographically on coordinates.
std::vector<std::pair<double, const Vec*>> ordered_stars(const Vec& x, const StarField& field) {
  std::vector<std::pair<double, const Vec*>> v;
  v.reserve(field.size());
  for (const auto& z : field.points) v.emplace_back((z - x).norm(), &z);
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return std::lexicographical_compare(a.second->data(), a.second->data() + a.second->size(), b.second->data(),
                                        b.second->data() + b.second->size());
  });
  return v;
}

double domain_cutoff(const Vec& x, const StarField& field, const ForcePolicy& policy) {
  Vec lo = field.domain.lower();
  Vec hi = lo.array() + field.domain.side;
  double r = std::min((x - lo).minCoeff(), (hi - x).minCoeff());
  if (policy.max_radius) r = std::min(r, *policy.max_radius);
  return r;
}

}  // namespace

ForceVector force_restricted(const Vec& x, const StarField& field, const Region& A, double tol,
                             const ForcePolicy* total_policy) {
  if (x.size() != field.dim() || A.d != field.dim()) throw ParameterError("dimension mismatch");
  if (A.kind == RegionKind::Complement) {
    if (!total_policy) throw UnsupportedError("complement region needs a total-force policy");
    ForceVector tot = force_total(x, field, *total_policy);
    ForceVector in = force_restricted(x, field, A.parts[0], tol);
    tot.value -= in.value;
    tot.error += in.error;
    return tot;
  }
  ForceVector out;
  out.value = star_sum(x, field, A);
  VecIntegral bg = background_force(A, x, quad_rel_tol(tol));
  out.value -= bg.value;
  out.error = bg.error;
  if (bg.error > tol / 10.0) throw ToleranceError("background quadrature did not reach tolerance", bg.error);
  return out;
}

ForceVector force_total(const Vec& x, const StarField& field, const ForcePolicy& policy) {
  policy.validate();
  if (x.size() != field.dim()) throw ParameterError("dimension mismatch");
  if (policy.ordering == Ordering::TorusMinimumImage) {
    if (field.domain.mode != DomainMode::Torus) throw ParameterError("minimum-image ordering needs a torus domain");
    return torus_force(x, field);
  }
  const int d = field.dim();
  auto stars = ordered_stars(x, field);
  if (!stars.empty() && stars.front().first < kStarGuard) throw SingularityError("evaluation point is a star");
  double cutoff = domain_cutoff(x, field, policy);
  ForceVector out;
  out.value = Vec::Zero(d);
  std::size_t next = 0;
  double r = policy.initial_radius;
  double last = std::numeric_limits<double>::infinity();
  for (int k = 0;; ++k) {
    if (r > cutoff) throw ConvergenceError("distance-ordered sum did not converge within the cutoff", last);
    Vec inc = Vec::Zero(d);
    while (next < stars.size() && stars[next].first <= r) {
      Vec v = *stars[next].second - x;
      inc += v * inv_pow_d(v.squaredNorm(), d);
      ++next;
    }
    out.value += inc;
    if (k > 0) {
      last = inc.norm();
      if (last < policy.tol) {
        out.error = last;
        return out;
      }
    }
    r *= policy.growth;
  }
}

PotentialValue potential(const Vec& x, const StarField& field, const Region& A, double tol) {
  const int d = field.dim();
  if (!A.bounded()) throw UnsupportedError("restricted potential needs a bounded region");
  double s = 0.0;
  for (const auto& z : field.points) {
    if (!A.contains(z)) continue;
    guard(x, z);
    s -= std::pow((z - x).squaredNorm(), 0.5 * (2.0 - d));
  }
  QuadResult bg = background_potential(A, x, quad_rel_tol(tol));
  PotentialValue out;
  out.kind = PotentialKind::Restricted;
  out.value = (s + bg.value) / (d - 2.0);
  out.error = bg.error / (d - 2.0);
  return out;
}

PotentialValue potential_total(const Vec& x, const StarField& field, const ForcePolicy& policy) {
  const int d = field.dim();
  if (d < 5) throw UnsupportedError("stationary potential exists only for d >= 5; use potential_diff");
  PotentialValue out;
  out.kind = PotentialKind::Stationary;
  if (field.domain.mode == DomainMode::Torus) {
    auto ker = PeriodicKernel::get(d, field.domain.side);
    for (const auto& z : field.points) out.value += ker->potential_direct(ker->min_image(z - x));
    return out;
  }
  double T = 0.5 * field.domain.side;
  if (policy.max_radius) T = std::min(T, *policy.max_radius);
  double s = 0.0;
  for (const auto& z : field.points) {
    if (z.norm() > T) continue;
    guard(x, z);
    s -= std::pow((z - x).squaredNorm(), 0.5 * (2.0 - d));
  }
  double kd = kappa(d);
  out.value = (s + 0.5 * d * kd * T * T) / (d - 2.0) - 0.5 * kd * x.squaredNorm();
  return out;
}

PotentialValue potential_diff(const Vec& x, const Vec& y, const StarField& field, const Region& A, double tol) {
  PotentialValue out;
  out.kind = PotentialKind::Difference;
  if (x == y) return out;
  const int d = field.dim();
  double s = 0.0;
  for (const auto& z : field.points) {
    if (!A.contains(z)) continue;
    guard(x, z);
    guard(y, z);
    s += -std::pow((z - y).squaredNorm(), 0.5 * (2.0 - d)) + std::pow((z - x).squaredNorm(), 0.5 * (2.0 - d));
  }
  QuadResult by = background_potential(A, y, quad_rel_tol(tol));
  QuadResult bx = background_potential(A, x, quad_rel_tol(tol));
  out.value = (s + by.value - bx.value) / (d - 2.0);
  out.error = (by.error + bx.error) / (d - 2.0);
  return out;
}

PotentialValue potential_diff_total(const Vec& x, const Vec& y, const StarField& field, const ForcePolicy& policy) {
  PotentialValue out;
  out.kind = PotentialKind::Difference;
  if (x == y) return out;
  const int d = field.dim();
  if (field.domain.mode == DomainMode::Torus) {
    auto ker = PeriodicKernel::get(d, field.domain.side);
    double s = 0.0;
    for (const auto& z : field.points) {
      s += ker->potential_direct(ker->min_image(z - y)) - ker->potential_direct(ker->min_image(z - x));
    }
    out.value = s;
    return out;
  }
  if (d >= 5) {
    out.value = potential_total(y, field, policy).value - potential_total(x, field, policy).value;
    return out;
  }
  double T = 0.5 * field.domain.side;
  if (policy.max_radius) T = std::min(T, *policy.max_radius);
  std::vector<const Vec*> order;
  for (const auto& z : field.points) {
    if (z.norm() <= T) order.push_back(&z);
  }
  std::sort(order.begin(), order.end(), [](const Vec* a, const Vec* b) { return a->squaredNorm() < b->squaredNorm(); });
  double s = 0.0;
  for (const Vec* z : order) {
    guard(x, *z);
    guard(y, *z);
    s += -std::pow((*z - y).squaredNorm(), 0.5 * (2.0 - d)) + std::pow((*z - x).squaredNorm(), 0.5 * (2.0 - d));
  }
  out.value = s / (d - 2.0) + 0.5 * kappa(d) * (x.squaredNorm() - y.squaredNorm());
  return out;
}

double divergence_probe(const Vec& x, const StarField& field, const Region& A, double h, double tol) {
  if (!(h > 0.0)) throw ParameterError("step must be positive");
  for (const auto& z : field.points) {
    if ((z - x).norm() <= 10.0 * h) throw PreconditionError("probe too close to a star");
  }
  if (boundary_distance(A, x) <= 10.0 * h) throw PreconditionError("probe too close to the region boundary");
  const int d = field.dim();
  double div = 0.0;
  for (int i = 0; i < d; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    double fp = force_restricted(xp, field, A, tol).value[i];
    double fm = force_restricted(xm, field, A, tol).value[i];
    div += (fp - fm) / (2.0 * h);
  }
  return div;
}

ForceVector empty_box_expected_force(const Region& box, const Vec& x, double tol) {
  if (box.kind != RegionKind::Box) throw ParameterError("empty-box force needs a box region");
  auto [lo, hi] = box.bounds();
  const int d = box.d;
  for (int i = 0; i < d; ++i) {
    if (!(x[i] > lo[i] && x[i] < hi[i])) throw PreconditionError("point is not in the box interior");
  }
  ForceVector out;
  out.value = Vec::Zero(d);
  for (int i = 0; i < d; ++i) {
    // Reflection about x_i cancels the symmetric part of the box in component i.
    double y = x[i] - box.center[i];
    Vec slo = lo, shi = hi;
    if (y >= 0.0) {
      shi[i] = box.center[i] + 2.0 * y - (hi[i] - box.center[i]);
    } else {
      slo[i] = box.center[i] + 2.0 * y + (hi[i] - box.center[i]);
    }
    if (shi[i] <= slo[i]) continue;
    QuadResult c = box_force_component(slo, shi, x, i, std::clamp(tol, 1e-12, 1e-6));
    out.value[i] = -c.value;
    out.error += c.error;
  }
  return out;
}

}  // namespace gravalloc
