#include "gravalloc/pointfield.hpp"

#include "gravalloc/rng.hpp"

#include <boost/math/distributions/poisson.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace gravalloc {

void DomainSpec::validate() const {
  if (d < 3 || d > kMaxDim) throw ParameterError("dimension must be in [3, " + std::to_string(kMaxDim) + "]");
  if (!(side > 0.0)) throw ParameterError("domain side must be positive");
  if (mode == DomainMode::Torus && !origin_centered) throw ParameterError("torus domain must be origin-centered");
}

Vec DomainSpec::lower() const {
  return Vec::Constant(d, origin_centered ? -0.5 * side : 0.0);
}

bool DomainSpec::contains(const Vec& x) const {
  Vec lo = lower();
  for (int i = 0; i < d; ++i) {
    if (x[i] < lo[i] || x[i] > lo[i] + side) return false;
  }
  return true;
}

StarField sample_poisson(const DomainSpec& domain, double intensity, std::uint64_t seed) {
  domain.validate();
  if (!(intensity > 0.0)) throw ParameterError("intensity must be positive");
  StarField f;
  f.domain = domain;
  f.intensity = intensity;
  f.seed = seed;

  Stream count_stream(seed, 0, "poisson-count");
  std::poisson_distribution<long> count_dist(intensity * domain.volume());
  long n = count_dist(count_stream);

  Stream pos(seed, 0, "poisson-position");
  Vec lo = domain.lower();
  f.points.reserve(n);
  for (long i = 0; i < n; ++i) {
    Vec z(domain.d);
    for (int j = 0; j < domain.d; ++j) {
      z[j] = lo[j] + domain.side * pos.uniform();
    }
    f.points.push_back(z);
  }
  return f;
}

Region Region::box(int d, double L, double W) { return box(L, W, Vec::Zero(d)); }

Region Region::box(double L, double W, const Vec& center) {
  Region r;
  r.kind = RegionKind::Box;
  r.d = static_cast<int>(center.size());
  r.L = L;
  r.W = W;
  r.center = center;
  r.validate();
  return r;
}

Region Region::cylinder(int d, double L, double W) { return shifted_cylinder(L, W, Vec::Zero(d)); }

Region Region::shifted_cylinder(double L, double W, const Vec& offset) {
  Region r;
  r.kind = RegionKind::Cylinder;
  r.d = static_cast<int>(offset.size());
  r.L = L;
  r.W = W;
  r.center = offset;
  r.validate();
  return r;
}

Region Region::ball(const Vec& center, double radius) {
  Region r;
  r.kind = RegionKind::Ball;
  r.d = static_cast<int>(center.size());
  r.r = radius;
  r.center = center;
  r.validate();
  return r;
}

Region Region::annulus(const Vec& center, double q, double p) {
  Region r;
  r.kind = RegionKind::Annulus;
  r.d = static_cast<int>(center.size());
  r.r = q;
  r.p = p;
  r.center = center;
  r.validate();
  return r;
}

Region Region::complement(const Region& inner) {
  Region r;
  r.kind = RegionKind::Complement;
  r.d = inner.d;
  r.center = Vec::Zero(inner.d);
  r.parts = {inner};
  return r;
}

Region Region::intersection(std::vector<Region> parts) {
  if (parts.empty()) throw ParameterError("intersection needs at least one region");
  Region r;
  r.kind = RegionKind::Intersection;
  r.d = parts.front().d;
  r.center = Vec::Zero(r.d);
  for (const auto& p : parts) {
    if (p.d != r.d) throw ParameterError("intersection parts differ in dimension");
  }
  r.parts = std::move(parts);
  return r;
}

void Region::validate() const {
  if (d < 1 || d > kMaxDim) throw ParameterError("region dimension out of range");
  switch (kind) {
    case RegionKind::Box:
    case RegionKind::Cylinder:
      if (!(L > 0.0) || !(W > 0.0)) throw ParameterError("L and W must be positive");
      break;
    case RegionKind::Ball:
      if (!(r > 0.0)) throw ParameterError("ball radius must be positive");
      break;
    case RegionKind::Annulus:
      if (!(r > 0.0) || !(p > r)) throw ParameterError("annulus needs 0 < q < p");
      break;
    default:
      break;
  }
}

bool Region::bounded() const {
  switch (kind) {
    case RegionKind::Complement:
      return false;
    case RegionKind::Intersection:
      for (const auto& p : parts) {
        if (p.bounded()) return true;
      }
      return false;
    default:
      return true;
  }
}

bool Region::contains(const Vec& x) const {
  switch (kind) {
    case RegionKind::Box: {
      Vec y = x - center;
      if (std::abs(y[0]) > L) return false;
      for (int i = 1; i < d; ++i) {
        if (std::abs(y[i]) > W) return false;
      }
      return true;
    }
    case RegionKind::Cylinder: {
      Vec y = x - center;
      return std::abs(y[0]) <= L && y.tail(d - 1).squaredNorm() <= W * W;
    }
    case RegionKind::Ball:
      return (x - center).squaredNorm() <= r * r;
    case RegionKind::Annulus: {
      double s = (x - center).squaredNorm();
      return s >= r * r && s <= p * p;
    }
    case RegionKind::Complement:
      return !parts[0].contains(x);
    case RegionKind::Intersection:
      for (const auto& p : parts) {
        if (!p.contains(x)) return false;
      }
      return true;
  }
  return false;
}

std::pair<Vec, Vec> Region::bounds() const {
  switch (kind) {
    case RegionKind::Box:
    case RegionKind::Cylinder: {
      Vec h = Vec::Constant(d, W);
      h[0] = L;
      return {center - h, center + h};
    }
    case RegionKind::Ball:
      return {center.array() - r, center.array() + r};
    case RegionKind::Annulus:
      return {center.array() - p, center.array() + p};
    case RegionKind::Intersection: {
      Vec lo = Vec::Constant(d, -std::numeric_limits<double>::infinity());
      Vec hi = Vec::Constant(d, std::numeric_limits<double>::infinity());
      for (const auto& part : parts) {
        if (!part.bounded()) continue;
        auto [a, b] = part.bounds();
        lo = lo.cwiseMax(a);
        hi = hi.cwiseMin(b);
      }
      if (!std::isfinite(lo.sum()) || !std::isfinite(hi.sum())) throw UnsupportedError("unbounded region");
      return {lo, hi};
    }
    case RegionKind::Complement:
      break;
  }
  throw UnsupportedError("unbounded region has no bounding box");
}

namespace {

double primitive_volume(const Region& r) {
  switch (r.kind) {
    case RegionKind::Box:
      return 2.0 * r.L * std::pow(2.0 * r.W, r.d - 1);
    case RegionKind::Cylinder:
      return 2.0 * r.L * kappa(r.d - 1) * std::pow(r.W, r.d - 1);
    case RegionKind::Ball:
      return kappa(r.d) * std::pow(r.r, r.d);
    case RegionKind::Annulus:
      return kappa(r.d) * (std::pow(r.p, r.d) - std::pow(r.r, r.d));
    default:
      break;
  }
  throw UnsupportedError("not a primitive region");
}

// Midpoint-rule count on a dyadic sequence of grids.
double grid_volume(const Region& r, int n) {
  auto [lo, hi] = r.bounds();
  int d = r.d;
  Vec h = (hi - lo) / n;
  double cell = h.prod();
  long total = 1;
  for (int i = 0; i < d; ++i) total *= n;
  long inside = 0;
  Vec x(d);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int i = 0; i < d; ++i) {
      x[i] = lo[i] + (static_cast<double>(rem % n) + 0.5) * h[i];
      rem /= n;
    }
    if (r.contains(x)) ++inside;
  }
  return inside * cell;
}

}  // namespace

VolumeResult region_volume_with_error(const Region& r, double tol) {
  if (!r.bounded()) throw UnsupportedError("volume of an unbounded region");
  if (r.kind != RegionKind::Intersection) return {primitive_volume(r), 0.0};
  if (r.parts.size() == 1 && r.parts[0].kind != RegionKind::Complement) return region_volume_with_error(r.parts[0], tol);
  long budget = 1L << 24;
  double prev = grid_volume(r, 8);
  double err = std::numeric_limits<double>::infinity();
  for (int n = 16;; n *= 2) {
    long cost = 1;
    for (int i = 0; i < r.d; ++i) cost *= n;
    if (cost > budget) break;
    double cur = grid_volume(r, n);
    err = std::abs(cur - prev);
    prev = cur;
    if (err <= tol * std::max(1.0, std::abs(cur))) break;
  }
  return {prev, err};
}

double region_volume(const Region& r) { return region_volume_with_error(r).value; }

double CylinderSurface::area() const {
  double curved = 2.0 * L * sphere_area(d - 2) * std::pow(W, d - 2);
  if (include_caps) curved += 2.0 * kappa(d - 1) * std::pow(W, d - 1);
  return curved;
}

double CylinderSurface::layer_volume(double rho) const {
  if (rho < 0.0) throw ParameterError("layer thickness must be nonnegative");
  double inner = std::max(W - rho, 0.0);
  double shell = 2.0 * L * kappa(d - 1) * (std::pow(W + rho, d - 1) - std::pow(inner, d - 1));
  // Beyond each end: half-disc of radius rho around the rim, swept by the (d-2)-sphere.
  auto f = [&](double u) {
    double h = std::sqrt(std::max(rho * rho - u * u, 0.0));
    double s_lo = std::max(W - h, 0.0);
    double s_hi = W + h;
    return std::pow(s_hi, d - 1) - std::pow(s_lo, d - 1);
  };
  double ends = 0.0;
  if (rho > 0.0) {
    ends = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, rho, 15, 1e-12);
    ends *= 2.0 * kappa(d - 1);
  }
  return shell + ends;
}

bool CylinderSurface::layer_contains(const Vec& x, double rho) const {
  double s = x.tail(d - 1).norm();
  double a = std::abs(x[0]);
  if (a <= L) return std::abs(s - W) <= rho;
  double du = a - L;
  double ds = s - W;
  return du * du + ds * ds <= rho * rho;
}

double poisson_pmf(double lambda, long n) {
  if (n < 0) return 0.0;
  return boost::math::pdf(boost::math::poisson_distribution<double>(lambda), static_cast<double>(n));
}

double poisson_tail(double lambda, long n) {
  if (n <= 0) return 1.0;
  // P(X >= n) = P(n, lambda) regularized lower gamma
  return boost::math::gamma_p(static_cast<double>(n), lambda);
}

double poisson_bound(double lambda, double t, PoissonPart part, double c) {
  if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
  switch (part) {
    case PoissonPart::UpperTail:
      if (t < 2.0 * lambda) throw PreconditionError("upper tail bound needs t >= 2 lambda");
      return std::exp(-0.25 * t * std::log(t / lambda));
    case PoissonPart::Concentration:
      if (t < 0.0 || t > kPoissonDelta * lambda) throw PreconditionError("concentration bound needs 0 <= t <= delta lambda");
      return 2.0 * std::exp(-t * t / (3.0 * lambda));
    case PoissonPart::PointMass: {
      if (t < lambda || t != std::floor(t) || t < 1.0) throw PreconditionError("point mass bound needs integer n >= lambda");
      double n = t;
      return c / std::sqrt(n) * std::exp(-(n - lambda) * (n - lambda) / lambda);
    }
  }
  return 0.0;
}

double fit_pointmass_constant(const std::vector<double>& lambdas, int n_max_factor) {
  double c = std::numeric_limits<double>::infinity();
  for (double lambda : lambdas) {
    long n0 = std::max(1L, static_cast<long>(std::ceil(lambda)));
    long n1 = std::max(n0, static_cast<long>(std::ceil(n_max_factor * lambda)));
    for (long n = n0; n <= n1; ++n) {
      double p = poisson_pmf(lambda, n);
      double shape = std::exp(-(n - lambda) * (n - lambda) / lambda) / std::sqrt(static_cast<double>(n));
      if (shape > 0.0 && p > 0.0) c = std::min(c, p / shape);
    }
  }
  return c;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_jsonl(std::ostream& out, const StarField& field) {
  // Hand-formatted so that every coordinate carries exactly 17 significant digits.
  out << "{\"schema\":\"gravalloc.starfield/1\",\"d\":" << field.domain.d << ",\"mode\":\""
      << (field.domain.mode == DomainMode::Torus ? "torus" : "box") << "\",\"side\":" << fmt17(field.domain.side)
      << ",\"origin_centered\":" << (field.domain.origin_centered ? "true" : "false")
      << ",\"intensity\":" << fmt17(field.intensity) << ",\"seed\":" << field.seed << ",\"count\":" << field.size()
      << "}\n";
  for (const auto& z : field.points) {
    out << '[';
    for (int i = 0; i < z.size(); ++i) {
      if (i) out << ',';
      out << fmt17(z[i]);
    }
    out << "]\n";
  }
}

StarField read_jsonl(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParameterError("empty star field stream");
  auto h = nlohmann::json::parse(line);
  StarField f;
  f.domain.d = h.at("d").get<int>();
  f.domain.mode = h.at("mode").get<std::string>() == "torus" ? DomainMode::Torus : DomainMode::Box;
  f.domain.side = h.at("side").get<double>();
  f.domain.origin_centered = h.at("origin_centered").get<bool>();
  f.intensity = h.at("intensity").get<double>();
  f.seed = h.at("seed").get<std::uint64_t>();
  f.domain.validate();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto a = nlohmann::json::parse(line);
    Vec z(f.domain.d);
    for (int i = 0; i < f.domain.d; ++i) z[i] = a.at(i).get<double>();
    f.points.push_back(z);
  }
  return f;
}

}  // namespace gravalloc
