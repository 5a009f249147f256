#include "gravalloc/constructions.hpp"

#include "gravalloc/boxes.hpp"
#include "gravalloc/kernel.hpp"
#include "gravalloc/parallel.hpp"
#include "gravalloc/quadrature.hpp"
#include "gravalloc/rng.hpp"

#include <limits>
#include <random>

namespace gravalloc {

namespace {

Vec uniform_in_ball(Stream& rng, int m, double radius) {
  std::normal_distribution<double> nd;
  Vec v(m);
  for (int i = 0; i < m; ++i) v[i] = nd(rng);
  return v.normalized() * radius * std::pow(rng.uniform(), 1.0 / m);
}

Vec uniform_in_cylinder(Stream& rng, int d, double L, double W, double shift) {
  Vec x(d);
  x[0] = shift + rng.uniform(-L, L);
  x.tail(d - 1) = uniform_in_ball(rng, d - 1, W);
  return x;
}

double cylinder_volume(int d, double L, double W) { return 2.0 * L * kappa(d - 1) * std::pow(W, d - 1); }

}  // namespace

// ---- galaxy ----

void GalaxyConfig::validate() const {
  if (d < 3 || d > kMaxDim) throw ParameterError("dimension out of range");
  if (!(R > 0.0 && M > 0.0)) throw ParameterError("R and M must be positive");
  if (k < 0) throw ParameterError("surplus must be nonnegative");
  if (static_cast<double>(k) >= std::pow(R, d) / M) throw ParameterError("surplus must satisfy k < R^d / M");
  if (eta != 0.0 && !(eta > 0.5 && eta < 1.0)) throw ParameterError("eta must lie in (0.5, 1)");
  if (2.0 * M > std::pow(R, 2.0 * eps)) throw ParameterError("V- does not fit in V0: need 2M <= R^{2 eps}");
}

double galaxy_eta(int d, double R) {
  const double unit = cylinder_volume(d, R, R);  // eta = 1
  double N = std::ceil(unit) - 1.0;
  double eta = std::pow(N / unit, 1.0 / (d - 1));
  if (!(eta > 0.5 && eta < 1.0)) throw ParameterError("no eta in (0.5,1) gives an integer volume");
  return eta;
}

Vec Galaxy::surplus_force(const Vec& x) const {
  Vec f = Vec::Zero(x.size());
  for (const auto& z : surplus) f += g_kernel<double>(Vec(z - x));
  return f;
}

Galaxy build_galaxy(const GalaxyConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const int d = cfg.d;
  Galaxy g;
  g.cfg = cfg;
  g.eta = cfg.eta > 0.0 ? cfg.eta : galaxy_eta(d, cfg.R);
  g.volume_U = std::round(cylinder_volume(d, cfg.R, g.eta * cfg.R));
  Vec shift = 10.0 * cfg.R * unit_vector(d, 0);
  g.U = Region::shifted_cylinder(cfg.R, g.eta * cfg.R, shift);
  g.V_minus = Region::cylinder(d, cfg.R, cfg.M);
  BoxScales s = box_scales(d, cfg.R, cfg.eps);
  g.emptied = Region::box(d, std::ldexp(1.0, s.p1 + 1), std::ldexp(1.0, 2 * s.p2 + 1));
  Stream rs(seed, 0, "galaxy-surplus");
  for (long i = 0; i < cfg.k; ++i) g.surplus.push_back(uniform_in_cylinder(rs, d, cfg.R, g.eta * cfg.R, shift[0]));
  if (cfg.background) {
    Stream rb(seed, 0, "galaxy-background");
    const long nb = static_cast<long>(g.volume_U);
    g.background.reserve(nb);
    for (long i = 0; i < nb; ++i) g.background.push_back(uniform_in_cylinder(rb, d, cfg.R, g.eta * cfg.R, shift[0]));
  }
  return g;
}

GalaxyBounds galaxy_f5_bounds(const GalaxyConfig& cfg, double eta) {
  const int d = cfg.d;
  double far = std::sqrt(144.0 + std::pow(eta + cfg.M / cfg.R, 2));
  return {8.0 / std::pow(far, d), 12.0 / std::pow(8.0, d)};
}

// ---- rings and surfaces ----

std::pair<double, double> ring_force(int d, double W, double s, double rho) {
  const double a = s * s + W * W + rho * rho;
  const double b = 2.0 * W * rho;
  if (d == 4) {
    // sphere S^2 of radius W: 2 pi W^2 int_{-1}^{1} (s, W c - rho) / (a - b c)^2 dc
    const double area = 2.0 * std::numbers::pi * W * W;
    double I0 = 2.0 / ((a - b) * (a + b));
    double I1;
    double q = b / a;
    if (q < 0.05) {
      // sum over odd n of (n+1) q^n 2/(n+2), / a^2
      double sum = 0.0, qn = q;
      for (int n = 1; n < 40; n += 2) {
        sum += (n + 1.0) * qn * 2.0 / (n + 2.0);
        qn *= q * q;
        if (qn < 1e-18 * sum) break;
      }
      I1 = sum / (a * a);
    } else {
      I1 = (2.0 * a * b / ((a - b) * (a + b)) + std::log((a - b) / (a + b))) / (b * b);
    }
    return {area * s * I0, area * (W * I1 - rho * I0)};
  }
  // S^{d-2} of radius W by its polar angle against the direction of x_perp
  const double meas = std::pow(W, d - 2) * sphere_area(d - 3);
  const int e = d - 3;
  auto dens = [&](double t) { return std::pow(a - b * std::cos(t), -0.5 * d) * (e == 0 ? 1.0 : std::pow(std::sin(t), e)); };
  double t0 = std::min(std::numbers::pi, std::hypot(W - rho, s) / W);
  std::vector<double> br{t0, std::min(std::numbers::pi, 4.0 * t0)};
  QuadResult ax = integrate_1d([&](double t) { return dens(t); }, 0.0, std::numbers::pi, br, 1e-12);
  if (rho == 0.0) return {meas * s * ax.value, 0.0};
  QuadResult tr = integrate_1d([&](double t) { return dens(t) * (W * std::cos(t) - rho); }, 0.0, std::numbers::pi, br, 1e-12);
  return {meas * s * ax.value, meas * tr.value};
}

Vec surface_force(int d, double L, double W, double beta, const Vec& x, double rel_tol) {
  const double rho = x.tail(d - 1).norm();
  if (std::abs(rho - W) < 1e-9 * W && std::abs(x[0]) <= L) throw SingularityError("point on the charged surface");
  std::vector<double> br;
  for (double f : {0.0, 1.0, 4.0, 16.0, 64.0}) {
    br.push_back(x[0] - f * W);
    br.push_back(x[0] + f * W);
  }
  auto dens = [&](double z1) { return beta * (1.0 + (z1 + L) / (2.0 * L)); };
  QuadResult ax = integrate_1d([&](double z1) { return dens(z1) * ring_force(d, W, z1 - x[0], rho).first; }, -L, L, br, rel_tol);
  Vec out = Vec::Zero(d);
  out[0] = ax.value;
  if (rho > 0.0) {
    QuadResult tr =
        integrate_1d([&](double z1) { return dens(z1) * ring_force(d, W, z1 - x[0], rho).second; }, -L, L, br, rel_tol);
    out.tail(d - 1) = x.tail(d - 1) / rho * tr.value;
  }
  return out;
}

// ---- wormhole ----

void WormholeConfig::validate() const {
  if (d < 4 || d > kMaxDim) throw ParameterError("the wormhole needs 4 <= d");
  if (!(gamma >= 0.0 && gamma < 2.0)) throw ParameterError("gamma must lie in [0, 2)");
  if (!(lambda > 0.0 && lambda < 1.0)) throw ParameterError("lambda must lie in (0, 1)");
  if (!(eps > 0.0 && eps < 1.0 / (10.0 * d))) throw ParameterError("need 0 < eps < 1/(10 d)");
  if (!(R > 1.0)) throw ParameterError("R must exceed 1");
  if (k < 1) throw ParameterError("moment degree must be at least 1");
  if (!(delta > 0.0)) throw ParameterError("delta must be positive");
}

WormholeParams wormhole_params(const WormholeConfig& cfg) {
  cfg.validate();
  const int d = cfg.d;
  WormholeParams p;
  const double a = (2.0 - cfg.gamma) / (d - 2.0);
  p.W = cfg.lambda * std::pow(cfg.R, -a + 2.0 * cfg.eps);
  p.beta = std::pow(cfg.R, a * (d - 1) - 2.0 * cfg.eps);
  p.rho = cfg.rho >= 0.0 ? cfg.rho : std::pow(cfg.R, -3.0 * d);
  p.tau = cfg.tau > 0.0 ? cfg.tau : 0.75 * p.W * std::pow(cfg.R, -cfg.eps);
  p.L = cfg.R;
  p.n1 = cfg.n1 > 0 ? cfg.n1 : default_n1(d, cfg.k);
  p.n = static_cast<int>(std::lround(std::pow(p.n1, d - 1)));
  p.unit_n = p.beta * std::pow(p.tau, d - 1);
  return p;
}

std::size_t wormhole_point_estimate(const WormholeConfig& cfg) {
  WormholeParams p = wormhole_params(cfg);
  const int d = cfg.d, m = d - 2;
  NuMeasure nu = nu_measure(d, p.L, p.W);
  double cells = std::max(1.0, std::round(nu.sphere_area() / std::pow(p.tau, m)));
  double bands = std::round(nu.total() / (cells * std::pow(p.tau, d - 1)));
  return static_cast<std::size_t>(cells * bands * p.n);
}

Vec Wormhole::point(std::size_t i) const {
  const int d = cfg.d;
  Vec x(d);
  for (int j = 0; j < d; ++j) x[j] = coords[i * d + j];
  return x;
}

Vec Wormhole::force(const Vec& x) const {
  const int d = cfg.d;
  Vec f = Vec::Zero(d);
  Vec v(d);
  for (std::size_t i = 0; i < size(); ++i) {
    for (int j = 0; j < d; ++j) v[j] = coords[i * d + j] - x[j];
    double r2 = v.squaredNorm();
    if (r2 == 0.0) throw SingularityError("probe at a construction point");
    f += mass[i] * inv_pow_d(r2, d) * v;
  }
  return f;
}

Wormhole build_wormhole(const WormholeConfig& cfg, std::uint64_t seed) {
  Wormhole w;
  w.cfg = cfg;
  w.par = wormhole_params(cfg);
  const int d = cfg.d;
  if (!(w.par.tau < w.par.W)) throw ParameterError("patch scale must be below the tube radius");
  std::size_t est = wormhole_point_estimate(cfg);
  if (est > cfg.max_points) throw QualityError("wormhole needs about " + std::to_string(est) + " points, above max_points");
  // patches of unit-measure tau^{d-1}; beta only scales the point weights
  w.patches = partition_cylinder(d, w.par.L, w.par.W, w.par.tau);
  const std::size_t K = w.patches.size();
  const int n = w.par.n;
  w.coords.assign(K * n * d, 0.0);
  w.mass.assign(K * n, 0.0);
  std::vector<double> cert(K, 0.0);
  std::vector<std::string> errors(K);
  std::vector<double> err_val(K, 0.0);
  parallel_for(K, default_threads(0), [&](std::size_t i) {
    try {
      CubatureRule rule = fit_patch_points(w.patches.patches[i], n, cfg.k, cfg.delta, static_cast<int>(i));
      cert[i] = rule.certified;
      Stream rng(seed, i, "wormhole-layer");
      const double m = w.par.beta * w.patches.patches[i].mass / n;
      for (int j = 0; j < n; ++j) {
        Vec p = rule.points[j] + uniform_in_ball(rng, d, w.par.rho);
        for (int c = 0; c < d; ++c) w.coords[(i * n + j) * d + c] = p[c];
        w.mass[i * n + j] = m;
      }
    } catch (const CertificationError& e) {
      errors[i] = e.what();
      err_val[i] = e.achieved();
    }
  }, 16);
  for (std::size_t i = 0; i < K; ++i) {
    if (!errors[i].empty()) throw CertificationError(errors[i], err_val[i], static_cast<int>(i));
    w.certified = std::max(w.certified, cert[i]);
  }
  return w;
}

Vec continuous_wormhole_force(const WormholeConfig& cfg, const Vec& x, double rel_tol) {
  WormholeParams p = wormhole_params(cfg);
  const double rho = x.tail(cfg.d - 1).norm();
  bool in_third = std::abs(x[0]) <= cfg.R / 3.0 && rho <= p.W / 3.0 * (1.0 + 1e-12);
  if (!in_third) throw PreconditionError("probe outside one third of the tube");
  return surface_force(cfg.d, p.L, p.W, p.beta, x, rel_tol);
}

// ---- equilibrium ----

EquilibriumResult equilibrium_check(int d, double M, const Vec& x, double T_factor, double rel_tol) {
  if (d < 3 || d > kMaxDim) throw ParameterError("dimension out of range");
  const double rho = x.tail(d - 1).norm();
  if (!(rho < 0.99 * M)) throw PreconditionError("probe too close to the cylinder surface");
  const double T = T_factor * M;
  std::vector<double> br{0.0};
  for (double f = 1.0; f < T_factor; f *= 4.0) {
    br.push_back(f * M);
    br.push_back(-f * M);
  }
  EquilibriumResult res;
  res.value = Vec::Zero(d);
  QuadResult ax = integrate_1d([&](double s) { return ring_force(d, M, s, rho).first; }, -T, T, br, rel_tol);
  res.value[0] = ax.value;
  QuadResult tr = integrate_1d([&](double s) { return ring_force(d, M, s, rho).second; }, -T, T, br, rel_tol);
  QuadResult sc = integrate_1d(
      [&](double s) {
        auto [a, t] = ring_force(d, M, s, rho);
        return std::hypot(a, t);
      },
      -T, T, br, rel_tol);
  if (rho > 0.0) res.value.tail(d - 1) = x.tail(d - 1) / rho * tr.value;
  // |s| > T: |W cos - rho| <= 2M and |z - x|^{-d} <= |s|^{-d}
  res.tail = 2.0 * 2.0 * M * sphere_area(d - 2) * std::pow(M, d - 2) * std::pow(T, 1.0 - d) / (d - 1.0);
  res.scale = sc.value;
  res.relative = (res.value.norm() + res.tail + tr.error + ax.error) / res.scale;
  return res;
}

// ---- force condition ----

ForceConditionReport verify_E1(const std::function<Vec(const Vec&)>& force, int d, double L, double W, double R,
                               double gamma, double xi_max, int per_axis) {
  ForceConditionReport rep;
  rep.scale = std::pow(R, 1.0 - gamma);
  rep.xi_max = xi_max;
  rep.min_f1 = std::numeric_limits<double>::infinity();
  rep.max_f1 = -std::numeric_limits<double>::infinity();
  rep.min_fn = std::numeric_limits<double>::infinity();
  std::vector<Vec> dirs;
  for (int i = 1; i < d; ++i) {
    dirs.push_back(unit_vector(d, i));
    dirs.push_back(-unit_vector(d, i));
  }
  Vec diag = Vec::Zero(d);
  diag.tail(d - 1).setOnes();
  dirs.push_back(diag.normalized());
  for (int a = 0; a < per_axis; ++a) {
    double x1 = per_axis == 1 ? 0.0 : -L + 2.0 * L * a / (per_axis - 1);
    Vec x = Vec::Zero(d);
    x[0] = x1;
    auto probe = [&](const Vec& p) {
      Vec f = force(p);
      rep.min_f1 = std::min(rep.min_f1, f[0]);
      rep.max_f1 = std::max(rep.max_f1, f[0]);
      ++rep.interior_probes;
    };
    probe(x);
    for (const auto& u : dirs) {
      for (double r : {0.5, 0.9}) probe(x + r * W * u);
      Vec p = x + W * u;
      Vec f = force(p);
      rep.min_fn = std::min(rep.min_fn, cylindrical_radial(f, p));
      ++rep.boundary_probes;
      rep.min_f1 = std::min(rep.min_f1, f[0]);
      rep.max_f1 = std::max(rep.max_f1, f[0]);
    }
  }
  if (rep.min_f1 > 0.0 && rep.min_fn > 0.0) {
    rep.xi = std::max(rep.max_f1 / rep.scale, rep.scale / rep.min_f1);
  } else {
    rep.xi = std::numeric_limits<double>::infinity();
  }
  rep.verdict = rep.xi <= xi_max;
  return rep;
}

}  // namespace gravalloc
