#include <doctest.h>

#include "gravalloc/constructions.hpp"
#include "gravalloc/kernel.hpp"
#include "gravalloc/patches.hpp"

#include <cmath>
#include <numbers>

using namespace gravalloc;

namespace {

template <class F>
double simpson(F&& f, double a, double b, int n) {
  double h = (b - a) / n, s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// ring of radius W at axial offset s; probe at transverse distance rho along e2
std::pair<double, double> ring_brute(int d, double W, double s, double rho) {
  const double pi = std::numbers::pi;
  if (d == 3) {
    auto q = [&](double ph) { return std::pow(s * s + W * W + rho * rho - 2 * W * rho * std::cos(ph), -1.5); };
    double ax = simpson([&](double ph) { return s * q(ph) * W; }, 0.0, 2 * pi, 4000);
    double tr = simpson([&](double ph) { return (W * std::cos(ph) - rho) * q(ph) * W; }, 0.0, 2 * pi, 4000);
    return {ax, tr};
  }
  // d = 4: S^2 of radius W, polar angle from e2, the azimuth integrates to 2 pi
  auto q = [&](double th) { return std::pow(s * s + W * W + rho * rho - 2 * W * rho * std::cos(th), -2.0); };
  double ax = simpson([&](double th) { return s * q(th) * W * W * std::sin(th) * 2 * pi; }, 0.0, pi, 4000);
  double tr = simpson([&](double th) { return (W * std::cos(th) - rho) * q(th) * W * W * std::sin(th) * 2 * pi; }, 0.0,
                      pi, 4000);
  return {ax, tr};
}

}  // namespace

TEST_CASE("ring force against direct quadrature") {
  for (int d : {3, 4})
    for (double s : {0.0, 0.3, -1.7, 6.0})
      for (double rho : {0.0, 0.01, 0.4, 0.8, 1.6}) {
        auto [ax, tr] = ring_force(d, 1.0, s, rho);
        auto [bax, btr] = ring_brute(d, 1.0, s, rho);
        double scale = std::abs(bax) + std::abs(btr) + 1e-3;
        CHECK(std::abs(ax - bax) <= 1e-9 * scale);
        CHECK(std::abs(tr - btr) <= 1e-9 * scale);
      }
}

TEST_CASE("surface force against a two dimensional quadrature, d = 3") {
  const double L = 2.0, W = 1.0, beta = 1.5;
  Vec x(3);
  x << 0.3, 0.4, 0.1;
  Vec F = surface_force(3, L, W, beta, x);
  Vec ref = Vec::Zero(3);
  for (int c = 0; c < 3; ++c) {
    ref[c] = simpson(
        [&](double z1) {
          double dens = beta * (1.0 + (z1 + L) / (2.0 * L));
          return dens * simpson(
                            [&](double ph) {
                              Vec z(3);
                              z << z1, W * std::cos(ph), W * std::sin(ph);
                              return g_kernel<double>(Vec(z - x))[c] * W;
                            },
                            0.0, 2 * std::numbers::pi, 400);
        },
        -L, L, 800);
  }
  CHECK((F - ref).norm() < 1e-7 * ref.norm());
}

TEST_CASE("galaxy eta gives an integer volume") {
  for (int d : {3, 4})
    for (double R : {10.0, 25.0, 50.0}) {
      double eta = galaxy_eta(d, R);
      CHECK(eta > 0.5);
      CHECK(eta < 1.0);
      // Cyl(R, eta R): length 2R times a (d-1)-ball of radius eta R
      const double pi = std::numbers::pi;
      double ball = d == 3 ? pi : 4.0 * pi / 3.0;
      double vol = 2.0 * R * ball * std::pow(eta * R, d - 1);
      CHECK(std::abs(vol - std::round(vol)) < 1e-6 * vol);
    }
}

TEST_CASE("galaxy surplus force is inside the geometric sandwich") {
  GalaxyConfig cfg;
  cfg.d = 3;
  cfg.R = 10.0;
  cfg.k = 40;
  cfg.background = false;
  Galaxy g = build_galaxy(cfg, 3);
  REQUIRE(g.surplus.size() == 40u);
  for (const auto& z : g.surplus) CHECK(g.U.contains(z));
  CHECK(g.background.empty());
  GalaxyBounds b = galaxy_f5_bounds(cfg, g.eta);
  for (double x1 : {-9.0, 0.0, 9.5}) {
    Vec x = Vec::Zero(3);
    x[0] = x1;
    x[2] = 0.3;
    REQUIRE(g.V_minus.contains(x));
    Vec f = Vec::Zero(3);
    for (const auto& z : g.surplus) f += (z - x) / std::pow((z - x).norm(), 3);
    CHECK((g.surplus_force(x) - f).norm() < 1e-14 * f.norm());
    double scaled = f[0] * cfg.R * cfg.R / cfg.k;
    CHECK(scaled >= b.lo);
    CHECK(scaled <= b.hi);
  }
}

TEST_CASE("galaxy parameters are checked") {
  GalaxyConfig cfg;
  cfg.M = 5.0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg.M = 0.5;
  cfg.k = -1;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
}

TEST_CASE("infinite cylinder exerts no force inside") {
  for (int d : {3, 4}) {
    Vec x = Vec::Zero(d);
    x[0] = 0.2;
    x[1] = 0.5;
    EquilibriumResult r = equilibrium_check(d, 1.0, x);
    CHECK(r.relative < 1e-3);
    CHECK(std::abs(r.value[0]) < 1e-10);
  }
}

TEST_CASE("small wormhole: masses, geometry and force") {
  WormholeConfig cfg;
  cfg.d = 4;
  cfg.R = 3.0;
  cfg.k = 2;
  WormholeParams p = wormhole_params(cfg);
  // W = lambda R^{-(2-gamma)/(d-2) + 2 eps}, beta = R^{(2-gamma)(d-1)/(d-2) - 2 eps}
  CHECK(p.W == doctest::Approx(0.5 * std::pow(3.0, -0.5 + 0.02)));
  CHECK(p.beta == doctest::Approx(std::pow(3.0, 1.5 - 0.02)));
  CHECK(p.n == default_n1(4, 2) * default_n1(4, 2) * default_n1(4, 2));
  REQUIRE(wormhole_point_estimate(cfg) < 2000000u);
  Wormhole w = build_wormhole(cfg, 7);
  double total = 0.0;
  for (double m : w.mass) total += m;
  CHECK(total == doctest::Approx(p.beta * nu_measure(4, p.L, p.W).total()).epsilon(1e-10));
  for (std::size_t i = 0; i < w.size(); i += 997) {
    Vec z = w.point(i);
    CHECK(std::abs(z.tail(3).norm() - p.W) <= p.rho * 1.0001);
    CHECK(std::abs(z[0]) <= cfg.R);
  }
  Vec x = Vec::Zero(4);
  x[0] = 0.4;
  x[1] = 0.2 * p.W;
  Vec G = continuous_wormhole_force(cfg, x);
  Vec F = w.force(x);
  CHECK((F - G).norm() < 1e-2 * G.norm());
  Vec far = Vec::Zero(4);
  far[0] = 2.0;
  CHECK_THROWS_AS(continuous_wormhole_force(cfg, far), PreconditionError);
}

TEST_CASE("wormhole budget and parameters") {
  WormholeConfig cfg;
  cfg.d = 4;
  cfg.R = 10.0;
  cfg.max_points = 1000;
  CHECK_THROWS_AS(build_wormhole(cfg, 1), QualityError);
  cfg.d = 3;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg.d = 4;
  cfg.gamma = 2.0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg.gamma = 1.0;
  cfg.eps = 0.5;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
}
