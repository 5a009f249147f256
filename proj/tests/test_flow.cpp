#include <doctest.h>

#include "gravalloc/basins.hpp"
#include "gravalloc/fields.hpp"
#include "gravalloc/flow.hpp"
#include "gravalloc/integrator.hpp"
#include "gravalloc/pointfield.hpp"
#include "gravalloc/regions.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

using namespace gravalloc;

namespace {

StarField torus_field(int d, double side, std::uint64_t seed) {
  DomainSpec dom;
  dom.d = d;
  dom.side = side;
  dom.mode = DomainMode::Torus;
  return sample_poisson(dom, 1.0, seed);
}

}  // namespace

TEST_CASE("dopri5 step is fifth order on y' = -y") {
  Dopri5 rk([](const State& y, State& dy) { dy = -y; });
  State y(1), k1(1), yn(1), kn(1), err(1);
  y[0] = 1.0;
  k1[0] = -1.0;
  double e1, e2;
  rk.step(y, k1, 0.1, yn, kn, err);
  e1 = std::abs(yn[0] - std::exp(-0.1));
  CHECK(kn[0] == doctest::Approx(-yn[0]));
  rk.step(y, k1, 0.05, yn, kn, err);
  e2 = std::abs(yn[0] - std::exp(-0.05));
  // local error O(h^6)
  CHECK(std::log2(e1 / e2) == doctest::Approx(6.0).epsilon(0.1));
  CHECK(std::abs(err[0]) < 1e-6);
}

TEST_CASE("flow from near a star is captured by it") {
  StarField f = torus_field(3, 3.0, 12);
  REQUIRE(f.size() > 2);
  PeriodicField pf(f);
  Vec x = f.points[1];
  x[0] += 0.02;
  Trajectory t = integrate_flow(x, pf, FlowPolicy{});
  CHECK(t.terminal == Terminal::Captured);
  CHECK(t.star == 1);
}

TEST_CASE("potential decreases along the flow and L^2 <= t dU") {
  StarField f = torus_field(3, 3.0, 31);
  PeriodicField pf(f);
  FlowPolicy pol;
  pol.record_potential = true;
  pol.rtol = 1e-9;
  pol.atol = 1e-9;
  Vec x0(3);
  x0 << 0.4, -1.1, 0.9;
  Trajectory t = integrate_flow(x0, pf, pol);
  REQUIRE(t.terminal == Terminal::Captured);
  REQUIRE(t.samples.size() > 5);
  const double U0 = pf.potential(x0);
  double Lacc = 0.0;
  for (std::size_t k = 1; k < t.samples.size(); ++k) {
    const auto& s = t.samples[k];
    // recorded potential against a fresh evaluation
    CHECK(s.u == doctest::Approx(pf.potential(s.x) - U0).epsilon(1e-6).scale(1.0));
    CHECK(s.u <= t.samples[k - 1].u + 1e-9);
    Lacc += pf.displacement(t.samples[k - 1].x, s.x).norm();
    // chord sum is a lower bound on the arclength
    CHECK(Lacc <= s.L * (1.0 + 1e-9) + 1e-12);
    CHECK(s.L * s.L <= s.t * (-s.u) * (1.0 + 1e-3) + 1e-12);
  }
  CHECK(check_time_potential(t).holds);
  CHECK(max_potential_increase(t) < 1e-9);
}

TEST_CASE("liouville ratio is exp(div t)") {
  StarField f = torus_field(3, 3.0, 8);
  PeriodicField pf(f);
  Vec c(3);
  c << 0.1, 0.2, -0.3;
  for (const auto& p : f.points)
    if ((p - c).norm() < 0.4) c[0] += 0.7;
  Region ball = Region::ball(c, 0.05);
  const double t = 0.01;
  const double expect = std::exp(4.0 * std::numbers::pi * f.size() / 27.0 * t);
  FlowPolicy pol;
  pol.rtol = 1e-10;
  pol.atol = 1e-12;
  pol.record = false;
  LiouvilleResult fw = liouville_ratio(ball, pf, t, Direction::Forward, 64, 3, pol, 1e-5);
  CHECK(fw.ratio == doctest::Approx(expect).epsilon(1e-4));
  LiouvilleResult bw = liouville_ratio(ball, pf, t, Direction::Backward, 64, 3, pol, 1e-5);
  CHECK(bw.ratio == doctest::Approx(1.0 / expect).epsilon(1e-4));
}

TEST_CASE("basins cover the grid and cells have volume close to V/n") {
  StarField f = torus_field(3, 3.0, 4);
  PeriodicField pf(f);
  BasinMap m = assign_basins(pf, 32);
  REQUIRE(m.counts.size() == f.size());
  CHECK(std::accumulate(m.counts.begin(), m.counts.end(), std::size_t{0}) == m.size());
  CHECK(m.size() == 32u * 32u * 32u);
  const double target = 27.0 / f.size();
  double mad = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) mad += std::abs(m.cell_volume(static_cast<int>(i)) - target);
  mad /= f.size();
  // grid quantization is about (surface / spacing) cells per basin
  CHECK(mad / target < 0.15);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CellStats s = cell_statistics(m, pf, static_cast<int>(i), 1.0, 50, 1);
    CHECK(s.volume == doctest::Approx(m.cell_volume(static_cast<int>(i))));
    CHECK(s.diameter >= 0.0);
  }
}

TEST_CASE("flow time law on a small torus") {
  StarField f = torus_field(3, 3.0, 2);
  PeriodicField pf(f);
  auto pts = flow_time_law(pf, {0.0, 0.05, 0.1}, 400, 9);
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].fraction == doctest::Approx(1.0));
  const double div = 4.0 * std::numbers::pi * f.size() / 27.0;
  for (const auto& p : pts) {
    CHECK(p.target == doctest::Approx(std::exp(-div * p.t)));
    CHECK(std::abs(p.fraction - p.target) < 4.0 * std::sqrt(p.target * (1 - p.target) / 400.0) + 1e-12);
  }
}

TEST_CASE("flow policy validation") {
  FlowPolicy p;
  p.rtol = -1.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
}
