#include <doctest.h>

#include "gravalloc/boxes.hpp"
#include "gravalloc/kernel.hpp"
#include "gravalloc/moments.hpp"
#include "gravalloc/patches.hpp"
#include "gravalloc/quadrature.hpp"
#include "gravalloc/rng.hpp"
#include "gravalloc/taylor.hpp"

#include <cmath>
#include <map>
#include <numbers>

using namespace gravalloc;

namespace {

// composite Simpson on [a,b] with n (even) intervals
template <class F>
double simpson(F&& f, double a, double b, int n) {
  double h = (b - a) / n, s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("gauss-legendre is exact to degree 2n-1") {
  for (int n : {1, 3, 8, 16}) {
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    REQUIRE(x.size() == static_cast<std::size_t>(n));
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += w[i] * std::pow(x[i], p);
      double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
    }
  }
}

TEST_CASE("adaptive integration") {
  auto r = integrate_1d([](double x) { return std::sqrt(std::abs(x - 0.3)); }, 0.0, 1.0, {0.3});
  double exact = (2.0 / 3.0) * (std::pow(0.3, 1.5) + std::pow(0.7, 1.5));
  CHECK(r.value == doctest::Approx(exact).epsilon(1e-10));
  Vec lo = Vec::Zero(3), hi = Vec::Ones(3), split = Vec::Constant(3, 2.0);
  auto b = integrate_box([](const Vec& v) { return v[0] * v[1] * v[1] * v[2] * v[2] * v[2]; }, lo, hi, split);
  CHECK(b.value == doctest::Approx(1.0 / 24.0).epsilon(1e-10));
}

TEST_CASE("multi-indices: count, degrees, order") {
  for (int d = 1; d <= 5; ++d)
    for (int k = 0; k <= 4; ++k) {
      auto idx = multi_indices(d, k);
      CHECK(static_cast<double>(idx.size()) == binom(k + d, d) - 1.0);
      CHECK(polydim(k, d) == static_cast<long>(idx.size()));
      std::map<MultiIndex, int> seen;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        CHECK(degree(idx[i], d) >= 1);
        CHECK(degree(idx[i], d) <= k);
        if (i > 0) CHECK(degree(idx[i], d) >= degree(idx[i - 1], d));
        CHECK(seen[idx[i]]++ == 0);
      }
      CHECK(multi_indices(d, k, true).size() == idx.size() + 1);
    }
}

TEST_CASE("moment map and m0") {
  Vec x(2);
  x << 0.5, -2.0;
  MomentVector mv = moment_map(x, 2);
  auto idx = multi_indices(2, 2);
  REQUIRE(mv.entries.size() == static_cast<long>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    CHECK(mv.entries[i] == doctest::Approx(std::pow(0.5, idx[i][0]) * std::pow(-2.0, idx[i][1])));
  // least m with (k e/(m+1))^{m+1} <= delta/(2 d 2^k), by brute force
  for (int d : {3, 4})
    for (int k : {1, 3, 5})
      for (double delta : {1e-2, 1e-6}) {
        int m = 1;
        while (std::pow(k * std::exp(1.0) / (m + 1), m + 1) > delta / (2.0 * d * std::pow(2.0, k))) ++m;
        CHECK(m0(d, k, delta) == m);
      }
}

TEST_CASE("nu measure mass") {
  for (int d = 3; d <= 5; ++d) {
    NuMeasure nu = nu_measure(d, 3.0, 0.5, 2.0);
    // beta int (1 + (x+L)/2L) dx = 3 beta L; cross-section sphere of radius W in R^{d-1}
    const double pi = std::numbers::pi;
    double area = d == 3 ? 2 * pi * 0.5 : (d == 4 ? 4 * pi * 0.25 : 2 * pi * pi * 0.125);
    CHECK(nu.total() == doctest::Approx(3.0 * 2.0 * 3.0 * area).epsilon(1e-12));
    CHECK(nu.linear_mass(-1.0, 2.0) == doctest::Approx(2.0 * (3.0 + (25.0 - 4.0) / 12.0)).epsilon(1e-12));
  }
}

TEST_CASE("sphere cells are equal area and tile S^2") {
  for (int n : {1, 2, 7, 40}) {
    auto cells = sphere_cells(2, n);
    REQUIRE(cells.size() == static_cast<std::size_t>(n));
    double total = 0.0;
    for (const auto& c : cells) {
      double a = (std::cos(c[0].first) - std::cos(c[0].second)) * (c[1].second - c[1].first);
      CHECK(a == doctest::Approx(4.0 * std::numbers::pi / n).epsilon(1e-9));
      total += a;
    }
    CHECK(total == doctest::Approx(4.0 * std::numbers::pi));
  }
}

TEST_CASE("cylinder partition") {
  for (int d = 3; d <= 4; ++d) {
    PatchDecomposition pd = partition_cylinder(d, 4.0, 1.0, 0.5, 3.0);
    double sum = 0.0;
    for (const auto& p : pd.patches) {
      CHECK(p.measure() == doctest::Approx(p.mass).epsilon(1e-9));
      CHECK(p.diameter() <= pd.max_diameter * (1 + 1e-12));
      sum += p.mass;
    }
    CHECK(sum == doctest::Approx(pd.nu.total()).epsilon(1e-12));
    CHECK(pd.C_hat == doctest::Approx(pd.max_diameter / 0.5));
    for (int i = 0; i < 10; ++i) {
      Vec c = pd.patches[i * pd.size() / 10].center();
      CHECK(c.tail(d - 1).norm() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(c[0]) <= 4.0);
    }
  }
}

TEST_CASE("patch rule moments against an independent quadrature, d = 3") {
  const double L = 3.0, W = 1.0, beta = 1.0;
  PatchDecomposition pd = partition_cylinder(3, L, W, 0.6, beta);
  for (int k : {1, 2, 3}) {
    for (std::size_t pi : {std::size_t{0}, pd.size() / 3, pd.size() - 1}) {
      const Patch& P = pd.patches[pi];
      const int n1 = default_n1(3, k);
      CubatureRule rule = fit_patch_points(P, n1 * n1, k, 1e-6, static_cast<int>(pi));
      REQUIRE(rule.points.size() == static_cast<std::size_t>(n1 * n1));
      CHECK(rule.certified <= 1e-6);
      Vec c = P.center();
      const double ph0 = P.angles[0].first, ph1 = P.angles[0].second;
      auto dens = [&](double x1) { return beta * (1.0 + (x1 + L) / (2.0 * L)); };
      for (const auto& w : rule.points) {
        CHECK(w.tail(2).norm() == doctest::Approx(W).epsilon(1e-12));
        CHECK(w[0] >= P.x1_lo - 1e-12);
        CHECK(w[0] <= P.x1_hi + 1e-12);
      }
      for (const auto& a : multi_indices(3, k)) {
        // point (x1, W cos phi, W sin phi), measure dens(x1) W dphi dx1
        auto inner = [&](double x1) {
          return simpson(
              [&](double ph) {
                return std::pow(x1 - c[0], a[0]) * std::pow(W * std::cos(ph) - c[1], a[1]) *
                       std::pow(W * std::sin(ph) - c[2], a[2]);
              },
              ph0, ph1, 200);
        };
        double ref = simpson([&](double x1) { return dens(x1) * W * inner(x1); }, P.x1_lo, P.x1_hi, 200) / P.mass;
        double got = 0.0;
        for (const auto& w : rule.points) got += monomial(Vec(w - c), a);
        got /= rule.points.size();
        double s = std::pow(P.diameter(), degree(a, 3));
        CHECK(std::abs(got - ref) <= 1e-9 * s);
      }
    }
  }
}

TEST_CASE("taylor model of g") {
  Stream s(2, 0, "taylor");
  for (int d = 3; d <= 5; ++d) {
    Vec y(d);
    for (int i = 0; i < d; ++i) y[i] = s.uniform(-3.0, 3.0);
    y[0] += 4.0;
    Vec dir = Vec::Ones(d).normalized();
    for (int k : {1, 2, 4}) {
      TaylorModel m = taylor_model(y, k);
      CHECK((taylor_eval(m, y) - g_kernel<double>(y)).norm() < 1e-14 * g_kernel<double>(y).norm());
      double e1 = (taylor_eval(m, Vec(y + 0.02 * dir)) - g_kernel<double>(Vec(y + 0.02 * dir))).norm();
      double e2 = (taylor_eval(m, Vec(y + 0.01 * dir)) - g_kernel<double>(Vec(y + 0.01 * dir))).norm();
      CHECK(std::log2(e1 / e2) == doctest::Approx(k + 1).epsilon(0.1));
      Vec z = y + 0.02 * dir;
      CHECK(e1 <= taylor_remainder_bound(m, z));
    }
  }
}

TEST_CASE("dominated boxes tile the shell region") {
  BoxPartition bp = partition_dominated_boxes(3, 8.0, 0.02);
  CHECK(bp.not_dominated == 0);
  CHECK(bp.volume_sum == doctest::Approx(bp.target_volume).epsilon(1e-12));
  double vol = 0.0;
  for (std::size_t i = 0; i < bp.size(); ++i) vol += std::pow(bp.sides[i], 3);
  CHECK(vol == doctest::Approx(bp.target_volume).epsilon(1e-12));
  for (std::size_t i = 0; i < bp.size(); i += std::max<std::size_t>(1, bp.size() / 50)) {
    Vec c = bp.center(i);
    CHECK(bp.locate(c) == static_cast<long>(i));
    CHECK(dominated(bp.scales, c.data(), bp.sides[i]));
  }
}

TEST_CASE("density of the normalized moment sum at zero is positive") {
  DensityEstimate de = empirical_density_check(200, 1, 2, 2000, 5);
  CHECK(de.lower_bound > 0.0);
  CHECK(de.estimate >= de.lower_bound);
  CHECK(de.dim == 2);
}
