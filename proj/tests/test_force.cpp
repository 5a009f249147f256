#include <doctest.h>

#include "gravalloc/fields.hpp"
#include "gravalloc/force.hpp"
#include "gravalloc/kernel.hpp"
#include "gravalloc/periodic.hpp"
#include "gravalloc/pointfield.hpp"
#include "gravalloc/regions.hpp"
#include "gravalloc/rng.hpp"

#include <cmath>
#include <numbers>

using namespace gravalloc;

namespace {

Vec random_vec(Stream& s, int d, double a) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = s.uniform(-a, a);
  return v;
}

StarField one_star(const Vec& z, double side = 100.0) {
  StarField f;
  f.domain.d = static_cast<int>(z.size());
  f.domain.side = side;
  f.domain.mode = DomainMode::Box;
  f.points = {z};
  return f;
}

double unit_ball(int d) {
  const double pi = std::numbers::pi;
  return d == 3 ? 4.0 * pi / 3.0 : (d == 4 ? pi * pi / 2.0 : 8.0 * pi * pi / 15.0);
}

}  // namespace

TEST_CASE("kernel symmetries") {
  Stream s(3, 0, "kernel");
  for (int d = 3; d <= 5; ++d) {
    for (int t = 0; t < 20; ++t) {
      Vec z = random_vec(s, d, 2.0);
      Vec g = g_kernel<double>(z);
      CHECK((g_kernel<double>(Vec(-z)) + g).norm() < 1e-14 * g.norm());
      // homogeneous of degree 1 - d
      Vec g3 = g_kernel<double>(Vec(3.0 * z));
      CHECK((g3 - std::pow(3.0, 1 - d) * g).norm() < 1e-13 * g.norm());
      CHECK(g.norm() == doctest::Approx(std::pow(z.norm(), 1 - d)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(g_kernel<double>(Vec(Vec::Zero(d))), SingularityError);
  }
}

TEST_CASE("kernel jacobian and newton potential against finite differences") {
  Stream s(4, 0, "jac");
  const double h = 1e-5;
  for (int d = 3; d <= 6; ++d) {
    Vec z = random_vec(s, d, 1.0);
    z[0] += 1.5;
    Mat J = g_jacobian(z);
    CHECK(std::abs(J.trace()) < 1e-10 * J.norm());
    for (int j = 0; j < d; ++j) {
      Vec e = unit_vector(d, j);
      Vec col = (g_kernel<double>(Vec(z + h * e)) - g_kernel<double>(Vec(z - h * e))) / (2 * h);
      CHECK((col - J.col(j)).norm() < 1e-7 * J.norm());
      double dn = (newton_kernel(z + h * e) - newton_kernel(z - h * e)) / (2 * h);
      CHECK(dn == doctest::Approx(-(d - 2) * g_kernel<double>(z)[j]).epsilon(1e-7));
    }
  }
}

TEST_CASE("inv_pow_d matches pow") {
  for (int d = 3; d <= 8; ++d)
    for (double r2 : {0.01, 0.7, 3.0, 150.0}) CHECK(inv_pow_d(r2, d) == doctest::Approx(std::pow(r2, -0.5 * d)));
}

TEST_CASE("restricted force of one star in a ball, shell theorem") {
  for (int d = 3; d <= 5; ++d) {
    const double a = 2.0, kap = unit_ball(d);
    Region A = Region::ball(Vec::Zero(d), a);
    Vec z = Vec::Zero(d);
    z[0] = 0.7;
    StarField f = one_star(z);
    Vec x = Vec::Zero(d);
    x[1] = 0.9;
    x[d - 1] += -0.3;
    // inside: int_A g(w - x) dw = -kappa x
    Vec expect = g_kernel<double>(Vec(z - x)) + kap * x;
    ForceVector F = force_restricted(x, f, A, 1e-10);
    CHECK((F.value - expect).norm() < 1e-7 * expect.norm());

    // outside: a point mass kappa a^d at the center
    Vec y = Vec::Zero(d);
    y[0] = -3.0;
    y[1] = 1.0;
    Vec expect_out = g_kernel<double>(Vec(z - y)) + kap * std::pow(a, d) * y / std::pow(y.norm(), d);
    CHECK((force_restricted(y, f, A, 1e-10).value - expect_out).norm() < 1e-7 * expect_out.norm());
  }
}

TEST_CASE("restricted potential difference of one star") {
  const int d = 3;
  Region A = Region::ball(Vec::Zero(d), 2.0);
  Vec z(3), x(3), y(3);
  z << 0.5, 0.2, 0.0;
  x << -0.5, 0.3, 0.4;
  y << 0.1, -0.6, 0.2;
  StarField f = one_star(z);
  // U(.|A) = -|z-.|^{-1} + int_A |w-.|^{-1} dw, and inside the ball the integral is 2 pi a^2 - (2 pi / 3) r^2
  auto U = [&](const Vec& p) { return -1.0 / (z - p).norm() + 2.0 * std::numbers::pi * (4.0 - p.squaredNorm() / 3.0); };
  CHECK(potential_diff(x, y, f, A).value == doctest::Approx(U(y) - U(x)).epsilon(1e-8));
}

TEST_CASE("divergence of the restricted force is d kappa_d inside the region") {
  Stream s(9, 0, "div");
  for (int d = 3; d <= 4; ++d) {
    StarField f;
    f.domain.d = d;
    f.domain.side = 10.0;
    f.domain.mode = DomainMode::Box;
    for (int i = 0; i < 5; ++i) f.points.push_back(random_vec(s, d, 2.5));
    Region A = Region::ball(Vec::Zero(d), 3.0);
    Vec x = Vec::Zero(d);
    x[0] = 0.25;
    bool far = true;
    for (const auto& p : f.points) far = far && (p - x).norm() > 0.3;
    if (!far) x[0] = -0.25;
    double div = divergence_probe(x, f, A, 1e-3, 1e-12);
    CHECK(div == doctest::Approx(d * unit_ball(d)).epsilon(1e-4));
  }
}

TEST_CASE("empty box force against a polar quadrature") {
  // int_box g(z - x) dz = int_{S^2} omega rho(omega) d omega, rho the exit distance
  const int d = 3;
  Region box = Region::box(d, 2.0, 1.0);
  Vec x(3);
  x << 0.8, -0.3, 0.55;
  auto [lo, hi] = box.bounds();
  auto exit_distance = [&](const Vec& w) {
    double t = 1e300;
    for (int i = 0; i < d; ++i) {
      if (w[i] > 0) t = std::min(t, (hi[i] - x[i]) / w[i]);
      if (w[i] < 0) t = std::min(t, (lo[i] - x[i]) / w[i]);
    }
    return t;
  };
  const int nt = 1200, np = 2400;
  Vec I = Vec::Zero(3);
  for (int a = 0; a < nt; ++a) {
    double th = std::numbers::pi * (a + 0.5) / nt;
    for (int b = 0; b < np; ++b) {
      double ph = 2.0 * std::numbers::pi * (b + 0.5) / np;
      Vec w(3);
      w << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
      I += w * exit_distance(w) * std::sin(th);
    }
  }
  I *= (std::numbers::pi / nt) * (2.0 * std::numbers::pi / np);
  ForceVector F = empty_box_expected_force(box, x);
  CHECK((F.value + I).norm() < 1e-3 * I.norm());
}

TEST_CASE("periodic kernel") {
  for (int d = 3; d <= 4; ++d) {
    const double S = 2.0;
    PeriodicKernel K(d, S, false);
    Stream s(21, d, "periodic");
    const double h = 1e-4;
    for (int t = 0; t < 4; ++t) {
      Vec r = random_vec(s, d, 0.9);
      if (r.norm() < 0.2) r[0] += 0.4;
      Vec G = K.force_direct(r);
      CHECK((K.force_direct(Vec(-r)) + G).norm() < 1e-10 * G.norm());
      // G = grad psi, and lap psi = -d kappa_d / V away from the lattice
      double lap = 0.0;
      Vec grad(d);
      for (int i = 0; i < d; ++i) {
        Vec e = unit_vector(d, i);
        grad[i] = (K.potential_direct(r + h * e) - K.potential_direct(r - h * e)) / (2 * h);
        lap += (K.force_direct(Vec(r + h * e))[i] - K.force_direct(Vec(r - h * e))[i]) / (2 * h);
      }
      CHECK((grad - G).norm() < 1e-6 * G.norm());
      CHECK(lap == doctest::Approx(-d * unit_ball(d) / std::pow(S, d)).epsilon(1e-4));
    }
    // half lattice points are zeros by oddness plus periodicity
    for (int i = 0; i < d; ++i) CHECK(K.force_direct(Vec(0.5 * S * unit_vector(d, i))).norm() < 1e-10);
    // cubic symmetry kills the linear part of the regular remainder
    Vec e = Vec::Ones(d).normalized();
    e[0] *= 1.3;
    e.normalize();
    double c1 = K.residual_direct(Vec(0.02 * e)).norm(), c2 = K.residual_direct(Vec(0.04 * e)).norm();
    CHECK(c2 / c1 == doctest::Approx(8.0).epsilon(0.01));
  }
}

TEST_CASE("periodic table agrees with the direct sums") {
  auto K = PeriodicKernel::get(3, 3.0);
  REQUIRE(K->tabulated());
  Stream s(5, 0, "table");
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    Vec r = random_vec(s, 3, 1.5);
    if (r.norm() < 0.05) continue;
    Vec G = K->force_direct(r);
    worst = std::max(worst, (K->force(r) - G).norm());
  }
  // multilinear table, spacing 3/96: absolute error of order h^2 / 8
  CHECK(worst < 2e-4);
}

TEST_CASE("periodic field: divergence, periodicity and neutrality") {
  DomainSpec dom;
  dom.d = 3;
  dom.side = 3.0;
  dom.mode = DomainMode::Torus;
  StarField f = sample_poisson(dom, 1.0, 77);
  REQUIRE(f.size() > 3);
  PeriodicField pf(f);
  Vec x(3);
  x << 0.31, -0.47, 1.02;
  for (const auto& p : f.points) REQUIRE((p - x).norm() > 0.05);
  Vec F = pf.force(x);
  Vec xs = x + 3.0 * unit_vector(3, 1);
  CHECK((pf.force(xs) - F).norm() < 1e-9 * F.norm());
  const double h = 1e-4;
  double div = 0.0;
  for (int i = 0; i < 3; ++i) {
    Vec e = unit_vector(3, i);
    div += (pf.force(Vec(x + h * e))[i] - pf.force(Vec(x - h * e))[i]) / (2 * h);
  }
  CHECK(div == doctest::Approx(3.0 * unit_ball(3) * f.size() / 27.0).epsilon(2e-3));
  REQUIRE(pf.divergence().has_value());
  CHECK(*pf.divergence() == doctest::Approx(4.0 * std::numbers::pi * f.size() / 27.0));
  // F = -grad U
  for (int i = 0; i < 3; ++i) {
    Vec e = unit_vector(3, i);
    double dU = (pf.potential(x + h * e) - pf.potential(x - h * e)) / (2 * h);
    CHECK(dU == doctest::Approx(-F[i]).epsilon(1e-4));
  }
}

TEST_CASE("force evaluation near a star is refused") {
  Vec z = Vec::Zero(3);
  StarField f = one_star(z);
  Region A = Region::ball(Vec::Zero(3), 1.0);
  Vec x = Vec::Zero(3);
  x[0] = 1e-8;
  CHECK_THROWS(force_restricted(x, f, A));
}
