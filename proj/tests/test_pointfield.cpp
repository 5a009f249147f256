#include <doctest.h>

#include "gravalloc/pointfield.hpp"
#include "gravalloc/regions.hpp"
#include "gravalloc/rng.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

using namespace gravalloc;

TEST_CASE("stream is reproducible and tag separated") {
  Stream a(7, 3, "x"), b(7, 3, "x"), c(7, 3, "y"), e(7, 4, "x");
  bool differs_tag = false, differs_rep = false;
  for (int i = 0; i < 100; ++i) {
    auto va = a(), vc = c(), ve = e();
    CHECK(va == b());
    differs_tag = differs_tag || va != vc;
    differs_rep = differs_rep || va != ve;
  }
  CHECK(differs_tag);
  CHECK(differs_rep);

  Stream s(1, 0, "u");
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double u = s.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // mean of U(0,1): sd of the sample mean is 1/sqrt(12 n)
  CHECK(std::abs(sum / n - 0.5) < 5.0 / std::sqrt(12.0 * n));
}

TEST_CASE("split streams do not advance the parent") {
  Stream s(11, 0, "p");
  auto before = s.counter();
  Stream c1 = s.split(1), c2 = s.split(1), c3 = s.split(2);
  CHECK(s.counter() == before);
  CHECK(c1() == c2());
  CHECK(c1.key() != c3.key());
}

TEST_CASE("poisson sample stays in the domain and has the right count law") {
  DomainSpec dom;
  dom.d = 3;
  dom.side = 3.0;
  dom.mode = DomainMode::Box;
  const double lambda = 2.0, mean = lambda * 27.0;
  double s = 0.0, s2 = 0.0;
  const int reps = 400;
  for (int r = 0; r < reps; ++r) {
    StarField f = sample_poisson(dom, lambda, 100 + r);
    for (const auto& p : f.points) REQUIRE(dom.contains(p));
    double n = static_cast<double>(f.size());
    s += n;
    s2 += n * n;
  }
  double m = s / reps, var = s2 / reps - m * m;
  CHECK(std::abs(m - mean) < 5.0 * std::sqrt(mean / reps));
  // variance of a Poisson count equals its mean
  CHECK(var == doctest::Approx(mean).epsilon(0.25));
}

TEST_CASE("poisson sample is a function of the seed") {
  DomainSpec dom;
  dom.d = 4;
  dom.side = 2.0;
  dom.mode = DomainMode::Torus;
  StarField a = sample_poisson(dom, 1.0, 5), b = sample_poisson(dom, 1.0, 5), c = sample_poisson(dom, 1.0, 6);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK((a.points[i] - b.points[i]).norm() == 0.0);
  bool same = a.size() == c.size();
  if (same)
    for (std::size_t i = 0; i < a.size(); ++i) same = same && (a.points[i] - c.points[i]).norm() == 0.0;
  CHECK_FALSE(same);
}

TEST_CASE("bad domains are rejected") {
  DomainSpec dom;
  dom.d = 2;
  CHECK_THROWS_AS(dom.validate(), ParameterError);
  dom.d = 3;
  dom.side = 0.0;
  CHECK_THROWS_AS(dom.validate(), ParameterError);
  dom.side = 1.0;
  CHECK_THROWS_AS(sample_poisson(dom, -1.0, 1), ParameterError);
}

TEST_CASE("jsonl round trip is exact") {
  DomainSpec dom;
  dom.d = 3;
  dom.side = 2.5;
  dom.mode = DomainMode::Torus;
  StarField f = sample_poisson(dom, 1.3, 42);
  std::stringstream ss;
  write_jsonl(ss, f);
  StarField g = read_jsonl(ss);
  CHECK(g.dim() == 3);
  CHECK(g.domain.side == 2.5);
  CHECK(g.domain.mode == DomainMode::Torus);
  CHECK(g.intensity == 1.3);
  REQUIRE(g.size() == f.size());
  for (std::size_t i = 0; i < f.size(); ++i) CHECK((g.points[i] - f.points[i]).norm() == 0.0);
}

TEST_CASE("region volumes") {
  for (int d = 3; d <= 5; ++d) {
    Vec c = Vec::Zero(d);
    // unit ball volume pi^{d/2} / Gamma(d/2 + 1), written out per dimension
    const double pi = std::numbers::pi;
    const double ball[] = {0, 0, 0, 4.0 * pi / 3.0, pi * pi / 2.0, 8.0 * pi * pi / 15.0};
    CHECK(region_volume(Region::ball(c, 1.5)) == doctest::Approx(ball[d] * std::pow(1.5, d)).epsilon(1e-9));
    CHECK(region_volume(Region::annulus(c, 1.0, 2.0)) ==
          doctest::Approx(ball[d] * (std::pow(2.0, d) - 1.0)).epsilon(1e-9));
    CHECK(region_volume(Region::box(d, 2.0, 0.5)) == doctest::Approx(4.0 * std::pow(1.0, d - 1)).epsilon(1e-12));
  }
}

TEST_CASE("region membership") {
  Region cyl = Region::cylinder(3, 2.0, 1.0);
  Vec x(3);
  x << 1.9, 0.6, 0.6;
  CHECK(cyl.contains(x));
  x << 1.9, 0.8, 0.8;
  CHECK_FALSE(cyl.contains(x));
  Region comp = Region::complement(Region::ball(Vec::Zero(3), 1.0));
  x << 0.5, 0, 0;
  CHECK_FALSE(comp.contains(x));
  CHECK_FALSE(comp.bounded());
}

TEST_CASE("poisson tail and pmf") {
  // direct sums
  const double lambda = 3.7;
  double pmf = std::exp(-lambda), cdf = 0.0;
  for (long n = 0; n < 12; ++n) {
    CHECK(poisson_pmf(lambda, n) == doctest::Approx(pmf).epsilon(1e-12));
    CHECK(poisson_tail(lambda, n) == doctest::Approx(1.0 - cdf).epsilon(1e-10));
    cdf += pmf;
    pmf *= lambda / (n + 1);
  }
}
