#include <doctest.h>

#include "gravalloc/experiment.hpp"
#include "gravalloc/rates.hpp"
#include "gravalloc/suites.hpp"
#include "gravalloc/tails.hpp"
#include "gravalloc/types.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace gravalloc;
namespace fs = std::filesystem;

namespace {

// piecewise rate functions written out directly
double f_ref(int d, double g) {
  if (d == 3) return g <= 1.0 ? 3.0 - 2.0 * g : 1.0;
  if (d == 4) {
    if (g <= 4.0 / 3.0) return 2.0 - g / 2.0;
    if (g <= 1.5) return 4.0 - 2.0 * g;
    return 1.0;
  }
  return g <= 2.0 ? 1.0 + (2.0 - g) / (d - 2.0) : 1.0;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("rate functions") {
  for (int d = 3; d <= 8; ++d) {
    for (int i = 0; i <= 300; ++i) {
      Rational g(i, 100);
      CHECK(boost::rational_cast<double>(rate_f(d, g)) == doctest::Approx(f_ref(d, i / 100.0)).epsilon(1e-15));
      CHECK(rate_eval(d, i / 100.0, RateKind::F) == doctest::Approx(f_ref(d, i / 100.0)).epsilon(1e-15));
    }
    double gd = d == 3 ? 1.0 : 1.0 + 1.0 / (d - 1.0);
    CHECK(boost::rational_cast<double>(rate_g(d)) == doctest::Approx(gd));
    CHECK(rate_h(d, Rational(1, 2)) == Rational(1) + Rational(1, 2) / Rational(d - 2));
    // continuity at the kinks
    for (const auto& k : rate_kinks(d)) {
      double x = boost::rational_cast<double>(k);
      CHECK(rate_eval(d, x - 1e-9, RateKind::F) == doctest::Approx(rate_eval(d, x + 1e-9, RateKind::F)).epsilon(1e-6));
    }
  }
  CHECK(rate_kinks(3) == std::vector<Rational>{Rational(1)});
  CHECK(rate_kinks(4) == std::vector<Rational>{Rational(4, 3), Rational(3, 2)});
  CHECK(rate_kinks(6) == std::vector<Rational>{Rational(2)});
  CHECK(rate_f(4, Rational(4, 3)) == Rational(4, 3));
  CHECK_THROWS_AS(rate_f(2, Rational(1)), ParameterError);
  CHECK_THROWS_AS(rate_f(3, Rational(-1)), ParameterError);
  CHECK_THROWS_AS(rate_h(3, Rational(0)), ParameterError);
}

TEST_CASE("rates csv") {
  std::ostringstream os;
  write_rates_csv(os, 3, 4, 10, 3);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "d,gamma,f,g,h_2mg");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 2 * 31);
}

TEST_CASE("wilson interval") {
  auto [lo, hi] = wilson_interval(20, 100, 1.96);
  // closed form for k = 20, n = 100, z = 1.96
  const double z2 = 1.96 * 1.96, p = 0.2, n = 100;
  double mid = (p + z2 / (2 * n)) / (1 + z2 / n);
  double half = 1.96 * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  CHECK(lo == doctest::Approx(mid - half));
  CHECK(hi == doctest::Approx(mid + half));
  auto [l0, h0] = wilson_interval(0, 50, 1.96);
  CHECK(l0 == 0.0);
  CHECK(h0 > 0.0);
}

TEST_CASE("tail statistic names") {
  for (auto s : {TailStatistic::ForceAtOrigin, TailStatistic::MaxForceOverBall, TailStatistic::PotentialAtOrigin,
                 TailStatistic::PotentialDifference})
    CHECK(tail_statistic_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(tail_statistic_from_string("nope"), ParameterError);
}

TEST_CASE("monte carlo tail table") {
  TailSpec spec;
  spec.q = 2.0;
  spec.p = 5.0;
  TailConfig cfg;
  cfg.replicas = 3000;
  cfg.seed = 4;
  std::vector<double> ts{0.0, 0.5, 1.0, 2.0, 4.0, 50.0};
  TailTable t = mc_tail(spec, ts, cfg);
  REQUIRE(t.rows.size() == ts.size());
  CHECK(t.rows[0].p == 1.0);
  for (std::size_t i = 1; i < t.rows.size(); ++i) CHECK(t.rows[i].p <= t.rows[i - 1].p);
  CHECK(t.rows.back().censored);
  // mean count in the annulus: (4/3) pi (p^3 - q^3)
  CHECK(t.mean_count == doctest::Approx(4.0 / 3.0 * std::numbers::pi * (125.0 - 8.0)).epsilon(0.02));
  TailTable t2 = mc_tail(spec, ts, cfg);
  for (std::size_t i = 0; i < ts.size(); ++i) CHECK(t2.rows[i].exceed == t.rows[i].exceed);
  spec.q = 6.0;
  CHECK_THROWS_AS(mc_tail(spec, ts, cfg), ParameterError);
}

TEST_CASE("tail fit recovers a gaussian slope") {
  TailTable t;
  for (double x : {0.5, 1.0, 1.5, 2.0, 2.5}) {
    TailRow r;
    r.t = x;
    r.n = 1000000;
    r.p = 0.4 * std::exp(-0.7 * x * x);
    r.exceed = static_cast<std::size_t>(r.p * r.n);
    std::tie(r.lo, r.hi) = wilson_interval(r.exceed, r.n, 1.96);
    t.rows.push_back(r);
  }
  TailFit fit = fit_tail(t);
  CHECK(fit.slope == doctest::Approx(-0.7).epsilon(1e-3));
  CHECK(fit.r2 > 0.999);
  t.spec.q = 2.0;
  TailBound b = calibrate_tail_bound(t);
  for (const auto& r : t.rows) CHECK(b(r.t) >= r.hi * (1 - 1e-12));
  CHECK(apply_tail_bound(t, b));
}

TEST_CASE("suite report exit codes") {
  SuiteReport r;
  CHECK(r.exit_code() == 0);
  r.checks.push_back({"a", Status::Pass, "", {}});
  r.checks.push_back({"b", Status::Censored, "", {}});
  CHECK(r.exit_code() == 3);
  r.checks.push_back({"c", Status::Fail, "", {}});
  CHECK(r.exit_code() == 2);
  CHECK(r.to_json()["checks"].size() == 3);
}

TEST_CASE("fast suites pass") {
  SuiteOptions o;
  o.seed = 3;
  CHECK(run_suite("rates", o).exit_code() == 0);
  CHECK(run_suite("kernel", o).exit_code() == 0);
  CHECK_THROWS_AS(run_suite("nope", o), ParameterError);
  CHECK(suite_names().size() == 13);
  for (int i = 1; i <= kCriteria; ++i) CHECK_FALSE(criterion_title(i).empty());
}

TEST_CASE("experiment config parsing") {
  auto j = nlohmann::json::parse(R"({"kind":"rates","seed":9,"R":20,"params":{"d_lo":3,"d_hi":5}})");
  ExperimentConfig c = ExperimentConfig::from_json(j);
  CHECK(c.seeds == std::vector<std::uint64_t>{9});
  CHECK(c.R == std::vector<double>{20.0});
  CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"kind":"bogus"})")), ParameterError);
  CHECK_THROWS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"dim":3})")));
}

TEST_CASE("experiment run writes reproducible outputs") {
  fs::path base = fs::temp_directory_path() / "gravalloc_harness_test";
  fs::remove_all(base);
  ExperimentConfig c;
  c.kind = "rates";
  c.params = {{"d_lo", 3}, {"d_hi", 4}, {"steps", 4}};
  c.out = (base / "a").string();
  ExperimentResult a = run_experiment(c);
  const std::string first = slurp(base / "a" / "rates.csv");
  ExperimentResult b = run_experiment(c);
  CHECK(a.exit_code == 0);
  CHECK(b.exit_code == 0);
  CHECK(a.status == "ok");
  CHECK(fs::exists(base / "a" / "rates.csv"));
  CHECK(fs::exists(base / "a" / "provenance.json"));
  CHECK(fs::exists(base / "a" / "report.json"));
  // no timestamps: the same config gives byte-identical files
  CHECK(slurp(base / "a" / "rates.csv") == first);
  auto pa = nlohmann::json::parse(slurp(base / "a" / "provenance.json"));
  CHECK(pa["schema"] == kSchema);
  CHECK(pa["seeds"][0] == 1);

  // module errors land in failure.json with exit code 2
  c.kind = "sample";
  c.dim = 2;
  c.out = (base / "c").string();
  ExperimentResult e = run_experiment(c);
  CHECK(e.exit_code == 2);
  CHECK(fs::exists(base / "c" / "failure.json"));
  fs::remove_all(base);
}
