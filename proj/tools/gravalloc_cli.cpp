#include "gravalloc/basins.hpp"
#include "gravalloc/constructions.hpp"
#include "gravalloc/experiment.hpp"
#include "gravalloc/fields.hpp"
#include "gravalloc/flow.hpp"
#include "gravalloc/pointfield.hpp"
#include "gravalloc/rates.hpp"
#include "gravalloc/suites.hpp"
#include "gravalloc/tails.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace gravalloc;
using nlohmann::json;

namespace {

struct Common {
  int dim = 0;
  double R = 0.0;
  double gamma = -1.0;
  std::uint64_t seed = 1;
  std::size_t replicas = 0;
  double tol = 0.0;
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--dim", c.dim, "dimension");
  app->add_option("--R", c.R, "scale R");
  app->add_option("--gamma", c.gamma, "exponent gamma");
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--replicas", c.replicas, "Monte Carlo replicas");
  app->add_option("--tol", c.tol, "tolerance");
  app->add_option("--out", c.out, "output path");
}

// stdout when the path is empty
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw ParameterError("cannot write " + path);
  f << text;
}

StarField load_or_sample(const std::string& in, const Common& c, double side) {
  if (!in.empty()) {
    std::ifstream f(in);
    if (!f) throw ParameterError("cannot read " + in);
    return read_jsonl(f);
  }
  DomainSpec dom;
  dom.d = c.dim > 0 ? c.dim : 3;
  dom.mode = DomainMode::Torus;
  dom.side = side;
  return sample_poisson(dom, 1.0, c.seed);
}

Vec parse_point(const std::string& s, int d) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
  if (static_cast<int>(v.size()) != d) throw ParameterError("point needs " + std::to_string(d) + " coordinates");
  Vec x(d);
  for (int i = 0; i < d; ++i) x[i] = v[i];
  return x;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gravitational allocation toolkit"};
  app.require_subcommand(1);
  Common c;

  double side = 4.0, intensity = 1.0;
  bool box = false;
  auto* sample = app.add_subcommand("sample", "Poisson stars in a box or torus (JSONL)");
  add_common(sample, c);
  sample->add_option("--side", side);
  sample->add_option("--intensity", intensity);
  sample->add_flag("--box", box, "box instead of torus");

  std::string in;
  int grid = 100, stride = 8;
  auto* allocate = app.add_subcommand("allocate", "basins on a grid over the torus, per-cell volumes (CSV)");
  add_common(allocate, c);
  allocate->add_option("--in", in, "star field JSONL");
  allocate->add_option("--side", side);
  allocate->add_option("--grid", grid);
  allocate->add_option("--stride", stride);

  std::string point;
  auto* flow = app.add_subcommand("flow", "one flow curve (CSV)");
  add_common(flow, c);
  flow->add_option("--in", in);
  flow->add_option("--side", side);
  flow->add_option("--x", point, "start point, comma separated")->required();

  int star = 0;
  std::size_t samples = 2000;
  auto* stats = app.add_subcommand("stats", "cell statistics of one star (JSON)");
  add_common(stats, c);
  stats->add_option("--in", in);
  stats->add_option("--side", side);
  stats->add_option("--grid", grid);
  stats->add_option("--star", star);
  stats->add_option("--samples", samples);

  std::string what;
  long k = 1000;
  auto* construct = app.add_subcommand("construct", "galaxy or wormhole configuration");
  add_common(construct, c);
  construct->add_option("what", what)->required()->check(CLI::IsMember({"galaxy", "wormhole"}));
  construct->add_option("--k", k, "galaxy surplus");

  std::string suite;
  bool full = false;
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  add_common(verify, c);
  verify->add_option("suite", suite)->required()->check(CLI::IsMember(suite_names()));
  verify->add_flag("--full", full, "acceptance-sized run");

  int d_lo = 3, d_hi = 6;
  double at = -1.0;
  auto* rates = app.add_subcommand("rates", "rate functions (CSV), or one value with --at");
  add_common(rates, c);
  rates->add_option("--dmin", d_lo);
  rates->add_option("--dmax", d_hi);
  rates->add_option("--at", at, "evaluate f_d, g_d, h_d(2-gamma) at this gamma");

  double q = 2.0, p = 10.0;
  std::string statistic = "force";
  std::vector<double> thresholds{0, 0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4, 4.5, 5, 5.5, 6};
  auto* tail = app.add_subcommand("mc-tail", "Monte Carlo tail table (CSV)");
  add_common(tail, c);
  tail->add_option("--q", q);
  tail->add_option("--p", p);
  tail->add_option("--statistic", statistic)->check(CLI::IsMember({"force", "maxforce", "potential", "potdiff"}));
  tail->add_option("--thresholds", thresholds)->delimiter(',');

  std::string config;
  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("config", config)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sample->parsed()) {
      DomainSpec dom;
      dom.d = c.dim > 0 ? c.dim : 3;
      dom.side = side;
      dom.mode = box ? DomainMode::Box : DomainMode::Torus;
      std::ostringstream os;
      write_jsonl(os, sample_poisson(dom, intensity, c.seed));
      emit(c.out, os.str());
      return 0;
    }
    if (allocate->parsed()) {
      StarField f = load_or_sample(in, c, side);
      PeriodicField pf(f);
      BasinPolicy bp;
      bp.coarse_stride = stride;
      if (c.tol > 0.0) bp.flow.rtol = c.tol;
      BasinMap m = assign_basins(pf, grid, bp);
      const double target = f.domain.volume() / static_cast<double>(f.size());
      std::ostringstream os;
      os << "star,volume,target,rel_dev\n";
      std::size_t within = 0;
      for (std::size_t i = 0; i < f.size(); ++i) {
        double v = m.cell_volume(static_cast<int>(i));
        os << i << ',' << v << ',' << target << ',' << v / target - 1.0 << '\n';
        within += std::abs(v / target - 1.0) <= 0.05;
      }
      emit(c.out, os.str());
      std::cerr << within << "/" << f.size() << " cells within 5% of V/n, timeouts " << m.timeouts << "\n";
      return 0;
    }
    if (flow->parsed()) {
      StarField f = load_or_sample(in, c, side);
      PeriodicField pf(f);
      FlowPolicy fp;
      fp.record_potential = true;
      if (c.tol > 0.0) fp.rtol = c.tol;
      Trajectory t = integrate_flow(parse_point(point, f.dim()), pf, fp);
      std::ostringstream os;
      os << "t,u,L";
      for (int i = 0; i < f.dim(); ++i) os << ",x" << i + 1;
      os << "\n";
      for (const auto& s : t.samples) {
        os << s.t << ',' << s.u << ',' << s.L;
        for (int i = 0; i < f.dim(); ++i) os << ',' << s.x[i];
        os << '\n';
      }
      emit(c.out, os.str());
      std::cerr << "star " << t.star << " time " << t.time << " steps " << t.steps << "\n";
      return t.terminal == Terminal::Captured ? 0 : 3;
    }
    if (stats->parsed()) {
      StarField f = load_or_sample(in, c, side);
      PeriodicField pf(f);
      BasinMap m = assign_basins(pf, grid);
      CellStats s = cell_statistics(m, pf, star, c.R > 0.0 ? c.R : 1.0, samples, c.seed);
      json j = {{"star", s.star}, {"volume", s.volume}, {"diameter", s.diameter}, {"tentacle", s.tentacle},
                {"R", s.R}, {"Y", s.Y}};
      emit(c.out, j.dump(2) + "\n");
      return 0;
    }
    if (construct->parsed()) {
      ExperimentConfig cfg;
      cfg.kind = what;
      cfg.dim = c.dim > 0 ? c.dim : (what == "galaxy" ? 3 : 4);
      if (c.R > 0.0) cfg.R = {c.R};
      cfg.seeds = {c.seed};
      cfg.out = c.out.empty() ? "out-" + what : c.out;
      if (c.gamma >= 0.0) cfg.params["gamma"] = c.gamma;
      if (c.tol > 0.0) cfg.tolerances["delta"] = c.tol;
      cfg.params["k"] = k;
      ExperimentResult r = run_experiment(cfg);
      std::cout << r.summary.dump(2) << "\n";
      return r.exit_code;
    }
    if (verify->parsed()) {
      SuiteOptions o;
      o.dim = c.dim;
      o.R = c.R;
      o.gamma = c.gamma;
      o.seed = c.seed;
      o.replicas = c.replicas;
      o.tol = c.tol;
      o.full = full;
      SuiteReport rep = run_suite(suite, o);
      for (const auto& ch : rep.checks) std::cout << to_string(ch.status) << "  " << ch.name << ": " << ch.summary << "\n";
      if (!c.out.empty()) emit(c.out, rep.to_json().dump(2) + "\n");
      return rep.exit_code();
    }
    if (rates->parsed()) {
      if (at >= 0.0) {
        int d = c.dim > 0 ? c.dim : 3;
        std::cout << "f=" << rate_eval(d, at, RateKind::F) << " g=" << rate_eval(d, 0.0, RateKind::G);
        if (at < 2.0) std::cout << " h(2-gamma)=" << rate_eval(d, 2.0 - at, RateKind::H);
        std::cout << "\n";
        return 0;
      }
      std::ostringstream os;
      write_rates_csv(os, d_lo, d_hi);
      emit(c.out, os.str());
      return 0;
    }
    if (tail->parsed()) {
      TailSpec spec;
      spec.stat = tail_statistic_from_string(statistic);
      spec.d = c.dim > 0 ? c.dim : 3;
      spec.q = q;
      spec.p = p;
      TailConfig tc;
      tc.seed = c.seed;
      if (c.replicas > 0) tc.replicas = c.replicas;
      TailTable t = mc_tail(spec, thresholds, tc);
      TailFit fit = fit_tail(t);
      std::ostringstream os;
      os << "t,exceed,n,p,wilson_lo,wilson_hi,censored\n";
      bool censored = false;
      for (const auto& r : t.rows) {
        os << r.t << ',' << r.exceed << ',' << r.n << ',' << r.p << ',' << r.lo << ',' << r.hi << ','
           << (r.censored ? 1 : 0) << '\n';
        censored = censored || r.censored;
      }
      emit(c.out, os.str());
      std::cerr << "slope of log P on t^2: " << fit.slope << " (R2 " << fit.r2 << ", " << fit.points << " points)\n";
      if (fit.points < 3) return 3;
      if (!(fit.slope < 0.0 && fit.r2 >= 0.9)) return 2;
      return censored ? 3 : 0;
    }
    if (run->parsed()) {
      std::ifstream f(config);
      ExperimentConfig cfg = ExperimentConfig::from_json(json::parse(f));
      ExperimentResult r = run_experiment(cfg);
      std::cout << r.status << "\n";
      for (const auto& file : r.files) std::cout << "  " << file << "\n";
      return r.exit_code;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
