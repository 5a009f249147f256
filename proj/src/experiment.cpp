#include "gravalloc/experiment.hpp"

#include "gravalloc/basins.hpp"
#include "gravalloc/constructions.hpp"
#include "gravalloc/fields.hpp"
#include "gravalloc/pointfield.hpp"
#include "gravalloc/rates.hpp"
#include "gravalloc/suites.hpp"
#include "gravalloc/tails.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace gravalloc {

using nlohmann::json;
namespace fs = std::filesystem;

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  c.kind = j.at("kind").get<std::string>();
  c.dim = j.value("dim", c.dim);
  if (j.contains("R")) {
    if (j["R"].is_array()) c.R = j["R"].get<std::vector<double>>();
    else c.R = {j["R"].get<double>()};
  }
  c.replicas = j.value("replicas", c.replicas);
  if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("seed")) c.seeds = {j["seed"].get<std::uint64_t>()};
  c.tolerances = j.value("tolerances", json::object());
  c.out = j.value("out", c.out);
  c.params = j.value("params", json::object());
  c.validate();
  return c;
}

json ExperimentConfig::to_json() const {
  return {{"kind", kind},   {"dim", dim},     {"R", R},           {"replicas", replicas},
          {"seeds", seeds}, {"out", out},     {"tolerances", tolerances}, {"params", params}};
}

void ExperimentConfig::validate() const {
  static const std::vector<std::string> kinds{"equal-volume", "rates", "mc-tail", "verify", "galaxy", "wormhole",
                                              "sample"};
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) throw ParameterError("unknown experiment kind '" + kind + "'");
  if (replicas < 1) throw ParameterError("replica count must be at least 1");
  if (seeds.empty()) throw ParameterError("at least one seed is needed");
  if (out.empty()) throw ParameterError("output path is empty");
}

json provenance(const ExperimentConfig& cfg) {
  char eigen[32];
  std::snprintf(eigen, sizeof eigen, "%d.%d.%d", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
  return {{"schema", kSchema},
          {"version", kVersion},
          {"seeds", cfg.seeds},
          {"tolerances", cfg.tolerances},
          {"eigen", eigen},
          {"boost", BOOST_LIB_VERSION},
          {"compiler", __VERSION__},
          {"config", cfg.to_json()}};
}

namespace {

class Writer {
 public:
  Writer(const ExperimentConfig& cfg, ExperimentResult& res) : cfg_(cfg), res_(res) {
    fs::create_directories(cfg.out);
    std::ofstream probe(path("provenance.json"));
    if (!probe) throw ParameterError("output directory is not writable: " + cfg.out);
    probe << provenance(cfg).dump(2) << "\n";
    res_.files.push_back(path("provenance.json"));
  }

  std::string path(const std::string& name) const { return (fs::path(cfg_.out) / name).string(); }

  // CSV with a commented provenance header
  std::ofstream csv(const std::string& name) {
    std::ofstream f(path(name));
    f << "# schema: gravalloc.table/1\n# provenance: " << provenance(cfg_).dump() << "\n";
    res_.files.push_back(path(name));
    return f;
  }

  void json_file(const std::string& name, json body) {
    body["provenance"] = provenance(cfg_);
    std::ofstream f(path(name));
    f << body.dump(2) << "\n";
    res_.files.push_back(path(name));
  }

  std::ofstream raw(const std::string& name) {
    res_.files.push_back(path(name));
    return std::ofstream(path(name));
  }

 private:
  const ExperimentConfig& cfg_;
  ExperimentResult& res_;
};

void run_equal_volume(const ExperimentConfig& cfg, Writer& w, ExperimentResult& res) {
  DomainSpec dom;
  dom.d = cfg.dim;
  dom.mode = DomainMode::Torus;
  dom.side = cfg.params.value("side", 4.0);
  const int grid = cfg.params.value("grid", 100);
  BasinPolicy bp;
  bp.flow.r_cap = cfg.tolerances.value("r_cap", bp.flow.r_cap);
  bp.flow.rtol = cfg.tolerances.value("rtol", bp.flow.rtol);
  bp.coarse_stride = cfg.params.value("stride", bp.coarse_stride);
  auto f = w.csv("cells.csv");
  f << "seed,star,volume,target,rel_dev\n";
  double worst = 0.0;
  std::size_t within = 0, cells = 0;
  for (auto seed : cfg.seeds) {
    StarField sf = sample_poisson(dom, cfg.params.value("intensity", 1.0), seed);
    PeriodicField pf(sf);
    BasinMap m = assign_basins(pf, grid, bp);
    const double target = dom.volume() / static_cast<double>(sf.size());
    for (std::size_t i = 0; i < sf.size(); ++i) {
      double v = m.cell_volume(static_cast<int>(i));
      double rel = v / target - 1.0;
      char buf[128];
      std::snprintf(buf, sizeof buf, "%llu,%zu,%.12g,%.12g,%.6e\n", static_cast<unsigned long long>(seed), i, v, target,
                    rel);
      f << buf;
      worst = std::max(worst, std::abs(rel));
      within += std::abs(rel) <= 0.05;
      ++cells;
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "summary,%zu,%.6f,,%.6e\n", cells, static_cast<double>(within) / cells, worst);
  f << buf;
  res.summary = {{"cells", cells}, {"fraction_within_5pct", static_cast<double>(within) / cells}, {"max_rel_dev", worst}};
}

void run_tail(const ExperimentConfig& cfg, Writer& w, ExperimentResult& res) {
  TailSpec spec;
  spec.stat = tail_statistic_from_string(cfg.params.value("statistic", std::string("force")));
  spec.d = cfg.dim;
  spec.q = cfg.params.value("q", spec.q);
  spec.p = cfg.params.value("p", spec.p);
  std::vector<double> th = cfg.params.value("thresholds", std::vector<double>{0, 1, 2, 3, 4, 5, 6});
  TailConfig tc;
  tc.replicas = cfg.replicas;
  tc.seed = cfg.seeds.front();
  TailTable t = mc_tail(spec, th, tc);
  TailFit fit = fit_tail(t);
  bool held = true;
  if (cfg.seeds.size() > 1) {
    // first seed calibrates, second is the disjoint check
    TailBound b = calibrate_tail_bound(t);
    tc.seed = cfg.seeds[1];
    t = mc_tail(spec, th, tc);
    fit = fit_tail(t);
    held = apply_tail_bound(t, b);
    res.summary["c"] = b.c;
    res.summary["C"] = b.C;
  }
  auto f = w.csv("tail.csv");
  f << "t,exceed,n,p,wilson_lo,wilson_hi,bound,censored\n";
  for (const auto& r : t.rows) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%.10g,%zu,%zu,%.10g,%.10g,%.10g,%.10g,%d\n", r.t, r.exceed, r.n, r.p, r.lo, r.hi,
                  r.bound, r.censored ? 1 : 0);
    f << buf;
  }
  res.summary["slope"] = fit.slope;
  res.summary["r2"] = fit.r2;
  res.summary["bound_holds"] = held;
  if (!held) res.status = "fail";
}

void run_construction(const ExperimentConfig& cfg, Writer& w, ExperimentResult& res) {
  const double R = cfg.R.empty() ? (cfg.kind == "galaxy" ? 50.0 : 10.0) : cfg.R.front();
  const auto seed = cfg.seeds.front();
  if (cfg.kind == "galaxy") {
    GalaxyConfig gc;
    gc.d = cfg.dim;
    gc.R = R;
    gc.gamma = cfg.params.value("gamma", gc.gamma);
    gc.M = cfg.params.value("M", gc.M);
    gc.k = cfg.params.value("k", 1000L);
    gc.background = cfg.params.value("background", false);
    Galaxy g = build_galaxy(gc, seed);
    StarField sf;
    sf.domain.d = gc.d;
    sf.domain.side = 40.0 * R;
    sf.seed = seed;
    sf.points = g.surplus;
    sf.points.insert(sf.points.end(), g.background.begin(), g.background.end());
    auto f = w.raw("stars.jsonl");
    write_jsonl(f, sf);
    GalaxyBounds b = galaxy_f5_bounds(gc, g.eta);
    Vec x = Vec::Zero(gc.d);
    res.summary = {{"eta", g.eta},       {"volume_U", g.volume_U},  {"surplus", g.surplus.size()},
                   {"background", g.background.size()}, {"F5_origin", g.surplus_force(x)[0]},
                   {"bound_lo", b.lo * gc.k / std::pow(R, gc.d - 1)}, {"bound_hi", b.hi * gc.k / std::pow(R, gc.d - 1)}};
  } else {
    WormholeConfig wc;
    wc.d = cfg.dim;
    wc.R = R;
    wc.gamma = cfg.params.value("gamma", wc.gamma);
    wc.k = cfg.params.value("k", wc.k);
    wc.delta = cfg.tolerances.value("delta", wc.delta);
    wc.max_points = cfg.params.value("max_points", wc.max_points);
    Wormhole wh = build_wormhole(wc, seed);
    auto f = w.raw("points.jsonl");
    f << "{\"schema\":\"gravalloc.weighted/1\",\"d\":" << wc.d << ",\"count\":" << wh.size() << "}\n";
    char buf[64];
    for (std::size_t i = 0; i < wh.size(); ++i) {
      f << "{\"x\":[";
      for (int c = 0; c < wc.d; ++c) {
        std::snprintf(buf, sizeof buf, "%s%.17g", c ? "," : "", wh.coords[i * wc.d + c]);
        f << buf;
      }
      std::snprintf(buf, sizeof buf, "],\"m\":%.17g}\n", wh.mass[i]);
      f << buf;
    }
    Vec x = Vec::Zero(wc.d);
    res.summary = {{"W", wh.par.W},        {"beta", wh.par.beta}, {"tau", wh.par.tau}, {"points", wh.size()},
                   {"patches", wh.patches.size()}, {"certified", wh.certified}, {"F41_origin", wh.force(x)[0]},
                   {"G_origin", continuous_wormhole_force(wc, x)[0]}};
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  Writer w(cfg, res);
  try {
    if (cfg.kind == "equal-volume") {
      run_equal_volume(cfg, w, res);
    } else if (cfg.kind == "rates") {
      auto f = w.csv("rates.csv");
      write_rates_csv(f, cfg.params.value("d_lo", 3), cfg.params.value("d_hi", 6), cfg.params.value("steps", 100),
                      cfg.params.value("gamma_max", 3));
    } else if (cfg.kind == "mc-tail") {
      run_tail(cfg, w, res);
    } else if (cfg.kind == "verify") {
      SuiteOptions o;
      o.seed = cfg.seeds.front();
      o.dim = cfg.params.value("dim", 0);
      o.full = cfg.params.value("full", false);
      SuiteReport rep = run_suite(cfg.params.at("suite").get<std::string>(), o);
      res.summary = rep.to_json();
      res.exit_code = rep.exit_code();
      res.status = res.exit_code == 0 ? "ok" : (res.exit_code == 2 ? "fail" : "censored");
    } else if (cfg.kind == "galaxy" || cfg.kind == "wormhole") {
      run_construction(cfg, w, res);
    } else if (cfg.kind == "sample") {
      DomainSpec dom;
      dom.d = cfg.dim;
      dom.side = cfg.params.value("side", 4.0);
      dom.mode = cfg.params.value("torus", true) ? DomainMode::Torus : DomainMode::Box;
      StarField sf = sample_poisson(dom, cfg.params.value("intensity", 1.0), cfg.seeds.front());
      auto f = w.raw("stars.jsonl");
      write_jsonl(f, sf);
      res.summary = {{"count", sf.size()}};
    }
    if (res.status == "fail" && res.exit_code == 0) res.exit_code = 2;
  } catch (const std::exception& e) {
    res.status = "error";
    res.exit_code = 2;
    res.summary = {{"error", e.what()}};
    w.json_file("failure.json", {{"status", "error"}, {"kind", cfg.kind}, {"message", e.what()}, {"partial_outputs", res.files}});
    return res;
  }
  w.json_file("report.json", {{"status", res.status}, {"kind", cfg.kind}, {"summary", res.summary}});
  return res;
}

}  // namespace gravalloc
