#include "gravalloc/basins.hpp"

#include "gravalloc/parallel.hpp"
#include "gravalloc/rng.hpp"

#include <ostream>

namespace gravalloc {

namespace {

constexpr std::int32_t kUnknown = -2;
constexpr std::int32_t kPending = -3;

struct Grid {
  int d;
  int n;
  std::vector<std::size_t> stride;

  Grid(int d_, int n_) : d(d_), n(n_), stride(d_, 1) {
    for (int i = 1; i < d; ++i) stride[i] = stride[i - 1] * n;
  }
  std::size_t total() const { return stride[d - 1] * n; }
  std::size_t index(const int* c) const {
    std::size_t s = 0;
    for (int i = 0; i < d; ++i) s += static_cast<std::size_t>(((c[i] % n) + n) % n) * stride[i];
    return s;
  }
  void coords(std::size_t idx, int* c) const {
    for (int i = 0; i < d; ++i) {
      c[i] = static_cast<int>(idx % n);
      idx /= n;
    }
  }
};

// Visit every c with c_i = base_i + k_i step, k_i in [0, count).
template <class F>
void for_each_offset(int d, const int* base, int step, int count, F&& f) {
  int k[kMaxDim] = {0};
  int c[kMaxDim];
  while (true) {
    for (int i = 0; i < d; ++i) c[i] = base[i] + k[i] * step;
    f(c);
    int i = 0;
    while (i < d && ++k[i] >= count) {
      k[i] = 0;
      ++i;
    }
    if (i == d) break;
  }
}

std::int32_t flow_label(const Vec& x, const PeriodicField& field, const FlowPolicy& policy) {
  try {
    Trajectory tr = integrate_flow(x, field, policy);
    return tr.terminal == Terminal::Captured ? tr.star : kUnallocated;
  } catch (const PreconditionError&) {
    return field.nearest(x).index;
  } catch (const IntegrationError&) {
    return kUnallocated;
  }
}

}  // namespace

Vec BasinMap::point(std::size_t index) const {
  Vec x(d);
  for (int i = 0; i < d; ++i) {
    x[i] = lower[i] + (static_cast<double>(index % n) + 0.5) * spacing;
    index /= n;
  }
  return x;
}

void BasinMap::write_csv(std::ostream& out) const {
  out << "grid_index,star\n";
  for (std::size_t i = 0; i < label.size(); ++i) out << i << ',' << label[i] << '\n';
}

void BasinMap::write_binary(std::ostream& out) const {
  std::int32_t hdr[2] = {d, n};
  out.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
  out.write(reinterpret_cast<const char*>(&spacing), sizeof spacing);
  out.write(reinterpret_cast<const char*>(lower.data()), sizeof(double) * d);
  out.write(reinterpret_cast<const char*>(label.data()), sizeof(std::int32_t) * label.size());
}

BasinMap assign_basins(const PeriodicField& field, int n, BasinPolicy policy) {
  const int d = field.dim();
  if (n < 1) throw ParameterError("grid size must be positive");
  int s = std::max(1, policy.coarse_stride);
  if ((s & (s - 1)) != 0) throw ParameterError("coarse stride must be a power of two");
  while (s > 1 && n % s != 0) s /= 2;
  int threads = default_threads(policy.threads);
  FlowPolicy fp = policy.flow;
  fp.record = false;
  fp.record_potential = false;
  fp.backward = false;
  fp.capture_ball = true;

  Grid g(d, n);
  BasinMap map;
  map.d = d;
  map.n = n;
  map.spacing = field.side() / n;
  map.lower = field.lower();
  map.label.assign(g.total(), kUnknown);

  auto run = [&](std::vector<std::size_t>& pts) {
    parallel_for(pts.size(), threads, [&](std::size_t k) {
      map.label[pts[k]] = flow_label(map.point(pts[k]), field, fp);
    });
    map.integrated += pts.size();
  };
  auto want = [&](std::vector<std::size_t>& pts, const int* c) {
    std::size_t id = g.index(c);
    if (map.label[id] == kUnknown) {
      map.label[id] = kPending;
      pts.push_back(id);
    }
  };

  // coarse lattice plus block centres
  std::vector<std::size_t> pts;
  std::vector<std::size_t> blocks;
  int zero[kMaxDim] = {0};
  for_each_offset(d, zero, s, n / s, [&](const int* c) {
    want(pts, c);
    blocks.push_back(g.index(c));
    if (s > 1) {
      int m[kMaxDim];
      for (int i = 0; i < d; ++i) m[i] = c[i] + s / 2;
      want(pts, m);
    }
  });
  run(pts);

  struct Fill {
    std::size_t base;
    int stride;
    std::int32_t label;
  };
  std::vector<Fill> fills;
  bool top = true;
  while (s > 1 && !blocks.empty()) {
    std::vector<std::size_t> split;
    for (std::size_t b : blocks) {
      int c0[kMaxDim];
      g.coords(b, c0);
      std::int32_t first = map.label[b];
      bool uniform = true;
      for_each_offset(d, c0, s, 2, [&](const int* c) { uniform = uniform && map.label[g.index(c)] == first; });
      if (top && uniform) {
        int m[kMaxDim];
        for (int i = 0; i < d; ++i) m[i] = c0[i] + s / 2;
        uniform = map.label[g.index(m)] == first;
      }
      if (uniform) fills.push_back({b, s, first});
      else split.push_back(b);
    }
    const int half = s / 2;
    pts.clear();
    std::vector<std::size_t> children;
    for (std::size_t b : split) {
      int c0[kMaxDim];
      g.coords(b, c0);
      for_each_offset(d, c0, half, 3, [&](const int* c) { want(pts, c); });
      for_each_offset(d, c0, half, 2, [&](const int* c) { children.push_back(g.index(c)); });
    }
    run(pts);
    blocks.swap(children);
    s = half;
    top = false;
  }
  for (const Fill& f : fills) {
    int c0[kMaxDim];
    g.coords(f.base, c0);
    for_each_offset(d, c0, 1, f.stride + 1, [&](const int* c) {
      std::size_t id = g.index(c);
      if (map.label[id] == kUnknown) map.label[id] = f.label;
    });
  }

  if (policy.refine) {
    // isolated points: no face neighbour shares the label
    std::vector<std::size_t> iso;
    for (std::size_t id = 0; id < map.label.size(); ++id) {
      int c[kMaxDim];
      g.coords(id, c);
      bool alone = true;
      for (int i = 0; i < d && alone; ++i) {
        for (int sgn : {-1, 1}) {
          c[i] += sgn;
          if (map.label[g.index(c)] == map.label[id]) alone = false;
          c[i] -= sgn;
        }
      }
      if (alone) iso.push_back(id);
    }
    FlowPolicy tight = fp;
    tight.rtol *= policy.refine_rtol_factor;
    tight.atol *= policy.refine_rtol_factor;
    std::vector<std::int32_t> redo(iso.size());
    parallel_for(iso.size(), threads, [&](std::size_t k) { redo[k] = flow_label(map.point(iso[k]), field, tight); });
    for (std::size_t k = 0; k < iso.size(); ++k) {
      if (redo[k] != map.label[iso[k]]) ++map.refined;
      map.label[iso[k]] = redo[k];
    }
    map.integrated += iso.size();
  }

  map.counts.assign(field.stars().size(), 0);
  for (std::int32_t l : map.label) {
    if (l >= 0) ++map.counts[l];
    else ++map.timeouts;
  }
  if (map.timeouts > policy.max_timeout_fraction * map.label.size())
    throw QualityError("too many grid points did not reach a star; increase the max time");
  return map;
}

CellStats cell_statistics(const BasinMap& map, const PeriodicField& field, int star, double R, std::size_t samples,
                          std::uint64_t seed) {
  const int d = map.d;
  if (star < 0 || star >= static_cast<int>(field.stars().size())) throw ParameterError("star index out of range");
  Grid g(d, map.n);
  const Vec& z = field.stars()[star];
  std::vector<std::size_t> cell;
  for (std::size_t id = 0; id < map.label.size(); ++id) {
    if (map.label[id] == star) cell.push_back(id);
  }
  if (cell.empty()) throw DegenerateCellError("cell contains no grid points");
  CellStats st;
  st.star = star;
  st.R = R;
  const double dv = std::pow(map.spacing, d);
  st.volume = cell.size() * dv;

  // offsets from the star, unwrapped by minimum image
  std::vector<Vec> q(cell.size());
  for (std::size_t k = 0; k < cell.size(); ++k) q[k] = field.displacement(z, map.point(cell[k]));
  std::size_t far = 0;
  for (const auto& v : q) {
    if (v.norm() > R) ++far;
  }
  st.tentacle = far * dv;

  // diameter: boundary points plus the star itself
  std::vector<std::pair<double, Vec>> bd;
  bd.emplace_back(0.0, Vec::Zero(d));
  for (std::size_t k = 0; k < cell.size(); ++k) {
    int c[kMaxDim];
    g.coords(cell[k], c);
    bool edge = false;
    for (int i = 0; i < d && !edge; ++i) {
      for (int sgn : {-1, 1}) {
        c[i] += sgn;
        if (map.label[g.index(c)] != star) edge = true;
        c[i] -= sgn;
      }
    }
    if (edge || cell.size() < 3) bd.emplace_back(q[k].norm(), q[k]);
  }
  std::sort(bd.begin(), bd.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  double best = 0.0;
  for (std::size_t i = 0; i < bd.size(); ++i) {
    if (2.0 * bd[i].first <= best) break;
    for (std::size_t j = i + 1; j < bd.size(); ++j) {
      if (bd[i].first + bd[j].first <= best) break;
      best = std::max(best, (bd[i].second - bd[j].second).norm());
    }
  }
  st.diameter = best;

  Stream rng(seed, static_cast<std::uint64_t>(star), "cell-y");
  st.Y.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    std::size_t k = static_cast<std::size_t>(rng.uniform() * cell.size());
    if (k >= cell.size()) k = cell.size() - 1;
    st.Y.push_back(q[k].norm());
  }
  return st;
}

}  // namespace gravalloc
