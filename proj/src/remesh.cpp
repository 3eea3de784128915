#include "dpg/remesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace dpg {

void RemeshConfig::validate() const {
  if (!(length_low > 0.0 && length_low < 1.0 && length_high > 1.0)) {
    throw RemeshError("edge-length band must satisfy 0 < low < 1 < high");
  }
  if (max_passes < 1) throw RemeshError("max_passes must be positive");
  if (count_corrections < 0) throw RemeshError("count_corrections must be non-negative");
  if (!(count_tolerance >= 0.0)) throw RemeshError("count_tolerance must be non-negative");
}

namespace {

using Key = std::uint64_t;

Key edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<Key>(a) << 32) | static_cast<Key>(static_cast<std::uint32_t>(b));
}

Metric lerp_log(const Metric& a, const Metric& b, double t) {
  return {(1 - t) * a.m11 + t * b.m11, (1 - t) * a.m12 + t * b.m12, (1 - t) * a.m22 + t * b.m22};
}

// Lengths are measured in M / 3, so that unit length means a metric-unit
// triangle (e^T M e = 3) and element counts follow area * density = 3 sqrt(3) / 4.
Metric normalized_log(const Metric& m) {
  Metric l = metric_log(m);
  const double shift = std::log(3.0);
  l.m11 -= shift;
  l.m22 -= shift;
  return l;
}

Metric mean_log(const Metric& a, const Metric& b, const Metric& c) {
  return {(a.m11 + b.m11 + c.m11) / 3.0, (a.m12 + b.m12 + c.m12) / 3.0, (a.m22 + b.m22 + c.m22) / 3.0};
}

// Boundary classification of a vertex.
struct VertexInfo {
  bool boundary = false;
  bool corner = false;
  Point direction = Point::Zero();  // unit tangent of the boundary line
};

// Mutable triangulation supporting the local operations.
class WorkMesh {
 public:
  WorkMesh(const Triangulation& mesh, const MetricField& field, const RemeshConfig& cfg)
      : field_(field), cfg_(cfg) {
    pos_ = mesh.vertices();
    info_.resize(pos_.size());
    logm_.reserve(pos_.size());
    const bool same = field.vertex_metrics().size() == pos_.size();
    for (std::size_t v = 0; v < pos_.size(); ++v) {
      logm_.push_back(normalized_log(same ? field.vertex_metrics()[v] : field.at(pos_[v])));
    }
    tris_ = mesh.triangles();
    alive_.assign(tris_.size(), 1);
    vertex_alive_.assign(pos_.size(), 1);
    scale_ = mesh.bbox_diagonal();

    std::vector<std::vector<int>> bedges(pos_.size());
    for (const auto& e : mesh.edges()) {
      if (!e.is_boundary()) continue;
      boundary_[edge_key(e.v[0], e.v[1])] = e.tag;
      bedges[e.v[0]].push_back(e.v[1]);
      bedges[e.v[1]].push_back(e.v[0]);
    }
    for (std::size_t v = 0; v < pos_.size(); ++v) {
      if (bedges[v].empty()) continue;
      auto& in = info_[v];
      in.boundary = true;
      if (bedges[v].size() != 2) {
        in.corner = true;
        continue;
      }
      const int a = bedges[v][0], b = bedges[v][1];
      const Point ta = pos_[v] - pos_[a], tb = pos_[b] - pos_[v];
      const double cross = ta.x() * tb.y() - ta.y() * tb.x();
      const bool same_tag = boundary_.at(edge_key(v, a)) == boundary_.at(edge_key(v, b));
      if (!same_tag || std::abs(cross) > 1e-10 * ta.norm() * tb.norm() || ta.dot(tb) <= 0.0) {
        in.corner = true;
      } else {
        in.direction = (pos_[b] - pos_[a]).normalized();
      }
    }
  }

  double length(int a, int b) const { return riemannian_edge_length(logm_[a], logm_[b], pos_[a], pos_[b]); }

  double area(int a, int b, int c) const { return signed_area(pos_[a], pos_[b], pos_[c]); }
  double area(const std::array<int, 3>& t) const { return area(t[0], t[1], t[2]); }

  double min_area() const { return 1e-14 * scale_ * scale_; }

  // Shape quality in the element's mean metric; 1 for a metric-equilateral triangle.
  double quality(const std::array<int, 3>& t) const {
    const Metric m = metric_exp(mean_log(logm_[t[0]], logm_[t[1]], logm_[t[2]]));
    const double a = area(t);
    if (a <= 0.0) return 0.0;
    double l2 = 0.0;
    for (int k = 0; k < 3; ++k) l2 += m.quad(pos_[t[(k + 1) % 3]] - pos_[t[k]]);
    return 4.0 * std::sqrt(3.0) * a * std::sqrt(m.det()) / l2;
  }

  Metric log_metric_at(const Point& x, const Metric& fallback) const {
    return field_.locate(x) >= 0 ? normalized_log(field_.at(x)) : fallback;
  }

  // Vertex -> incident alive triangles, and edge -> incident alive triangles.
  void build_adjacency() {
    vtris_.assign(pos_.size(), {});
    etris_.clear();
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (!alive_[t]) continue;
      const auto& tr = tris_[t];
      for (int k = 0; k < 3; ++k) {
        vtris_[tr[k]].push_back(static_cast<int>(t));
        etris_[edge_key(tr[(k + 1) % 3], tr[(k + 2) % 3])].push_back(static_cast<int>(t));
      }
    }
  }

  struct EdgeLen {
    int a, b;
    double len;
  };
  std::vector<EdgeLen> edges_with_lengths() const {
    std::vector<EdgeLen> out;
    out.reserve(etris_.size());
    for (const auto& [key, ts] : etris_) {
      const int a = static_cast<int>(key >> 32), b = static_cast<int>(key & 0xffffffffu);
      out.push_back({a, b, length(a, b)});
    }
    // Hash order is unspecified; sort for reproducibility.
    std::sort(out.begin(), out.end(), [](const EdgeLen& x, const EdgeLen& y) {
      return x.a != y.a ? x.a < y.a : x.b < y.b;
    });
    return out;
  }

  int split_sweep() {
    build_adjacency();
    auto edges = edges_with_lengths();
    std::erase_if(edges, [&](const EdgeLen& e) { return e.len <= cfg_.length_high; });
    std::stable_sort(edges.begin(), edges.end(), [](const EdgeLen& x, const EdgeLen& y) { return x.len > y.len; });
    std::vector<char> locked(tris_.size(), 0);
    int count = 0;
    for (const auto& e : edges) {
      const auto& ts = etris_.at(edge_key(e.a, e.b));
      if (std::any_of(ts.begin(), ts.end(), [&](int t) { return locked[t]; })) continue;
      const int m = add_split_vertex(e.a, e.b);
      for (int t : std::vector<int>(ts)) {
        const auto tr = tris_[t];
        int k = 0;
        while (!((tr[k] == e.a && tr[(k + 1) % 3] == e.b) || (tr[k] == e.b && tr[(k + 1) % 3] == e.a))) ++k;
        const int p = tr[k], q = tr[(k + 1) % 3], r = tr[(k + 2) % 3];
        alive_[t] = 0;
        tris_.push_back({p, m, r});
        tris_.push_back({m, q, r});
        alive_.push_back(1);
        alive_.push_back(1);
        locked[t] = 1;
        locked.push_back(1);
        locked.push_back(1);
      }
      const auto it = boundary_.find(edge_key(e.a, e.b));
      if (it != boundary_.end()) {
        const int tag = it->second;
        boundary_.erase(it);
        boundary_[edge_key(e.a, m)] = tag;
        boundary_[edge_key(m, e.b)] = tag;
        info_[m].boundary = true;
        info_[m].direction = (pos_[e.b] - pos_[e.a]).normalized();
      }
      ++count;
    }
    return count;
  }

  int collapse_sweep() {
    build_adjacency();
    auto edges = edges_with_lengths();
    std::erase_if(edges, [&](const EdgeLen& e) { return e.len >= cfg_.length_low; });
    std::stable_sort(edges.begin(), edges.end(), [](const EdgeLen& x, const EdgeLen& y) { return x.len < y.len; });
    std::vector<char> vlocked(pos_.size(), 0);
    int count = 0;
    for (const auto& e : edges) {
      if (vlocked[e.a] || vlocked[e.b] || !vertex_alive_[e.a] || !vertex_alive_[e.b]) continue;
      if (try_collapse(e.a, e.b, vlocked) || try_collapse(e.b, e.a, vlocked)) ++count;
    }
    return count;
  }

  int flip_sweep() {
    build_adjacency();
    std::vector<Key> keys;
    keys.reserve(etris_.size());
    for (const auto& [k, ts] : etris_)
      if (ts.size() == 2) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    std::vector<char> locked(tris_.size(), 0);
    int count = 0;
    for (Key key : keys) {
      const auto& ts = etris_.at(key);
      const int t1 = ts[0], t2 = ts[1];
      if (locked[t1] || locked[t2]) continue;
      const int a = static_cast<int>(key >> 32), b = static_cast<int>(key & 0xffffffffu);
      if (boundary_.count(key)) continue;
      // Orient so that t1 holds a->b counterclockwise.
      auto opposite = [&](int t, int u, int w) {
        for (int v : tris_[t])
          if (v != u && v != w) return v;
        return -1;
      };
      int p = a, q = b, first = t1, second = t2;
      if (!has_directed(tris_[t1], p, q)) std::swap(first, second);
      if (!has_directed(tris_[first], p, q)) continue;
      const int c = opposite(first, p, q), d = opposite(second, p, q);
      const std::array<int, 3> n1{c, p, d}, n2{d, q, c};
      if (area(n1) <= min_area() || area(n2) <= min_area()) continue;
      if (!should_flip(p, q, c, d)) continue;
      tris_[first] = n1;
      tris_[second] = n2;
      locked[first] = locked[second] = 1;
      ++count;
    }
    return count;
  }

  int smooth_sweep() {
    build_adjacency();
    int moved = 0;
    for (std::size_t v = 0; v < pos_.size(); ++v) {
      if (!vertex_alive_[v] || info_[v].corner || vtris_[v].empty()) continue;
      std::vector<int> nbrs;
      for (int t : vtris_[v])
        for (int u : tris_[t])
          if (u != static_cast<int>(v)) nbrs.push_back(u);
      std::sort(nbrs.begin(), nbrs.end());
      nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());

      const Point x = pos_[v];
      Point target = Point::Zero();
      for (int u : nbrs) {
        const double l = length(static_cast<int>(v), u);
        target += pos_[u] + (x - pos_[u]) / std::max(l, 1e-12);
      }
      target /= static_cast<double>(nbrs.size());
      Point step = target - x;
      if (info_[v].boundary) step = step.dot(info_[v].direction) * info_[v].direction;
      if (step.norm() < 1e-14 * scale_) continue;

      double qold = std::numeric_limits<double>::infinity();
      for (int t : vtris_[v]) qold = std::min(qold, quality(tris_[t]));
      const Metric old_log = logm_[v];
      bool accepted = false;
      for (double w : {1.0, 0.5, 0.25}) {
        pos_[v] = x + w * step;
        logm_[v] = log_metric_at(pos_[v], old_log);
        bool ok = true;
        double qnew = std::numeric_limits<double>::infinity();
        for (int t : vtris_[v]) {
          if (area(tris_[t]) <= min_area()) {
            ok = false;
            break;
          }
          qnew = std::min(qnew, quality(tris_[t]));
        }
        if (ok && qnew >= qold) {
          accepted = true;
          break;
        }
      }
      if (accepted) {
        ++moved;
      } else {
        pos_[v] = x;
        logm_[v] = old_log;
      }
    }
    return moved;
  }

  double out_of_band() {
    build_adjacency();
    const auto edges = edges_with_lengths();
    std::size_t bad = 0;
    for (const auto& e : edges)
      if (e.len < cfg_.length_low || e.len > cfg_.length_high) ++bad;
    return edges.empty() ? 0.0 : static_cast<double>(bad) / static_cast<double>(edges.size());
  }

  Triangulation finish() const {
    std::vector<int> remap(pos_.size(), -1);
    std::vector<Point> verts;
    for (std::size_t v = 0; v < pos_.size(); ++v) {
      if (!vertex_alive_[v]) continue;
      remap[v] = static_cast<int>(verts.size());
      verts.push_back(pos_[v]);
    }
    std::vector<std::array<int, 3>> tris;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (!alive_[t]) continue;
      const auto& tr = tris_[t];
      tris.push_back({remap[tr[0]], remap[tr[1]], remap[tr[2]]});
    }
    std::vector<std::pair<Key, int>> bsorted(boundary_.begin(), boundary_.end());
    std::sort(bsorted.begin(), bsorted.end());
    std::vector<BoundarySegment> bnd;
    for (const auto& [key, tag] : bsorted) {
      const int a = static_cast<int>(key >> 32), b = static_cast<int>(key & 0xffffffffu);
      bnd.push_back({{remap[a], remap[b]}, tag});
    }
    try {
      return Triangulation(std::move(verts), std::move(tris), std::move(bnd));
    } catch (const MeshError& err) {
      throw RemeshError(std::string("remesher produced an invalid mesh: ") + err.what());
    }
  }

 private:
  static bool has_directed(const std::array<int, 3>& t, int p, int q) {
    for (int k = 0; k < 3; ++k)
      if (t[k] == p && t[(k + 1) % 3] == q) return true;
    return false;
  }

  int add_split_vertex(int a, int b) {
    // Point at half the metric length, for a length density varying geometrically.
    const Point e = pos_[b] - pos_[a];
    const double la = std::sqrt(metric_exp(logm_[a]).quad(e));
    const double lb = std::sqrt(metric_exp(logm_[b]).quad(e));
    const double r = lb / la;
    double t = 0.5;
    if (std::abs(r - 1.0) > 1e-8) t = std::log(0.5 * (r + 1.0)) / std::log(r);
    t = std::clamp(t, 0.2, 0.8);
    const Point x = pos_[a] + t * e;
    pos_.push_back(x);
    logm_.push_back(log_metric_at(x, lerp_log(logm_[a], logm_[b], t)));
    info_.emplace_back();
    vertex_alive_.push_back(1);
    return static_cast<int>(pos_.size()) - 1;
  }

  // Moves vertex a onto b and removes the triangles sharing edge ab.
  bool try_collapse(int a, int b, std::vector<char>& vlocked) {
    const auto& ia = info_[a];
    if (ia.corner) return false;
    const Key ab = edge_key(a, b);
    const bool boundary_edge = boundary_.count(ab) > 0;
    if (ia.boundary && !boundary_edge) return false;

    const auto& ta = vtris_[a];
    const auto& shared = etris_.at(ab);
    // Link condition: common neighbours of a and b are exactly the opposite vertices.
    auto ring = [&](int v) {
      std::vector<int> r;
      for (int t : vtris_[v])
        for (int u : tris_[t])
          if (u != v) r.push_back(u);
      std::sort(r.begin(), r.end());
      r.erase(std::unique(r.begin(), r.end()), r.end());
      return r;
    };
    const auto ra = ring(a), rb = ring(b);
    std::vector<int> common;
    std::set_intersection(ra.begin(), ra.end(), rb.begin(), rb.end(), std::back_inserter(common));
    if (common.size() != shared.size()) return false;
    for (int v : ra)
      if (vlocked[v]) return false;

    double qold = std::numeric_limits<double>::infinity();
    for (int t : ta) qold = std::min(qold, quality(tris_[t]));
    const double qmin = std::min(cfg_.quality_floor, qold);
    for (int t : ta) {
      if (std::find(shared.begin(), shared.end(), t) != shared.end()) continue;
      auto tr = tris_[t];
      for (int& v : tr)
        if (v == a) v = b;
      if (area(tr) <= min_area() || quality(tr) < qmin) return false;
    }
    for (int v : ra) {
      if (v == b) continue;
      if (length(b, v) > cfg_.length_high) return false;
    }

    for (int t : ta) {
      if (std::find(shared.begin(), shared.end(), t) != shared.end()) {
        alive_[t] = 0;
        continue;
      }
      for (int& v : tris_[t])
        if (v == a) v = b;
    }
    if (boundary_edge) {
      boundary_.erase(ab);
      for (int v : ra) {
        const auto it = boundary_.find(edge_key(a, v));
        if (it == boundary_.end()) continue;
        const int tag = it->second;
        boundary_.erase(it);
        boundary_[edge_key(b, v)] = tag;
      }
    }
    vertex_alive_[a] = 0;
    vlocked[a] = vlocked[b] = 1;
    for (int v : ra) vlocked[v] = 1;
    return true;
  }

  // Incircle test in the mean metric of the quad (p, q, c, d); c is opposite
  // to pq in the counterclockwise triangle (p, q, c).
  bool should_flip(int p, int q, int c, int d) const {
    const Metric lm{(logm_[p].m11 + logm_[q].m11 + logm_[c].m11 + logm_[d].m11) / 4.0,
                    (logm_[p].m12 + logm_[q].m12 + logm_[c].m12 + logm_[d].m12) / 4.0,
                    (logm_[p].m22 + logm_[q].m22 + logm_[c].m22 + logm_[d].m22) / 4.0};
    const Eigen::Matrix2d m = metric_exp(lm).matrix();
    const Eigen::Matrix2d l = Eigen::LLT<Eigen::Matrix2d>(m).matrixU();  // |U x|^2 = x^T M x
    const Point o = pos_[p];
    const Point P = Point::Zero(), Q = l * (pos_[q] - o), C = l * (pos_[c] - o), D = l * (pos_[d] - o);
    auto row = [&](const Point& x) { return Eigen::Vector3d(x.x() - D.x(), x.y() - D.y(), (x - D).squaredNorm()); };
    Eigen::Matrix3d mat;
    mat.row(0) = row(P);
    mat.row(1) = row(Q);
    mat.row(2) = row(C);
    const double det = mat.determinant();
    const double s = std::max({(Q - P).squaredNorm(), (C - P).squaredNorm(), (D - P).squaredNorm()});
    return det > 1e-10 * s * s;
  }

  const MetricField& field_;
  const RemeshConfig& cfg_;
  std::vector<Point> pos_;
  std::vector<Metric> logm_;
  std::vector<VertexInfo> info_;
  std::vector<char> vertex_alive_;
  std::vector<std::array<int, 3>> tris_;
  std::vector<char> alive_;
  std::unordered_map<Key, int> boundary_;
  double scale_ = 1.0;

  std::vector<std::vector<int>> vtris_;
  std::unordered_map<Key, std::vector<int>> etris_;
};

}  // namespace

Triangulation remesh(const Triangulation& mesh, const MetricField& field, const RemeshConfig& config,
                     RemeshStats* stats) {
  config.validate();
  if (config.backend != RemeshBackend::builtin) throw RemeshError("remesh() runs the builtin backend only");
  WorkMesh w(mesh, field, config);
  RemeshStats st;
  for (int pass = 0; pass < config.max_passes; ++pass) {
    st.passes = pass + 1;
    int changed = 0;
    int s = w.split_sweep();
    st.splits += s;
    changed += s;
    for (int k = 0; k < 3; ++k) {
      const int f = w.flip_sweep();
      st.flips += f;
      if (f == 0) break;
    }
    const int c = w.collapse_sweep();
    st.collapses += c;
    changed += c;
    for (int k = 0; k < 3; ++k) {
      const int f = w.flip_sweep();
      st.flips += f;
      if (f == 0) break;
    }
    for (int k = 0; k < config.smoothing_iterations; ++k) st.moves += w.smooth_sweep();
    st.flips += w.flip_sweep();
    st.out_of_band = w.out_of_band();
    if (changed == 0 || (st.out_of_band < 0.01 && pass > 0)) break;
  }
  if (stats) *stats = st;
  return w.finish();
}

std::vector<double> edge_metric_lengths(const Triangulation& mesh, const MetricField& field) {
  std::vector<double> out;
  out.reserve(mesh.num_edges());
  const double scale = 1.0 / std::sqrt(3.0);
  for (const auto& e : mesh.edges())
    out.push_back(scale * riemannian_edge_length(field, mesh.vertex(e.v[0]), mesh.vertex(e.v[1])));
  return out;
}

void export_external(const Triangulation& mesh, const MetricField& field, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_mesh(mesh, dir / "input.mesh");
  write_metric(field, dir / "input.sol");
}

Triangulation import_external(const std::filesystem::path& dir) {
  const auto out = dir / "output.mesh";
  const auto in = dir / "input.mesh";
  if (std::filesystem::exists(out)) return read_mesh(out);
  if (std::filesystem::exists(in)) return read_mesh(in);
  throw RemeshError("no mesh found in " + dir.string());
}

}  // namespace dpg
