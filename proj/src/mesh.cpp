#include "dpg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace dpg {

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

Triangulation::Triangulation(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles,
                             std::vector<BoundarySegment> boundary)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), boundary_(std::move(boundary)) {
  build();
}

void Triangulation::build() {
  const int nv = num_vertices();
  const double diag = bbox_diagonal();
  const double min_area = 1e-14 * diag * diag;

  areas_.resize(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      if (triangles_[t][k] < 0 || triangles_[t][k] >= nv) {
        throw MeshError("triangle " + std::to_string(t) + " references vertex out of range");
      }
    }
    const auto c = corners(static_cast<int>(t));
    areas_[t] = signed_area(c[0], c[1], c[2]);
    if (areas_[t] <= min_area) {
      throw MeshError("triangle " + std::to_string(t) + " is degenerate or clockwise");
    }
  }

  std::map<std::pair<int, int>, int> lookup;
  edges_.clear();
  tri_edges_.assign(triangles_.size(), {-1, -1, -1});
  tri_signs_.assign(triangles_.size(), {0, 0, 0});
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      int a = triangles_[t][(k + 1) % 3];
      int b = triangles_[t][(k + 2) % 3];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = lookup.try_emplace({key.first, key.second}, static_cast<int>(edges_.size()));
      if (inserted) {
        Edge e;
        e.v = {key.first, key.second};
        e.tri = {static_cast<int>(t), -1};
        e.local = {k, -1};
        const Point tangent = vertices_[e.v[1]] - vertices_[e.v[0]];
        e.length = tangent.norm();
        e.normal = Point(-tangent.y(), tangent.x()) / e.length;
        edges_.push_back(e);
      } else {
        Edge& e = edges_[it->second];
        if (e.tri[1] >= 0) {
          throw MeshError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                          ") shared by more than two triangles");
        }
        e.tri[1] = static_cast<int>(t);
        e.local[1] = k;
      }
      tri_edges_[t][k] = it->second;
      // Outward normal of a ccw triangle along a->b is the tangent rotated by -90.
      const Point tangent = vertices_[b] - vertices_[a];
      const Point outward(tangent.y(), -tangent.x());
      tri_signs_[t][k] = outward.dot(edges_[it->second].normal) > 0.0 ? 1 : -1;
    }
  }

  for (const auto& seg : boundary_) {
    const auto key = std::minmax(seg.v[0], seg.v[1]);
    auto it = lookup.find({key.first, key.second});
    if (it == lookup.end()) {
      throw MeshError("boundary segment (" + std::to_string(seg.v[0]) + "," + std::to_string(seg.v[1]) +
                      ") is not an edge of the triangulation");
    }
    if (!edges_[it->second].is_boundary()) {
      throw MeshError("boundary segment on an interior edge");
    }
    edges_[it->second].tag = seg.tag;
  }
  for (const auto& e : edges_) {
    if (e.is_boundary() && e.tag == 0) {
      throw MeshError("boundary edge (" + std::to_string(e.v[0]) + "," + std::to_string(e.v[1]) +
                      ") has no boundary tag");
    }
  }
}

int Triangulation::num_boundary_edges() const {
  return static_cast<int>(std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return e.is_boundary(); }));
}

std::array<Point, 3> Triangulation::corners(int t) const {
  const auto& tri = triangles_[t];
  return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
}

Point Triangulation::centroid(int t) const {
  const auto c = corners(t);
  return (c[0] + c[1] + c[2]) / 3.0;
}

double Triangulation::total_area() const {
  double s = 0.0;
  for (double a : areas_) s += a;
  return s;
}

double Triangulation::bbox_diagonal() const {
  if (vertices_.empty()) return 0.0;
  Point lo = vertices_.front(), hi = vertices_.front();
  for (const auto& p : vertices_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

std::vector<int> Triangulation::edge_neighbors(int t) const {
  std::vector<int> out;
  for (int k = 0; k < 3; ++k) {
    const Edge& e = edges_[tri_edges_[t][k]];
    if (e.is_boundary()) continue;
    out.push_back(e.tri[0] == t ? e.tri[1] : e.tri[0]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<int>> Triangulation::vertex_triangles() const {
  std::vector<std::vector<int>> out(vertices_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (int v : triangles_[t]) out[v].push_back(static_cast<int>(t));
  }
  return out;
}

std::vector<int> Triangulation::vertex_neighbors(int t) const {
  // Linear scan keeps this free of cached state; only used on small patches.
  std::vector<int> out;
  const auto& tri = triangles_[t];
  for (std::size_t s = 0; s < triangles_.size(); ++s) {
    if (static_cast<int>(s) == t) continue;
    for (int v : triangles_[s]) {
      if (v == tri[0] || v == tri[1] || v == tri[2]) {
        out.push_back(static_cast<int>(s));
        break;
      }
    }
  }
  return out;
}

Triangulation structured_rectangle(int nx, int ny, double x0, double x1, double y0, double y1) {
  if (nx < 1 || ny < 1) throw MeshError("structured_rectangle needs at least one cell per direction");
  std::vector<Point> verts;
  verts.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      verts.emplace_back(x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny);
    }
  }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::array<int, 3>> tris;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  std::vector<BoundarySegment> bnd;
  for (int i = 0; i < nx; ++i) bnd.push_back({{id(i, 0), id(i + 1, 0)}, 1});
  for (int j = 0; j < ny; ++j) bnd.push_back({{id(nx, j), id(nx, j + 1)}, 2});
  for (int i = nx; i > 0; --i) bnd.push_back({{id(i, ny), id(i - 1, ny)}, 3});
  for (int j = ny; j > 0; --j) bnd.push_back({{id(0, j), id(0, j - 1)}, 4});
  return Triangulation(std::move(verts), std::move(tris), std::move(bnd));
}

Triangulation structured_lshape(int n) {
  if (n < 1) throw MeshError("structured_lshape needs n >= 1");
  // Grid of (2n+1)^2 points over [-1,1]^2 with the lower-right quadrant removed.
  const int m = 2 * n;
  std::vector<int> index((m + 1) * (m + 1), -1);
  std::vector<Point> verts;
  auto inside = [n](int i, int j) { return !(i > n && j < n); };
  for (int j = 0; j <= m; ++j) {
    for (int i = 0; i <= m; ++i) {
      if (!inside(i, j)) continue;
      index[j * (m + 1) + i] = static_cast<int>(verts.size());
      verts.emplace_back(-1.0 + 2.0 * i / m, -1.0 + 2.0 * j / m);
    }
  }
  auto id = [&](int i, int j) { return index[j * (m + 1) + i]; };
  std::vector<std::array<int, 3>> tris;
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      if (i >= n && j < n) continue;
      // Diagonals point away from the re-entrant corner so that it is shared
      // by as many triangles as possible.
      const bool flip = (i < n) == (j < n);
      if (!flip) {
        tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
        tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      } else {
        tris.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
        tris.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
      }
    }
  }
  std::vector<BoundarySegment> bnd;
  for (int i = 0; i < n; ++i) bnd.push_back({{id(i, 0), id(i + 1, 0)}, 1});        // y = -1
  for (int j = 0; j < n; ++j) bnd.push_back({{id(n, j), id(n, j + 1)}, 2});        // x = 0, lower
  for (int i = n; i < m; ++i) bnd.push_back({{id(i, n), id(i + 1, n)}, 3});        // y = 0, right
  for (int j = n; j < m; ++j) bnd.push_back({{id(m, j), id(m, j + 1)}, 4});        // x = 1
  for (int i = m; i > 0; --i) bnd.push_back({{id(i, m), id(i - 1, m)}, 5});        // y = 1
  for (int j = m; j > 0; --j) bnd.push_back({{id(0, j), id(0, j - 1)}, 6});        // x = -1
  return Triangulation(std::move(verts), std::move(tris), std::move(bnd));
}

namespace {

class MeditReader {
 public:
  explicit MeditReader(std::istream& in) : in_(in) {}

  bool next(std::string& token) {
    while (true) {
      if (line_stream_ >> token) {
        if (!token.empty() && token[0] == '#') {
          line_stream_.setstate(std::ios::eofbit);
          continue;
        }
        return true;
      }
      std::string line;
      if (!std::getline(in_, line)) return false;
      ++line_;
      line_stream_.clear();
      line_stream_.str(line);
    }
  }

  template <typename T>
  T read(const char* what) {
    std::string tok;
    if (!next(tok)) fail(std::string("unexpected end of file while reading ") + what);
    std::istringstream ss(tok);
    T value{};
    if (!(ss >> value) || !ss.eof()) fail(std::string("malformed ") + what + " '" + tok + "'");
    return value;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw MeshError("line " + std::to_string(line_) + ": " + msg);
  }

  int line() const { return line_; }

 private:
  std::istream& in_;
  std::istringstream line_stream_;
  int line_ = 0;
};

}  // namespace

Triangulation read_mesh(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw MeshError("cannot open " + path.string());
  MeditReader r(file);
  std::vector<Point> verts;
  std::vector<std::array<int, 3>> tris;
  std::vector<BoundarySegment> bnd;
  bool have_version = false, have_dim = false, have_end = false;
  std::string key;
  while (r.next(key)) {
    if (key == "MeshVersionFormatted") {
      r.read<int>("version");
      have_version = true;
    } else if (key == "Dimension") {
      if (r.read<int>("dimension") != 2) r.fail("only Dimension 2 is supported");
      have_dim = true;
    } else if (key == "Vertices") {
      const int n = r.read<int>("vertex count");
      if (n < 0) r.fail("negative vertex count");
      verts.resize(n);
      for (int i = 0; i < n; ++i) {
        verts[i].x() = r.read<double>("x coordinate");
        verts[i].y() = r.read<double>("y coordinate");
        r.read<int>("vertex reference");
      }
    } else if (key == "Edges") {
      const int n = r.read<int>("edge count");
      for (int i = 0; i < n; ++i) {
        BoundarySegment s;
        for (int k = 0; k < 2; ++k) {
          const int v = r.read<int>("edge vertex");
          if (v < 1 || v > static_cast<int>(verts.size())) r.fail("edge vertex index out of range");
          s.v[k] = v - 1;
        }
        s.tag = r.read<int>("edge reference");
        if (s.tag <= 0) r.fail("boundary edge reference must be positive");
        bnd.push_back(s);
      }
    } else if (key == "Triangles") {
      const int n = r.read<int>("triangle count");
      for (int i = 0; i < n; ++i) {
        std::array<int, 3> t{};
        for (int k = 0; k < 3; ++k) {
          const int v = r.read<int>("triangle vertex");
          if (v < 1 || v > static_cast<int>(verts.size())) r.fail("triangle vertex index out of range");
          t[k] = v - 1;
        }
        r.read<int>("triangle reference");
        tris.push_back(t);
      }
    } else if (key == "End") {
      have_end = true;
      break;
    } else {
      r.fail("unknown section '" + key + "'");
    }
  }
  if (!have_version || !have_dim) throw MeshError(path.string() + ": missing MeshVersionFormatted or Dimension");
  if (!have_end) throw MeshError(path.string() + ": missing End");
  return Triangulation(std::move(verts), std::move(tris), std::move(bnd));
}

void write_mesh(const Triangulation& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write " + path.string());
  out << std::setprecision(17);
  out << "MeshVersionFormatted 2\n\nDimension 2\n\nVertices\n" << mesh.num_vertices() << "\n";
  for (const auto& p : mesh.vertices()) out << p.x() << " " << p.y() << " 0\n";
  out << "\nEdges\n" << mesh.boundary().size() << "\n";
  for (const auto& s : mesh.boundary()) out << s.v[0] + 1 << " " << s.v[1] + 1 << " " << s.tag << "\n";
  out << "\nTriangles\n" << mesh.num_triangles() << "\n";
  for (const auto& t : mesh.triangles()) out << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << " 0\n";
  out << "\nEnd\n";
}

}  // namespace dpg

namespace dpg {

Triangulation refine_uniform(const Triangulation& mesh) {
  std::vector<Point> verts = mesh.vertices();
  std::vector<int> mid(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto& ed = mesh.edges()[e];
    mid[e] = static_cast<int>(verts.size());
    verts.push_back(0.5 * (mesh.vertex(ed.v[0]) + mesh.vertex(ed.v[1])));
  }
  std::vector<std::array<int, 3>> tris;
  tris.reserve(4 * mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tr = mesh.triangles()[t];
    // Midpoint of the edge opposite to local vertex k.
    std::array<int, 3> m{};
    for (int k = 0; k < 3; ++k) {
      const int a = tr[(k + 1) % 3], b = tr[(k + 2) % 3];
      for (int j = 0; j < 3; ++j) {
        const auto& ed = mesh.edges()[mesh.triangle_edge(t, j)];
        if ((ed.v[0] == a && ed.v[1] == b) || (ed.v[0] == b && ed.v[1] == a)) m[k] = mid[mesh.triangle_edge(t, j)];
      }
    }
    tris.push_back({tr[0], m[2], m[1]});
    tris.push_back({m[2], tr[1], m[0]});
    tris.push_back({m[1], m[0], tr[2]});
    tris.push_back({m[0], m[1], m[2]});
  }
  std::vector<BoundarySegment> bnd;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto& ed = mesh.edges()[e];
    if (!ed.is_boundary()) continue;
    bnd.push_back({{ed.v[0], mid[e]}, ed.tag});
    bnd.push_back({{mid[e], ed.v[1]}, ed.tag});
  }
  return Triangulation(std::move(verts), std::move(tris), std::move(bnd));
}

}  // namespace dpg
