#include "dpg/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dpg {

const std::vector<std::string>& study_columns() {
  static const std::vector<std::string> cols{"cycle", "N_e",      "ndof",    "L2_u",  "L2_sigma", "energy",
                                             "E_star", "J_error", "DWR",     "h_min", "cond"};
  return cols;
}

namespace {

void cell(std::ostream& out, double v) {
  out << ',';
  if (std::isfinite(v)) out << v;
}

}  // namespace

std::string study_csv(const StudyRecord& record) {
  std::ostringstream out;
  out.precision(17);
  const auto& cols = study_columns();
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << '\n';
  for (const auto& r : record.rows) {
    out << r.cycle << ',' << r.elements << ',' << r.ndof;
    for (double v : {r.l2_u, r.l2_sigma, r.energy, r.predicted, r.target_error, r.dwr, r.h_min, r.condition})
      cell(out, v);
    out << '\n';
  }
  return out.str();
}

void write_study_csv(const std::filesystem::path& path, const StudyRecord& record) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << study_csv(record);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_vtk(const std::filesystem::path& path, const Triangulation& mesh, const FieldEvaluator* fields,
               const CellFields& cells) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  const int nt = mesh.num_triangles();
  out << "# vtk DataFile Version 4.2\ndpg adaptation output\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << 3 * nt << " double\n";
  for (int t = 0; t < nt; ++t)
    for (const Point& p : mesh.corners(t)) out << p.x() << ' ' << p.y() << " 0\n";
  out << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (int t = 0; t < nt; ++t) out << "3 " << 3 * t << ' ' << 3 * t + 1 << ' ' << 3 * t + 2 << '\n';
  out << "CELL_TYPES " << nt << '\n';
  for (int t = 0; t < nt; ++t) out << "5\n";

  if (fields) {
    out << "POINT_DATA " << 3 * nt << "\nSCALARS u double 1\nLOOKUP_TABLE default\n";
    for (int t = 0; t < nt; ++t) {
      const auto c = mesh.corners(t);
      Eigen::MatrixXd pts(2, 3);
      for (int k = 0; k < 3; ++k) pts.col(k) = c[k];
      const Eigen::VectorXd u = fields->u(t, pts);
      for (int k = 0; k < 3; ++k) out << u[k] << '\n';
    }
  }
  const std::vector<std::pair<const char*, const std::vector<double>*>> arrays{
      {"eta", &cells.eta}, {"d_star", &cells.density}, {"beta_M", &cells.beta}};
  bool header = false;
  for (const auto& [name, data] : arrays) {
    if (data->empty()) continue;
    if (static_cast<int>(data->size()) != nt) throw std::invalid_argument(std::string("write_vtk: bad length of ") + name);
    if (!header) out << "CELL_DATA " << nt << '\n';
    header = true;
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : *data) out << v << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

VtkSummary parse_vtk(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  auto fail = [&](const std::string& why) { throw std::runtime_error(path.string() + ": " + why); };
  VtkSummary s;
  std::string line;
  std::getline(in, line);
  const std::string magic = "# vtk DataFile Version ";
  if (line.rfind(magic, 0) != 0) fail("missing VTK header");
  s.version = line.substr(magic.size());
  std::getline(in, line);  // title
  std::getline(in, line);
  if (line != "ASCII") fail("only ASCII files are supported");
  std::string word;
  in >> word >> line;
  if (word != "DATASET" || line != "UNSTRUCTURED_GRID") fail("expected DATASET UNSTRUCTURED_GRID");

  int section_size = 0;
  std::vector<std::string>* arrays = nullptr;
  while (in >> word) {
    if (word == "POINTS") {
      in >> s.points >> word;
      for (int k = 0; k < 3 * s.points; ++k) {
        double v;
        if (!(in >> v) || !std::isfinite(v)) fail("bad point coordinate");
      }
    } else if (word == "CELLS") {
      int size = 0;
      in >> s.cells >> size;
      int read = 0;
      for (int c = 0; c < s.cells; ++c) {
        int n;
        if (!(in >> n)) fail("truncated CELLS");
        read += n + 1;
        for (int k = 0; k < n; ++k) {
          int id;
          if (!(in >> id) || id < 0 || id >= s.points) fail("cell index out of range");
        }
      }
      if (read != size) fail("CELLS size mismatch");
    } else if (word == "CELL_TYPES") {
      int n;
      in >> n;
      if (n != s.cells) fail("CELL_TYPES count mismatch");
      for (int c = 0; c < n; ++c) {
        int type;
        if (!(in >> type) || type != 5) fail("unexpected cell type");
      }
    } else if (word == "POINT_DATA" || word == "CELL_DATA") {
      in >> section_size;
      const bool point = word == "POINT_DATA";
      if (section_size != (point ? s.points : s.cells)) fail(word + " count mismatch");
      arrays = point ? &s.point_arrays : &s.cell_arrays;
    } else if (word == "SCALARS") {
      if (!arrays) fail("SCALARS outside a data section");
      std::string name, type, lookup, table;
      in >> name >> type;
      std::getline(in, line);  // optional component count
      in >> lookup >> table;
      if (lookup != "LOOKUP_TABLE") fail("missing LOOKUP_TABLE");
      for (int k = 0; k < section_size; ++k) {
        double v;
        if (!(in >> v)) fail("truncated array " + name);
      }
      arrays->push_back(name);
    } else {
      fail("unexpected keyword " + word);
    }
  }
  return s;
}

}  // namespace dpg
