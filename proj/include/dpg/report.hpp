#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dpg/adapt.hpp"
#include "dpg/mesh.hpp"
#include "dpg/solver.hpp"

namespace dpg {

/// CSV header names, in column order.
const std::vector<std::string>& study_columns();

/// One row per cycle; empty cells for values that were not computed.
void write_study_csv(const std::filesystem::path& path, const StudyRecord& record);
std::string study_csv(const StudyRecord& record);

/// Per-element fields written alongside u_h. Empty vectors are skipped.
struct CellFields {
  std::vector<double> eta;
  std::vector<double> density;
  std::vector<double> beta;
};

/// Legacy ASCII VTK 4.2 unstructured grid. Vertices are duplicated per
/// triangle so the discontinuous u_h is exact at the corners.
void write_vtk(const std::filesystem::path& path, const Triangulation& mesh, const FieldEvaluator* fields,
               const CellFields& cells);

struct VtkSummary {
  std::string version;
  int points = 0;
  int cells = 0;
  std::vector<std::string> point_arrays;
  std::vector<std::string> cell_arrays;
};

/// Structural check of a legacy ASCII unstructured-grid file: counts, cell
/// connectivity bounds, cell types and array lengths. Throws std::runtime_error.
VtkSummary parse_vtk(const std::filesystem::path& path);

}  // namespace dpg
