#pragma once

#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "dpg/mesh.hpp"
#include "dpg/metric.hpp"

namespace dpg {

class RemeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RemeshBackend { builtin, external };

struct RemeshConfig {
  double length_low = 1.0 / std::sqrt(2.0);
  double length_high = std::sqrt(2.0);
  int max_passes = 40;
  double quality_floor = 0.1;     // metric-space shape quality guard for collapses
  int smoothing_iterations = 2;
  int count_corrections = 2;      // metric rescalings to hit the requested element count
  double count_tolerance = 0.05;  // relative count mismatch accepted without rescaling
  RemeshBackend backend = RemeshBackend::builtin;

  void validate() const;
};

struct RemeshStats {
  int passes = 0;
  int splits = 0, collapses = 0, flips = 0, moves = 0;
  double out_of_band = 0.0;  // fraction of edges outside [length_low, length_high]
};

/// Local-operation remesher: split long edges at their metric midpoint,
/// collapse short ones, flip towards the metric Delaunay configuration and
/// smooth vertices towards unit metric distance from their neighbours. The
/// metric of new or moved vertices is read from `field` (background mesh).
Triangulation remesh(const Triangulation& mesh, const MetricField& field, const RemeshConfig& config = {},
                     RemeshStats* stats = nullptr);

/// Lengths below are taken in M / 3: an edge of a metric-unit triangle
/// (e^T M e = 3) has length 1.
///
/// Metric lengths of all edges of `mesh` under `field`.
std::vector<double> edge_metric_lengths(const Triangulation& mesh, const MetricField& field);

/// Writes `<dir>/input.mesh` and `<dir>/input.sol` for an external generator.
void export_external(const Triangulation& mesh, const MetricField& field, const std::filesystem::path& dir);
/// Reads `<dir>/output.mesh`, or `<dir>/input.mesh` when the generator has not run.
Triangulation import_external(const std::filesystem::path& dir);

}  // namespace dpg
