#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spdekit/areal.hpp"
#include "spdekit/gmrf.hpp"
#include "spdekit/inference.hpp"
#include "spdekit/mesh.hpp"

namespace spdekit::io {

using Json = nlohmann::json;

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

/// Shortest round-trip decimal representation, independent of the locale.
std::string format_double(double v);

/// FNV-1a 64-bit digest as 16 hex digits.
std::string content_digest(std::string_view bytes);

// Mesh JSON: {"vertices": [[x,y],...], "triangles": [[i,j,k],...], "boundary_loops": [[...]]}.
Json mesh_to_json(const Mesh& mesh);
/// Validates the result (validate_mesh) and reports the offending field.
Mesh mesh_from_json(const Json& j);
Json quality_to_json(const MeshQuality& q);
Json config_to_json(const MeshConfig& c);
MeshConfig config_from_json(const Json& j, MeshConfig defaults = {});

Json graph_to_json(const AdjacencyGraph& g);
AdjacencyGraph graph_from_json(const Json& j);

std::vector<Point2> points_from_json(const Json& j, const std::string& field);

/// CSV with a header row. Columns are matched by name.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  bool has(std::string_view name) const;
  const std::vector<double>& column(std::string_view name) const;
};

Table parse_csv(std::string_view text);
Table read_csv(const std::string& path);
std::string format_csv(const std::vector<std::string>& header, const Eigen::MatrixXd& rows);

/// Points from a table with columns x,y (and optionally value).
std::vector<Point2> table_points(const Table& t);

/// Writes Q as MatrixMarket and, when the model carries constraints, a null
/// space, a mean or notes, a sidecar `<path>.constraints.json`.
void write_precision_model(const std::string& path, const PrecisionModel& model);
PrecisionModel read_precision_model(const std::string& path);
Json model_sidecar(const PrecisionModel& model);

Json fit_to_json(const FitResult& fit);

/// Run manifest: the command, resolved parameters, and digests of every input
/// and output file. Contains no timestamps or host details, so identical runs
/// produce identical manifests.
class RunManifest {
 public:
  explicit RunManifest(std::string command);
  void parameter(const std::string& name, Json value);
  void input(const std::string& role, const std::string& path);
  void output(const std::string& role, const std::string& path);
  void seed(std::uint64_t s);
  Json to_json() const;
  void write(const std::string& path) const;

 private:
  Json doc_;
};

}  // namespace spdekit::io
