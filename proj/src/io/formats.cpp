#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spdekit/error.hpp"
#include "spdekit/io.hpp"

namespace spdekit::io {
namespace {

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

double parse_number(std::string_view field, std::size_t line_no) {
  const std::string t = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  require(ec == std::errc() && ptr == t.data() + t.size() && !t.empty(), ErrorKind::MalformedLine,
          "line " + std::to_string(line_no) + ": '" + t + "' is not a number");
  return v;
}

const Json& field(const Json& j, const char* name) {
  require(j.is_object() && j.contains(name), ErrorKind::InvalidArgument, std::string("missing field '") + name + "'");
  return j.at(name);
}

Index as_index(const Json& v, const std::string& where) {
  require(v.is_number_integer(), ErrorKind::InvalidArgument, where + ": expected an integer index");
  return static_cast<Index>(v.get<long long>());
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Json vector_json(const Eigen::VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::MatrixXd matrix_from_json(const Json& j, Index cols, const std::string& name) {
  require(j.is_array(), ErrorKind::InvalidArgument, name + ": expected an array of rows");
  Eigen::MatrixXd m(static_cast<Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    require(j[i].is_array() && static_cast<Index>(j[i].size()) == cols, ErrorKind::DimensionMismatch,
            name + "[" + std::to_string(i) + "]: expected " + std::to_string(cols) + " values");
    for (Index c = 0; c < cols; ++c) m(static_cast<Index>(i), c) = j[i][c].get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const Json& j, const std::string& name) {
  require(j.is_array(), ErrorKind::InvalidArgument, name + ": expected an array");
  Eigen::VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::InvalidArgument, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::InvalidArgument, "cannot open " + path + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string content_digest(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json mesh_to_json(const Mesh& mesh) {
  Json v = Json::array(), t = Json::array(), b = Json::array();
  for (const auto& p : mesh.vertices) v.push_back({p.x, p.y});
  for (const auto& tri : mesh.triangles) t.push_back({tri[0], tri[1], tri[2]});
  for (const auto& loop : mesh.boundary_loops) b.push_back(loop);
  return Json{{"vertices", v}, {"triangles", t}, {"boundary_loops", b}};
}

Mesh mesh_from_json(const Json& j) {
  Mesh m;
  m.vertices = points_from_json(j, "vertices");
  const Json& tris = field(j, "triangles");
  require(tris.is_array(), ErrorKind::InvalidArgument, "triangles: expected an array");
  for (std::size_t k = 0; k < tris.size(); ++k) {
    const std::string where = "triangles[" + std::to_string(k) + "]";
    require(tris[k].is_array() && tris[k].size() == 3, ErrorKind::InvalidArgument, where + ": expected 3 indices");
    TriangleIndices t{};
    for (int c = 0; c < 3; ++c) {
      t[c] = as_index(tris[k][c], where);
      require(t[c] >= 0 && t[c] < m.n_vertices(), ErrorKind::IndexOutOfRange, where + ": vertex index out of range");
    }
    m.triangles.push_back(t);
  }
  if (j.contains("boundary_loops")) {
    const Json& loops = j.at("boundary_loops");
    require(loops.is_array(), ErrorKind::InvalidArgument, "boundary_loops: expected an array");
    for (std::size_t k = 0; k < loops.size(); ++k) {
      std::vector<Index> loop;
      for (const auto& v : loops[k]) {
        const Index i = as_index(v, "boundary_loops[" + std::to_string(k) + "]");
        require(i >= 0 && i < m.n_vertices(), ErrorKind::IndexOutOfRange,
                "boundary_loops[" + std::to_string(k) + "]: vertex index out of range");
        loop.push_back(i);
      }
      m.boundary_loops.push_back(std::move(loop));
    }
  }
  validate_mesh(m);
  return m;
}

Json quality_to_json(const MeshQuality& q) {
  return Json{{"n_vertices", q.n_vertices},
              {"n_triangles", q.n_triangles},
              {"min_angle_deg", q.min_angle_deg},
              {"max_edge", q.max_edge},
              {"mean_edge", q.mean_edge},
              {"edge_histogram", {{"bin_edges", q.edge_bin_edges}, {"counts", q.edge_counts}}}};
}

Json config_to_json(const MeshConfig& c) {
  return Json{{"max_edge_inner", c.max_edge_inner},
              {"max_edge_outer", c.max_edge_outer},
              {"extension_distance", c.extension_distance},
              {"min_angle", c.min_angle}};
}

MeshConfig config_from_json(const Json& j, MeshConfig c) {
  require(j.is_object(), ErrorKind::InvalidArgument, "config: expected an object");
  auto read = [&](const char* name, double& dst) {
    if (!j.contains(name)) return;
    require(j.at(name).is_number(), ErrorKind::InvalidArgument, std::string("config.") + name + ": expected a number");
    dst = j.at(name).get<double>();
  };
  const bool outer_given = j.contains("max_edge_outer");
  read("max_edge_inner", c.max_edge_inner);
  read("max_edge_outer", c.max_edge_outer);
  read("extension_distance", c.extension_distance);
  read("min_angle", c.min_angle);
  if (!outer_given) c.max_edge_outer = std::max(c.max_edge_outer, c.max_edge_inner);
  c.validate();
  return c;
}

Json graph_to_json(const AdjacencyGraph& g) { return Json{{"n", g.n}, {"nb", g.nb}}; }

AdjacencyGraph graph_from_json(const Json& j) {
  AdjacencyGraph g;
  g.n = as_index(field(j, "n"), "n");
  const Json& nb = field(j, "nb");
  require(nb.is_array() && static_cast<Index>(nb.size()) == g.n, ErrorKind::DimensionMismatch,
          "nb: expected one neighbour list per region");
  for (std::size_t i = 0; i < nb.size(); ++i) {
    std::vector<Index> l;
    for (const auto& v : nb[i]) l.push_back(as_index(v, "nb[" + std::to_string(i) + "]"));
    std::sort(l.begin(), l.end());
    g.nb.push_back(std::move(l));
  }
  g.validate();
  return g;
}

std::vector<Point2> points_from_json(const Json& j, const std::string& name) {
  const Json& arr = field(j, name.c_str());
  require(arr.is_array(), ErrorKind::InvalidArgument, name + ": expected an array of [x, y]");
  std::vector<Point2> pts;
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const Json& p = arr[k];
    require(p.is_array() && p.size() == 2 && p[0].is_number() && p[1].is_number(), ErrorKind::InvalidArgument,
            name + "[" + std::to_string(k) + "]: expected [x, y]");
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
    require(std::isfinite(pts.back().x) && std::isfinite(pts.back().y), ErrorKind::InvalidArgument,
            name + "[" + std::to_string(k) + "]: coordinates must be finite");
  }
  return pts;
}

bool Table::has(std::string_view name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

const std::vector<double>& Table::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  require(it != header.end(), ErrorKind::InvalidArgument, "CSV has no column '" + std::string(name) + "'");
  return columns[static_cast<std::size_t>(it - header.begin())];
}

Table parse_csv(std::string_view text) {
  Table t;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (!have_header) {
      t.header = cells;
      t.columns.assign(cells.size(), {});
      have_header = true;
      continue;
    }
    require(cells.size() == t.header.size(), ErrorKind::MalformedLine,
            "line " + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) + " fields, got " +
                std::to_string(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) t.columns[c].push_back(parse_number(cells[c], line_no));
  }
  require(have_header, ErrorKind::MalformedLine, "CSV input is empty");
  return t;
}

Table read_csv(const std::string& path) { return parse_csv(read_text_file(path)); }

std::string format_csv(const std::vector<std::string>& header, const Eigen::MatrixXd& rows) {
  require(static_cast<Index>(header.size()) == rows.cols(), ErrorKind::DimensionMismatch,
          "CSV header and column count differ");
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  out += '\n';
  for (Index i = 0; i < rows.rows(); ++i) {
    for (Index c = 0; c < rows.cols(); ++c) {
      if (c) out += ',';
      out += format_double(rows(i, c));
    }
    out += '\n';
  }
  return out;
}

std::vector<Point2> table_points(const Table& t) {
  const auto& x = t.column("x");
  const auto& y = t.column("y");
  std::vector<Point2> pts(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) pts[i] = {x[i], y[i]};
  return pts;
}

Json model_sidecar(const PrecisionModel& model) {
  Json j{{"label", model.label}, {"n", model.size()}, {"notes", model.notes}};
  if (model.mean.size()) j["mean"] = vector_json(model.mean);
  if (model.constrained()) {
    j["constraints"] = matrix_json(model.constraints);
    j["constraint_values"] = vector_json(model.constraint_rhs());
  }
  if (model.intrinsic()) j["null_basis"] = matrix_json(model.null_basis.transpose());
  return j;
}

void write_precision_model(const std::string& path, const PrecisionModel& model) {
  write_matrix_market(path, model.Q);
  if (model.constrained() || model.intrinsic() || model.mean.size() || !model.notes.empty())
    write_text_file(path + ".constraints.json", model_sidecar(model).dump(2) + "\n");
}

PrecisionModel read_precision_model(const std::string& path) {
  PrecisionModel m;
  m.Q = read_matrix_market(path);
  require(m.Q.square(), ErrorKind::DimensionMismatch, path + ": precision matrix must be square");
  const std::string side = path + ".constraints.json";
  if (std::ifstream(side).good()) {
    Json j;
    try {
      j = Json::parse(read_text_file(side));
    } catch (const Json::exception& e) {
      fail(ErrorKind::MalformedLine, side + ": " + e.what());
    }
    const Index n = m.size();
    if (j.contains("label")) m.label = j["label"].get<std::string>();
    if (j.contains("notes")) m.notes = j["notes"].get<std::vector<std::string>>();
    if (j.contains("mean")) m.mean = vector_from_json(j["mean"], "mean");
    if (j.contains("constraints")) {
      m.constraints = matrix_from_json(j["constraints"], n, "constraints");
      m.constraint_values = j.contains("constraint_values") ? vector_from_json(j["constraint_values"], "constraint_values")
                                                            : Eigen::VectorXd::Zero(m.constraints.rows());
    }
    if (j.contains("null_basis")) m.null_basis = matrix_from_json(j["null_basis"], n, "null_basis").transpose();
  }
  m.validate();
  return m;
}

Json fit_to_json(const FitResult& fit) {
  Json points = Json::array();
  for (const auto& p : fit.points)
    points.push_back({{"theta", vector_json(p.theta)},
                      {"log_posterior", p.log_posterior},
                      {"weight", p.weight},
                      {"newton_iterations", p.newton_iterations}});
  return Json{{"strategy", fit.strategy},
              {"theta_names", fit.theta_names},
              {"theta_mode", vector_json(fit.theta_mode)},
              {"theta_hessian", matrix_json(fit.theta_hessian)},
              {"theta_grid", points},
              {"latent_mean", vector_json(fit.latent_mean)},
              {"latent_sd", vector_json(fit.latent_sd)},
              {"optimizer_evaluations", fit.optimizer_evaluations},
              {"seed", fit.seed},
              {"provenance", fit.provenance}};
}

}  // namespace spdekit::io
