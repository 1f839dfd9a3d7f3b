#include <iostream>
#include <memory>

#include "cli.hpp"
#include "spdekit/error.hpp"

namespace spdekit::cli {
namespace {

struct MeshBuildArgs {
  std::string points, boundary, output, manifest;
  double max_edge = 0, max_edge_outer = 0, extend = -1, range_hint = 0, min_angle = 21.0;
};

void run_build(const MeshBuildArgs& a) {
  const io::Table t = io::read_csv(a.points);
  const std::vector<Point2> pts = io::table_points(t);
  std::optional<Polygon> boundary;
  if (!a.boundary.empty()) boundary = io::table_points(io::read_csv(a.boundary));

  MeshConfig cfg = a.range_hint > 0 ? MeshConfig::from_range_hint(a.range_hint) : MeshConfig{};
  if (a.range_hint <= 0) cfg.extension_distance = 0.0;
  if (a.max_edge > 0) {
    cfg.max_edge_inner = a.max_edge;
    if (a.range_hint <= 0) cfg.max_edge_outer = 2.0 * a.max_edge;
  }
  if (a.max_edge_outer > 0) cfg.max_edge_outer = a.max_edge_outer;
  if (a.extend >= 0) cfg.extension_distance = a.extend;
  cfg.min_angle = a.min_angle;
  require(a.max_edge > 0 || a.range_hint > 0, ErrorKind::InvalidArgument, "give --max-edge or --range-hint");
  cfg.validate();

  const Mesh mesh = build_mesh(pts, boundary, cfg);
  io::write_text_file(a.output, io::mesh_to_json(mesh).dump() + "\n");

  io::RunManifest m("mesh build");
  m.parameter("config", io::config_to_json(cfg));
  m.input("points", a.points);
  if (!a.boundary.empty()) m.input("boundary", a.boundary);
  m.output("mesh", a.output);
  m.parameter("quality", io::quality_to_json(mesh_quality(mesh)));
  m.write(manifest_path(a.output, a.manifest));
}

}  // namespace

void register_mesh(CLI::App& app) {
  auto* mesh = app.add_subcommand("mesh", "Build or inspect triangular meshes");
  mesh->require_subcommand(1);

  auto args = std::make_shared<MeshBuildArgs>();
  auto* build = mesh->add_subcommand("build", "Refined Delaunay mesh over data locations");
  build->add_option("--points", args->points, "CSV with columns x,y")->required();
  build->add_option("--boundary", args->boundary, "CSV polygon (x,y) enclosing the points");
  build->add_option("--max-edge", args->max_edge, "Largest edge in the inner region");
  build->add_option("--max-edge-outer", args->max_edge_outer, "Largest edge in the extension ring");
  build->add_option("--extend", args->extend, "Extension distance beyond the hull");
  build->add_option("--range-hint", args->range_hint, "Derive edges and extension from a spatial range");
  build->add_option("--min-angle", args->min_angle, "Minimum triangle angle in degrees");
  build->add_option("-o,--output", args->output, "Mesh JSON")->required();
  build->add_option("--manifest", args->manifest, "Run-manifest path");
  build->callback([args] { run_build(*args); });

  auto path = std::make_shared<std::string>();
  auto* info = mesh->add_subcommand("info", "Print mesh quality statistics as JSON");
  info->add_option("--mesh", *path, "Mesh JSON")->required();
  info->callback([path] {
    const Mesh m = load_mesh(*path);
    std::cout << io::quality_to_json(mesh_quality(m)).dump(2) << std::endl;
  });
}

}  // namespace spdekit::cli
