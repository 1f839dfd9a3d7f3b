#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>

#include "cli.hpp"
#include "spdekit/error.hpp"
#include "spdekit/fem.hpp"
#include "spdekit/stencil.hpp"

namespace spdekit::cli {
namespace {

struct AssembleArgs {
  std::string output, manifest;
  // spde / barrier
  std::string mesh;
  double range = 0, sigma = 1.0;
  int alpha = 2;
  std::vector<double> aniso;
  std::string barrier_polygon, barrier_triangles;
  double barrier_fraction = 0.01;
  // areal
  std::string graph;
  bool zero_based = false, scaled = false;
  double tau = 1.0, w = 0.5;
  // kron
  std::string temporal = "rw1", spatial_q;
  Index T = 2;
  double rho = 0.0;
  // grid
  Index rows = 3, cols = 3;
  double h = 1.0, kappa = 1.0;
};

void finish(const AssembleArgs& a, const std::string& kind, const PrecisionModel& model, io::RunManifest& m) {
  io::write_precision_model(a.output, model);
  m.output("precision", a.output);
  if (std::ifstream(a.output + ".constraints.json").good()) m.output("constraints", a.output + ".constraints.json");
  m.parameter("kind", kind);
  m.parameter("n", model.size());
  m.parameter("nnz", model.Q.nnz());
  m.write(manifest_path(a.output, a.manifest));
}

std::vector<Index> barrier_set(const Mesh& mesh, const AssembleArgs& a) {
  std::vector<Index> tris;
  if (!a.barrier_triangles.empty()) {
    const io::Table t = io::read_csv(a.barrier_triangles);
    for (double v : t.column("triangle")) {
      require(v == std::floor(v) && v >= 0 && v < mesh.n_triangles(), ErrorKind::IndexOutOfRange,
              "barrier triangle index out of range");
      tris.push_back(static_cast<Index>(v));
    }
  }
  if (!a.barrier_polygon.empty()) {
    const Polygon poly = io::table_points(io::read_csv(a.barrier_polygon));
    require(poly.size() >= 3, ErrorKind::DegeneratePolygon, "barrier polygon needs at least 3 vertices");
    for (Index t = 0; t < mesh.n_triangles(); ++t)
      if (geometry::point_in_polygon(mesh.centroid(t), poly)) tris.push_back(t);
  }
  std::sort(tris.begin(), tris.end());
  tris.erase(std::unique(tris.begin(), tris.end()), tris.end());
  return tris;
}

void run(const std::string& kind, const AssembleArgs& a) {
  io::RunManifest m("assemble " + kind);
  if (kind == "spde") {
    const Mesh mesh = load_mesh(a.mesh);
    require(a.alpha >= 2 && a.alpha <= 4, ErrorKind::InvalidArgument, "--alpha must be 2, 3 or 4");
    const SpdeParams p = to_spde(MaternParams{a.range, a.sigma, a.alpha - 1.0});
    std::optional<Anisotropy> H;
    if (!a.aniso.empty()) {
      require(a.aniso.size() == 3, ErrorKind::InvalidArgument, "--aniso takes h11,h12,h22");
      H = Anisotropy{a.aniso[0], a.aniso[1], a.aniso[2]};
    }
    PrecisionModel model = assemble_precision(mesh, p, nullptr, H);
    m.input("mesh", a.mesh);
    m.parameter("range", a.range);
    m.parameter("sigma", a.sigma);
    m.parameter("alpha", a.alpha);
    m.parameter("log_kappa", p.log_kappa);
    m.parameter("log_tau", p.log_tau);
    if (H) m.parameter("anisotropy", a.aniso);
    finish(a, kind, model, m);
  } else if (kind == "barrier") {
    const Mesh mesh = load_mesh(a.mesh);
    BarrierSpec spec;
    spec.range_normal = a.range;
    spec.range_fraction_in_barrier = a.barrier_fraction;
    spec.barrier_triangles = barrier_set(mesh, a);
    PrecisionModel model = assemble_barrier_precision(mesh, spec, a.sigma);
    m.input("mesh", a.mesh);
    if (!a.barrier_polygon.empty()) m.input("barrier_polygon", a.barrier_polygon);
    if (!a.barrier_triangles.empty()) m.input("barrier_triangles", a.barrier_triangles);
    m.parameter("range", a.range);
    m.parameter("sigma", a.sigma);
    m.parameter("range_fraction_in_barrier", a.barrier_fraction);
    m.parameter("barrier_triangle_count", spec.barrier_triangles.size());
    finish(a, kind, model, m);
  } else if (kind == "besag" || kind == "bym2") {
    const AdjacencyGraph g = load_graph(a.graph, a.zero_based);
    m.input("graph", a.graph);
    PrecisionModel model;
    if (kind == "besag") {
      model = a.scaled ? scale_besag(besag_precision(g)) : besag_precision(g);
      m.parameter("scaled", a.scaled);
    } else {
      model = bym2_precision(g, a.tau, a.w);
      m.parameter("tau", a.tau);
      m.parameter("w", a.w);
    }
    finish(a, kind, model, m);
  } else if (kind == "kron") {
    TemporalModel tm{parse_temporal_kind(a.temporal), a.T, a.rho};
    const PrecisionModel qt = temporal_precision(tm);
    PrecisionModel qs;
    if (!a.graph.empty()) {
      qs = scale_besag(besag_precision(load_graph(a.graph, a.zero_based)));
      m.input("graph", a.graph);
    } else {
      require(!a.spatial_q.empty(), ErrorKind::InvalidArgument, "kron needs --graph or --spatial-Q");
      qs = io::read_precision_model(a.spatial_q);
      m.input("spatial_precision", a.spatial_q);
    }
    m.parameter("temporal", a.temporal);
    m.parameter("T", a.T);
    m.parameter("rho", a.rho);
    finish(a, kind, kronecker_precision(qt, qs), m);
  } else {
    Grid2D grid{a.rows, a.cols, a.h, true};
    grid.validate();
    PrecisionModel model;
    model.Q = grid_precision(grid, a.kappa);
    model.label = "grid-stencil";
    m.parameter("rows", a.rows);
    m.parameter("cols", a.cols);
    m.parameter("h", a.h);
    m.parameter("kappa", a.kappa);
    finish(a, kind, model, m);
  }
}

}  // namespace

void register_assemble(CLI::App& app) {
  auto* cmd = app.add_subcommand("assemble", "Assemble a precision matrix (MatrixMarket plus constraint sidecar)");
  cmd->require_subcommand(1);
  auto add_common = [](CLI::App* sub, AssembleArgs& a) {
    sub->add_option("-o,--output", a.output, "MatrixMarket output")->required();
    sub->add_option("--manifest", a.manifest, "Run-manifest path");
  };
  auto make = [&](const std::string& kind, const std::string& help, auto&& options) {
    auto a = std::make_shared<AssembleArgs>();
    auto* sub = cmd->add_subcommand(kind, help);
    add_common(sub, *a);
    options(sub, *a);
    sub->callback([a, kind] { run(kind, *a); });
  };
  make("spde", "Stationary SPDE precision on a mesh", [](CLI::App* s, AssembleArgs& a) {
    s->add_option("--mesh", a.mesh, "Mesh JSON")->required();
    s->add_option("--range", a.range, "Matern range")->required();
    s->add_option("--sigma", a.sigma, "Marginal standard deviation");
    s->add_option("--alpha", a.alpha, "SPDE order (2, 3 or 4)");
    s->add_option("--aniso", a.aniso, "Anisotropy tensor h11,h12,h22")->delimiter(',');
  });
  make("barrier", "Barrier model precision", [](CLI::App* s, AssembleArgs& a) {
    s->add_option("--mesh", a.mesh, "Mesh JSON")->required();
    s->add_option("--range", a.range, "Range outside the barrier")->required();
    s->add_option("--sigma", a.sigma, "Marginal standard deviation");
    s->add_option("--barrier-polygon", a.barrier_polygon, "CSV polygon; triangles with centroid inside");
    s->add_option("--barrier-triangles", a.barrier_triangles, "CSV with a 'triangle' column");
    s->add_option("--barrier-fraction", a.barrier_fraction, "Range fraction inside the barrier");
  });
  make("besag", "Besag (intrinsic CAR) precision", [](CLI::App* s, AssembleArgs& a) {
    s->add_option("--graph", a.graph, "Graph file (ASCII or .json)")->required();
    s->add_flag("--zero-based", a.zero_based, "ASCII graph uses 0-based indices");
    s->add_flag("--scaled", a.scaled, "Scale to unit geometric-mean variance");
  });
  make("bym2", "BYM2 joint precision of (b, u*)", [](CLI::App* s, AssembleArgs& a) {
    s->add_option("--graph", a.graph, "Graph file (ASCII or .json)")->required();
    s->add_flag("--zero-based", a.zero_based, "ASCII graph uses 0-based indices");
    s->add_option("--tau", a.tau, "Precision");
    s->add_option("--w", a.w, "Structured fraction in [0, 1]");
  });
  make("kron", "Separable space-time precision", [](CLI::App* s, AssembleArgs& a) {
    s->add_option("--temporal", a.temporal, "iid, ar1, rw1 or rw2");
    s->add_option("--T", a.T, "Number of time points");
    s->add_option("--rho", a.rho, "ar1 correlation");
    s->add_option("--graph", a.graph, "Spatial graph (scaled Besag)");
    s->add_flag("--zero-based", a.zero_based, "ASCII graph uses 0-based indices");
    s->add_option("--spatial-Q", a.spatial_q, "Spatial precision (MatrixMarket)");
  });
  make("grid-stencil", "Regular-grid stencil precision", [](CLI::App* s, AssembleArgs& a) {
    s->add_option("--rows", a.rows, "Grid rows");
    s->add_option("--cols", a.cols, "Grid columns");
    s->add_option("--spacing", a.h, "Grid spacing h");
    s->add_option("--kappa", a.kappa, "kappa");
  });
}

}  // namespace spdekit::cli
