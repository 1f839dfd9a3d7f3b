#include <cmath>
#include <filesystem>
#include <iostream>
#include <memory>

#include "cli.hpp"
#include "spdekit/error.hpp"

namespace spdekit::cli {
namespace {

// Everything needed to rebuild the latent model; stored inside fit.json so
// that predict reconstructs exactly the fitted model.
struct ModelSpec {
  std::string model = "spde";  // spde | besag | bym2 | iid
  std::string likelihood = "gaussian";
  std::string data, mesh, graph, offset_column;
  bool zero_based = false, intercept = true;
  int alpha = 2;
  double prior_range = 1.0, prior_range_alpha = 0.05, prior_sigma = 1.0, prior_sigma_alpha = 0.05;
  double prior_U = 1.0, prior_alpha = 0.01;

  Json to_json() const {
    namespace fs = std::filesystem;
    auto abs = [](const std::string& p) { return p.empty() ? p : fs::absolute(p).lexically_normal().string(); };
    Json j{{"model", model},
           {"likelihood", likelihood},
           {"data", abs(data)},
           {"mesh", abs(mesh)},
           {"graph", abs(graph)},
           {"zero_based", zero_based},
           {"intercept", intercept},
           {"offset_column", offset_column},
           {"alpha", alpha},
           {"prior_range", prior_range},
           {"prior_range_alpha", prior_range_alpha},
           {"prior_sigma", prior_sigma},
           {"prior_sigma_alpha", prior_sigma_alpha},
           {"prior_U", prior_U},
           {"prior_alpha", prior_alpha}};
    for (const char* f : {"data", "mesh", "graph"})
      if (!j[f].get<std::string>().empty()) j["digests"][f] = io::content_digest(io::read_text_file(j[f]));
    return j;
  }

  static ModelSpec from_json(const Json& j) {
    ModelSpec s;
    s.model = j.at("model");
    s.likelihood = j.at("likelihood");
    s.data = j.at("data");
    s.mesh = j.at("mesh");
    s.graph = j.at("graph");
    s.zero_based = j.at("zero_based");
    s.intercept = j.at("intercept");
    s.offset_column = j.at("offset_column");
    s.alpha = j.at("alpha");
    s.prior_range = j.at("prior_range");
    s.prior_range_alpha = j.at("prior_range_alpha");
    s.prior_sigma = j.at("prior_sigma");
    s.prior_sigma_alpha = j.at("prior_sigma_alpha");
    s.prior_U = j.at("prior_U");
    s.prior_alpha = j.at("prior_alpha");
    if (j.contains("digests"))
      for (const auto& [f, d] : j["digests"].items())
        require(io::content_digest(io::read_text_file(j[f])) == d.get<std::string>(), ErrorKind::InvalidArgument,
                "input '" + j[f].get<std::string>() + "' changed since the fit");
    return s;
  }
};

SparseMatrix region_design(const std::vector<double>& region, Index n_regions, bool zero_based) {
  std::vector<Triplet> trip;
  for (std::size_t i = 0; i < region.size(); ++i) {
    const double r = region[i] - (zero_based ? 0 : 1);
    require(r == std::floor(r) && r >= 0 && r < n_regions, ErrorKind::IndexOutOfRange,
            "row " + std::to_string(i + 1) + ": region index out of range");
    trip.push_back({static_cast<Index>(i), static_cast<Index>(r), 1.0});
  }
  return SparseMatrix::from_triplets(static_cast<Index>(region.size()), n_regions, trip);
}

// Design rows of the single latent component at observed or new locations.
SparseMatrix design_rows(const ModelSpec& s, const io::Table& t, const Mesh* mesh, const AdjacencyGraph* g) {
  if (s.model == "spde") {
    const auto pa = projection_matrix(*mesh, io::table_points(t));
    for (std::size_t i = 0; i < pa.outside.size(); ++i)
      require(!pa.outside[i], ErrorKind::InvalidArgument, "row " + std::to_string(i + 1) + ": location outside the mesh");
    return pa.A;
  }
  return region_design(t.column("region"), g->n, s.zero_based);
}

struct BuiltModel {
  std::shared_ptr<LatentModel> model;
  std::optional<Mesh> mesh;
  std::optional<AdjacencyGraph> graph;
};

BuiltModel build_model(const ModelSpec& s) {
  BuiltModel b;
  const io::Table t = io::read_csv(s.data);
  auto m = std::make_shared<LatentModel>();
  m->likelihood = s.likelihood == "poisson" ? Likelihood::poisson : Likelihood::gaussian;
  require(s.likelihood == "poisson" || s.likelihood == "gaussian", ErrorKind::InvalidArgument,
          "likelihood must be gaussian or poisson");
  const auto& y = t.column("value");
  m->y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Index>(y.size()));
  if (!s.offset_column.empty()) {
    const auto& off = t.column(s.offset_column);
    m->offset = Eigen::Map<const Eigen::VectorXd>(off.data(), static_cast<Index>(off.size()));
  }
  if (s.intercept) m->fixed_effects = Eigen::MatrixXd::Ones(m->n_obs(), 1);

  if (s.model == "spde") {
    require(!s.mesh.empty(), ErrorKind::InvalidArgument, "spde model needs --mesh");
    b.mesh = load_mesh(s.mesh);
    SparseMatrix A = design_rows(s, t, &*b.mesh, nullptr);
    m->components.push_back(spde_component(
        "field", *b.mesh, std::move(A),
        PcRangeSigmaPrior{s.prior_range, s.prior_range_alpha, s.prior_sigma, s.prior_sigma_alpha}, s.alpha));
  } else {
    require(!s.graph.empty(), ErrorKind::InvalidArgument, s.model + " model needs --graph");
    b.graph = load_graph(s.graph, false);
    SparseMatrix A = design_rows(s, t, nullptr, &*b.graph);
    const PcPrecisionPrior prior{s.prior_U, s.prior_alpha};
    if (s.model == "besag") {
      m->components.push_back(
          scaled_structure_component("besag", scale_besag(besag_precision(*b.graph)), std::move(A), prior));
    } else if (s.model == "bym2") {
      m->components.push_back(bym2_component("bym2", *b.graph, std::move(A), prior));
    } else if (s.model == "iid") {
      PrecisionModel iid;
      iid.Q = SparseMatrix::identity(b.graph->n);
      iid.label = "iid";
      m->components.push_back(scaled_structure_component("iid", iid, std::move(A), prior));
    } else {
      fail(ErrorKind::InvalidArgument, "unknown model '" + s.model + "' (spde, besag, bym2 or iid)");
    }
  }
  m->validate();
  b.model = m;
  return b;
}

struct FitArgs {
  ModelSpec spec;
  std::string strategy = "eb", output, manifest;
  double grid_step = 0.5, grid_drop = 2.5;
  std::uint64_t seed = 0;
};

void run_fit(const FitArgs& a) {
  const BuiltModel b = build_model(a.spec);
  GridConfig gc;
  gc.step_sd = a.grid_step;
  gc.drop = a.grid_drop;
  FitResult r = fit(b.model, parse_strategy(a.strategy), gc);
  r.seed = a.seed;
  Json doc{{"spec", a.spec.to_json()}, {"fit", io::fit_to_json(r)}, {"grid", {{"step_sd", gc.step_sd}, {"drop", gc.drop}}}};
  io::write_text_file(a.output, doc.dump(2) + "\n");

  io::RunManifest m("fit");
  m.seed(a.seed);
  m.parameter("spec", doc["spec"]);
  m.parameter("strategy", a.strategy);
  m.parameter("grid", doc["grid"]);
  m.input("data", a.spec.data);
  if (!a.spec.mesh.empty()) m.input("mesh", a.spec.mesh);
  if (!a.spec.graph.empty()) m.input("graph", a.spec.graph);
  m.output("fit", a.output);
  m.write(manifest_path(a.output, a.manifest));
}

struct PredictArgs {
  std::string fit, points, output, manifest, link;
  int n_draws = 1000;
  std::uint64_t seed = 0;
};

void run_predict(const PredictArgs& a) {
  Json doc;
  try {
    doc = Json::parse(io::read_text_file(a.fit));
  } catch (const Json::exception& e) {
    fail(ErrorKind::MalformedLine, a.fit + ": " + e.what());
  }
  const ModelSpec spec = ModelSpec::from_json(doc.at("spec"));
  const BuiltModel b = build_model(spec);

  FitResult r;
  r.model = b.model;
  r.strategy = doc["fit"]["strategy"];
  for (const auto& p : doc["fit"]["theta_grid"]) {
    ThetaPoint tp;
    const auto th = p["theta"].get<std::vector<double>>();
    tp.theta = Eigen::Map<const Eigen::VectorXd>(th.data(), static_cast<Index>(th.size()));
    tp.weight = p["weight"];
    r.points.push_back(std::move(tp));
  }

  const io::Table t = io::read_csv(a.points);
  SparseMatrix comp = design_rows(spec, t, b.mesh ? &*b.mesh : nullptr, b.graph ? &*b.graph : nullptr);
  const LatentComponent& c = b.model->components.front();
  std::vector<Triplet> trip;
  for (Index i = 0; i < comp.rows(); ++i) {
    auto cols = comp.row_cols(i);
    auto vals = comp.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) trip.push_back({i, cols[k], vals[k]});
    if (spec.intercept) trip.push_back({i, c.size, 1.0});
  }
  const SparseMatrix A_new = SparseMatrix::from_triplets(comp.rows(), b.model->n_latent(), trip);

  std::optional<Link> link;
  if (a.link == "identity") link = Link::identity;
  else if (a.link == "exp") link = Link::exp;
  else require(a.link.empty(), ErrorKind::InvalidArgument, "--link must be identity or exp");

  const PredictSummary s = predict(r, A_new, a.n_draws, a.seed, link);
  std::vector<std::string> header;
  Eigen::MatrixXd out;
  const Index keys = spec.model == "spde" ? 2 : 1;
  out.resize(comp.rows(), keys + 7);
  if (spec.model == "spde") {
    header = {"x", "y"};
    out.col(0) = Eigen::Map<const Eigen::VectorXd>(t.column("x").data(), comp.rows());
    out.col(1) = Eigen::Map<const Eigen::VectorXd>(t.column("y").data(), comp.rows());
  } else {
    header = {"region"};
    out.col(0) = Eigen::Map<const Eigen::VectorXd>(t.column("region").data(), comp.rows());
  }
  for (const char* h : {"mean", "sd", "q0.025", "q0.25", "q0.5", "q0.75", "q0.975"}) header.push_back(h);
  out.col(keys) = s.mean;
  out.col(keys + 1) = s.sd;
  out.rightCols(5) = s.quantiles;
  io::write_text_file(a.output, io::format_csv(header, out));

  io::RunManifest m("predict");
  m.seed(a.seed);
  m.parameter("n_draws", a.n_draws);
  m.parameter("link", a.link.empty() ? (spec.likelihood == "poisson" ? "exp" : "identity") : a.link);
  m.input("fit", a.fit);
  m.input("points", a.points);
  m.output("predictions", a.output);
  m.write(manifest_path(a.output, a.manifest));
}

void add_spec_options(CLI::App* s, ModelSpec& spec) {
  s->add_option("--data", spec.data, "CSV: x,y,value (spde) or region,value (areal)")->required();
  s->add_option("--model", spec.model, "spde, besag, bym2 or iid");
  s->add_option("--likelihood", spec.likelihood, "gaussian or poisson");
  s->add_option("--mesh", spec.mesh, "Mesh JSON (spde)");
  s->add_option("--graph", spec.graph, "Graph file (areal models)");
  s->add_flag("--zero-based", spec.zero_based, "Region indices in the data are 0-based");
  s->add_flag("!--no-intercept", spec.intercept, "Drop the intercept");
  s->add_option("--offset-column", spec.offset_column, "Data column added to the linear predictor");
  s->add_option("--alpha", spec.alpha, "SPDE order (2 or 3)");
  s->add_option("--prior-range", spec.prior_range, "PC prior: P(range < r0) = alpha_r, r0");
  s->add_option("--prior-range-alpha", spec.prior_range_alpha, "alpha_r");
  s->add_option("--prior-sigma", spec.prior_sigma, "PC prior: P(sigma > sigma0) = alpha_s, sigma0");
  s->add_option("--prior-sigma-alpha", spec.prior_sigma_alpha, "alpha_s");
  s->add_option("--prior-U", spec.prior_U, "PC precision prior: P(1/sqrt(tau) > U) = alpha, U");
  s->add_option("--prior-alpha", spec.prior_alpha, "alpha");
}

}  // namespace

void register_fit(CLI::App& app) {
  auto a = std::make_shared<FitArgs>();
  auto* s = app.add_subcommand("fit", "Laplace-approximation fit of a latent Gaussian model");
  add_spec_options(s, a->spec);
  s->add_option("--strategy", a->strategy, "eb or grid");
  s->add_option("--grid-step", a->grid_step, "Grid step in posterior sds");
  s->add_option("--grid-drop", a->grid_drop, "Log-density drop threshold");
  s->add_option("--seed", a->seed, "Seed recorded with the fit");
  s->add_option("-o,--output", a->output, "Fit JSON")->required();
  s->add_option("--manifest", a->manifest, "Run-manifest path");
  s->callback([a] { run_fit(*a); });
}

void register_predict(CLI::App& app) {
  auto a = std::make_shared<PredictArgs>();
  auto* s = app.add_subcommand("predict", "Posterior predictive summaries of the linear predictor");
  s->add_option("--fit", a->fit, "Fit JSON from `fit`")->required();
  s->add_option("--points", a->points, "CSV: x,y (spde) or region (areal)")->required();
  s->add_option("--n-draws", a->n_draws, "Number of posterior draws");
  s->add_option("--seed", a->seed, "Random seed")->required();
  s->add_option("--link", a->link, "identity or exp (default by likelihood)");
  s->add_option("-o,--output", a->output, "CSV output")->required();
  s->add_option("--manifest", a->manifest, "Run-manifest path");
  s->callback([a] { run_predict(*a); });
}

}  // namespace spdekit::cli
