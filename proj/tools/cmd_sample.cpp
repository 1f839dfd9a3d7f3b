#include <memory>

#include "cli.hpp"
#include "spdekit/error.hpp"
#include "spdekit/fem.hpp"

namespace spdekit::cli {
namespace {

struct SampleArgs {
  std::string q, mesh, output, manifest;
  int n = 1;
  std::uint64_t seed = 0;
  double range = 0, sigma = 1.0, nig_mu = 0, nig_gamma = 0;
  int alpha = 2;
};

std::vector<std::string> draw_header(int n) {
  std::vector<std::string> h;
  for (int k = 0; k < n; ++k) h.push_back("draw_" + std::to_string(k));
  return h;
}

void run(const SampleArgs& a) {
  require(a.n >= 1, ErrorKind::InvalidArgument, "--n must be at least 1");
  io::RunManifest m("sample");
  m.seed(a.seed);
  m.parameter("n", a.n);
  if (!a.q.empty()) {
    require(a.mesh.empty(), ErrorKind::InvalidArgument, "give either --Q or --mesh");
    const PrecisionModel model = io::read_precision_model(a.q);
    m.input("precision", a.q);
    if (std::ifstream(a.q + ".constraints.json").good()) m.input("constraints", a.q + ".constraints.json");
    const Eigen::MatrixXd x = Factorization(model).sample(a.n, a.seed);
    io::write_text_file(a.output, io::format_csv(draw_header(a.n), x));
  } else {
    require(!a.mesh.empty(), ErrorKind::InvalidArgument, "give --Q or --mesh");
    const Mesh mesh = load_mesh(a.mesh);
    m.input("mesh", a.mesh);
    m.parameter("range", a.range);
    m.parameter("sigma", a.sigma);
    const SpdeParams p = to_spde(MaternParams{a.range, a.sigma, a.alpha - 1.0});
    if (a.nig_gamma > 0) {
      require(a.alpha == 2, ErrorKind::InvalidArgument, "NIG simulation needs --alpha 2");
      m.parameter("nig_mu", a.nig_mu);
      m.parameter("nig_gamma", a.nig_gamma);
      const FemMatrices fem = fem_matrices(mesh);
      std::mt19937_64 rng(a.seed);
      std::normal_distribution<double> normal;
      const Index nv = mesh.n_vertices();
      Eigen::MatrixXd u(nv, a.n), v(nv, a.n);
      for (int k = 0; k < a.n; ++k) {
        Eigen::VectorXd vk(nv), z(nv);
        for (Index i = 0; i < nv; ++i) vk[i] = draw_inverse_gaussian(fem.c[i], a.nig_gamma * a.nig_gamma * fem.c[i] * fem.c[i], rng);
        for (Index i = 0; i < nv; ++i) z[i] = normal(rng);
        u.col(k) = nig_field(fem, p, a.nig_mu, vk, z);
        v.col(k) = vk;
      }
      io::write_text_file(a.output, io::format_csv(draw_header(a.n), u));
      io::write_text_file(a.output + ".v.csv", io::format_csv(draw_header(a.n), v));
      m.output("nig_v", a.output + ".v.csv");
    } else {
      m.parameter("alpha", a.alpha);
      const Eigen::MatrixXd x = Factorization(assemble_precision(mesh, p)).sample(a.n, a.seed);
      io::write_text_file(a.output, io::format_csv(draw_header(a.n), x));
    }
  }
  m.output("samples", a.output);
  m.write(manifest_path(a.output, a.manifest));
}

}  // namespace

void register_sample(CLI::App& app) {
  auto a = std::make_shared<SampleArgs>();
  auto* s = app.add_subcommand("sample", "Draw samples from a precision model (rows = nodes, columns = draws)");
  s->add_option("--Q", a->q, "MatrixMarket precision (sidecar constraints are honoured)");
  s->add_option("--mesh", a->mesh, "Mesh JSON for an SPDE or NIG field");
  s->add_option("--range", a->range, "Matern range (with --mesh)");
  s->add_option("--sigma", a->sigma, "Marginal standard deviation (with --mesh)");
  s->add_option("--alpha", a->alpha, "SPDE order (with --mesh)");
  s->add_option("--nig-mu", a->nig_mu, "NIG skewness parameter");
  s->add_option("--nig-gamma", a->nig_gamma, "NIG gamma; > 0 switches to NIG driving noise");
  s->add_option("--n", a->n, "Number of draws");
  s->add_option("--seed", a->seed, "Random seed")->required();
  s->add_option("-o,--output", a->output, "CSV output")->required();
  s->add_option("--manifest", a->manifest, "Run-manifest path");
  s->callback([a] { run(*a); });
}

}  // namespace spdekit::cli
