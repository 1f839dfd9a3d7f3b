#include <cmath>
#include <numbers>
#include <string>

#include "spdekit/error.hpp"
#include "spdekit/fem.hpp"

namespace spdekit {
namespace {

void check_anisotropy(const Anisotropy& h) {
  const bool finite = std::isfinite(h.xx) && std::isfinite(h.xy) && std::isfinite(h.yy);
  require(finite && h.xx > 0 && h.yy > 0 && h.xx * h.yy - h.xy * h.xy > 0, ErrorKind::NonSpdAnisotropy,
          "anisotropy tensor H must be symmetric positive definite");
}

struct ElementArrays {
  std::vector<double> x0, y0, x1, y1, x2, y2;
  std::vector<double> area, g00, g01, g02, g11, g12, g22;
};

ElementArrays element_stiffness(const Mesh& mesh, const Anisotropy& h) {
  const std::size_t m = mesh.triangles.size();
  ElementArrays e;
  for (auto* v : {&e.x0, &e.y0, &e.x1, &e.y1, &e.x2, &e.y2, &e.area, &e.g00, &e.g01, &e.g02, &e.g11, &e.g12,
                  &e.g22})
    v->resize(m);
  for (std::size_t t = 0; t < m; ++t) {
    const auto& tri = mesh.triangles[t];
    e.x0[t] = mesh.vertices[tri[0]].x;
    e.y0[t] = mesh.vertices[tri[0]].y;
    e.x1[t] = mesh.vertices[tri[1]].x;
    e.y1[t] = mesh.vertices[tri[1]].y;
    e.x2[t] = mesh.vertices[tri[2]].x;
    e.y2[t] = mesh.vertices[tri[2]].y;
  }
  kernels::TriangleBatch batch{e.x0, e.y0, e.x1, e.y1, e.x2, e.y2};
  kernels::ElementStiffness out{e.area, e.g00, e.g01, e.g02, e.g11, e.g12, e.g22};
  kernels::active().element_stiffness(batch, h, out);
  return e;
}

// Sum_T w_T * G_T with both triangles of every pair inserted in the same order.
SparseMatrix assemble_weighted_stiffness(const Mesh& mesh, const ElementArrays& e, const std::vector<double>* w) {
  std::vector<Triplet> trip;
  trip.reserve(9 * mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double s = w ? (*w)[t] : 1.0;
    const double g[3][3] = {{e.g00[t], e.g01[t], e.g02[t]},
                            {e.g01[t], e.g11[t], e.g12[t]},
                            {e.g02[t], e.g12[t], e.g22[t]}};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) trip.push_back({tri[a], tri[b], w ? s * g[a][b] : g[a][b]});
  }
  return SparseMatrix::from_triplets(mesh.n_vertices(), mesh.n_vertices(), trip);
}

Eigen::VectorXd lumped_mass(const Mesh& mesh, const std::vector<double>* w) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(mesh.n_vertices());
  for (Index t = 0; t < mesh.n_triangles(); ++t) {
    const double a = mesh.triangle_area(t) / 3.0;
    const double s = w ? (*w)[t] * a : a;
    for (Index v : mesh.triangles[t]) c[v] += s;
  }
  return c;
}

Eigen::VectorXd nodewise(const Eigen::MatrixXd& basis, const Eigen::VectorXd& theta, Index n, const char* what) {
  require(basis.rows() == n, ErrorKind::DimensionMismatch, std::string(what) + " basis rows differ from node count");
  require(basis.cols() == theta.size(), ErrorKind::DimensionMismatch,
          std::string(what) + " basis columns differ from coefficient count");
  Eigen::VectorXd out(n);
  for (Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Index k = 0; k < basis.cols(); ++k) s += basis(i, k) * theta[k];
    out[i] = std::exp(s);
  }
  return out;
}

void probe_factorization(const PrecisionModel& model) { Factorization probe(model); }

}  // namespace

double SpdeParams::kappa() const { return std::exp(log_kappa); }
double SpdeParams::tau() const { return std::exp(log_tau); }

void SpdeParams::validate() const {
  require(alpha >= 1 && alpha <= 4, ErrorKind::InvalidArgument, "alpha must be 1, 2, 3 or 4");
  require(std::isfinite(kappa()) && kappa() > 0 && std::isfinite(tau()) && tau() > 0, ErrorKind::InvalidArgument,
          "kappa and tau must be finite and positive");
}

SparseMatrix assemble_mass(const Mesh& mesh) {
  const Eigen::VectorXd c = lumped_mass(mesh, nullptr);
  return SparseMatrix::diagonal(std::span<const double>(c.data(), c.size()));
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const std::optional<Anisotropy>& H) {
  const Anisotropy h = H.value_or(Anisotropy{});
  check_anisotropy(h);
  return assemble_weighted_stiffness(mesh, element_stiffness(mesh, h), nullptr);
}

FemMatrices fem_matrices(const Mesh& mesh, const std::optional<Anisotropy>& H) {
  FemMatrices f;
  f.c = lumped_mass(mesh, nullptr);
  f.C = SparseMatrix::diagonal(std::span<const double>(f.c.data(), f.c.size()));
  f.G = assemble_stiffness(mesh, H);
  return f;
}

SparseMatrix spde_precision_matrix(const FemMatrices& fem, const SpdeParams& params, const NonstatSpec* nonstat) {
  params.validate();
  const Index n = fem.C.rows();
  Eigen::VectorXd kappa2, tau;
  if (nonstat) {
    const Eigen::VectorXd kappa = nodewise(nonstat->basis_kappa, nonstat->theta_kappa, n, "kappa");
    kappa2 = kappa.array().square();
    tau = nodewise(nonstat->basis_tau, nonstat->theta_tau, n, "tau");
  } else {
    kappa2 = Eigen::VectorXd::Constant(n, params.kappa() * params.kappa());
    tau = Eigen::VectorXd::Constant(n, params.tau());
  }
  Eigen::VectorXd kc(n), cinv(n);
  for (Index i = 0; i < n; ++i) {
    kc[i] = kappa2[i] * fem.c[i];
    cinv[i] = 1.0 / fem.c[i];
  }
  const SparseMatrix K = add(SparseMatrix::diagonal(std::span<const double>(kc.data(), n)), fem.G);
  const std::vector<double> ones(n, 1.0);
  const std::span<const double> ci(cinv.data(), n);
  // K C^-1 (.) C^-1 K, each product made bitwise symmetric
  auto sandwich = [&](const SparseMatrix& inner) {
    const SparseMatrix left = scale_rows_cols(K, ones, ci);
    const SparseMatrix right = scale_rows_cols(K, ci, ones);
    return mirror_upper(multiply(multiply(left, inner), right));
  };
  SparseMatrix q;
  switch (params.alpha) {
    case 1: q = K; break;
    case 2: q = mirror_upper(multiply(scale_rows_cols(K, ones, ci), K)); break;
    case 3: q = sandwich(K); break;
    case 4: q = sandwich(mirror_upper(multiply(scale_rows_cols(K, ones, ci), K))); break;
  }
  // diag(tau) Q diag(tau), entries (tau_i tau_j) q_ij
  return scale_rows_cols(q, std::span<const double>(tau.data(), n), std::span<const double>(tau.data(), n));
}

PrecisionModel assemble_precision(const Mesh& mesh, const SpdeParams& params, const NonstatSpec* nonstat,
                                  const std::optional<Anisotropy>& H, bool probe) {
  params.validate();
  const FemMatrices fem = fem_matrices(mesh, H);
  PrecisionModel model;
  model.Q = spde_precision_matrix(fem, params, nonstat);
  model.label = "spde(alpha=" + std::to_string(params.alpha) + (nonstat ? ",nonstationary" : "") +
                (H ? ",anisotropic" : "") + ")";
  if (probe) probe_factorization(model);
  return model;
}

SparseMatrix precision_alpha2_closed_form(const FemMatrices& fem, const SpdeParams& params) {
  const Index n = fem.C.rows();
  const double k2 = params.kappa() * params.kappa();
  const double t2 = params.tau() * params.tau();
  Eigen::VectorXd cinv = fem.c.cwiseInverse();
  const std::vector<double> ones(n, 1.0);
  const SparseMatrix g2 =
      mirror_upper(multiply(scale_rows_cols(fem.G, ones, std::span<const double>(cinv.data(), n)), fem.G));
  const SparseMatrix lower = add(fem.C, fem.G, k2 * k2, 2.0 * k2);
  return add(lower, g2, t2, t2);
}

PrecisionModel assemble_barrier_precision(const Mesh& mesh, const BarrierSpec& spec, double sigma, bool probe) {
  require(spec.range_normal > 0 && std::isfinite(spec.range_normal), ErrorKind::InvalidArgument,
          "barrier range must be positive");
  require(spec.range_fraction_in_barrier > 0 && spec.range_fraction_in_barrier <= 1, ErrorKind::InvalidArgument,
          "range_fraction_in_barrier must lie in (0, 1]");
  require(sigma > 0 && std::isfinite(sigma), ErrorKind::InvalidArgument, "sigma must be positive");
  const Index m = mesh.n_triangles();
  std::vector<double> r(m, spec.range_normal);
  for (Index t : spec.barrier_triangles) {
    require(t >= 0 && t < m, ErrorKind::IndexOutOfRange, "barrier triangle index out of range");
    r[t] = spec.range_fraction_in_barrier * spec.range_normal;
  }
  std::vector<double> stiff_w(m), mass_w(m);
  for (Index t = 0; t < m; ++t) {
    stiff_w[t] = r[t] * r[t] / 8.0;
    mass_w[t] = std::numbers::pi * r[t] * r[t] / 2.0;
  }
  const Index n = mesh.n_vertices();
  const ElementArrays e = element_stiffness(mesh, Anisotropy{});
  const Eigen::VectorXd c = lumped_mass(mesh, nullptr);
  const Eigen::VectorXd mdiag = lumped_mass(mesh, &mass_w);
  const SparseMatrix K = add(SparseMatrix::diagonal(std::span<const double>(c.data(), n)),
                             assemble_weighted_stiffness(mesh, e, &stiff_w));
  const Eigen::VectorXd minv = mdiag.cwiseInverse() / (sigma * sigma);
  const std::vector<double> ones(n, 1.0);
  PrecisionModel model;
  model.Q = mirror_upper(multiply(scale_rows_cols(K, ones, std::span<const double>(minv.data(), n)), K));
  model.label = "barrier(" + std::to_string(spec.barrier_triangles.size()) + " triangles)";
  if (probe) probe_factorization(model);
  return model;
}

}  // namespace spdekit
