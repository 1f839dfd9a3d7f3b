#include <algorithm>
#include <cmath>
#include <filesystem>
#include <list>
#include <mutex>
#include <unordered_map>

#include "spdekit/error.hpp"
#include "spdekit/fem.hpp"
#include "spdekit/io.hpp"
#include "spdekit/service.hpp"
#include "spdekit/version.hpp"

// After Eigen: resolv.h (pulled in by httplib) defines a _res macro.
#include <httplib.h>

namespace spdekit {
namespace {

using io::Json;

constexpr int kAssessBins = 20;
constexpr std::size_t kAssessAnchors = 40;
constexpr double kCoarseWarning = 0.1;

struct FieldError {
  std::string field;
  Error error;
};

template <class F>
auto in_field(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw FieldError{name, e};
  } catch (const Json::exception& e) {
    throw FieldError{name, Error(ErrorKind::InvalidArgument, e.what())};
  }
}

const Json& member(const Json& body, const std::string& name) {
  if (!body.is_object() || !body.contains(name))
    throw FieldError{name, Error(ErrorKind::InvalidArgument, "missing field '" + name + "'")};
  return body.at(name);
}

MaternParams matern_from(const Json& body) {
  const Json& j = member(body, "matern_params");
  return in_field("matern_params", [&] {
    require(j.is_object(), ErrorKind::InvalidArgument, "expected an object");
    MaternParams p;
    p.range = j.at("range").get<double>();
    p.sigma = j.value("sigma", 1.0);
    p.nu = j.value("nu", 1.0);
    p.validate();
    return p;
  });
}

Json error_json(ErrorKind kind, const std::string& message, const std::string& field) {
  Json e{{"kind", std::string(to_string(kind))}, {"message", message}};
  if (!field.empty()) e["field"] = field;
  return Json{{"error", e}};
}

// Distance from each vertex to the outer boundary loop.
std::vector<double> boundary_distance(const Mesh& mesh) {
  std::vector<double> d(mesh.vertices.size(), std::numeric_limits<double>::infinity());
  if (mesh.boundary_loops.empty()) return d;
  const auto& loop = mesh.boundary_loops.front();
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    for (std::size_t k = 0; k < loop.size(); ++k)
      d[v] = std::min(d[v], geometry::distance_to_segment(mesh.vertices[v], mesh.vertices[loop[k]],
                                                          mesh.vertices[loop[(k + 1) % loop.size()]]));
  return d;
}

struct CachedFactor {
  std::shared_ptr<const Factorization> factor;
  Eigen::VectorXd variances;
};

}  // namespace

struct Service::Impl {
  ServiceOptions options;
  httplib::Server server;

  mutable std::mutex cache_mutex;
  mutable std::list<std::string> lru;
  mutable std::unordered_map<std::string, std::pair<CachedFactor, std::list<std::string>::iterator>> cache;

  CachedFactor factor_for(const Json& mesh_json, const Mesh& mesh, const MaternParams& p) const {
    const std::string key = io::content_digest(mesh_json.dump() + "|" + io::format_double(p.range) + "|" +
                                               io::format_double(p.sigma) + "|" + io::format_double(p.nu));
    {
      std::lock_guard lock(cache_mutex);
      auto it = cache.find(key);
      if (it != cache.end()) {
        lru.splice(lru.begin(), lru, it->second.second);
        return it->second.first;
      }
    }
    const SpdeParams sp = to_spde(p);
    auto fac = std::make_shared<const Factorization>(assemble_precision(mesh, sp));
    CachedFactor entry{fac, fac->marginal_variances()};
    std::lock_guard lock(cache_mutex);
    if (options.cache_capacity == 0 || cache.count(key)) return entry;
    lru.push_front(key);
    cache.emplace(key, std::make_pair(entry, lru.begin()));
    while (cache.size() > options.cache_capacity) {
      cache.erase(lru.back());
      lru.pop_back();
    }
    return entry;
  }

  Json echo(const std::string& path, const Json& body) const {
    Json copy = body;
    if (copy.is_object() && copy.contains("mesh")) {
      const Json& m = copy["mesh"];
      copy["mesh"] = Json{{"fnv1a64", io::content_digest(m.dump())},
                          {"n_vertices", m.contains("vertices") ? m["vertices"].size() : 0}};
    }
    return Json{{"endpoint", path}, {"version", kVersion}, {"body", copy}};
  }

  Json api_mesh(const Json& body) const {
    const auto points = in_field("points", [&] { return io::points_from_json(body, "points"); });
    std::optional<Polygon> boundary;
    if (body.contains("boundary") && !body["boundary"].is_null())
      boundary = in_field("boundary", [&] { return io::points_from_json(body, "boundary"); });
    const MeshConfig cfg = in_field("config", [&] {
      return body.contains("config") ? io::config_from_json(body["config"]) : MeshConfig{};
    });
    const Mesh mesh = build_mesh(points, boundary, cfg);
    return Json{{"mesh", io::mesh_to_json(mesh)},
                {"quality", io::quality_to_json(mesh_quality(mesh))},
                {"config", io::config_to_json(cfg)}};
  }

  Json api_assess(const Json& body) const {
    const Json& mj = member(body, "mesh");
    const Mesh mesh = in_field("mesh", [&] { return io::mesh_from_json(mj); });
    const MaternParams p = matern_from(body);
    const CachedFactor cf = factor_for(mj, mesh, p);
    const Index n = mesh.n_vertices();

    const std::vector<double> bd = boundary_distance(mesh);
    std::vector<Index> interior;
    for (Index v = 0; v < n; ++v)
      if (bd[v] >= p.range) interior.push_back(v);
    if (interior.empty())
      for (Index v = 0; v < n; ++v) interior.push_back(v);
    std::vector<Index> anchors;
    const std::size_t na = std::min(kAssessAnchors, interior.size());
    for (std::size_t k = 0; k < na; ++k) anchors.push_back(interior[k * interior.size() / na]);

    const double reach = 3.0 * p.range, width = reach / kAssessBins;
    std::vector<double> sum_err(kAssessBins, 0.0), max_err(kAssessBins, 0.0), sum_corr(kAssessBins, 0.0);
    std::vector<long> count(kAssessBins, 0);
    for (Index a : anchors) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e[a] = 1.0;
      const Eigen::VectorXd col = cf.factor->solve(e);
      for (Index j : interior) {
        const double d = geometry::distance(mesh.vertices[a], mesh.vertices[j]);
        if (j == a || d >= reach) continue;
        const int b = std::min(kAssessBins - 1, static_cast<int>(d / width));
        const double corr = col[j] / std::sqrt(cf.variances[a] * cf.variances[j]);
        const double err = std::abs(corr - matern_correlation(d, p.range, p.nu));
        sum_err[b] += err;
        sum_corr[b] += corr;
        max_err[b] = std::max(max_err[b], err);
        ++count[b];
      }
    }
    Json bins = Json::array();
    double worst = 0.0, worst_2r = 0.0;
    bool resolved = false;
    for (int b = 0; b < kAssessBins; ++b) {
      const double lo = b * width, hi = (b + 1) * width, mid = 0.5 * (lo + hi);
      Json bin{{"lo", lo}, {"hi", hi}, {"count", count[b]}, {"matern_correlation", matern_correlation(mid, p.range, p.nu)}};
      if (count[b] > 0) {
        const double mean_err = sum_err[b] / count[b];
        bin["mean_abs_error"] = mean_err;
        bin["max_abs_error"] = max_err[b];
        bin["fem_correlation"] = sum_corr[b] / count[b];
        worst = std::max(worst, mean_err);
        if (hi <= p.range + 1e-12) resolved = true;
        if (hi <= 2.0 * p.range + 1e-12) worst_2r = std::max(worst_2r, mean_err);
      } else {
        bin["mean_abs_error"] = nullptr;
        bin["max_abs_error"] = nullptr;
        bin["fem_correlation"] = nullptr;
      }
      bins.push_back(std::move(bin));
    }
    std::vector<double> sd(n);
    for (Index v = 0; v < n; ++v) sd[v] = std::sqrt(cf.variances[v]);
    return Json{{"bins", bins},
                {"metric", "mean |FEM correlation - Matern correlation| per distance bin"},
                {"max_binned_error", worst},
                {"max_binned_error_within_2r", worst_2r},
                {"resolved_within_range", resolved},
                {"coarse_mesh_warning", worst > kCoarseWarning || !resolved},
                {"coarse_mesh_threshold", kCoarseWarning},
                {"anchors", anchors.size()},
                {"marginal_sd", sd},
                {"nominal_sigma", p.sigma}};
  }

  Json api_sample(const Json& body) const {
    const Json& mj = member(body, "mesh");
    const Mesh mesh = in_field("mesh", [&] { return io::mesh_from_json(mj); });
    const MaternParams p = matern_from(body);
    const Json& sj = member(body, "seed");
    const std::uint64_t seed = in_field("seed", [&] {
      require(sj.is_number_unsigned() || (sj.is_number_integer() && sj.get<long long>() >= 0),
              ErrorKind::InvalidArgument, "seed must be a non-negative integer");
      return sj.get<std::uint64_t>();
    });
    const CachedFactor cf = factor_for(mj, mesh, p);
    const Eigen::MatrixXd x = cf.factor->sample(1, seed);
    return Json{{"field", std::vector<double>(x.data(), x.data() + x.size())}, {"seed", seed}};
  }

  ServiceResponse index_page() const {
    if (!options.static_dir.empty()) {
      const auto path = std::filesystem::path(options.static_dir) / "index.html";
      if (std::filesystem::exists(path)) return {200, io::read_text_file(path.string()), "text/html"};
    }
    return {200,
            "<!doctype html><title>spdekit</title><p>spdekit service " + std::string(kVersion) +
                ". No UI bundle configured; the JSON API is under /api/.</p>\n",
            "text/html"};
  }

  ServiceResponse dispatch(const std::string& method, const std::string& path, const std::string& text) const {
    if (method == "GET" && (path == "/" || path == "/index.html")) return index_page();
    if (method != "POST" || (path != "/api/mesh" && path != "/api/assess" && path != "/api/sample"))
      return {404, error_json(ErrorKind::InvalidArgument, "no route for " + method + " " + path, "").dump()};
    Json body;
    try {
      body = Json::parse(text);
    } catch (const Json::exception& e) {
      return {400, error_json(ErrorKind::MalformedLine, e.what(), "body").dump()};
    }
    try {
      Json out = path == "/api/mesh" ? api_mesh(body) : path == "/api/assess" ? api_assess(body) : api_sample(body);
      out["request"] = echo(path, body);
      return {200, out.dump()};
    } catch (const FieldError& fe) {
      Json out = error_json(fe.error.kind(), fe.error.what(), fe.field);
      out["request"] = echo(path, body);
      return {is_numerical(fe.error.kind()) ? 422 : 400, out.dump()};
    } catch (const Error& e) {
      Json out = error_json(e.kind(), e.what(), "");
      out["request"] = echo(path, body);
      return {is_numerical(e.kind()) ? 422 : 400, out.dump()};
    } catch (const Json::exception& e) {
      Json out = error_json(ErrorKind::InvalidArgument, e.what(), "");
      out["request"] = echo(path, body);
      return {400, out.dump()};
    }
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  Impl* self = impl_.get();
  auto route = [self](const httplib::Request& req, httplib::Response& res) {
    const ServiceResponse r = self->dispatch(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  self->server.Get("/", route);
  self->server.Get("/index.html", route);
  self->server.Post("/api/mesh", route);
  self->server.Post("/api/assess", route);
  self->server.Post("/api/sample", route);
  if (!self->options.static_dir.empty() && std::filesystem::is_directory(self->options.static_dir))
    self->server.set_mount_point("/static", self->options.static_dir);
}

Service::~Service() = default;

ServiceResponse Service::handle(const std::string& method, const std::string& path, const std::string& body) const {
  return impl_->dispatch(method, path, body);
}

bool Service::listen() { return impl_->server.listen(impl_->options.host, impl_->options.port); }

int Service::bind() {
  if (impl_->options.port == 0) return impl_->server.bind_to_any_port(impl_->options.host);
  return impl_->server.bind_to_port(impl_->options.host, impl_->options.port) ? impl_->options.port : -1;
}

bool Service::listen_after_bind() { return impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

}  // namespace spdekit
