#pragma once

#include <cstddef>
#include <memory>
#include <string>

namespace spdekit {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;             // 0 picks a free port
  std::string static_dir;      // served under GET /; empty serves a placeholder page
  std::size_t cache_capacity = 8;
};

struct ServiceResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// JSON API over mesh building, approximation assessment and sampling.
///
///   POST /api/mesh    {points, boundary?, config}
///   POST /api/assess  {mesh, matern_params: {range, sigma, nu?}}
///   POST /api/sample  {mesh, matern_params, seed}
///   GET  /            static assets
///
/// Responses echo the request under "request". Validation failures return 400,
/// numerical failures 422, both as {"error": {kind, message, field?}}.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();

  /// Dispatches one request without going through the network.
  ServiceResponse handle(const std::string& method, const std::string& path, const std::string& body) const;

  /// Binds and serves until stop(). Returns false if binding failed.
  bool listen();
  /// Binds without serving; returns the bound port or -1.
  int bind();
  bool listen_after_bind();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace spdekit
