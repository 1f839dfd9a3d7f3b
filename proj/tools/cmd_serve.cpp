#include <csignal>
#include <iostream>
#include <memory>

#include "cli.hpp"
#include "spdekit/error.hpp"
#include "spdekit/service.hpp"

namespace spdekit::cli {
namespace {

Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

void register_serve(CLI::App& app) {
  auto opts = std::make_shared<ServiceOptions>();
  auto* s = app.add_subcommand("serve", "Local HTTP JSON API (mesh, assess, sample) and UI assets");
  s->add_option("--host", opts->host, "Bind address");
  s->add_option("--port", opts->port, "Port (0 picks a free one)");
  s->add_option("--static", opts->static_dir, "Directory with the UI bundle");
  s->add_option("--cache", opts->cache_capacity, "Factorizations kept in memory");
  s->callback([opts] {
    Service service(*opts);
    const int port = service.bind();
    require(port > 0, ErrorKind::InvalidArgument, "cannot bind " + opts->host + ":" + std::to_string(opts->port));
    std::cout << Json{{"listening", {{"host", opts->host}, {"port", port}}}}.dump() << std::endl;
    g_service = &service;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    service.listen_after_bind();
    g_service = nullptr;
  });
}

}  // namespace spdekit::cli
