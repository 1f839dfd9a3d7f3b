#include <filesystem>
#include <iostream>

#include "cli.hpp"
#include "spdekit/error.hpp"
#include "spdekit/version.hpp"

namespace spdekit::cli {

std::string manifest_path(const std::string& output, const std::string& override_path) {
  return override_path.empty() ? output + ".manifest.json" : override_path;
}

AdjacencyGraph load_graph(const std::string& path, bool zero_based) {
  if (std::filesystem::path(path).extension() == ".json") {
    try {
      return io::graph_from_json(Json::parse(io::read_text_file(path)));
    } catch (const Json::exception& e) {
      fail(ErrorKind::MalformedLine, path + ": " + e.what());
    }
  }
  return read_graph_file(path, zero_based);
}

Mesh load_mesh(const std::string& path) {
  Json j;
  try {
    j = Json::parse(io::read_text_file(path));
  } catch (const Json::exception& e) {
    fail(ErrorKind::MalformedLine, path + ": " + e.what());
  }
  return io::mesh_from_json(j);
}

}  // namespace spdekit::cli

namespace {

int report(const std::string& kind, const std::string& message, int code) {
  const spdekit::io::Json line{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
  std::cerr << line.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace spdekit;
  CLI::App app{"Sparse-precision Gaussian random fields: meshes, SPDE/areal precisions, sampling and inference",
               "spdekit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  cli::register_mesh(app);
  cli::register_assemble(app);
  cli::register_sample(app);
  cli::register_fit(app);
  cli::register_predict(app);
  cli::register_serve(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return report("UsageError", e.what(), 2);
  } catch (const Error& e) {
    return report(std::string(to_string(e.kind())), e.what(), is_numerical(e.kind()) ? 4 : 3);
  } catch (const io::Json::exception& e) {
    return report("MalformedLine", e.what(), 3);
  } catch (const std::exception& e) {
    return report("InvalidArgument", e.what(), 3);
  }
  return 0;
}
