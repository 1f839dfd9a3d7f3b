#include <filesystem>

#include "spdekit/io.hpp"
#include "spdekit/kernels.hpp"
#include "spdekit/version.hpp"

namespace spdekit::io {
namespace {

Json file_entry(const std::string& role, const std::string& path) {
  Json e{{"role", role}, {"path", std::filesystem::path(path).filename().string()}};
  std::error_code ec;
  if (std::filesystem::is_regular_file(path, ec)) {
    const std::string bytes = read_text_file(path);
    e["bytes"] = bytes.size();
    e["fnv1a64"] = content_digest(bytes);
  }
  return e;
}

}  // namespace

RunManifest::RunManifest(std::string command) {
  doc_ = Json{{"tool", "spdekit"},
              {"version", kVersion},
              {"command", std::move(command)},
              {"kernels", std::string(kernels::active().name)},
              {"parameters", Json::object()},
              {"inputs", Json::array()},
              {"outputs", Json::array()},
              {"seed", nullptr}};
}

void RunManifest::parameter(const std::string& name, Json value) { doc_["parameters"][name] = std::move(value); }

void RunManifest::input(const std::string& role, const std::string& path) {
  doc_["inputs"].push_back(file_entry(role, path));
}

void RunManifest::output(const std::string& role, const std::string& path) {
  doc_["outputs"].push_back(file_entry(role, path));
}

void RunManifest::seed(std::uint64_t s) { doc_["seed"] = s; }

Json RunManifest::to_json() const { return doc_; }

void RunManifest::write(const std::string& path) const { write_text_file(path, doc_.dump(2) + "\n"); }

}  // namespace spdekit::io
