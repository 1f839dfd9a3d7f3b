#pragma once

#include <string>

#include <CLI11.hpp>

#include "spdekit/io.hpp"

namespace spdekit::cli {

using io::Json;

// Each register_* adds a subcommand whose callback does the work. Library
// errors propagate to main, which maps them onto exit codes.
void register_mesh(CLI::App& app);
void register_assemble(CLI::App& app);
void register_sample(CLI::App& app);
void register_fit(CLI::App& app);
void register_predict(CLI::App& app);
void register_serve(CLI::App& app);

/// `<output>.manifest.json` unless overridden.
std::string manifest_path(const std::string& output, const std::string& override_path);

/// Reads a neighbourhood graph from the ASCII format or, for *.json, the JSON form.
AdjacencyGraph load_graph(const std::string& path, bool zero_based);

Mesh load_mesh(const std::string& path);

}  // namespace spdekit::cli
