// graphem: dataset generation, fitting, gamma search, benchmark tables and
// graph export for sparse transition-matrix estimation.

#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "graphem/cli/commands.hpp"
#include "graphem/cli/config.hpp"

namespace {

using graphem::cli::ExperimentConfig;

struct CommonOptions {
  std::string config_path;
  std::map<std::string, std::optional<std::string>> values;
};

std::string flag_names(const std::string& key) {
  std::string names = "--" + key;
  std::string dashed = key;
  for (char& c : dashed)
    if (c == '_') c = '-';
  if (dashed != key) names += ",--" + dashed;
  return names;
}

void add_common(CLI::App* sub, CommonOptions& opts) {
  sub->add_option("--config", opts.config_path, "JSON config file; flags override its values");
  for (const auto& key : graphem::cli::config_keys())
    sub->add_option(flag_names(key.name), opts.values[key.name], key.help);
}

ExperimentConfig resolve(const CommonOptions& opts) {
  ExperimentConfig config;
  if (!opts.config_path.empty()) config = graphem::cli::load_config_file(opts.config_path);
  for (const auto& [key, value] : opts.values)
    if (value) graphem::cli::set_field_from_string(config, key, *value);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse transition-matrix estimation for linear-Gaussian state-space models"};
  app.require_subcommand(1);

  // One option set per subcommand; CLI11 binds each to its own storage.
  std::map<std::string, CommonOptions> common;
  for (const char* name : {"generate", "fit", "gamma-search", "bench"}) common[name];

  auto* gen = app.add_subcommand("generate", "simulate datasets and write them as CSV");
  add_common(gen, common["generate"]);
  auto* fit = app.add_subcommand("fit", "fit GraphEM or MLEM on each realization");
  add_common(fit, common["fit"]);
  auto* search = app.add_subcommand("gamma-search", "grid search of the l1 weight on realization 0");
  add_common(search, common["gamma-search"]);
  auto* bench = app.add_subcommand("bench", "GraphEM vs MLEM over presets; writes CSV and a text table");
  add_common(bench, common["bench"]);

  std::string graph_in, graph_out;
  double graph_threshold = graphem::kDefaultEdgeThreshold;
  auto* graph = app.add_subcommand("export-graph", "write a matrix CSV as a DOT digraph");
  graph->add_option("input", graph_in, "matrix CSV")->required();
  graph->add_option("--out", graph_out, "DOT output path (stdout when omitted)");
  graph->add_option("--threshold", graph_threshold, "edge threshold");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return graphem::cli::cmd_generate(resolve(common["generate"]), std::cout);
    if (*fit) return graphem::cli::cmd_fit(resolve(common["fit"]), std::cout);
    if (*search) return graphem::cli::cmd_gamma_search(resolve(common["gamma-search"]), std::cout);
    if (*bench) return graphem::cli::cmd_bench(resolve(common["bench"]), std::cout);
    if (*graph) return graphem::cli::cmd_export_graph(graph_in, graph_out, graph_threshold, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
