/// @file commands.hpp
/// The subcommands of the `graphem` tool, split into computations that
/// return plain data and thin wrappers that write files.

#ifndef GRAPHEM_CLI_COMMANDS_HPP
#define GRAPHEM_CLI_COMMANDS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "graphem/cli/config.hpp"
#include "graphem/metrics.hpp"

namespace graphem::cli {

/// Runs fn(0..n-1) on at most `jobs` threads. The first exception thrown by
/// any task is rethrown after all workers have joined.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

/// "r000", "r001", ...
std::string realization_tag(int r);

/// Realization r of `preset`, or of the dataset directory when config.data is set.
Dataset load_realization(const ExperimentConfig& config, const std::string& preset, int r);

/// Number of realizations stored under config.data (0 when unset).
int stored_realizations(const ExperimentConfig& config);

FitResult run_method(Method method, const Dataset& ds, const ExperimentConfig& config, double gamma);

struct GammaRow {
  double gamma = 0.0;
  bool ok = false;
  std::string error;
  double rmse = 0.0;
  EdgeScores edges;
  std::int64_t nonzeros = 0;
  int iterations = 0;
  bool converged = false;
  FitTrace trace;
};

struct GammaSearchResult {
  std::vector<GammaRow> rows;  ///< ascending gamma
  double best_gamma = 0.0;
  double gamma_max = 0.0;      ///< at the initial iterate, for reference
};

/// Fits GraphEM once per grid value and picks the highest accuracy; ties go
/// to the smallest gamma. Throws std::invalid_argument on an empty grid and
/// std::runtime_error when every grid point fails.
GammaSearchResult gamma_search(const ExperimentConfig& config, const Dataset& ds, const std::vector<double>& grid);

struct RealizationOutcome {
  int realization = 0;
  bool ok = false;
  std::string error;
  FitResult fit;
  RealizationScores scores;
};

std::vector<RealizationOutcome> fit_realizations(const ExperimentConfig& config, const std::string& preset,
                                                 Method method, double gamma, int count);

struct BenchRow {
  std::string dataset;
  Method method = Method::GraphEM;
  double gamma = 0.0;
  AggregateScores scores;
  int failures = 0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::vector<std::vector<RealizationOutcome>> outcomes;  ///< parallel to rows
};

BenchResult run_bench(const ExperimentConfig& config);

// Writers. All numeric fields use 17 significant digits.
void write_scores_csv(std::ostream& os, const std::string& dataset, Method method, double gamma,
                      const std::vector<RealizationOutcome>& outcomes);
void write_gamma_csv(std::ostream& os, const GammaSearchResult& result, int seq_length);
void write_bench_csv(std::ostream& os, const BenchResult& result);
void write_bench_realizations_csv(std::ostream& os, const BenchResult& result);
/// Aligned text in the layout of the reference results table.
void write_bench_table(std::ostream& os, const BenchResult& result);

// Subcommands; return the process exit status. `log` gets human-readable progress.
int cmd_generate(const ExperimentConfig& config, std::ostream& log);
int cmd_fit(const ExperimentConfig& config, std::ostream& log);
int cmd_gamma_search(const ExperimentConfig& config, std::ostream& log);
int cmd_bench(const ExperimentConfig& config, std::ostream& log);
int cmd_export_graph(const std::filesystem::path& input, const std::filesystem::path& output, double threshold,
                     std::ostream& log);

}  // namespace graphem::cli

#endif  // GRAPHEM_CLI_COMMANDS_HPP
