/// @file config.hpp
/// Experiment configuration shared by all subcommands.
///
/// Every field has a dotted name ("em.max_iters", "dataset.ensemble", ...).
/// The same name is the key path in the JSON config file and the long flag
/// on the command line. Precedence: defaults, then file, then flags.

#ifndef GRAPHEM_CLI_CONFIG_HPP
#define GRAPHEM_CLI_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphem/em.hpp"
#include "graphem/metrics.hpp"
#include "graphem/model.hpp"

namespace graphem::cli {

enum class Method { GraphEM, MLEM };

Method parse_method(std::string_view name);
std::string_view to_string(Method method);

/// Multipliers of K in the default gamma search grid.
const std::vector<double>& default_gamma_grid_factors();

struct ExperimentConfig {
  std::string preset = "A";
  std::vector<std::string> presets = {"A", "B", "C", "D"};  ///< bench only
  Method method = Method::GraphEM;
  /// Fixed penalty. Negative means "not set": fit and bench then run a search.
  double gamma = -1.0;
  /// Absolute gamma values; empty means default_gamma_grid_factors() * K.
  std::vector<double> gamma_grid;
  int realizations = 1;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::filesystem::path out = "out";
  std::filesystem::path data;  ///< directory written by `generate`; empty means use the preset
  double threshold = kDefaultEdgeThreshold;

  // dataset.* overrides applied on top of the preset
  BlockEnsemble ensemble = BlockEnsemble::Toeplitz;
  int seq_length = 0;  ///< 0 keeps the preset value
  std::vector<int> block_sizes;
  double sigma_q = 0.0, sigma_r = 0.0, sigma_p = 0.0;  ///< 0 keeps the preset value
  double spectral_bound = kDefaultSpectralBound;

  GraphemConfig fit;

  void validate() const;

  /// Preset `name` with the dataset.* overrides applied, seeded for realization r.
  DatasetSpec dataset_spec(std::string_view name, int r) const;
  DatasetSpec dataset_spec(int r) const { return dataset_spec(preset, r); }

  /// The grid actually searched for a problem with K observations, sorted ascending.
  std::vector<double> resolved_grid(int seq_length) const;
};

/// One configurable field.
struct ConfigKey {
  std::string name;
  std::string help;
};

/// All dotted names, in a stable order.
const std::vector<ConfigKey>& config_keys();

/// Sets the field named `key` from a JSON value. Throws std::invalid_argument
/// for unknown keys or values of the wrong type.
void set_field(ExperimentConfig& config, std::string_view key, const nlohmann::json& value);

/// Same, from command-line text. Lists are comma separated.
void set_field_from_string(ExperimentConfig& config, std::string_view key, const std::string& text);

/// Applies a (possibly nested) JSON object. Nested objects map to dotted names.
void apply_json(ExperimentConfig& config, const nlohmann::json& doc);

ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base = ExperimentConfig());

/// Full config as nested JSON; the inverse of apply_json.
nlohmann::json to_json(const ExperimentConfig& config);

nlohmann::json to_json(const DatasetSpec& spec);
DatasetSpec dataset_spec_from_json(const nlohmann::json& doc);

}  // namespace graphem::cli

#endif  // GRAPHEM_CLI_CONFIG_HPP
