#include "graphem/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace graphem::cli {

using nlohmann::json;

Method parse_method(std::string_view name) {
  if (name == "graphem") return Method::GraphEM;
  if (name == "mlem") return Method::MLEM;
  throw std::invalid_argument("unknown method '" + std::string(name) + "' (expected graphem or mlem)");
}

std::string_view to_string(Method method) { return method == Method::GraphEM ? "graphem" : "mlem"; }

const std::vector<double>& default_gamma_grid_factors() {
  static const std::vector<double> factors = {0.01, 0.02, 0.03, 0.05, 0.1, 0.2, 0.3, 0.5,
                                              1.0,  2.0,  3.0,  5.0,  10.0, 20.0, 50.0};
  return factors;
}

void ExperimentConfig::validate() const {
  if (realizations < 1) throw std::invalid_argument("realizations must be >= 1");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  if (!(threshold >= 0.0)) throw std::invalid_argument("threshold must be >= 0");
  if (seq_length < 0) throw std::invalid_argument("dataset.seq_length must be >= 0");
  if (sigma_q < 0 || sigma_r < 0 || sigma_p < 0) throw std::invalid_argument("dataset sigmas must be >= 0");
  for (double g : gamma_grid)
    if (!(g >= 0.0)) throw std::invalid_argument("gamma grid values must be >= 0");
  for (int b : block_sizes)
    if (b <= 0) throw std::invalid_argument("dataset.block_sizes must be positive");
  if (presets.empty()) throw std::invalid_argument("presets must not be empty");
  fit.validate();
}

DatasetSpec ExperimentConfig::dataset_spec(std::string_view name, int r) const {
  DatasetSpec spec = dataset_preset(name, seed + static_cast<std::uint64_t>(r));
  spec.ensemble = ensemble;
  spec.spectral_bound = spectral_bound;
  if (seq_length > 0) spec.seq_length = seq_length;
  if (!block_sizes.empty()) spec.block_sizes = block_sizes;
  if (sigma_q > 0) spec.sigma_q = sigma_q;
  if (sigma_r > 0) spec.sigma_r = sigma_r;
  if (sigma_p > 0) spec.sigma_p = sigma_p;
  return spec;
}

std::vector<double> ExperimentConfig::resolved_grid(int k) const {
  std::vector<double> grid = gamma_grid;
  if (grid.empty())
    for (double f : default_gamma_grid_factors()) grid.push_back(f * k);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

namespace {

enum class Kind { Int, UInt, Double, Bool, String, DoubleList, IntList, StringList };

struct Field {
  ConfigKey key;
  Kind kind;
  std::function<void(ExperimentConfig&, const json&)> set;
  std::function<json(const ExperimentConfig&)> get;
};

template <typename T>
T as(const json& v, std::string_view key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config key '" + std::string(key) + "': wrong value type");
  }
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    auto add = [&f](std::string name, std::string help, Kind kind, auto set, auto get) {
      f.push_back({{std::move(name), std::move(help)}, kind, set, get});
    };
    add("preset", "dataset preset (A, B, C, D)", Kind::String,
        [](ExperimentConfig& c, const json& v) { c.preset = as<std::string>(v, "preset"); },
        [](const ExperimentConfig& c) { return json(c.preset); });
    add("presets", "bench: comma-separated preset list", Kind::StringList,
        [](ExperimentConfig& c, const json& v) { c.presets = as<std::vector<std::string>>(v, "presets"); },
        [](const ExperimentConfig& c) { return json(c.presets); });
    add("method", "graphem or mlem", Kind::String,
        [](ExperimentConfig& c, const json& v) { c.method = parse_method(as<std::string>(v, "method")); },
        [](const ExperimentConfig& c) { return json(std::string(to_string(c.method))); });
    add("gamma", "fixed l1 weight; unset means grid search", Kind::Double,
        [](ExperimentConfig& c, const json& v) { c.gamma = as<double>(v, "gamma"); },
        [](const ExperimentConfig& c) { return c.gamma < 0 ? json(nullptr) : json(c.gamma); });
    add("gamma_grid", "comma-separated absolute gamma values", Kind::DoubleList,
        [](ExperimentConfig& c, const json& v) { c.gamma_grid = as<std::vector<double>>(v, "gamma_grid"); },
        [](const ExperimentConfig& c) { return json(c.gamma_grid); });
    add("realizations", "number of realizations", Kind::Int,
        [](ExperimentConfig& c, const json& v) { c.realizations = as<int>(v, "realizations"); },
        [](const ExperimentConfig& c) { return json(c.realizations); });
    add("seed", "base seed; realization r uses seed + r", Kind::UInt,
        [](ExperimentConfig& c, const json& v) { c.seed = as<std::uint64_t>(v, "seed"); },
        [](const ExperimentConfig& c) { return json(c.seed); });
    add("jobs", "worker threads", Kind::Int,
        [](ExperimentConfig& c, const json& v) { c.jobs = as<int>(v, "jobs"); },
        [](const ExperimentConfig& c) { return json(c.jobs); });
    add("out", "output directory", Kind::String,
        [](ExperimentConfig& c, const json& v) { c.out = as<std::string>(v, "out"); },
        [](const ExperimentConfig& c) { return json(c.out.string()); });
    add("data", "dataset directory written by generate", Kind::String,
        [](ExperimentConfig& c, const json& v) { c.data = as<std::string>(v, "data"); },
        [](const ExperimentConfig& c) { return json(c.data.string()); });
    add("threshold", "edge threshold", Kind::Double,
        [](ExperimentConfig& c, const json& v) { c.threshold = as<double>(v, "threshold"); },
        [](const ExperimentConfig& c) { return json(c.threshold); });

    add("dataset.ensemble", "block entries: toeplitz or uniform", Kind::String,
        [](ExperimentConfig& c, const json& v) { c.ensemble = parse_block_ensemble(as<std::string>(v, "dataset.ensemble")); },
        [](const ExperimentConfig& c) { return json(std::string(to_string(c.ensemble))); });
    add("dataset.seq_length", "K; 0 keeps the preset", Kind::Int,
        [](ExperimentConfig& c, const json& v) { c.seq_length = as<int>(v, "dataset.seq_length"); },
        [](const ExperimentConfig& c) { return json(c.seq_length); });
    add("dataset.block_sizes", "comma-separated block sizes; empty keeps the preset", Kind::IntList,
        [](ExperimentConfig& c, const json& v) { c.block_sizes = as<std::vector<int>>(v, "dataset.block_sizes"); },
        [](const ExperimentConfig& c) { return json(c.block_sizes); });
    add("dataset.sigma_q", "state noise sd; 0 keeps the preset", Kind::Double,
        [](ExperimentConfig& c, const json& v) { c.sigma_q = as<double>(v, "dataset.sigma_q"); },
        [](const ExperimentConfig& c) { return json(c.sigma_q); });
    add("dataset.sigma_r", "observation noise sd; 0 keeps the preset", Kind::Double,
        [](ExperimentConfig& c, const json& v) { c.sigma_r = as<double>(v, "dataset.sigma_r"); },
        [](const ExperimentConfig& c) { return json(c.sigma_r); });
    add("dataset.sigma_p", "prior sd; 0 keeps the preset", Kind::Double,
        [](ExperimentConfig& c, const json& v) { c.sigma_p = as<double>(v, "dataset.sigma_p"); },
        [](const ExperimentConfig& c) { return json(c.sigma_p); });
    add("dataset.spectral_bound", "spectral norm bound of the true A", Kind::Double,
        [](ExperimentConfig& c, const json& v) { c.spectral_bound = as<double>(v, "dataset.spectral_bound"); },
        [](const ExperimentConfig& c) { return json(c.spectral_bound); });

    add("em.tolerance", "stop when |delta phi| <= tolerance", Kind::Double,
        [](ExperimentConfig& c, const json& v) { c.fit.em_tolerance = as<double>(v, "em.tolerance"); },
        [](const ExperimentConfig& c) { return json(c.fit.em_tolerance); });
    add("em.max_iters", "EM iteration cap", Kind::Int,
        [](ExperimentConfig& c, const json& v) { c.fit.em_max_iters = as<int>(v, "em.max_iters"); },
        [](const ExperimentConfig& c) { return json(c.fit.em_max_iters); });
    add("em.init_alpha", "initial A = alpha I", Kind::Double,
        [](ExperimentConfig& c, const json& v) { c.fit.init_alpha = as<double>(v, "em.init_alpha"); },
        [](const ExperimentConfig& c) { return json(c.fit.init_alpha); });
    add("em.adaptive_dr_tolerance", "tighten the inner tolerance with the outer decrease", Kind::Bool,
        [](ExperimentConfig& c, const json& v) { c.fit.adaptive_dr_tolerance = as<bool>(v, "em.adaptive_dr_tolerance"); },
        [](const ExperimentConfig& c) { return json(c.fit.adaptive_dr_tolerance); });
    add("em.normalize_mstep", "scale the M-step objective by its curvature", Kind::Bool,
        [](ExperimentConfig& c, const json& v) { c.fit.normalize_mstep = as<bool>(v, "em.normalize_mstep"); },
        [](const ExperimentConfig& c) { return json(c.fit.normalize_mstep); });
    add("dr.theta", "Douglas-Rachford step, in (0, 2)", Kind::Double,
        [](ExperimentConfig& c, const json& v) { c.fit.dr.theta = as<double>(v, "dr.theta"); },
        [](const ExperimentConfig& c) { return json(c.fit.dr.theta); });
    add("dr.tolerance", "inner objective-change tolerance", Kind::Double,
        [](ExperimentConfig& c, const json& v) { c.fit.dr.tolerance = as<double>(v, "dr.tolerance"); },
        [](const ExperimentConfig& c) { return json(c.fit.dr.tolerance); });
    add("dr.max_iters", "inner iteration cap", Kind::Int,
        [](ExperimentConfig& c, const json& v) { c.fit.dr.max_iters = as<int>(v, "dr.max_iters"); },
        [](const ExperimentConfig& c) { return json(c.fit.dr.max_iters); });
    return f;
  }();
  return table;
}

const Field& find_field(std::string_view key) {
  for (const auto& f : fields())
    if (f.key.name == key) return f;
  throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T v{};
  const char* b = text.data();
  const char* e = b + text.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && e[-1] == ' ') --e;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e)
    throw std::invalid_argument("config key '" + std::string(key) + "': cannot parse '" + std::string(text) + "'");
  return v;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void flatten(const json& doc, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string name = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) flatten(*it, name, out);
    else out.emplace_back(name, *it);
  }
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void set_field(ExperimentConfig& config, std::string_view key, const json& value) {
  const Field& f = find_field(key);
  if (value.is_null()) {
    if (key == "gamma") {
      config.gamma = -1.0;
      return;
    }
    throw std::invalid_argument("config key '" + std::string(key) + "' must not be null");
  }
  f.set(config, value);
}

void set_field_from_string(ExperimentConfig& config, std::string_view key, const std::string& text) {
  const Field& f = find_field(key);
  json v;
  switch (f.kind) {
    case Kind::Int: v = parse_number<int>(key, text); break;
    case Kind::UInt: v = parse_number<std::uint64_t>(key, text); break;
    case Kind::Double: v = parse_number<double>(key, text); break;
    case Kind::String: v = text; break;
    case Kind::Bool:
      if (text == "true" || text == "1") v = true;
      else if (text == "false" || text == "0") v = false;
      else throw std::invalid_argument("config key '" + std::string(key) + "': expected true or false");
      break;
    case Kind::DoubleList:
      v = json::array();
      for (const auto& s : split(text)) v.push_back(parse_number<double>(key, s));
      break;
    case Kind::IntList:
      v = json::array();
      for (const auto& s : split(text)) v.push_back(parse_number<int>(key, s));
      break;
    case Kind::StringList: v = split(text); break;
  }
  f.set(config, v);
}

void apply_json(ExperimentConfig& config, const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  std::vector<std::pair<std::string, json>> flat;
  flatten(doc, "", flat);
  for (const auto& [k, v] : flat) set_field(config, k, v);
}

ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config '" + path.string() + "': " + e.what());
  }
  apply_json(base, doc);
  return base;
}

json to_json(const ExperimentConfig& config) {
  json doc = json::object();
  for (const auto& f : fields()) {
    const std::string& name = f.key.name;
    json* node = &doc;
    std::size_t start = 0;
    for (std::size_t dot = name.find('.'); dot != std::string::npos; dot = name.find('.', start)) {
      node = &(*node)[name.substr(start, dot - start)];
      start = dot + 1;
    }
    (*node)[name.substr(start)] = f.get(config);
  }
  return doc;
}

json to_json(const DatasetSpec& spec) {
  return json{{"block_sizes", spec.block_sizes}, {"sigma_q", spec.sigma_q},
              {"sigma_r", spec.sigma_r},         {"sigma_p", spec.sigma_p},
              {"seq_length", spec.seq_length},   {"seed", spec.seed},
              {"spectral_bound", spec.spectral_bound},
              {"ensemble", std::string(to_string(spec.ensemble))}};
}

DatasetSpec dataset_spec_from_json(const json& doc) {
  DatasetSpec spec;
  try {
    spec.block_sizes = doc.at("block_sizes").get<std::vector<int>>();
    spec.sigma_q = doc.at("sigma_q").get<double>();
    spec.sigma_r = doc.at("sigma_r").get<double>();
    spec.sigma_p = doc.at("sigma_p").get<double>();
    spec.seq_length = doc.at("seq_length").get<int>();
    spec.seed = doc.at("seed").get<std::uint64_t>();
    spec.spectral_bound = doc.value("spectral_bound", kDefaultSpectralBound);
    spec.ensemble = parse_block_ensemble(doc.value("ensemble", std::string("toeplitz")));
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("dataset spec: ") + e.what());
  }
  return spec;
}

}  // namespace graphem::cli
