#include "graphem/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "graphem/io.hpp"

namespace graphem::cli {

using nlohmann::json;
namespace fs = std::filesystem;

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  const int workers = std::max(1, std::min(jobs, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::mutex mu;
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(mu);
            if (!first) first = std::current_exception();
          }
        }
      });
    }
  }
  if (first) std::rethrow_exception(first);
}

std::string realization_tag(int r) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "r%03d", r);
  return buf;
}

namespace {

std::string num(double v) { return io::format_double(v); }

std::ofstream open_file(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return os;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw std::runtime_error("cannot create output directory '" + dir.string() + "'");
}

void write_json(const fs::path& path, const json& doc) {
  auto os = open_file(path);
  os << doc.dump(2) << '\n';
}

json read_manifest(const fs::path& dir) {
  std::ifstream is(dir / "manifest.json");
  if (!is) throw std::runtime_error("no manifest.json under '" + dir.string() + "'");
  return json::parse(is);
}

LgssmModel model_for(const DatasetSpec& spec, const Matrix& a) {
  const Index n = a.rows();
  LgssmModel m;
  m.A = a;
  m.H = Matrix::Identity(n, n);
  m.Q = spec.sigma_q * spec.sigma_q * Matrix::Identity(n, n);
  m.R = spec.sigma_r * spec.sigma_r * Matrix::Identity(n, n);
  m.P0 = spec.sigma_p * spec.sigma_p * Matrix::Identity(n, n);
  m.x0_mean = Vector::Zero(n);
  return m;
}

// Output directory and thread count do not affect results; leaving them out keeps manifests comparable.
json manifest_config(const ExperimentConfig& config) {
  json doc = to_json(config);
  doc.erase("out");
  doc.erase("jobs");
  return doc;
}

bool better(const EdgeScores& a, const EdgeScores& b) { return a.tp + a.tn > b.tp + b.tn; }

void write_edge_fields(std::ostream& os, double rmse, const EdgeScores& e) {
  os << num(rmse) << ',' << num(e.accuracy) << ',' << num(e.precision) << ',' << num(e.recall) << ','
     << num(e.specificity) << ',' << num(e.f1);
}

void write_summary(std::ostream& os, const Summary& s) { os << num(s.mean) << ',' << num(s.sd); }

AggregateScores aggregate_ok(const std::vector<RealizationOutcome>& outcomes) {
  std::vector<RealizationScores> ok;
  for (const auto& o : outcomes)
    if (o.ok) ok.push_back(o.scores);
  if (ok.empty()) return {};
  return aggregate(ok);
}

double choose_gamma(const ExperimentConfig& config, const std::string& preset, std::ostream* log,
                    GammaSearchResult* search_out) {
  if (config.gamma >= 0.0) return config.gamma;
  const Dataset ds = load_realization(config, preset, 0);
  const auto grid = config.resolved_grid(static_cast<int>(ds.trajectory.length()));
  auto result = gamma_search(config, ds, grid);
  if (log) *log << "preset " << preset << ": gamma search picked " << num(result.best_gamma) << '\n';
  const double best = result.best_gamma;
  if (search_out) *search_out = std::move(result);
  return best;
}

}  // namespace

int stored_realizations(const ExperimentConfig& config) {
  if (config.data.empty()) return 0;
  return static_cast<int>(read_manifest(config.data).at("realizations").size());
}

Dataset load_realization(const ExperimentConfig& config, const std::string& preset, int r) {
  if (config.data.empty()) return make_dataset(config.dataset_spec(preset, r));

  const json manifest = read_manifest(config.data);
  const auto& list = manifest.at("realizations");
  if (r < 0 || r >= static_cast<int>(list.size()))
    throw std::out_of_range("realization " + std::to_string(r) + " not present in '" + config.data.string() + "'");
  const DatasetSpec spec = dataset_spec_from_json(list[static_cast<std::size_t>(r)].at("spec"));
  Dataset ds;
  ds.true_A = io::load_matrix(config.data / ("true_A_" + realization_tag(r) + ".csv"));
  ds.trajectory = io::load_trajectory(config.data / ("trajectory_" + realization_tag(r) + ".csv"));
  ds.model = model_for(spec, ds.true_A);
  require_valid(ds.model);
  if (ds.trajectory.observations.rows() != ds.model.obs_dim())
    throw std::runtime_error("trajectory and true A dimensions disagree");
  return ds;
}

FitResult run_method(Method method, const Dataset& ds, const ExperimentConfig& config, double gamma) {
  const auto known = KnownParameters::from_model(ds.model);
  GraphemConfig fc = config.fit;
  fc.gamma = gamma;
  return method == Method::GraphEM ? graphem_fit(ds.trajectory.observations, known, fc)
                                   : mlem_fit(ds.trajectory.observations, known, fc);
}

GammaSearchResult gamma_search(const ExperimentConfig& config, const Dataset& ds, const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("gamma search: empty grid");
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());

  GammaSearchResult result;
  result.rows.resize(sorted.size());
  parallel_for(static_cast<int>(sorted.size()), config.jobs, [&](int i) {
    GammaRow& row = result.rows[static_cast<std::size_t>(i)];
    row.gamma = sorted[static_cast<std::size_t>(i)];
    try {
      const FitResult fit = run_method(Method::GraphEM, ds, config, row.gamma);
      row.rmse = rmse(fit.A_hat, ds.true_A);
      row.edges = edge_scores(fit.A_hat, ds.true_A, config.threshold);
      row.nonzeros = count_edges(fit.A_hat, config.threshold);
      row.iterations = fit.trace.iterations();
      row.converged = fit.trace.converged;
      row.trace = fit.trace;
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });

  const GammaRow* best = nullptr;
  for (const auto& row : result.rows)
    if (row.ok && (!best || better(row.edges, best->edges))) best = &row;
  if (!best) throw std::runtime_error("gamma search: every grid point failed");
  result.best_gamma = best->gamma;

  const auto known = KnownParameters::from_model(ds.model);
  const Matrix a0 = config.fit.A0 ? *config.fit.A0 : default_initializer(ds.model.state_dim(), config.fit.init_alpha);
  result.gamma_max = gamma_max(estep_at(ds.trajectory.observations, known, a0), known.Q);
  return result;
}

std::vector<RealizationOutcome> fit_realizations(const ExperimentConfig& config, const std::string& preset,
                                                 Method method, double gamma, int count) {
  std::vector<RealizationOutcome> out(static_cast<std::size_t>(count));
  parallel_for(count, config.jobs, [&](int r) {
    RealizationOutcome& o = out[static_cast<std::size_t>(r)];
    o.realization = r;
    try {
      const Dataset ds = load_realization(config, preset, r);
      o.fit = run_method(method, ds, config, gamma);
      o.scores.rmse = rmse(o.fit.A_hat, ds.true_A);
      o.scores.edges = edge_scores(o.fit.A_hat, ds.true_A, config.threshold);
      o.ok = true;
    } catch (const FitError& e) {
      o.error = std::string(e.what()) + " (EM iteration " + std::to_string(e.iteration()) + ")";
    } catch (const std::exception& e) {
      o.error = e.what();
    }
  });
  return out;
}

BenchResult run_bench(const ExperimentConfig& config) {
  BenchResult result;
  for (const auto& preset : config.presets) {
    const double gamma = choose_gamma(config, preset, nullptr, nullptr);
    for (Method m : {Method::GraphEM, Method::MLEM}) {
      const double g = m == Method::GraphEM ? gamma : 0.0;
      auto outcomes = fit_realizations(config, preset, m, g, config.realizations);
      BenchRow row;
      row.dataset = preset;
      row.method = m;
      row.gamma = g;
      row.scores = aggregate_ok(outcomes);
      row.failures = static_cast<int>(std::count_if(outcomes.begin(), outcomes.end(), [](const auto& o) { return !o.ok; }));
      result.rows.push_back(std::move(row));
      result.outcomes.push_back(std::move(outcomes));
    }
  }
  return result;
}

void write_scores_csv(std::ostream& os, const std::string& dataset, Method method, double gamma,
                      const std::vector<RealizationOutcome>& outcomes) {
  os << "dataset,method,realization,gamma,status,rmse,accuracy,precision,recall,specificity,f1,tp,fp,tn,fn,"
        "iterations,converged\n";
  for (const auto& o : outcomes) {
    os << dataset << ',' << to_string(method) << ',' << o.realization << ',' << num(gamma) << ',';
    if (!o.ok) {
      std::string msg = o.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      os << "failed: " << msg << ",,,,,,,,,,,,\n";
      continue;
    }
    const auto& e = o.scores.edges;
    os << "ok,";
    write_edge_fields(os, o.scores.rmse, e);
    os << ',' << e.tp << ',' << e.fp << ',' << e.tn << ',' << e.fn << ',' << o.fit.trace.iterations() << ','
       << (o.fit.trace.converged ? 1 : 0) << '\n';
  }
  const AggregateScores agg = aggregate_ok(outcomes);
  for (int which = 0; which < 2; ++which) {
    auto pick = [which](const Summary& s) { return num(which == 0 ? s.mean : s.sd); };
    os << dataset << ',' << to_string(method) << ',' << (which == 0 ? "mean" : "sd") << ',' << num(gamma) << ','
       << "n=" << agg.count << ',' << pick(agg.rmse) << ',' << pick(agg.accuracy) << ',' << pick(agg.precision) << ','
       << pick(agg.recall) << ',' << pick(agg.specificity) << ',' << pick(agg.f1) << ",,,,,,\n";
  }
}

void write_gamma_csv(std::ostream& os, const GammaSearchResult& result, int seq_length) {
  os << "gamma,gamma_over_K,status,rmse,accuracy,precision,recall,specificity,f1,nonzeros,iterations,converged\n";
  for (const auto& r : result.rows) {
    os << num(r.gamma) << ',' << num(r.gamma / seq_length) << ',';
    if (!r.ok) {
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      os << "failed: " << msg << ",,,,,,,,,\n";
      continue;
    }
    os << "ok,";
    write_edge_fields(os, r.rmse, r.edges);
    os << ',' << r.nonzeros << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

void write_bench_csv(std::ostream& os, const BenchResult& result) {
  os << "dataset,method,gamma,realizations,failures,rmse_mean,rmse_sd,accuracy_mean,accuracy_sd,precision_mean,"
        "precision_sd,recall_mean,recall_sd,specificity_mean,specificity_sd,f1_mean,f1_sd\n";
  for (const auto& row : result.rows) {
    const auto& s = row.scores;
    os << row.dataset << ',' << to_string(row.method) << ',' << num(row.gamma) << ',' << s.count << ','
       << row.failures;
    for (const Summary* m : {&s.rmse, &s.accuracy, &s.precision, &s.recall, &s.specificity, &s.f1}) {
      os << ',';
      write_summary(os, *m);
    }
    os << '\n';
  }
}

void write_bench_realizations_csv(std::ostream& os, const BenchResult& result) {
  os << "dataset,method,realization,gamma,status,rmse,accuracy,precision,recall,specificity,f1,iterations,converged\n";
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& row = result.rows[i];
    for (const auto& o : result.outcomes[i]) {
      os << row.dataset << ',' << to_string(row.method) << ',' << o.realization << ',' << num(row.gamma) << ',';
      if (!o.ok) {
        os << "failed,,,,,,,,\n";
        continue;
      }
      os << "ok,";
      write_edge_fields(os, o.scores.rmse, o.scores.edges);
      os << ',' << o.fit.trace.iterations() << ',' << (o.fit.trace.converged ? 1 : 0) << '\n';
    }
  }
}

void write_bench_table(std::ostream& os, const BenchResult& result) {
  const char* header[] = {"Dataset", "Method", "RMSE", "Accuracy", "Precision", "Recall", "Specificity", "F1"};
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %-8s %8s %9s %10s %8s %12s %8s\n", header[0], header[1], header[2], header[3],
                header[4], header[5], header[6], header[7]);
  os << line;
  for (const auto& row : result.rows) {
    const auto& s = row.scores;
    std::snprintf(line, sizeof line, "%-8s %-8s %8.3f %9.4f %10.4f %8.4f %12.4f %8.4f\n", row.dataset.c_str(),
                  row.method == Method::GraphEM ? "GraphEM" : "MLEM", s.rmse.mean, s.accuracy.mean, s.precision.mean,
                  s.recall.mean, s.specificity.mean, s.f1.mean);
    os << line;
  }
}

int cmd_generate(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  ensure_dir(config.out);
  json manifest;
  manifest["command"] = "generate";
  manifest["preset"] = config.preset;
  manifest["config"] = manifest_config(config);
  manifest["realizations"] = json::array();
  for (int r = 0; r < config.realizations; ++r) {
    const DatasetSpec spec = config.dataset_spec(r);
    const Dataset ds = make_dataset(spec);
    io::save_matrix(config.out / ("true_A_" + realization_tag(r) + ".csv"), ds.true_A);
    io::save_trajectory(config.out / ("trajectory_" + realization_tag(r) + ".csv"), ds.trajectory);
    manifest["realizations"].push_back({{"index", r}, {"seed", spec.seed}, {"spec", to_json(spec)}});
  }
  write_json(config.out / "manifest.json", manifest);
  log << "wrote " << config.realizations << " realization(s) of preset " << config.preset << " to " << config.out.string()
      << '\n';
  return 0;
}

int cmd_fit(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  ensure_dir(config.out);
  std::string preset = config.preset;
  int count = config.realizations;
  if (!config.data.empty()) {
    preset = read_manifest(config.data).value("preset", preset);
    count = stored_realizations(config);
  }

  double gamma = 0.0;
  json manifest;
  manifest["command"] = "fit";
  manifest["config"] = manifest_config(config);
  if (config.method == Method::GraphEM) {
    GammaSearchResult search;
    gamma = choose_gamma(config, preset, &log, &search);
    if (!search.rows.empty()) {
      const int k = static_cast<int>(load_realization(config, preset, 0).trajectory.length());
      auto os = open_file(config.out / "gamma_search.csv");
      write_gamma_csv(os, search, k);
      manifest["gamma_grid"] = config.resolved_grid(k);
    }
  }
  manifest["gamma"] = gamma;

  const auto outcomes = fit_realizations(config, preset, config.method, gamma, count);
  int ok = 0;
  manifest["realizations"] = json::array();
  for (const auto& o : outcomes) {
    const std::string tag = realization_tag(o.realization);
    json entry{{"index", o.realization}, {"status", o.ok ? "ok" : "failed"}};
    if (o.ok) {
      ++ok;
      io::save_matrix(config.out / ("A_hat_" + tag + ".csv"), o.fit.A_hat);
      auto os = open_file(config.out / ("trace_" + tag + ".csv"));
      io::write_trace_csv(os, o.fit.trace);
      entry["iterations"] = o.fit.trace.iterations();
      entry["converged"] = o.fit.trace.converged;
    } else {
      entry["error"] = o.error;
      log << "realization " << o.realization << " failed: " << o.error << '\n';
    }
    manifest["realizations"].push_back(entry);
  }
  {
    auto os = open_file(config.out / "scores.csv");
    write_scores_csv(os, preset, config.method, gamma, outcomes);
  }
  write_json(config.out / "manifest.json", manifest);

  const AggregateScores agg = aggregate_ok(outcomes);
  log << to_string(config.method) << " on " << preset << ": " << ok << "/" << count << " realization(s) ok";
  if (ok) log << ", mean rmse " << std::setprecision(4) << agg.rmse.mean << ", mean accuracy " << agg.accuracy.mean;
  log << '\n';
  return ok > 0 ? 0 : 1;
}

int cmd_gamma_search(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  ensure_dir(config.out);
  const Dataset ds = load_realization(config, config.preset, 0);
  const int k = static_cast<int>(ds.trajectory.length());
  const auto grid = config.resolved_grid(k);
  const auto result = gamma_search(config, ds, grid);
  {
    auto os = open_file(config.out / "gamma_search.csv");
    write_gamma_csv(os, result, k);
  }
  json best{{"command", "gamma-search"},
            {"best_gamma", result.best_gamma},
            {"gamma_max_at_init", result.gamma_max},
            {"grid", grid},
            {"config", manifest_config(config)}};
  write_json(config.out / "best_gamma.json", best);
  log << "best gamma " << io::format_double(result.best_gamma) << " (gamma/K = " << result.best_gamma / k << ")\n";
  return 0;
}

int cmd_bench(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  ensure_dir(config.out);
  const BenchResult result = run_bench(config);
  {
    auto os = open_file(config.out / "bench.csv");
    write_bench_csv(os, result);
  }
  {
    auto os = open_file(config.out / "bench_realizations.csv");
    write_bench_realizations_csv(os, result);
  }
  std::ostringstream table;
  write_bench_table(table, result);
  {
    auto os = open_file(config.out / "bench.txt");
    os << table.str();
  }
  log << table.str();
  return 0;
}

int cmd_export_graph(const fs::path& input, const fs::path& output, double threshold, std::ostream& log) {
  const Matrix a = io::load_matrix(input);
  if (a.rows() != a.cols() || a.size() == 0)
    throw std::invalid_argument("export-graph: '" + input.string() + "' is not a square matrix");
  if (output.empty()) {
    io::write_dot(log, a, threshold);
    return 0;
  }
  auto os = open_file(output);
  io::write_dot(os, a, threshold);
  log << "wrote " << count_edges(a, threshold) << " edge(s) to " << output.string() << '\n';
  return 0;
}

}  // namespace graphem::cli
