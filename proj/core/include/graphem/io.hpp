/// @file io.hpp
/// CSV and DOT serialization. Numbers are written with 17 significant digits
/// so every double survives a write/read round trip unchanged.

#ifndef GRAPHEM_IO_HPP
#define GRAPHEM_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "graphem/em.hpp"
#include "graphem/metrics.hpp"
#include "graphem/model.hpp"

namespace graphem::io {

std::string format_double(double value);

/// Splits one CSV line on commas. No quoting support; none of our files need it.
std::vector<std::string> split_csv_line(const std::string& line);

/// Headerless, one matrix row per line.
void write_matrix_csv(std::ostream& os, const Matrix& m);
Matrix read_matrix_csv(std::istream& is);

/// Header `k,x_1..x_Nx,y_1..y_Ny`; row k = 0 carries x_0 and empty y fields.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& is);

/// Header `iteration,objective,inner_iterations,elapsed_seconds`.
void write_trace_csv(std::ostream& os, const FitTrace& trace, bool include_timing = true);

struct TraceRow {
  int iteration = 0;
  double objective = 0.0;
  int inner_iterations = 0;
  double elapsed = 0.0;
};
std::vector<TraceRow> read_trace_csv(std::istream& is);

/// Directed graph with one node per state dimension and an edge m -> n for
/// every |A(n, m)| > threshold, labelled with the weight to 3 decimals.
void write_dot(std::ostream& os, const Matrix& a, double threshold = kDefaultEdgeThreshold,
               const std::string& name = "graphem");

/// File helpers; throw std::runtime_error when the path cannot be opened.
void save_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix load_matrix(const std::filesystem::path& path);
void save_trajectory(const std::filesystem::path& path, const Trajectory& traj);
Trajectory load_trajectory(const std::filesystem::path& path);

}  // namespace graphem::io

#endif  // GRAPHEM_IO_HPP
