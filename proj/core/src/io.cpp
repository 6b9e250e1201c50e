#include "graphem/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace graphem::io {

namespace {

double parse_double(const std::string& field) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin) throw std::runtime_error("CSV: cannot parse number '" + field + "'");
  while (*end == ' ' || *end == '\r') ++end;
  if (*end != '\0') throw std::runtime_error("CSV: trailing characters in '" + field + "'");
  return v;
}

std::vector<std::vector<std::string>> read_rows(std::istream& is) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  return is;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void write_matrix_csv(std::ostream& os, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

Matrix read_matrix_csv(std::istream& is) {
  const auto rows = read_rows(is);
  if (rows.empty()) return Matrix(0, 0);
  const std::size_t cols = rows.front().size();
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw std::runtime_error("matrix CSV: ragged rows");
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = parse_double(rows[i][j]);
  }
  return m;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const Index nx = traj.states.rows();
  const Index ny = traj.observations.rows();
  const Index steps = traj.observations.cols();
  if (traj.states.cols() != steps + 1) throw std::invalid_argument("trajectory: states must have K+1 columns");

  os << 'k';
  for (Index i = 1; i <= nx; ++i) os << ",x_" << i;
  for (Index i = 1; i <= ny; ++i) os << ",y_" << i;
  os << '\n';
  for (Index k = 0; k <= steps; ++k) {
    os << k;
    for (Index i = 0; i < nx; ++i) os << ',' << format_double(traj.states(i, k));
    for (Index i = 0; i < ny; ++i) {
      os << ',';
      if (k > 0) os << format_double(traj.observations(i, k - 1));
    }
    os << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& is) {
  auto rows = read_rows(is);
  if (rows.size() < 2) throw std::runtime_error("trajectory CSV: missing rows");
  const auto& header = rows.front();
  Index nx = 0, ny = 0;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c].rfind("x_", 0) == 0) ++nx;
    else if (header[c].rfind("y_", 0) == 0) ++ny;
    else throw std::runtime_error("trajectory CSV: unexpected column '" + header[c] + "'");
  }
  const Index steps = static_cast<Index>(rows.size()) - 2;
  Trajectory traj;
  traj.states.resize(nx, steps + 1);
  traj.observations.resize(ny, steps);
  for (Index k = 0; k <= steps; ++k) {
    const auto& row = rows[static_cast<std::size_t>(k) + 1];
    if (static_cast<Index>(row.size()) != 1 + nx + ny)
      throw std::runtime_error("trajectory CSV: wrong field count at k = " + std::to_string(k));
    for (Index i = 0; i < nx; ++i) traj.states(i, k) = parse_double(row[1 + i]);
    if (k == 0) continue;
    for (Index i = 0; i < ny; ++i) traj.observations(i, k - 1) = parse_double(row[1 + nx + i]);
  }
  return traj;
}

void write_trace_csv(std::ostream& os, const FitTrace& trace, bool include_timing) {
  os << "iteration,objective,inner_iterations";
  if (include_timing) os << ",elapsed_seconds";
  os << '\n';
  for (std::size_t i = 0; i < trace.objectives.size(); ++i) {
    os << i << ',' << format_double(trace.objectives[i]) << ',' << trace.inner_iters[i];
    if (include_timing) os << ',' << format_double(trace.elapsed[i]);
    os << '\n';
  }
}

std::vector<TraceRow> read_trace_csv(std::istream& is) {
  auto rows = read_rows(is);
  std::vector<TraceRow> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() < 3) throw std::runtime_error("trace CSV: short row");
    TraceRow t;
    t.iteration = std::stoi(row[0]);
    t.objective = parse_double(row[1]);
    t.inner_iterations = std::stoi(row[2]);
    if (row.size() > 3) t.elapsed = parse_double(row[3]);
    out.push_back(t);
  }
  return out;
}

void write_dot(std::ostream& os, const Matrix& a, double threshold, const std::string& name) {
  if (a.rows() != a.cols()) throw std::invalid_argument("write_dot: matrix must be square");
  os << "digraph " << name << " {\n";
  for (Index i = 0; i < a.rows(); ++i) os << "  " << i + 1 << ";\n";
  // Source-major order: all edges leaving node m, then m + 1, ...
  for (Index m = 0; m < a.cols(); ++m) {
    for (Index n = 0; n < a.rows(); ++n) {
      const double w = a(n, m);
      if (!(std::abs(w) > threshold)) continue;
      char label[32];
      std::snprintf(label, sizeof label, "%.3f", w);
      os << "  " << m + 1 << " -> " << n + 1 << " [label=\"" << label << "\"];\n";
    }
  }
  os << "}\n";
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  auto os = open_out(path);
  write_matrix_csv(os, m);
}

Matrix load_matrix(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_matrix_csv(is);
}

void save_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
  auto os = open_out(path);
  write_trajectory_csv(os, traj);
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_trajectory_csv(is);
}

}  // namespace graphem::io
