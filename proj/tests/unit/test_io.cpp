#include <gtest/gtest.h>

#include <limits>
#include <random>
#include <sstream>

#include "graphem/io.hpp"

using namespace graphem;

namespace {

int count_lines_with(const std::string& text, const std::string& needle) {
  int n = 0;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line))
    if (line.find(needle) != std::string::npos) ++n;
  return n;
}

}  // namespace

TEST(MatrixCsv, RoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  Matrix m(4, 3);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng) * std::pow(10.0, static_cast<double>(i % 7) - 3.0);
  m(0, 0) = std::numeric_limits<double>::denorm_min();
  m(1, 1) = -std::numeric_limits<double>::max();
  m(2, 2) = 0.1;
  std::stringstream ss;
  io::write_matrix_csv(ss, m);
  EXPECT_EQ(io::read_matrix_csv(ss), m);
}

TEST(MatrixCsv, RejectsRaggedAndGarbage) {
  std::stringstream ragged("1,2\n3\n");
  EXPECT_THROW(io::read_matrix_csv(ragged), std::runtime_error);
  std::stringstream garbage("1,x\n");
  EXPECT_THROW(io::read_matrix_csv(garbage), std::runtime_error);
}

TEST(TrajectoryCsv, LayoutAndRoundTrip) {
  auto spec = dataset_preset("A", 2);
  spec.seq_length = 25;
  const auto ds = make_dataset(spec);
  std::stringstream ss;
  io::write_trajectory_csv(ss, ds.trajectory);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "k,x_1,x_2,x_3,x_4,x_5,x_6,x_7,x_8,x_9,y_1,y_2,y_3,y_4,y_5,y_6,y_7,y_8,y_9");
  const auto back = io::read_trajectory_csv(ss);
  EXPECT_EQ(back.states, ds.trajectory.states);
  EXPECT_EQ(back.observations, ds.trajectory.observations);
}

TEST(TraceCsv, RoundTrip) {
  FitTrace t;
  t.objectives = {10.5, 3.25, 3.0};
  t.inner_iters = {0, 12, 7};
  t.elapsed = {0.0, 0.01, 0.02};
  t.iterates.resize(3);
  std::stringstream ss;
  io::write_trace_csv(ss, t);
  const auto rows = io::read_trace_csv(ss);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].iteration, 1);
  EXPECT_EQ(rows[1].objective, 3.25);
  EXPECT_EQ(rows[2].inner_iterations, 7);
  EXPECT_EQ(rows[2].elapsed, 0.02);

  std::stringstream no_time;
  io::write_trace_csv(no_time, t, false);
  EXPECT_EQ(no_time.str().substr(0, no_time.str().find('\n')), "iteration,objective,inner_iterations");
}

TEST(Dot, IdentityHasSelfLoops) {
  std::stringstream ss;
  io::write_dot(ss, Matrix::Identity(3, 3));
  EXPECT_EQ(count_lines_with(ss.str(), "->"), 3);
  EXPECT_NE(ss.str().find("1 -> 1 [label=\"1.000\"]"), std::string::npos);
}

TEST(Dot, DenseBlocks) {
  const std::vector<int> blocks = {3, 3, 3};
  std::stringstream ss;
  io::write_dot(ss, 0.5 * block_mask(blocks));
  EXPECT_EQ(count_lines_with(ss.str(), "->"), 27);
}

TEST(Dot, ZeroMatrixKeepsNodes) {
  std::stringstream ss;
  io::write_dot(ss, Matrix::Zero(9, 9));
  EXPECT_EQ(count_lines_with(ss.str(), "->"), 0);
  EXPECT_EQ(count_lines_with(ss.str(), ";"), 9);
  EXPECT_THROW(io::write_dot(ss, Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST(Dot, EdgeDirectionAndRounding) {
  Matrix a = Matrix::Zero(2, 2);
  a(1, 0) = -0.12345;  // x_1 drives x_2
  std::stringstream ss;
  io::write_dot(ss, a);
  EXPECT_NE(ss.str().find("1 -> 2 [label=\"-0.123\"]"), std::string::npos);
}
