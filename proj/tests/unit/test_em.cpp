#include <gtest/gtest.h>

#include <random>

#include "fit_checks.hpp"
#include "graphem/em.hpp"
#include "graphem/metrics.hpp"
#include "oracles.hpp"

using namespace graphem;

namespace {

Dataset small_dataset(const std::string& preset, std::uint64_t seed, int k) {
  auto spec = dataset_preset(preset, seed);
  spec.seq_length = k;
  return make_dataset(spec);
}

}  // namespace

TEST(Initializer, ScaledIdentity) {
  const Matrix a = default_initializer(3, 0.1);
  EXPECT_EQ(a, 0.1 * Matrix::Identity(3, 3));
  EXPECT_NEAR(spectral_norm(a), 0.1, 1e-15);
  EXPECT_THROW(default_initializer(0), std::invalid_argument);
}

TEST(MlemStep, ScalarDivision) {
  EStepStats st;
  st.Sigma = st.Phi = Matrix::Ones(1, 1);
  st.C = Matrix::Constant(1, 1, 0.5);
  st.seq_length = 10;
  EXPECT_NEAR(mlem_mstep(st)(0, 0), 0.5, 1e-15);
}

TEST(MlemStep, SolvesNormalEquations) {
  std::mt19937_64 rng(1);
  const auto st = graphem::testing::random_stats(4, 30, rng);
  const Matrix a = mlem_mstep(st);
  EXPECT_LT((a * st.Phi - st.C).norm(), 1e-10);
}

TEST(GammaMax, ZeroAtAndAboveThreshold) {
  std::mt19937_64 rng(2);
  const auto st = graphem::testing::random_stats(3, 40, rng);
  const Matrix q = graphem::testing::random_spd(3, rng);
  const double gmax = gamma_max(st, q);
  DrConfig dr;
  dr.tolerance = 1e-10;
  const Matrix start = 0.1 * Matrix::Identity(3, 3);
  EXPECT_EQ(graphem_mstep(st, q, gmax * 1.0001, start, dr).A, Matrix::Zero(3, 3));
  EXPECT_EQ(graphem_mstep(st, q, gmax * 5.0, start, dr).A, Matrix::Zero(3, 3));
  EXPECT_GT(count_edges(graphem_mstep(st, q, gmax * 0.9, start, dr).A), 0);
}

TEST(GraphemStep, NeverRaisesMajorizer) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto st = graphem::testing::random_stats(3, 25, rng);
    const Matrix q = graphem::testing::random_spd(3, rng);
    const Matrix prev = graphem::testing::random_spd(3, rng, 0.05, 0.5);
    const double gamma = 0.1 * trial * gamma_max(st, q);
    DrConfig dr;
    dr.max_iters = 3;  // deliberately sloppy
    const auto r = graphem_mstep(st, q, gamma, prev, dr);
    EXPECT_LE(majorizer_value(r.A, st, q, gamma), majorizer_value(prev, st, q, gamma) + 1e-9);
  }
}

TEST(GraphemFit, ZeroGammaFirstIterationIsClosedForm) {
  const auto ds = small_dataset("A", 4, 300);
  const auto known = KnownParameters::from_model(ds.model);
  GraphemConfig c;
  c.em_max_iters = 1;
  c.dr.tolerance = 1e-14;
  c.dr.max_iters = 20000;
  const auto fit = graphem_fit(ds.trajectory.observations, known, c);
  expect_monotone(fit.trace);
  const auto st = estep_at(ds.trajectory.observations, known, default_initializer(9));
  EXPECT_LT((fit.A_hat - mlem_mstep(st)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(GraphemFit, ConvergesWithinBudgetOnPresetA) {
  const auto ds = small_dataset("A", 7, 1000);
  GraphemConfig c;
  c.gamma = 0.2 * 1000;
  const auto fit = graphem_fit(ds.trajectory.observations, KnownParameters::from_model(ds.model), c);
  expect_monotone(fit.trace);
  EXPECT_TRUE(fit.trace.converged);
  EXPECT_LE(fit.trace.iterations(), 50);
  EXPECT_EQ(fit.trace.objectives.size(), fit.trace.iterates.size());
  EXPECT_EQ(fit.trace.inner_iters.front(), 0);
  EXPECT_GT(fit.trace.inner_iters.back(), 0);
  // sparser than the dense MLEM answer and still better than chance
  const auto e = edge_scores(fit.A_hat, ds.true_A);
  EXPECT_GT(e.accuracy, 0.6);
  EXPECT_LT(count_edges(fit.A_hat), 81);
}

TEST(GraphemFit, TraceObjectiveMatchesMapObjective) {
  const auto ds = small_dataset("B", 2, 200);
  const auto known = KnownParameters::from_model(ds.model);
  GraphemConfig c;
  c.gamma = 50.0;
  c.em_max_iters = 5;
  const auto fit = graphem_fit(ds.trajectory.observations, known, c);
  expect_monotone(fit.trace);
  for (std::size_t i = 0; i < fit.trace.iterates.size(); ++i)
    EXPECT_NEAR(fit.trace.objectives[i],
                map_objective(known.with_transition(fit.trace.iterates[i]), ds.trajectory.observations, c.gamma),
                1e-9 * std::abs(fit.trace.objectives[i]));
}

TEST(MlemFit, DenseEstimateOnPresetA) {
  const auto ds = small_dataset("A", 1, 1000);
  const auto fit = mlem_fit(ds.trajectory.observations, KnownParameters::from_model(ds.model), GraphemConfig{});
  expect_monotone(fit.trace);
  EXPECT_TRUE(fit.trace.converged);
  EXPECT_EQ(count_edges(fit.A_hat), 81);
  const auto e = edge_scores(fit.A_hat, ds.true_A);
  EXPECT_NEAR(e.precision, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(e.recall, 1.0);
  EXPECT_EQ(e.specificity, 0.0);
}

TEST(MlemFit, RecoversTruthOnLongSeries) {
  auto spec = dataset_preset("B", 9);
  spec.seq_length = 20000;
  const auto ds = make_dataset(spec);
  const auto fit = mlem_fit(ds.trajectory.observations, KnownParameters::from_model(ds.model), GraphemConfig{});
  expect_monotone(fit.trace);
  EXPECT_LT(rmse(fit.A_hat, ds.true_A), 0.1);
}

TEST(Fit, CustomInitialPoint) {
  const auto ds = small_dataset("A", 3, 100);
  GraphemConfig c;
  c.A0 = 0.3 * Matrix::Identity(9, 9);
  c.em_max_iters = 2;
  const auto fit = mlem_fit(ds.trajectory.observations, KnownParameters::from_model(ds.model), c);
  expect_monotone(fit.trace);
  EXPECT_EQ(fit.trace.iterates.front(), *c.A0);
  c.A0 = Matrix::Identity(3, 3);
  EXPECT_THROW(mlem_fit(ds.trajectory.observations, KnownParameters::from_model(ds.model), c), std::invalid_argument);
}

TEST(Fit, NumericalFailureReportsIteration) {
  const auto ds = small_dataset("A", 3, 50);
  auto known = KnownParameters::from_model(ds.model);
  known.R = Matrix::Identity(9, 9);
  known.R(0, 0) = 1e-22;
  known.H = Matrix::Zero(9, 9);
  try {
    graphem_fit(ds.trajectory.observations, known, GraphemConfig{});
    FAIL() << "expected FitError";
  } catch (const FitError& e) {
    EXPECT_EQ(e.iteration(), 0);
  }
}

TEST(Fit, ConfigValidation) {
  GraphemConfig c;
  c.gamma = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = GraphemConfig{};
  c.em_max_iters = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = GraphemConfig{};
  c.dr.theta = 2.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}
