// Independent reference computations for tests. Nothing here calls the
// recursions under test; everything is dense linear algebra on the joint
// Gaussian or plain first-order iterations.
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "graphem/em.hpp"
#include "graphem/model.hpp"

namespace graphem::testing {

struct JointGaussianResult {
  double neg_log_lik = 0.0;
  std::vector<Vector> smoothed_means;  // x_0..x_K given y_{1:K}
  std::vector<Matrix> smoothed_covs;
};

// Builds the covariance of (x_0..x_K, y_1..y_K) directly and conditions on y.
JointGaussianResult joint_gaussian_posterior(const LgssmModel& model, const Matrix& observations);

// Random SPD matrix with eigenvalues in [lo, hi].
Matrix random_spd(Index n, std::mt19937_64& rng, double lo = 0.2, double hi = 2.0);

// Random small model with a stable A.
LgssmModel random_model(Index nx, Index ny, std::mt19937_64& rng);

// x'[Sigma C; C' Phi]x-consistent statistics: the 2n x 2n joint second moment
// is drawn SPD so the majorizer is bounded below.
EStepStats random_stats(Index n, int seq_length, std::mt19937_64& rng);

// min f1(A) + gamma ||A||_1 by proximal gradient with step 1/L.
Matrix proximal_gradient(const EStepStats& stats, const Matrix& Q, double gamma, const Matrix& start,
                         int iterations);

// Elementwise soft threshold written as the scalar case analysis.
double scalar_soft_threshold(double x, double t);

// Records every phi trace handed to it and counts increases above `slack`.
class MonotonicityLedger {
 public:
  explicit MonotonicityLedger(double slack = 1e-8) : slack_(slack) {}
  // Returns the number of violations in this trace.
  int record(const FitTrace& trace, const std::string& label);
  int fits() const { return fits_; }
  int violations() const { return violations_; }
  const std::vector<std::string>& details() const { return details_; }

 private:
  double slack_;
  int fits_ = 0;
  int violations_ = 0;
  std::vector<std::string> details_;
};

// Largest increase phi_{i+1} - phi_i over a trace (<= 0 when monotone).
double worst_increase(const FitTrace& trace);

}  // namespace graphem::testing
