/// @file inference.hpp
/// Exact Kalman filter, RTS smoother and the MAP objective
///
///   phi_K(A) = gamma * ||A||_1 + sum_k [ 0.5 log|2 pi S_k| + 0.5 z_k' S_k^{-1} z_k ].

#ifndef GRAPHEM_INFERENCE_HPP
#define GRAPHEM_INFERENCE_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "graphem/model.hpp"

namespace graphem {

/// Raised when a factorization inside a recursion is singular or too badly
/// conditioned to trust. `step()` is the time index k where it happened.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, int step) : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Reciprocal condition estimate below which a factorization is rejected.
inline constexpr double kMinReciprocalCondition = 1e-14;

struct FilterPass {
  std::vector<Vector> means;             ///< m_k, k = 0..K (m_0 = x0_mean)
  std::vector<Matrix> covariances;       ///< P_k, k = 0..K
  std::vector<Vector> innovations;       ///< z_k, k = 1..K stored at index k-1
  std::vector<Matrix> innovation_covs;   ///< S_k, k = 1..K stored at index k-1
  double neg_log_lik = 0.0;              ///< -log p(y_{1:K} | A)

  int length() const { return static_cast<int>(innovations.size()); }
};

struct SmootherPass {
  std::vector<Vector> smoothed_means;  ///< m^s_k, k = 0..K
  std::vector<Matrix> smoothed_covs;   ///< P^s_k, k = 0..K
  std::vector<Matrix> gains;           ///< G_k,   k = 0..K-1

  int length() const { return static_cast<int>(gains.size()); }
};

/// `observations` holds y_k in column k-1.
FilterPass kalman_filter(const LgssmModel& model, const Matrix& observations);

SmootherPass rts_smoother(const LgssmModel& model, const FilterPass& filter);

/// Elementwise absolute sum.
inline double l1_norm(const Matrix& m) { return m.cwiseAbs().sum(); }

double map_objective(const LgssmModel& model, const Matrix& observations, double gamma);

}  // namespace graphem

#endif  // GRAPHEM_INFERENCE_HPP
