/// @file em.hpp
/// EM drivers for the transition matrix: GraphEM (l1-penalized M-step solved
/// with Douglas-Rachford) and the closed-form maximum-likelihood baseline.

#ifndef GRAPHEM_EM_HPP
#define GRAPHEM_EM_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphem/estep.hpp"
#include "graphem/inference.hpp"
#include "graphem/prox.hpp"

namespace graphem {

/// Everything except A, which is what the fit estimates.
struct KnownParameters {
  Matrix H;
  Matrix Q;
  Matrix R;
  Vector x0_mean;
  Matrix P0;

  static KnownParameters from_model(const LgssmModel& model);
  LgssmModel with_transition(const Matrix& A) const;
  Index state_dim() const { return Q.rows(); }
};

struct GraphemConfig {
  double gamma = 0.0;
  double em_tolerance = 1e-3;
  int em_max_iters = 50;
  DrConfig dr;
  /// Starting point; default_initializer(Nx, init_alpha) when empty.
  std::optional<Matrix> A0;
  double init_alpha = 0.1;
  /// Inner tolerance min(dr.tolerance, 0.1 * last outer decrease).
  bool adaptive_dr_tolerance = true;
  /// Run the inner solver on f / s, s = curvature_scale() of the quadratic
  /// term. Same minimizer; keeps theta = 1 well matched to the problem.
  bool normalize_mstep = true;

  void validate() const;
};

struct FitTrace {
  std::vector<Matrix> iterates;   ///< A^(0), A^(1), ...
  std::vector<double> objectives; ///< phi_K(A^(i)), same indexing
  std::vector<int> inner_iters;   ///< inner solver iterations; 0 for i = 0 and closed-form steps
  std::vector<double> elapsed;    ///< seconds since the fit started, per iterate
  bool converged = false;
  double wall_time = 0.0;

  int iterations() const { return static_cast<int>(iterates.size()) - 1; }
};

struct FitResult {
  Matrix A_hat;
  FitTrace trace;
};

/// A failure inside the EM loop. `iteration()` is the EM iteration index
/// (0 for the initial filter pass).
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, int iteration) : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// alpha * I.
Matrix default_initializer(Index n, double alpha = 0.1);

/// C Phi^-1 with the Phi conditioning guard.
Matrix mlem_mstep(const EStepStats& stats);

/// Smallest gamma for which A = 0 minimizes the penalized majorizer:
/// K * max_ij |(Q^-1 C)_ij|.
double gamma_max(const EStepStats& stats, const Matrix& Q);

/// One penalized M-step from tangency point `a_prev`.
DrResult graphem_mstep(const EStepStats& stats, const Matrix& Q, double gamma, const Matrix& a_prev,
                       const DrConfig& dr, bool normalize = true);

FitResult graphem_fit(const Matrix& observations, const KnownParameters& known, const GraphemConfig& config);

/// config.gamma is ignored; the objective is the plain negative log-likelihood.
FitResult mlem_fit(const Matrix& observations, const KnownParameters& known, const GraphemConfig& config);

/// E-step statistics at a given A (filter + smoother + moments).
EStepStats estep_at(const Matrix& observations, const KnownParameters& known, const Matrix& A);

}  // namespace graphem

#endif  // GRAPHEM_EM_HPP
