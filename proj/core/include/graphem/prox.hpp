/// @file prox.hpp
/// Proximity operators of the M-step terms and a Douglas-Rachford solver.
///
/// The smooth term is
///
///   f1(A) = (K/2) tr(Q^-1 (Sigma - C A' - A C' + A Phi A'))
///
/// and prox_{theta f1}(At) is the A solving theta K Q^-1 (A Phi - C) + A = At.
/// Multiplying on the left by X = Q / (theta K) gives the Sylvester form
///
///   X A + A Phi = X At + C,   (I (x) X + Phi (x) I) vec(A) = vec(X At + C).

#ifndef GRAPHEM_PROX_HPP
#define GRAPHEM_PROX_HPP

#include <functional>
#include <optional>

#include "graphem/estep.hpp"

namespace graphem {

/// Elementwise sign(m) * max(0, |m| - threshold).
Matrix soft_threshold(const Matrix& m, double threshold);

class QuadraticProxProblem {
 public:
  /// Detects isotropic Q (Q == s I within 1e-12 relative) and stores s.
  QuadraticProxProblem(EStepStats stats, Matrix Q);

  const EStepStats& stats() const { return stats_; }
  const Matrix& Q() const { return q_; }
  const Matrix& Q_inverse() const { return q_inv_; }
  /// Phi after the conditioning guard; this is what every solve uses.
  const Matrix& Phi() const { return phi_; }
  std::optional<double> isotropic_variance() const { return isotropic_; }
  int seq_length() const { return stats_.seq_length; }
  Index dim() const { return q_.rows(); }

  /// f1(A).
  double value(const Matrix& A) const;
  /// K Q^-1 (A Phi - C).
  Matrix gradient(const Matrix& A) const;
  /// The unregularized minimizer C Phi^-1.
  Matrix minimizer() const;

  /// Geometric mean of the extreme Hessian eigenvalues of f1.
  double curvature_scale() const;

 private:
  EStepStats stats_;
  Matrix q_;
  Matrix q_inv_;
  Matrix phi_;
  std::optional<double> isotropic_;
};

enum class ProxMethod {
  Automatic,  ///< Isotropic when available, else Kronecker up to Nx = 64, else Eigen
  Isotropic,  ///< (theta K / s C + At)(theta K / s Phi + I)^-1
  Kronecker,  ///< dense Nx^2 x Nx^2 Cholesky solve
  Eigen,      ///< diagonalize X and Phi, divide elementwise
};

/// prox_{theta f1} with its factorization cached; theta is fixed at construction.
/// Keeps a pointer to `problem`, which must outlive this object.
class QuadraticProx {
 public:
  QuadraticProx(const QuadraticProxProblem& problem, double theta,
                ProxMethod method = ProxMethod::Automatic);

  Matrix operator()(const Matrix& a_tilde) const;

  ProxMethod method() const { return method_; }
  double theta() const { return theta_; }

 private:
  const QuadraticProxProblem* problem_;
  double theta_;
  ProxMethod method_;
  Matrix x_;  // Q / (theta K)
  Eigen::LLT<Matrix> factor_;
  Matrix u_, v_, denom_;  // Eigen path: X = U diag U', Phi = V diag V'
};

Matrix prox_quadratic(const QuadraticProxProblem& problem, const Matrix& a_tilde, double theta,
                      ProxMethod method = ProxMethod::Automatic);

/// || theta K Q^-1 (A Phi - C) + A - At ||_F.
double prox_residual(const QuadraticProxProblem& problem, const Matrix& a, const Matrix& a_tilde,
                     double theta);

struct DrConfig {
  double theta = 1.0;
  double tolerance = 1e-3;
  int max_iters = 5000;

  void validate() const;
};

/// prox_{theta f}(X), called as op(X, theta).
using ProxOperator = std::function<Matrix(const Matrix&, double)>;
using MatrixObjective = std::function<double(const Matrix&)>;

struct DrResult {
  Matrix A;
  int iters = 0;
  bool converged = false;
  double objective = 0.0;
};

/// A_n = prox_{theta f2}(Z_n); V_n = prox_{theta f1}(2 A_n - Z_n);
/// Z_{n+1} = Z_n + theta (V_n - A_n). Stops once successive objective values
/// differ by at most config.tolerance and ||V_n - A_n||_F^2 <= config.tolerance. Hitting max_iters is not an error;
/// the result then has converged == false.
DrResult douglas_rachford(const ProxOperator& prox_f1, const ProxOperator& prox_f2,
                          const MatrixObjective& objective, const DrConfig& config, const Matrix& z0);

}  // namespace graphem

#endif  // GRAPHEM_PROX_HPP
