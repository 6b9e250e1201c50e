#include "graphem/prox.hpp"

#include <cmath>
#include <stdexcept>

#include "graphem/inference.hpp"

namespace graphem {

Matrix soft_threshold(const Matrix& m, double threshold) {
  if (threshold < 0.0) throw std::invalid_argument("soft_threshold: threshold must be nonnegative");
  return m.unaryExpr([threshold](double x) {
    const double mag = std::abs(x) - threshold;
    return mag > 0.0 ? std::copysign(mag, x) : 0.0;
  });
}

QuadraticProxProblem::QuadraticProxProblem(EStepStats stats, Matrix Q)
    : stats_(std::move(stats)), q_(std::move(Q)) {
  const Index n = stats_.Sigma.rows();
  if (q_.rows() != n || q_.cols() != n || stats_.Phi.rows() != n || stats_.C.rows() != n)
    throw std::invalid_argument("QuadraticProxProblem: dimension mismatch");
  if (stats_.seq_length < 1) throw std::invalid_argument("QuadraticProxProblem: seq_length must be >= 1");

  Eigen::LLT<Matrix> llt(q_);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("QuadraticProxProblem: Q not positive definite");
  q_inv_ = llt.solve(Matrix::Identity(n, n));
  q_inv_ = 0.5 * (q_inv_ + q_inv_.transpose()).eval();
  phi_ = guarded_phi(stats_);

  const double s = q_.diagonal().mean();
  const Matrix off = q_ - s * Matrix::Identity(n, n);
  if (s > 0.0 && off.cwiseAbs().maxCoeff() <= 1e-12 * s) isotropic_ = s;
}

double QuadraticProxProblem::value(const Matrix& A) const {
  const Matrix ca = stats_.C * A.transpose();
  const Matrix inner = stats_.Sigma - ca - ca.transpose() + A * phi_ * A.transpose();
  return 0.5 * stats_.seq_length * (q_inv_.cwiseProduct(inner)).sum();
}

Matrix QuadraticProxProblem::gradient(const Matrix& A) const {
  return stats_.seq_length * q_inv_ * (A * phi_ - stats_.C);
}

Matrix QuadraticProxProblem::minimizer() const {
  Eigen::LLT<Matrix> llt(phi_);
  return llt.solve(stats_.C.transpose()).transpose();
}

double QuadraticProxProblem::curvature_scale() const {
  Eigen::SelfAdjointEigenSolver<Matrix> ep(phi_, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Matrix> eq(q_inv_, Eigen::EigenvaluesOnly);
  const double phi_gm = std::sqrt(std::max(ep.eigenvalues().minCoeff(), 0.0) * ep.eigenvalues().maxCoeff());
  const double q_gm = std::sqrt(eq.eigenvalues().minCoeff() * eq.eigenvalues().maxCoeff());
  const double scale = stats_.seq_length * phi_gm * q_gm;
  return scale > 0.0 ? scale : 1.0;
}

QuadraticProx::QuadraticProx(const QuadraticProxProblem& problem, double theta, ProxMethod method)
    : problem_(&problem), theta_(theta), method_(method) {
  if (!(theta > 0.0)) throw std::invalid_argument("QuadraticProx: theta must be positive");
  const Index n = problem.dim();
  if (method_ == ProxMethod::Automatic) {
    if (problem.isotropic_variance())
      method_ = ProxMethod::Isotropic;
    else
      method_ = n <= 64 ? ProxMethod::Kronecker : ProxMethod::Eigen;
  }
  const double tk = theta * problem.seq_length();
  const Matrix& phi = problem.Phi();

  switch (method_) {
    case ProxMethod::Isotropic: {
      if (!problem.isotropic_variance())
        throw std::invalid_argument("QuadraticProx: isotropic path requested for non-isotropic Q");
      const double c = tk / *problem.isotropic_variance();
      factor_.compute(c * phi + Matrix::Identity(n, n));
      break;
    }
    case ProxMethod::Kronecker: {
      x_ = problem.Q() / tk;
      const Index nn = n * n;
      Matrix system = Matrix::Zero(nn, nn);
      // Block (j, l) of I (x) X + Phi (x) I is delta_jl X + Phi(j, l) I.
      for (Index j = 0; j < n; ++j) {
        system.block(j * n, j * n, n, n) += x_;
        for (Index l = 0; l < n; ++l) system.block(j * n, l * n, n, n).diagonal().array() += phi(j, l);
      }
      factor_.compute(system);
      break;
    }
    case ProxMethod::Eigen: {
      x_ = problem.Q() / tk;
      Eigen::SelfAdjointEigenSolver<Matrix> ex(x_);
      Eigen::SelfAdjointEigenSolver<Matrix> ep(phi);
      u_ = ex.eigenvectors();
      v_ = ep.eigenvectors();
      denom_ = ex.eigenvalues().replicate(1, n) + ep.eigenvalues().transpose().replicate(n, 1);
      if (!(denom_.minCoeff() > 0.0)) throw NumericalError("QuadraticProx: singular Sylvester operator", -1);
      return;
    }
    case ProxMethod::Automatic:
      break;
  }
  if (factor_.info() != Eigen::Success || !(factor_.rcond() >= kMinReciprocalCondition))
    throw NumericalError("QuadraticProx: prox linear system is numerically singular", -1);
}

Matrix QuadraticProx::operator()(const Matrix& a_tilde) const {
  const QuadraticProxProblem& p = *problem_;
  const Index n = p.dim();
  const Matrix& c = p.stats().C;
  if (a_tilde.rows() != n || a_tilde.cols() != n) throw std::invalid_argument("QuadraticProx: argument has the wrong shape");
  switch (method_) {
    case ProxMethod::Isotropic: {
      const double scale = theta_ * p.seq_length() / *p.isotropic_variance();
      const Matrix rhs = scale * c + a_tilde;
      return factor_.solve(rhs.transpose()).transpose();
    }
    case ProxMethod::Kronecker: {
      const Matrix rhs = x_ * a_tilde + c;
      const Vector sol = factor_.solve(rhs.reshaped());
      return sol.reshaped(n, n);
    }
    case ProxMethod::Eigen: {
      const Matrix rhs = u_.transpose() * (x_ * a_tilde + c) * v_;
      return u_ * rhs.cwiseQuotient(denom_) * v_.transpose();
    }
    case ProxMethod::Automatic:
      break;
  }
  throw std::logic_error("QuadraticProx: unresolved method");
}

Matrix prox_quadratic(const QuadraticProxProblem& problem, const Matrix& a_tilde, double theta,
                      ProxMethod method) {
  return QuadraticProx(problem, theta, method)(a_tilde);
}

double prox_residual(const QuadraticProxProblem& problem, const Matrix& a, const Matrix& a_tilde,
                     double theta) {
  return (theta * problem.gradient(a) + a - a_tilde).norm();
}

void DrConfig::validate() const {
  if (!(theta > 0.0 && theta < 2.0)) throw std::invalid_argument("DrConfig: theta must lie in (0, 2)");
  if (!(tolerance > 0.0)) throw std::invalid_argument("DrConfig: tolerance must be positive");
  if (max_iters < 1) throw std::invalid_argument("DrConfig: max_iters must be positive");
}

DrResult douglas_rachford(const ProxOperator& prox_f1, const ProxOperator& prox_f2,
                          const MatrixObjective& objective, const DrConfig& config, const Matrix& z0) {
  config.validate();
  const double theta = config.theta;
  Matrix z = z0;
  DrResult out;
  double previous = 0.0;

  for (int n = 1; n <= config.max_iters; ++n) {
    Matrix a = prox_f2(z, theta);
    const Matrix v = prox_f1(2.0 * a - z, theta);
    const double step = (v - a).squaredNorm();
    z += theta * (v - a);
    const double value = objective(a);
    out.A = std::move(a);
    out.objective = value;
    out.iters = n;
    // The objective alone can stall while A sits in the soft-threshold dead
    // zone and Z is still travelling, so the fixed-point residual must be small too.
    if (n > 1 && std::abs(value - previous) <= config.tolerance && step <= config.tolerance) {
      out.converged = true;
      break;
    }
    previous = value;
  }
  return out;
}

}  // namespace graphem
