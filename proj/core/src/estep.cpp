#include "graphem/estep.hpp"

#include <stdexcept>

namespace graphem {

EStepStats compute_estep_stats(const SmootherPass& smoother) {
  const int steps = smoother.length();
  if (steps < 1) throw std::invalid_argument("compute_estep_stats: empty smoother pass");
  if (static_cast<int>(smoother.smoothed_means.size()) != steps + 1 ||
      static_cast<int>(smoother.smoothed_covs.size()) != steps + 1)
    throw std::invalid_argument("compute_estep_stats: mismatched smoother lengths");

  const Index n = smoother.smoothed_means.front().size();
  EStepStats stats;
  stats.seq_length = steps;
  stats.Sigma = Matrix::Zero(n, n);
  stats.Phi = Matrix::Zero(n, n);
  stats.C = Matrix::Zero(n, n);

  for (int k = 1; k <= steps; ++k) {
    const Vector& m = smoother.smoothed_means[k];
    const Vector& m_prev = smoother.smoothed_means[k - 1];
    const Matrix& p = smoother.smoothed_covs[k];
    stats.Sigma += p + m * m.transpose();
    stats.Phi += smoother.smoothed_covs[k - 1] + m_prev * m_prev.transpose();
    stats.C += p * smoother.gains[k - 1].transpose() + m * m_prev.transpose();
  }
  const double inv_k = 1.0 / steps;
  stats.Sigma = (0.5 * inv_k * (stats.Sigma + stats.Sigma.transpose())).eval();
  stats.Phi = (0.5 * inv_k * (stats.Phi + stats.Phi.transpose())).eval();
  stats.C *= inv_k;
  return stats;
}

Matrix guarded_phi(const EStepStats& stats) {
  Matrix phi = 0.5 * (stats.Phi + stats.Phi.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(phi, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    const double n = static_cast<double>(phi.rows());
    phi.diagonal().array() += 1e-10 * phi.trace() / n;
  }
  return phi;
}

double majorizer_value(const Matrix& A, const EStepStats& stats, const Matrix& Q, double gamma) {
  const Index n = stats.Sigma.rows();
  if (A.rows() != n || A.cols() != n || Q.rows() != n || Q.cols() != n)
    throw std::invalid_argument("majorizer_value: dimension mismatch");
  Eigen::LLT<Matrix> llt(Q);
  if (llt.info() != Eigen::Success || !(llt.rcond() >= 1e-14))
    throw std::invalid_argument("majorizer_value: Q is not invertible");

  const Matrix ca = stats.C * A.transpose();
  const Matrix inner = stats.Sigma - ca - ca.transpose() + A * stats.Phi * A.transpose();
  const double quad = 0.5 * stats.seq_length * llt.solve(inner).trace();
  return gamma == 0.0 ? quad : quad + gamma * l1_norm(A);
}

}  // namespace graphem
