#include "graphem/inference.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace graphem {

namespace {

void symmetrize(Matrix& m) { m = 0.5 * (m + m.transpose()).eval(); }

Eigen::LLT<Matrix> factor_or_throw(const Matrix& m, const char* what, int step) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success || !(llt.rcond() >= kMinReciprocalCondition)) {
    std::ostringstream os;
    os << what << " is numerically singular at step " << step;
    throw NumericalError(os.str(), step);
  }
  return llt;
}

}  // namespace

FilterPass kalman_filter(const LgssmModel& model, const Matrix& observations) {
  require_valid(model);
  if (observations.cols() == 0) throw std::invalid_argument("kalman_filter: no observations");
  if (observations.rows() != model.obs_dim())
    throw std::invalid_argument("kalman_filter: observation dimension does not match H");

  const int steps = static_cast<int>(observations.cols());
  const Index ny = model.obs_dim();
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  const Matrix& A = model.A;
  const Matrix& H = model.H;

  FilterPass out;
  out.means.reserve(steps + 1);
  out.covariances.reserve(steps + 1);
  out.innovations.reserve(steps);
  out.innovation_covs.reserve(steps);
  out.means.push_back(model.x0_mean);
  out.covariances.push_back(model.P0);

  double nll = 0.0;
  for (int k = 1; k <= steps; ++k) {
    const Vector m_pred = A * out.means.back();
    Matrix p_pred = A * out.covariances.back() * A.transpose() + model.Q;
    symmetrize(p_pred);

    const Vector z = observations.col(k - 1) - H * m_pred;
    const Matrix hp = H * p_pred;  // H P^-
    Matrix s = hp * H.transpose() + model.R;
    symmetrize(s);

    const auto llt = factor_or_throw(s, "innovation covariance S_k", k);
    const Matrix s_inv_hp = llt.solve(hp);  // S^-1 H P^-, so the gain is its transpose
    const Vector s_inv_z = llt.solve(z);

    Vector m = m_pred + s_inv_hp.transpose() * z;
    // P^- - K S K' with K = P^- H' S^-1 reduces to P^- - (H P^-)' S^-1 (H P^-).
    Matrix p = p_pred - hp.transpose() * s_inv_hp;
    symmetrize(p);

    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    nll += 0.5 * (static_cast<double>(ny) * log_2pi + log_det) + 0.5 * z.dot(s_inv_z);

    out.means.push_back(std::move(m));
    out.covariances.push_back(std::move(p));
    out.innovations.push_back(z);
    out.innovation_covs.push_back(std::move(s));
  }
  out.neg_log_lik = nll;
  return out;
}

SmootherPass rts_smoother(const LgssmModel& model, const FilterPass& filter) {
  const int steps = filter.length();
  if (steps < 1 || static_cast<int>(filter.means.size()) != steps + 1 ||
      static_cast<int>(filter.covariances.size()) != steps + 1)
    throw std::invalid_argument("rts_smoother: malformed filter pass");
  if (filter.means.front().size() != model.state_dim())
    throw std::invalid_argument("rts_smoother: filter pass does not match model dimension");

  const Matrix& A = model.A;
  SmootherPass out;
  out.smoothed_means.resize(steps + 1);
  out.smoothed_covs.resize(steps + 1);
  out.gains.resize(steps);
  out.smoothed_means[steps] = filter.means[steps];
  out.smoothed_covs[steps] = filter.covariances[steps];

  for (int k = steps - 1; k >= 0; --k) {
    const Matrix& p = filter.covariances[k];
    const Vector& m = filter.means[k];
    Matrix p_pred = A * p * A.transpose() + model.Q;
    symmetrize(p_pred);
    const auto llt = factor_or_throw(p_pred, "predicted covariance A P_k A' + Q", k);

    // G = P A' (A P A' + Q)^-1 = ((A P A' + Q)^-1 A P)'
    Matrix gain = llt.solve(A * p).transpose();
    out.smoothed_means[k] = m + gain * (out.smoothed_means[k + 1] - A * m);
    Matrix ps = p + gain * (out.smoothed_covs[k + 1] - p_pred) * gain.transpose();
    symmetrize(ps);
    out.smoothed_covs[k] = std::move(ps);
    out.gains[k] = std::move(gain);
  }
  return out;
}

double map_objective(const LgssmModel& model, const Matrix& observations, double gamma) {
  if (gamma < 0.0) throw std::invalid_argument("map_objective: gamma must be nonnegative");
  const double nll = kalman_filter(model, observations).neg_log_lik;
  return gamma == 0.0 ? nll : nll + gamma * l1_norm(model.A);
}

}  // namespace graphem
