#include "graphem/em.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>

namespace graphem {

KnownParameters KnownParameters::from_model(const LgssmModel& model) {
  return {model.H, model.Q, model.R, model.x0_mean, model.P0};
}

LgssmModel KnownParameters::with_transition(const Matrix& A) const { return {A, H, Q, R, x0_mean, P0}; }

void GraphemConfig::validate() const {
  if (!(gamma >= 0.0)) throw std::invalid_argument("GraphemConfig: gamma must be nonnegative");
  if (!(em_tolerance > 0.0)) throw std::invalid_argument("GraphemConfig: em_tolerance must be positive");
  if (em_max_iters < 1) throw std::invalid_argument("GraphemConfig: em_max_iters must be positive");
  dr.validate();
}

Matrix default_initializer(Index n, double alpha) {
  if (n < 1) throw std::invalid_argument("default_initializer: dimension must be >= 1");
  return alpha * Matrix::Identity(n, n);
}

Matrix mlem_mstep(const EStepStats& stats) {
  const Matrix phi = guarded_phi(stats);
  Eigen::LLT<Matrix> llt(phi);
  if (llt.info() != Eigen::Success || !(llt.rcond() >= kMinReciprocalCondition))
    throw NumericalError("mlem_mstep: Phi is singular", -1);
  // A Phi = C  <=>  Phi A' = C'
  return llt.solve(stats.C.transpose()).transpose();
}

double gamma_max(const EStepStats& stats, const Matrix& Q) {
  Eigen::LLT<Matrix> llt(Q);
  return stats.seq_length * llt.solve(stats.C).cwiseAbs().maxCoeff();
}

DrResult graphem_mstep(const EStepStats& stats, const Matrix& Q, double gamma, const Matrix& a_prev,
                       const DrConfig& dr, bool normalize) {
  const QuadraticProxProblem problem(stats, Q);
  const double scale = normalize ? problem.curvature_scale() : 1.0;

  // The factorization depends on the prox parameter; DR always passes the
  // same theta, so a single cached operator suffices.
  std::optional<QuadraticProx> cached;
  auto prox_f1 = [&](const Matrix& x, double theta) {
    if (!cached || cached->theta() != theta / scale) cached.emplace(problem, theta / scale);
    return (*cached)(x);
  };
  auto prox_f2 = [&](const Matrix& x, double theta) { return soft_threshold(x, theta * gamma / scale); };
  auto objective = [&](const Matrix& a) { return problem.value(a) + gamma * l1_norm(a); };

  DrResult result = douglas_rachford(prox_f1, prox_f2, objective, dr, a_prev);

  // Never step uphill on the majorizer: that is what makes the outer loop monotone.
  const double at_prev = objective(a_prev);
  if (result.objective > at_prev) {
    result.A = a_prev;
    result.objective = at_prev;
  }
  return result;
}

EStepStats estep_at(const Matrix& observations, const KnownParameters& known, const Matrix& A) {
  const LgssmModel model = known.with_transition(A);
  const FilterPass filter = kalman_filter(model, observations);
  return compute_estep_stats(rts_smoother(model, filter));
}

namespace {

struct MStepOutcome {
  Matrix A;
  int inner_iters = 0;
};

using MStep = std::function<MStepOutcome(const EStepStats&, const Matrix& a_prev, double last_decrease)>;

FitResult run_em(const Matrix& observations, const KnownParameters& known, const GraphemConfig& config,
                 double gamma, const MStep& mstep) {
  config.validate();
  if (observations.cols() < 2) throw std::invalid_argument("EM fit needs at least two observations");
  const Index n = known.state_dim();

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto seconds = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

  Matrix a = config.A0 ? *config.A0 : default_initializer(n, config.init_alpha);
  if (a.rows() != n || a.cols() != n) throw std::invalid_argument("EM fit: A0 has the wrong shape");

  LgssmModel model = known.with_transition(a);
  require_valid(model);

  auto filter_at = [&](int iteration) {
    try {
      return kalman_filter(model, observations);
    } catch (const NumericalError& e) {
      throw FitError(std::string(e.what()) + " (EM iteration " + std::to_string(iteration) + ")", iteration);
    }
  };

  FilterPass filter = filter_at(0);
  double objective = filter.neg_log_lik + gamma * l1_norm(a);

  FitResult out;
  FitTrace& trace = out.trace;
  trace.iterates.push_back(a);
  trace.objectives.push_back(objective);
  trace.inner_iters.push_back(0);
  trace.elapsed.push_back(seconds());

  double last_decrease = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= config.em_max_iters; ++i) {
    EStepStats stats;
    MStepOutcome step;
    try {
      stats = compute_estep_stats(rts_smoother(model, filter));
      step = mstep(stats, a, last_decrease);
    } catch (const NumericalError& e) {
      throw FitError(std::string(e.what()) + " (EM iteration " + std::to_string(i) + ")", i);
    }

    model.A = step.A;
    filter = filter_at(i);
    const double next = filter.neg_log_lik + gamma * l1_norm(step.A);

    trace.iterates.push_back(step.A);
    trace.objectives.push_back(next);
    trace.inner_iters.push_back(step.inner_iters);
    trace.elapsed.push_back(seconds());

    a = std::move(step.A);
    const double change = objective - next;
    objective = next;
    if (std::abs(change) <= config.em_tolerance) {
      trace.converged = true;
      break;
    }
    last_decrease = std::abs(change);
  }

  trace.wall_time = seconds();
  out.A_hat = a;
  return out;
}

}  // namespace

FitResult graphem_fit(const Matrix& observations, const KnownParameters& known, const GraphemConfig& config) {
  const double gamma = config.gamma;
  auto mstep = [&](const EStepStats& stats, const Matrix& a_prev, double last_decrease) {
    DrConfig dr = config.dr;
    if (config.adaptive_dr_tolerance) dr.tolerance = std::min(dr.tolerance, 0.1 * last_decrease);
    DrResult r = graphem_mstep(stats, known.Q, gamma, a_prev, dr, config.normalize_mstep);
    return MStepOutcome{std::move(r.A), r.iters};
  };
  return run_em(observations, known, config, gamma, mstep);
}

FitResult mlem_fit(const Matrix& observations, const KnownParameters& known, const GraphemConfig& config) {
  auto mstep = [](const EStepStats& stats, const Matrix&, double) { return MStepOutcome{mlem_mstep(stats), 0}; };
  return run_em(observations, known, config, 0.0, mstep);
}

}  // namespace graphem
