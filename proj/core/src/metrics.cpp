#include "graphem/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace graphem {

namespace {
double ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

double rmse(const Matrix& a_hat, const Matrix& a_true) {
  if (a_hat.rows() != a_true.rows() || a_hat.cols() != a_true.cols())
    throw std::invalid_argument("rmse: shape mismatch");
  const double ref = a_true.norm();
  if (ref == 0.0) throw std::invalid_argument("rmse: reference matrix is zero");
  return (a_hat - a_true).norm() / ref;
}

std::int64_t count_edges(const Matrix& a, double threshold) {
  return (a.array().abs() > threshold).count();
}

EdgeScores edge_scores(const Matrix& a_hat, const Matrix& a_true, double threshold) {
  if (a_hat.rows() != a_true.rows() || a_hat.cols() != a_true.cols())
    throw std::invalid_argument("edge_scores: shape mismatch");
  EdgeScores s;
  for (Index j = 0; j < a_hat.cols(); ++j) {
    for (Index i = 0; i < a_hat.rows(); ++i) {
      const bool predicted = std::abs(a_hat(i, j)) > threshold;
      const bool actual = std::abs(a_true(i, j)) > threshold;
      if (predicted && actual) ++s.tp;
      else if (predicted) ++s.fp;
      else if (actual) ++s.fn;
      else ++s.tn;
    }
  }
  s.precision = ratio(s.tp, s.tp + s.fp);
  s.recall = ratio(s.tp, s.tp + s.fn);
  s.specificity = ratio(s.tn, s.tn + s.fp);
  s.accuracy = ratio(s.tp + s.tn, s.tp + s.tn + s.fp + s.fn);
  const double pr = s.precision + s.recall;
  s.f1 = pr == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / pr;
  return s;
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("summarize: empty input");
  Summary s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

AggregateScores aggregate(std::span<const RealizationScores> scores) {
  if (scores.empty()) throw std::invalid_argument("aggregate: empty input");
  auto field = [&](auto getter) {
    std::vector<double> v;
    v.reserve(scores.size());
    for (const auto& s : scores) v.push_back(getter(s));
    return summarize(v);
  };
  AggregateScores out;
  out.count = scores.size();
  out.rmse = field([](const RealizationScores& s) { return s.rmse; });
  out.accuracy = field([](const RealizationScores& s) { return s.edges.accuracy; });
  out.precision = field([](const RealizationScores& s) { return s.edges.precision; });
  out.recall = field([](const RealizationScores& s) { return s.edges.recall; });
  out.specificity = field([](const RealizationScores& s) { return s.edges.specificity; });
  out.f1 = field([](const RealizationScores& s) { return s.edges.f1; });
  return out;
}

}  // namespace graphem
