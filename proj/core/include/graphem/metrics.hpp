/// @file metrics.hpp
/// Estimation error and support-recovery scores for transition matrices.

#ifndef GRAPHEM_METRICS_HPP
#define GRAPHEM_METRICS_HPP

#include <cstdint>
#include <span>

#include "graphem/model.hpp"

namespace graphem {

inline constexpr double kDefaultEdgeThreshold = 1e-10;

struct EdgeScores {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;
};

/// ||A_hat - A_true||_F / ||A_true||_F. Throws for an all-zero A_true.
double rmse(const Matrix& a_hat, const Matrix& a_true);

/// Edge (n, m) is present when |A(n, m)| > threshold.
EdgeScores edge_scores(const Matrix& a_hat, const Matrix& a_true, double threshold = kDefaultEdgeThreshold);

/// Number of entries with magnitude above threshold.
std::int64_t count_edges(const Matrix& a, double threshold = kDefaultEdgeThreshold);

struct RealizationScores {
  double rmse = 0.0;
  EdgeScores edges;
};

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  ///< sample standard deviation; 0 for a single value
};

struct AggregateScores {
  Summary rmse, accuracy, precision, recall, specificity, f1;
  std::size_t count = 0;
};

Summary summarize(std::span<const double> values);
AggregateScores aggregate(std::span<const RealizationScores> scores);

}  // namespace graphem

#endif  // GRAPHEM_METRICS_HPP
