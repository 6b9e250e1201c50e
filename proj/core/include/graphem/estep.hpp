/// @file estep.hpp
/// Smoothed second-moment statistics and the quadratic EM majorizer of phi_K.

#ifndef GRAPHEM_ESTEP_HPP
#define GRAPHEM_ESTEP_HPP

#include "graphem/inference.hpp"

namespace graphem {

/// Sigma = 1/K sum_{k=1..K} P^s_k     + m^s_k m^s_k'
/// Phi   = 1/K sum_{k=1..K} P^s_{k-1} + m^s_{k-1} m^s_{k-1}'
/// C     = 1/K sum_{k=1..K} P^s_k G'_{k-1} + m^s_k m^s_{k-1}'
struct EStepStats {
  Matrix Sigma;
  Matrix Phi;
  Matrix C;
  int seq_length = 0;
};

EStepStats compute_estep_stats(const SmootherPass& smoother);

/// Phi symmetrized, with a ridge of 1e-10 tr(Phi)/Nx added when its condition
/// number exceeds 1e12. Every inversion of Phi goes through this.
Matrix guarded_phi(const EStepStats& stats);

/// (K/2) tr(Q^-1 (Sigma - C A' - A C' + A Phi A')) + gamma ||A||_1, i.e. the
/// majorizer without its A-independent constant.
double majorizer_value(const Matrix& A, const EStepStats& stats, const Matrix& Q, double gamma);

}  // namespace graphem

#endif  // GRAPHEM_ESTEP_HPP
