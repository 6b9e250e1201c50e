/// @file model.hpp
/// Linear-Gaussian state-space model, trajectory simulation and the
/// block-diagonal AR(1) synthetic datasets.
///
/// The model is
///
///   x_k = A x_{k-1} + q_k,   q_k ~ N(0, Q)
///   y_k = H x_k     + r_k,   r_k ~ N(0, R)
///
/// for k = 1..K, with x_0 ~ N(x0_mean, P0).

#ifndef GRAPHEM_MODEL_HPP
#define GRAPHEM_MODEL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace graphem {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct LgssmModel {
  Matrix A;        ///< state transition, Nx x Nx
  Matrix H;        ///< observation operator, Ny x Nx
  Matrix Q;        ///< state noise covariance, Nx x Nx
  Matrix R;        ///< observation noise covariance, Ny x Ny
  Vector x0_mean;  ///< prior mean of x_0
  Matrix P0;       ///< prior covariance of x_0

  Index state_dim() const { return A.rows(); }
  Index obs_dim() const { return H.rows(); }
};

/// Result of validate_model. Empty violation list means the model is usable.
struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

ValidationReport validate_model(const LgssmModel& model);

/// Throws std::invalid_argument carrying the report text when the model is invalid.
void require_valid(const LgssmModel& model);

/// One simulated realization. Column k of `states` is x_k (k = 0..K) and
/// column k-1 of `observations` is y_k (k = 1..K).
struct Trajectory {
  Matrix states;
  Matrix observations;

  Index length() const { return observations.cols(); }
};

/// Draws a trajectory of length `seq_length`. Pure function of its arguments.
Trajectory simulate(const LgssmModel& model, int seq_length, std::uint64_t seed);

/// Clips the singular values of `m` to `bound`. Returns `m` untouched when
/// its spectral norm is already within the bound.
Matrix project_spectral_norm(const Matrix& m, double bound);

/// Spectral norm (largest singular value).
double spectral_norm(const Matrix& m);

/// 0/1 mask of the diagonal blocks.
Matrix block_mask(std::span<const int> block_sizes);

inline constexpr double kDefaultSpectralBound = 0.99;

/// How the entries of each diagonal block are drawn.
enum class BlockEnsemble {
  Toeplitz,  ///< rho^|i-j| with rho ~ U(0, 1) drawn per block
  Uniform,   ///< i.i.d. U[-1, 1] entries
};

BlockEnsemble parse_block_ensemble(std::string_view name);
std::string_view to_string(BlockEnsemble ensemble);

/// Block-diagonal matrix whose blocks are random AR(1) matrices, projected
/// onto the spectral-norm ball of radius `bound`.
Matrix random_block_ar1_matrix(std::span<const int> block_sizes, std::uint64_t seed,
                               double bound = kDefaultSpectralBound,
                               BlockEnsemble ensemble = BlockEnsemble::Toeplitz);

struct DatasetSpec {
  std::vector<int> block_sizes;
  double sigma_q = 0.1;
  double sigma_r = 0.1;
  double sigma_p = 1e-4;
  int seq_length = 1000;
  std::uint64_t seed = 0;
  double spectral_bound = kDefaultSpectralBound;
  BlockEnsemble ensemble = BlockEnsemble::Toeplitz;

  int state_dim() const;
};

/// Named rows of the reference dataset table: "A", "B", "C", "D".
/// Throws std::invalid_argument for any other name.
DatasetSpec dataset_preset(std::string_view name, std::uint64_t seed = 0);

/// Names accepted by dataset_preset, in order.
std::span<const std::string_view> preset_names();

struct Dataset {
  Matrix true_A;
  LgssmModel model;
  Trajectory trajectory;
};

/// H = I, Q = sigma_q^2 I, R = sigma_r^2 I, P0 = sigma_p^2 I, x0_mean = 0.
/// The transition matrix and the trajectory use independent streams derived
/// from spec.seed.
Dataset make_dataset(const DatasetSpec& spec);

}  // namespace graphem

#endif  // GRAPHEM_MODEL_HPP
