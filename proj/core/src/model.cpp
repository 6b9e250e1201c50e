#include "graphem/model.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace graphem {

namespace {

constexpr double kSymmetryTolerance = 1e-12;

bool is_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= kSymmetryTolerance * scale;
}

bool is_positive_definite(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() > 0.0;
}

void check_covariance(const Matrix& m, const char* name, Index expected,
                      std::vector<std::string>& out) {
  if (m.rows() != expected || m.cols() != expected) {
    std::ostringstream os;
    os << "dimension mismatch: " << name << " is " << m.rows() << "x" << m.cols() << ", expected "
       << expected << "x" << expected;
    out.push_back(os.str());
    return;
  }
  if (!m.allFinite()) {
    out.push_back(std::string(name) + " has non-finite entries");
    return;
  }
  if (!is_symmetric(m)) out.push_back(std::string(name) + " not symmetric");
  if (!is_positive_definite(m)) out.push_back(std::string(name) + " not positive definite");
}

// splitmix64 finalizer; turns (seed, stream) into decorrelated engine seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Vector standard_normal(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

Matrix cholesky_factor(const Matrix& cov) {
  Eigen::LLT<Matrix> llt(0.5 * (cov + cov.transpose()));
  if (llt.info() != Eigen::Success) throw std::invalid_argument("covariance is not positive definite");
  return llt.matrixL();
}

}  // namespace

std::string ValidationReport::to_string() const {
  if (ok()) return "ok";
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i];
  }
  return os.str();
}

ValidationReport validate_model(const LgssmModel& model) {
  ValidationReport report;
  auto& v = report.violations;
  const Index nx = model.A.rows();
  const Index ny = model.H.rows();

  if (nx == 0) v.push_back("dimension mismatch: empty state");
  if (model.A.cols() != nx) v.push_back("dimension mismatch: A is not square");
  if (model.H.cols() != nx) {
    std::ostringstream os;
    os << "dimension mismatch: H has " << model.H.cols() << " columns but A is " << nx << "x"
       << model.A.cols();
    v.push_back(os.str());
  }
  if (model.x0_mean.size() != nx) v.push_back("dimension mismatch: x0_mean length differs from state dimension");
  if (!model.A.allFinite() || !model.H.allFinite()) v.push_back("A or H has non-finite entries");

  check_covariance(model.Q, "Q", nx, v);
  check_covariance(model.R, "R", ny, v);
  check_covariance(model.P0, "P0", nx, v);
  return report;
}

void require_valid(const LgssmModel& model) {
  const auto report = validate_model(model);
  if (!report.ok()) throw std::invalid_argument("invalid model: " + report.to_string());
}

Trajectory simulate(const LgssmModel& model, int seq_length, std::uint64_t seed) {
  require_valid(model);
  if (seq_length < 1) throw std::invalid_argument("simulate: seq_length must be >= 1");

  const Index nx = model.state_dim();
  const Index ny = model.obs_dim();
  const Matrix lq = cholesky_factor(model.Q);
  const Matrix lr = cholesky_factor(model.R);
  const Matrix lp = cholesky_factor(model.P0);

  std::mt19937_64 rng(seed);
  Trajectory traj;
  traj.states.resize(nx, seq_length + 1);
  traj.observations.resize(ny, seq_length);

  traj.states.col(0) = model.x0_mean + lp * standard_normal(nx, rng);
  for (int k = 1; k <= seq_length; ++k) {
    traj.states.col(k) = model.A * traj.states.col(k - 1) + lq * standard_normal(nx, rng);
    traj.observations.col(k - 1) = model.H * traj.states.col(k) + lr * standard_normal(ny, rng);
  }
  return traj;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Matrix project_spectral_norm(const Matrix& m, double bound) {
  if (!(bound > 0.0)) throw std::invalid_argument("project_spectral_norm: bound must be positive");
  if (m.size() == 0) return m;
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  if (s(0) <= bound) return m;
  const Vector clipped = s.cwiseMin(bound);
  return svd.matrixU() * clipped.asDiagonal() * svd.matrixV().transpose();
}

Matrix block_mask(std::span<const int> block_sizes) {
  int n = 0;
  for (int b : block_sizes) {
    if (b <= 0) throw std::invalid_argument("block sizes must be positive");
    n += b;
  }
  Matrix mask = Matrix::Zero(n, n);
  int offset = 0;
  for (int b : block_sizes) {
    mask.block(offset, offset, b, b).setOnes();
    offset += b;
  }
  return mask;
}

BlockEnsemble parse_block_ensemble(std::string_view name) {
  if (name == "toeplitz") return BlockEnsemble::Toeplitz;
  if (name == "uniform") return BlockEnsemble::Uniform;
  throw std::invalid_argument("unknown block ensemble '" + std::string(name) + "'");
}

std::string_view to_string(BlockEnsemble ensemble) {
  return ensemble == BlockEnsemble::Toeplitz ? "toeplitz" : "uniform";
}

Matrix random_block_ar1_matrix(std::span<const int> block_sizes, std::uint64_t seed, double bound,
                               BlockEnsemble ensemble) {
  if (block_sizes.empty()) throw std::invalid_argument("random_block_ar1_matrix: empty block list");
  const Matrix mask = block_mask(block_sizes);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix a = Matrix::Zero(mask.rows(), mask.cols());
  int offset = 0;
  for (int b : block_sizes) {
    const double rho = ensemble == BlockEnsemble::Toeplitz ? unit(rng) : 0.0;
    for (int j = 0; j < b; ++j) {
      for (int i = 0; i < b; ++i) {
        a(offset + i, offset + j) = ensemble == BlockEnsemble::Toeplitz
                                        ? std::pow(rho, std::abs(i - j))
                                        : uniform(rng);
      }
    }
    offset += b;
  }
  // Block-diagonal SVD factors keep the zero pattern up to rounding; re-mask to make it exact.
  return project_spectral_norm(a, bound).cwiseProduct(mask);
}

int DatasetSpec::state_dim() const { return std::accumulate(block_sizes.begin(), block_sizes.end(), 0); }

namespace {
constexpr std::array<std::string_view, 4> kPresetNames = {"A", "B", "C", "D"};
}

std::span<const std::string_view> preset_names() { return kPresetNames; }

DatasetSpec dataset_preset(std::string_view name, std::uint64_t seed) {
  DatasetSpec spec;
  spec.seq_length = 1000;
  spec.seed = seed;
  spec.sigma_p = 1e-4;
  if (name == "A" || name == "B") {
    spec.block_sizes = {3, 3, 3};
  } else if (name == "C" || name == "D") {
    spec.block_sizes = {3, 5, 5, 3};
  } else {
    throw std::invalid_argument("unknown dataset preset '" + std::string(name) + "'");
  }
  const bool low_noise = (name == "A" || name == "C");
  spec.sigma_q = low_noise ? 1e-1 : 1.0;
  spec.sigma_r = low_noise ? 1e-1 : 1.0;
  return spec;
}

Dataset make_dataset(const DatasetSpec& spec) {
  if (spec.block_sizes.empty()) throw std::invalid_argument("make_dataset: empty block list");
  if (!(spec.sigma_q > 0 && spec.sigma_r > 0 && spec.sigma_p > 0))
    throw std::invalid_argument("make_dataset: noise levels must be positive");
  if (spec.seq_length < 1) throw std::invalid_argument("make_dataset: seq_length must be >= 1");

  const Index n = spec.state_dim();
  Dataset ds;
  ds.true_A = random_block_ar1_matrix(spec.block_sizes, derive_seed(spec.seed, 0), spec.spectral_bound,
                                     spec.ensemble);
  ds.model.A = ds.true_A;
  ds.model.H = Matrix::Identity(n, n);
  ds.model.Q = spec.sigma_q * spec.sigma_q * Matrix::Identity(n, n);
  ds.model.R = spec.sigma_r * spec.sigma_r * Matrix::Identity(n, n);
  ds.model.P0 = spec.sigma_p * spec.sigma_p * Matrix::Identity(n, n);
  ds.model.x0_mean = Vector::Zero(n);
  ds.trajectory = simulate(ds.model, spec.seq_length, derive_seed(spec.seed, 1));
  return ds;
}

}  // namespace graphem
