#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "stiefel/models.hpp"

namespace stiefel::bench {

/// Haar-uniform J x K frame: orthogonal polar factor of a Gaussian matrix.
Matrix haar_frame(std::size_t J, std::size_t K, std::mt19937_64& rng);

struct PpcaSynthSpec {
  std::size_t N = 150;
  std::size_t J = 5;
  std::size_t K = 2;
  std::vector<double> lambda{9.0, 1.0};
  double sigma = 0.01;
  bool with_mean = false;
};

/// N=150, J=5, K=2, lambda=(9,1), sigma=0.01.
PpcaSynthSpec ppca_synthetic1();
/// N=100, J=50, K=3, lambda=(5,3,1.5), sigma^2=1.
PpcaSynthSpec ppca_synthetic2();

struct PpcaDataset {
  PpcaData data;
  Matrix w_true;
  std::vector<double> lambda_true;
  double sigma2_true = 0.0;
  std::vector<double> mu_true;
};

/// y_i = mu + W diag(lambda) z_i + sigma e_i with z_i, e_i standard normal.
PpcaDataset synth_ppca(const PpcaSynthSpec& spec, std::uint64_t seed);

struct EigenSynthSpec {
  std::size_t J = 30;
  std::size_t K = 3;
  std::vector<double> lambda;  // empty: (0.5 J, 0.3 J, -0.3 J, ...) truncated to K
  double mu = -1.0;
};

struct EigenDataset {
  EigenmodelData data;
  Matrix upsilon_true;
  std::vector<double> lambda_true;
  double mu_true = 0.0;
};

/// Graph drawn from the probit eigenmodel with a Haar-uniform frame.
EigenDataset synth_eigenmodel(const EigenSynthSpec& spec, std::uint64_t seed);

struct McSynthSpec {
  std::size_t J = 14;
  std::size_t T = 46;
  std::size_t K = 3;
  std::vector<double> lambda{40.0, 25.0, 15.0};
  double sigma = 0.5;
  std::size_t covariates = 1;
  double beta = 1.0;
  double missing_fraction = 0.1;
  double eta = 0.1;
};

struct McDataset {
  McData data;
  Matrix y_full;  // complete panel, including the masked entries
  Matrix phi_true;
  Matrix psi_true;
  std::vector<double> lambda_true;
  double sigma_true = 0.0;
};

/// Low-rank panel plus covariate effects and Gaussian noise, with a random
/// mask that leaves at least one observation in every row and column.
McDataset synth_matrix_completion(const McSynthSpec& spec, std::uint64_t seed);

}  // namespace stiefel::bench
