#pragma once

// Joint factorization of the preference matrix and the SPPMI matrix. The
// label factors beta are shared between the weighted MF term and the label
// embedding term; optimization is block-coordinate with closed-form updates
// (vector-wise ALS).

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dsearch/cooccur.hpp"

namespace dsearch {

struct CoFactorConfig {
  int latent_dim = 40;
  double c1 = 1.0;   // confidence on observed cells
  double c0 = 0.1;   // confidence on zero cells
  double lambda_alpha = 1e-2;
  double lambda_beta = 1e-2;
  double lambda_gamma = 1e-2;
  int max_sweeps = 100;
  double tolerance = 1e-5;  // relative objective change
  std::uint64_t seed = 42;

  void validate() const;
};

struct FactorModel {
  std::size_t m = 0, n = 0;
  int k = 0;
  std::vector<double> U;  // m x k, dataset factors alpha_u
  std::vector<double> B;  // n x k, label factors beta_p
  std::vector<double> G;  // n x k, context factors gamma_i
  std::vector<double> b;  // n, label embedding bias
  std::vector<double> c;  // n, context embedding bias

  double* alpha(std::size_t u) { return U.data() + u * static_cast<std::size_t>(k); }
  const double* alpha(std::size_t u) const { return U.data() + u * static_cast<std::size_t>(k); }
  double* beta(std::size_t p) { return B.data() + p * static_cast<std::size_t>(k); }
  const double* beta(std::size_t p) const { return B.data() + p * static_cast<std::size_t>(k); }
  double* gamma(std::size_t i) { return G.data() + i * static_cast<std::size_t>(k); }
  const double* gamma(std::size_t i) const { return G.data() + i * static_cast<std::size_t>(k); }
};

// Factor entries i.i.d. uniform in [-0.5/k, 0.5/k], biases zero.
FactorModel init_model(std::size_t m, std::size_t n, int k, std::uint64_t seed);

// Exact loss: weighted MF over all m*n cells, embedding term over nonzero
// SPPMI cells, plus the three regularizers.
double objective(const FactorModel& model, const PreferenceMatrix& M, const SppmiMatrix& S,
                 const CoFactorConfig& cfg);

enum class Block { alpha, beta, gamma, bias_label, bias_context };

// Exact minimizer of the loss in one block, all other blocks held fixed.
// Returns the number of singular row systems rescued with ridge jitter.
int als_update_block(FactorModel& model, const PreferenceMatrix& M, const SppmiMatrix& S,
                     const CoFactorConfig& cfg, Block block);

// One full pass over the blocks {alpha}, {beta}, {gamma}, {b}, {c}; each row
// solve is the exact minimizer of the loss in that block. Returns the number
// of singular systems rescued with ridge jitter.
int als_sweep(FactorModel& model, const PreferenceMatrix& M, const SppmiMatrix& S,
              const CoFactorConfig& cfg);

struct TrainResult {
  FactorModel model;
  std::vector<double> objective_trace;  // initial value plus one entry per sweep
  int sweeps = 0;
  int jitter_warnings = 0;
};

TrainResult train(const PreferenceMatrix& M, const SppmiMatrix& S, const CoFactorConfig& cfg);

// Text serialization, round-trips bit-exactly.
void save_model(const FactorModel& model, const std::filesystem::path& path);
FactorModel load_model(const std::filesystem::path& path);

}  // namespace dsearch
