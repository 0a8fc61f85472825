#include "dsearch/cofactor.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dsearch/common.hpp"
#include "linalg.hpp"

namespace dsearch {

using detail::add_outer;
using detail::add_scaled;
using detail::cholesky_solve;
using detail::dot;

void CoFactorConfig::validate() const {
  if (latent_dim < 1) throw Error("latent_dim must be >= 1");
  if (!(c1 > c0) || !(c0 > 0.0)) throw Error("confidence weights must satisfy c1 > c0 > 0");
  if (lambda_alpha < 0 || lambda_beta < 0 || lambda_gamma < 0)
    throw Error("regularization strengths must be nonnegative");
  if (max_sweeps < 1) throw Error("max_sweeps must be >= 1");
  if (!(tolerance >= 0)) throw Error("tolerance must be nonnegative");
}

FactorModel init_model(std::size_t m, std::size_t n, int k, std::uint64_t seed) {
  if (m == 0 || n == 0 || k < 1) throw Error("model dimensions must be positive");
  FactorModel model;
  model.m = m;
  model.n = n;
  model.k = k;
  const double half = 0.5 / static_cast<double>(k);
  Rng rng(seed);
  auto fill = [&](std::vector<double>& v, std::size_t count) {
    v.resize(count);
    for (auto& x : v) x = rng.uniform(-half, half);
  };
  fill(model.U, m * static_cast<std::size_t>(k));
  fill(model.B, n * static_cast<std::size_t>(k));
  fill(model.G, n * static_cast<std::size_t>(k));
  model.b.assign(n, 0.0);
  model.c.assign(n, 0.0);
  return model;
}

namespace {

// B^T B for a row-major rows x k matrix.
std::vector<double> gram(const std::vector<double>& X, std::size_t rows, int k) {
  std::vector<double> g(static_cast<std::size_t>(k) * k, 0.0);
  for (std::size_t r = 0; r < rows; ++r) add_outer(g, X.data() + r * static_cast<std::size_t>(k), k, 1.0);
  return g;
}

double squared_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x * x;
  return s;
}

void check_shapes(const FactorModel& model, const PreferenceMatrix& M, const SppmiMatrix& S) {
  if (model.m != M.rows || model.n != M.cols)
    throw Error("factor model shape does not match the preference matrix");
  if (S.mat.rows != model.n || S.mat.cols != model.n)
    throw Error("SPPMI matrix must be n x n with n matching the label count");
}

}  // namespace

double objective(const FactorModel& model, const PreferenceMatrix& M, const SppmiMatrix& S,
                 const CoFactorConfig& cfg) {
  check_shapes(model, M, S);
  const int k = model.k;

  // c0-weighted square term over all m*n cells via the Gram matrix, then the
  // observed cells corrected to weight c1 against target 1.
  const auto gram_b = gram(model.B, model.n, k);
  double obj = 0.0;
  for (std::size_t u = 0; u < model.m; ++u) {
    const double* a = model.alpha(u);
    double quad = 0.0;
    for (int i = 0; i < k; ++i) {
      const double* gi = gram_b.data() + static_cast<std::size_t>(i) * k;
      quad += a[i] * dot(gi, a, k);
    }
    obj += cfg.c0 * quad;
  }
  for (std::size_t u = 0; u < M.rows; ++u) {
    const double* a = model.alpha(u);
    for (const int p : M.row_labels[u]) {
      const double r = dot(a, model.beta(static_cast<std::size_t>(p)), k);
      obj += cfg.c1 * (1.0 - r) * (1.0 - r) - cfg.c0 * r * r;
    }
  }
  for (std::size_t p = 0; p < S.mat.rows; ++p) {
    const double* bp = model.beta(p);
    for (const auto& [i, s] : S.mat.row[p]) {
      const double res = s - dot(bp, model.gamma(static_cast<std::size_t>(i)), k) - model.b[p] -
                         model.c[static_cast<std::size_t>(i)];
      obj += res * res;
    }
  }
  obj += cfg.lambda_alpha * squared_norm(model.U);
  obj += cfg.lambda_beta * squared_norm(model.B);
  obj += cfg.lambda_gamma * squared_norm(model.G);
  return obj;
}

int als_update_block(FactorModel& model, const PreferenceMatrix& M, const SppmiMatrix& S,
                     const CoFactorConfig& cfg, Block block) {
  cfg.validate();
  check_shapes(model, M, S);
  const int k = model.k;
  const std::size_t kk = static_cast<std::size_t>(k) * k;
  int jitter_count = 0;

  auto solve = [&](std::vector<double>& A, std::vector<double>& rhs) {
    std::vector<double> A_copy = A;
    std::vector<double> rhs_copy = rhs;
    if (cholesky_solve(A, rhs, k)) return;
    ++jitter_count;
    for (int i = 0; i < k; ++i) A_copy[static_cast<std::size_t>(i) * k + i] += 1e-10;
    if (!cholesky_solve(A_copy, rhs_copy, k))
      throw Error("ALS row system singular even after ridge jitter");
    rhs = rhs_copy;
  };

  const double dc = cfg.c1 - cfg.c0;
  std::vector<double> A(kk), rhs(static_cast<std::size_t>(k));

  switch (block) {
    case Block::alpha: {
      const auto gram_b = gram(model.B, model.n, k);
      for (std::size_t u = 0; u < model.m; ++u) {
        for (std::size_t i = 0; i < kk; ++i) A[i] = cfg.c0 * gram_b[i];
        for (int i = 0; i < k; ++i) A[static_cast<std::size_t>(i) * k + i] += cfg.lambda_alpha;
        std::fill(rhs.begin(), rhs.end(), 0.0);
        for (const int p : M.row_labels[u]) {
          const double* bp = model.beta(static_cast<std::size_t>(p));
          add_outer(A, bp, k, dc);
          add_scaled(rhs, bp, k, cfg.c1);
        }
        solve(A, rhs);
        std::copy(rhs.begin(), rhs.end(), model.alpha(u));
      }
      break;
    }
    case Block::beta: {
      // datasets containing each label (columns of M)
      std::vector<std::vector<int>> label_datasets(model.n);
      for (std::size_t u = 0; u < M.rows; ++u)
        for (const int p : M.row_labels[u])
          label_datasets[static_cast<std::size_t>(p)].push_back(static_cast<int>(u));

      const auto gram_u = gram(model.U, model.m, k);
      for (std::size_t p = 0; p < model.n; ++p) {
        for (std::size_t i = 0; i < kk; ++i) A[i] = cfg.c0 * gram_u[i];
        for (int i = 0; i < k; ++i) A[static_cast<std::size_t>(i) * k + i] += cfg.lambda_beta;
        std::fill(rhs.begin(), rhs.end(), 0.0);
        for (const int u : label_datasets[p]) {
          const double* au = model.alpha(static_cast<std::size_t>(u));
          add_outer(A, au, k, dc);
          add_scaled(rhs, au, k, cfg.c1);
        }
        for (const auto& [i, s] : S.mat.row[p]) {
          const double* gi = model.gamma(static_cast<std::size_t>(i));
          add_outer(A, gi, k, 1.0);
          add_scaled(rhs, gi, k, s - model.b[p] - model.c[static_cast<std::size_t>(i)]);
        }
        solve(A, rhs);
        std::copy(rhs.begin(), rhs.end(), model.beta(p));
      }
      break;
    }
    case Block::gamma: {
      // S symmetric: row i lists the labels p with S_pi != 0
      for (std::size_t i = 0; i < model.n; ++i) {
        std::fill(A.begin(), A.end(), 0.0);
        for (int d = 0; d < k; ++d) A[static_cast<std::size_t>(d) * k + d] = cfg.lambda_gamma;
        std::fill(rhs.begin(), rhs.end(), 0.0);
        for (const auto& [p, s] : S.mat.row[i]) {
          const double* bp = model.beta(static_cast<std::size_t>(p));
          add_outer(A, bp, k, 1.0);
          add_scaled(rhs, bp, k, s - model.b[static_cast<std::size_t>(p)] - model.c[i]);
        }
        solve(A, rhs);
        std::copy(rhs.begin(), rhs.end(), model.gamma(i));
      }
      break;
    }
    case Block::bias_label: {
      // exact coordinate minimizer is the mean residual
      for (std::size_t p = 0; p < model.n; ++p) {
        const auto& cells = S.mat.row[p];
        if (cells.empty()) {
          model.b[p] = 0.0;
          continue;
        }
        double acc = 0.0;
        for (const auto& [i, s] : cells)
          acc += s - dot(model.beta(p), model.gamma(static_cast<std::size_t>(i)), k) -
                 model.c[static_cast<std::size_t>(i)];
        model.b[p] = acc / static_cast<double>(cells.size());
      }
      break;
    }
    case Block::bias_context: {
      for (std::size_t i = 0; i < model.n; ++i) {
        const auto& cells = S.mat.row[i];
        if (cells.empty()) {
          model.c[i] = 0.0;
          continue;
        }
        double acc = 0.0;
        for (const auto& [p, s] : cells)
          acc += s - dot(model.beta(static_cast<std::size_t>(p)), model.gamma(i), k) -
                 model.b[static_cast<std::size_t>(p)];
        model.c[i] = acc / static_cast<double>(cells.size());
      }
      break;
    }
  }
  return jitter_count;
}

int als_sweep(FactorModel& model, const PreferenceMatrix& M, const SppmiMatrix& S,
              const CoFactorConfig& cfg) {
  int jitter_count = 0;
  for (const Block block : {Block::alpha, Block::beta, Block::gamma, Block::bias_label,
                            Block::bias_context})
    jitter_count += als_update_block(model, M, S, cfg, block);
  return jitter_count;
}

TrainResult train(const PreferenceMatrix& M, const SppmiMatrix& S, const CoFactorConfig& cfg) {
  cfg.validate();
  if (M.rows == 0 || M.cols == 0) throw Error("cannot train on an empty preference matrix");

  TrainResult result;
  result.model = init_model(M.rows, M.cols, cfg.latent_dim, cfg.seed);
  result.objective_trace.push_back(objective(result.model, M, S, cfg));

  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    result.jitter_warnings += als_sweep(result.model, M, S, cfg);
    const double obj = objective(result.model, M, S, cfg);
    if (!std::isfinite(obj))
      throw Error("objective became non-finite at sweep " + std::to_string(sweep + 1) +
                  "; check confidence weights and regularization");
    const double prev = result.objective_trace.back();
    result.objective_trace.push_back(obj);
    ++result.sweeps;
    if (std::fabs(prev - obj) / std::max(std::fabs(prev), 1e-12) < cfg.tolerance) break;
  }
  return result;
}

namespace {

void write_row(std::ofstream& out, const double* v, std::size_t count) {
  char buf[48];
  for (std::size_t i = 0; i < count; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
    if (i) out << ' ';
    out << buf;
  }
  out << '\n';
}

}  // namespace

void save_model(const FactorModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "dsearch-cofactor 1\n";
  out << model.m << ' ' << model.n << ' ' << model.k << '\n';
  for (std::size_t u = 0; u < model.m; ++u) write_row(out, model.alpha(u), static_cast<std::size_t>(model.k));
  for (std::size_t p = 0; p < model.n; ++p) write_row(out, model.beta(p), static_cast<std::size_t>(model.k));
  for (std::size_t i = 0; i < model.n; ++i) write_row(out, model.gamma(i), static_cast<std::size_t>(model.k));
  write_row(out, model.b.data(), model.n);
  write_row(out, model.c.data(), model.n);
}

FactorModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string magic, version;
  in >> magic >> version;
  if (magic != "dsearch-cofactor" || version != "1")
    throw Error(path.string() + ": not a dsearch-cofactor v1 model file");
  FactorModel model;
  if (!(in >> model.m >> model.n >> model.k) || model.k < 1)
    throw Error(path.string() + ": malformed model header");
  auto read_all = [&](std::vector<double>& v, std::size_t count) {
    v.resize(count);
    for (auto& x : v)
      if (!(in >> x)) throw Error(path.string() + ": truncated model file");
  };
  read_all(model.U, model.m * static_cast<std::size_t>(model.k));
  read_all(model.B, model.n * static_cast<std::size_t>(model.k));
  read_all(model.G, model.n * static_cast<std::size_t>(model.k));
  read_all(model.b, model.n);
  read_all(model.c, model.n);
  return model;
}

}  // namespace dsearch
