#include "neuroforge/cma.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "neuroforge/log.hpp"

namespace neuroforge {

double expected_norm_exact(int n) {
  return std::sqrt(2.0) *
         std::exp(std::lgamma((n + 1) / 2.0) - std::lgamma(n / 2.0));
}

double expected_norm_approx(int n) {
  const double nd = n;
  return std::sqrt(nd) * (1.0 - 1.0 / (4.0 * nd) + 1.0 / (21.0 * nd * nd));
}

double expected_norm(int n) {
  // The Gamma-ratio form is well-conditioned via lgamma at these sizes; the
  // series takes over where the ratio's arguments grow large.
  return n <= 100 ? expected_norm_exact(n) : expected_norm_approx(n);
}

CmaParams derive_cma_params(int n, int o) {
  if (n < 1) throw std::invalid_argument("dimension must be >= 1");
  if (o < 0) throw std::invalid_argument("stagnation level must be >= 0");
  CmaParams p;
  p.lambda = 4 + static_cast<int>(std::ceil(3.0 * std::log(double(n + o))));
  p.mu = p.lambda / 2;
  p.weights.resize(p.mu);
  for (int i = 0; i < p.mu; ++i)
    p.weights[i] = std::log(p.mu + 1.0) - std::log(i + 1.0);
  p.weights /= p.weights.sum();
  p.mu_eff = 1.0 / p.weights.squaredNorm();
  p.c_c = 4.0 / (n + 4.0);
  p.c_sigma = (p.mu_eff + 2.0) / (n + p.mu_eff + 3.0);
  p.d_sigma =
      1.0 + 2.0 * std::max(0.0, std::sqrt((p.mu_eff - 1.0) / (n + 1.0)) - 1.0) +
      p.c_sigma;
  p.mu_cov = p.mu_eff;
  p.c_cov = (1.0 / p.mu_cov) * 2.0 / (n + std::sqrt(2.0)) +
            (1.0 - 1.0 / p.mu_cov) *
                std::min(1.0, (2.0 * p.mu_eff - 1.0) /
                                  ((n + 2.0) * (n + 2.0) + p.mu_eff));
  return p;
}

double initial_sigma(int o, const CmaBudget& budget) {
  return std::min(budget.sigma_max,
                  budget.sigma_default + budget.sigma_o_gain * std::log(o + 1.0));
}

CmaState cma_init(const Eigen::VectorXd& x0, int o, const CmaBudget& budget) {
  CmaState s;
  s.n = static_cast<int>(x0.size());
  s.o = o;
  s.params = derive_cma_params(s.n, o);
  s.mean = x0;
  s.sigma = initial_sigma(o, budget);
  s.C = Eigen::MatrixXd::Identity(s.n, s.n);
  s.p_c = Eigen::VectorXd::Zero(s.n);
  s.p_sigma = Eigen::VectorXd::Zero(s.n);
  s.B = Eigen::MatrixXd::Identity(s.n, s.n);
  s.eig_sqrt = Eigen::VectorXd::Ones(s.n);
  return s;
}

void cma_inflate(CmaState& state, CmaBudget& budget, int o) {
  state.o = o;
  state.params = derive_cma_params(state.n, o);
  budget.tau_stop = std::lround(budget.rho * (1.0 + o));
  state.sigma = initial_sigma(o, budget);
}

std::vector<Eigen::VectorXd> cma_ask(const CmaState& state, Rng& rng) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(state.params.lambda);
  for (int k = 0; k < state.params.lambda; ++k) {
    const Eigen::VectorXd z = normal_vector(rng, state.n);
    out.push_back(state.mean +
                  state.sigma * (state.B * state.eig_sqrt.cwiseProduct(z)));
  }
  return out;
}

std::vector<int> rank_descending(const std::vector<double>& fitnesses) {
  std::vector<int> order(fitnesses.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return fitnesses[a] > fitnesses[b]; });
  return order;
}

namespace {
void refresh_eigensystem(CmaState& s) {
  s.C = ((s.C + s.C.transpose()) / 2.0).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s.C);
  if (solver.info() != Eigen::Success) {
    log_error("covariance eigendecomposition failed; resetting to identity");
    s.C = Eigen::MatrixXd::Identity(s.n, s.n);
    s.B = Eigen::MatrixXd::Identity(s.n, s.n);
    s.eig_sqrt = Eigen::VectorXd::Ones(s.n);
    return;
  }
  s.B = solver.eigenvectors();
  s.eig_sqrt = solver.eigenvalues().cwiseMax(1e-12).cwiseSqrt();
}
}  // namespace

void cma_tell(CmaState& state, const std::vector<Eigen::VectorXd>& candidates,
              const std::vector<double>& fitnesses) {
  if (candidates.size() != fitnesses.size() ||
      static_cast<int>(candidates.size()) != state.params.lambda)
    throw std::invalid_argument("cma_tell expects lambda scored candidates");

  const CmaParams& p = state.params;
  const std::vector<int> order = rank_descending(fitnesses);
  if (!state.has_best || fitnesses[order[0]] > state.best_fitness) {
    state.best_fitness = fitnesses[order[0]];
    state.best_vector = candidates[order[0]];
    state.has_best = true;
  }

  const Eigen::VectorXd m_old = state.mean;
  Eigen::VectorXd m_new = Eigen::VectorXd::Zero(state.n);
  for (int i = 0; i < p.mu; ++i) m_new += p.weights[i] * candidates[order[i]];
  state.mean = m_new;
  const Eigen::VectorXd displacement = m_new - m_old;

  // Step-size path: whitened displacement C^{-1/2} D / sigma with
  // C^{-1/2} = B E^{-1} B^T.
  const Eigen::VectorXd whitened =
      state.B * (state.B.transpose() * displacement)
                    .cwiseQuotient(state.eig_sqrt) /
      state.sigma;
  state.p_sigma = (1.0 - p.c_sigma) * state.p_sigma +
                  std::sqrt(p.c_sigma * (2.0 - p.c_sigma) * p.mu_eff) * whitened;

  state.tau += 1;
  const double normalizer =
      std::sqrt(1.0 - std::pow(1.0 - p.c_sigma, 2.0 * state.tau));
  const double h_sigma =
      state.p_sigma.norm() / normalizer <
              (1.4 + 2.0 / (state.n + 1.0)) * expected_norm(state.n)
          ? 1.0
          : 0.0;

  state.p_c = (1.0 - p.c_c) * state.p_c +
              h_sigma * std::sqrt(p.c_c * (2.0 - p.c_c)) *
                  (std::sqrt(p.mu_eff) / state.sigma) * displacement;

  // Rank-one plus rank-mu covariance update; both outer-product factors use
  // deviations from the pre-update mean.
  Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(state.n, state.n);
  for (int i = 0; i < p.mu; ++i) {
    const Eigen::VectorXd d = candidates[order[i]] - m_old;
    rank_mu.noalias() += (p.weights[i] / (state.sigma * state.sigma)) * d *
                         d.transpose();
  }
  state.C = (1.0 - p.c_cov) * state.C +
            (p.c_cov / p.mu_cov) * state.p_c * state.p_c.transpose() +
            p.c_cov * (1.0 - 1.0 / p.mu_cov) * rank_mu;

  state.sigma *= std::exp((p.c_sigma / p.d_sigma) *
                          (state.p_sigma.norm() / expected_norm(state.n) - 1.0));

  refresh_eigensystem(state);
  state.t += 1;
}

bool cma_should_stop(const CmaState& state, const CmaBudget& budget) {
  if (state.has_best && state.best_fitness > budget.f_stop) return true;
  return state.t >= budget.tau_stop;
}

double condition_number(const CmaState& state) {
  const double lo = state.eig_sqrt.minCoeff();
  const double hi = state.eig_sqrt.maxCoeff();
  return (hi * hi) / (lo * lo);
}

}  // namespace neuroforge
