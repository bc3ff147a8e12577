#ifndef NEUROFORGE_CMA_HPP
#define NEUROFORGE_CMA_HPP

#include <limits>
#include <vector>

#include <Eigen/Core>

#include "neuroforge/rng.hpp"

namespace neuroforge {

// Iteration/fitness budget for one optimizer run. tau_stop tracks
// rho * (1 + o) as the stagnation level o rises.
struct CmaBudget {
  double rho = 1000.0;
  long tau_stop = 1000;
  double f_stop = -std::numeric_limits<double>::infinity();
  double sigma_max = 1.0;
  double sigma_default = 0.5;
  double sigma_o_gain = 0.01;
};

// Sample-size-dependent strategy parameters, a pure function of (n, o).
struct CmaParams {
  int lambda = 0;  // 4 + ceil(3 ln(n + o))
  int mu = 0;      // floor(lambda / 2)
  Eigen::VectorXd weights;  // w_i proportional to ln(mu+1) - ln(i), sum 1
  double mu_eff = 0.0;      // 1 / sum w_i^2
  double c_c = 0.0;
  double c_sigma = 0.0;
  double d_sigma = 0.0;
  double mu_cov = 0.0;
  double c_cov = 0.0;
};

struct CmaState {
  int n = 0;  // search-space dimension
  int o = 0;  // stagnation level
  CmaParams params;

  Eigen::VectorXd mean;
  double sigma = 0.0;
  Eigen::MatrixXd C;
  Eigen::VectorXd p_c;
  Eigen::VectorXd p_sigma;

  // Eigendecomposition C = B * diag(eig_sqrt^2) * B^T, refreshed on every
  // covariance change; eigenvalues are clamped at 1e-12 before the sqrt.
  Eigen::MatrixXd B;
  Eigen::VectorXd eig_sqrt;

  long t = 0;    // completed iterations
  long tau = 0;  // completed trials, drives the H_sigma normalizer

  Eigen::VectorXd best_vector;
  double best_fitness = -std::numeric_limits<double>::infinity();
  bool has_best = false;
};

// E||N(0,I)||: exact sqrt(2)*Gamma((n+1)/2)/Gamma(n/2) up to n = 100, then
// the series approximation sqrt(n)*(1 - 1/(4n) + 1/(21 n^2)).
double expected_norm(int n);
double expected_norm_exact(int n);
double expected_norm_approx(int n);

CmaParams derive_cma_params(int n, int o);

// Initial step size min(sigma_max, sigma_default + sigma_o_gain * ln(o + 1)).
double initial_sigma(int o, const CmaBudget& budget);

// Fresh state centered on x0 at stagnation level o: C = I, zero paths.
CmaState cma_init(const Eigen::VectorXd& x0, int o, const CmaBudget& budget);

// Raise the stagnation level: recompute lambda/mu/weights and the dependent
// constants, extend tau_stop to rho * (1 + o), and reset sigma. Mean, C, and
// paths are left in place so the run continues from where it was.
void cma_inflate(CmaState& state, CmaBudget& budget, int o);

// lambda candidates, each mean + sigma * B * diag(eig_sqrt) * z with
// z standard normal (n draws per candidate, in candidate order).
std::vector<Eigen::VectorXd> cma_ask(const CmaState& state, Rng& rng);

// Candidate indices by descending fitness (maximization), ties in favor of
// the lower candidate index.
std::vector<int> rank_descending(const std::vector<double>& fitnesses);

// One full iteration given the asked candidates and their fitnesses: rank,
// recombine the mean, update both paths (with the H_sigma gate), covariance,
// and step size, then refresh the eigendecomposition. A failed
// eigendecomposition resets C to identity and logs the incident.
void cma_tell(CmaState& state, const std::vector<Eigen::VectorXd>& candidates,
              const std::vector<double>& fitnesses);

// True once best_fitness beats budget.f_stop or t reached budget.tau_stop.
bool cma_should_stop(const CmaState& state, const CmaBudget& budget);

// Ratio of largest to smallest eigenvalue of C (for trace output).
double condition_number(const CmaState& state);

}  // namespace neuroforge

#endif
