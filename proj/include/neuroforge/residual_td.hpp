#ifndef NEUROFORGE_RESIDUAL_TD_HPP
#define NEUROFORGE_RESIDUAL_TD_HPP

#include <Eigen/Core>

#include "neuroforge/environments.hpp"
#include "neuroforge/network.hpp"
#include "neuroforge/rng.hpp"

namespace neuroforge {

struct TDConfig {
  double alpha = 0.05;    // learning rate
  double gamma = 0.9;     // discount, in [0,1)
  double phi = 0.5;       // update blend: 0 = direct, 1 = residual-gradient
  double epsilon = 0.05;  // exploration probability
  int episodes_per_eval = 200;
  int max_steps_per_episode = 500;
  // When set, fitness is measured by greedy rollouts after training instead
  // of the reward collected during training.
  bool greedy_fitness = false;
};

struct Transition {
  Eigen::VectorXd state;      // features of x_t
  Eigen::VectorXd successor;  // features of x_{t+1}; ignored when terminal
  double reward = 0.0;
  bool terminal = false;
};

// Reward prediction error delta = R + gamma * v_next - v_now, with v_next = 0
// at terminal successors (callers pass 0).
double td_error(double reward, double v_next, double v_now, double gamma);

// Direct-method update alpha * delta * dV(x_t)/dw. Returns the delta vector
// without applying it.
Eigen::VectorXd direct_delta(const Network& net, const Transition& t,
                             const TDConfig& cfg);

// Residual-gradient update -alpha * delta * [gamma * dV(x_{t+1})/dw -
// dV(x_t)/dw], with zero successor gradient at terminals.
Eigen::VectorXd residual_gradient_delta(const Network& net, const Transition& t,
                                        const TDConfig& cfg);

// Blend (1 - phi) * direct + phi * residual_gradient. The endpoints phi = 0
// and phi = 1 return the constituent vectors bit-for-bit.
Eigen::VectorXd residual_delta(const Network& net, const Transition& t,
                               const TDConfig& cfg);

// Mean squared one-step error over all non-terminal states, each following
// the greedy policy's chosen transition under the current value function.
double bellman_residual(const Network& net, const Environment& env,
                        double gamma);

// One training episode: epsilon-greedy afterstate selection (greedy maximizes
// R + gamma * V(x'), ties -> lowest action index), residual_delta applied to
// the weights after every transition. Returns the summed reward; if
// `transitions` is non-null the number of transitions taken is added to it.
// Draw order per step: one exploration coin, then one uniform index only when
// the coin demands exploration.
double train_episode(Network& net, const Environment& env, const TDConfig& cfg,
                     int episode, Rng& rng, long* transitions = nullptr);

// episodes_per_eval training episodes; the raw fitness is the total reward
// collected while training (greedy_fitness instead sums the same number of
// greedy no-learning episodes run afterwards).
double evaluate_fitness(Network& net, const Environment& env,
                        const TDConfig& cfg, Rng& rng);

}  // namespace neuroforge

#endif
