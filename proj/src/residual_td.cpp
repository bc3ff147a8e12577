#include "neuroforge/residual_td.hpp"

#include <stdexcept>

namespace neuroforge {

double td_error(double reward, double v_next, double v_now, double gamma) {
  return reward + gamma * v_next - v_now;
}

namespace {
double transition_error(const Network& net, const Transition& t, double gamma) {
  const double v_now = net.forward(t.state);
  const double v_next = t.terminal ? 0.0 : net.forward(t.successor);
  return td_error(t.reward, v_next, v_now, gamma);
}
}  // namespace

Eigen::VectorXd direct_delta(const Network& net, const Transition& t,
                             const TDConfig& cfg) {
  const double delta = transition_error(net, t, cfg.gamma);
  return cfg.alpha * delta * net.gradient(t.state);
}

Eigen::VectorXd residual_gradient_delta(const Network& net,
                                        const Transition& t,
                                        const TDConfig& cfg) {
  const double delta = transition_error(net, t, cfg.gamma);
  Eigen::VectorXd g = -net.gradient(t.state);
  if (!t.terminal) g += cfg.gamma * net.gradient(t.successor);
  return -cfg.alpha * delta * g;
}

Eigen::VectorXd residual_delta(const Network& net, const Transition& t,
                               const TDConfig& cfg) {
  if (cfg.phi == 0.0) return direct_delta(net, t, cfg);
  if (cfg.phi == 1.0) return residual_gradient_delta(net, t, cfg);
  return (1.0 - cfg.phi) * direct_delta(net, t, cfg) +
         cfg.phi * residual_gradient_delta(net, t, cfg);
}

double bellman_residual(const Network& net, const Environment& env,
                        double gamma) {
  double sum = 0.0;
  int n = 0;
  for (int s = 0; s < env.state_count(); ++s) {
    if (env.is_terminal(s)) continue;
    const auto options = env.afterstates(s);
    const Afterstate& choice = greedy_choice(options, net, env, gamma);
    const double v_now = net.forward(env.features(s));
    const double v_next = env.is_terminal(choice.successor)
                              ? 0.0
                              : net.forward(env.features(choice.successor));
    const double delta = td_error(choice.reward, v_next, v_now, gamma);
    sum += delta * delta;
    ++n;
  }
  if (n == 0) throw std::logic_error("environment has no non-terminal states");
  return sum / n;
}

double train_episode(Network& net, const Environment& env, const TDConfig& cfg,
                     int episode, Rng& rng, long* transitions) {
  int state = env.initial_state(episode);
  double total = 0.0;
  for (int step = 0; step < cfg.max_steps_per_episode; ++step) {
    if (env.is_terminal(state)) break;
    const auto options = env.afterstates(state);
    const bool explore = bernoulli(rng, cfg.epsilon);
    const Afterstate& choice =
        explore
            ? options[uniform_int(rng, 0, static_cast<int>(options.size()) - 1)]
            : greedy_choice(options, net, env, cfg.gamma);

    Transition t;
    t.state = env.features(state);
    t.reward = choice.reward;
    t.terminal = env.is_terminal(choice.successor);
    if (!t.terminal) t.successor = env.features(choice.successor);

    net.weights() += residual_delta(net, t, cfg);
    total += choice.reward;
    state = choice.successor;
    if (transitions) ++*transitions;
  }
  return total;
}

double evaluate_fitness(Network& net, const Environment& env,
                        const TDConfig& cfg, Rng& rng) {
  double trained = 0.0;
  for (int e = 0; e < cfg.episodes_per_eval; ++e)
    trained += train_episode(net, env, cfg, e, rng);
  if (!cfg.greedy_fitness) return trained;

  double greedy = 0.0;
  for (int e = 0; e < cfg.episodes_per_eval; ++e)
    greedy += greedy_episode_reward(net, env, e, cfg.gamma,
                                    cfg.max_steps_per_episode);
  return greedy;
}

}  // namespace neuroforge
