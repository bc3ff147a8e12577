#include "neuroforge/environments.hpp"

#include <cmath>
#include <stdexcept>

namespace neuroforge {

namespace {
void require_nonterminal(const Environment& env, int state) {
  if (state < 0 || state >= env.state_count())
    throw std::out_of_range("state index out of range");
  if (env.is_terminal(state))
    throw TerminalError("terminal states have no afterstates");
}
}  // namespace

ChainMDP::ChainMDP(int length, int start) : length_(length), start_(start) {
  if (length < 3) throw std::invalid_argument("chain needs length >= 3");
  if (start >= 0 && (start <= 0 || start >= length - 1))
    throw std::invalid_argument("chain start must be a non-terminal state");
}

bool ChainMDP::is_terminal(int state) const {
  return state == 0 || state == length_ - 1;
}

int ChainMDP::initial_state(int episode) const {
  if (start_ >= 0) return start_;
  return 1 + episode % (length_ - 2);
}

Eigen::VectorXd ChainMDP::features(int state) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(length_);
  x[state] = 1.0;
  return x;
}

std::vector<Afterstate> ChainMDP::afterstates(int state) const {
  require_nonterminal(*this, state);
  auto reward_entering = [this](int succ) {
    double r = -1.0;
    if (succ == length_ - 1) r += 10.0;
    if (succ == 0) r += 1.0;
    return r;
  };
  return {{0, state - 1, reward_entering(state - 1)},
          {1, state + 1, reward_entering(state + 1)}};
}

bool ChainMDP::success(const Network& net, double gamma, int max_steps) const {
  int state = initial_state(0);
  for (int step = 0; step < max_steps && !is_terminal(state); ++step)
    state = greedy_choice(afterstates(state), net, *this, gamma).successor;
  return state == length_ - 1;
}

Eigen::VectorXd XorBandit::features(int state) const {
  const int context = state < 4 ? state : (state - 4) / 2;
  Eigen::VectorXd x(3);
  x[0] = static_cast<double>((context >> 1) & 1);
  x[1] = static_cast<double>(context & 1);
  x[2] = state < 4 ? 0.0 : static_cast<double>((state - 4) % 2);
  return x;
}

std::vector<Afterstate> XorBandit::afterstates(int state) const {
  require_nonterminal(*this, state);
  if (state < 4) {
    // Commit to an answer; the reward arrives on the exit transition.
    return {{0, 4 + state * 2, 0.0}, {1, 4 + state * 2 + 1, 0.0}};
  }
  const int context = (state - 4) / 2;
  const int answer = (state - 4) % 2;
  const double reward = answer == xor_truth(context) ? 1.0 : -1.0;
  return {{0, 12, reward}};
}

bool XorBandit::success(const Network& net, double gamma, int max_steps) const {
  (void)gamma;
  (void)max_steps;
  for (int context = 0; context < 4; ++context) {
    const double v0 = net.forward(features(4 + context * 2));
    const double v1 = net.forward(features(4 + context * 2 + 1));
    const int answer = v1 > v0 ? 1 : 0;  // tie -> lowest action index
    if (answer != xor_truth(context)) return false;
  }
  return true;
}

GridWorld::GridWorld(int width, int height, int start_x, int start_y,
                     int goal_x, int goal_y)
    : width_(width), height_(height) {
  if (width < 2 || height < 2)
    throw std::invalid_argument("grid needs width and height >= 2");
  if (goal_x < 0) goal_x = width - 1;
  if (goal_y < 0) goal_y = height - 1;
  start_ = start_y * width + start_x;
  goal_ = goal_y * width + goal_x;
  if (start_ == goal_) throw std::invalid_argument("grid start equals goal");
}

bool GridWorld::is_terminal(int state) const { return state == goal_; }

int GridWorld::initial_state(int episode) const {
  (void)episode;
  return start_;
}

Eigen::VectorXd GridWorld::features(int state) const {
  const int x = state % width_;
  const int y = state / width_;
  const int gx = goal_ % width_;
  const int gy = goal_ / width_;
  Eigen::VectorXd f(4);
  f[0] = static_cast<double>(x) / width_;
  f[1] = static_cast<double>(y) / height_;
  f[2] = static_cast<double>(gx - x) / width_;
  f[3] = static_cast<double>(gy - y) / height_;
  return f;
}

std::vector<Afterstate> GridWorld::afterstates(int state) const {
  require_nonterminal(*this, state);
  const int x = state % width_;
  const int y = state / width_;
  const int dx[4] = {1, -1, 0, 0};
  const int dy[4] = {0, 0, 1, -1};
  std::vector<Afterstate> out;
  out.reserve(4);
  for (int a = 0; a < 4; ++a) {
    int nx = x + dx[a];
    int ny = y + dy[a];
    if (nx < 0 || nx >= width_ || ny < 0 || ny >= height_) {
      nx = x;  // off-grid moves stay in place
      ny = y;
    }
    const int succ = ny * width_ + nx;
    out.push_back({a, succ, succ == goal_ ? 9.0 : -1.0});
  }
  return out;
}

bool GridWorld::success(const Network& net, double gamma, int max_steps) const {
  int state = initial_state(0);
  for (int step = 0; step < max_steps && !is_terminal(state); ++step)
    state = greedy_choice(afterstates(state), net, *this, gamma).successor;
  return state == goal_;
}

Eigen::VectorXd optimal_values(const Environment& env, double gamma) {
  if (gamma < 0.0 || gamma >= 1.0)
    throw std::invalid_argument("gamma must lie in [0,1)");
  const int n = env.state_count();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  for (int sweep = 0; sweep < 100000; ++sweep) {
    double change = 0.0;
    for (int s = 0; s < n; ++s) {
      if (env.is_terminal(s)) continue;
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& a : env.afterstates(s)) {
        const double value =
            a.reward + (env.is_terminal(a.successor) ? 0.0 : gamma * v[a.successor]);
        best = std::max(best, value);
      }
      change = std::max(change, std::abs(best - v[s]));
      v[s] = best;
    }
    if (change < 1e-12) break;
  }
  return v;
}

const Afterstate& greedy_choice(const std::vector<Afterstate>& options,
                                const Network& net, const Environment& env,
                                double gamma) {
  if (options.empty()) throw std::invalid_argument("no afterstates to choose");
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(options.size()); ++i) {
    const auto& a = options[i];
    const double v = env.is_terminal(a.successor)
                         ? 0.0
                         : net.forward(env.features(a.successor));
    const double score = a.reward + gamma * v;
    if (score > best_score) {  // strict: ties keep the lowest action index
      best_score = score;
      best = i;
    }
  }
  return options[best];
}

double greedy_episode_reward(const Network& net, const Environment& env,
                             int episode, double gamma, int max_steps) {
  int state = env.initial_state(episode);
  double total = 0.0;
  for (int step = 0; step < max_steps && !env.is_terminal(state); ++step) {
    const auto options = env.afterstates(state);
    const Afterstate& choice = greedy_choice(options, net, env, gamma);
    total += choice.reward;
    state = choice.successor;
  }
  return total;
}

}  // namespace neuroforge
