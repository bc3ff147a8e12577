#ifndef NEUROFORGE_ENVIRONMENTS_HPP
#define NEUROFORGE_ENVIRONMENTS_HPP

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "neuroforge/network.hpp"

namespace neuroforge {

// Thrown when transitions are requested out of a terminal state.
struct TerminalError : std::logic_error {
  using std::logic_error::logic_error;
};

// One admissible transition out of a state. Rewards and successors are
// deterministic functions of (state, action).
struct Afterstate {
  int action;     // contiguous from 0, deterministic order
  int successor;  // state index; terminal iff Environment::is_terminal
  double reward;
};

// Deterministic episodic task over an enumerable state set. States are dense
// indices [0, state_count); terminal states have features but are never fed
// through a value network.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::string name() const = 0;
  virtual int feature_size() const = 0;
  virtual int state_count() const = 0;
  virtual bool is_terminal(int state) const = 0;
  // Start state for the given episode ordinal (deterministic; environments
  // may cycle over start states).
  virtual int initial_state(int episode) const = 0;
  virtual Eigen::VectorXd features(int state) const = 0;
  // Non-empty for every non-terminal state; throws for terminal states.
  virtual std::vector<Afterstate> afterstates(int state) const = 0;
  // Task-defined solved predicate for a trained value network.
  virtual bool success(const Network& net, double gamma, int max_steps) const = 0;
};

// Random-walk chain: states 0..length-1, both ends terminal. Every move costs
// -1; entering the right end adds +10, the left end +1. Features are the
// position one-hot. start = -1 (default) cycles episodes round-robin over the
// non-terminal states; a fixed index otherwise.
class ChainMDP : public Environment {
 public:
  explicit ChainMDP(int length, int start = -1);
  std::string name() const override { return "chain"; }
  int feature_size() const override { return length_; }
  int state_count() const override { return length_; }
  bool is_terminal(int state) const override;
  int initial_state(int episode) const override;
  Eigen::VectorXd features(int state) const override;
  std::vector<Afterstate> afterstates(int state) const override;
  // Greedy rollout from initial_state(0) reaches the right terminal within
  // max_steps.
  bool success(const Network& net, double gamma, int max_steps) const override;
  int length() const { return length_; }

 private:
  int length_;
  int start_;
};

// Four-context XOR task. An episode presents context (c1,c2) (cycling over
// episodes), the agent commits to answer 0 or 1 (reward 0), and the answered
// state makes a forced exit to terminal carrying +1 when answer = c1 XOR c2
// and -1 otherwise, so answer selection is driven by the learned value of the
// (context, answer) afterstates. Features are (c1, c2, answer), with 0.5 in
// the answer slot marking the undecided context state.
class XorBandit : public Environment {
 public:
  // States: 0..3 contexts, 4..11 answered (context*2+answer), 12 terminal.
  std::string name() const override { return "xor"; }
  int feature_size() const override { return 3; }
  int state_count() const override { return 13; }
  bool is_terminal(int state) const override { return state == 12; }
  int initial_state(int episode) const override { return episode % 4; }
  Eigen::VectorXd features(int state) const override;
  std::vector<Afterstate> afterstates(int state) const override;
  // Greedy answer (argmax over the two answered-state values, ties -> answer
  // 0) is correct on all four contexts.
  bool success(const Network& net, double gamma, int max_steps) const override;

  static int xor_truth(int context) { return ((context >> 1) ^ context) & 1; }
};

// Four-way gridworld: deterministic moves, off-grid moves stay in place, each
// move costs -1, entering the goal adds +10 and ends the episode. Features
// are (x/W, y/H, (gx-x)/W, (gy-y)/H).
class GridWorld : public Environment {
 public:
  GridWorld(int width, int height, int start_x = 0, int start_y = 0,
            int goal_x = -1, int goal_y = -1);
  std::string name() const override { return "grid"; }
  int feature_size() const override { return 4; }
  int state_count() const override { return width_ * height_; }
  bool is_terminal(int state) const override;
  int initial_state(int episode) const override;
  Eigen::VectorXd features(int state) const override;
  std::vector<Afterstate> afterstates(int state) const override;
  // Greedy rollout from the start reaches the goal within max_steps.
  bool success(const Network& net, double gamma, int max_steps) const override;

 private:
  int width_, height_, start_, goal_;
};

// Optimal state values by value iteration (sweeps until the sup-norm change
// drops below 1e-12; terminal states have value 0). Requires gamma in [0,1).
Eigen::VectorXd optimal_values(const Environment& env, double gamma);

// Greedy afterstate choice under the net's value function: maximizes
// reward + gamma * V(successor) with V(terminal) = 0, ties -> lowest action
// index. `state` must be non-terminal.
const Afterstate& greedy_choice(const std::vector<Afterstate>& options,
                                const Network& net, const Environment& env,
                                double gamma);

// Total reward of one greedy episode (no exploration, no learning).
double greedy_episode_reward(const Network& net, const Environment& env,
                             int episode, double gamma, int max_steps);

}  // namespace neuroforge

#endif
