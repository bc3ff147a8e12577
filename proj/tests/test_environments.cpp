#include <doctest.h>

#include <cmath>
#include <vector>

#include "neuroforge/environments.hpp"
#include "support.hpp"

using namespace neuroforge;

namespace {

// Network reproducing the given per-state values over one-hot features.
Network value_table_net(const std::vector<double>& values) {
  Genome g = test::linear_genome(values, 0.0);
  return decode(g);
}

// max_s |V*(s) - max_a (r + gamma * V*(s'))| over non-terminal states.
double bellman_gap(const Environment& env, const Eigen::VectorXd& v,
                   double gamma) {
  double gap = 0.0;
  for (int s = 0; s < env.state_count(); ++s) {
    if (env.is_terminal(s)) continue;
    double best = -1e300;
    for (const Afterstate& a : env.afterstates(s)) {
      const double succ = env.is_terminal(a.successor) ? 0.0 : v[a.successor];
      best = std::max(best, a.reward + gamma * succ);
    }
    gap = std::max(gap, std::abs(v[s] - best));
  }
  return gap;
}

}  // namespace

TEST_CASE("chain construction and shape") {
  CHECK_THROWS_AS(ChainMDP(2), std::invalid_argument);
  CHECK_THROWS_AS(ChainMDP(5, 0), std::invalid_argument);
  CHECK_THROWS_AS(ChainMDP(5, 4), std::invalid_argument);

  ChainMDP env(5);
  CHECK(env.state_count() == 5);
  CHECK(env.feature_size() == 5);
  CHECK(env.is_terminal(0));
  CHECK(env.is_terminal(4));
  CHECK_FALSE(env.is_terminal(2));
  CHECK(env.features(2)[2] == 1.0);
  CHECK(env.features(2).sum() == 1.0);
}

TEST_CASE("chain transitions") {
  ChainMDP env(5);

  SUBCASE("interior state moves cost one") {
    const auto a = env.afterstates(2);
    REQUIRE(a.size() == 2);
    CHECK(a[0].successor == 1);
    CHECK(a[0].reward == -1.0);
    CHECK(a[1].successor == 3);
    CHECK(a[1].reward == -1.0);
  }

  SUBCASE("terminal entries carry their bonuses") {
    const auto left = env.afterstates(1);
    CHECK(left[0].successor == 0);
    CHECK(left[0].reward == 0.0);  // -1 move + 1 left bonus
    const auto right = env.afterstates(3);
    CHECK(right[1].successor == 4);
    CHECK(right[1].reward == 9.0);  // -1 move + 10 right bonus
  }

  SUBCASE("terminal states have no afterstates") {
    CHECK_THROWS_AS(env.afterstates(0), TerminalError);
    CHECK_THROWS_AS(env.afterstates(4), TerminalError);
    CHECK_THROWS_AS(env.afterstates(99), std::out_of_range);
  }

  SUBCASE("episodes cycle over interior starts") {
    CHECK(env.initial_state(0) == 1);
    CHECK(env.initial_state(1) == 2);
    CHECK(env.initial_state(2) == 3);
    CHECK(env.initial_state(3) == 1);
    ChainMDP fixed(5, 2);
    CHECK(fixed.initial_state(0) == 2);
    CHECK(fixed.initial_state(7) == 2);
  }
}

TEST_CASE("chain optimal values") {
  ChainMDP env(5);

  SUBCASE("value-iteration oracle matches the hand solution") {
    const Eigen::VectorXd v = optimal_values(env, 0.9);
    CHECK(std::abs(v[0]) < 1e-10);
    CHECK(std::abs(v[1] - 5.39) < 1e-10);
    CHECK(std::abs(v[2] - 7.1) < 1e-10);
    CHECK(std::abs(v[3] - 9.0) < 1e-10);
    CHECK(std::abs(v[4]) < 1e-10);
  }

  SUBCASE("gamma = 0 reduces to the best immediate reward") {
    const Eigen::VectorXd v = optimal_values(env, 0.0);
    CHECK(v[1] == 0.0);   // exit left: -1 + 1
    CHECK(v[2] == -1.0);  // any move
    CHECK(v[3] == 9.0);   // exit right
  }

  SUBCASE("solution satisfies its own Bellman equation") {
    for (double gamma : {0.5, 0.9, 0.99}) {
      const Eigen::VectorXd v = optimal_values(env, gamma);
      CHECK(bellman_gap(env, v, gamma) < 1e-10);
    }
  }

  SUBCASE("discount outside [0,1) is rejected") {
    CHECK_THROWS_AS(optimal_values(env, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(optimal_values(env, -0.1), std::invalid_argument);
  }
}

TEST_CASE("chain greedy behaviour and success") {
  ChainMDP env(5);
  Network oracle_net = value_table_net({0.0, 5.39, 7.1, 9.0, 0.0});

  SUBCASE("greedy choice maximizes reward plus discounted value") {
    const auto options = env.afterstates(1);
    const Afterstate& pick = greedy_choice(options, oracle_net, env, 0.9);
    CHECK(pick.successor == 2);  // -1 + 0.9*7.1 beats the left exit's 0
  }

  SUBCASE("ties resolve to the lowest action index") {
    Network zero = value_table_net({0, 0, 0, 0, 0});
    const auto options = env.afterstates(2);  // both moves: -1 + 0
    const Afterstate& pick = greedy_choice(options, zero, env, 0.9);
    CHECK(pick.action == 0);
  }

  SUBCASE("value-oracle network walks to the right terminal") {
    CHECK(env.success(oracle_net, 0.9, 100));
    const double reward = greedy_episode_reward(oracle_net, env, 0, 0.9, 100);
    CHECK(reward == doctest::Approx(7.0));  // -1 -1 +9 from state 1
  }

  SUBCASE("zero network exits left immediately") {
    Network zero = value_table_net({0, 0, 0, 0, 0});
    CHECK_FALSE(env.success(zero, 0.9, 100));
    // Left exit from state 1: single move worth -1 + 1.
    CHECK(greedy_episode_reward(zero, env, 0, 0.9, 100) == 0.0);
  }
}

TEST_CASE("xor task layout") {
  XorBandit env;
  CHECK(env.state_count() == 13);
  CHECK(env.feature_size() == 3);
  CHECK(env.is_terminal(12));
  CHECK_FALSE(env.is_terminal(11));
  for (int e = 0; e < 8; ++e) CHECK(env.initial_state(e) == e % 4);

  SUBCASE("truth table") {
    CHECK(XorBandit::xor_truth(0) == 0);
    CHECK(XorBandit::xor_truth(1) == 1);
    CHECK(XorBandit::xor_truth(2) == 1);
    CHECK(XorBandit::xor_truth(3) == 0);
  }

  SUBCASE("context features leave the answer slot blank") {
    // A zero answer slot keeps the pre-answer input off the axis the value
    // function separates, so the commit-step update cannot drag the two
    // answer encodings toward each other through shared weights.
    for (int c = 0; c < 4; ++c) {
      const Eigen::VectorXd f = env.features(c);
      CHECK(f[0] == static_cast<double>((c >> 1) & 1));
      CHECK(f[1] == static_cast<double>(c & 1));
      CHECK(f[2] == 0.0);
    }
  }

  SUBCASE("answered features carry the committed answer") {
    for (int c = 0; c < 4; ++c)
      for (int a = 0; a < 2; ++a) {
        const Eigen::VectorXd f = env.features(4 + c * 2 + a);
        CHECK(f[0] == static_cast<double>((c >> 1) & 1));
        CHECK(f[1] == static_cast<double>(c & 1));
        CHECK(f[2] == static_cast<double>(a));
      }
  }
}

TEST_CASE("xor transitions and rewards") {
  XorBandit env;

  SUBCASE("committing to an answer is free") {
    for (int c = 0; c < 4; ++c) {
      const auto options = env.afterstates(c);
      REQUIRE(options.size() == 2);
      CHECK(options[0].successor == 4 + c * 2);
      CHECK(options[1].successor == 4 + c * 2 + 1);
      CHECK(options[0].reward == 0.0);
      CHECK(options[1].reward == 0.0);
    }
  }

  SUBCASE("the exit transition pays out the answer's correctness") {
    for (int c = 0; c < 4; ++c)
      for (int a = 0; a < 2; ++a) {
        const auto options = env.afterstates(4 + c * 2 + a);
        REQUIRE(options.size() == 1);
        CHECK(options[0].successor == 12);
        const double expected = a == XorBandit::xor_truth(c) ? 1.0 : -1.0;
        CHECK(options[0].reward == expected);
      }
  }

  SUBCASE("terminal state rejects expansion") {
    CHECK_THROWS_AS(env.afterstates(12), TerminalError);
  }

  SUBCASE("episode reward is the answer's correctness") {
    // Zero network ties both answers, so answer 0 is chosen everywhere:
    // correct for contexts 0 and 3 only.
    Network zero = decode(test::linear_genome({0, 0, 0}, 0.0));
    CHECK(greedy_episode_reward(zero, env, 0, 0.9, 10) == 1.0);
    CHECK(greedy_episode_reward(zero, env, 1, 0.9, 10) == -1.0);
    CHECK(greedy_episode_reward(zero, env, 2, 0.9, 10) == -1.0);
    CHECK(greedy_episode_reward(zero, env, 3, 0.9, 10) == 1.0);
  }
}

TEST_CASE("xor success predicate") {
  XorBandit env;

  SUBCASE("zero network answers 0 everywhere and fails") {
    Network zero = decode(test::linear_genome({0, 0, 0}, 0.0));
    CHECK_FALSE(env.success(zero, 0.9, 10));
  }

  SUBCASE("no linear value function can succeed") {
    // V(c1,c2,a) = w1 c1 + w2 c2 + w3 a + b ranks answers by the sign of w3
    // alone, identically across contexts, so some context is always wrong.
    for (double w1 = -4.0; w1 <= 4.0; w1 += 0.8)
      for (double w2 = -4.0; w2 <= 4.0; w2 += 0.8)
        for (double w3 : {-4.0, -0.5, 0.0, 0.5, 4.0})
          for (double b : {-2.0, 0.0, 2.0}) {
            Network net = decode(test::linear_genome({w1, w2, w3}, b));
            CHECK_FALSE(env.success(net, 0.9, 10));
          }
  }

  SUBCASE("a hand-built hidden-layer network can succeed") {
    // V = 8*sigma(8 c1 + 8 c2 + 8 a - 12) - 2*(c1 + c2 + a): the hidden unit
    // fires only when at least two of the three slots are active, recreating
    // the parity ranking. Checked against the truth table below.
    Genome g;
    g.nodes = {{1, NodeRole::Input},  {2, NodeRole::Input},
               {3, NodeRole::Input},  {4, NodeRole::Bias},
               {5, NodeRole::Output}, {6, NodeRole::Hidden}};
    g.connections = {{1, 5, -2.0, true, 1}, {2, 5, -2.0, true, 2},
                     {3, 5, -2.0, true, 3}, {1, 6, 8.0, true, 4},
                     {2, 6, 8.0, true, 5},  {3, 6, 8.0, true, 6},
                     {4, 6, -12.0, true, 7}, {6, 5, 8.0, true, 8}};
    Network net = decode(g);
    for (int c = 0; c < 4; ++c) {
      const double v0 = net.forward(env.features(4 + c * 2));
      const double v1 = net.forward(env.features(4 + c * 2 + 1));
      if (XorBandit::xor_truth(c) == 1)
        CHECK(v1 > v0);
      else
        CHECK(v0 > v1);
    }
    CHECK(env.success(net, 0.9, 10));
  }
}

TEST_CASE("grid construction and shape") {
  CHECK_THROWS_AS(GridWorld(1, 4), std::invalid_argument);
  CHECK_THROWS_AS(GridWorld(3, 3, 2, 2, 2, 2), std::invalid_argument);

  GridWorld env(4, 3);
  CHECK(env.state_count() == 12);
  CHECK(env.feature_size() == 4);
  CHECK(env.is_terminal(11));  // default goal: far corner (3,2)
  CHECK_FALSE(env.is_terminal(0));
  CHECK(env.initial_state(0) == 0);
  CHECK(env.initial_state(5) == 0);  // fixed start, no cycling

  SUBCASE("features are normalized offsets") {
    const Eigen::VectorXd f = env.features(1 * 4 + 2);  // x=2, y=1
    CHECK(f[0] == doctest::Approx(2.0 / 4.0));
    CHECK(f[1] == doctest::Approx(1.0 / 3.0));
    CHECK(f[2] == doctest::Approx(1.0 / 4.0));  // goal x 3
    CHECK(f[3] == doctest::Approx(1.0 / 3.0));  // goal y 2
  }
}

TEST_CASE("grid transitions") {
  GridWorld env(4, 3);

  SUBCASE("interior moves follow right, left, down, up order") {
    const auto a = env.afterstates(1 * 4 + 1);  // (1,1)
    REQUIRE(a.size() == 4);
    CHECK(a[0].successor == 1 * 4 + 2);
    CHECK(a[1].successor == 1 * 4 + 0);
    CHECK(a[2].successor == 2 * 4 + 1);
    CHECK(a[3].successor == 0 * 4 + 1);
    for (const auto& opt : a) CHECK(opt.reward == -1.0);
  }

  SUBCASE("off-grid moves stay in place at move cost") {
    const auto a = env.afterstates(0);  // corner (0,0)
    CHECK(a[1].successor == 0);  // left
    CHECK(a[1].reward == -1.0);
    CHECK(a[3].successor == 0);  // up
  }

  SUBCASE("entering the goal pays the bonus") {
    const auto a = env.afterstates(2 * 4 + 2);  // (2,2), goal at (3,2)
    CHECK(a[0].successor == 11);
    CHECK(a[0].reward == 9.0);
  }

  SUBCASE("goal state has no afterstates") {
    CHECK_THROWS_AS(env.afterstates(11), TerminalError);
  }
}

TEST_CASE("grid optimal values") {
  SUBCASE("2x2 hand solution") {
    GridWorld env(2, 2);
    const Eigen::VectorXd v = optimal_values(env, 0.9);
    CHECK(std::abs(v[1] - 9.0) < 1e-10);
    CHECK(std::abs(v[2] - 9.0) < 1e-10);
    CHECK(std::abs(v[0] - 7.1) < 1e-10);
    CHECK(v[3] == 0.0);
  }

  SUBCASE("Bellman self-consistency on a larger grid") {
    GridWorld env(5, 4, 1, 1);
    const Eigen::VectorXd v = optimal_values(env, 0.9);
    CHECK(bellman_gap(env, v, 0.9) < 1e-10);
  }
}

TEST_CASE("grid success predicate") {
  SUBCASE("one-step lookahead alone solves the 2x2 grid") {
    GridWorld env(2, 2);
    Genome g = test::linear_genome({0, 0, 0, 0}, 0.0);
    CHECK(env.success(decode(g), 0.9, 20));
  }

  SUBCASE("zero network wanders off target on a 4x4 grid") {
    GridWorld env(4, 4);
    Genome g = test::linear_genome({0, 0, 0, 0}, 0.0);
    CHECK_FALSE(env.success(decode(g), 0.9, 50));
  }
}

TEST_CASE("forced chain test harness") {
  test::ForcedChain env(3);
  CHECK(env.state_count() == 3);
  CHECK_FALSE(env.is_terminal(0));
  CHECK(env.is_terminal(2));
  const auto a = env.afterstates(0);
  REQUIRE(a.size() == 1);
  CHECK(a[0].successor == 1);
  CHECK(a[0].reward == -1.0);
  CHECK_THROWS_AS(env.afterstates(2), TerminalError);

  const Eigen::VectorXd v = optimal_values(env, 0.9);
  CHECK(std::abs(v[0] - (-1.9)) < 1e-12);
  CHECK(std::abs(v[1] - (-1.0)) < 1e-12);
  CHECK(v[2] == 0.0);
}
