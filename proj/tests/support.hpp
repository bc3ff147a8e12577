#ifndef NEUROFORGE_TESTS_SUPPORT_HPP
#define NEUROFORGE_TESTS_SUPPORT_HPP

#include <string>
#include <vector>

#include "neuroforge/environments.hpp"
#include "neuroforge/genome.hpp"
#include "neuroforge/network.hpp"
#include "neuroforge/rng.hpp"
#include "neuroforge/variation.hpp"

namespace neuroforge {
namespace test {

// Corridor with a single admissible move per state: one step right at reward
// -1, last state terminal. Every episode collects exactly -(length-1)
// whatever the value function says, which freezes fitness for stagnation
// tests, and V*(s) = -(steps to the end) gives hand-checkable TD fixtures.
class ForcedChain : public Environment {
 public:
  explicit ForcedChain(int length) : length_(length) {}
  std::string name() const override { return "forced-chain"; }
  int feature_size() const override { return length_; }
  int state_count() const override { return length_; }
  bool is_terminal(int state) const override { return state == length_ - 1; }
  int initial_state(int) const override { return 0; }
  Eigen::VectorXd features(int state) const override {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(length_);
    f[state] = 1.0;
    return f;
  }
  std::vector<Afterstate> afterstates(int state) const override {
    if (is_terminal(state))
      throw TerminalError("forced-chain: afterstates of a terminal state");
    return {{0, state + 1, -1.0}};
  }
  bool success(const Network&, double, int) const override { return false; }

 private:
  int length_;
};

// Genome with inputs 1..n, bias n+1, output n+2 and one enabled gene per
// given weight: input i -> output carries weights[i-1], bias -> output
// carries bias_weight. Innovations run 1..n+1.
inline Genome linear_genome(const std::vector<double>& weights,
                            double bias_weight) {
  const int n = static_cast<int>(weights.size());
  Genome g;
  for (int i = 1; i <= n; ++i) g.nodes.push_back({i, NodeRole::Input});
  g.nodes.push_back({n + 1, NodeRole::Bias});
  g.nodes.push_back({n + 2, NodeRole::Output});
  for (int i = 1; i <= n; ++i)
    g.connections.push_back({i, n + 2, weights[i - 1], true, i});
  g.connections.push_back({n + 1, n + 2, bias_weight, true, n + 1});
  return g;
}

// One-input genome with a single hidden node h on a side path:
// in->out (w_direct), bias->out (w_bias), in->h (w_in_h), h->out (w_h_out).
// Node ids: in=1, bias=2, out=3, h=4; innovations 1..4 in that order.
inline Genome hidden_genome(double w_direct, double w_bias, double w_in_h,
                            double w_h_out) {
  Genome g;
  g.nodes = {{1, NodeRole::Input},
             {2, NodeRole::Bias},
             {3, NodeRole::Output},
             {4, NodeRole::Hidden}};
  g.connections = {{1, 3, w_direct, true, 1},
                   {2, 3, w_bias, true, 2},
                   {1, 4, w_in_h, true, 3},
                   {4, 3, w_h_out, true, 4}};
  return g;
}

// Genome whose connection genes carry the given innovation numbers (weights
// and endpoints synthesized to stay valid: everything feeds the output).
// Used by the gene-alignment and crossover fixtures where only the
// innovation sets matter.
inline Genome genome_with_innovations(const std::vector<int>& innovations,
                                      double weight = 0.1) {
  const int n = static_cast<int>(innovations.size());
  Genome g;
  for (int i = 1; i <= n; ++i) g.nodes.push_back({i, NodeRole::Input});
  g.nodes.push_back({n + 1, NodeRole::Bias});
  g.nodes.push_back({n + 2, NodeRole::Output});
  for (int i = 0; i < n; ++i)
    g.connections.push_back({i + 1, n + 2, weight, true, innovations[i]});
  return g;
}

// Random feedforward genome grown with the real mutation operators, so every
// invariant holds by construction. Roughly half the results gain hidden
// nodes when grow_structure is true.
inline Genome random_genome(Rng& rng, int n_inputs, bool grow_structure,
                            int max_weights = 20) {
  InnovationRegistry registry;
  Genome g = new_minimal_genome(n_inputs, 1, registry, rng);
  if (grow_structure) {
    MacroConfig cfg;
    const int splits = uniform_int(rng, 1, 3);
    for (int i = 0; i < splits; ++i) {
      if (g.enabled_count() + 1 > max_weights) break;
      mutate_add_node(g, registry, rng);
    }
    const int links = uniform_int(rng, 0, 4);
    for (int i = 0; i < links; ++i) {
      if (g.enabled_count() + 1 > max_weights) break;
      mutate_add_link(g, cfg, registry, rng);
    }
  }
  for (ConnectionGene& c : g.connections)
    c.weight = uniform_real(rng, -2.0, 2.0);
  return g;
}

}  // namespace test
}  // namespace neuroforge

#endif
