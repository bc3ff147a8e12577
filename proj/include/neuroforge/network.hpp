#ifndef NEUROFORGE_NETWORK_HPP
#define NEUROFORGE_NETWORK_HPP

#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "neuroforge/genome.hpp"

namespace neuroforge {

// Thrown when a feature vector's arity does not match the network's inputs.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Feedforward phenotype decoded from a genome's enabled genes. Hidden nodes
// apply the logistic function, input/bias/output nodes are identity; the
// value estimate V is the single output node's activation. weights[k] is the
// k-th enabled gene in genome (innovation) order, which keeps the mapping
// back to the genome stable for weight write-back and CMA vectors.
class Network {
 public:
  double forward(const Eigen::VectorXd& x) const;
  // Exact dV/dw by reverse accumulation, one entry per enabled gene.
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

  int input_count() const { return n_inputs_; }
  Eigen::Index weight_count() const { return weights_.size(); }
  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::VectorXd& weights() { return weights_; }
  int hidden_count() const { return n_hidden_; }

 private:
  friend Network decode(const Genome& g);
  friend std::vector<double> node_values(const Network&,
                                         const Eigen::VectorXd&);

  struct Incoming {
    int source;        // internal node index
    int weight_index;  // into weights_
  };

  int n_inputs_ = 0;
  int n_hidden_ = 0;
  int bias_ = -1;    // internal index
  int output_ = -1;  // internal index
  std::vector<NodeRole> roles_;                  // by internal index
  std::vector<int> eval_order_;                  // non-input internal indices
  std::vector<std::vector<Incoming>> incoming_;  // by internal index
  Eigen::VectorXd weights_;

  void forward_values(const Eigen::VectorXd& x, std::vector<double>& v) const;
};

// Deterministic topological order over the enabled subgraph: Kahn's algorithm
// with ties broken by smallest node id. Throws CycleError.
std::vector<int> topological_order(const Genome& g);

// Throws CycleError if the enabled subgraph has a cycle and
// std::invalid_argument if the genome does not have exactly one output node.
Network decode(const Genome& g);

// Copies net weights back onto the genome's enabled genes (same ordering as
// Network::weights()).
void write_back_weights(Genome& g, const Network& net);

// The genome's enabled-gene weights as a vector, in the decode ordering.
Eigen::VectorXd enabled_weights(const Genome& g);
void set_enabled_weights(Genome& g, const Eigen::VectorXd& w);

}  // namespace neuroforge

#endif
