#ifndef NEUROFORGE_GENOME_HPP
#define NEUROFORGE_GENOME_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "neuroforge/rng.hpp"

namespace neuroforge {

enum class NodeRole { Input, Bias, Output, Hidden };

std::string role_name(NodeRole role);
NodeRole role_from_name(const std::string& name);

struct NodeGene {
  int id;
  NodeRole role;
};

struct ConnectionGene {
  int in_node;
  int out_node;
  double weight;
  bool enabled;
  int innovation;
};

// Direct-encoding genome. Node genes are kept sorted by id, connection genes
// by innovation number; connections never target input/bias nodes and never
// originate from the output; the enabled subgraph is acyclic.
struct Genome {
  std::vector<NodeGene> nodes;
  std::vector<ConnectionGene> connections;
  double raw_fitness = 0.0;
  double adjusted_fitness = 0.0;

  const NodeGene* find_node(int id) const;
  bool has_connection(int in_node, int out_node) const;
  ConnectionGene* find_connection(int innovation);
  int enabled_count() const;
  std::vector<int> node_ids_with_role(NodeRole role) const;
};

struct CycleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shared innovation bookkeeping. Counters are monotone for the lifetime of a
// run; the histories that make repeated structural mutations reuse numbers
// are cleared at every generation boundary.
class InnovationRegistry {
 public:
  InnovationRegistry(int first_node_id = 1, int first_innovation = 1);

  // Same (in,out) pair within one generation -> same innovation number.
  int register_link(int in_node, int out_node);

  struct SplitAlloc {
    int node_id;
    int innovation_in;   // in_node -> new node
    int innovation_out;  // new node -> out_node
  };
  // Same split (keyed by the split gene's innovation) within one generation
  // -> same node id and link numbers.
  SplitAlloc register_split(int split_innovation, int in_node, int out_node);

  void begin_generation();
  // Monotone bump so canonical io node ids never collide with hidden ids.
  void reserve_node_ids(int first_free_id);

  int next_innovation() const { return next_innovation_; }
  int next_node_id() const { return next_node_id_; }

 private:
  std::map<std::pair<int, int>, int> link_history_;
  std::map<int, SplitAlloc> split_history_;
  int next_node_id_;
  int next_innovation_;
};

// Fully connected (inputs+bias) -> outputs genome with Uniform[-1,1] weights.
// Node ids are canonical (inputs 1..n, bias n+1, outputs after that), so every
// minimal genome in a population shares ids and innovation numbers.
Genome new_minimal_genome(int n_inputs, int n_outputs,
                          InnovationRegistry& registry, Rng& rng);

struct GeneClassification {
  // matching_a[i] and matching_b[i] share an innovation number.
  std::vector<ConnectionGene> matching_a;
  std::vector<ConnectionGene> matching_b;
  std::vector<ConnectionGene> disjoint_a;
  std::vector<ConnectionGene> disjoint_b;
  std::vector<ConnectionGene> excess_a;
  std::vector<ConnectionGene> excess_b;
};

// A gene unique to one parent is excess if its innovation exceeds the other
// parent's maximum innovation, disjoint otherwise.
GeneClassification classify_genes(const Genome& a, const Genome& b);

bool enabled_graph_acyclic(const Genome& g);
// True when at least one output node is reachable from an input or the bias
// through enabled connections.
bool output_reachable(const Genome& g);

// Throws std::invalid_argument describing the first violated invariant.
void validate_genome(const Genome& g);

std::string genome_to_json(const Genome& g);
std::string genome_to_json(const Genome& g, const std::string& environment,
                           std::uint64_t seed);
Genome genome_from_json(const std::string& text);
Genome load_genome(const std::string& path);
void save_genome(const Genome& g, const std::string& path);
void save_genome(const Genome& g, const std::string& path,
                 const std::string& environment, std::uint64_t seed);

}  // namespace neuroforge

#endif
