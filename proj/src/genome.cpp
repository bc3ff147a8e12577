#include "neuroforge/genome.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

namespace neuroforge {

std::string role_name(NodeRole role) {
  switch (role) {
    case NodeRole::Input: return "input";
    case NodeRole::Bias: return "bias";
    case NodeRole::Output: return "output";
    case NodeRole::Hidden: return "hidden";
  }
  return "hidden";
}

NodeRole role_from_name(const std::string& name) {
  if (name == "input") return NodeRole::Input;
  if (name == "bias") return NodeRole::Bias;
  if (name == "output") return NodeRole::Output;
  if (name == "hidden") return NodeRole::Hidden;
  throw std::invalid_argument("unknown node role '" + name + "'");
}

const NodeGene* Genome::find_node(int id) const {
  auto it = std::lower_bound(
      nodes.begin(), nodes.end(), id,
      [](const NodeGene& n, int key) { return n.id < key; });
  if (it != nodes.end() && it->id == id) return &*it;
  return nullptr;
}

bool Genome::has_connection(int in_node, int out_node) const {
  for (const auto& c : connections)
    if (c.in_node == in_node && c.out_node == out_node) return true;
  return false;
}

ConnectionGene* Genome::find_connection(int innovation) {
  auto it = std::lower_bound(
      connections.begin(), connections.end(), innovation,
      [](const ConnectionGene& c, int key) { return c.innovation < key; });
  if (it != connections.end() && it->innovation == innovation) return &*it;
  return nullptr;
}

int Genome::enabled_count() const {
  int n = 0;
  for (const auto& c : connections) n += c.enabled ? 1 : 0;
  return n;
}

std::vector<int> Genome::node_ids_with_role(NodeRole role) const {
  std::vector<int> out;
  for (const auto& n : nodes)
    if (n.role == role) out.push_back(n.id);
  return out;
}

InnovationRegistry::InnovationRegistry(int first_node_id, int first_innovation)
    : next_node_id_(first_node_id), next_innovation_(first_innovation) {}

int InnovationRegistry::register_link(int in_node, int out_node) {
  auto key = std::make_pair(in_node, out_node);
  auto it = link_history_.find(key);
  if (it != link_history_.end()) return it->second;
  int innov = next_innovation_++;
  link_history_.emplace(key, innov);
  return innov;
}

InnovationRegistry::SplitAlloc InnovationRegistry::register_split(
    int split_innovation, int in_node, int out_node) {
  auto it = split_history_.find(split_innovation);
  if (it != split_history_.end()) return it->second;
  SplitAlloc alloc;
  alloc.node_id = next_node_id_++;
  alloc.innovation_in = register_link(in_node, alloc.node_id);
  alloc.innovation_out = register_link(alloc.node_id, out_node);
  split_history_.emplace(split_innovation, alloc);
  return alloc;
}

void InnovationRegistry::begin_generation() {
  link_history_.clear();
  split_history_.clear();
}

void InnovationRegistry::reserve_node_ids(int first_free_id) {
  next_node_id_ = std::max(next_node_id_, first_free_id);
}

Genome new_minimal_genome(int n_inputs, int n_outputs,
                          InnovationRegistry& registry, Rng& rng) {
  if (n_inputs < 1 || n_outputs < 1)
    throw std::invalid_argument("minimal genome needs >=1 input and output");
  Genome g;
  int id = 1;
  for (int i = 0; i < n_inputs; ++i) g.nodes.push_back({id++, NodeRole::Input});
  const int bias_id = id;
  g.nodes.push_back({id++, NodeRole::Bias});
  std::vector<int> outputs;
  for (int i = 0; i < n_outputs; ++i) {
    outputs.push_back(id);
    g.nodes.push_back({id++, NodeRole::Output});
  }
  registry.reserve_node_ids(id);
  for (int out : outputs) {
    for (int src = 1; src <= bias_id; ++src) {
      ConnectionGene c;
      c.in_node = src;
      c.out_node = out;
      c.weight = uniform_real(rng, -1.0, 1.0);
      c.enabled = true;
      c.innovation = registry.register_link(src, out);
      g.connections.push_back(c);
    }
  }
  std::sort(g.connections.begin(), g.connections.end(),
            [](const ConnectionGene& a, const ConnectionGene& b) {
              return a.innovation < b.innovation;
            });
  return g;
}

GeneClassification classify_genes(const Genome& a, const Genome& b) {
  GeneClassification out;
  const int max_a =
      a.connections.empty() ? 0 : a.connections.back().innovation;
  const int max_b =
      b.connections.empty() ? 0 : b.connections.back().innovation;
  std::size_t i = 0, j = 0;
  while (i < a.connections.size() || j < b.connections.size()) {
    if (i < a.connections.size() && j < b.connections.size() &&
        a.connections[i].innovation == b.connections[j].innovation) {
      out.matching_a.push_back(a.connections[i++]);
      out.matching_b.push_back(b.connections[j++]);
    } else if (j >= b.connections.size() ||
               (i < a.connections.size() &&
                a.connections[i].innovation < b.connections[j].innovation)) {
      const auto& gene = a.connections[i++];
      (gene.innovation > max_b ? out.excess_a : out.disjoint_a)
          .push_back(gene);
    } else {
      const auto& gene = b.connections[j++];
      (gene.innovation > max_a ? out.excess_b : out.disjoint_b)
          .push_back(gene);
    }
  }
  return out;
}

namespace {

// DFS over enabled edges; returns false on a cycle.
bool acyclic_from(const std::map<int, std::vector<int>>& adj) {
  std::map<int, int> state;  // 0 unseen, 1 on stack, 2 done
  std::vector<std::pair<int, std::size_t>> stack;
  for (const auto& [start, _] : adj) {
    if (state[start] != 0) continue;
    stack.push_back({start, 0});
    state[start] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      auto it = adj.find(node);
      if (it == adj.end() || next >= it->second.size()) {
        state[node] = 2;
        stack.pop_back();
        continue;
      }
      int succ = it->second[next++];
      if (state[succ] == 1) return false;
      if (state[succ] == 0) {
        state[succ] = 1;
        stack.push_back({succ, 0});
      }
    }
  }
  return true;
}

}  // namespace

bool enabled_graph_acyclic(const Genome& g) {
  std::map<int, std::vector<int>> adj;
  for (const auto& c : g.connections)
    if (c.enabled) adj[c.in_node].push_back(c.out_node);
  return acyclic_from(adj);
}

bool output_reachable(const Genome& g) {
  std::map<int, std::vector<int>> adj;
  for (const auto& c : g.connections)
    if (c.enabled) adj[c.in_node].push_back(c.out_node);
  std::set<int> seen;
  std::queue<int> frontier;
  for (const auto& n : g.nodes)
    if (n.role == NodeRole::Input || n.role == NodeRole::Bias) {
      frontier.push(n.id);
      seen.insert(n.id);
    }
  while (!frontier.empty()) {
    int node = frontier.front();
    frontier.pop();
    const NodeGene* ng = g.find_node(node);
    if (ng && ng->role == NodeRole::Output) return true;
    auto it = adj.find(node);
    if (it == adj.end()) continue;
    for (int succ : it->second)
      if (seen.insert(succ).second) frontier.push(succ);
  }
  return false;
}

void validate_genome(const Genome& g) {
  std::set<int> ids;
  for (const auto& n : g.nodes)
    if (!ids.insert(n.id).second)
      throw std::invalid_argument("duplicate node id " + std::to_string(n.id));
  for (std::size_t i = 1; i < g.nodes.size(); ++i)
    if (g.nodes[i - 1].id >= g.nodes[i].id)
      throw std::invalid_argument("node genes not sorted by id");
  std::set<std::pair<int, int>> pairs;
  int last_innov = 0;
  for (const auto& c : g.connections) {
    if (c.innovation <= last_innov)
      throw std::invalid_argument(
          "innovations not strictly increasing at " +
          std::to_string(c.innovation));
    last_innov = c.innovation;
    if (!pairs.insert({c.in_node, c.out_node}).second)
      throw std::invalid_argument("duplicate connection " +
                                  std::to_string(c.in_node) + "->" +
                                  std::to_string(c.out_node));
    const NodeGene* in = g.find_node(c.in_node);
    const NodeGene* out = g.find_node(c.out_node);
    if (!in || !out)
      throw std::invalid_argument("connection references missing node");
    if (in->role == NodeRole::Output)
      throw std::invalid_argument("connection originates from an output node");
    if (out->role == NodeRole::Input || out->role == NodeRole::Bias)
      throw std::invalid_argument("connection targets an input or bias node");
  }
  if (!enabled_graph_acyclic(g))
    throw std::invalid_argument("enabled subgraph has a cycle");
}

std::string genome_to_json(const Genome& g) {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (const auto& n : g.nodes)
    j["nodes"].push_back({{"id", n.id}, {"role", role_name(n.role)}});
  j["connections"] = nlohmann::json::array();
  for (const auto& c : g.connections)
    j["connections"].push_back({{"in", c.in_node},
                                {"out", c.out_node},
                                {"weight", c.weight},
                                {"enabled", c.enabled},
                                {"innovation", c.innovation}});
  j["fitness"] = {{"raw", g.raw_fitness}};
  return j.dump(2);
}

std::string genome_to_json(const Genome& g, const std::string& environment,
                           std::uint64_t seed) {
  nlohmann::json j = nlohmann::json::parse(genome_to_json(g));
  j["environment"] = environment;
  j["seed"] = seed;
  return j.dump(2);
}

Genome genome_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Genome g;
  for (const auto& n : j.at("nodes"))
    g.nodes.push_back(
        {n.at("id").get<int>(), role_from_name(n.at("role").get<std::string>())});
  for (const auto& c : j.at("connections")) {
    ConnectionGene gene;
    gene.in_node = c.at("in").get<int>();
    gene.out_node = c.at("out").get<int>();
    gene.weight = c.at("weight").get<double>();
    gene.enabled = c.at("enabled").get<bool>();
    gene.innovation = c.at("innovation").get<int>();
    g.connections.push_back(gene);
  }
  if (j.contains("fitness") && j["fitness"].contains("raw"))
    g.raw_fitness = j["fitness"]["raw"].get<double>();
  std::sort(g.nodes.begin(), g.nodes.end(),
            [](const NodeGene& a, const NodeGene& b) { return a.id < b.id; });
  std::sort(g.connections.begin(), g.connections.end(),
            [](const ConnectionGene& a, const ConnectionGene& b) {
              return a.innovation < b.innovation;
            });
  validate_genome(g);
  return g;
}

Genome load_genome(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open genome file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return genome_from_json(buf.str());
}

namespace {
void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file '" + path + "'");
  out << text << "\n";
}
}  // namespace

void save_genome(const Genome& g, const std::string& path) {
  write_text(path, genome_to_json(g));
}

void save_genome(const Genome& g, const std::string& path,
                 const std::string& environment, std::uint64_t seed) {
  write_text(path, genome_to_json(g, environment, seed));
}

}  // namespace neuroforge
