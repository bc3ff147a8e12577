#include "neuroforge/variation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>

namespace neuroforge {

namespace {
double clamp(double x, double lo, double hi) {
  return std::min(hi, std::max(lo, x));
}
}  // namespace

void AnnealState::reset(const MacroConfig& cfg) {
  x_add_node = cfg.pi_add_node;
  x_add_link = cfg.pi_add_link;
  x_mutate_only = cfg.p_mutate_only;
  temperature = 1;
  k3 = -1;
}

AnnealRates effective_rates(const AnnealState& s, const MacroConfig& cfg) {
  return {clamp(s.x_add_node, cfg.psi1, cfg.psi2),
          clamp(s.x_add_link, cfg.psi3, cfg.psi4),
          clamp(s.x_mutate_only, cfg.psi5, cfg.psi6)};
}

AnnealRates advance_anneal(AnnealState& s, const MacroConfig& cfg) {
  const double t = static_cast<double>(s.temperature);
  s.x_add_node = clamp(s.x_add_node - 1.0 / (cfg.k1 * t), cfg.psi1, cfg.psi2);
  s.x_add_link = clamp(s.x_add_link - 1.0 / (cfg.k2 * t), cfg.psi3, cfg.psi4);
  s.x_mutate_only =
      clamp(s.x_mutate_only + s.k3 * cfg.anneal_delta, cfg.psi5, cfg.psi6);
  s.temperature += 1;
  return effective_rates(s, cfg);
}

namespace {

void insert_connection(Genome& g, const ConnectionGene& gene) {
  auto it = std::lower_bound(
      g.connections.begin(), g.connections.end(), gene.innovation,
      [](const ConnectionGene& c, int key) { return c.innovation < key; });
  g.connections.insert(it, gene);
}

void insert_node(Genome& g, const NodeGene& node) {
  auto it = std::lower_bound(
      g.nodes.begin(), g.nodes.end(), node.id,
      [](const NodeGene& n, int key) { return n.id < key; });
  g.nodes.insert(it, node);
}

// True when `to` can reach `from` over enabled connections, i.e. adding the
// edge from->to would close a cycle.
bool creates_cycle(const Genome& g, int from, int to) {
  if (from == to) return true;
  std::map<int, std::vector<int>> adj;
  for (const auto& c : g.connections)
    if (c.enabled) adj[c.in_node].push_back(c.out_node);
  std::set<int> seen{to};
  std::queue<int> frontier;
  frontier.push(to);
  while (!frontier.empty()) {
    int node = frontier.front();
    frontier.pop();
    if (node == from) return true;
    auto it = adj.find(node);
    if (it == adj.end()) continue;
    for (int succ : it->second)
      if (seen.insert(succ).second) frontier.push(succ);
  }
  return false;
}

}  // namespace

void mutate_add_node(Genome& g, InnovationRegistry& registry, Rng& rng) {
  std::vector<int> enabled;
  for (std::size_t i = 0; i < g.connections.size(); ++i)
    if (g.connections[i].enabled) enabled.push_back(static_cast<int>(i));
  if (enabled.empty()) return;
  ConnectionGene& split =
      g.connections[enabled[uniform_int(rng, 0, static_cast<int>(enabled.size()) - 1)]];
  split.enabled = false;
  const int in_node = split.in_node;
  const int out_node = split.out_node;
  const double old_weight = split.weight;
  const auto alloc = registry.register_split(split.innovation, in_node, out_node);
  // Crossover and toggle can hand a genome the children of a split it later
  // redraws; inserting them again would duplicate innovations, so revert.
  if (g.find_node(alloc.node_id)) {
    split.enabled = true;
    return;
  }
  insert_node(g, {alloc.node_id, NodeRole::Hidden});
  insert_connection(g, {in_node, alloc.node_id, 1.0, true, alloc.innovation_in});
  insert_connection(g,
                    {alloc.node_id, out_node, old_weight, true, alloc.innovation_out});
}

bool mutate_add_link(Genome& g, const MacroConfig& cfg,
                     InnovationRegistry& registry, Rng& rng) {
  std::vector<int> sources, targets;
  for (const auto& n : g.nodes) {
    if (n.role != NodeRole::Output) sources.push_back(n.id);
    if (n.role != NodeRole::Input && n.role != NodeRole::Bias)
      targets.push_back(n.id);
  }
  if (sources.empty() || targets.empty()) return false;
  for (int attempt = 0; attempt < cfg.pi_attempt_mutation; ++attempt) {
    const int from = sources[uniform_int(rng, 0, static_cast<int>(sources.size()) - 1)];
    const int to = targets[uniform_int(rng, 0, static_cast<int>(targets.size()) - 1)];
    if (g.has_connection(from, to)) continue;
    if (creates_cycle(g, from, to)) continue;
    const double weight = uniform_real(rng, -1.0, 1.0);
    insert_connection(g, {from, to, weight, true, registry.register_link(from, to)});
    return true;
  }
  return false;
}

void mutate_weights(Genome& g, const MacroConfig& cfg, Rng& rng) {
  for (auto& c : g.connections) {
    const bool severe = bernoulli(rng, cfg.delta_severity);
    const double cold = severe ? cfg.c_cold_gauss_severe : cfg.c_cold_gauss;
    const double gauss = severe ? cfg.c_gauss_severe : cfg.c_gauss;
    if (bernoulli(rng, cold)) continue;  // canceled, weight untouched
    if (bernoulli(rng, 1.0 - gauss))
      c.weight = normal(rng, c.weight, cfg.sigma_w);
    else
      c.weight = normal(rng, 0.0, cfg.sigma_w);
  }
}

void mutate_toggle(Genome& g, const MacroConfig& cfg, Rng& rng) {
  if (!bernoulli(rng, cfg.c_turn_on_off)) return;
  if (g.connections.empty()) return;
  auto& gene =
      g.connections[uniform_int(rng, 0, static_cast<int>(g.connections.size()) - 1)];
  gene.enabled = !gene.enabled;
  if (!enabled_graph_acyclic(g) || !output_reachable(g))
    gene.enabled = !gene.enabled;  // rejected
}

namespace {

const NodeGene* lookup_node(const Genome& a, const Genome& b, int id) {
  if (const NodeGene* n = a.find_node(id)) return n;
  return b.find_node(id);
}

// Sorts by innovation, drops duplicate (in,out) pairs (keeping the lower
// innovation), collects referenced nodes plus every io node of both parents.
Genome assemble_offspring(std::vector<ConnectionGene> genes, const Genome& a,
                          const Genome& b) {
  std::sort(genes.begin(), genes.end(),
            [](const ConnectionGene& x, const ConnectionGene& y) {
              return x.innovation < y.innovation;
            });
  Genome child;
  std::set<std::pair<int, int>> pairs;
  std::set<int> node_ids;
  for (const auto& gene : genes) {
    if (!pairs.insert({gene.in_node, gene.out_node}).second) continue;
    child.connections.push_back(gene);
    node_ids.insert(gene.in_node);
    node_ids.insert(gene.out_node);
  }
  for (const Genome* parent : {&a, &b})
    for (const auto& n : parent->nodes)
      if (n.role != NodeRole::Hidden) node_ids.insert(n.id);
  for (int id : node_ids) {
    const NodeGene* n = lookup_node(a, b, id);
    child.nodes.push_back(*n);
  }
  return child;
}

}  // namespace

Genome crossover_single_point_at(const Genome& left, const Genome& right,
                                 int point_innovation) {
  std::vector<ConnectionGene> genes;
  for (const auto& gene : left.connections)
    if (gene.innovation < point_innovation) genes.push_back(gene);
  const ConnectionGene* pl = nullptr;
  const ConnectionGene* pr = nullptr;
  for (const auto& gene : left.connections)
    if (gene.innovation == point_innovation) pl = &gene;
  for (const auto& gene : right.connections) {
    if (gene.innovation == point_innovation) pr = &gene;
    if (gene.innovation > point_innovation) genes.push_back(gene);
  }
  if (!pl || !pr)
    throw NoMatchError("crossover point is not a matching innovation");
  ConnectionGene point = *pl;
  point.weight = 0.5 * (pl->weight + pr->weight);
  point.enabled = pl->enabled || pr->enabled;
  genes.push_back(point);
  Genome child = assemble_offspring(std::move(genes), left, right);
  if (!enabled_graph_acyclic(child)) return left;  // rare; keep a valid parent
  return child;
}

namespace {
std::vector<int> matching_innovations(const Genome& a, const Genome& b) {
  std::vector<int> out;
  std::size_t i = 0, j = 0;
  while (i < a.connections.size() && j < b.connections.size()) {
    const int ia = a.connections[i].innovation;
    const int ib = b.connections[j].innovation;
    if (ia == ib) {
      out.push_back(ia);
      ++i;
      ++j;
    } else if (ia < ib) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}
}  // namespace

Genome crossover_single_point(const Genome& a, const Genome& b, Rng& rng) {
  const std::vector<int> matching = matching_innovations(a, b);
  if (matching.empty())
    throw NoMatchError("parents share no matching innovation");
  const bool left_is_a = bernoulli(rng, 0.5);
  const int point =
      matching[uniform_int(rng, 0, static_cast<int>(matching.size()) - 1)];
  return left_is_a ? crossover_single_point_at(a, b, point)
                   : crossover_single_point_at(b, a, point);
}

namespace {

const Genome* pick_fitter(const Genome& a, const Genome& b, double fa,
                          double fb, Rng& rng) {
  if (fa > fb) return &a;
  if (fb > fa) return &b;
  return bernoulli(rng, 0.5) ? &a : &b;
}

}  // namespace

Genome crossover_multipoint(const Genome& a, const Genome& b, double fitness_a,
                            double fitness_b, Rng& rng) {
  const Genome* fitter = pick_fitter(a, b, fitness_a, fitness_b, rng);
  const GeneClassification cls = classify_genes(a, b);
  std::vector<ConnectionGene> genes;
  for (std::size_t i = 0; i < cls.matching_a.size(); ++i)
    genes.push_back(bernoulli(rng, 0.5) ? cls.matching_a[i]
                                        : cls.matching_b[i]);
  const auto& disjoint = fitter == &a ? cls.disjoint_a : cls.disjoint_b;
  const auto& excess = fitter == &a ? cls.excess_a : cls.excess_b;
  genes.insert(genes.end(), disjoint.begin(), disjoint.end());
  genes.insert(genes.end(), excess.begin(), excess.end());
  Genome child = assemble_offspring(std::move(genes), a, b);
  if (!enabled_graph_acyclic(child)) return *fitter;
  return child;
}

Genome crossover_multipoint_average(const Genome& a, const Genome& b,
                                    double fitness_a, double fitness_b,
                                    Rng& rng) {
  const Genome* fitter = pick_fitter(a, b, fitness_a, fitness_b, rng);
  const GeneClassification cls = classify_genes(a, b);
  std::vector<ConnectionGene> genes;
  for (std::size_t i = 0; i < cls.matching_a.size(); ++i) {
    ConnectionGene gene = cls.matching_a[i];
    gene.weight = 0.5 * (cls.matching_a[i].weight + cls.matching_b[i].weight);
    gene.enabled = cls.matching_a[i].enabled || cls.matching_b[i].enabled;
    genes.push_back(gene);
  }
  const auto& disjoint = fitter == &a ? cls.disjoint_a : cls.disjoint_b;
  const auto& excess = fitter == &a ? cls.excess_a : cls.excess_b;
  genes.insert(genes.end(), disjoint.begin(), disjoint.end());
  genes.insert(genes.end(), excess.begin(), excess.end());
  Genome child = assemble_offspring(std::move(genes), a, b);
  if (!enabled_graph_acyclic(child)) return *fitter;
  return child;
}

void mutate_genome(Genome& g, const MacroConfig& cfg, const AnnealRates& rates,
                   InnovationRegistry& registry, Rng& rng) {
  if (bernoulli(rng, rates.pi_add_node)) mutate_add_node(g, registry, rng);
  if (bernoulli(rng, rates.pi_add_link)) mutate_add_link(g, cfg, registry, rng);
  if (bernoulli(rng, cfg.pi_mutate_link)) mutate_weights(g, cfg, rng);
  mutate_toggle(g, cfg, rng);
}

Genome make_offspring(const std::vector<const Genome*>& pool,
                      const std::vector<std::vector<const Genome*>>& other_pools,
                      const MacroConfig& cfg, const AnnealRates& rates,
                      InnovationRegistry& registry, Rng& rng) {
  if (pool.empty()) throw std::invalid_argument("empty parent pool");

  Genome child;
  bool crossed = false;
  if (!bernoulli(rng, rates.p_mutate_only)) {
    const int i = uniform_int(rng, 0, static_cast<int>(pool.size()) - 1);
    const Genome* p1 = pool[i];
    const Genome* p2 = nullptr;
    if (!other_pools.empty() && bernoulli(rng, cfg.c_inter_species)) {
      const auto& mates =
          other_pools[uniform_int(rng, 0, static_cast<int>(other_pools.size()) - 1)];
      p2 = mates[uniform_int(rng, 0, static_cast<int>(mates.size()) - 1)];
    } else if (pool.size() >= 2) {
      int j = uniform_int(rng, 0, static_cast<int>(pool.size()) - 2);
      if (j >= i) ++j;
      p2 = pool[j];
    }
    if (p2 != nullptr) {
      const double total =
          cfg.p_single_point + cfg.p_multipoint + cfg.p_multipoint_average;
      const double u = uniform_real(rng, 0.0, total);
      if (u < cfg.p_single_point) {
        try {
          child = crossover_single_point(*p1, *p2, rng);
        } catch (const NoMatchError&) {
          child = p1->raw_fitness >= p2->raw_fitness ? *p1 : *p2;
        }
      } else if (u < cfg.p_single_point + cfg.p_multipoint) {
        child = crossover_multipoint(*p1, *p2, p1->raw_fitness,
                                     p2->raw_fitness, rng);
      } else {
        child = crossover_multipoint_average(*p1, *p2, p1->raw_fitness,
                                             p2->raw_fitness, rng);
      }
      crossed = true;
      if (!bernoulli(rng, cfg.p_mate_only))
        mutate_genome(child, cfg, rates, registry, rng);
    } else {
      child = *p1;  // no distinct mate: mutate-only path forced
    }
  }
  if (!crossed) {
    if (child.nodes.empty())
      child = *pool[uniform_int(rng, 0, static_cast<int>(pool.size()) - 1)];
    mutate_genome(child, cfg, rates, registry, rng);
  }
  child.raw_fitness = 0.0;
  child.adjusted_fitness = 0.0;
  validate_genome(child);
  return child;
}

}  // namespace neuroforge
