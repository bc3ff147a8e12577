#ifndef NEUROFORGE_VARIATION_HPP
#define NEUROFORGE_VARIATION_HPP

#include <vector>

#include "neuroforge/genome.hpp"

namespace neuroforge {

// Reproduction and mutation parameters. Defaults reproduce the reference
// configuration; see config.cpp for the file keys.
struct MacroConfig {
  // weight mutation
  double delta_severity = 0.5;      // probability a gene draws the severe pair
  double c_cold_gauss_severe = 0.1; // cancel probability, severe
  double c_cold_gauss = 0.3;        // cancel probability, non-severe
  double c_gauss_severe = 0.3;      // 1 - P(perturb around current | modified)
  double c_gauss = 0.5;
  double sigma_w = 0.5;             // stddev for perturb and resample draws
  double pi_mutate_link = 0.9;      // probability the weight pass runs at all
  double c_turn_on_off = 0.2;       // enable/disable flip probability
  int pi_attempt_mutation = 50;     // add-link candidate attempts

  // structural mutation starting rates (annealed, see AnnealState)
  double pi_add_node = 0.2;
  double pi_add_link = 0.6;

  // reproduction
  int p = 120;                      // population size
  double p_mutate_only = 0.3;       // starting rate, annealed
  double p_mate_only = 0.2;         // crossover result left unmutated
  double p_single_point = 0.3;      // crossover method weights (normalized)
  double p_multipoint = 0.6;
  double p_multipoint_average = 0.4;
  double c_inter_species = 0.2;     // mate drawn from another species
  double c_survival = 0.2;          // parent pool fraction per species
  double c_best = 3.0;              // population champion amplification

  // speciation
  double c1 = 1.0;                  // excess coefficient
  double c2 = 1.0;                  // disjoint coefficient
  double c3 = 2.0;                  // mean weight difference coefficient
  double delta_c = 3.0;             // compatibility threshold
  double d_age_significance = 1.0;  // adjusted-fitness factor, age <= 10
  int d_drop_off_age = 2000;        // stagnation age before the 0.01 penalty
  int d_offspring_stolen = 10;      // delta-coding slot transfer

  // simulated annealing of the rates above
  int c_annealing = 10;             // stagnation window (shared with driver)
  double anneal_delta = 0.01;       // p_mutate_only increment
  double k1 = 20.0;                 // add-node cooling divisor
  double k2 = 10.0;                 // add-link cooling divisor
  double psi1 = 0.02, psi2 = 0.04;  // pi_add_node clamp
  double psi3 = 0.10, psi4 = 0.20;  // pi_add_link clamp
  double psi5 = 0.30, psi6 = 0.50;  // p_mutate_only clamp
};

// Annealed rate state. The x values store the clamped running rates; the
// effective probabilities are the clamped view of x, so they always lie
// inside the psi bounds once a step has been applied.
struct AnnealState {
  double x_add_node = 0.2;
  double x_add_link = 0.6;
  double x_mutate_only = 0.3;
  int temperature = 1;  // T, increments every generation
  int k3 = 1;           // -1 while the population is stagnated

  void reset(const MacroConfig& cfg);
};

struct AnnealRates {
  double pi_add_node;
  double pi_add_link;
  double p_mutate_only;
};

// Current effective probabilities (clamped to the psi bounds).
AnnealRates effective_rates(const AnnealState& s, const MacroConfig& cfg);
// One annealing step: x_add_node -= 1/(k1*T), x_add_link -= 1/(k2*T),
// x_mutate_only += k3*delta, each clamped and stored; then T += 1.
AnnealRates advance_anneal(AnnealState& s, const MacroConfig& cfg);

// Splits one enabled connection: the old gene is disabled, in->new gets
// weight 1.0, new->out inherits the old weight. No-op when nothing is
// enabled or when the drawn gene's split already lives in the genome. Ids
// and innovations come from the registry so identical splits within a
// generation share numbering.
void mutate_add_node(Genome& g, InnovationRegistry& registry, Rng& rng);

// Tries up to cfg.pi_attempt_mutation random ordered pairs; adds an enabled
// connection with Uniform[-1,1] weight when the pair respects node roles, is
// not already present (enabled or disabled), and keeps the graph acyclic.
// Returns false when every attempt failed.
bool mutate_add_link(Genome& g, const MacroConfig& cfg,
                     InnovationRegistry& registry, Rng& rng);

// Per-gene weight mutation: severity pair draw, cancel branch, then perturb
// around the current weight or resample around zero.
void mutate_weights(Genome& g, const MacroConfig& cfg, Rng& rng);

// With probability c_turn_on_off flips one uniformly chosen gene; the flip is
// rejected if it would create a cycle or leave every output unreachable.
void mutate_toggle(Genome& g, const MacroConfig& cfg, Rng& rng);

struct NoMatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Single-point crossover at a matching innovation: genes with innovation
// below the point come from `left`, genes above from `right`, the point gene
// averages the parents' weights. Throws NoMatchError when the parents share
// no innovation.
Genome crossover_single_point_at(const Genome& left, const Genome& right,
                                 int point_innovation);
// Randomized wrapper: uniform point among matching innovations, parent order
// shuffled.
Genome crossover_single_point(const Genome& a, const Genome& b, Rng& rng);

// Matching genes taken whole from either parent (p=0.5 each); disjoint and
// excess genes only from the fitter parent (tie -> one parent at random).
Genome crossover_multipoint(const Genome& a, const Genome& b, double fitness_a,
                            double fitness_b, Rng& rng);

// As multipoint, but matching genes average the parents' weights and are
// enabled if enabled in either parent.
Genome crossover_multipoint_average(const Genome& a, const Genome& b,
                                    double fitness_a, double fitness_b,
                                    Rng& rng);

// Applies the mutation kit in a fixed order: add-node roll, add-link roll,
// weight pass roll, toggle. Structural rates come from the annealed state.
void mutate_genome(Genome& g, const MacroConfig& cfg, const AnnealRates& rates,
                   InnovationRegistry& registry, Rng& rng);

// One offspring from a species' parent pool. `other_pools` lists the parent
// pools of every other species for inter-species mating; falls back to the
// mutate-only path when no distinct mate exists.
Genome make_offspring(const std::vector<const Genome*>& pool,
                      const std::vector<std::vector<const Genome*>>& other_pools,
                      const MacroConfig& cfg, const AnnealRates& rates,
                      InnovationRegistry& registry, Rng& rng);

}  // namespace neuroforge

#endif
