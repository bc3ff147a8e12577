#ifndef NEUROFORGE_SPECIATION_HPP
#define NEUROFORGE_SPECIATION_HPP

#include <limits>
#include <vector>

#include "neuroforge/variation.hpp"

namespace neuroforge {

struct Species {
  int id = 0;
  int age = 0;  // generations since creation
  double best_raw_ever = -std::numeric_limits<double>::infinity();
  int gens_since_improvement = 0;
  Genome representative;     // drawn from the previous generation's members
  std::vector<int> members;  // indices into Population::members
};

struct Population {
  std::vector<Genome> members;
  std::vector<Species> species;  // sorted by id
  int next_species_id = 1;
};

// Compatibility distance: c1*E/N + c2*D/N + c3*mean|dw| over matching genes
// (N = larger gene count, no small-genome exception; 0 matching genes
// contribute 0 mean difference).
double compatibility(const Genome& a, const Genome& b, const MacroConfig& cfg);

// Replaces the population's members with `next` and re-partitions them:
// representatives are drawn uniformly from each species' current (previous
// generation) members, species are visited in id order, each genome joins the
// first species within delta_c, unmatched genomes found new species (the
// founder is the representative), emptied species are dropped, survivor ages
// increment.
void assign_species(Population& pop, std::vector<Genome> next,
                    const MacroConfig& cfg, Rng& rng);

// Explicit-sharing adjustment dampened by species size.
double adjust_fitness(double raw, double f_worst, int species_size);

// Writes adjusted_fitness for every member: sharing against the population's
// worst raw fitness, the population champion amplified by c_best, young
// species scaled by d_age_significance and species beyond d_drop_off_age
// generations without improvement scaled by 0.01.
void compute_adjusted_fitness(Population& pop, const MacroConfig& cfg);

// Offspring slots per species (aligned with pop.species): real-valued shares
// sum_i f_ij / mean(f) rounded by largest remainder to exactly `total`, with
// at least one slot per species; uniform shares when the fitness mass is not
// positive.
std::vector<int> allocate_offspring(const Population& pop,
                                    const MacroConfig& cfg, int total);

// Delta-coding slot transfer: moves min(d_offspring_stolen, donor-1) slots
// from the species longest without improvement (ties -> larger id) to the
// population champion's species.
void delta_coding_transfer(const Population& pop, const MacroConfig& cfg,
                           std::vector<int>& allocation);

// Indices of the top ceil(c_survival * size) members of the species by
// adjusted fitness (ties -> lower member index), never empty.
std::vector<int> select_parents(const Population& pop, const Species& sp,
                                const MacroConfig& cfg);

// Member index of the population's best genome by raw fitness (ties -> lower
// index).
int population_champion(const Population& pop);
// Member index of the species' best genome by raw fitness.
int species_champion(const Population& pop, const Species& sp);

// Updates best_raw_ever / gens_since_improvement from the current members.
void update_species_stats(Population& pop);

}  // namespace neuroforge

#endif
