#include "neuroforge/speciation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace neuroforge {

double compatibility(const Genome& a, const Genome& b, const MacroConfig& cfg) {
  const GeneClassification cls = classify_genes(a, b);
  const double excess =
      static_cast<double>(cls.excess_a.size() + cls.excess_b.size());
  const double disjoint =
      static_cast<double>(cls.disjoint_a.size() + cls.disjoint_b.size());
  const double n = static_cast<double>(
      std::max(a.connections.size(), b.connections.size()));
  double wbar = 0.0;
  if (!cls.matching_a.empty()) {
    for (std::size_t i = 0; i < cls.matching_a.size(); ++i)
      wbar += std::abs(cls.matching_a[i].weight - cls.matching_b[i].weight);
    wbar /= static_cast<double>(cls.matching_a.size());
  }
  if (n == 0.0) return cfg.c3 * wbar;
  return cfg.c1 * excess / n + cfg.c2 * disjoint / n + cfg.c3 * wbar;
}

void assign_species(Population& pop, std::vector<Genome> next,
                    const MacroConfig& cfg, Rng& rng) {
  // Representatives come from the previous generation (the current members).
  for (auto& sp : pop.species) {
    if (sp.members.empty()) continue;
    const int pick =
        sp.members[uniform_int(rng, 0, static_cast<int>(sp.members.size()) - 1)];
    sp.representative = pop.members[pick];
    sp.members.clear();
    sp.age += 1;
  }
  pop.members = std::move(next);
  for (int i = 0; i < static_cast<int>(pop.members.size()); ++i) {
    bool placed = false;
    for (auto& sp : pop.species) {
      if (compatibility(pop.members[i], sp.representative, cfg) < cfg.delta_c) {
        sp.members.push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed) {
      Species sp;
      sp.id = pop.next_species_id++;
      sp.representative = pop.members[i];
      sp.members.push_back(i);
      pop.species.push_back(std::move(sp));
    }
  }
  pop.species.erase(
      std::remove_if(pop.species.begin(), pop.species.end(),
                     [](const Species& sp) { return sp.members.empty(); }),
      pop.species.end());
}

double adjust_fitness(double raw, double f_worst, int species_size) {
  return (raw - f_worst) / std::log(static_cast<double>(species_size) + 1.0);
}

void compute_adjusted_fitness(Population& pop, const MacroConfig& cfg) {
  if (pop.members.empty()) return;
  double f_worst = pop.members[0].raw_fitness;
  for (const auto& g : pop.members) f_worst = std::min(f_worst, g.raw_fitness);
  for (const auto& sp : pop.species) {
    double factor = 1.0;
    if (sp.age <= 10) factor *= cfg.d_age_significance;
    if (sp.gens_since_improvement > cfg.d_drop_off_age) factor *= 0.01;
    for (int idx : sp.members) {
      Genome& g = pop.members[idx];
      g.adjusted_fitness =
          adjust_fitness(g.raw_fitness, f_worst,
                         static_cast<int>(sp.members.size())) *
          factor;
    }
  }
  pop.members[population_champion(pop)].adjusted_fitness *= cfg.c_best;
}

std::vector<int> allocate_offspring(const Population& pop,
                                    const MacroConfig& cfg, int total) {
  (void)cfg;
  const int k = static_cast<int>(pop.species.size());
  if (k == 0) return {};
  double mass = 0.0;
  for (const auto& g : pop.members) mass += g.adjusted_fitness;
  const double mean = mass / static_cast<double>(pop.members.size());

  std::vector<double> share(k);
  if (mean > 0.0) {
    for (int s = 0; s < k; ++s) {
      double sum = 0.0;
      for (int idx : pop.species[s].members)
        sum += pop.members[idx].adjusted_fitness;
      share[s] = sum / mean;
    }
  } else {
    std::fill(share.begin(), share.end(),
              static_cast<double>(total) / static_cast<double>(k));
  }

  // Largest-remainder rounding to exactly `total`.
  std::vector<int> alloc(k);
  std::vector<std::pair<double, int>> remainder(k);
  int assigned = 0;
  for (int s = 0; s < k; ++s) {
    alloc[s] = static_cast<int>(std::floor(share[s]));
    remainder[s] = {share[s] - std::floor(share[s]), s};
    assigned += alloc[s];
  }
  std::sort(remainder.begin(), remainder.end(),
            [](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first > b.first;
              return a.second < b.second;
            });
  for (int i = 0; assigned < total; ++i) {
    ++alloc[remainder[i % k].second];
    ++assigned;
  }
  while (assigned > total) {
    // Trim from the largest allocation (ties -> higher species index).
    int victim = 0;
    for (int s = 1; s < k; ++s)
      if (alloc[s] >= alloc[victim]) victim = s;
    --alloc[victim];
    --assigned;
  }
  // Every surviving species keeps at least its elite slot.
  for (int s = 0; s < k; ++s) {
    while (alloc[s] < 1) {
      int donor = -1;
      for (int d = 0; d < k; ++d)
        if (alloc[d] > 1 && (donor < 0 || alloc[d] > alloc[donor])) donor = d;
      if (donor < 0) break;
      --alloc[donor];
      ++alloc[s];
    }
  }
  return alloc;
}

void delta_coding_transfer(const Population& pop, const MacroConfig& cfg,
                           std::vector<int>& allocation) {
  if (pop.species.size() < 2 || allocation.size() != pop.species.size()) return;
  const int champ_member = population_champion(pop);
  int recipient = -1;
  for (int s = 0; s < static_cast<int>(pop.species.size()); ++s)
    for (int idx : pop.species[s].members)
      if (idx == champ_member) recipient = s;
  int donor = 0;
  for (int s = 1; s < static_cast<int>(pop.species.size()); ++s) {
    const Species& a = pop.species[s];
    const Species& b = pop.species[donor];
    if (a.gens_since_improvement > b.gens_since_improvement ||
        (a.gens_since_improvement == b.gens_since_improvement && a.id > b.id))
      donor = s;
  }
  if (recipient < 0 || donor == recipient) return;
  const int stolen = std::min(cfg.d_offspring_stolen, allocation[donor] - 1);
  if (stolen <= 0) return;
  allocation[donor] -= stolen;
  allocation[recipient] += stolen;
}

std::vector<int> select_parents(const Population& pop, const Species& sp,
                                const MacroConfig& cfg) {
  std::vector<int> sorted = sp.members;
  std::stable_sort(sorted.begin(), sorted.end(), [&](int a, int b) {
    return pop.members[a].adjusted_fitness > pop.members[b].adjusted_fitness;
  });
  const int keep = std::max(
      1, static_cast<int>(std::ceil(cfg.c_survival *
                                    static_cast<double>(sorted.size()))));
  sorted.resize(std::min<std::size_t>(sorted.size(), keep));
  return sorted;
}

int population_champion(const Population& pop) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(pop.members.size()); ++i)
    if (pop.members[i].raw_fitness > pop.members[best].raw_fitness) best = i;
  return best;
}

int species_champion(const Population& pop, const Species& sp) {
  int best = sp.members[0];
  for (int idx : sp.members)
    if (pop.members[idx].raw_fitness > pop.members[best].raw_fitness)
      best = idx;
  return best;
}

void update_species_stats(Population& pop) {
  for (auto& sp : pop.species) {
    if (sp.members.empty()) continue;
    const double best = pop.members[species_champion(pop, sp)].raw_fitness;
    if (best > sp.best_raw_ever) {
      sp.best_raw_ever = best;
      sp.gens_since_improvement = 0;
    } else {
      sp.gens_since_improvement += 1;
    }
  }
}

}  // namespace neuroforge
