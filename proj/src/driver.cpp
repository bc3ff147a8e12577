#include "neuroforge/driver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "neuroforge/network.hpp"
#include "neuroforge/residual_td.hpp"

namespace neuroforge {

namespace {

// Work-shared loop; every item writes only its own slot and draws from its
// own substream, so the schedule cannot influence results.
void parallel_for(int count, int threads,
                  const std::function<void(int)>& body) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_workers = std::min(threads, count);
  pool.reserve(n_workers);
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::string metrics_header() {
  return "gen,mode,best_raw,mean_raw,species,best_nodes,best_edges,"
         "pi_add_node,pi_add_link,p_mutate_only,o\n";
}

std::string format_report_row(const GenerationReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d,%s,%.6f,%.6f,%d,%d,%d,%.6f,%.6f,%.6f,%d\n",
                r.generation, r.micro ? "micro" : "macro", r.best_raw,
                r.mean_raw, r.species_count, r.best_nodes, r.best_edges,
                r.pi_add_node, r.pi_add_link, r.p_mutate_only, r.o);
  return buf;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<GenerationReport>& reports) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write metrics file: " + path);
  out << metrics_header();
  for (const GenerationReport& r : reports) out << format_report_row(r);
}

EvolutionDriver::EvolutionDriver(const RunConfig& cfg)
    : EvolutionDriver(cfg, make_environment(cfg.env)) {}

EvolutionDriver::EvolutionDriver(const RunConfig& cfg,
                                 std::unique_ptr<Environment> env)
    : cfg_(cfg), env_(std::move(env)) {
  validate_config(cfg_);

  Rng init_rng = make_stream(cfg_.seed, 0, 0, 0);
  std::vector<Genome> members;
  members.reserve(cfg_.macro.p);
  for (int i = 0; i < cfg_.macro.p; ++i)
    members.push_back(
        new_minimal_genome(env_->feature_size(), 1, registry_, init_rng));

  Rng species_rng = make_stream(cfg_.seed, 0, 1, 0);
  assign_species(pop_, std::move(members), cfg_.macro, species_rng);
}

void EvolutionDriver::evaluate_population() {
  const int n = static_cast<int>(pop_.members.size());
  success_flags_.assign(n, 0);
  parallel_for(n, cfg_.threads, [&](int i) {
    Genome& g = pop_.members[i];
    Network net = decode(g);
    // One shared episode-noise stream per generation: every member trains on
    // identical exploration draws, so fitness differences reflect the genomes
    // rather than per-member sampling luck (common random numbers).
    Rng rng = make_stream(cfg_.seed, 1, gen_, 0);
    g.raw_fitness = evaluate_fitness(net, *env_, cfg_.td, rng);
    write_back_weights(g, net);
    success_flags_[i] =
        env_->success(net, cfg_.td.gamma, cfg_.td.max_steps_per_episode) ? 1
                                                                         : 0;
  });
}

const GenerationReport& EvolutionDriver::step() {
  if (finished_) throw std::logic_error("run already finished");

  evaluate_population();
  update_species_stats(pop_);

  const int champ = population_champion(pop_);
  const double gen_best = pop_.members[champ].raw_fitness;
  if (gen_best > last_gen_best_) {
    flat_ = 0;
    o_ = 0;
    anneal_.k3 = 1;
    cma_runs_.clear();
  } else {
    flat_ += 1;
    const int new_o = flat_ / cfg_.stagnation_window;
    if (new_o > o_) {
      o_ = new_o;
      anneal_.reset(cfg_.macro);
      for (auto& [id, run] : cma_runs_) cma_inflate(run.state, run.budget, o_);
    }
  }
  last_gen_best_ = gen_best;
  if (gen_best > best_ever_) best_ever_ = gen_best;

  int winner = -1;
  for (int i = 0; i < static_cast<int>(pop_.members.size()); ++i) {
    if (!success_flags_[i]) continue;
    if (winner < 0 ||
        pop_.members[i].raw_fitness > pop_.members[winner].raw_fitness)
      winner = i;
  }
  if (winner >= 0) {
    success_generation_ = gen_;
    best_genome_ = pop_.members[winner];
    have_best_genome_ = true;
    finished_ = true;
  }

  const AnnealRates rates = advance_anneal(anneal_, cfg_.macro);

  double mean = 0.0;
  for (const Genome& g : pop_.members) mean += g.raw_fitness;
  mean /= static_cast<double>(pop_.members.size());

  GenerationReport r;
  r.generation = gen_;
  r.micro = o_ >= 1;
  r.best_raw = gen_best;
  r.mean_raw = mean;
  r.species_count = static_cast<int>(pop_.species.size());
  r.best_nodes = static_cast<int>(pop_.members[champ].nodes.size());
  r.best_edges = pop_.members[champ].enabled_count();
  r.pi_add_node = rates.pi_add_node;
  r.pi_add_link = rates.pi_add_link;
  r.p_mutate_only = rates.p_mutate_only;
  r.o = o_;
  reports_.push_back(r);

  if (!finished_ && gen_ >= cfg_.max_generations) {
    finished_ = true;
    best_genome_ = pop_.members[champ];
    have_best_genome_ = true;
  }

  if (!finished_) {
    const std::vector<int> allocation = reproduction_allocation();
    if (r.micro)
      reproduce_micro(allocation, rates);
    else
      reproduce_macro(allocation, rates);
    gen_ += 1;
  }
  return reports_.back();
}

std::vector<int> EvolutionDriver::reproduction_allocation() {
  compute_adjusted_fitness(pop_, cfg_.macro);
  std::vector<int> allocation =
      allocate_offspring(pop_, cfg_.macro, cfg_.macro.p);
  delta_coding_transfer(pop_, cfg_.macro, allocation);
  return allocation;
}

void EvolutionDriver::reproduce_macro(const std::vector<int>& allocation,
                                      const AnnealRates& rates) {
  registry_.begin_generation();
  Rng rng = make_stream(cfg_.seed, 2, gen_, 0);

  const size_t n_species = pop_.species.size();
  std::vector<std::vector<const Genome*>> pools(n_species);
  for (size_t j = 0; j < n_species; ++j)
    for (int idx : select_parents(pop_, pop_.species[j], cfg_.macro))
      pools[j].push_back(&pop_.members[idx]);

  std::vector<Genome> next;
  next.reserve(cfg_.macro.p);
  for (size_t j = 0; j < n_species; ++j) {
    next.push_back(pop_.members[species_champion(pop_, pop_.species[j])]);
    std::vector<std::vector<const Genome*>> others;
    others.reserve(n_species - 1);
    for (size_t k = 0; k < n_species; ++k)
      if (k != j) others.push_back(pools[k]);
    for (int c = 1; c < allocation[j]; ++c)
      next.push_back(make_offspring(pools[j], others, cfg_.macro, rates,
                                    registry_, rng));
  }

  Rng species_rng = make_stream(cfg_.seed, 3, gen_, 0);
  assign_species(pop_, std::move(next), cfg_.macro, species_rng);
}

Genome EvolutionDriver::candidate_genome(const Genome& champion,
                                         const Eigen::VectorXd& weights) const {
  Genome g = champion;
  set_enabled_weights(g, weights);
  g.raw_fitness = 0.0;
  g.adjusted_fitness = 0.0;
  return g;
}

void EvolutionDriver::reproduce_micro(const std::vector<int>& allocation,
                                      const AnnealRates& rates) {
  registry_.begin_generation();
  Rng fallback_rng = make_stream(cfg_.seed, 2, gen_, 0);

  const size_t n_species = pop_.species.size();
  std::vector<std::vector<const Genome*>> pools(n_species);
  for (size_t j = 0; j < n_species; ++j)
    for (int idx : select_parents(pop_, pop_.species[j], cfg_.macro))
      pools[j].push_back(&pop_.members[idx]);

  std::vector<Genome> next;
  next.reserve(cfg_.macro.p);
  std::vector<std::vector<int>> new_member_lists(n_species);

  for (size_t j = 0; j < n_species; ++j) {
    Species& sp = pop_.species[j];
    const Genome champion = pop_.members[species_champion(pop_, sp)];
    const int need = allocation[j] - 1;
    new_member_lists[j].push_back(static_cast<int>(next.size()));
    next.push_back(champion);  // elite clone

    const int n_weights = champion.enabled_count();
    if (n_weights < 1) {
      // Degenerate topology: no weight vector to optimize over, so this
      // species reproduces the macro way this generation.
      std::vector<std::vector<const Genome*>> others;
      for (size_t k = 0; k < n_species; ++k)
        if (k != j) others.push_back(pools[k]);
      for (int c = 0; c < need; ++c) {
        new_member_lists[j].push_back(static_cast<int>(next.size()));
        next.push_back(make_offspring(pools[j], others, cfg_.macro, rates,
                                      registry_, fallback_rng));
      }
      continue;
    }

    auto it = cma_runs_.find(sp.id);
    if (it != cma_runs_.end() &&
        (it->second.state.n != n_weights ||
         cma_should_stop(it->second.state, it->second.budget))) {
      cma_runs_.erase(it);
      it = cma_runs_.end();
    }
    if (it == cma_runs_.end()) {
      CmaRun run;
      run.budget = cfg_.cma;
      run.budget.tau_stop = std::lround(run.budget.rho * (1.0 + o_));
      run.budget.f_stop = best_ever_;
      run.state = cma_init(enabled_weights(champion), o_, run.budget);
      it = cma_runs_.emplace(sp.id, std::move(run)).first;
    }
    CmaRun& run = it->second;

    std::vector<Genome> scored;  // candidate genomes, post-training
    Rng ask_rng = make_stream(cfg_.seed, 4, gen_, sp.id);
    const int lambda = run.state.params.lambda;
    const int cycles = need > 0 ? (need + lambda - 1) / lambda : 0;
    for (int cycle = 0; cycle < cycles; ++cycle) {
      if (cma_should_stop(run.state, run.budget)) break;
      const std::vector<Eigen::VectorXd> candidates = cma_ask(run.state, ask_rng);
      std::vector<double> fits(lambda, 0.0);
      std::vector<Genome> genomes(lambda);
      parallel_for(lambda, cfg_.threads, [&](int k) {
        Genome g = candidate_genome(champion, candidates[k]);
        Network net = decode(g);
        // Same common-random-numbers scheme as macro evaluation.
        Rng rng = make_stream(cfg_.seed, 5, gen_, 0);
        fits[k] = evaluate_fitness(net, *env_, cfg_.td, rng);
        write_back_weights(g, net);
        g.raw_fitness = fits[k];
        genomes[k] = std::move(g);
      });
      cma_tell(run.state, candidates, fits);
      if (cma_trace_hook) {
        CmaTraceRow row;
        row.species_id = sp.id;
        row.iteration = run.state.t;
        row.sigma = run.state.sigma;
        row.best_fitness = *std::max_element(fits.begin(), fits.end());
        row.mean_fitness =
            std::accumulate(fits.begin(), fits.end(), 0.0) / lambda;
        row.cond_number = condition_number(run.state);
        cma_trace_hook(row);
      }
      for (Genome& g : genomes) scored.push_back(std::move(g));
    }

    std::vector<int> order(scored.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return scored[a].raw_fitness > scored[b].raw_fitness;
    });
    for (int c = 0; c < need; ++c) {
      new_member_lists[j].push_back(static_cast<int>(next.size()));
      if (c < static_cast<int>(order.size()))
        next.push_back(scored[order[c]]);
      else if (!order.empty())  // optimizer retired early: pad with its best
        next.push_back(scored[order[0]]);
      else
        next.push_back(champion);
    }

    if (cma_should_stop(run.state, run.budget)) cma_runs_.erase(sp.id);
  }

  pop_.members = std::move(next);
  for (size_t j = 0; j < n_species; ++j) {
    pop_.species[j].members = std::move(new_member_lists[j]);
    pop_.species[j].age += 1;
  }
}

const Genome& EvolutionDriver::best_genome() const {
  if (have_best_genome_) return best_genome_;
  return pop_.members[population_champion(pop_)];
}

std::vector<CmaRunInfo> EvolutionDriver::cma_run_info() const {
  std::vector<CmaRunInfo> out;
  out.reserve(cma_runs_.size());
  for (const auto& [id, run] : cma_runs_) {
    CmaRunInfo info;
    info.species_id = id;
    info.o = run.state.o;
    info.lambda = run.state.params.lambda;
    info.tau_stop = run.budget.tau_stop;
    info.sigma = run.state.sigma;
    info.iterations = run.state.t;
    out.push_back(info);
  }
  return out;
}

RunResult EvolutionDriver::run() {
  while (!finished_) step();
  RunResult res;
  res.reports = reports_;
  res.best = best_genome();
  res.best_raw = res.best.raw_fitness;
  res.success = succeeded();
  res.success_generation = success_generation_;
  res.generations = static_cast<int>(reports_.size());
  return res;
}

RunResult run_evolution(const RunConfig& cfg) {
  return EvolutionDriver(cfg).run();
}

}  // namespace neuroforge
