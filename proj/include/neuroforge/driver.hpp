#ifndef NEUROFORGE_DRIVER_HPP
#define NEUROFORGE_DRIVER_HPP

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "neuroforge/config.hpp"
#include "neuroforge/speciation.hpp"

namespace neuroforge {

// One row of the run metrics. `micro` names the reproduction mode chosen
// after this generation's evaluation; the rate columns are the annealed
// probabilities in effect for that reproduction.
struct GenerationReport {
  int generation = 0;
  bool micro = false;
  double best_raw = 0.0;
  double mean_raw = 0.0;
  int species_count = 0;
  int best_nodes = 0;  // champion genome: node count
  int best_edges = 0;  // champion genome: enabled connection count
  double pi_add_node = 0.0;
  double pi_add_link = 0.0;
  double p_mutate_only = 0.0;
  int o = 0;  // stagnation level
};

std::string metrics_header();
std::string format_report_row(const GenerationReport& r);
void write_metrics_csv(const std::string& path,
                       const std::vector<GenerationReport>& reports);

struct RunResult {
  std::vector<GenerationReport> reports;
  Genome best;  // the succeeding genome, else the final champion
  double best_raw = 0.0;
  bool success = false;
  int success_generation = -1;
  int generations = 0;  // generations evaluated
};

// Snapshot of one species' weight-optimizer run.
struct CmaRunInfo {
  int species_id = 0;
  int o = 0;
  int lambda = 0;
  long tau_stop = 0;
  double sigma = 0.0;
  long iterations = 0;
};

// One optimizer iteration within a species, for the optional trace output.
struct CmaTraceRow {
  int species_id = 0;
  long iteration = 0;
  double sigma = 0.0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  double cond_number = 0.0;
};

// Generation loop: evaluate (decode + value training + fitness) every member,
// detect stagnation against the population's best-ever raw fitness, then
// reproduce — topology search while fitness improves, per-species weight
// optimization on the champion topology while it stagnates. All randomness
// derives from cfg.seed through keyed substreams, so results are identical
// across runs and thread counts.
class EvolutionDriver {
 public:
  explicit EvolutionDriver(const RunConfig& cfg);
  // As above but with a caller-supplied environment; cfg.env is ignored.
  EvolutionDriver(const RunConfig& cfg, std::unique_ptr<Environment> env);

  // Evaluates the current generation, updates the bookkeeping, emits a
  // report, and (unless the run just finished) produces the next generation.
  const GenerationReport& step();
  RunResult run();

  bool finished() const { return finished_; }
  bool succeeded() const { return success_generation_ >= 0; }
  const std::vector<GenerationReport>& reports() const { return reports_; }
  const Population& population() const { return pop_; }
  const Genome& best_genome() const;
  double best_raw_ever() const { return best_ever_; }
  int stagnation_level() const { return o_; }
  int flat_generations() const { return flat_; }
  const AnnealState& anneal() const { return anneal_; }
  std::vector<CmaRunInfo> cma_run_info() const;

  // Called after every optimizer iteration when set.
  std::function<void(const CmaTraceRow&)> cma_trace_hook;

 private:
  struct CmaRun {
    CmaState state;
    CmaBudget budget;
  };

  void evaluate_population();
  std::vector<int> reproduction_allocation();
  void reproduce_macro(const std::vector<int>& allocation,
                       const AnnealRates& rates);
  void reproduce_micro(const std::vector<int>& allocation,
                       const AnnealRates& rates);
  Genome candidate_genome(const Genome& champion,
                          const Eigen::VectorXd& weights) const;

  RunConfig cfg_;
  std::unique_ptr<Environment> env_;
  Population pop_;
  InnovationRegistry registry_;
  AnnealState anneal_;

  int gen_ = 0;  // index of the generation awaiting evaluation
  double best_ever_ = -std::numeric_limits<double>::infinity();
  // Improvement is generation-over-generation: the population best must beat
  // the previous generation's best, not the all-time record. Noisy fitness
  // would otherwise ratchet the record up on a lucky spike and starve the
  // structural search in weight-optimization mode forever.
  double last_gen_best_ = -std::numeric_limits<double>::infinity();
  int flat_ = 0;  // consecutive generations without strict improvement
  int o_ = 0;
  std::map<int, CmaRun> cma_runs_;  // keyed by species id

  std::vector<GenerationReport> reports_;
  std::vector<char> success_flags_;
  int success_generation_ = -1;
  Genome best_genome_;
  bool have_best_genome_ = false;
  bool finished_ = false;
};

RunResult run_evolution(const RunConfig& cfg);

}  // namespace neuroforge

#endif
