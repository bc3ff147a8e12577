#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <CLI11.hpp>

#include "neuroforge/config.hpp"
#include "neuroforge/driver.hpp"
#include "neuroforge/log.hpp"
#include "neuroforge/network.hpp"
#include "neuroforge/residual_td.hpp"

namespace nf = neuroforge;

namespace {

constexpr int kEvalEpisodes = 8;

struct EnvFlags {
  std::string config_path;
  std::string env_name;
  int length = 0;
  double gamma = -1.0;
};

// Environment and discount from --config when given, otherwise from the
// quick flags (--env/--length/--gamma) over defaults.
std::pair<std::unique_ptr<nf::Environment>, double> resolve_env(
    const EnvFlags& flags) {
  nf::EnvConfig env;
  double gamma = 0.9;
  if (!flags.config_path.empty()) {
    nf::RunConfig cfg = nf::parse_config(flags.config_path);
    env = cfg.env;
    gamma = cfg.td.gamma;
  }
  if (!flags.env_name.empty()) env.name = flags.env_name;
  if (flags.length > 0) env.length = flags.length;
  if (flags.gamma >= 0.0) gamma = flags.gamma;
  return {nf::make_environment(env), gamma};
}

nf::Network decode_for_env(const nf::Genome& genome,
                           const nf::Environment& env) {
  nf::Network net = nf::decode(genome);
  if (net.input_count() != env.feature_size())
    throw nf::DimensionError(
        "genome expects " + std::to_string(net.input_count()) +
        " inputs but environment '" + env.name() + "' provides " +
        std::to_string(env.feature_size()) + " features");
  return net;
}

int cmd_evolve(const std::string& config_path, bool seed_given,
               std::uint64_t seed, const std::string& out_dir) {
  if (config_path.empty()) {
    std::fprintf(stderr, "evolve: --config is required\n");
    return 2;
  }
  nf::RunConfig cfg = nf::parse_config(config_path);
  if (seed_given) cfg.seed = seed;

  std::filesystem::create_directories(out_dir);

  nf::EvolutionDriver driver(cfg);
  std::ofstream trace;
  if (cfg.cma_trace) {
    trace.open(out_dir + "/cma_trace.csv", std::ios::binary);
    trace << "iter,sigma,best_fitness,mean_fitness,cond_number\n";
    driver.cma_trace_hook = [&trace](const nf::CmaTraceRow& row) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%ld,%.6f,%.6f,%.6f,%.6f\n",
                    row.iteration, row.sigma, row.best_fitness,
                    row.mean_fitness, row.cond_number);
      trace << buf;
    };
  }

  nf::RunResult result = driver.run();

  nf::write_metrics_csv(out_dir + "/metrics.csv", result.reports);
  nf::save_genome(result.best, out_dir + "/best_genome.json", cfg.env.name,
                  cfg.seed);
  {
    std::ofstream echo(out_dir + "/config_echo.toml", std::ios::binary);
    echo << nf::echo_config(cfg);
  }

  std::printf("generations=%d best_raw=%.6f success=%s\n", result.generations,
              result.best_raw, result.success ? "true" : "false");
  return 0;
}

int cmd_eval(const std::string& genome_path, const EnvFlags& flags) {
  const nf::Genome genome = nf::load_genome(genome_path);
  auto [env, gamma] = resolve_env(flags);
  nf::Network net = decode_for_env(genome, *env);

  double total = 0.0;
  double lo = 0.0, hi = 0.0;
  for (int e = 0; e < kEvalEpisodes; ++e) {
    const double r = nf::greedy_episode_reward(net, *env, e, gamma, 500);
    total += r;
    lo = e == 0 ? r : std::min(lo, r);
    hi = e == 0 ? r : std::max(hi, r);
  }
  std::printf("episodes,mean_reward,min_reward,max_reward\n");
  std::printf("%d,%.6f,%.6f,%.6f\n", kEvalEpisodes, total / kEvalEpisodes, lo,
              hi);
  return 0;
}

int cmd_inspect(const std::string& genome_path) {
  const nf::Genome genome = nf::load_genome(genome_path);
  std::printf("nodes: %zu\n", genome.nodes.size());
  std::printf("id,role\n");
  for (const nf::NodeGene& node : genome.nodes)
    std::printf("%d,%s\n", node.id, nf::role_name(node.role).c_str());

  std::printf("connections: %zu\n", genome.connections.size());
  std::printf("innovation,in,out,weight,enabled\n");
  for (const nf::ConnectionGene& c : genome.connections)
    std::printf("%d,%d,%d,%.17g,%s\n", c.innovation, c.in_node, c.out_node,
                c.weight, c.enabled ? "true" : "false");

  if (!genome.connections.empty())
    std::printf("innovation range: %d..%d\n",
                genome.connections.front().innovation,
                genome.connections.back().innovation);
  else
    std::printf("innovation range: none\n");
  return 0;
}

int cmd_oracle(const std::string& genome_path, const EnvFlags& flags) {
  auto [env, gamma] = resolve_env(flags);
  const Eigen::VectorXd v_star = nf::optimal_values(*env, gamma);

  if (genome_path.empty()) {
    std::printf("state,v_star\n");
    for (int s = 0; s < env->state_count(); ++s)
      std::printf("%d,%.12g\n", s, v_star[s]);
    return 0;
  }

  const nf::Genome genome = nf::load_genome(genome_path);
  nf::Network net = decode_for_env(genome, *env);
  std::printf("state,v_star,v_net,residual\n");
  for (int s = 0; s < env->state_count(); ++s) {
    double v_net = 0.0;   // terminal convention
    double residual = 0.0;
    if (!env->is_terminal(s)) {
      v_net = net.forward(env->features(s));
      const auto options = env->afterstates(s);
      const nf::Afterstate& choice = nf::greedy_choice(options, net, *env, gamma);
      const double v_next = env->is_terminal(choice.successor)
                                ? 0.0
                                : net.forward(env->features(choice.successor));
      const double delta = nf::td_error(choice.reward, v_next, v_net, gamma);
      residual = delta * delta;
    }
    std::printf("%d,%.12g,%.12g,%.12g\n", s, v_star[s], v_net, residual);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neuroforge: topology evolution with value-learning evaluation"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", genome_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  EnvFlags flags;

  CLI::App* evolve = app.add_subcommand("evolve", "run an evolution job");
  evolve->add_option("--config", config_path, "run configuration file");
  evolve->add_option("--seed", seed, "override [run] seed")
      ->each([&](const std::string&) { seed_given = true; });
  evolve->add_option("--out", out_dir, "output directory");

  CLI::App* eval = app.add_subcommand("eval", "greedy rollouts of a genome");
  eval->add_option("--genome", genome_path, "genome JSON")->required();
  eval->add_option("--config", flags.config_path, "run configuration file");
  eval->add_option("--env", flags.env_name, "environment name");
  eval->add_option("--length", flags.length, "chain length");
  eval->add_option("--gamma", flags.gamma, "discount factor");

  CLI::App* inspect = app.add_subcommand("inspect", "print a genome's tables");
  inspect->add_option("--genome", genome_path, "genome JSON")->required();

  CLI::App* oracle =
      app.add_subcommand("oracle", "optimal values and one-step errors");
  oracle->add_option("--genome", genome_path, "genome JSON");
  oracle->add_option("--config", flags.config_path, "run configuration file");
  oracle->add_option("--env", flags.env_name, "environment name");
  oracle->add_option("--length", flags.length, "chain length");
  oracle->add_option("--gamma", flags.gamma, "discount factor");

  CLI11_PARSE(app, argc, argv);

  try {
    if (evolve->parsed()) return cmd_evolve(config_path, seed_given, seed, out_dir);
    if (eval->parsed()) return cmd_eval(genome_path, flags);
    if (inspect->parsed()) return cmd_inspect(genome_path);
    if (oracle->parsed()) return cmd_oracle(genome_path, flags);
  } catch (const nf::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
