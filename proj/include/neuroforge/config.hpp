#ifndef NEUROFORGE_CONFIG_HPP
#define NEUROFORGE_CONFIG_HPP

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

#include "neuroforge/cma.hpp"
#include "neuroforge/environments.hpp"
#include "neuroforge/residual_td.hpp"
#include "neuroforge/variation.hpp"

namespace neuroforge {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Malformed line; the message carries file:line.
struct ParseError : ConfigError {
  using ConfigError::ConfigError;
};
// Well-formed line naming a section or key that does not exist.
struct UnknownKeyError : ConfigError {
  using ConfigError::ConfigError;
};
// Parsed value outside its invariant.
struct ValidationError : ConfigError {
  using ConfigError::ConfigError;
};

struct EnvConfig {
  std::string name = "chain";  // chain | xor | grid
  // chain
  int length = 5;
  int start = -1;  // -1 cycles episodes over the interior states
  // grid
  int width = 4;
  int height = 4;
  int start_x = 0;
  int start_y = 0;
  int goal_x = -1;  // -1 means the far corner
  int goal_y = -1;
};

struct RunConfig {
  MacroConfig macro;
  CmaBudget cma;  // rho and sigma knobs; tau_stop/f_stop are set per run
  TDConfig td;
  EnvConfig env;
  std::uint64_t seed = 0;
  int max_generations = 100;
  int stagnation_window = 10;  // consecutive flat generations before micro mode
  int threads = 1;
  bool cma_trace = false;  // per-iteration optimizer trace rows
};

// Sectioned key = value text ([macro] [cma] [td] [env] [run]); keys absent
// from the file keep their defaults; unknown sections or keys are hard
// errors. `origin` labels error messages (a path or "<string>").
RunConfig parse_config_text(const std::string& text, const std::string& origin);
RunConfig parse_config(const std::string& path);

// Full resolved configuration, every key explicit, in canonical order.
// Parsing the echo reproduces the same resolved configuration.
std::string echo_config(const RunConfig& cfg);

// Throws ValidationError on any out-of-range value. parse_config* call this.
void validate_config(const RunConfig& cfg);

std::unique_ptr<Environment> make_environment(const EnvConfig& cfg);

}  // namespace neuroforge

#endif
