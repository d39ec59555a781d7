#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "hhdr/bath.hpp"
#include "hhdr/config.hpp"
#include "hhdr/sequence.hpp"

// Subcommand pipelines shared by the CLI front end and the tests. Each
// builds its inputs from the config, runs the pipeline, and writes the
// output tables plus a JSON manifest into the output directory. Errors are
// reported by throwing ConfigError / NumericalError.

namespace hhdr {

struct RunOptions {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;   // overrides [bath] seed
  int threads = 0;                     // 0: HHDR_THREADS or 1
  bool contrast_factor = false;        // apply the 0.45 host scaling
  std::optional<double> t1rho;         // s
};

void cmd_spectroscopy(const ExperimentConfig& cfg, const RunOptions& opt);
void cmd_fourier_map(const ExperimentConfig& cfg, const RunOptions& opt);
void cmd_invert(const ExperimentConfig& cfg, const RunOptions& opt);
void cmd_polarize(const ExperimentConfig& cfg, const RunOptions& opt);
void cmd_bias_scan(const ExperimentConfig& cfg, const RunOptions& opt);
void cmd_sensitivity(const ExperimentConfig& cfg, const RunOptions& opt);

// Shared helpers, also used by tests.
SpinSystem spin_system_from_config(const ExperimentConfig& cfg, const RunOptions& opt);
BathConfig bath_config_from(const ExperimentConfig& cfg, const RunOptions& opt);

}  // namespace hhdr
