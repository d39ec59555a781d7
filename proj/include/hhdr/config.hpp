#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hhdr/errors.hpp"
#include "hhdr/spin_model.hpp"

// Sectioned key-value experiment configuration. Every physical value carries
// an explicit unit suffix ("0.5375 T", "5.88 MHz", "25 us"); dimensionless
// values (counts, seeds, axis components) carry none. Unknown sections or
// keys are rejected with the offending line.

namespace hhdr {

// An explicit engine nucleus: either a (coupling, angle) pair, with
// coupling = (1/4) gamma_n |A| and angle measured from B, or a lattice
// position fed through the point-dipole formula.
struct NucleusSpec {
  bool by_position = false;
  double coupling = 0;  // Hz
  double alpha = 0;     // rad
  Vec3 position = Vec3::Zero();  // m
};

struct ExperimentConfig {
  // [field]
  double b_mag = 0.5375;          // T
  Vec3 nv_axis = Vec3::UnitZ();   // normalized

  // [drive]
  std::optional<double> omega;        // Hz, single operating point
  std::optional<double> omega_start;  // Hz, map grid
  std::optional<double> omega_stop;
  std::optional<int> omega_count;
  double phase = M_PI / 2;            // rad, lock phase

  // [sequence]
  std::string type = "alternating";   // alternating | spin-lock | ramsey
  std::optional<double> tau;          // s, single lock duration
  std::optional<double> tau_start;    // s, map grid
  std::optional<double> tau_stop;
  std::optional<int> tau_count;
  int n_plus = 0;
  int n_minus = 0;
  std::string interleave = "alternating";  // alternating | plus-first
  std::vector<int> snapshots;         // sweep checkpoints for polarize

  // [bath]
  bool bath_enabled = false;
  double abundance = 0.0111;
  double radius = 4e-9;               // m
  double min_distance = 2.5e-10;      // m
  std::uint64_t seed = 1;
  std::optional<int> target_count;
  int engine_max = 0;                 // strongest bath spins promoted to the engine
  std::vector<NucleusSpec> nuclei;    // explicit engine nuclei

  // [analysis]
  int zero_pad = 4;
  double detuning = 3e6;              // Hz
  double drift_broadening = 0;        // Hz
  double fid_dt = 4e-8;               // s
  int fid_count = 1024;
  std::vector<double> bias_values;
  std::optional<double> interrogation_time;  // s
  std::optional<double> omega_opt_meas;      // Hz, invert input
  std::optional<double> j_meas;              // Hz, invert input

  // [output]
  std::string basename = "run";

  Constants constants;
  std::string raw;  // verbatim config text, echoed into the manifest
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// "value unit" parser for one quantity of the given dimension; used for CLI
// flags like --t1rho "500 us".
enum class Dimension { tesla, frequency, time, length, angle, none };
double parse_quantity(const std::string& text, Dimension dim);

}  // namespace hhdr
