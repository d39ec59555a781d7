#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hhdr/analysis.hpp"
#include "hhdr/spin_model.hpp"

// Many-spin 13C bath: seeded Monte-Carlo site occupation on the diamond
// lattice, kinetic (spin-temperature) polarization sweeps, and closed-form
// free-induction-decay synthesis. No internuclear flip-flops; the electron
// is perfectly re-initialized each sweep and carries at most one quantum.

namespace hhdr {

struct BathConfig {
  double abundance = 0.0111;      // 13C occupation probability per site
  double radius = 4e-9;           // m, enumeration sphere around the NV
  double min_distance = 2.5e-10;  // m, closest allowed site
  std::uint64_t seed = 1;
  std::optional<int> target_count;  // keep the N closest occupied sites
  Vec3 b = Vec3::Zero();          // T, static field
  Vec3 nv_axis = Vec3::UnitZ();   // quantization / secular axis
};

struct NuclearBath {
  std::vector<Vec3> positions;   // m
  std::vector<Vec3> hyperfine;   // T
  Eigen::VectorXd polarization;  // in [-1, 1]
  BathConfig config;
  Constants constants;

  int size() const { return static_cast<int>(positions.size()); }
};

NuclearBath generate_bath(const BathConfig& cfg, const Constants& c);

enum class Interleave { alternating, plus_first };

struct SweepSchedule {
  int n_plus = 0;
  int n_minus = 0;
  Interleave interleaving = Interleave::alternating;
  double omega = 0;  // Hz, lock Rabi frequency
  double tau = 0;    // s, lock duration per sweep
};

// Expanded sign order of a schedule (+1 / -1), minority signs spread evenly.
std::vector<int> sweep_signs(const SweepSchedule& s);

struct PolarizationRecord {
  std::vector<int> signs;              // per sweep
  std::vector<double> quanta;          // transferred quanta per sweep (<= 1)
  std::vector<Eigen::VectorXd> trail;  // polarization after each sweep
  Eigen::VectorXd final_polarization;
};

// Kinetic sweeps, mutating bath.polarization in place. Per sweep of sign s:
//   q_k = transfer_probability(tau, dW_k, J_k), n_k = (1 - s p_k)/2,
//   W = sum q_k n_k,  p_k += 2 s q_k n_k / max(1, W),  clamp to [-1, 1].
PolarizationRecord run_sweeps(NuclearBath& bath, const SweepSchedule& schedule);

struct FidGrid {
  double dt = 4e-8;  // s
  int count = 1024;
};

// Closed-form FID for the current bath polarization:
//   S(t) = Re[ e^{2 pi i det t} cos(pi host t)
//              prod_k ((1+p_k)/2 e^{+i pi a_z,k t} + (1-p_k)/2 e^{-i pi a_z,k t})
//              g(t) ],   a_z,k = gamma_n (A_k . nv_axis),
// with g(t) = exp(-(pi drift t)^2 / (4 ln 2)) a Gaussian whose spectral FWHM
// equals drift_broadening. S(0) = 1.
FIDTrace synthesize_fid(const NuclearBath& bath, double detuning, double drift_broadening,
                        const FidGrid& grid = {});
// Complex pre-Re signal; for a fully polarized, drift-free bath every nuclear
// factor is a pure phase, so |z(t)| = |cos(pi host t)|.
Eigen::VectorXcd synthesize_fid_complex(const NuclearBath& bath, double detuning,
                                        double drift_broadening, const FidGrid& grid = {});

struct BiasPoint {
  double bias = 0;         // (n+ - n-)/(n+ + n-)
  double t2star = 0;       // s
  double t2star_std = 0;
  double fwhm = 0;         // Hz
  double fwhm_std = 0;
  bool single_gaussian = false;
};

struct BiasScanConfig {
  int total_sweeps = 200;
  double detuning = 3e6;          // Hz, software offset of the FID
  double drift_broadening = 0;    // Hz
  FidGrid grid;
  int zero_pad = 4;
  int threads = 1;
};

// Re-runs the schedule from the given (unmutated) bath at each bias value,
// synthesizes the FID and extracts T2* from the double-Gaussian fit.
std::vector<BiasPoint> bias_scan(const NuclearBath& bath, const SweepSchedule& schedule,
                                 const std::vector<double>& bias_values,
                                 const BiasScanConfig& cfg);

}  // namespace hhdr
