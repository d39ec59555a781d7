#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "hhdr/spin_model.hpp"

// Exact pulse-sequence engine: dense state-vector evolution of the electron
// {|0>, |-1>} subspace coupled to n <= 12 spin-1/2 nuclei. Propagation is by
// Hermitian eigendecomposition per constant-Hamiltonian segment,
// U = V exp(-2 pi i L t) V^dag; pulses are square and their hyperfine
// evolution is included exactly.

namespace hhdr {

using Eigen::MatrixXcd;
using Eigen::Vector2cd;
using Eigen::VectorXcd;
using cplx = std::complex<double>;

struct SpinSystem {
  Vec3 b = Vec3::Zero();           // T, static field
  std::vector<Vec3> hyperfine;     // T, per-nucleus A_k
  Constants constants;
  std::optional<double> t1rho;     // s, optional lock-frame relaxation envelope

  int n_nuclei() const { return static_cast<int>(hyperfine.size()); }
  int dim() const { return 2 << n_nuclei(); }  // 2 * 2^n, capped at 8192
  void validate() const;                       // throws on dim > 8192
};

// One element of a pulse sequence. Drive with omega = 0 is free evolution.
struct PulseElement {
  enum class Kind { laser_init, drive, free_evolve, readout };
  Kind kind = Kind::free_evolve;
  double omega = 0;     // Hz, Rabi frequency (drive only)
  double phase = 0;     // rad, drive phase (0 = X, pi/2 = Y)
  double duration = 0;  // s (drive / free)
  bool is_lock = false;  // marks the spin-lock segment for readout bookkeeping
};

struct PulseSequence {
  std::vector<PulseElement> elements;
  void validate() const;  // exactly one trailing readout, laser_init before any drive
};

// Pure state over electron (x) nuclei; basis index bit layout: electron is the
// most significant bit (0 = |0>, 1 = |-1>), nucleus k the (n-1-k)-th bit.
struct QuantumState {
  VectorXcd amp;
  int n_nuclei() const;
};

struct ReadoutResult {
  double p0 = 0;               // population of electron |0>
  double contrast_scaled = 0;  // p0 through the host 15N population factor
  QuantumState final_state;
  double lock_omega = 0;       // parameters of the is_lock segment (fallback:
  double lock_phase = 0;       // the longest drive in the sequence)
  double lock_duration = 0;
};

// Rotating-frame Hamiltonian (Hz units) for one constant segment:
//   H = (omega/2)(cos phi s_x + sin phi s_y) (x) 1
//       + sum_k [ -gamma_n (B - A_k/2).I_k  -  s_z (x) gamma_n (c A_k).I_k ]
// so the electron |0> branch sees B - (1/2 - c) A_k and the |-1> branch
// B - (1/2 + c) A_k. The conditional coefficient is c = 1/4 while driven
// (dressed-frame exchange element J/2, which reproduces the closed-form
// transfer law) and c = 1/2 when undriven (branches B and B - A_k: the full
// secular splitting a_z between nuclear orientations in free precession).
MatrixXcd rotating_frame_hamiltonian(const SpinSystem& sys, double omega, double phase);

// Electron-|0> (x) product state over given per-nucleus spinors.
QuantumState make_state(const SpinSystem& sys, const std::vector<Vector2cd>& nuclear);

// Eigenstate of the free nuclear Hamiltonian -gamma_n B_eff.I for nucleus k.
// upper = true selects the higher-energy orientation (the transfer-active
// initial state of a '+' spin lock).
Vector2cd nuclear_eigenstate(const SpinSystem& sys, int k, bool upper);

// Apply a sequence to a state. laser_init projects the electron onto |0> and
// renormalizes; readout fills ReadoutResult (with the optional t1rho contrast
// envelope applied to p0 using the longest drive duration).
ReadoutResult evolve(const QuantumState& state, const PulseSequence& seq, const SpinSystem& sys);

// Spin-lock sequence: laser_init; pi/2 X pulse (duration 1/(4 omega));
// lock drive (omega, Y, tau); pi/2 X pulse; readout. sign = -1 initializes
// the opposite dressed state with 3pi/2 pulses (init and readout), keeping
// the readout convention p0 = transfer probability for both signs.
PulseSequence build_spin_lock(double omega, double tau, int sign);

// The +/- pair; the caller averages their readouts.
std::pair<PulseSequence, PulseSequence> build_alternating(double omega, double tau);

// Ramsey sequence: laser_init; pi/2; free(tau); pi/2 with the software
// detuning applied as a phase ramp (phase = 2 pi detuning tau); readout.
PulseSequence build_ramsey(double detuning, double tau, double omega_pulse = 2e7);

struct MapOptions {
  bool alternating = true;    // average the +/- pair
  bool host_factor = false;   // scale by the 15N population factor
  int threads = 1;
};

// p0 over an (omega, tau) grid for the unpolarized nuclear ensemble
// (uniform mixture over nuclear basis states). value(i, j) belongs to
// omega(i), tau(j). Cells are pure functions of their grid point; the result
// is bitwise independent of evaluation order and thread count.
struct SpectroscopyMap {
  Eigen::VectorXd omega;  // Hz
  Eigen::VectorXd tau;    // s
  Eigen::MatrixXd value;  // n_omega x n_tau
};
SpectroscopyMap simulate_map(const SpinSystem& sys, const Eigen::VectorXd& omega_grid,
                             const Eigen::VectorXd& tau_grid, const MapOptions& opt = {});

// Wootters concurrence of the reduced electron + nucleus-k pair.
double pair_concurrence(const QuantumState& state, int nucleus_index);

// Population outside the ideal two-state flip-flop manifold of nucleus 0
// (the dressed states of the recorded lock drive paired with the nuclear
// B_eff eigenstates), evaluated on the readout-time state.
double leakage(const ReadoutResult& result, const SpinSystem& sys);

}  // namespace hhdr
