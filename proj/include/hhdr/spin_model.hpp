#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hhdr/constants.hpp"

// Closed-form Hartmann-Hahn model for one NV electron spin dressed by a
// resonant drive and coupled to a 13C nucleus. Hyperfine vectors are stored
// in Tesla (conditional field at the nucleus per unit electron spin
// projection), so gamma_n * |A| is a linear frequency.

namespace hhdr {

using Vec3 = Eigen::Vector3d;

// Point-dipole hyperfine field at a nuclear site, in Tesla.
//   A(r) = (mu0/4pi) * h * gamma_e / r^3 * (3 rhat (zhat.rhat) - zhat)
// with zhat the NV axis. h*gamma_e equals the electron moment g*mu_B.
Vec3 dipolar_hyperfine(const Vec3& pos, const Vec3& nv_axis, const Constants& c);

// Effective field seen by the nucleus averaged over the driven electron:
// B_eff = B - A/2.
inline Vec3 b_effective(const Vec3& b, const Vec3& a) { return b - 0.5 * a; }

// Hartmann-Hahn detuning dW = W - gamma_n |B_eff| (Hz).
double hh_detuning(double omega, const Vec3& b, const Vec3& a, const Constants& c);

// Matching condition and flip-flop rate for one nucleus.
struct HHPrediction {
  double omega_opt = 0;  // Hz, gamma_n |B_eff|
  double j = 0;          // Hz, (1/4) gamma_n |A| sin(theta)
  double theta = 0;      // rad, angle between B_eff and A
  Vec3 b_eff = Vec3::Zero();
};
HHPrediction flip_flop_rate(const Vec3& b, const Vec3& a, const Constants& c);

// Dressed-state transfer probability at lock duration tau (s) and detuning
// delta_omega (Hz): p = J^2/(J^2+dW^2) * sin^2(pi sqrt(J^2+dW^2) tau).
// Full swap at tau = 1/(2J) on resonance, period 1/sqrt(J^2+dW^2).
double transfer_probability(double tau, double delta_omega, double j);

// Inversion of the matching condition and flip-flop rate for the hyperfine
// magnitude and orientation, given the measured (omega_opt, J) pair and the
// applied field magnitude. Damped 2D Newton with finite-difference Jacobian,
// multi-start over 8 seeded initial angles.
struct InversionBranch {
  double a_mag = 0;     // T
  double alpha = 0;     // rad, angle between B and A
  double theta = 0;     // rad, angle between B_eff and A
  double coupling = 0;  // Hz, (1/4) gamma_n |A|
  double j = 0;         // Hz, forward-model check
  double omega_opt = 0; // Hz, forward-model check
};
struct InversionResult {
  std::vector<InversionBranch> branches;  // deduplicated, sorted by |A|
  int primary = 0;  // branch with theta <= pi/2 when one exists, else smallest |A|
};
InversionResult invert_spectroscopy(double omega_opt_meas, double j_meas,
                                    double b_mag, const Constants& c);

}  // namespace hhdr
