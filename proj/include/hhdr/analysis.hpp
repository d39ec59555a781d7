#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <vector>

#include "hhdr/constants.hpp"

namespace hhdr {

// Forward declarations to keep analysis independent of the engine headers.
struct SpectroscopyMap;
struct SpinSystem;

struct FIDTrace {
  Eigen::VectorXd s;  // uniformly sampled real signal
  double dt = 0;      // s
};

// Magnitude half-spectrum of a mean-subtracted, zero-padded trace.
// freq(i) = i / (pad * n * dt); Parseval-consistent with the source trace.
struct Spectrum {
  Eigen::VectorXd freq;  // Hz, non-negative bins
  Eigen::VectorXd amp;   // |DFT|
  double df = 0;         // Hz, bin spacing
  int n_time = 0;        // padded length
};
Spectrum dft(const FIDTrace& trace, int zero_pad = 1);

// Shared-width double Gaussian
//   Y(f) = L1 exp(-((f-mu1)/sigma)^2) + L2 exp(-((f-mu2)/sigma)^2)
// fitted by damped Gauss-Newton with the analytic Jacobian. Falls back to a
// single Gaussian (L2 = 0) when the spectrum has no resolvable second peak.
struct DoubleGaussianFit {
  double lambda1 = 0, lambda2 = 0;
  double mu1 = 0, mu2 = 0;  // Hz
  double sigma = 0;         // Hz
  std::array<double, 5> param_std{};  // residual-scaled, same order as above
  double fwhm = 0;          // 2 sigma sqrt(ln 2)
  double fwhm_std = 0;
  double t2star = 0;        // 2 / (pi fwhm)
  double t2star_std = 0;
  bool single_gaussian = false;
  bool converged = false;
  int iterations = 0;
};
DoubleGaussianFit fit_double_gaussian(const Spectrum& spec);

// Lorentzian resonance profile A J^2 / (J^2 + (W - W_opt)^2); envelope FWHM 2J.
struct LorentzianFit {
  double amplitude = 0;
  double j = 0;          // Hz
  double omega_opt = 0;  // Hz
  std::array<double, 3> param_std{};
  double fwhm = 0;       // 2 j
  bool converged = false;
  int iterations = 0;
};
LorentzianFit fit_lorentzian_profile(const Eigen::VectorXd& omega, const Eigen::VectorXd& value);

// Per-omega temporal spectrum of a spectroscopy map, with model overlays: the
// (omega_opt(theta), J(theta)) curve at constant hyperfine magnitude and the
// bare nuclear Larmor line.
struct FourierMap {
  Eigen::VectorXd omega;      // Hz, map axis
  Eigen::VectorXd freq;       // Hz, temporal frequency axis
  Eigen::MatrixXd amp;        // n_omega x n_freq
  Eigen::VectorXd overlay_theta;      // rad
  Eigen::VectorXd overlay_omega_opt;  // Hz
  Eigen::VectorXd overlay_j;          // Hz
  double bare_larmor = 0;             // Hz, gamma_n |B|
};
FourierMap fourier_map(const SpectroscopyMap& map, const SpinSystem& sys, int zero_pad = 4);

// Conversion identities.
inline double fwhm_from_sigma(double sigma) { return 2.0 * sigma * std::sqrt(std::log(2.0)); }
inline double t2star_from_fwhm(double fwhm) { return 2.0 / (M_PI * fwhm); }

}  // namespace hhdr
