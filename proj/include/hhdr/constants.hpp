#pragma once

// Physical constants and material parameters for the NV--13C double-resonance
// model. Frequency convention: every stored frequency is a *linear* frequency
// in Hz (gyromagnetic ratios in Hz/T); factors of 2*pi appear only inside
// propagator phases and trigonometric arguments.

namespace hhdr {

namespace si {
inline constexpr double h_planck = 6.626'070'15e-34;  // J s (exact, SI 2019)
inline constexpr double mu0_over_4pi = 1e-7;          // T m A^-1
}  // namespace si

struct Constants {
  double gamma_e = 2.8024e10;        // Hz/T, NV electron spin
  double gamma_n = 1.07084e7;        // Hz/T, 13C nuclear spin
  double lattice_const = 3.567e-10;  // m, diamond conventional cubic cell
  double host_n_splitting = 3.03e6;  // Hz, host 15N hyperfine splitting
  double host_n_population = 0.45;   // time-averaged population of the driven 15N projection
};

}  // namespace hhdr
