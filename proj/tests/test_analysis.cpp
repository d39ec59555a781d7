#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "hhdr/analysis.hpp"
#include "hhdr/sequence.hpp"
#include "hhdr/spin_model.hpp"

using namespace hhdr;

namespace {

const Constants cst;

Spectrum double_gaussian_spectrum(double l1, double l2, double m1, double m2, double sg) {
  Spectrum spec;
  int nf = 301;
  spec.freq = Eigen::VectorXd::LinSpaced(nf, 0.0, 6e6);
  spec.df = spec.freq(1) - spec.freq(0);
  spec.n_time = 2 * (nf - 1);
  spec.amp.resize(nf);
  for (int i = 0; i < nf; ++i)
    spec.amp(i) = l1 * std::exp(-std::pow((spec.freq(i) - m1) / sg, 2)) +
                  l2 * std::exp(-std::pow((spec.freq(i) - m2) / sg, 2));
  return spec;
}

}  // namespace

TEST_CASE("dft bin layout and amplitudes") {
  int n = 256;
  double dt = 1e-6;
  double df0 = 1.0 / (n * dt);
  FIDTrace trace;
  trace.dt = dt;
  trace.s.resize(n);
  for (int i = 0; i < n; ++i) trace.s(i) = std::cos(2 * M_PI * 20 * df0 * i * dt);

  Spectrum spec = dft(trace, 1);
  CHECK(spec.df == doctest::Approx(df0).epsilon(1e-15));
  CHECK(spec.n_time == n);
  REQUIRE(spec.freq.size() == n / 2 + 1);
  CHECK(spec.freq(7) == doctest::Approx(7 * df0).epsilon(1e-15));

  int peak = 0;
  spec.amp.maxCoeff(&peak);
  CHECK(peak == 20);
  // an on-bin cosine concentrates n/2 in its line
  CHECK(spec.amp(20) == doctest::Approx(n / 2.0).epsilon(1e-9));
  CHECK(spec.amp(40) < 1e-9);

  // doubling the padding halves the bin spacing and keeps the line position
  Spectrum fine = dft(trace, 2);
  CHECK(fine.df == doctest::Approx(df0 / 2).epsilon(1e-15));
  int fine_peak = 0;
  fine.amp.maxCoeff(&fine_peak);
  CHECK(fine_peak == 40);
}

TEST_CASE("dft satisfies the discrete Parseval identity") {
  int n = 128;
  FIDTrace trace;
  trace.dt = 2e-7;
  trace.s.resize(n);
  for (int i = 0; i < n; ++i)
    trace.s(i) = std::sin(0.13 * i) + 0.4 * std::cos(0.41 * i + 0.7) + 0.02 * i;

  Spectrum spec = dft(trace, 1);
  double mean = trace.s.mean();
  double time_energy = (trace.s.array() - mean).square().sum();
  double freq_energy = spec.amp(0) * spec.amp(0) + spec.amp(n / 2) * spec.amp(n / 2);
  for (int k = 1; k < n / 2; ++k) freq_energy += 2.0 * spec.amp(k) * spec.amp(k);
  CHECK(freq_energy == doctest::Approx(n * time_energy).epsilon(1e-9));
}

TEST_CASE("dft input validation") {
  FIDTrace bad;
  bad.dt = 1e-6;
  bad.s.resize(1);
  CHECK_THROWS_AS(dft(bad, 1), std::invalid_argument);
  bad.s.resize(16);
  bad.dt = 0;
  CHECK_THROWS_AS(dft(bad, 1), std::invalid_argument);
  bad.dt = 1e-6;
  CHECK_THROWS_AS(dft(bad, 0), std::invalid_argument);
}

TEST_CASE("double gaussian fit recovers a noiseless model") {
  Spectrum spec = double_gaussian_spectrum(1.0, 0.7, 1.5e6, 4.5e6, 0.3e6);
  DoubleGaussianFit fit = fit_double_gaussian(spec);
  REQUIRE(fit.converged);
  REQUIRE(!fit.single_gaussian);
  CHECK(fit.lambda1 == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(fit.lambda2 == doctest::Approx(0.7).epsilon(1e-8));
  CHECK(fit.mu1 == doctest::Approx(1.5e6).epsilon(1e-10));
  CHECK(fit.mu2 == doctest::Approx(4.5e6).epsilon(1e-10));
  CHECK(fit.sigma == doctest::Approx(0.3e6).epsilon(1e-8));
  CHECK(fit.mu1 < fit.mu2);

  // conversion identities hold exactly, not approximately
  CHECK(fit.fwhm == fwhm_from_sigma(fit.sigma));
  CHECK(fit.t2star == t2star_from_fwhm(fit.fwhm));
  CHECK(fit.fwhm == 2.0 * fit.sigma * std::sqrt(std::log(2.0)));
  CHECK(fit.t2star * M_PI * fit.fwhm == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("double gaussian fit falls back to one line") {
  Spectrum spec = double_gaussian_spectrum(1.0, 0.0, 2.5e6, 0.0, 0.25e6);
  DoubleGaussianFit fit = fit_double_gaussian(spec);
  REQUIRE(fit.converged);
  CHECK(fit.single_gaussian);
  CHECK(fit.lambda2 == 0.0);
  CHECK(fit.lambda1 == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(fit.mu1 == doctest::Approx(2.5e6).epsilon(1e-9));
  CHECK(fit.sigma == doctest::Approx(0.25e6).epsilon(1e-8));
}

TEST_CASE("lorentzian profile fit") {
  int n = 41;
  double jt = 1.9e5, w0 = 5.52e6, amp = 0.5;
  Eigen::VectorXd om(n), val(n);
  for (int i = 0; i < n; ++i) {
    om(i) = w0 + jt * (-5.0 + 10.0 * i / (n - 1));
    val(i) = amp * jt * jt / (jt * jt + (om(i) - w0) * (om(i) - w0));
  }
  LorentzianFit fit = fit_lorentzian_profile(om, val);
  REQUIRE(fit.converged);
  CHECK(fit.amplitude == doctest::Approx(amp).epsilon(1e-9));
  CHECK(fit.j == doctest::Approx(jt).epsilon(1e-9));
  CHECK(fit.omega_opt == doctest::Approx(w0).epsilon(1e-12));
  CHECK(fit.fwhm == 2.0 * fit.j);

  Eigen::VectorXd three = om.head(3);
  CHECK_THROWS_AS(fit_lorentzian_profile(three, val.head(3)), std::invalid_argument);
}

TEST_CASE("temporal spectrum of the resonant lock oscillates at J") {
  SpinSystem sys;
  sys.b = Vec3(0, 0, 0.5375);
  double amag = 4.0 * 220e3 / cst.gamma_n, al = 56.0 * M_PI / 180.0;
  sys.hyperfine.push_back(amag * Vec3(std::sin(al), 0, std::cos(al)));
  HHPrediction p = flip_flop_rate(sys.b, sys.hyperfine[0], cst);

  int n_tau = 128;
  Eigen::VectorXd om(3), tau(n_tau);
  om << p.omega_opt - 8e5, p.omega_opt, p.omega_opt + 8e5;
  for (int j = 0; j < n_tau; ++j) tau(j) = j * 4.0 / p.j / n_tau;
  SpectroscopyMap map = simulate_map(sys, om, tau, {});
  FourierMap fm = fourier_map(map, sys, 4);

  CHECK(fm.bare_larmor == doctest::Approx(cst.gamma_n * 0.5375).epsilon(1e-15));
  REQUIRE(fm.amp.rows() == 3);
  int peak = 0;
  fm.amp.row(1).maxCoeff(&peak);
  CHECK(std::abs(fm.freq(peak) - p.j) <= 2.0 * fm.freq(1));

  // overlay holds the constant-|A| resonance curve; at the nucleus angle it
  // reproduces its matching point
  int at = 0;
  (fm.overlay_theta.array() - p.theta).abs().minCoeff(&at);
  CHECK(fm.overlay_omega_opt(at) == doctest::Approx(p.omega_opt).epsilon(1e-3));
  CHECK(fm.overlay_j(at) == doctest::Approx(p.j).epsilon(2e-2));

  SpectroscopyMap skew = map;
  skew.tau(1) *= 1.5;
  CHECK_THROWS_AS(fourier_map(skew, sys, 4), std::invalid_argument);
}
