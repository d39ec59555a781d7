#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hhdr/sequence.hpp"
#include "hhdr/spin_model.hpp"

using namespace hhdr;

namespace {

const Constants cst;

// single nucleus at the given reduced coupling and field angle
SpinSystem one_nucleus(double coupling, double alpha_deg) {
  SpinSystem sys;
  sys.b = Vec3(0, 0, 0.5375);
  double amag = 4.0 * coupling / cst.gamma_n;
  double al = alpha_deg * M_PI / 180.0;
  sys.hyperfine.push_back(amag * Vec3(std::sin(al), 0, std::cos(al)));
  return sys;
}

// transfer-active spin-lock trace at lock time tau
double lock_p0(const SpinSystem& sys, double omega, double tau, int sign) {
  QuantumState st = make_state(sys, {nuclear_eigenstate(sys, 0, sign > 0)});
  return evolve(st, build_spin_lock(omega, tau, sign), sys).p0;
}

}  // namespace

TEST_CASE("rotating-frame Hamiltonian spectra") {
  SpinSystem bare;
  bare.b = Vec3(0, 0, 0.5375);

  // electron alone: dressed splitting equals the Rabi frequency
  MatrixXcd h = rotating_frame_hamiltonian(bare, 2e6, 0.3);
  CHECK((h - h.adjoint()).norm() == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
  CHECK(es.eigenvalues()(0) == doctest::Approx(-1e6).epsilon(1e-12));
  CHECK(es.eigenvalues()(1) == doctest::Approx(1e6).epsilon(1e-12));

  // undriven nucleus: the |0> branch precesses at the bare Larmor frequency
  // and the |-1> branch at gamma_n |B - A|
  SpinSystem sys = one_nucleus(220e3, 56.0);
  MatrixXcd hf = rotating_frame_hamiltonian(sys, 0.0, 0.0);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> ef(hf);
  double f0 = cst.gamma_n * sys.b.norm();
  double f1 = cst.gamma_n * (sys.b - sys.hyperfine[0]).norm();
  Eigen::Vector4d want((Eigen::Vector4d() << -f1 / 2, -f0 / 2, f0 / 2, f1 / 2).finished());
  std::sort(want.data(), want.data() + 4);
  for (int i = 0; i < 4; ++i)
    CHECK(ef.eigenvalues()(i) == doctest::Approx(want(i)).epsilon(1e-10));
}

TEST_CASE("matched drive opens the flip-flop gap") {
  SpinSystem sys = one_nucleus(220e3, 56.0);
  HHPrediction p = flip_flop_rate(sys.b, sys.hyperfine[0], cst);
  MatrixXcd h = rotating_frame_hamiltonian(sys, p.omega_opt, M_PI / 2);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
  // the matched pair in the middle of the spectrum is split by J, up to
  // counter-rotating corrections of relative order (J/omega)^2
  CHECK(es.eigenvalues()(2) - es.eigenvalues()(1) == doctest::Approx(p.j).epsilon(1e-4));
}

TEST_CASE("nuclear eigenstates order by energy") {
  SpinSystem sys = one_nucleus(220e3, 56.0);
  Vector2cd up = nuclear_eigenstate(sys, 0, true);
  Vector2cd dn = nuclear_eigenstate(sys, 0, false);
  CHECK(std::abs(up.dot(up.conjugate()).real() - 1.0) < 1e-12);
  CHECK(std::abs(up.conjugate().dot(dn)) < 1e-12);

  Vec3 f = -cst.gamma_n * b_effective(sys.b, sys.hyperfine[0]);
  Eigen::Matrix2cd hn;
  hn << 0.5 * f.z(), 0.5 * (f.x() - cplx(0, 1) * f.y()),
      0.5 * (f.x() + cplx(0, 1) * f.y()), -0.5 * f.z();
  double e_up = (up.adjoint() * hn * up)(0).real();
  double e_dn = (dn.adjoint() * hn * dn)(0).real();
  CHECK(e_up > e_dn);
  CHECK_THROWS_AS(nuclear_eigenstate(sys, 1, true), std::invalid_argument);
}

TEST_CASE("evolution conserves the norm") {
  SpinSystem sys = one_nucleus(220e3, 56.0);
  HHPrediction p = flip_flop_rate(sys.b, sys.hyperfine[0], cst);
  QuantumState st = make_state(sys, {nuclear_eigenstate(sys, 0, true)});
  ReadoutResult r = evolve(st, build_spin_lock(p.omega_opt, 2.0 / p.j, +1), sys);
  CHECK(std::abs(r.final_state.amp.norm() - 1.0) < 1e-10);
  CHECK(r.lock_omega == p.omega_opt);
  CHECK(r.lock_duration == 2.0 / p.j);
  CHECK(r.lock_phase == doctest::Approx(M_PI / 2));
}

TEST_CASE("spin-lock trace follows the dressed transfer law") {
  // omega/J = 50; the finite pulse edges shift the effective lock time by
  // one pulse duration
  SpinSystem sys = one_nucleus(115e3, 90.0);
  HHPrediction p = flip_flop_rate(sys.b, sys.hyperfine[0], cst);
  REQUIRE(p.omega_opt / p.j > 45.0);
  double tol = 5.0 * std::pow(p.j / p.omega_opt, 2);
  double shift = 0.25 / p.omega_opt;
  for (int i = 0; i <= 60; ++i) {
    double tau = 2.0 / p.j * i / 60.0;
    double expect = transfer_probability(tau + shift, 0.0, p.j);
    CHECK(std::abs(lock_p0(sys, p.omega_opt, tau, +1) - expect) <= tol);
  }
  // near-complete swap at half the exchange period for both lock signs
  CHECK(lock_p0(sys, p.omega_opt, 0.5 / p.j, +1) > 0.95);
  CHECK(lock_p0(sys, p.omega_opt, 0.5 / p.j, -1) > 0.95);
  CHECK(lock_p0(sys, p.omega_opt, 0.0, +1) < 5e-4);
}

TEST_CASE("map equals the averaged pulse-level evolution") {
  SpinSystem sys = one_nucleus(220e3, 56.0);
  HHPrediction p = flip_flop_rate(sys.b, sys.hyperfine[0], cst);
  Eigen::VectorXd om(3), tau(4);
  om << p.omega_opt - 2e5, p.omega_opt, p.omega_opt + 3e5;
  tau << 0.4e-6, 1.0e-6, 1.9e-6, 2.6e-6;
  SpectroscopyMap map = simulate_map(sys, om, tau, {});

  for (int i = 0; i < om.size(); ++i) {
    for (int j = 0; j < tau.size(); ++j) {
      double acc = 0;
      for (bool upper : {true, false}) {
        QuantumState st = make_state(sys, {nuclear_eigenstate(sys, 0, upper)});
        acc += evolve(st, build_spin_lock(om(i), tau(j), +1), sys).p0;
        acc += evolve(st, build_spin_lock(om(i), tau(j), -1), sys).p0;
      }
      CHECK(map.value(i, j) == doctest::Approx(acc / 4.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("map is independent of the thread count") {
  SpinSystem sys = one_nucleus(220e3, 56.0);
  Eigen::VectorXd om = Eigen::VectorXd::LinSpaced(7, 5.4e6, 6.1e6);
  Eigen::VectorXd tau = Eigen::VectorXd::LinSpaced(5, 1e-6, 9e-6);
  MapOptions serial, parallel;
  serial.threads = 1;
  parallel.threads = 4;
  SpectroscopyMap a = simulate_map(sys, om, tau, serial);
  SpectroscopyMap b = simulate_map(sys, om, tau, parallel);
  CHECK((a.value.array() == b.value.array()).all());
}

TEST_CASE("contrast scalings") {
  SpinSystem sys = one_nucleus(220e3, 56.0);
  HHPrediction p = flip_flop_rate(sys.b, sys.hyperfine[0], cst);
  Eigen::VectorXd om(1), tau(2);
  om << p.omega_opt;
  tau << 1e-6, 2.5e-6;

  SpectroscopyMap plain = simulate_map(sys, om, tau, {});
  MapOptions with_host;
  with_host.host_factor = true;
  SpectroscopyMap scaled = simulate_map(sys, om, tau, with_host);
  for (int j = 0; j < tau.size(); ++j)
    CHECK(scaled.value(0, j) ==
          doctest::Approx(cst.host_n_population * plain.value(0, j)).epsilon(1e-14));

  SpinSystem damped = sys;
  damped.t1rho = 2e-4;
  SpectroscopyMap dm = simulate_map(damped, om, tau, {});
  for (int j = 0; j < tau.size(); ++j)
    CHECK(dm.value(0, j) ==
          doctest::Approx(std::exp(-tau(j) / 2e-4) * plain.value(0, j)).epsilon(1e-12));
}

TEST_CASE("ramsey fringes at the software detuning") {
  SpinSystem bare;
  bare.b = Vec3(0, 0, 0.5375);
  double det = 2e6;
  for (double tau : {0.0, 0.1e-6, 0.25e-6, 0.4e-6, 0.75e-6}) {
    QuantumState st = make_state(bare, {});
    double p0 = evolve(st, build_ramsey(det, tau), bare).p0;
    CHECK(p0 == doctest::Approx(std::pow(std::sin(M_PI * det * tau), 2)).epsilon(1e-9));
  }
}

TEST_CASE("resonant lock entangles the pair") {
  SpinSystem sys = one_nucleus(115e3, 90.0);
  HHPrediction p = flip_flop_rate(sys.b, sys.hyperfine[0], cst);
  QuantumState st = make_state(sys, {nuclear_eigenstate(sys, 0, true)});
  ReadoutResult half = evolve(st, build_spin_lock(p.omega_opt, 0.25 / p.j, +1), sys);
  CHECK(pair_concurrence(half.final_state, 0) > 0.9);
  // product state carries no entanglement
  CHECK(pair_concurrence(st, 0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
}

TEST_CASE("leakage stays at the counter-rotating scale") {
  auto max_leak = [&](double ratio_scale) {
    SpinSystem s2 = one_nucleus(115e3 * ratio_scale, 90.0);
    HHPrediction q = flip_flop_rate(s2.b, s2.hyperfine[0], cst);
    double worst = 0;
    for (int i = 1; i <= 12; ++i) {
      double tau = 0.5 / q.j * i / 12.0;
      PulseSequence lock_only;
      lock_only.elements = build_spin_lock(q.omega_opt, tau, +1).elements;
      // drop the readout pulse: the manifold is defined at lock end
      lock_only.elements.erase(lock_only.elements.end() - 2);
      QuantumState st = make_state(s2, {nuclear_eigenstate(s2, 0, true)});
      worst = std::max(worst, leakage(evolve(st, lock_only, s2), s2));
    }
    return worst;
  };
  double leak_50 = max_leak(1.0);
  double leak_25 = max_leak(2.0);
  CHECK(leak_50 > 0.0);
  CHECK(leak_50 < 5e-3);
  CHECK(leak_25 > leak_50);  // weaker suppression at smaller omega/J
}

TEST_CASE("input validation") {
  SpinSystem sys;
  sys.b = Vec3(0, 0, 0.5375);
  for (int i = 0; i < 13; ++i) sys.hyperfine.push_back(Vec3(1e-4, 0, 1e-4));
  CHECK_THROWS_AS(sys.validate(), std::invalid_argument);

  PulseSequence no_readout;
  no_readout.elements.push_back({PulseElement::Kind::laser_init, 0, 0, 0, false});
  CHECK_THROWS_AS(no_readout.validate(), std::invalid_argument);

  PulseSequence undriven;
  undriven.elements.push_back({PulseElement::Kind::drive, 1e6, 0, 1e-6, false});
  undriven.elements.push_back({PulseElement::Kind::readout, 0, 0, 0, false});
  CHECK_THROWS_AS(undriven.validate(), std::invalid_argument);

  CHECK_THROWS_AS(build_spin_lock(-1.0, 1e-6, +1), std::invalid_argument);
  CHECK_THROWS_AS(build_spin_lock(1e6, -1e-6, +1), std::invalid_argument);
}
