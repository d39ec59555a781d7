#include <doctest.h>

#include <cmath>
#include <complex>
#include <stdexcept>

#include "hhdr/analysis.hpp"
#include "hhdr/bath.hpp"
#include "hhdr/spin_model.hpp"

using namespace hhdr;

namespace {

const Constants cst;

BathConfig base_config(std::uint64_t seed) {
  BathConfig bc;
  bc.seed = seed;
  bc.b = Vec3(0, 0, 0.5375);
  return bc;
}

// hand-built bath with explicit hyperfine vectors
NuclearBath manual_bath(const std::vector<Vec3>& hyperfine) {
  NuclearBath bath;
  bath.config = base_config(1);
  bath.constants = cst;
  for (const Vec3& a : hyperfine) {
    bath.positions.push_back(Vec3(0, 0, 1e-9));
    bath.hyperfine.push_back(a);
  }
  bath.polarization = Eigen::VectorXd::Zero(hyperfine.size());
  return bath;
}

}  // namespace

TEST_CASE("seeded lattice occupation is reproducible") {
  NuclearBath a = generate_bath(base_config(7), cst);
  NuclearBath b = generate_bath(base_config(7), cst);
  REQUIRE(a.size() == b.size());
  for (int i = 0; i < a.size(); ++i) {
    CHECK(a.positions[i] == b.positions[i]);
    CHECK(a.hyperfine[i] == b.hyperfine[i]);
  }
  NuclearBath c = generate_bath(base_config(8), cst);
  bool differs = a.size() != c.size();
  for (int i = 0; !differs && i < a.size(); ++i) differs = a.positions[i] != c.positions[i];
  CHECK(differs);
}

TEST_CASE("occupation statistics and geometry") {
  BathConfig bc = base_config(3);
  NuclearBath bath = generate_bath(bc, cst);
  // 1.11% of the ~4.7e4 candidate sites inside a 4 nm sphere
  CHECK(bath.size() > 450);
  CHECK(bath.size() < 650);
  CHECK(bath.polarization.size() == bath.size());
  CHECK(bath.polarization.norm() == 0.0);

  double prev = 0;
  for (int i = 0; i < bath.size(); ++i) {
    double r = bath.positions[i].norm();
    CHECK(r >= bc.min_distance);
    CHECK(r <= bc.radius);
    CHECK(r >= prev);  // sorted by distance
    prev = r;
    // stored couplings come from the point-dipole field at the site
    Vec3 want = dipolar_hyperfine(bath.positions[i], bc.nv_axis, cst);
    CHECK(bath.hyperfine[i] == want);
  }
}

TEST_CASE("target count keeps the closest sites") {
  BathConfig full = base_config(5);
  BathConfig cut = base_config(5);
  cut.target_count = 200;
  NuclearBath all = generate_bath(full, cst);
  NuclearBath few = generate_bath(cut, cst);
  REQUIRE(few.size() == 200);
  for (int i = 0; i < few.size(); ++i) CHECK(few.positions[i] == all.positions[i]);
}

TEST_CASE("bath configuration validation") {
  BathConfig bad = base_config(1);
  bad.abundance = 1.5;
  CHECK_THROWS_AS(generate_bath(bad, cst), std::invalid_argument);
  bad = base_config(1);
  bad.radius = 0;
  CHECK_THROWS_AS(generate_bath(bad, cst), std::invalid_argument);
  bad = base_config(1);
  bad.min_distance = -1e-10;
  CHECK_THROWS_AS(generate_bath(bad, cst), std::invalid_argument);
  bad = base_config(1);
  bad.nv_axis = Vec3::Zero();
  CHECK_THROWS_AS(generate_bath(bad, cst), std::invalid_argument);
}

TEST_CASE("sweep sign interleaving") {
  SweepSchedule s;
  s.omega = 1e6;
  s.tau = 1e-6;

  s.n_plus = 2;
  s.n_minus = 2;
  CHECK(sweep_signs(s) == std::vector<int>{1, -1, 1, -1});

  s.n_plus = 3;
  s.n_minus = 1;
  CHECK(sweep_signs(s) == std::vector<int>{1, 1, 1, -1});

  s.n_plus = 1;
  s.n_minus = 3;
  CHECK(sweep_signs(s) == std::vector<int>{-1, -1, -1, 1});

  s.n_plus = 2;
  s.n_minus = 2;
  s.interleaving = Interleave::plus_first;
  CHECK(sweep_signs(s) == std::vector<int>{1, 1, -1, -1});

  s.n_plus = 0;
  s.n_minus = 0;
  CHECK(sweep_signs(s).empty());
}

TEST_CASE("kinetic sweeps transfer single quanta") {
  Vec3 a(2e-3, 0, 1e-3);
  NuclearBath bath = manual_bath({a});
  HHPrediction p = flip_flop_rate(bath.config.b, a, cst);

  SweepSchedule sch;
  sch.omega = p.omega_opt - 0.75 * p.j;  // slightly off resonance so q < 1
  sch.tau = 0.4 / p.j;
  double q = transfer_probability(sch.tau, hh_detuning(sch.omega, bath.config.b, a, cst), p.j);
  REQUIRE(q > 0.1);
  REQUIRE(q < 1.0);

  sch.n_plus = 1;
  PolarizationRecord rec = run_sweeps(bath, sch);
  // unpolarized spin: n = 1/2, W = q/2 < 1, so p gains exactly q
  CHECK(bath.polarization(0) == doctest::Approx(q).epsilon(1e-14));
  CHECK(rec.quanta[0] == doctest::Approx(0.5 * q).epsilon(1e-14));
  CHECK(rec.signs == std::vector<int>{1});
  CHECK(rec.final_polarization == bath.polarization);

  // a following '-' sweep acts on occupation (1+q)/2 and leaves p = -q^2
  NuclearBath pair = manual_bath({a});
  sch.n_plus = 1;
  sch.n_minus = 1;
  run_sweeps(pair, sch);
  CHECK(pair.polarization(0) == doctest::Approx(-q * q).epsilon(1e-12));
}

TEST_CASE("transfer budget saturates at one quantum per sweep") {
  Vec3 a(2e-3, 0, 1e-3);
  NuclearBath bath = manual_bath({a, a, a, a});
  HHPrediction p = flip_flop_rate(bath.config.b, a, cst);
  SweepSchedule sch;
  sch.omega = p.omega_opt;
  sch.tau = 0.5 / p.j;  // q = 1 for every spin
  sch.n_plus = 1;
  PolarizationRecord rec = run_sweeps(bath, sch);
  // W = 4 * 1/2 = 2 > 1: the shared budget caps the sweep at one quantum,
  // split evenly (1/4 quantum each), so each p_k rises by 2 * 1/4 = 1/2
  CHECK(rec.quanta[0] == 1.0);
  for (int k = 0; k < 4; ++k) CHECK(bath.polarization(k) == doctest::Approx(0.5).epsilon(1e-14));

  // repeated pumping converges to full polarization and stays clamped
  sch.n_plus = 60;
  run_sweeps(bath, sch);
  for (int k = 0; k < 4; ++k) {
    CHECK(bath.polarization(k) <= 1.0);
    CHECK(bath.polarization(k) > 0.999);
  }
}

TEST_CASE("fid synthesis closed form") {
  Vec3 a1(1e-4, 0, 6e-5), a2(-3e-5, 2e-5, 9e-5);
  NuclearBath bath = manual_bath({a1, a2});
  double az1 = cst.gamma_n * a1.z(), az2 = cst.gamma_n * a2.z();
  double det = 3e6;

  FidGrid grid;
  grid.count = 256;
  FIDTrace trace = synthesize_fid(bath, det, 0.0, grid);
  REQUIRE(trace.s.size() == 256);
  CHECK(trace.dt == grid.dt);
  CHECK(trace.s(0) == 1.0);
  for (int i = 0; i < 256; ++i) {
    double t = i * grid.dt;
    double want = std::cos(2 * M_PI * det * t) * std::cos(M_PI * cst.host_n_splitting * t) *
                  std::cos(M_PI * az1 * t) * std::cos(M_PI * az2 * t);
    CHECK(trace.s(i) == doctest::Approx(want).scale(1.0).epsilon(1e-12));
  }
}

TEST_CASE("polarized fid modulus reduces to the host cosine") {
  Vec3 a1(1e-4, 0, 6e-5), a2(-3e-5, 2e-5, 9e-5);
  NuclearBath bath = manual_bath({a1, a2});
  bath.polarization << 1.0, 1.0;
  // full polarization turns every nuclear factor into a pure phase
  Eigen::VectorXcd z = synthesize_fid_complex(bath, 3e6, 0.0, {});
  for (int i = 0; i < z.size(); ++i) {
    double host = std::abs(std::cos(M_PI * cst.host_n_splitting * i * FidGrid{}.dt));
    CHECK(std::abs(std::abs(z(i)) - host) < 1e-12);
  }

  // the drift envelope divides out as the documented Gaussian
  double drift = 2e5;
  Eigen::VectorXcd zd = synthesize_fid_complex(bath, 3e6, drift, {});
  double coef = std::pow(M_PI * drift, 2) / (4.0 * std::log(2.0));
  for (int i : {3, 17, 101, 400}) {
    double t = i * FidGrid{}.dt;
    CHECK(std::abs(zd(i) / z(i)) == doctest::Approx(std::exp(-coef * t * t)).epsilon(1e-12));
  }
}

TEST_CASE("fully polarized line sits at the shifted frequency") {
  // p = +1 turns the nuclear factor into exp(+i pi a_z t): a clean doublet at
  // det + a_z/2 +- host/2 after the host modulation
  double az = 8e5;
  NuclearBath bath = manual_bath({Vec3(0, 0, az / cst.gamma_n)});
  bath.polarization << 1.0;
  Spectrum spec = dft(synthesize_fid(bath, 3e6, 0.0, {}), 4);
  DoubleGaussianFit fit = fit_double_gaussian(spec);
  REQUIRE(fit.converged);
  REQUIRE(!fit.single_gaussian);
  double center = 3e6 + az / 2;
  CHECK(fit.mu1 == doctest::Approx(center - cst.host_n_splitting / 2).epsilon(2e-3));
  CHECK(fit.mu2 == doctest::Approx(center + cst.host_n_splitting / 2).epsilon(2e-3));
}

TEST_CASE("bias scan endpoints and symmetry") {
  BathConfig bc = base_config(21);
  bc.target_count = 400;
  NuclearBath bath = generate_bath(bc, cst);
  int kt = 0;
  double best = 0;
  for (int k = 0; k < bath.size(); ++k) {
    HHPrediction p = flip_flop_rate(bc.b, bath.hyperfine[k], cst);
    double az = std::abs(cst.gamma_n * bath.hyperfine[k].dot(Vec3::UnitZ()));
    double score = az * std::sin(p.theta) * std::sin(p.theta);
    if (score > best) {
      best = score;
      kt = k;
    }
  }
  HHPrediction pt = flip_flop_rate(bc.b, bath.hyperfine[kt], cst);
  SweepSchedule sch;
  sch.omega = pt.omega_opt;
  sch.tau = 0.5 / pt.j;
  BiasScanConfig bsc;
  bsc.total_sweeps = 100;
  std::vector<BiasPoint> pts = bias_scan(bath, sch, {-0.6, 0.0, 0.6}, bsc);
  REQUIRE(pts.size() == 3);
  for (const BiasPoint& p : pts) {
    CHECK(p.t2star > 0.0);
    CHECK(p.fwhm > 0.0);
  }
  // mirrored sweep signs give the mirrored spectrum: same width up to binning
  CHECK(pts[0].t2star == doctest::Approx(pts[2].t2star).epsilon(0.05));
  // the scan never mutates its input bath
  CHECK(bath.polarization.norm() == 0.0);
}

TEST_CASE("sweep and fid input validation") {
  NuclearBath bath = manual_bath({Vec3(1e-4, 0, 1e-4)});
  SweepSchedule sch;
  sch.n_plus = 1;
  sch.omega = 0;
  sch.tau = 1e-6;
  CHECK_THROWS_AS(run_sweeps(bath, sch), std::invalid_argument);
  sch.omega = 1e6;
  sch.tau = -1e-6;
  CHECK_THROWS_AS(run_sweeps(bath, sch), std::invalid_argument);

  FidGrid bad;
  bad.count = 0;
  CHECK_THROWS_AS(synthesize_fid(bath, 0.0, 0.0, bad), std::invalid_argument);
  CHECK_THROWS_AS(synthesize_fid(bath, 0.0, -1.0, {}), std::invalid_argument);
}
