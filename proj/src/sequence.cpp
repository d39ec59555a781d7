#include "hhdr/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hhdr/errors.hpp"
#include "hhdr/threads.hpp"

namespace hhdr {

namespace {

constexpr double two_pi = 2.0 * M_PI;

// Conditional hyperfine coefficient: the dressed-frame exchange convention
// (element J/2) while the drive is on, the full secular splitting when free.
double conditional_coeff(double omega) { return omega > 0 ? 0.25 : 0.5; }

// Basis bookkeeping: index = e * 2^n + nuclear bits, electron bit 0 = |0>,
// nucleus k occupies bit (n-1-k), bit value 0 = up (+1/2 along z).
inline int nucleus_bit(int n, int k) { return n - 1 - k; }

}  // namespace

void SpinSystem::validate() const {
  if (dim() > 8192)
    throw std::invalid_argument("SpinSystem: dimension 2*2^n exceeds 8192 (n > 12)");
  if (b.norm() <= 0) throw std::invalid_argument("SpinSystem: static field must be non-zero");
}

void PulseSequence::validate() const {
  if (elements.empty() || elements.back().kind != PulseElement::Kind::readout)
    throw std::invalid_argument("PulseSequence: must end with exactly one readout");
  bool init_seen = false;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const auto& el = elements[i];
    if (el.kind == PulseElement::Kind::readout && i + 1 != elements.size())
      throw std::invalid_argument("PulseSequence: readout before the end");
    if (el.kind == PulseElement::Kind::laser_init) init_seen = true;
    if (el.kind == PulseElement::Kind::drive && !init_seen)
      throw std::invalid_argument("PulseSequence: drive before laser_init");
    if (el.duration < 0) throw std::invalid_argument("PulseSequence: negative duration");
  }
}

int QuantumState::n_nuclei() const {
  int d = static_cast<int>(amp.size());
  int n = 0;
  while ((2 << n) < d) ++n;
  return n;
}

MatrixXcd rotating_frame_hamiltonian(const SpinSystem& sys, double omega, double phase) {
  sys.validate();
  int n = sys.n_nuclei();
  int d = sys.dim();
  int half = d / 2;
  MatrixXcd h = MatrixXcd::Zero(d, d);

  // drive: (omega/2) e^{-i phi} |0><-1| + h.c., acting on the electron bit
  if (omega != 0) {
    cplx g = 0.5 * omega * std::exp(cplx(0, -phase));
    for (int j = 0; j < half; ++j) {
      h(j, j + half) += g;
      h(j + half, j) += std::conj(g);
    }
  }

  double cc = conditional_coeff(omega);
  for (int k = 0; k < n; ++k) {
    const Vec3& a = sys.hyperfine[k];
    Vec3 u = -sys.constants.gamma_n * (sys.b - 0.5 * a);  // mean Zeeman coefficient
    Vec3 v = -cc * sys.constants.gamma_n * a;             // sigma_z-conditional part
    int bit = nucleus_bit(n, k);
    for (int i = 0; i < d; ++i) {
      double se = (i < half) ? 1.0 : -1.0;  // electron sigma_z
      Vec3 w = u + se * v;
      double m = ((i >> bit) & 1) ? -0.5 : 0.5;  // I_z eigenvalue
      h(i, i) += w.z() * m;
      int flip = i ^ (1 << bit);
      // <flip| w.I |i>: (wx + i wy)/2 when flipping up->down, conjugate otherwise
      cplx off = ((i >> bit) & 1) ? cplx(w.x(), -w.y()) * 0.5 : cplx(w.x(), w.y()) * 0.5;
      h(flip, i) += off;
    }
  }
  return h;
}

QuantumState make_state(const SpinSystem& sys, const std::vector<Vector2cd>& nuclear) {
  int n = sys.n_nuclei();
  if (static_cast<int>(nuclear.size()) != n)
    throw std::invalid_argument("make_state: need one spinor per nucleus");
  int d = sys.dim();
  QuantumState st;
  st.amp = VectorXcd::Zero(d);
  int half = d / 2;
  for (int j = 0; j < half; ++j) {
    cplx a = 1.0;
    for (int k = 0; k < n; ++k) a *= nuclear[k]((j >> nucleus_bit(n, k)) & 1);
    st.amp(j) = a;  // electron |0>
  }
  double nrm = st.amp.norm();
  if (nrm <= 0) throw std::invalid_argument("make_state: zero-norm nuclear spinor");
  st.amp /= nrm;
  return st;
}

Vector2cd nuclear_eigenstate(const SpinSystem& sys, int k, bool upper) {
  if (k < 0 || k >= sys.n_nuclei()) throw std::invalid_argument("nuclear_eigenstate: bad index");
  Vec3 u = -sys.constants.gamma_n * (sys.b - 0.5 * sys.hyperfine[k]);
  Eigen::Matrix2cd h2;
  h2 << 0.5 * u.z(), 0.5 * cplx(u.x(), -u.y()), 0.5 * cplx(u.x(), u.y()), -0.5 * u.z();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(h2);
  return es.eigenvectors().col(upper ? 1 : 0);
}

namespace {

// U = V exp(-2 pi i L t) V^dag applied to the state.
void apply_segment(VectorXcd& amp, const MatrixXcd& h, double t) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
  if (es.info() != Eigen::Success)
    throw NumericalError("evolve: eigendecomposition failed");
  VectorXcd coef = es.eigenvectors().adjoint() * amp;
  for (int m = 0; m < coef.size(); ++m)
    coef(m) *= std::exp(cplx(0, -two_pi * es.eigenvalues()(m) * t));
  amp = es.eigenvectors() * coef;
}

}  // namespace

ReadoutResult evolve(const QuantumState& state, const PulseSequence& seq, const SpinSystem& sys) {
  sys.validate();
  seq.validate();
  if (state.amp.size() != sys.dim())
    throw std::invalid_argument("evolve: state dimension does not match the system");

  VectorXcd amp = state.amp;
  int half = sys.dim() / 2;
  ReadoutResult out;
  bool lock_tagged = false;

  for (const auto& el : seq.elements) {
    switch (el.kind) {
      case PulseElement::Kind::laser_init: {
        amp.tail(half).setZero();
        double nrm = amp.norm();
        if (nrm < 1e-12)
          throw NumericalError("evolve: laser_init on a state with no |0> support");
        amp /= nrm;
        break;
      }
      case PulseElement::Kind::drive:
      case PulseElement::Kind::free_evolve: {
        double omega = el.kind == PulseElement::Kind::drive ? el.omega : 0.0;
        if (el.duration > 0)
          apply_segment(amp, rotating_frame_hamiltonian(sys, omega, el.phase), el.duration);
        if (el.kind == PulseElement::Kind::drive &&
            (el.is_lock || (!lock_tagged && el.duration > out.lock_duration))) {
          out.lock_duration = el.duration;
          out.lock_omega = el.omega;
          out.lock_phase = el.phase;
          lock_tagged = lock_tagged || el.is_lock;
        }
        break;
      }
      case PulseElement::Kind::readout: {
        double nrm = amp.norm();
        if (std::abs(nrm - 1.0) > 1e-9)
          throw NumericalError("evolve: norm drifted beyond 1e-9");
        out.p0 = amp.head(half).squaredNorm();
        if (sys.t1rho) out.p0 *= std::exp(-out.lock_duration / *sys.t1rho);
        out.contrast_scaled = sys.constants.host_n_population * out.p0;
        out.final_state.amp = amp;
        break;
      }
    }
  }
  return out;
}

PulseSequence build_spin_lock(double omega, double tau, int sign) {
  if (omega <= 0) throw std::invalid_argument("build_spin_lock: omega must be positive");
  if (tau < 0) throw std::invalid_argument("build_spin_lock: negative lock duration");
  if (sign != 1 && sign != -1) throw std::invalid_argument("build_spin_lock: sign must be +-1");
  // sign = -1 initializes the opposite dressed state with 3pi/2 init and
  // readout pulses, so p0 reads the transfer probability for both signs.
  double pulse = (sign > 0 ? 1.0 : 3.0) / (4.0 * omega);
  PulseSequence s;
  s.elements = {
      {PulseElement::Kind::laser_init, 0, 0, 0, false},
      {PulseElement::Kind::drive, omega, 0, pulse, false},
      {PulseElement::Kind::drive, omega, M_PI / 2, tau, true},
      {PulseElement::Kind::drive, omega, 0, pulse, false},
      {PulseElement::Kind::readout, 0, 0, 0, false},
  };
  return s;
}

std::pair<PulseSequence, PulseSequence> build_alternating(double omega, double tau) {
  return {build_spin_lock(omega, tau, +1), build_spin_lock(omega, tau, -1)};
}

PulseSequence build_ramsey(double detuning, double tau, double omega_pulse) {
  if (omega_pulse <= 0) throw std::invalid_argument("build_ramsey: pulse Rabi must be positive");
  if (tau < 0) throw std::invalid_argument("build_ramsey: negative free evolution");
  double pulse = 1.0 / (4.0 * omega_pulse);
  PulseSequence s;
  s.elements = {
      {PulseElement::Kind::laser_init, 0, 0, 0},
      {PulseElement::Kind::drive, omega_pulse, 0, pulse},
      {PulseElement::Kind::free_evolve, 0, 0, tau},
      {PulseElement::Kind::drive, omega_pulse, two_pi * detuning * tau, pulse},
      {PulseElement::Kind::readout, 0, 0, 0},
  };
  return s;
}

namespace {

// Unitary of one constant segment.
MatrixXcd segment_unitary(const SpinSystem& sys, double omega, double phase, double t) {
  MatrixXcd h = rotating_frame_hamiltonian(sys, omega, phase);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("simulate_map: eigensolver failed");
  VectorXcd ph(h.rows());
  for (int m = 0; m < ph.size(); ++m)
    ph(m) = std::exp(cplx(0, -two_pi * es.eigenvalues()(m) * t));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

// For the uniform nuclear mixture, p0(tau) = ||P U(tau) P||_F^2 / 2^n with
// P the electron-|0> projector and U = P2 Lock(tau) P1. With the lock
// eigenbasis Lock(tau) = V E(tau) V^dag this is a quadratic form in the
// phase vector: p0 = e^dag(tau) C e(tau) / 2^n,
// C = (B B^dag) o (A^dag A)^T elementwise, A = P P2 V, B = V^dag P1 P.
struct ColumnKernel {
  VectorXcd lam;   // lock eigenvalues (Hz)
  MatrixXcd c;     // Hermitian quadratic-form kernel
};

ColumnKernel make_kernel(const SpinSystem& sys, const PulseSequence& seq) {
  int half = sys.dim() / 2;
  // expect: laser_init, pulse, lock, pulse, readout
  const auto& p1 = seq.elements[1];
  const auto& lock = seq.elements[2];
  const auto& p2 = seq.elements[3];
  MatrixXcd u1 = segment_unitary(sys, p1.omega, p1.phase, p1.duration);
  MatrixXcd u2 = segment_unitary(sys, p2.omega, p2.phase, p2.duration);
  MatrixXcd hl = rotating_frame_hamiltonian(sys, lock.omega, lock.phase);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hl);
  if (es.info() != Eigen::Success) throw NumericalError("simulate_map: eigensolver failed");
  const MatrixXcd& v = es.eigenvectors();
  MatrixXcd a = u2.topRows(half) * v;              // P P2 V (rows of the |0> block)
  MatrixXcd b = v.adjoint() * u1.leftCols(half);   // V^dag P1 P
  ColumnKernel k;
  k.lam = es.eigenvalues().cast<cplx>();
  k.c = (b * b.adjoint()).cwiseProduct((a.adjoint() * a).transpose());
  return k;
}

double kernel_eval(const ColumnKernel& k, double tau, int n) {
  VectorXcd e(k.lam.size());
  for (int m = 0; m < e.size(); ++m)
    e(m) = std::exp(cplx(0, -two_pi * k.lam(m).real() * tau));
  cplx val = e.transpose() * (k.c * e.conjugate());
  return val.real() / static_cast<double>(1 << n);
}

}  // namespace

SpectroscopyMap simulate_map(const SpinSystem& sys, const Eigen::VectorXd& omega_grid,
                             const Eigen::VectorXd& tau_grid, const MapOptions& opt) {
  sys.validate();
  if (omega_grid.size() == 0 || tau_grid.size() == 0)
    throw std::invalid_argument("simulate_map: empty grid");
  SpectroscopyMap map;
  map.omega = omega_grid;
  map.tau = tau_grid;
  map.value.resize(omega_grid.size(), tau_grid.size());
  int n = sys.n_nuclei();
  double host = opt.host_factor ? sys.constants.host_n_population : 1.0;

  parallel_for(static_cast<int>(omega_grid.size()), opt.threads, [&](int i) {
    double omega = omega_grid(i);
    auto [plus, minus] = build_alternating(omega, 1.0);  // lock tau enters via the kernel phases
    ColumnKernel kp = make_kernel(sys, plus);
    ColumnKernel km;
    if (opt.alternating) km = make_kernel(sys, minus);
    for (int j = 0; j < tau_grid.size(); ++j) {
      double p0 = kernel_eval(kp, tau_grid(j), n);
      if (opt.alternating) p0 = 0.5 * (p0 + kernel_eval(km, tau_grid(j), n));
      if (sys.t1rho) p0 *= std::exp(-tau_grid(j) / *sys.t1rho);
      map.value(i, j) = host * p0;
    }
  });
  return map;
}

double pair_concurrence(const QuantumState& state, int nucleus_index) {
  int n = state.n_nuclei();
  if (nucleus_index < 0 || nucleus_index >= n)
    throw std::invalid_argument("pair_concurrence: bad nucleus index");
  int d = static_cast<int>(state.amp.size());
  int bit = nucleus_bit(n, nucleus_index);
  int ebit = n;

  // reduced density matrix of (electron, nucleus k) in the 2x2 joint basis
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  for (int i = 0; i < d; ++i) {
    int ei = (i >> ebit) & 1, mi = (i >> bit) & 1;
    int rest_i = i & ~((1 << ebit) | (1 << bit));
    for (int j = 0; j < d; ++j) {
      if ((j & ~((1 << ebit) | (1 << bit))) != rest_i) continue;
      int ej = (j >> ebit) & 1, mj = (j >> bit) & 1;
      rho(2 * ei + mi, 2 * ej + mj) += state.amp(i) * std::conj(state.amp(j));
    }
  }

  // Wootters concurrence
  Eigen::Matrix4cd sy2 = Eigen::Matrix4cd::Zero();
  // sigma_y (x) sigma_y in the same ordering
  const cplx I(0, 1);
  Eigen::Matrix2cd sy;
  sy << 0, -I, I, 0;
  for (int r = 0; r < 4; ++r)
    for (int cidx = 0; cidx < 4; ++cidx)
      sy2(r, cidx) = sy(r / 2, cidx / 2) * sy(r % 2, cidx % 2);
  Eigen::Matrix4cd rt = rho * sy2 * rho.conjugate() * sy2;
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(rt);
  Eigen::Vector4d lam;
  for (int m = 0; m < 4; ++m) lam(m) = std::sqrt(std::max(0.0, es.eigenvalues()(m).real()));
  std::sort(lam.data(), lam.data() + 4, std::greater<double>());
  return std::max(0.0, lam(0) - lam(1) - lam(2) - lam(3));
}

double leakage(const ReadoutResult& result, const SpinSystem& sys) {
  if (sys.n_nuclei() < 1) throw std::invalid_argument("leakage: needs at least one nucleus");
  int n = sys.n_nuclei();
  int d = sys.dim();
  if (result.final_state.amp.size() != d)
    throw std::invalid_argument("leakage: state dimension mismatch");

  // dressed electron states of the recorded lock drive
  cplx ph = std::exp(cplx(0, result.lock_phase));
  Vector2cd plus(1.0 / std::sqrt(2.0), ph / std::sqrt(2.0));
  Vector2cd minus(1.0 / std::sqrt(2.0), -ph / std::sqrt(2.0));
  Vector2cd up = nuclear_eigenstate(sys, 0, true);     // higher-energy orientation
  Vector2cd down = nuclear_eigenstate(sys, 0, false);

  // ideal two-state manifold: |-, up> and |+, down> (degenerate at matching)
  int bit = nucleus_bit(n, 0);
  int rest_mask = (d - 1) & ~((1 << n) | (1 << bit));
  double inside = 0;
  for (int rest = 0; rest < d; ++rest) {
    if ((rest & ~rest_mask) != 0) continue;
    cplx amp_minus_up = 0, amp_plus_down = 0;
    for (int e = 0; e < 2; ++e)
      for (int m = 0; m < 2; ++m) {
        int idx = rest | (e << n) | (m << bit);
        const cplx& psi = result.final_state.amp(idx);
        amp_minus_up += std::conj(minus(e) * up(m)) * psi;
        amp_plus_down += std::conj(plus(e) * down(m)) * psi;
      }
    inside += std::norm(amp_minus_up) + std::norm(amp_plus_down);
  }
  return std::max(0.0, 1.0 - inside);
}

}  // namespace hhdr
