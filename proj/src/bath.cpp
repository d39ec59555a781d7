#include "hhdr/bath.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <tuple>

#include "hhdr/threads.hpp"

namespace hhdr {

namespace {

using cplx = std::complex<double>;

// mt19937_64 draw -> uniform double in [0, 1); fixed 53-bit mapping so the
// stream is identical across standard libraries.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

NuclearBath generate_bath(const BathConfig& cfg, const Constants& c) {
  if (cfg.abundance < 0 || cfg.abundance > 1)
    throw std::invalid_argument("generate_bath: abundance outside [0, 1]");
  if (cfg.radius <= 0) throw std::invalid_argument("generate_bath: radius must be positive");
  if (cfg.min_distance < 0) throw std::invalid_argument("generate_bath: negative min_distance");
  if (cfg.nv_axis.norm() <= 0) throw std::invalid_argument("generate_bath: zero nv_axis");

  double a0 = c.lattice_const;
  // conventional diamond cell: FCC translations + two-atom basis
  const double fcc[4][3] = {{0, 0, 0}, {0, 0.5, 0.5}, {0.5, 0, 0.5}, {0.5, 0.5, 0}};
  const double basis[2][3] = {{0, 0, 0}, {0.25, 0.25, 0.25}};

  int m = static_cast<int>(std::ceil(cfg.radius / a0)) + 1;
  std::mt19937_64 rng(cfg.seed);
  std::vector<Vec3> occupied;
  for (int ix = -m; ix <= m; ++ix)
    for (int iy = -m; iy <= m; ++iy)
      for (int iz = -m; iz <= m; ++iz)
        for (int f = 0; f < 4; ++f)
          for (int s = 0; s < 2; ++s) {
            Vec3 r = a0 * Vec3(ix + fcc[f][0] + basis[s][0], iy + fcc[f][1] + basis[s][1],
                               iz + fcc[f][2] + basis[s][2]);
            double d = r.norm();
            if (d > cfg.radius || d < cfg.min_distance) continue;
            if (uniform01(rng) < cfg.abundance) occupied.push_back(r);
          }

  std::sort(occupied.begin(), occupied.end(), [](const Vec3& p, const Vec3& q) {
    return std::make_tuple(p.squaredNorm(), p.x(), p.y(), p.z()) <
           std::make_tuple(q.squaredNorm(), q.x(), q.y(), q.z());
  });
  if (cfg.target_count && static_cast<int>(occupied.size()) > *cfg.target_count)
    occupied.resize(*cfg.target_count);

  NuclearBath bath;
  bath.config = cfg;
  bath.constants = c;
  bath.positions = std::move(occupied);
  bath.hyperfine.reserve(bath.positions.size());
  for (const Vec3& r : bath.positions)
    bath.hyperfine.push_back(dipolar_hyperfine(r, cfg.nv_axis.normalized(), c));
  bath.polarization = Eigen::VectorXd::Zero(bath.size());
  return bath;
}

std::vector<int> sweep_signs(const SweepSchedule& s) {
  if (s.n_plus < 0 || s.n_minus < 0)
    throw std::invalid_argument("sweep_signs: negative sweep count");
  long long np = s.n_plus, nm = s.n_minus, total = np + nm;
  std::vector<int> signs;
  signs.reserve(total);
  if (s.interleaving == Interleave::plus_first) {
    signs.insert(signs.end(), np, +1);
    signs.insert(signs.end(), nm, -1);
    return signs;
  }
  // even Bresenham spread of the minority sign through the majority
  long long minority = std::min(np, nm);
  int msign = np >= nm ? -1 : +1;  // the scarcer sign
  for (long long i = 0; i < total; ++i) {
    bool place = ((i + 1) * minority) / total > (i * minority) / total;
    signs.push_back(place ? msign : -msign);
  }
  return signs;
}

PolarizationRecord run_sweeps(NuclearBath& bath, const SweepSchedule& schedule) {
  if (schedule.omega <= 0 && schedule.n_plus + schedule.n_minus > 0)
    throw std::invalid_argument("run_sweeps: lock Rabi frequency must be positive");
  if (schedule.tau < 0) throw std::invalid_argument("run_sweeps: negative lock duration");

  int n = bath.size();
  Eigen::VectorXd q(n);
  for (int k = 0; k < n; ++k) {
    auto pred = flip_flop_rate(bath.config.b, bath.hyperfine[k], bath.constants);
    double dw = hh_detuning(schedule.omega, bath.config.b, bath.hyperfine[k], bath.constants);
    q(k) = transfer_probability(schedule.tau, dw, pred.j);
  }

  PolarizationRecord rec;
  rec.signs = sweep_signs(schedule);
  rec.quanta.reserve(rec.signs.size());
  rec.trail.reserve(rec.signs.size());
  for (int s : rec.signs) {
    double w = 0;
    for (int k = 0; k < n; ++k) w += q(k) * 0.5 * (1.0 - s * bath.polarization(k));
    double budget = std::max(1.0, w);
    for (int k = 0; k < n; ++k) {
      double nk = 0.5 * (1.0 - s * bath.polarization(k));
      bath.polarization(k) =
          std::clamp(bath.polarization(k) + 2.0 * s * q(k) * nk / budget, -1.0, 1.0);
    }
    rec.quanta.push_back(w / budget);
    rec.trail.push_back(bath.polarization);
  }
  rec.final_polarization = bath.polarization;
  return rec;
}

Eigen::VectorXcd synthesize_fid_complex(const NuclearBath& bath, double detuning,
                                        double drift_broadening, const FidGrid& grid) {
  if (grid.dt <= 0 || grid.count <= 0)
    throw std::invalid_argument("synthesize_fid: bad sample grid");
  if (drift_broadening < 0)
    throw std::invalid_argument("synthesize_fid: negative drift broadening");

  int n = bath.size();
  Vec3 axis = bath.config.nv_axis.normalized();
  Eigen::VectorXd az(n);
  for (int k = 0; k < n; ++k)
    az(k) = bath.constants.gamma_n * bath.hyperfine[k].dot(axis);

  const cplx I(0, 1);
  Eigen::VectorXcd out(grid.count);
  double g_coef = std::pow(M_PI * drift_broadening, 2) / (4.0 * std::log(2.0));
  for (int i = 0; i < grid.count; ++i) {
    double t = grid.dt * i;
    cplx v = std::exp(2.0 * M_PI * I * detuning * t) *
             std::cos(M_PI * bath.constants.host_n_splitting * t) * std::exp(-g_coef * t * t);
    for (int k = 0; k < n; ++k) {
      double up = 0.5 * (1.0 + bath.polarization(k));
      v *= up * std::exp(I * M_PI * az(k) * t) + (1.0 - up) * std::exp(-I * M_PI * az(k) * t);
    }
    out(i) = v;
  }
  return out;
}

FIDTrace synthesize_fid(const NuclearBath& bath, double detuning, double drift_broadening,
                        const FidGrid& grid) {
  FIDTrace trace;
  trace.dt = grid.dt;
  trace.s = synthesize_fid_complex(bath, detuning, drift_broadening, grid).real();
  return trace;
}

std::vector<BiasPoint> bias_scan(const NuclearBath& bath, const SweepSchedule& schedule,
                                 const std::vector<double>& bias_values,
                                 const BiasScanConfig& cfg) {
  if (cfg.total_sweeps < 0) throw std::invalid_argument("bias_scan: negative sweep total");
  std::vector<BiasPoint> out(bias_values.size());
  parallel_for(static_cast<int>(bias_values.size()), cfg.threads, [&](int i) {
    double bias = bias_values[i];
    if (bias < -1 || bias > 1) throw std::invalid_argument("bias_scan: bias outside [-1, 1]");
    SweepSchedule sched = schedule;
    sched.n_plus = static_cast<int>(std::llround(cfg.total_sweeps * 0.5 * (1.0 + bias)));
    sched.n_minus = cfg.total_sweeps - sched.n_plus;
    NuclearBath work = bath;
    run_sweeps(work, sched);
    Spectrum spec = dft(synthesize_fid(work, cfg.detuning, cfg.drift_broadening, cfg.grid),
                        cfg.zero_pad);
    DoubleGaussianFit fit = fit_double_gaussian(spec);
    out[i] = {bias, fit.t2star, fit.t2star_std, fit.fwhm, fit.fwhm_std, fit.single_gaussian};
  });
  return out;
}

}  // namespace hhdr
