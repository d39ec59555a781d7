#include "hhdr/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "hhdr/analysis.hpp"
#include "hhdr/bath.hpp"
#include "hhdr/io.hpp"
#include "hhdr/sequence.hpp"
#include "hhdr/threads.hpp"

namespace hhdr {

namespace {

using clock_type = std::chrono::steady_clock;

double wall_ms_since(clock_type::time_point t0) {
  return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

// writes one output file and records it in the manifest list
void emit(const std::string& out_dir, const std::string& name, const std::string& content,
          std::vector<ManifestEntry>& outputs) {
  std::filesystem::create_directories(out_dir);
  write_text(out_dir + "/" + name, content);
  outputs.push_back({name, digest_hex(content), content.size()});
}

void emit_manifest(const ExperimentConfig& cfg, const RunOptions& opt, const std::string& command,
                   const std::vector<ManifestEntry>& outputs, clock_type::time_point t0) {
  std::uint64_t seed = opt.seed.value_or(cfg.seed);
  std::string m = render_manifest(command, seed, cfg.raw, outputs, wall_ms_since(t0));
  write_text(opt.out_dir + "/" + cfg.basename + "_manifest.json", m);
}

Eigen::VectorXd linspace(double a, double b, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

Eigen::VectorXd omega_grid_from(const ExperimentConfig& cfg) {
  if (cfg.omega_start && cfg.omega_stop && cfg.omega_count)
    return linspace(*cfg.omega_start, *cfg.omega_stop, *cfg.omega_count);
  if (cfg.omega) return Eigen::VectorXd::Constant(1, *cfg.omega);
  throw ConfigError("config: [drive] needs omega or omega_start/omega_stop/omega_count");
}

Eigen::VectorXd tau_grid_from(const ExperimentConfig& cfg) {
  if (cfg.tau_start && cfg.tau_stop && cfg.tau_count)
    return linspace(*cfg.tau_start, *cfg.tau_stop, *cfg.tau_count);
  if (cfg.tau) return Eigen::VectorXd::Constant(1, *cfg.tau);
  throw ConfigError("config: [sequence] needs tau or tau_start/tau_stop/tau_count");
}

SweepSchedule schedule_from(const ExperimentConfig& cfg) {
  SweepSchedule s;
  s.n_plus = cfg.n_plus;
  s.n_minus = cfg.n_minus;
  s.interleaving =
      cfg.interleave == "plus-first" ? Interleave::plus_first : Interleave::alternating;
  if (!cfg.omega) throw ConfigError("config: [drive] omega is required for sweeps");
  if (!cfg.tau) throw ConfigError("config: [sequence] tau is required for sweeps");
  s.omega = *cfg.omega;
  s.tau = *cfg.tau;
  return s;
}

FidGrid fid_grid_from(const ExperimentConfig& cfg) { return {cfg.fid_dt, cfg.fid_count}; }

// map simulation shared by spectroscopy and fourier-map
SpectroscopyMap run_map(const ExperimentConfig& cfg, const RunOptions& opt,
                        const SpinSystem& sys) {
  if (cfg.type == "ramsey")
    throw ConfigError("config: sequence type 'ramsey' has no (omega, tau) map");
  MapOptions mo;
  mo.alternating = cfg.type == "alternating";
  mo.host_factor = opt.contrast_factor;
  mo.threads = resolve_threads(opt.threads);
  return simulate_map(sys, omega_grid_from(cfg), tau_grid_from(cfg), mo);
}

}  // namespace

BathConfig bath_config_from(const ExperimentConfig& cfg, const RunOptions& opt) {
  BathConfig bc;
  bc.abundance = cfg.abundance;
  bc.radius = cfg.radius;
  bc.min_distance = cfg.min_distance;
  bc.seed = opt.seed.value_or(cfg.seed);
  bc.target_count = cfg.target_count;
  bc.b = cfg.b_mag * cfg.nv_axis;
  bc.nv_axis = cfg.nv_axis;
  return bc;
}

SpinSystem spin_system_from_config(const ExperimentConfig& cfg, const RunOptions& opt) {
  SpinSystem sys;
  sys.b = cfg.b_mag * cfg.nv_axis;
  sys.constants = cfg.constants;
  sys.t1rho = opt.t1rho;

  Vec3 bhat = cfg.nv_axis;
  Vec3 perp = bhat.cross(std::abs(bhat.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX()).normalized();
  for (const NucleusSpec& spec : cfg.nuclei) {
    if (spec.by_position) {
      sys.hyperfine.push_back(dipolar_hyperfine(spec.position, bhat, cfg.constants));
    } else {
      double a_mag = 4.0 * spec.coupling / cfg.constants.gamma_n;
      sys.hyperfine.push_back(
          a_mag * (std::cos(spec.alpha) * bhat + std::sin(spec.alpha) * perp));
    }
  }

  if (cfg.bath_enabled && cfg.engine_max > 0) {
    NuclearBath bath = generate_bath(bath_config_from(cfg, opt), cfg.constants);
    std::vector<int> order(bath.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return bath.hyperfine[a].norm() > bath.hyperfine[b].norm();
    });
    int take = std::min<int>(cfg.engine_max, bath.size());
    for (int i = 0; i < take; ++i) sys.hyperfine.push_back(bath.hyperfine[order[i]]);
  }

  if (sys.n_nuclei() > 12)
    throw ConfigError("config: exact engine supports at most 12 nuclei (got " +
                      std::to_string(sys.n_nuclei()) + ")");
  return sys;
}

void cmd_spectroscopy(const ExperimentConfig& cfg, const RunOptions& opt) {
  auto t0 = clock_type::now();
  SpinSystem sys = spin_system_from_config(cfg, opt);
  SpectroscopyMap map = run_map(cfg, opt, sys);
  std::vector<ManifestEntry> outputs;
  emit(opt.out_dir, cfg.basename + "_map.tsv", render_map(map), outputs);
  emit_manifest(cfg, opt, "spectroscopy", outputs, t0);
}

void cmd_fourier_map(const ExperimentConfig& cfg, const RunOptions& opt) {
  auto t0 = clock_type::now();
  SpinSystem sys = spin_system_from_config(cfg, opt);
  SpectroscopyMap map = run_map(cfg, opt, sys);
  FourierMap fm = fourier_map(map, sys, cfg.zero_pad);

  std::ostringstream body;
  body << "# fourier map: rows = omega [Hz], columns = temporal frequency [Hz]\n";
  body << "# bare_larmor\t" << format_g17(fm.bare_larmor) << '\n';
  body << "# omega";
  for (int i = 0; i < fm.omega.size(); ++i) body << '\t' << format_g17(fm.omega(i));
  body << "\n# freq";
  for (int j = 0; j < fm.freq.size(); ++j) body << '\t' << format_g17(fm.freq(j));
  body << '\n';
  for (int i = 0; i < fm.amp.rows(); ++i) {
    for (int j = 0; j < fm.amp.cols(); ++j) {
      if (j) body << '\t';
      body << format_g17(fm.amp(i, j));
    }
    body << '\n';
  }

  Table overlay;
  overlay.header = {"overlay: constant |A| resonance curve", "config " + digest_hex(cfg.raw)};
  overlay.columns = {"theta_rad", "omega_opt_Hz", "j_Hz"};
  for (int i = 0; i < fm.overlay_theta.size(); ++i)
    overlay.rows.push_back({fm.overlay_theta(i), fm.overlay_omega_opt(i), fm.overlay_j(i)});

  std::vector<ManifestEntry> outputs;
  emit(opt.out_dir, cfg.basename + "_map.tsv", render_map(map), outputs);
  emit(opt.out_dir, cfg.basename + "_fourier.tsv", body.str(), outputs);
  emit(opt.out_dir, cfg.basename + "_overlay.tsv", render_table(overlay), outputs);
  emit_manifest(cfg, opt, "fourier-map", outputs, t0);
}

void cmd_invert(const ExperimentConfig& cfg, const RunOptions& opt) {
  auto t0 = clock_type::now();
  if (!cfg.omega_opt_meas || !cfg.j_meas)
    throw ConfigError("config: [analysis] omega_opt and j are required for invert");
  InversionResult inv =
      invert_spectroscopy(*cfg.omega_opt_meas, *cfg.j_meas, cfg.b_mag, cfg.constants);

  Table t;
  t.header = {"hyperfine inversion from (omega_opt, J)",
              "primary branch index: " + std::to_string(inv.primary),
              "config " + digest_hex(cfg.raw)};
  t.columns = {"a_mag_T", "alpha_rad", "theta_rad", "coupling_Hz", "j_Hz", "omega_opt_Hz"};
  for (const InversionBranch& br : inv.branches)
    t.rows.push_back({br.a_mag, br.alpha, br.theta, br.coupling, br.j, br.omega_opt});

  std::vector<ManifestEntry> outputs;
  emit(opt.out_dir, cfg.basename + "_invert.tsv", render_table(t), outputs);
  emit_manifest(cfg, opt, "invert", outputs, t0);
}

void cmd_polarize(const ExperimentConfig& cfg, const RunOptions& opt) {
  auto t0 = clock_type::now();
  if (!cfg.bath_enabled) throw ConfigError("config: polarize needs [bath] enabled = true");
  NuclearBath bath = generate_bath(bath_config_from(cfg, opt), cfg.constants);
  SweepSchedule sched = schedule_from(cfg);
  PolarizationRecord rec = run_sweeps(bath, sched);

  int total = static_cast<int>(rec.signs.size());
  std::vector<int> snaps = cfg.snapshots;
  if (snaps.empty()) snaps = {0, total};
  std::sort(snaps.begin(), snaps.end());
  snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());
  for (int s : snaps)
    if (s < 0 || s > total)
      throw ConfigError("config: snapshot " + std::to_string(s) + " outside [0, " +
                        std::to_string(total) + "]");

  FidGrid grid = fid_grid_from(cfg);
  struct Row {
    double fwhm, fwhm_std, t2, t2_std, single, converged;
  };
  std::vector<Row> rows(snaps.size());
  int threads = resolve_threads(opt.threads);
  parallel_for(static_cast<int>(snaps.size()), threads, [&](int i) {
    NuclearBath snap = bath;
    snap.polarization = snaps[i] == 0 ? Eigen::VectorXd::Zero(bath.size()).eval()
                                      : rec.trail[snaps[i] - 1];
    Spectrum spec =
        dft(synthesize_fid(snap, cfg.detuning, cfg.drift_broadening, grid), cfg.zero_pad);
    DoubleGaussianFit fit = fit_double_gaussian(spec);
    rows[i] = {fit.fwhm,           fit.fwhm_std,          fit.t2star,
               fit.t2star_std,     fit.single_gaussian ? 1.0 : 0.0,
               fit.converged ? 1.0 : 0.0};
  });

  Table narrowing;
  narrowing.header = {"linewidth narrowing vs polarization sweeps",
                      "config " + digest_hex(cfg.raw)};
  narrowing.columns = {"sweeps",    "fwhm_Hz",   "fwhm_std_Hz", "t2star_s",
                       "t2star_std_s", "single_gaussian", "fit_converged"};
  for (std::size_t i = 0; i < snaps.size(); ++i)
    narrowing.rows.push_back({static_cast<double>(snaps[i]), rows[i].fwhm, rows[i].fwhm_std,
                              rows[i].t2, rows[i].t2_std, rows[i].single, rows[i].converged});

  Table sweeps;
  sweeps.header = {"per-sweep transfer record", "config " + digest_hex(cfg.raw)};
  sweeps.columns = {"sweep", "sign", "quanta", "mean_polarization"};
  for (int s = 0; s < total; ++s)
    sweeps.rows.push_back({static_cast<double>(s + 1), static_cast<double>(rec.signs[s]),
                           rec.quanta[s], rec.trail[s].mean()});

  std::vector<ManifestEntry> outputs;
  emit(opt.out_dir, cfg.basename + "_narrowing.tsv", render_table(narrowing), outputs);
  emit(opt.out_dir, cfg.basename + "_sweeps.tsv", render_table(sweeps), outputs);
  emit(opt.out_dir, cfg.basename + "_bath.tsv", render_bath(bath), outputs);
  emit_manifest(cfg, opt, "polarize", outputs, t0);
}

void cmd_bias_scan(const ExperimentConfig& cfg, const RunOptions& opt) {
  auto t0 = clock_type::now();
  if (!cfg.bath_enabled) throw ConfigError("config: bias-scan needs [bath] enabled = true");
  if (cfg.bias_values.empty())
    throw ConfigError("config: [analysis] bias_values is required for bias-scan");
  NuclearBath bath = generate_bath(bath_config_from(cfg, opt), cfg.constants);
  SweepSchedule sched = schedule_from(cfg);

  BiasScanConfig bsc;
  bsc.total_sweeps = cfg.n_plus + cfg.n_minus;
  bsc.detuning = cfg.detuning;
  bsc.drift_broadening = cfg.drift_broadening;
  bsc.grid = fid_grid_from(cfg);
  bsc.zero_pad = cfg.zero_pad;
  bsc.threads = resolve_threads(opt.threads);
  std::vector<BiasPoint> points = bias_scan(bath, sched, cfg.bias_values, bsc);

  Table t;
  t.header = {"T2* vs sweep-sign bias", "config " + digest_hex(cfg.raw)};
  t.columns = {"bias", "t2star_s", "t2star_std_s", "fwhm_Hz", "fwhm_std_Hz", "single_gaussian"};
  for (const BiasPoint& p : points)
    t.rows.push_back({p.bias, p.t2star, p.t2star_std, p.fwhm, p.fwhm_std,
                      p.single_gaussian ? 1.0 : 0.0});

  std::vector<ManifestEntry> outputs;
  emit(opt.out_dir, cfg.basename + "_bias.tsv", render_table(t), outputs);
  emit_manifest(cfg, opt, "bias-scan", outputs, t0);
}

void cmd_sensitivity(const ExperimentConfig& cfg, const RunOptions& opt) {
  auto t0 = clock_type::now();
  if (!cfg.interrogation_time)
    throw ConfigError("config: [analysis] interrogation_time is required for sensitivity");
  double t = *cfg.interrogation_time;
  if (t <= 0) throw ConfigError("config: interrogation_time must be positive");
  double j_min = 1.0 / (2.0 * t);  // one full transfer oscillation within T
  double bath_line = cfg.constants.gamma_n * cfg.b_mag;

  Table out;
  out.header = {"minimum resolvable coupling (one full oscillation per window)",
                "config " + digest_hex(cfg.raw)};
  out.columns = {"interrogation_s", "j_min_Hz", "bath_line_Hz"};
  out.rows.push_back({t, j_min, bath_line});

  std::vector<ManifestEntry> outputs;
  emit(opt.out_dir, cfg.basename + "_sensitivity.tsv", render_table(out), outputs);
  emit_manifest(cfg, opt, "sensitivity", outputs, t0);
}

}  // namespace hhdr
