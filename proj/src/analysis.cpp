#include "hhdr/analysis.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "hhdr/fit.hpp"
#include "hhdr/sequence.hpp"
#include "hhdr/spin_model.hpp"

namespace hhdr {

GnResult gauss_newton(const GnModel& model, Eigen::VectorXd x0, const GnOptions& opt) {
  GnResult res;
  res.x = std::move(x0);
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  model(res.x, r, jac);
  res.cost = r.squaredNorm();
  if (!std::isfinite(res.cost)) return res;

  for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
    res.jtj = jac.transpose() * jac;
    Eigen::VectorXd delta = res.jtj.ldlt().solve(-jac.transpose() * r);
    if (!delta.allFinite()) return res;

    double scale = 1.0;
    bool accepted = false;
    Eigen::VectorXd r_new;
    Eigen::MatrixXd jac_new;
    for (int h = 0; h < opt.max_halvings; ++h, scale *= 0.5) {
      Eigen::VectorXd x_new = res.x + scale * delta;
      model(x_new, r_new, jac_new);
      double cost_new = r_new.squaredNorm();
      if (std::isfinite(cost_new) && cost_new <= res.cost) {
        res.x = x_new;
        res.cost = cost_new;
        r = r_new;
        jac = jac_new;
        accepted = true;
        break;
      }
    }
    if (!accepted) return res;
    if ((scale * delta).norm() <= opt.rel_step_tol * (res.x.norm() + opt.rel_step_tol)) {
      res.converged = true;
      res.jtj = jac.transpose() * jac;
      return res;
    }
  }
  return res;
}

Eigen::VectorXd parameter_std(const GnResult& res, int n_samples) {
  int n = static_cast<int>(res.x.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  if (n_samples <= n || res.jtj.size() == 0) return out;
  Eigen::MatrixXd cov = res.jtj.ldlt().solve(Eigen::MatrixXd::Identity(n, n));
  double s2 = res.cost / (n_samples - n);
  for (int i = 0; i < n; ++i) out(i) = std::sqrt(std::max(0.0, cov(i, i) * s2));
  return out;
}

Spectrum dft(const FIDTrace& trace, int zero_pad) {
  int n = static_cast<int>(trace.s.size());
  if (n < 2 || trace.dt <= 0) throw std::invalid_argument("dft: trace needs >= 2 samples");
  if (zero_pad < 1) throw std::invalid_argument("dft: zero_pad must be >= 1");

  long long big = static_cast<long long>(n) * zero_pad;
  int nn = static_cast<int>(big);
  double mean = trace.s.mean();

  // exact twiddle table keeps the direct transform bit-reproducible
  std::vector<cplx> tw(nn);
  for (int k = 0; k < nn; ++k)
    tw[k] = std::exp(cplx(0, -2.0 * M_PI * k / nn));

  int half = nn / 2;
  Spectrum out;
  out.n_time = nn;
  out.df = 1.0 / (nn * trace.dt);
  out.freq.resize(half + 1);
  out.amp.resize(half + 1);
  for (int f = 0; f <= half; ++f) {
    cplx acc = 0;
    for (int t = 0; t < n; ++t)
      acc += (trace.s(t) - mean) * tw[static_cast<int>((static_cast<long long>(f) * t) % nn)];
    out.freq(f) = f * out.df;
    out.amp(f) = std::abs(acc);
  }
  return out;
}

namespace {

// half-width of the peak at index i0 where amp first drops below amp0/2
double half_width(const Eigen::VectorXd& freq, const Eigen::VectorXd& amp, int i0) {
  double a0 = amp(i0);
  double left = freq(0), right = freq(freq.size() - 1);
  for (int i = i0; i < amp.size(); ++i)
    if (amp(i) < 0.5 * a0) {
      right = freq(i);
      break;
    }
  for (int i = i0; i >= 0; --i)
    if (amp(i) < 0.5 * a0) {
      left = freq(i);
      break;
    }
  return 0.5 * (right - left);
}

}  // namespace

DoubleGaussianFit fit_double_gaussian(const Spectrum& spec) {
  int m = static_cast<int>(spec.amp.size());
  if (m < 8) throw std::invalid_argument("fit_double_gaussian: spectrum too short");

  // main peak seed
  int i1 = 0;
  spec.amp.maxCoeff(&i1);
  double hw = std::max(half_width(spec.freq, spec.amp, i1), spec.df);
  double sigma0 = hw / std::sqrt(std::log(2.0));

  // second peak: largest bin clear of the main peak
  int i2 = -1;
  double best = 0;
  for (int i = 0; i < m; ++i) {
    if (std::abs(spec.freq(i) - spec.freq(i1)) < 3.0 * hw) continue;
    if (spec.amp(i) > best) {
      best = spec.amp(i);
      i2 = i;
    }
  }
  bool single = i2 < 0 || best < 0.05 * spec.amp(i1);

  DoubleGaussianFit fit;
  fit.single_gaussian = single;
  int np = single ? 3 : 5;  // (L1, mu1, sigma) or (L1, L2, mu1, mu2, sigma)

  GnModel model = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    double l1 = x(0), l2 = single ? 0 : x(1);
    double mu1 = x(single ? 1 : 2), mu2 = single ? 0 : x(3);
    double sg = x(np - 1);
    r.resize(m);
    jac.resize(m, np);
    if (sg <= 0) {
      r.setConstant(std::numeric_limits<double>::infinity());
      jac.setZero();
      return;
    }
    for (int i = 0; i < m; ++i) {
      double u1 = (spec.freq(i) - mu1) / sg;
      double e1 = std::exp(-u1 * u1);
      double u2 = single ? 0 : (spec.freq(i) - mu2) / sg;
      double e2 = single ? 0 : std::exp(-u2 * u2);
      r(i) = l1 * e1 + l2 * e2 - spec.amp(i);
      if (single) {
        jac(i, 0) = e1;
        jac(i, 1) = l1 * e1 * 2.0 * u1 / sg;
        jac(i, 2) = l1 * e1 * 2.0 * u1 * u1 / sg;
      } else {
        jac(i, 0) = e1;
        jac(i, 1) = e2;
        jac(i, 2) = l1 * e1 * 2.0 * u1 / sg;
        jac(i, 3) = l2 * e2 * 2.0 * u2 / sg;
        jac(i, 4) = (l1 * e1 * u1 * u1 + l2 * e2 * u2 * u2) * 2.0 / sg;
      }
    }
  };

  Eigen::VectorXd x0(np);
  if (single)
    x0 << spec.amp(i1), spec.freq(i1), sigma0;
  else
    x0 << spec.amp(i1), best, spec.freq(i1), spec.freq(i2), sigma0;
  GnResult res = gauss_newton(model, x0);
  Eigen::VectorXd ps = parameter_std(res, m);

  fit.converged = res.converged;
  fit.iterations = res.iterations;
  if (single) {
    fit.lambda1 = res.x(0);
    fit.mu1 = res.x(1);
    fit.sigma = std::abs(res.x(2));
    fit.param_std = {ps(0), 0, ps(1), 0, ps(2)};
  } else {
    // canonical order: mu1 < mu2
    bool swap = res.x(2) > res.x(3);
    fit.lambda1 = res.x(swap ? 1 : 0);
    fit.lambda2 = res.x(swap ? 0 : 1);
    fit.mu1 = res.x(swap ? 3 : 2);
    fit.mu2 = res.x(swap ? 2 : 3);
    fit.sigma = std::abs(res.x(4));
    fit.param_std = {ps(swap ? 1 : 0), ps(swap ? 0 : 1), ps(swap ? 3 : 2), ps(swap ? 2 : 3),
                     ps(4)};
  }
  fit.fwhm = fwhm_from_sigma(fit.sigma);
  fit.fwhm_std = 2.0 * std::sqrt(std::log(2.0)) * fit.param_std[4];
  fit.t2star = t2star_from_fwhm(fit.fwhm);
  fit.t2star_std = fit.fwhm > 0 ? 2.0 / (M_PI * fit.fwhm * fit.fwhm) * fit.fwhm_std : 0;
  return fit;
}

LorentzianFit fit_lorentzian_profile(const Eigen::VectorXd& omega, const Eigen::VectorXd& value) {
  int m = static_cast<int>(omega.size());
  if (m < 4 || value.size() != m)
    throw std::invalid_argument("fit_lorentzian_profile: need matching grids, >= 4 points");

  int i0 = 0;
  value.maxCoeff(&i0);
  double j0 = std::max(half_width(omega, value, i0), omega(1) - omega(0));

  GnModel model = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    double a = x(0), j = x(1), w0 = x(2);
    r.resize(m);
    jac.resize(m, 3);
    for (int i = 0; i < m; ++i) {
      double dw = omega(i) - w0;
      double den = j * j + dw * dw;
      if (den <= 0) {
        r.setConstant(std::numeric_limits<double>::infinity());
        jac.setZero();
        return;
      }
      r(i) = a * j * j / den - value(i);
      jac(i, 0) = j * j / den;
      jac(i, 1) = a * 2.0 * j * dw * dw / (den * den);
      jac(i, 2) = a * j * j * 2.0 * dw / (den * den);
    }
  };

  Eigen::VectorXd x0(3);
  x0 << value(i0), j0, omega(i0);
  GnResult res = gauss_newton(model, x0);
  Eigen::VectorXd ps = parameter_std(res, m);

  LorentzianFit fit;
  fit.amplitude = res.x(0);
  fit.j = std::abs(res.x(1));
  fit.omega_opt = res.x(2);
  fit.param_std = {ps(0), ps(1), ps(2)};
  fit.fwhm = 2.0 * fit.j;
  fit.converged = res.converged;
  fit.iterations = res.iterations;
  return fit;
}

FourierMap fourier_map(const SpectroscopyMap& map, const SpinSystem& sys, int zero_pad) {
  int n_om = static_cast<int>(map.omega.size());
  int n_tau = static_cast<int>(map.tau.size());
  if (n_om < 1 || n_tau < 2) throw std::invalid_argument("fourier_map: map too small");
  double dt = map.tau(1) - map.tau(0);
  for (int j = 1; j + 1 < n_tau; ++j)
    if (std::abs(map.tau(j + 1) - map.tau(j) - dt) > 1e-9 * dt)
      throw std::invalid_argument("fourier_map: tau grid must be uniform");

  FourierMap out;
  out.omega = map.omega;
  FIDTrace row;
  row.dt = dt;
  for (int i = 0; i < n_om; ++i) {
    row.s = map.value.row(i).transpose();
    Spectrum sp = dft(row, zero_pad);
    if (i == 0) {
      out.freq = sp.freq;
      out.amp.resize(n_om, sp.amp.size());
    }
    out.amp.row(i) = sp.amp.transpose();
  }

  // overlay: (theta, omega_opt, J) at the first nucleus' hyperfine magnitude
  out.bare_larmor = sys.constants.gamma_n * sys.b.norm();
  int n_theta = 181;
  out.overlay_theta.resize(n_theta);
  out.overlay_omega_opt.resize(n_theta);
  out.overlay_j.resize(n_theta);
  double a_mag = sys.hyperfine.empty() ? 0.0 : sys.hyperfine[0].norm();
  Vec3 bhat = sys.b.normalized();
  Vec3 perp = bhat.cross(std::abs(bhat.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX()).normalized();
  for (int i = 0; i < n_theta; ++i) {
    double alpha = M_PI * i / (n_theta - 1);
    Vec3 a = a_mag * (std::cos(alpha) * bhat + std::sin(alpha) * perp);
    HHPrediction p = flip_flop_rate(sys.b, a, sys.constants);
    out.overlay_theta(i) = p.theta;
    out.overlay_omega_opt(i) = p.omega_opt;
    out.overlay_j(i) = p.j;
  }
  return out;
}

}  // namespace hhdr
