#include "hhdr/spin_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hhdr/errors.hpp"

namespace hhdr {

Vec3 dipolar_hyperfine(const Vec3& pos, const Vec3& nv_axis, const Constants& c) {
  double r = pos.norm();
  if (r <= 0) throw std::invalid_argument("dipolar_hyperfine: nuclear site at the origin");
  Vec3 rhat = pos / r;
  Vec3 zhat = nv_axis.normalized();
  double moment = si::h_planck * c.gamma_e;  // J/T, equals g mu_B
  return si::mu0_over_4pi * moment / (r * r * r) * (3.0 * (zhat.dot(rhat)) * rhat - zhat);
}

double hh_detuning(double omega, const Vec3& b, const Vec3& a, const Constants& c) {
  return omega - c.gamma_n * b_effective(b, a).norm();
}

HHPrediction flip_flop_rate(const Vec3& b, const Vec3& a, const Constants& c) {
  HHPrediction out;
  out.b_eff = b_effective(b, a);
  double beff = out.b_eff.norm();
  double amag = a.norm();
  out.omega_opt = c.gamma_n * beff;
  if (beff <= 0 || amag <= 0) {
    out.theta = 0;
    out.j = 0;
    return out;
  }
  double cosang = std::clamp(out.b_eff.dot(a) / (beff * amag), -1.0, 1.0);
  out.theta = std::acos(cosang);
  out.j = 0.25 * c.gamma_n * amag * std::sin(out.theta);
  return out;
}

double transfer_probability(double tau, double delta_omega, double j) {
  if (tau < 0) throw std::invalid_argument("transfer_probability: negative duration");
  double j2 = j * j;
  double r2 = j2 + delta_omega * delta_omega;
  if (r2 <= 0) return 0.0;
  double s = std::sin(M_PI * std::sqrt(r2) * tau);
  return j2 / r2 * s * s;
}

namespace {

// Forward model of the inversion unknowns x = (|A|, alpha): residuals of the
// matching condition and the flip-flop rate against the measured pair.
struct ForwardEval {
  double omega_opt = 0, j = 0, theta = 0;
};
ForwardEval forward(double a_mag, double alpha, double b_mag, const Constants& c) {
  Vec3 b(0, 0, b_mag);
  Vec3 a = a_mag * Vec3(std::sin(alpha), 0, std::cos(alpha));
  HHPrediction p = flip_flop_rate(b, a, c);
  return {p.omega_opt, p.j, p.theta};
}

}  // namespace

InversionResult invert_spectroscopy(double omega_opt_meas, double j_meas, double b_mag,
                                    const Constants& c) {
  if (b_mag <= 0) throw std::invalid_argument("invert_spectroscopy: |B| must be positive");
  if (j_meas < 0 || omega_opt_meas <= 0)
    throw std::invalid_argument("invert_spectroscopy: omega_opt must be positive, J non-negative");
  if (j_meas > omega_opt_meas)
    throw NumericalError("invert_spectroscopy: J exceeds omega_opt, outside the model domain");

  // Feasibility: the largest J reachable at this omega_opt. |A|(alpha) follows
  // from the matching condition, J(alpha) from the rate; scan then refine.
  double beff = omega_opt_meas / c.gamma_n;
  auto j_of_alpha = [&](double alpha) {
    double s = b_mag * std::sin(alpha);
    double disc = beff * beff - s * s;
    if (disc < 0) return -1.0;
    double amag = 2.0 * b_mag * std::cos(alpha) + 2.0 * std::sqrt(disc);
    if (amag <= 0) return -1.0;
    return forward(amag, alpha, b_mag, c).j;
  };
  double j_max = 0;
  for (int i = 0; i <= 512; ++i) j_max = std::max(j_max, j_of_alpha(M_PI * i / 512.0));
  if (j_meas > j_max * (1.0 + 1e-9))
    throw NumericalError("invert_spectroscopy: no geometry reaches the requested J (max " +
                         std::to_string(j_max) + " Hz at this omega_opt)");

  std::vector<InversionBranch> found;
  auto push_branch = [&](double a_mag, double alpha) {
    ForwardEval f = forward(a_mag, alpha, b_mag, c);
    InversionBranch br;
    br.a_mag = a_mag;
    br.alpha = alpha;
    br.theta = f.theta;
    br.coupling = 0.25 * c.gamma_n * a_mag;
    br.j = f.j;
    br.omega_opt = f.omega_opt;
    bool dup = false;
    for (const auto& other : found)
      if (std::abs(other.a_mag - br.a_mag) < 1e-6 * std::max(other.a_mag, br.a_mag)) dup = true;
    if (!dup) found.push_back(br);
  };

  // Aligned limit: J = 0 forces A parallel or antiparallel to B, where the
  // matching condition solves in closed form and the Newton system degenerates.
  if (j_meas == 0) {
    if (b_mag >= beff) push_branch(2.0 * (b_mag - beff), 0.0);
    else push_branch(2.0 * (beff - b_mag), M_PI);
    push_branch(2.0 * (b_mag + beff), 0.0);
    std::sort(found.begin(), found.end(),
              [](const InversionBranch& x, const InversionBranch& y) { return x.a_mag < y.a_mag; });
    InversionResult out;
    out.branches = std::move(found);
    out.primary = 0;
    for (std::size_t i = 0; i < out.branches.size(); ++i) {
      if (out.branches[i].theta <= M_PI / 2 + 1e-12) {
        out.primary = static_cast<int>(i);
        break;
      }
    }
    return out;
  }

  // Damped 2D Newton, multi-start over 8 seeded angles.
  const double scale_a = std::max(4.0 * j_meas / c.gamma_n, 1e-2 * b_mag);
  for (int k = 0; k < 8; ++k) {
    double alpha = M_PI * (k + 0.5) / 8.0;
    double a_mag = scale_a;
    auto residual = [&](double am, double al, double& r1, double& r2) {
      ForwardEval f = forward(am, al, b_mag, c);
      r1 = (f.omega_opt - omega_opt_meas) / omega_opt_meas;
      r2 = (f.j - j_meas) / std::max(j_meas, 1.0);
    };
    bool ok = false;
    for (int it = 0; it < 100; ++it) {
      double r1, r2;
      residual(a_mag, alpha, r1, r2);
      double rn = std::hypot(r1, r2);
      if (rn < 1e-14) { ok = true; break; }
      // finite-difference Jacobian
      double ha = std::max(1e-8 * std::abs(a_mag), 1e-12);
      double hl = 1e-8;
      double r1a, r2a, r1l, r2l;
      residual(a_mag + ha, alpha, r1a, r2a);
      residual(a_mag, alpha + hl, r1l, r2l);
      Eigen::Matrix2d jac;
      jac << (r1a - r1) / ha, (r1l - r1) / hl, (r2a - r2) / ha, (r2l - r2) / hl;
      Eigen::Vector2d step = jac.fullPivLu().solve(Eigen::Vector2d(-r1, -r2));
      if (!step.allFinite()) break;
      // damping: halve until the residual norm decreases
      double lam = 1.0;
      double best_a = a_mag, best_l = alpha, best_n = rn;
      for (int h = 0; h < 40; ++h) {
        double ca = a_mag + lam * step(0);
        double cl = alpha + lam * step(1);
        ca = std::max(ca, 1e-12);
        cl = std::clamp(cl, 0.0, M_PI);
        double c1, c2;
        residual(ca, cl, c1, c2);
        double cn = std::hypot(c1, c2);
        if (cn < rn) { best_a = ca; best_l = cl; best_n = cn; break; }
        lam *= 0.5;
      }
      double rel = std::abs(best_a - a_mag) / std::max(std::abs(a_mag), 1e-300) +
                   std::abs(best_l - alpha);
      a_mag = best_a;
      alpha = best_l;
      if (best_n >= rn) break;  // no progress
      if (rel < 1e-10) {
        residual(a_mag, alpha, r1, r2);
        ok = std::hypot(r1, r2) < 1e-8;
        break;
      }
    }
    if (!ok) continue;
    push_branch(a_mag, alpha);
  }
  if (found.empty())
    throw NumericalError("invert_spectroscopy: Newton iterations did not converge");

  std::sort(found.begin(), found.end(),
            [](const InversionBranch& x, const InversionBranch& y) { return x.a_mag < y.a_mag; });
  InversionResult out;
  out.branches = std::move(found);
  out.primary = 0;  // smallest |A| unless an acute-theta branch exists
  for (std::size_t i = 0; i < out.branches.size(); ++i) {
    if (out.branches[i].theta <= M_PI / 2 + 1e-12) {
      out.primary = static_cast<int>(i);
      break;
    }
  }
  return out;
}

}  // namespace hhdr
