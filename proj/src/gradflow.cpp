#include "iclab/gradflow.hpp"

#include "iclab/approxloss.hpp"

#include <cmath>
#include <string>

namespace iclab {

std::pair<double, double> ode_rhs(double phi, double rho, int d, double lambda) {
  const double e = std::exp(d * rho * rho), ei = 1.0 / e;
  return {rho - 2.0 * phi * rho * rho - lambda * phi * (e - ei),
          phi - 2.0 * phi * phi * rho - d * lambda * phi * phi * rho * (e + ei)};
}

double phi_star(double rho, int d, double lambda) {
  require(rho != 0.0, ErrorKind::domain, "phi* has a pole at rho = 0");
  const double e = std::exp(d * rho * rho);
  return rho / (2.0 * rho * rho + lambda * (e - 1.0 / e));
}

static double flow_loss(double phi, double rho, const ApproxLossParams& P) {
  // approximate loss at omega = (rho, -rho), mu = (phi, -phi)
  const double c0 = 1.0 + P.sigma2;
  return c0 - 4.0 * phi * rho + 4.0 * phi * phi * rho * rho + 4.0 * P.lambda() * phi * phi * std::sinh(P.d * rho * rho);
}

PhaseReport integrate(const FlowConfig& cfg) {
  require(cfg.alpha > 0.0, ErrorKind::parameter, "alpha must be positive");
  require(cfg.dt > 0.0 && cfg.t_end > 0.0, ErrorKind::parameter, "dt and t_end must be positive");
  require(cfg.sample_every >= 1, ErrorKind::parameter, "sample_every must be positive");
  ApproxLossParams P{cfg.d, cfg.L, cfg.sigma2, true};
  P.validate();
  const double lam = P.lambda();
  const int d = cfg.d;
  const long steps = std::lround(cfg.t_end / cfg.dt);
  const double thr1 = 0.5 / std::sqrt(static_cast<double>(d));

  PhaseReport r;
  double phi = cfg.alpha, rho = cfg.alpha, t = 0.0;
  auto [f0, g0] = ode_rhs(phi, rho, d, lam);
  double prev_drho = g0;
  double prev_loss = flow_loss(phi, rho, P);
  r.trajectory.push_back({t, phi, rho});
  r.loss.push_back(prev_loss);
  r.rho_peak = rho;
  const double h = cfg.dt;
  for (long i = 1; i <= steps; ++i) {
    auto [k1p, k1r] = ode_rhs(phi, rho, d, lam);
    auto [k2p, k2r] = ode_rhs(phi + 0.5 * h * k1p, rho + 0.5 * h * k1r, d, lam);
    auto [k3p, k3r] = ode_rhs(phi + 0.5 * h * k2p, rho + 0.5 * h * k2r, d, lam);
    auto [k4p, k4r] = ode_rhs(phi + h * k3p, rho + h * k3r, d, lam);
    phi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    rho += h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
    t = i * h;
    if (!std::isfinite(phi) || !std::isfinite(rho) || std::abs(phi) > 1e6 || std::abs(rho) > 1e6)
      throw Error(ErrorKind::instability, "gradient flow diverged at t=" + std::to_string(t));

    const double loss = flow_loss(phi, rho, P);
    r.max_loss_increase = std::max(r.max_loss_increase, loss - prev_loss);
    prev_loss = loss;

    if (r.tau1 < 0.0 && std::min(phi, rho) > thr1) r.tau1 = t;
    const double drho = ode_rhs(phi, rho, d, lam).second;
    if (prev_drho > 0.0 && drho <= 0.0) {
      ++r.rho_local_maxima;
      if (r.tau2 < 0.0) r.tau2 = t - h + h * prev_drho / (prev_drho - drho);
    }
    prev_drho = drho;
    if (rho > r.rho_peak) {
      r.rho_peak = rho;
      r.t_peak = t;
    }
    if (i % cfg.sample_every == 0 || i == steps) {
      r.trajectory.push_back({t, phi, rho});
      r.loss.push_back(loss);
    }
  }
  auto [fp, fr] = ode_rhs(phi, rho, d, lam);
  r.limit_product = 2.0 * phi * rho;
  r.limit_product_rate = std::abs(2.0 * (fp * rho + phi * fr));
  return r;
}

EarlyPhaseDiagnostics early_phase_checks(const PhaseReport& r, int d, double lambda) {
  EarlyPhaseDiagnostics g;
  const double cap = 0.25 / std::sqrt(static_cast<double>(d));
  double st = 0, sy = 0, stt = 0, sty = 0;
  int n = 0;
  bool band = true;
  for (const auto& s : r.trajectory) {
    if (s.rho > cap) break;
    if (s.rho <= 0.0) continue;
    const double y = std::log(s.rho);
    st += s.t;
    sy += y;
    stt += s.t * s.t;
    sty += s.t * y;
    ++n;
    const double ratio = s.phi / s.rho, r2 = d * lambda * s.rho * s.rho;
    g.max_ratio_deviation = std::max(g.max_ratio_deviation, std::abs(ratio - (1.0 + r2)));
    if (ratio < 1.0 - 1e-12 || ratio > 1.0 + 2.0 * r2 + 1e-12) band = false;
  }
  g.window_points = n;
  g.window_empty = n < 2;
  if (!g.window_empty) g.slope = (n * sty - st * sy) / (n * stt - st * st);
  g.ratio_in_band = band && !g.window_empty;
  return g;
}

}  // namespace iclab
