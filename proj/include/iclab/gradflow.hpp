#pragma once

#include "iclab/common.hpp"

#include <utility>
#include <vector>

namespace iclab {

struct FlowState {
  double t = 0.0;
  double phi = 0.0;  // OV scale of the positive head
  double rho = 0.0;  // KQ scale of the positive head
};

// (dphi/dt, drho/dt) of the symmetric two-head flow.
std::pair<double, double> ode_rhs(double phi, double rho, int d, double lambda);

// Stationary phi for fixed rho; has a 1/rho pole at zero.
double phi_star(double rho, int d, double lambda);

struct FlowConfig {
  double alpha = 1e-3;
  int d = 5;
  int L = 40;
  double sigma2 = 0.1;
  double t_end = 200.0;
  double dt = 1e-3;
  int sample_every = 100;
};

struct PhaseReport {
  double tau1 = -1.0;  // first time min(phi, rho) > d^{-1/2}/2; -1 if never
  double tau2 = -1.0;  // first + to - sign change of drho/dt, interpolated; -1 if none
  double rho_peak = 0.0;
  double t_peak = 0.0;
  double limit_product = 0.0;  // 2 phi rho at t_end
  double limit_product_rate = 0.0;  // |d(2 phi rho)/dt| at t_end
  int rho_local_maxima = 0;
  double max_loss_increase = 0.0;  // largest per-step increase of the approximate loss
  std::vector<FlowState> trajectory;
  std::vector<double> loss;  // approximate loss at trajectory samples
};

PhaseReport integrate(const FlowConfig& cfg);

struct EarlyPhaseDiagnostics {
  bool window_empty = true;
  int window_points = 0;
  double slope = 0.0;             // least-squares slope of log rho vs t on rho <= d^{-1/2}/4
  double max_ratio_deviation = 0.0;  // max |phi/rho - (1 + d lambda rho^2)|
  bool ratio_in_band = false;        // phi/rho in [1, 1 + 2 d lambda rho^2] on the window
};

EarlyPhaseDiagnostics early_phase_checks(const PhaseReport& r, int d, double lambda);

}  // namespace iclab
