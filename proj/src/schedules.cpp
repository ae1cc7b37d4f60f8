#include "smg/schedules.hpp"

#include <cmath>

namespace smg {

namespace {

void check_horizon(int T) {
  if (T < 1) throw std::invalid_argument("schedule: T must be >= 1");
}

void check_beta(double beta) {
  if (beta < 0.0 || beta >= 1.0)
    throw std::invalid_argument("momentum beta must lie in [0, 1)");
}

}  // namespace

double Schedule::sum_eta(int upto) const {
  if (upto < 0) upto = T;
  if (upto > T) throw std::out_of_range("schedule: prefix longer than horizon");
  double s = 0.0;
  for (int t = 0; t < upto; ++t) s += etas[t];
  return s;
}

double Schedule::sum_eta_cubed(int upto) const {
  if (upto < 0) upto = T;
  if (upto > T) throw std::out_of_range("schedule: prefix longer than horizon");
  double s = 0.0;
  for (int t = 0; t < upto; ++t) s += etas[t] * etas[t] * etas[t];
  return s;
}

Schedule constant_convex(int T, int n, double gamma) {
  check_horizon(T);
  if (n < 1) throw std::invalid_argument("schedule: n must be >= 1");
  if (gamma <= 0.0) throw std::invalid_argument("schedule: gamma must be positive");
  Schedule s;
  s.kind = ScheduleKind::Constant;
  s.T = T;
  s.alpha = 1.0;
  s.gamma = gamma;
  s.etas.assign(T, gamma * std::cbrt(static_cast<double>(n)) /
                       std::cbrt(static_cast<double>(T)));
  return s;
}

Schedule constant_strongly_convex(int T, int n, double gamma) {
  check_horizon(T);
  if (n < 1) throw std::invalid_argument("schedule: n must be >= 1");
  if (gamma <= 0.0) throw std::invalid_argument("schedule: gamma must be positive");
  const double arg = std::sqrt(static_cast<double>(n)) * T;
  if (arg <= 1.0)
    throw std::invalid_argument("schedule: log argument sqrt(n)*T must exceed 1");
  Schedule s;
  s.kind = ScheduleKind::Constant;
  s.T = T;
  s.alpha = 1.0;
  s.gamma = gamma;
  s.etas.assign(T, gamma * std::log(arg) / T);
  return s;
}

Schedule exponential_schedule(int T, double eta0, double rho) {
  check_horizon(T);
  if (eta0 <= 0.0) throw std::invalid_argument("schedule: eta0 must be positive");
  if (rho <= 0.0 || rho > 1.0)
    throw std::invalid_argument("schedule: rho must lie in (0, 1]");
  Schedule s;
  s.kind = ScheduleKind::Exponential;
  s.T = T;
  s.alpha = std::pow(rho, 1.0 / T);
  s.gamma = eta0;
  s.etas.resize(T);
  double e = eta0;
  for (int t = 0; t < T; ++t) {
    e *= s.alpha;  // eta_t = eta0 * alpha^t, exact geometric ratio
    s.etas[t] = e;
  }
  return s;
}

Schedule constant_schedule(int T, double eta) {
  check_horizon(T);
  if (eta <= 0.0) throw std::invalid_argument("schedule: eta must be positive");
  Schedule s;
  s.kind = ScheduleKind::Constant;
  s.T = T;
  s.alpha = 1.0;
  s.gamma = eta;
  s.etas.assign(T, eta);
  return s;
}

Feasibility feasible(const Schedule& sched, double L, double beta, double mu) {
  check_beta(beta);
  if (L <= 0.0) throw std::invalid_argument("feasibility: L must be positive");
  if (mu < 0.0) throw std::invalid_argument("feasibility: mu must be >= 0");
  Feasibility f;
  f.max_eta = sched.max_eta();
  f.K = mu == 0.0 ? 1.0 + sched.alpha * beta
                  : 1.0 + sched.alpha * beta * (1.0 + mu * f.max_eta);
  f.cap = 1.0 / (2.0 * L * std::sqrt(f.K));
  f.ok = f.max_eta <= f.cap;
  return f;
}

double max_feasible_eta(double L, double beta, double mu, double alpha) {
  check_beta(beta);
  if (L <= 0.0) throw std::invalid_argument("feasibility: L must be positive");
  if (mu < 0.0) throw std::invalid_argument("feasibility: mu must be >= 0");
  if (alpha <= 0.0 || alpha > 1.0)
    throw std::invalid_argument("feasibility: alpha must lie in (0, 1]");
  if (mu == 0.0 || beta == 0.0)
    return 1.0 / (2.0 * L * std::sqrt(1.0 + alpha * beta));
  // g(eta) = eta * 2L * sqrt(1 + alpha*beta*(1 + mu*eta)) is increasing, so
  // bisect g(eta) = 1 on [0, 1/(2L)].
  auto g = [&](double eta) {
    return eta * 2.0 * L * std::sqrt(1.0 + alpha * beta * (1.0 + mu * eta));
  };
  double lo = 0.0, hi = 1.0 / (2.0 * L);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) <= 1.0 ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace smg
