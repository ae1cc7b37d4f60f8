#pragma once

#include <string>
#include <vector>

#include "smg/common.hpp"

namespace smg {

enum class ScheduleKind { Constant, Exponential };

// Per-epoch learning rates eta_1..eta_T. The declared alpha bounds the ratio
// eta_t / eta_{t-1} (1 for constant schedules). Exponential rates are built by
// repeated multiplication so eta_t == alpha * eta_{t-1} holds bitwise.
struct Schedule {
  ScheduleKind kind = ScheduleKind::Constant;
  int T = 1;
  double alpha = 1.0;
  double gamma = 0.0;  // requested scale, kept for reporting
  std::vector<double> etas;  // etas[t-1] = eta_t

  double eta(int t) const {
    if (t < 1 || t > T) throw std::out_of_range("schedule: epoch outside [1, T]");
    return etas[t - 1];
  }
  double max_eta() const { return etas.front(); }  // rates never increase
  double sum_eta(int upto = -1) const;
  double sum_eta_cubed(int upto = -1) const;
};

// eta_t = gamma * n^{1/3} / T^{1/3}, the constant convex-rate schedule.
Schedule constant_convex(int T, int n, double gamma);

// eta_t = gamma * log(sqrt(n) * T) / T (natural log), the constant strongly
// convex schedule. Requires sqrt(n) * T > 1.
Schedule constant_strongly_convex(int T, int n, double gamma);

// eta_t = eta0 * alpha^t with alpha = rho^{1/T}, rho in (0, 1], so eta_T
// lands on eta0 * rho.
Schedule exponential_schedule(int T, double eta0, double rho);

// Arbitrary constant rate (used for raw learning-rate grids).
Schedule constant_schedule(int T, double eta);

// Feasibility of the step-size cap eta <= 1 / (2 L sqrt(K)) with
// K = 1 + alpha*beta when mu == 0 and K = 1 + alpha*beta*(1 + mu*max_eta)
// otherwise. Requires 0 <= beta < 1.
struct Feasibility {
  bool ok = false;
  double K = 1.0;
  double max_eta = 0.0;
  double cap = 0.0;  // the bound max_eta is compared against
};
Feasibility feasible(const Schedule& sched, double L, double beta, double mu = 0.0);

// Largest eta satisfying eta * 2L * sqrt(1 + alpha*beta*(1 + mu*eta)) <= 1;
// closed form for mu == 0, bisection otherwise. Used to auto-scale infeasible
// gamma requests down.
double max_feasible_eta(double L, double beta, double mu, double alpha);

}  // namespace smg
