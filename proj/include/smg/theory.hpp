#pragma once

#include "smg/optimizers.hpp"

namespace smg {

// Bregman divergence of component i: f(w1;i) - f(w2;i) - <grad f(w2;i), w1-w2>.
double bregman(const FiniteSumProblem& problem, int i, const Vector& w1,
               const Vector& w2);

// Component-gradient variance at a minimizer, (1/n) sum_i ||grad f(w*;i)||^2.
// Requires ||grad F(w*)|| <= 1e-8 (the certification tolerance used
// everywhere a point is treated as optimal).
double sigma_star(const FiniteSumProblem& problem, const Vector& w_star);
inline constexpr double kMinimizerCertTol = 1e-8;

// Full-batch gradient descent with backtracking line search until
// ||grad F(w)|| <= tol. Throws if the budget runs out before certification.
Vector solve_minimizer(const FiniteSumProblem& problem, const Vector& w0,
                       double tol = 1e-10, long max_iters = 200000);

// Inner iterates w_0..w_n reconstructed from a gradient log; bitwise identical
// to the live run because the arithmetic is replayed in the same order.
std::vector<Vector> replay_inner_iterates(const EpochLog& log, double beta);

// Per-seed, per-epoch certificate inputs computed from one epoch log.
struct EpochTheoryData {
  int t = 0;
  double C = 0.0;                 // sum_j D_j(w*, w_j) over the epoch's path
  std::vector<double> D_to_opt;   // the summands of C
  double sum_D_to_end = 0.0;      // sum_j D_j(w_end, w_j)
  double sum_D_cross =            // sum_j D_j^{prev}(w_end, w_j^{prev}); t >= 2
      std::numeric_limits<double>::quiet_NaN();
  std::vector<double> A;  // ||prefix gradient sums||^2, length n+1 (A[0] = 0).
                          // Computed for completeness; no bound below uses it.
  std::vector<double> B;  // ||suffix gradient sums||^2, length n+1 (B[n] = 0)
};
EpochTheoryData epoch_theory_data(const FiniteSumProblem& problem,
                                  const EpochLog& cur, const EpochLog* prev,
                                  const Vector& w_star, double beta);

// Seed-average of the per-epoch data for one epoch index.
struct TheorySnapshot {
  int t = 0;
  int seeds = 0;
  double sigma_sq = 0.0;
  double C_mean = 0.0;       // mean C_t
  double C_prev_mean = 0.0;  // mean C_{t-1} (0 at t = 1 by the C_0 convention)
  double F = 0.0;            // beta * mean C_{t-1} + (1-beta) * mean C_t
  std::vector<double> A_mean, B_mean;
  std::vector<double> D_epoch_mean;
  double sum_D_to_end_mean = 0.0;
  double sum_D_cross_mean = std::numeric_limits<double>::quiet_NaN();
};
TheorySnapshot epoch_snapshot(const std::vector<EpochTheoryData>& per_seed,
                              const TheorySnapshot* prev, double beta,
                              double sigma_sq);

// One verified inequality: ok iff lhs <= threshold, where threshold already
// includes the statistical slack appropriate for the check.
struct CheckRow {
  std::string name;
  int t = 0;
  double lhs = 0.0;
  double rhs = 0.0;        // the exact bound value, slack excluded
  double threshold = 0.0;  // slack-adjusted comparison point
  bool ok = false;
};

// Per-epoch descent inequality. prev must be null exactly when cur.t == 1.
// Throws when eta violates the step cap 1 / (2 L sqrt(K)). Seed-mean inputs:
// dist_prev/dist_cur are the squared distances at epochs t-1 and t, gap_cur is
// F(w_tilde_t) - F(w*). Statistical slack is multiplicative, 3/sqrt(seeds).
CheckRow lemma1_check(const TheorySnapshot* prev, const TheorySnapshot& cur,
                      double dist_prev, double dist_cur, double gap_cur,
                      double eta_cur, double eta_prev, double beta, double K,
                      double L, int n);

// The gradient-aggregate bounds for one epoch: full-sum and summed-tail bounds
// against C_t, same-epoch drift, and (for t >= 2) cross-epoch drift.
std::vector<CheckRow> lemma_b_checks(const TheorySnapshot* prev,
                                     const TheorySnapshot& cur, double eta_cur,
                                     double eta_prev, double beta, double L, int n);

// Convex output-iterate guarantee over the first T epochs:
//   dist0 / (2 (1-beta) sum eta) + (4 L sigma^2 (1+alpha*beta)) / (6 n (1-beta))
//     * (sum eta^3 / sum eta).
double theorem1_rhs(double dist0_sq, const Schedule& sched, double beta,
                    double alpha, double L, double sigma_sq, int n, int T = -1);

// Strongly convex final-iterate guarantee over the first T epochs, with
// K = 1 + alpha*beta*(1 + mu*eta_1); products accumulate in log space.
double theorem2_rhs(double dist0_sq, const Schedule& sched, double beta,
                    double alpha, double mu, double L, double sigma_sq, int n,
                    int T = -1);

}  // namespace smg
