#include "smg/theory.hpp"

#include <cmath>

namespace smg {

double bregman(const FiniteSumProblem& problem, int i, const Vector& w1,
               const Vector& w2) {
  Vector g2(problem.dim());
  problem.component_grad(w2, i, g2);
  return problem.component_value(w1, i) - problem.component_value(w2, i) -
         g2.dot(w1 - w2);
}

double sigma_star(const FiniteSumProblem& problem, const Vector& w_star) {
  if (problem.full_gradient(w_star).norm() > kMinimizerCertTol)
    throw std::invalid_argument(
        "sigma_star: w_star is not certified (full gradient norm exceeds 1e-8)");
  double s = 0.0;
  Vector g(problem.dim());
  for (int i = 0; i < problem.n(); ++i) {
    problem.component_grad(w_star, i, g);
    s += g.squaredNorm();
  }
  return s / problem.n();
}

Vector solve_minimizer(const FiniteSumProblem& problem, const Vector& w0, double tol,
                       long max_iters) {
  if (tol <= 0.0) throw std::invalid_argument("solve: tolerance must be positive");
  Vector w = w0;
  double f = problem.full_value(w);
  const double lipschitz_step = 1.0 / problem.smoothness();
  double step = lipschitz_step;
  for (long it = 0; it < max_iters; ++it) {
    const Vector g = problem.full_gradient(w);
    const double g_sq = g.squaredNorm();
    if (std::sqrt(g_sq) <= tol) return w;
    // Near the optimum the guaranteed decrease ||g||^2 / (2L) drops below the
    // rounding resolution of f itself, so Armijo comparisons turn into noise
    // and the backtracking loop would shrink the step until w stops moving.
    // From there, plain 1/L steps still contract the gradient; take those and
    // stop consulting f.
    const double f_resolution =
        16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f));
    if (0.5 * lipschitz_step * g_sq <= f_resolution) {
      w -= lipschitz_step * g;
      f = problem.full_value(w);
      continue;
    }
    // Backtracking with the Armijo condition f' <= f - (step/2) ||g||^2.
    for (;;) {
      const Vector trial = w - step * g;
      const double f_trial = problem.full_value(trial);
      if (f_trial <= f - 0.5 * step * g_sq) {
        w = trial;
        f = f_trial;
        step *= 2.0;  // let the next iteration probe a longer step again
        break;
      }
      step *= 0.5;
      if (step < 1e-18)
        throw std::runtime_error("solve: line search collapsed before certification");
    }
  }
  throw std::runtime_error("solve: gradient norm still above tolerance after " +
                           std::to_string(max_iters) + " iterations");
}

std::vector<Vector> replay_inner_iterates(const EpochLog& log, double beta) {
  const int n = static_cast<int>(log.grads.size());
  if (static_cast<int>(log.perm.size()) != n)
    throw std::invalid_argument("replay: log gradients/permutation mismatch");
  std::vector<Vector> iters;
  iters.reserve(n + 1);
  Vector w = log.w_start;
  Vector m(w.size());
  const double step = log.eta / n;
  iters.push_back(w);
  for (int i = 0; i < n; ++i) {
    m = beta * log.m_anchor + (1.0 - beta) * log.grads[i];
    w -= step * m;
    iters.push_back(w);
  }
  return iters;
}

EpochTheoryData epoch_theory_data(const FiniteSumProblem& problem,
                                  const EpochLog& cur, const EpochLog* prev,
                                  const Vector& w_star, double beta) {
  const int n = problem.n();
  if (static_cast<int>(cur.grads.size()) != n)
    throw std::invalid_argument("theory: epoch log does not cover all components");
  if ((cur.t >= 2) != (prev != nullptr))
    throw std::invalid_argument("theory: previous epoch log required iff t >= 2");

  EpochTheoryData out;
  out.t = cur.t;

  const auto iters = replay_inner_iterates(cur, beta);
  out.D_to_opt.resize(n);
  for (int j = 0; j < n; ++j) {
    out.D_to_opt[j] = bregman(problem, cur.perm[j], w_star, iters[j]);
    out.C += out.D_to_opt[j];
    out.sum_D_to_end += bregman(problem, cur.perm[j], cur.w_end, iters[j]);
  }

  // Prefix sums give both halves; B[i] = ||P_n - P_i||^2 keeps B[0] == A[n]
  // exact, bitwise.
  out.A.resize(n + 1);
  out.B.resize(n + 1);
  Vector prefix = Vector::Zero(problem.dim());
  std::vector<Vector> prefixes;
  prefixes.reserve(n + 1);
  prefixes.push_back(prefix);
  for (int j = 0; j < n; ++j) {
    prefix += cur.grads[j];
    prefixes.push_back(prefix);
  }
  for (int i = 0; i <= n; ++i) {
    out.A[i] = prefixes[i].squaredNorm();
    out.B[i] = (prefixes[n] - prefixes[i]).squaredNorm();
  }

  if (prev != nullptr) {
    const auto prev_iters = replay_inner_iterates(*prev, beta);
    out.sum_D_cross = 0.0;
    for (int j = 0; j < n; ++j)
      out.sum_D_cross += bregman(problem, prev->perm[j], cur.w_end, prev_iters[j]);
  }
  return out;
}

TheorySnapshot epoch_snapshot(const std::vector<EpochTheoryData>& per_seed,
                              const TheorySnapshot* prev, double beta,
                              double sigma_sq) {
  if (per_seed.empty()) throw std::invalid_argument("snapshot: no seed data");
  const int t = per_seed[0].t;
  const auto n = per_seed[0].D_to_opt.size();
  if ((t >= 2) != (prev != nullptr))
    throw std::invalid_argument("snapshot: previous snapshot required iff t >= 2");

  TheorySnapshot snap;
  snap.t = t;
  snap.seeds = static_cast<int>(per_seed.size());
  snap.sigma_sq = sigma_sq;
  snap.A_mean.assign(n + 1, 0.0);
  snap.B_mean.assign(n + 1, 0.0);
  snap.D_epoch_mean.assign(n, 0.0);
  bool has_cross = t >= 2;
  double cross = 0.0;
  for (const auto& d : per_seed) {
    if (d.t != t || d.D_to_opt.size() != n)
      throw std::invalid_argument("snapshot: mixed epochs in seed data");
    snap.C_mean += d.C;
    snap.sum_D_to_end_mean += d.sum_D_to_end;
    for (std::size_t i = 0; i <= n; ++i) {
      snap.A_mean[i] += d.A[i];
      snap.B_mean[i] += d.B[i];
    }
    for (std::size_t i = 0; i < n; ++i) snap.D_epoch_mean[i] += d.D_to_opt[i];
    if (has_cross) cross += d.sum_D_cross;
  }
  const double inv = 1.0 / snap.seeds;
  snap.C_mean *= inv;
  snap.sum_D_to_end_mean *= inv;
  for (auto& v : snap.A_mean) v *= inv;
  for (auto& v : snap.B_mean) v *= inv;
  for (auto& v : snap.D_epoch_mean) v *= inv;
  if (has_cross) snap.sum_D_cross_mean = cross * inv;
  snap.C_prev_mean = prev != nullptr ? prev->C_mean : 0.0;  // C_0 = 0 convention
  snap.F = beta * snap.C_prev_mean + (1.0 - beta) * snap.C_mean;
  return snap;
}

namespace {

CheckRow make_row(std::string name, int t, double lhs, double rhs, double threshold) {
  CheckRow row;
  row.name = std::move(name);
  row.t = t;
  row.lhs = lhs;
  row.rhs = rhs;
  row.threshold = threshold;
  row.ok = lhs <= threshold;
  return row;
}

double stat_slack(int seeds) { return 3.0 / std::sqrt(static_cast<double>(seeds)); }

}  // namespace

CheckRow lemma1_check(const TheorySnapshot* prev, const TheorySnapshot& cur,
                      double dist_prev, double dist_cur, double gap_cur,
                      double eta_cur, double eta_prev, double beta, double K,
                      double L, int n) {
  if (K < 1.0) throw std::invalid_argument("descent check: K must be >= 1");
  if (eta_cur > 1.0 / (2.0 * L * std::sqrt(K)))
    throw std::invalid_argument(
        "descent check: step size violates eta <= 1 / (2 L sqrt(K))");
  if ((cur.t >= 2) != (prev != nullptr))
    throw std::invalid_argument("descent check: previous snapshot required iff t >= 2");

  const double sigma_sq = cur.sigma_sq;
  const double noise = 4.0 * L * sigma_sq / (3.0 * n);
  double lhs, rhs;
  if (cur.t == 1) {
    lhs = 2.0 * eta_cur * (1.0 - beta) * gap_cur;
    rhs = dist_prev - dist_cur - (2.0 * eta_cur / n) * cur.F +
          (1.0 - beta) * (2.0 * eta_cur / n) * (cur.F / K) +
          noise * (1.0 - beta) * (1.0 - beta) * eta_cur * eta_cur * eta_cur;
  } else {
    lhs = 2.0 * eta_cur * gap_cur;
    rhs = dist_prev - dist_cur - (2.0 * eta_cur / n) * cur.F +
          (2.0 * eta_cur / n) * (cur.F / K) +
          (2.0 * beta * eta_cur / n) * (prev->F / K) +
          noise * beta * (1.0 - beta) * eta_cur * eta_prev * eta_prev +
          noise * (1.0 - beta) * (1.0 - beta) * eta_cur * eta_cur * eta_cur;
  }
  const double threshold = rhs * (1.0 + stat_slack(cur.seeds));
  return make_row("per_epoch_descent_bound", cur.t, lhs, rhs, threshold);
}

std::vector<CheckRow> lemma_b_checks(const TheorySnapshot* prev,
                                     const TheorySnapshot& cur, double eta_cur,
                                     double eta_prev, double beta, double L, int n) {
  if ((cur.t >= 2) != (prev != nullptr))
    throw std::invalid_argument("aggregate checks: previous snapshot required iff t >= 2");
  const double eps = stat_slack(cur.seeds);
  const double sigma_sq = cur.sigma_sq;
  std::vector<CheckRow> rows;

  // Full epoch gradient sum against the Bregman path sum.
  const double full_rhs = 4.0 * n * L * cur.C_mean;
  rows.push_back(make_row("full_sum_bound", cur.t, cur.B_mean[0], full_rhs,
                          full_rhs * (1.0 + eps)));

  // All tail sums together.
  double tail_lhs = 0.0;
  for (int i = 0; i < n; ++i) tail_lhs += cur.B_mean[i];
  const double tail_rhs = 4.0 * static_cast<double>(n) * n * L * cur.C_mean +
                          2.0 * static_cast<double>(n) * n * sigma_sq / 3.0;
  rows.push_back(
      make_row("tail_sum_total_bound", cur.t, tail_lhs, tail_rhs, tail_rhs * (1.0 + eps)));

  // Within-epoch drift measured from the epoch end.
  const double drift_rhs = 4.0 * L * L * eta_cur * eta_cur * cur.F +
                           (2.0 / 3.0) * eta_cur * eta_cur * (1.0 - beta) * L * sigma_sq;
  rows.push_back(make_row("drift_to_end_bound", cur.t, cur.sum_D_to_end_mean, drift_rhs,
                          drift_rhs * (1.0 + eps)));

  // Drift of the current epoch end against the previous epoch's path.
  if (cur.t >= 2) {
    const double cross_rhs =
        4.0 * L * L * eta_cur * eta_cur * cur.F +
        4.0 * L * L * eta_prev * eta_prev * prev->F +
        (2.0 / 3.0) * eta_prev * eta_prev * (1.0 - beta) * L * sigma_sq;
    rows.push_back(make_row("cross_epoch_drift_bound", cur.t, cur.sum_D_cross_mean,
                            cross_rhs, cross_rhs * (1.0 + eps)));
  }
  return rows;
}

double theorem1_rhs(double dist0_sq, const Schedule& sched, double beta, double alpha,
                    double L, double sigma_sq, int n, int T) {
  if (beta < 0.0 || beta >= 1.0)
    throw std::invalid_argument("momentum beta must lie in [0, 1)");
  if (T < 0) T = sched.T;
  const double sum_eta = sched.sum_eta(T);
  const double sum_eta3 = sched.sum_eta_cubed(T);
  return dist0_sq / (2.0 * (1.0 - beta) * sum_eta) +
         (4.0 * L * sigma_sq * (1.0 + alpha * beta)) / (6.0 * n * (1.0 - beta)) *
             (sum_eta3 / sum_eta);
}

double theorem2_rhs(double dist0_sq, const Schedule& sched, double beta, double alpha,
                    double mu, double L, double sigma_sq, int n, int T) {
  if (beta < 0.0 || beta >= 1.0)
    throw std::invalid_argument("momentum beta must lie in [0, 1)");
  if (mu <= 0.0)
    throw std::invalid_argument("strongly convex bound: mu must be positive");
  if (T < 0) T = sched.T;
  const double K = 1.0 + alpha * beta * (1.0 + mu * sched.max_eta());
  // log_tail[j] = sum_{t=j+1}^{T} log(1 + mu eta_t); full product at j = 0.
  std::vector<double> log_tail(T + 1, 0.0);
  for (int j = T - 1; j >= 0; --j)
    log_tail[j] = log_tail[j + 1] + std::log1p(mu * sched.eta(j + 1));
  double noise = 0.0;
  for (int j = 1; j <= T; ++j) {
    const double eta_j = sched.eta(j);
    noise += eta_j * eta_j * eta_j * (K - beta) * std::exp(-log_tail[j - 1]);
  }
  return dist0_sq / ((1.0 - beta) * std::exp(log_tail[0])) +
         4.0 * L * sigma_sq / (3.0 * n) * noise;
}

}  // namespace smg
