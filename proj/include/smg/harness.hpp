#pragma once

#include "smg/data.hpp"
#include "smg/theory.hpp"

namespace smg {

// Runs fn(0..count-1) on a worker pool with results written to caller-owned
// slots, so aggregation order never depends on scheduling. workers <= 0 means
// hardware concurrency.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

// ---- deterministic file emission ----------------------------------------

struct CurveRow {
  int epoch = 0;
  double mean_loss = 0.0;
  double stderr_ = 0.0;
  double accuracy = std::numeric_limits<double>::quiet_NaN();  // blank when NaN
};

// header: epoch,mean_loss,stderr,accuracy
void write_curve_csv(const std::string& path, const std::vector<CurveRow>& rows);
// header: t,eta,loss,dist_sq,time_ms
void write_run_csv(const std::string& path, const RunTrace& trace);
// one JSON object per epoch, same fields as the CSV
void write_run_jsonl(const std::string& path, const RunTrace& trace);
// header: check,t,lhs,rhs,slack,ok  (slack = threshold - lhs, ok iff >= 0)
void write_check_csv(const std::string& path, const std::vector<CheckRow>& rows);

// ---- schedules with feasibility auto-scaling -----------------------------

// Builds a gamma-parameterized schedule, shrinking gamma to the largest
// feasible value when the request violates the step cap. gamma <= 0 asks for
// the largest feasible value outright. mu_for_K > 0 selects the strongly
// convex cap.
struct BuiltSchedule {
  Schedule schedule;
  double gamma_requested = 0.0;
  double gamma_effective = 0.0;
  bool scaled = false;
};
BuiltSchedule build_feasible_constant_convex(int T, int n, double gamma, double L,
                                             double beta);
BuiltSchedule build_feasible_constant_strongly_convex(int T, int n, double gamma,
                                                      double L, double beta,
                                                      double mu);
BuiltSchedule build_feasible_exponential(int T, double eta0, double rho, double L,
                                         double beta, double mu_for_K = 0.0);

// ---- power-law fits -------------------------------------------------------

struct RateFit {
  std::vector<double> xs, ys;        // raw inputs
  std::vector<double> ys_corrected;  // ys / correction(x)
  double slope = 0.0;                // log-log least squares
  double intercept = 0.0;            // in log space
  double residual_rms = 0.0;
};
RateFit rate_fit(const std::vector<double>& xs, const std::vector<double>& ys,
                 const std::function<double(double)>& correction = {});

// ---- rate sweeps over the horizon ---------------------------------------

struct SweepPoint {
  int T = 0;
  double metric_mean = 0.0;
  double metric_se = 0.0;
  double bound = 0.0;    // matching guarantee at this horizon
  bool bound_ok = false; // metric_mean <= bound + 3 * metric_se
  std::vector<CurveRow> curve;  // per-epoch seed-mean loss
};

struct SweepOutcome {
  std::vector<SweepPoint> points;
  double gamma_requested = 0.0;
  double gamma_effective = 0.0;
  double L = 0.0, mu = 0.0, sigma_sq = 0.0, dist0_sq = 0.0, f_star = 0.0;
  RateFit fit;  // filled only when the sweep has >= 4 horizons
};

// Gap metric E[F(w_hat_T) - F(w*)] (eta-weighted trace average) against the
// convex guarantee; one shared gamma across every horizon.
SweepOutcome convex_rate_sweep(const FiniteSumProblem& problem, double beta,
                               double gamma, const std::vector<int>& horizons,
                               int seeds, std::uint64_t base_seed, const Vector& w0,
                               int workers = 0);

// Final squared distance divided by log^2(sqrt(n) T) against the strongly
// convex guarantee.
SweepOutcome strongly_convex_rate_sweep(const FiniteSumProblem& problem, double beta,
                                        double gamma, const std::vector<int>& horizons,
                                        int seeds, std::uint64_t base_seed,
                                        const Vector& w0, int workers = 0);

// ---- learning-rate grids --------------------------------------------------

struct GridCell {
  std::string optimizer;  // smg | ssgd | sgdm | adam | sgd
  double lr = 0.0;        // per inner step for every optimizer
  double beta = std::numeric_limits<double>::quiet_NaN();  // NaN: default
};

struct GridCellResult {
  GridCell cell;
  int seeds_run = 0;
  int diverged_seeds = 0;
  std::string divergence_note;  // first failure, e.g. "divergence at epoch 3, ..."
  double final_loss_mean = std::numeric_limits<double>::quiet_NaN();
  double final_loss_se = std::numeric_limits<double>::quiet_NaN();
  double accuracy_mean = std::numeric_limits<double>::quiet_NaN();
  std::vector<CurveRow> curve;
  bool best = false;  // lowest mean loss among this optimizer's surviving cells
};

struct GridOutcome {
  std::vector<GridCellResult> cells;
};

// Runs every (cell, seed) job concurrently; a diverging cell is recorded and
// skipped in the best-cell ranking instead of aborting the grid. accuracy_data
// may be null (accuracy left blank).
GridOutcome run_grid(const FiniteSumProblem& problem,
                     const Dataset* accuracy_data, const std::vector<GridCell>& cells,
                     int epochs, const std::vector<std::uint64_t>& seeds,
                     Strategy strategy, const Vector& w0, int workers = 0);

// header: optimizer,lr,final_loss,stderr,accuracy,diverged_seeds,best
void write_grid_summary_csv(const std::string& path, const GridOutcome& grid);

// ---- bound verification pipeline -----------------------------------------

struct VerifySetup {
  const FiniteSumProblem* problem = nullptr;
  Schedule schedule;
  double beta = 0.0;
  int seeds = 0;
  std::uint64_t base_seed = 0;
  Vector w0;
  std::optional<Vector> w_star;  // solved/cached when absent
  double K = 0.0;                // <= 0: 1 + alpha*beta
  bool lemma_rows = true;
  bool theorem1_row = true;
  bool theorem2_rows = true;  // applied only when mu > 0
  Strategy strategy = Strategy::RandomReshuffling;  // must stay RR
  int workers = 0;
};

struct VerifyOutcome {
  std::vector<CheckRow> rows;
  bool all_ok = true;
  double K = 0.0, L = 0.0, mu = 0.0, sigma_sq = 0.0, f_star = 0.0, dist0_sq = 0.0;
  std::vector<TheorySnapshot> snapshots;          // t = 1..T
  std::vector<double> dist_mean, dist_se;         // index t = 0..T
  std::vector<double> gap_mean;                   // index t = 0..T
};

// Instrumented multi-seed anchored-momentum runs with every bound checked at
// every epoch. Requires the reshuffling strategy (the expectations being
// verified are over fresh permutations).
VerifyOutcome verify_bounds(const VerifySetup& setup);

// ---- minimizer cache -------------------------------------------------------

// Loads w from cache_path when it re-certifies at tol; otherwise solves by
// full-batch descent from w0 and rewrites the cache.
Vector load_or_solve_minimizer(const FiniteSumProblem& problem,
                               const std::string& cache_path, const Vector& w0,
                               double tol = 1e-10);

// ---- aggregate reporting ---------------------------------------------------

struct ReportInputs {
  std::vector<std::pair<std::string, const RunTrace*>> traces;  // name -> files
  std::vector<std::pair<std::string, std::vector<CurveRow>>> curves;
  std::vector<std::pair<std::string, RateFit>> fits;
  std::vector<CheckRow> checks;
};

// Writes trace CSV/JSONL pairs, one CSV per curve, fits.csv, checks.csv, and
// summary.txt under out_dir; returns true iff every check row passed
// (vacuously true when empty).
bool emit_report(const std::string& out_dir, const ReportInputs& inputs);

}  // namespace smg
