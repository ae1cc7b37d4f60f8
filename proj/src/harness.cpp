#include "smg/harness.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace smg {
namespace {

namespace fs = std::filesystem;

std::string csv_num(double v) { return std::isnan(v) ? "" : format_double(v); }

std::ofstream open_out(const std::string& path) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);  // byte-stable across platforms
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

struct Stat {
  double mean = 0.0;
  double se = 0.0;
};

Stat mean_se(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean_se: empty sample");
  double sum = 0.0;
  for (double x : xs) sum += x;
  Stat s;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() == 1) return s;
  double ss = 0.0;
  for (double x : xs) {
    double d = x - s.mean;
    ss += d * d;
  }
  s.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) /
                   static_cast<double>(xs.size()));
  return s;
}

// Seed-mean loss curve (and optional accuracy curve) for epochs 0..T.
std::vector<CurveRow> aggregate_curve(const std::vector<std::vector<double>>& losses,
                                      const std::vector<std::vector<double>>* accs) {
  std::vector<CurveRow> rows;
  if (losses.empty()) return rows;
  std::size_t len = losses.front().size();
  for (const auto& l : losses)
    if (l.size() != len) throw std::logic_error("aggregate_curve: ragged input");
  rows.resize(len);
  std::vector<double> col(losses.size());
  for (std::size_t e = 0; e < len; ++e) {
    for (std::size_t s = 0; s < losses.size(); ++s) col[s] = losses[s][e];
    Stat st = mean_se(col);
    rows[e].epoch = static_cast<int>(e);
    rows[e].mean_loss = st.mean;
    rows[e].stderr_ = st.se;
    if (accs) {
      double sum = 0.0;
      for (const auto& a : *accs) sum += a[e];
      rows[e].accuracy = sum / static_cast<double>(accs->size());
    }
  }
  return rows;
}

std::vector<double> loss_curve(const RunTrace& trace) {
  std::vector<double> out;
  out.reserve(trace.records.size() + 1);
  out.push_back(trace.loss_start);
  for (const auto& r : trace.records) out.push_back(r.loss);
  return out;
}

Vector resolve_minimizer(const FiniteSumProblem& problem, const Vector& w0) {
  if (auto w = problem.known_minimizer()) return *w;
  return solve_minimizer(problem, w0);
}

}  // namespace

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  if (workers <= 0) {
    unsigned hw = std::thread::hardware_concurrency();
    workers = hw > 0 ? static_cast<int>(hw) : 1;
  }
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  // lowest job index wins, so the surfaced error never depends on scheduling
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void write_curve_csv(const std::string& path, const std::vector<CurveRow>& rows) {
  auto out = open_out(path);
  out << "epoch,mean_loss,stderr,accuracy\n";
  for (const auto& r : rows)
    out << r.epoch << ',' << csv_num(r.mean_loss) << ',' << csv_num(r.stderr_)
        << ',' << csv_num(r.accuracy) << '\n';
}

void write_run_csv(const std::string& path, const RunTrace& trace) {
  auto out = open_out(path);
  out << "t,eta,loss,dist_sq,time_ms\n";
  for (const auto& r : trace.records)
    out << r.t << ',' << csv_num(r.eta) << ',' << csv_num(r.loss) << ','
        << csv_num(r.dist_sq) << ',' << csv_num(r.time_ms) << '\n';
}

void write_run_jsonl(const std::string& path, const RunTrace& trace) {
  auto out = open_out(path);
  for (const auto& r : trace.records) {
    nlohmann::ordered_json j;
    j["t"] = r.t;
    j["eta"] = r.eta;
    j["loss"] = r.loss;
    if (std::isnan(r.dist_sq))
      j["dist_sq"] = nullptr;
    else
      j["dist_sq"] = r.dist_sq;
    j["time_ms"] = r.time_ms;
    out << j.dump() << '\n';
  }
}

void write_check_csv(const std::string& path, const std::vector<CheckRow>& rows) {
  auto out = open_out(path);
  out << "check,t,lhs,rhs,slack,ok\n";
  for (const auto& r : rows)
    out << r.name << ',' << r.t << ',' << csv_num(r.lhs) << ',' << csv_num(r.rhs)
        << ',' << csv_num(r.threshold - r.lhs) << ',' << (r.ok ? 1 : 0) << '\n';
}

BuiltSchedule build_feasible_constant_convex(int T, int n, double gamma, double L,
                                             double beta) {
  double cap = max_feasible_eta(L, beta, 0.0, 1.0);
  double gamma_cap = cap * std::cbrt(static_cast<double>(T)) /
                     std::cbrt(static_cast<double>(n));
  BuiltSchedule out;
  out.gamma_requested = gamma;
  out.gamma_effective = (gamma <= 0.0 || gamma > gamma_cap) ? gamma_cap : gamma;
  out.scaled = out.gamma_effective != gamma;
  out.schedule = constant_convex(T, n, out.gamma_effective);
  return out;
}

BuiltSchedule build_feasible_constant_strongly_convex(int T, int n, double gamma,
                                                      double L, double beta,
                                                      double mu) {
  double cap = max_feasible_eta(L, beta, mu, 1.0);
  double lg = std::log(std::sqrt(static_cast<double>(n)) * static_cast<double>(T));
  if (!(lg > 0.0))
    throw std::invalid_argument("strongly convex schedule needs sqrt(n)*T > 1");
  double gamma_cap = cap * static_cast<double>(T) / lg;
  BuiltSchedule out;
  out.gamma_requested = gamma;
  out.gamma_effective = (gamma <= 0.0 || gamma > gamma_cap) ? gamma_cap : gamma;
  out.scaled = out.gamma_effective != gamma;
  out.schedule = constant_strongly_convex(T, n, out.gamma_effective);
  return out;
}

BuiltSchedule build_feasible_exponential(int T, double eta0, double rho, double L,
                                         double beta, double mu_for_K) {
  double alpha = std::pow(rho, 1.0 / static_cast<double>(T));
  double cap = max_feasible_eta(L, beta, mu_for_K, alpha);
  double eta0_cap = cap / alpha;  // the largest rate is eta_1 = eta0 * alpha
  BuiltSchedule out;
  out.gamma_requested = eta0;
  out.gamma_effective = (eta0 <= 0.0 || eta0 > eta0_cap) ? eta0_cap : eta0;
  out.scaled = out.gamma_effective != eta0;
  out.schedule = exponential_schedule(T, out.gamma_effective, rho);
  return out;
}

RateFit rate_fit(const std::vector<double>& xs, const std::vector<double>& ys,
                 const std::function<double(double)>& correction) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("rate_fit: mismatched series lengths");
  if (xs.size() < 4)
    throw std::invalid_argument("rate_fit: need at least 4 points");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1]))
      throw std::invalid_argument("rate_fit: grid must be strictly increasing");
  RateFit fit;
  fit.xs = xs;
  fit.ys = ys;
  fit.ys_corrected.resize(ys.size());
  std::vector<double> lx(xs.size()), ly(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double c = correction ? correction(xs[i]) : 1.0;
    if (!(c > 0.0)) throw std::domain_error("rate_fit: correction must be positive");
    double y = ys[i] / c;
    fit.ys_corrected[i] = y;
    if (!(xs[i] > 0.0) || !(y > 0.0))
      throw std::domain_error("rate_fit: log-log fit needs positive data");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(y);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(lx.size());
  my /= static_cast<double>(lx.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::domain_error("rate_fit: degenerate x series");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / static_cast<double>(lx.size()));
  return fit;
}

namespace {

// Shared body of the two sweeps; metric_of extracts the per-seed scalar.
SweepOutcome sweep_impl(
    const FiniteSumProblem& problem, double beta, double gamma,
    const std::vector<int>& horizons, int seeds, std::uint64_t base_seed,
    const Vector& w0, int workers, bool strongly_convex) {
  if (horizons.empty()) throw std::invalid_argument("sweep: no horizons");
  if (seeds < 2) throw std::invalid_argument("sweep: need at least 2 seeds");
  const int n = problem.n();
  if (horizons.front() < 1)
    throw std::invalid_argument("sweep: horizons must be >= 1");
  for (std::size_t i = 1; i < horizons.size(); ++i)
    if (horizons[i] <= horizons[i - 1])
      throw std::invalid_argument("sweep: horizons must be strictly increasing");
  const int t_min = horizons.front();
  SweepOutcome out;
  Vector w_star = resolve_minimizer(problem, w0);
  out.L = problem.smoothness();
  out.mu = problem.strong_convexity();
  out.sigma_sq = sigma_star(problem, w_star);
  out.f_star = problem.full_value(w_star);
  out.dist0_sq = (w0 - w_star).squaredNorm();
  if (strongly_convex && !(out.mu > 0.0))
    throw std::invalid_argument("sweep: problem is not strongly convex");

  // One gamma across every horizon; the shortest horizon has the largest
  // rate, so feasibility there covers the rest.
  BuiltSchedule base =
      strongly_convex
          ? build_feasible_constant_strongly_convex(t_min, n, gamma, out.L, beta,
                                                    out.mu)
          : build_feasible_constant_convex(t_min, n, gamma, out.L, beta);
  out.gamma_requested = gamma;
  out.gamma_effective = base.gamma_effective;

  for (int T : horizons) {
    Schedule sched = strongly_convex
                         ? constant_strongly_convex(T, n, out.gamma_effective)
                         : constant_convex(T, n, out.gamma_effective);
    std::vector<double> metric(static_cast<std::size_t>(seeds));
    std::vector<std::vector<double>> losses(static_cast<std::size_t>(seeds));
    parallel_for(seeds, workers, [&](int s) {
      PermutationSource perms{Strategy::RandomReshuffling,
                              base_seed + static_cast<std::uint64_t>(s), n};
      RunOptions opts;
      opts.keep_iterates = false;
      opts.w_star = w_star;
      RunTrace tr = smg_run(problem, sched, beta, perms, w0, opts);
      metric[static_cast<std::size_t>(s)] =
          strongly_convex ? tr.records.back().dist_sq
                          : eta_weighted_gap(tr, out.f_star);
      losses[static_cast<std::size_t>(s)] = loss_curve(tr);
    });
    SweepPoint pt;
    pt.T = T;
    Stat st = mean_se(metric);
    pt.metric_mean = st.mean;
    pt.metric_se = st.se;
    pt.bound = strongly_convex
                   ? theorem2_rhs(out.dist0_sq, sched, beta, 1.0, out.mu, out.L,
                                  out.sigma_sq, n)
                   : theorem1_rhs(out.dist0_sq, sched, beta, 1.0, out.L,
                                  out.sigma_sq, n);
    pt.bound_ok = pt.metric_mean <= pt.bound + 3.0 * pt.metric_se;
    pt.curve = aggregate_curve(losses, nullptr);
    out.points.push_back(std::move(pt));
  }

  if (out.points.size() >= 4) {
    std::vector<double> xs, ys;
    xs.reserve(out.points.size());
    ys.reserve(out.points.size());
    for (const auto& pt : out.points) {
      xs.push_back(static_cast<double>(pt.T));
      ys.push_back(pt.metric_mean);
    }
    std::function<double(double)> correction;
    if (strongly_convex) {
      double root_n = std::sqrt(static_cast<double>(n));
      correction = [root_n](double T) {
        double lg = std::log(root_n * T);
        return lg * lg;
      };
    }
    out.fit = rate_fit(xs, ys, correction);
  }
  return out;
}

}  // namespace

SweepOutcome convex_rate_sweep(const FiniteSumProblem& problem, double beta,
                               double gamma, const std::vector<int>& horizons,
                               int seeds, std::uint64_t base_seed, const Vector& w0,
                               int workers) {
  return sweep_impl(problem, beta, gamma, horizons, seeds, base_seed, w0, workers,
                    false);
}

SweepOutcome strongly_convex_rate_sweep(const FiniteSumProblem& problem, double beta,
                                        double gamma, const std::vector<int>& horizons,
                                        int seeds, std::uint64_t base_seed,
                                        const Vector& w0, int workers) {
  return sweep_impl(problem, beta, gamma, horizons, seeds, base_seed, w0, workers,
                    true);
}

namespace {

RunTrace run_grid_cell(const FiniteSumProblem& problem, const GridCell& cell,
                       int epochs, const PermutationSource& perms, const Vector& w0,
                       const RunOptions& opts) {
  const int n = problem.n();
  double lr = cell.lr;
  if (!(lr > 0.0)) throw std::invalid_argument("grid: lr must be positive");
  if (cell.optimizer == "smg") {
    double beta = std::isnan(cell.beta) ? 0.5 : cell.beta;
    // eta_t = n * lr makes the inner step eta_t / n equal to lr
    return smg_run(problem, constant_schedule(epochs, lr * n), beta, perms, w0,
                   opts);
  }
  if (cell.optimizer == "ssgd")
    return shuffling_sgd_run(problem, constant_schedule(epochs, lr * n), perms, w0,
                             opts);
  if (cell.optimizer == "sgdm") {
    double beta = std::isnan(cell.beta) ? 0.9 : cell.beta;
    return sgdm_run(problem, lr, beta, epochs, perms, w0, opts);
  }
  if (cell.optimizer == "adam") {
    AdamParams params;
    params.lr = lr;
    return adam_run(problem, params, epochs, perms, w0, opts);
  }
  if (cell.optimizer == "sgd")
    return iid_sgd_run(problem, lr, epochs, perms.seed, w0, opts);
  throw std::invalid_argument("grid: unknown optimizer '" + cell.optimizer + "'");
}

}  // namespace

GridOutcome run_grid(const FiniteSumProblem& problem, const Dataset* accuracy_data,
                     const std::vector<GridCell>& cells, int epochs,
                     const std::vector<std::uint64_t>& seeds, Strategy strategy,
                     const Vector& w0, int workers) {
  if (cells.empty()) throw std::invalid_argument("grid: no cells");
  if (seeds.empty()) throw std::invalid_argument("grid: no seeds");
  if (epochs < 1) throw std::invalid_argument("grid: epochs must be >= 1");
  const int n = problem.n();
  const int nseed = static_cast<int>(seeds.size());

  struct Job {
    bool ok = false;
    std::string err;
    std::vector<double> losses;  // epochs 0..T
    std::vector<double> accs;    // epochs 0..T when accuracy_data is set
  };
  std::vector<Job> jobs(cells.size() * seeds.size());

  parallel_for(static_cast<int>(jobs.size()), workers, [&](int j) {
    const int c = j / nseed;
    const int s = j % nseed;
    PermutationSource perms{strategy, seeds[static_cast<std::size_t>(s)], n};
    RunOptions opts;
    opts.keep_iterates = accuracy_data != nullptr;
    Job& job = jobs[static_cast<std::size_t>(j)];
    try {
      RunTrace tr = run_grid_cell(problem, cells[static_cast<std::size_t>(c)],
                                  epochs, perms, w0, opts);
      job.losses = loss_curve(tr);
      if (accuracy_data) {
        job.accs.reserve(tr.iterates.size());
        for (const auto& w : tr.iterates)
          job.accs.push_back(binary_accuracy(*accuracy_data, w));
      }
      job.ok = true;
    } catch (const DivergenceError& e) {
      job.err = e.what();
    }
  });

  GridOutcome out;
  out.cells.resize(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    GridCellResult& res = out.cells[c];
    res.cell = cells[c];
    res.seeds_run = nseed;
    std::vector<std::vector<double>> losses, accs;
    std::vector<double> finals;
    for (int s = 0; s < nseed; ++s) {
      const Job& job = jobs[c * static_cast<std::size_t>(nseed) +
                            static_cast<std::size_t>(s)];
      if (!job.ok) {
        ++res.diverged_seeds;
        if (res.divergence_note.empty()) res.divergence_note = job.err;
        continue;
      }
      finals.push_back(job.losses.back());
      losses.push_back(job.losses);
      if (accuracy_data) accs.push_back(job.accs);
    }
    if (!finals.empty()) {
      Stat st = mean_se(finals);
      res.final_loss_mean = st.mean;
      res.final_loss_se = st.se;
      res.curve = aggregate_curve(losses, accuracy_data ? &accs : nullptr);
      if (accuracy_data) res.accuracy_mean = res.curve.back().accuracy;
    }
  }

  // best cell per optimizer: lowest mean final loss among fully surviving cells
  for (std::size_t c = 0; c < out.cells.size(); ++c) {
    GridCellResult& res = out.cells[c];
    if (res.diverged_seeds > 0) continue;
    bool best = true;
    for (std::size_t o = 0; o < out.cells.size(); ++o) {
      const GridCellResult& other = out.cells[o];
      if (other.cell.optimizer != res.cell.optimizer || other.diverged_seeds > 0)
        continue;
      if (other.final_loss_mean < res.final_loss_mean ||
          (other.final_loss_mean == res.final_loss_mean && o < c)) {
        best = o == c;
        if (!best) break;
      }
    }
    res.best = best;
  }
  return out;
}

void write_grid_summary_csv(const std::string& path, const GridOutcome& grid) {
  auto out = open_out(path);
  out << "optimizer,lr,final_loss,stderr,accuracy,diverged_seeds,best\n";
  for (const auto& res : grid.cells)
    out << res.cell.optimizer << ',' << csv_num(res.cell.lr) << ','
        << csv_num(res.final_loss_mean) << ',' << csv_num(res.final_loss_se) << ','
        << csv_num(res.accuracy_mean) << ',' << res.diverged_seeds << ','
        << (res.best ? 1 : 0) << '\n';
}

VerifyOutcome verify_bounds(const VerifySetup& setup) {
  if (!setup.problem) throw std::invalid_argument("verify: no problem");
  if (setup.seeds < 2) throw std::invalid_argument("verify: need at least 2 seeds");
  if (setup.strategy != Strategy::RandomReshuffling)
    throw std::invalid_argument(
        "verify: bound checks average over fresh permutations; use rr");
  const FiniteSumProblem& problem = *setup.problem;
  const int n = problem.n();
  const int T = setup.schedule.T;
  const int seeds = setup.seeds;

  VerifyOutcome out;
  Vector w_star =
      setup.w_star ? *setup.w_star : resolve_minimizer(problem, setup.w0);
  out.L = problem.smoothness();
  out.mu = problem.strong_convexity();
  out.sigma_sq = sigma_star(problem, w_star);
  out.f_star = problem.full_value(w_star);
  out.dist0_sq = (setup.w0 - w_star).squaredNorm();
  double alpha = setup.schedule.alpha;
  out.K = setup.K > 0.0 ? setup.K : 1.0 + alpha * setup.beta;

  struct SeedData {
    std::vector<EpochTheoryData> epochs;
    std::vector<double> dists;   // t = 0..T
    std::vector<double> losses;  // t = 0..T
    double mixture_gap = 0.0;
  };
  std::vector<SeedData> per_seed(static_cast<std::size_t>(seeds));

  parallel_for(seeds, setup.workers, [&](int s) {
    PermutationSource perms{Strategy::RandomReshuffling,
                            setup.base_seed + static_cast<std::uint64_t>(s), n};
    RunOptions opts;
    opts.keep_iterates = false;
    opts.log_gradients = true;
    opts.w_star = w_star;
    RunTrace tr = smg_run(problem, setup.schedule, setup.beta, perms, setup.w0,
                          opts);
    SeedData& sd = per_seed[static_cast<std::size_t>(s)];
    sd.dists.push_back(out.dist0_sq);
    sd.losses.push_back(tr.loss_start);
    for (const auto& r : tr.records) {
      sd.dists.push_back(r.dist_sq);
      sd.losses.push_back(r.loss);
    }
    sd.epochs.reserve(static_cast<std::size_t>(T));
    for (int t = 1; t <= T; ++t) {
      const EpochLog* prev =
          t >= 2 ? &tr.logs[static_cast<std::size_t>(t - 2)] : nullptr;
      sd.epochs.push_back(epoch_theory_data(
          problem, tr.logs[static_cast<std::size_t>(t - 1)], prev, w_star,
          setup.beta));
    }
    sd.mixture_gap = eta_weighted_gap(tr, out.f_star);
  });

  out.dist_mean.resize(static_cast<std::size_t>(T) + 1);
  out.dist_se.resize(static_cast<std::size_t>(T) + 1);
  out.gap_mean.resize(static_cast<std::size_t>(T) + 1);
  std::vector<double> col(static_cast<std::size_t>(seeds));
  for (int t = 0; t <= T; ++t) {
    for (int s = 0; s < seeds; ++s)
      col[static_cast<std::size_t>(s)] =
          per_seed[static_cast<std::size_t>(s)].dists[static_cast<std::size_t>(t)];
    Stat st = mean_se(col);
    out.dist_mean[static_cast<std::size_t>(t)] = st.mean;
    out.dist_se[static_cast<std::size_t>(t)] = st.se;
    for (int s = 0; s < seeds; ++s)
      col[static_cast<std::size_t>(s)] =
          per_seed[static_cast<std::size_t>(s)].losses[static_cast<std::size_t>(t)];
    out.gap_mean[static_cast<std::size_t>(t)] = mean_se(col).mean - out.f_star;
  }

  std::vector<EpochTheoryData> at_t(static_cast<std::size_t>(seeds));
  const TheorySnapshot* prev_snap = nullptr;
  for (int t = 1; t <= T; ++t) {
    for (int s = 0; s < seeds; ++s)
      at_t[static_cast<std::size_t>(s)] =
          per_seed[static_cast<std::size_t>(s)].epochs[static_cast<std::size_t>(t - 1)];
    out.snapshots.push_back(
        epoch_snapshot(at_t, prev_snap, setup.beta, out.sigma_sq));
    prev_snap = &out.snapshots.back();
  }

  for (int t = 1; t <= T && setup.lemma_rows; ++t) {
    const TheorySnapshot& cur = out.snapshots[static_cast<std::size_t>(t - 1)];
    const TheorySnapshot* prev =
        t >= 2 ? &out.snapshots[static_cast<std::size_t>(t - 2)] : nullptr;
    double eta_cur = setup.schedule.eta(t);
    double eta_prev = t >= 2 ? setup.schedule.eta(t - 1) : 0.0;
    out.rows.push_back(lemma1_check(
        prev, cur, out.dist_mean[static_cast<std::size_t>(t - 1)],
        out.dist_mean[static_cast<std::size_t>(t)],
        out.gap_mean[static_cast<std::size_t>(t)], eta_cur, eta_prev, setup.beta,
        out.K, out.L, n));
    auto b_rows = lemma_b_checks(prev, cur, eta_cur, eta_prev, setup.beta, out.L, n);
    out.rows.insert(out.rows.end(), b_rows.begin(), b_rows.end());
  }

  if (setup.theorem2_rows && out.mu > 0.0) {
    for (int t = 1; t <= T; ++t) {
      CheckRow row;
      row.name = "strongly_convex_distance_bound";
      row.t = t;
      row.lhs = out.dist_mean[static_cast<std::size_t>(t)];
      row.rhs = theorem2_rhs(out.dist0_sq, setup.schedule, setup.beta, alpha,
                             out.mu, out.L, out.sigma_sq, n, t);
      row.threshold = row.rhs + 3.0 * out.dist_se[static_cast<std::size_t>(t)];
      row.ok = row.lhs <= row.threshold;
      out.rows.push_back(row);
    }
  }

  if (setup.theorem1_row) {
    for (int s = 0; s < seeds; ++s)
      col[static_cast<std::size_t>(s)] =
          per_seed[static_cast<std::size_t>(s)].mixture_gap;
    Stat st = mean_se(col);
    CheckRow row;
    row.name = "convex_output_bound";
    row.t = T;
    row.lhs = st.mean;
    row.rhs = theorem1_rhs(out.dist0_sq, setup.schedule, setup.beta, alpha, out.L,
                           out.sigma_sq, n);
    row.threshold = row.rhs + 3.0 * st.se;
    row.ok = row.lhs <= row.threshold;
    out.rows.push_back(row);
  }

  for (const auto& row : out.rows) out.all_ok = out.all_ok && row.ok;
  return out;
}

Vector load_or_solve_minimizer(const FiniteSumProblem& problem,
                               const std::string& cache_path, const Vector& w0,
                               double tol) {
  if (fs::exists(cache_path)) {
    try {
      std::ifstream in(cache_path);
      nlohmann::json j;
      in >> j;
      auto coords = j.at("w").get<std::vector<double>>();
      if (static_cast<int>(coords.size()) == problem.dim()) {
        Vector w = Eigen::Map<const Vector>(coords.data(),
                                            static_cast<Eigen::Index>(coords.size()));
        if (problem.full_gradient(w).norm() <= tol) return w;
      }
    } catch (const std::exception&) {
      // unreadable or stale cache: fall through and re-solve
    }
  }
  Vector w = solve_minimizer(problem, w0, tol);
  nlohmann::ordered_json j;
  j["dim"] = problem.dim();
  j["tol"] = tol;
  j["grad_norm"] = problem.full_gradient(w).norm();
  j["w"] = std::vector<double>(w.data(), w.data() + w.size());
  auto out = open_out(cache_path);
  out << j.dump(2) << '\n';
  return w;
}

bool emit_report(const std::string& out_dir, const ReportInputs& inputs) {
  fs::create_directories(out_dir);
  fs::path dir(out_dir);
  for (const auto& [name, trace] : inputs.traces) {
    if (!trace) throw std::invalid_argument("report: null trace '" + name + "'");
    write_run_csv((dir / (name + ".csv")).string(), *trace);
    write_run_jsonl((dir / (name + ".jsonl")).string(), *trace);
  }
  for (const auto& [name, rows] : inputs.curves)
    write_curve_csv((dir / (name + ".csv")).string(), rows);
  if (!inputs.fits.empty()) {
    auto out = open_out((dir / "fits.csv").string());
    out << "name,slope,intercept,residual_rms\n";
    for (const auto& [name, fit] : inputs.fits)
      out << name << ',' << csv_num(fit.slope) << ',' << csv_num(fit.intercept)
          << ',' << csv_num(fit.residual_rms) << '\n';
  }
  write_check_csv((dir / "checks.csv").string(), inputs.checks);

  int failed = 0;
  for (const auto& row : inputs.checks) failed += row.ok ? 0 : 1;
  auto summary = open_out((dir / "summary.txt").string());
  summary << "traces: " << inputs.traces.size() << "\n";
  summary << "curves: " << inputs.curves.size() << "\n";
  for (const auto& [name, fit] : inputs.fits)
    summary << "fit " << name << ": slope " << format_double(fit.slope)
            << ", intercept " << format_double(fit.intercept) << ", residual_rms "
            << format_double(fit.residual_rms) << "\n";
  summary << "checks: " << inputs.checks.size() << " total, " << failed
          << " failed\n";
  for (const auto& row : inputs.checks)
    if (!row.ok)
      summary << "FAILED " << row.name << " t=" << row.t << " lhs "
              << format_double(row.lhs) << " > threshold "
              << format_double(row.threshold) << "\n";
  return failed == 0;
}

}  // namespace smg
