#include "smg/optimizers.hpp"

#include <chrono>

namespace smg {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Gradient logs hold n*d doubles per epoch; refuse sizes where that is
// clearly unreasonable instead of silently exhausting memory.
constexpr long long kLogSizeLimit = 10'000'000;

// Shared per-epoch bookkeeping for every optimizer: records, retained
// iterates, gradient logs, and the pre-drawn weighted output iterate.
class Instrument {
 public:
  Instrument(const FiniteSumProblem& problem, const std::vector<double>& etas,
             const RunOptions& opts, const Vector& w0, std::uint64_t draw_seed)
      : problem_(problem), opts_(opts), etas_(etas) {
    if (w0.size() != problem.dim())
      throw std::invalid_argument("run: w0 dimension mismatch");
    if (opts.w_star && opts.w_star->size() != problem.dim())
      throw std::invalid_argument("run: w_star dimension mismatch");
    if (opts.log_gradients &&
        static_cast<long long>(problem.n()) * problem.dim() > kLogSizeLimit)
      throw std::invalid_argument(
          "run: gradient logging disabled above n*d = 10^7; run a smaller instance");
    SplitMix64 rng(derive_stream(draw_seed, kStreamOutputDraw, 0));
    trace_.w_hat_epoch = weighted_index_draw(etas_, rng);
    trace_.w_start = w0;
    trace_.loss_start = problem.full_value(w0);
    trace_.records.reserve(etas_.size());
    if (opts.keep_iterates) trace_.iterates.push_back(w0);
    if (trace_.w_hat_epoch == 0) trace_.w_hat = w0;
  }

  // Call once per epoch with the epoch-end iterate.
  void epoch_done(int t, const Vector& w, Clock::time_point started) {
    EpochRecord rec;
    rec.t = t;
    rec.eta = etas_[t - 1];
    rec.loss = problem_.full_value(w);
    if (opts_.w_star) rec.dist_sq = (w - *opts_.w_star).squaredNorm();
    rec.time_ms = ms_since(started);
    if (opts_.keep_iterates) trace_.iterates.push_back(w);
    if (t == trace_.w_hat_epoch) trace_.w_hat = w;
    trace_.records.push_back(rec);
    if (opts_.on_epoch) opts_.on_epoch(rec);
  }

  void add_log(EpochLog log) { trace_.logs.push_back(std::move(log)); }

  RunTrace finish(Vector w_final, Vector m_final) {
    trace_.w_final = std::move(w_final);
    trace_.m_final = std::move(m_final);
    return std::move(trace_);
  }

 private:
  const FiniteSumProblem& problem_;
  const RunOptions& opts_;
  std::vector<double> etas_;
  RunTrace trace_;
};

void check_perms(const FiniteSumProblem& problem, const PermutationSource& perms) {
  if (perms.n != problem.n())
    throw std::invalid_argument("run: permutation source built for n = " +
                                std::to_string(perms.n) + ", problem has n = " +
                                std::to_string(problem.n()));
}

void check_lr(double lr) {
  if (lr <= 0.0) throw std::invalid_argument("run: learning rate must be positive");
}

void check_finite(const Vector& w, int t, int i) {
  if (!w.allFinite()) throw DivergenceError(t, i);
}

}  // namespace

RunTrace smg_run(const FiniteSumProblem& problem, const Schedule& sched, double beta,
                 const PermutationSource& perms, const Vector& w0,
                 const RunOptions& opts) {
  if (beta < 0.0 || beta >= 1.0)
    throw std::invalid_argument("momentum beta must lie in [0, 1)");
  check_perms(problem, perms);
  const int n = problem.n();
  Instrument inst(problem, sched.etas, opts, w0, perms.seed);

  Vector w = w0;
  Vector m_tilde = Vector::Zero(problem.dim());  // epoch-averaged gradient memory
  Vector m_anchor(problem.dim()), v(problem.dim()), g(problem.dim()), m(problem.dim());
  for (int t = 1; t <= sched.T; ++t) {
    const auto started = Clock::now();
    const double step = sched.eta(t) / n;
    const auto perm = perms.permutation(t);
    m_anchor = m_tilde;
    v.setZero();
    EpochLog log;
    if (opts.log_gradients) {
      log.t = t;
      log.eta = sched.eta(t);
      log.w_start = w;
      log.m_anchor = m_anchor;
      log.perm = perm;
      log.grads.reserve(n);
    }
    for (int i = 0; i < n; ++i) {
      problem.component_grad(w, perm[i], g);
      if (opts.log_gradients) log.grads.push_back(g);
      m = beta * m_anchor + (1.0 - beta) * g;
      v += g / n;
      w -= step * m;
      check_finite(w, t, i);
    }
    m_tilde = v;
    if (opts.log_gradients) {
      log.w_end = w;
      inst.add_log(std::move(log));
    }
    inst.epoch_done(t, w, started);
  }
  return inst.finish(std::move(w), std::move(m_tilde));
}

RunTrace shuffling_sgd_run(const FiniteSumProblem& problem, const Schedule& sched,
                           const PermutationSource& perms, const Vector& w0,
                           const RunOptions& opts) {
  check_perms(problem, perms);
  const int n = problem.n();
  Instrument inst(problem, sched.etas, opts, w0, perms.seed);

  Vector w = w0;
  Vector g(problem.dim());
  for (int t = 1; t <= sched.T; ++t) {
    const auto started = Clock::now();
    const double step = sched.eta(t) / n;
    const auto perm = perms.permutation(t);
    EpochLog log;
    if (opts.log_gradients) {
      log.t = t;
      log.eta = sched.eta(t);
      log.w_start = w;
      log.m_anchor = Vector::Zero(problem.dim());
      log.perm = perm;
      log.grads.reserve(n);
    }
    for (int i = 0; i < n; ++i) {
      problem.component_grad(w, perm[i], g);
      if (opts.log_gradients) log.grads.push_back(g);
      w -= step * g;
      check_finite(w, t, i);
    }
    if (opts.log_gradients) {
      log.w_end = w;
      inst.add_log(std::move(log));
    }
    inst.epoch_done(t, w, started);
  }
  return inst.finish(std::move(w), Vector::Zero(problem.dim()));
}

RunTrace sgdm_run(const FiniteSumProblem& problem, double lr, double beta, int T,
                  const PermutationSource& perms, const Vector& w0,
                  const RunOptions& opts) {
  check_lr(lr);
  if (beta < 0.0 || beta >= 1.0)
    throw std::invalid_argument("momentum beta must lie in [0, 1)");
  if (T < 1) throw std::invalid_argument("run: T must be >= 1");
  check_perms(problem, perms);
  const int n = problem.n();
  Instrument inst(problem, std::vector<double>(T, lr), opts, w0, perms.seed);

  Vector w = w0;
  Vector m = Vector::Zero(problem.dim());  // persists across epochs
  Vector g(problem.dim());
  for (int t = 1; t <= T; ++t) {
    const auto started = Clock::now();
    const auto perm = perms.permutation(t);
    for (int i = 0; i < n; ++i) {
      problem.component_grad(w, perm[i], g);
      m = beta * m + g;
      w -= lr * m;
      check_finite(w, t, i);
    }
    inst.epoch_done(t, w, started);
  }
  return inst.finish(std::move(w), Vector::Zero(problem.dim()));
}

RunTrace adam_run(const FiniteSumProblem& problem, const AdamParams& params, int T,
                  const PermutationSource& perms, const Vector& w0,
                  const RunOptions& opts) {
  check_lr(params.lr);
  if (params.beta1 < 0.0 || params.beta1 >= 1.0 || params.beta2 < 0.0 ||
      params.beta2 >= 1.0)
    throw std::invalid_argument("adam: moment decays must lie in [0, 1)");
  if (params.eps <= 0.0) throw std::invalid_argument("adam: eps must be positive");
  if (T < 1) throw std::invalid_argument("run: T must be >= 1");
  check_perms(problem, perms);
  const int n = problem.n();
  Instrument inst(problem, std::vector<double>(T, params.lr), opts, w0, perms.seed);

  Vector w = w0;
  Vector m = Vector::Zero(problem.dim());
  Vector v = Vector::Zero(problem.dim());
  Vector g(problem.dim());
  long long step_count = 0;
  for (int t = 1; t <= T; ++t) {
    const auto started = Clock::now();
    const auto perm = perms.permutation(t);
    for (int i = 0; i < n; ++i) {
      problem.component_grad(w, perm[i], g);
      ++step_count;
      m = params.beta1 * m + (1.0 - params.beta1) * g;
      v = params.beta2 * v + (1.0 - params.beta2) * g.cwiseProduct(g);
      const double c1 = 1.0 - std::pow(params.beta1, static_cast<double>(step_count));
      const double c2 = 1.0 - std::pow(params.beta2, static_cast<double>(step_count));
      w.array() -=
          params.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + params.eps);
      check_finite(w, t, i);
    }
    inst.epoch_done(t, w, started);
  }
  return inst.finish(std::move(w), Vector::Zero(problem.dim()));
}

RunTrace iid_sgd_run(const FiniteSumProblem& problem, double lr, int T,
                     std::uint64_t seed, const Vector& w0, const RunOptions& opts) {
  check_lr(lr);
  if (T < 1) throw std::invalid_argument("run: T must be >= 1");
  const int n = problem.n();
  Instrument inst(problem, std::vector<double>(T, lr), opts, w0, seed);

  Vector w = w0;
  Vector g(problem.dim());
  for (int t = 1; t <= T; ++t) {
    const auto started = Clock::now();
    SplitMix64 rng(derive_stream(seed, kStreamIidSampling,
                                 static_cast<std::uint64_t>(t)));
    for (int i = 0; i < n; ++i) {
      const auto idx = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      problem.component_grad(w, idx, g);
      w -= lr * g;
      check_finite(w, t, i);
    }
    inst.epoch_done(t, w, started);
  }
  return inst.finish(std::move(w), Vector::Zero(problem.dim()));
}

int weighted_index_draw(const std::vector<double>& weights, SplitMix64& rng) {
  if (weights.empty()) throw std::invalid_argument("draw: empty weight list");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("draw: weights must be positive");
    total += w;
  }
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(weights.size()) - 1;  // u == total after rounding
}

std::pair<int, Vector> sample_output_iterate(const RunTrace& trace, SplitMix64& rng) {
  if (trace.iterates.size() != trace.records.size() + 1)
    throw std::invalid_argument("sample: trace did not keep its iterates");
  std::vector<double> weights(trace.records.size());
  for (std::size_t t = 0; t < trace.records.size(); ++t)
    weights[t] = trace.records[t].eta;
  const int idx = weighted_index_draw(weights, rng);
  return {idx, trace.iterates[idx]};
}

double eta_weighted_gap(const RunTrace& trace, double f_star) {
  double total = 0.0, acc = 0.0;
  for (std::size_t t = 0; t < trace.records.size(); ++t) {
    const double prev_loss = t == 0 ? trace.loss_start : trace.records[t - 1].loss;
    acc += trace.records[t].eta * (prev_loss - f_star);
    total += trace.records[t].eta;
  }
  if (total <= 0.0) throw std::invalid_argument("gap: empty trace");
  return acc / total;
}

}  // namespace smg
