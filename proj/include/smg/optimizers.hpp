#pragma once

#include <functional>
#include <optional>

#include "smg/problems.hpp"
#include "smg/schedules.hpp"
#include "smg/shuffling.hpp"

namespace smg {

// Raised when an iterate stops being finite; carries the offending epoch and
// inner step so grid drivers can report the cell precisely.
struct DivergenceError : std::runtime_error {
  int t;
  int i;
  DivergenceError(int t_, int i_)
      : std::runtime_error("divergence at epoch " + std::to_string(t_) +
                           ", inner step " + std::to_string(i_)),
        t(t_), i(i_) {}
};

struct EpochRecord {
  int t = 0;
  double eta = 0.0;      // epoch learning rate (constant lr for the baselines)
  double loss = 0.0;     // F at the epoch-end iterate
  double dist_sq = std::numeric_limits<double>::quiet_NaN();  // to w* when known
  double time_ms = 0.0;
};

// Everything needed to replay one epoch exactly: start iterate, momentum
// anchor, component order, and the gradients in visit order.
struct EpochLog {
  int t = 0;
  double eta = 0.0;
  Vector w_start;
  Vector m_anchor;
  std::vector<int> perm;
  std::vector<Vector> grads;
  Vector w_end;
};

struct RunTrace {
  std::vector<EpochRecord> records;  // one per epoch
  std::vector<Vector> iterates;      // epoch-end iterates w_0..w_T when kept
  std::vector<EpochLog> logs;        // per-epoch gradient logs when enabled
  Vector w_start;
  Vector w_final;
  Vector m_final;       // epoch-averaged gradient memory at the horizon
  double loss_start = 0.0;
  Vector w_hat;         // weighted-random output iterate
  int w_hat_epoch = 0;  // w_hat == iterate after this many epochs (in [0, T-1])
};

struct RunOptions {
  bool keep_iterates = true;
  bool log_gradients = false;
  std::optional<Vector> w_star;  // fills dist_sq when provided
  std::function<void(const EpochRecord&)> on_epoch;
};

// Anchored-momentum shuffling run: the momentum mix uses one anchor per epoch
// (last epoch's mean gradient) and the inner step is eta_t / n. The returned
// w_hat is drawn from the epoch-start iterates with probability proportional
// to eta_t, using a stream derived from the permutation seed.
RunTrace smg_run(const FiniteSumProblem& problem, const Schedule& sched, double beta,
                 const PermutationSource& perms, const Vector& w0,
                 const RunOptions& opts = {});

// Plain shuffling SGD with the same step normalization and instrumentation;
// coincides with smg_run at beta = 0 coordinate for coordinate.
RunTrace shuffling_sgd_run(const FiniteSumProblem& problem, const Schedule& sched,
                           const PermutationSource& perms, const Vector& w0,
                           const RunOptions& opts = {});

// Heavy-ball SGD, per-step update m <- beta*m + g, w <- w - lr*m; the momentum
// buffer carries across epochs.
RunTrace sgdm_run(const FiniteSumProblem& problem, double lr, double beta, int T,
                  const PermutationSource& perms, const Vector& w0,
                  const RunOptions& opts = {});

struct AdamParams {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam applied in shuffled order; moment buffers and the step
// counter carry across epochs.
RunTrace adam_run(const FiniteSumProblem& problem, const AdamParams& params, int T,
                  const PermutationSource& perms, const Vector& w0,
                  const RunOptions& opts = {});

// With-replacement SGD: n uniform component draws per epoch.
RunTrace iid_sgd_run(const FiniteSumProblem& problem, double lr, int T,
                     std::uint64_t seed, const Vector& w0,
                     const RunOptions& opts = {});

// Draws an index in [0, T-1] with probability eta_{idx+1} / sum eta.
int weighted_index_draw(const std::vector<double>& weights, SplitMix64& rng);

// Fresh draw of the output iterate from a trace that kept its iterates.
std::pair<int, Vector> sample_output_iterate(const RunTrace& trace, SplitMix64& rng);

// Exact conditional expectation of F(w_hat) - f_star given the trace (the
// eta-weighted average over epoch-start iterates); same mean as sampling
// w_hat, with the draw noise integrated out.
double eta_weighted_gap(const RunTrace& trace, double f_star);

}  // namespace smg
