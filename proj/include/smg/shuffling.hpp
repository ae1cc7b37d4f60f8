#pragma once

#include <vector>

#include "smg/problems.hpp"

namespace smg {

// How component order is chosen each epoch.
enum class Strategy {
  RandomReshuffling,    // fresh uniform permutation per epoch
  SingleShuffling,      // one uniform permutation drawn at epoch 1, reused
  IncrementalGradient,  // fixed ascending order
};

Strategy strategy_from_name(const std::string& name);  // "rr" | "ss" | "ig"
std::string strategy_name(Strategy s);

// Stateless permutation stream: permutation(t) depends only on (seed, t, n,
// strategy), so epochs can be regenerated in any order. Output is 0-based
// component order: perm[i] is the component used at inner step i.
struct PermutationSource {
  Strategy strategy = Strategy::RandomReshuffling;
  std::uint64_t seed = 0;
  int n = 0;

  std::vector<int> permutation(int t) const;
};

// Sampling-without-replacement moments for a finite vector population:
// the mean of k-subset means and the expected squared deviation
// E||X_bar_pi - X_bar||^2. Exact subset enumeration for n <= 8; Monte Carlo
// above that (sample count reported).
struct WithoutReplacementStats {
  Vector mean_of_subset_means;
  double expected_sq_deviation = 0.0;
  long samples = 0;  // enumerated subsets when exact, draws otherwise
  bool exact = false;
};
WithoutReplacementStats without_replacement_stats(const std::vector<Vector>& xs,
                                                  int k, std::uint64_t seed = 0,
                                                  long mc_samples = 200000);

// Closed form for the same deviation: (n-k)/(k(n-1)) * population variance
// (zero when n == 1 or k == n).
double without_replacement_variance(const std::vector<Vector>& xs, int k);

// Monte Carlo check of the permuted tail-sum bound at a certified minimizer:
// E||sum_{j=i}^{n-1} grad f(w*; pi(j))||^2 <= (n-i)*i/(n-1) * sigma^2.
// ok allows 3/sqrt(trials) relative statistical slack plus a small absolute
// floor for the i = 0 case, where both sides vanish.
struct TailBoundCheck {
  double empirical = 0.0;
  double bound = 0.0;
  long trials = 0;
  bool ok = false;
};
TailBoundCheck tail_gradient_bound_check(const FiniteSumProblem& problem,
                                         const Vector& w_star, int i, long trials,
                                         std::uint64_t seed = 0);

}  // namespace smg
