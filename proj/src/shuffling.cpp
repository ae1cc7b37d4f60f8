#include "smg/shuffling.hpp"

#include <bit>
#include <numeric>

namespace smg {

Strategy strategy_from_name(const std::string& name) {
  if (name == "rr") return Strategy::RandomReshuffling;
  if (name == "ss") return Strategy::SingleShuffling;
  if (name == "ig") return Strategy::IncrementalGradient;
  throw std::invalid_argument("unknown shuffling strategy '" + name +
                              "' (expected rr, ss, or ig)");
}

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::RandomReshuffling: return "rr";
    case Strategy::SingleShuffling: return "ss";
    case Strategy::IncrementalGradient: return "ig";
  }
  throw std::logic_error("unreachable");
}

std::vector<int> PermutationSource::permutation(int t) const {
  if (n <= 0) throw std::invalid_argument("permutation: n must be positive");
  if (t < 1) throw std::invalid_argument("permutation: epoch index starts at 1");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  if (strategy == Strategy::IncrementalGradient) return perm;
  const int counter = strategy == Strategy::SingleShuffling ? 1 : t;
  SplitMix64 rng(derive_stream(seed, kStreamPermutation,
                               static_cast<std::uint64_t>(counter)));
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

namespace {

void check_population(const std::vector<Vector>& xs, int k) {
  if (xs.empty()) throw std::invalid_argument("without-replacement: empty population");
  if (k < 1 || k > static_cast<int>(xs.size()))
    throw std::invalid_argument("without-replacement: k outside [1, n]");
  for (const auto& x : xs)
    if (x.size() != xs[0].size())
      throw std::invalid_argument("without-replacement: mixed dimensions");
}

}  // namespace

WithoutReplacementStats without_replacement_stats(const std::vector<Vector>& xs,
                                                  int k, std::uint64_t seed,
                                                  long mc_samples) {
  check_population(xs, k);
  const int n = static_cast<int>(xs.size());
  const auto d = xs[0].size();
  Vector full_mean = Vector::Zero(d);
  for (const auto& x : xs) full_mean += x;
  full_mean /= n;

  WithoutReplacementStats out;
  out.mean_of_subset_means = Vector::Zero(d);
  if (n <= 8) {
    out.exact = true;
    Vector subset_mean(d);
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      if (std::popcount(mask) != k) continue;
      subset_mean.setZero();
      for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) subset_mean += xs[i];
      subset_mean /= k;
      out.mean_of_subset_means += subset_mean;
      out.expected_sq_deviation += (subset_mean - full_mean).squaredNorm();
      ++out.samples;
    }
  } else {
    if (mc_samples < 1)
      throw std::invalid_argument("without-replacement: sample count must be positive");
    out.exact = false;
    SplitMix64 rng(seed);
    std::vector<int> order(n);
    Vector subset_mean(d);
    for (long s = 0; s < mc_samples; ++s) {
      std::iota(order.begin(), order.end(), 0);
      for (int i = 0; i < k; ++i) {  // partial Fisher-Yates: first k entries
        const auto j =
            i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(order[i], order[j]);
      }
      subset_mean.setZero();
      for (int i = 0; i < k; ++i) subset_mean += xs[order[i]];
      subset_mean /= k;
      out.mean_of_subset_means += subset_mean;
      out.expected_sq_deviation += (subset_mean - full_mean).squaredNorm();
      ++out.samples;
    }
  }
  out.mean_of_subset_means /= static_cast<double>(out.samples);
  out.expected_sq_deviation /= static_cast<double>(out.samples);
  return out;
}

double without_replacement_variance(const std::vector<Vector>& xs, int k) {
  check_population(xs, k);
  const int n = static_cast<int>(xs.size());
  if (n == 1 || k == n) return 0.0;
  Vector full_mean = Vector::Zero(xs[0].size());
  for (const auto& x : xs) full_mean += x;
  full_mean /= n;
  double pop_var = 0.0;
  for (const auto& x : xs) pop_var += (x - full_mean).squaredNorm();
  pop_var /= n;
  return static_cast<double>(n - k) / (static_cast<double>(k) * (n - 1)) * pop_var;
}

TailBoundCheck tail_gradient_bound_check(const FiniteSumProblem& problem,
                                         const Vector& w_star, int i, long trials,
                                         std::uint64_t seed) {
  const int n = problem.n();
  if (i < 0 || i > n)
    throw std::invalid_argument("tail bound: position outside [0, n]");
  if (trials < 1) throw std::invalid_argument("tail bound: trials must be positive");
  constexpr double kCertTol = 1e-8;
  if (problem.full_gradient(w_star).norm() > kCertTol)
    throw std::invalid_argument("tail bound: w_star is not a certified minimizer");

  std::vector<Vector> grads(n);
  double sigma_sq = 0.0;
  for (int j = 0; j < n; ++j) {
    grads[j] = problem.component_grad(w_star, j);
    sigma_sq += grads[j].squaredNorm();
  }
  sigma_sq /= n;

  TailBoundCheck out;
  out.trials = trials;
  out.bound = n > 1 ? static_cast<double>(n - i) * i / (n - 1.0) * sigma_sq : 0.0;
  PermutationSource perms{Strategy::RandomReshuffling, seed, n};
  Vector tail(problem.dim());
  for (long s = 0; s < trials; ++s) {
    const auto perm = perms.permutation(static_cast<int>(s) + 1);
    tail.setZero();
    for (int j = i; j < n; ++j) tail += grads[perm[j]];
    out.empirical += tail.squaredNorm();
  }
  out.empirical /= static_cast<double>(trials);
  // Absolute floor covers i = 0, where the tail is n * grad F(w*) and both
  // sides sit at certification noise.
  const double floor = (n * kCertTol) * (n * kCertTol);
  out.ok = out.empirical <= out.bound * (1.0 + 3.0 / std::sqrt(out.trials)) + floor;
  return out;
}

}  // namespace smg
