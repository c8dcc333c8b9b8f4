#pragma once

// Paired bootstrap resampling over per-sentence count triples, for deciding
// whether one system's corpus F0.5 beats another's by more than resampling
// noise. Both systems must be scored against the same gold, so the triples
// are paired by sentence.
//
// Each resample draws n sentence indices with replacement and recomputes both
// corpus F0.5 values from the summed triples. p_value is the fraction of
// resamples in which the full-data winner fails to win (ties count as
// failing). Identical inputs give delta 0, p_value 1 and never significance.
//
// When the number of distinct ordered resamples n^n is no larger than the
// requested sample count, all of them are enumerated instead of sampled; the
// p_value is then exact. Otherwise resample r draws from an RNG stream keyed
// (seed, r), making the estimate independent of thread count and run order.

#include <cstdint>
#include <thread>
#include <vector>

#include "gectk/errors.hpp"
#include "gectk/rng.hpp"
#include "gectk/score.hpp"

namespace gectk {

struct BootstrapResult {
  double delta_f_half = 0.0;  // full-data F0.5(A) - F0.5(B)
  double p_value = 1.0;
  double alpha = 0.05;
  bool significant = false;
  bool exhaustive = false;    // all n^n resamples enumerated
  std::uint64_t samples = 0;  // resamples actually evaluated
};

namespace detail {

inline double f_half_from_triples(const std::vector<SentenceCounts>& counts,
                                  const std::vector<std::size_t>& idx) {
  SentenceCounts sum;
  for (std::size_t i : idx) {
    sum.tp += counts[i].tp;
    sum.fp += counts[i].fp;
    sum.fn += counts[i].fn;
  }
  return f_half_of_counts(sum);
}

// n^n capped so the comparison against the sample budget cannot overflow
inline std::uint64_t ordered_resample_count(std::uint64_t n, std::uint64_t cap) {
  if (n == 0) return 0;
  std::uint64_t total = 1;
  for (std::uint64_t i = 0; i < n; ++i) {
    if (total > cap / n) return cap + 1;
    total *= n;
  }
  return total;
}

}  // namespace detail

inline BootstrapResult paired_bootstrap(const std::vector<SentenceCounts>& a,
                                        const std::vector<SentenceCounts>& b,
                                        std::uint64_t samples, double alpha,
                                        std::uint64_t seed, int threads = 1) {
  if (a.size() != b.size())
    throw LengthMismatch("per-sentence counts differ in length: " +
                         std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  if (a.empty()) throw LengthMismatch("nothing to compare: no sentences");
  if (samples == 0) throw Error("sample count must be positive");

  const std::size_t n = a.size();
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;

  BootstrapResult result;
  result.alpha = alpha;
  result.delta_f_half = detail::f_half_from_triples(a, all) -
                        detail::f_half_from_triples(b, all);
  if (result.delta_f_half == 0.0) {
    result.p_value = 1.0;
    result.significant = false;
    result.samples = 0;
    return result;
  }
  const bool a_wins = result.delta_f_half > 0.0;

  auto resample_upset = [&](const std::vector<std::size_t>& idx) {
    double fa = detail::f_half_from_triples(a, idx);
    double fb = detail::f_half_from_triples(b, idx);
    return a_wins ? fa <= fb : fb <= fa;
  };

  std::uint64_t exhaustive_total =
      detail::ordered_resample_count(n, samples);
  if (exhaustive_total <= samples) {
    // odometer over all ordered index tuples
    std::vector<std::size_t> idx(n, 0);
    std::uint64_t upsets = 0;
    for (std::uint64_t r = 0; r < exhaustive_total; ++r) {
      if (resample_upset(idx)) ++upsets;
      for (std::size_t d = 0; d < n; ++d) {
        if (++idx[d] < n) break;
        idx[d] = 0;
      }
    }
    result.exhaustive = true;
    result.samples = exhaustive_total;
    result.p_value =
        static_cast<double>(upsets) / static_cast<double>(exhaustive_total);
  } else {
    if (threads <= 0)
      threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::uint64_t> upsets_per(threads, 0);
    auto run = [&](int t) {
      std::vector<std::size_t> idx(n);
      std::uint64_t local = 0;
      for (std::uint64_t r = t; r < samples; r += threads) {
        Rng rng(seed, r);
        for (std::size_t i = 0; i < n; ++i)
          idx[i] = static_cast<std::size_t>(rng.below(n));
        if (resample_upset(idx)) ++local;
      }
      upsets_per[t] = local;
    };
    if (threads > 1) {
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t) pool.emplace_back(run, t);
      for (std::thread& th : pool) th.join();
    } else {
      run(0);
    }
    std::uint64_t upsets = 0;
    for (std::uint64_t u : upsets_per) upsets += u;
    result.samples = samples;
    result.p_value = static_cast<double>(upsets) / static_cast<double>(samples);
  }
  result.significant = result.p_value < alpha;
  return result;
}

// convenience wrapper: scores both systems, then bootstraps their triples
inline BootstrapResult compare_systems(const std::vector<M2Record>& gold,
                                       const std::vector<std::string>& hyp_a,
                                       const std::vector<std::string>& hyp_b,
                                       std::uint64_t samples, double alpha,
                                       std::uint64_t seed, int threads = 1,
                                       ScoreReport* report_a = nullptr,
                                       ScoreReport* report_b = nullptr) {
  ScoreOptions opt;
  opt.threads = threads;
  ScoreReport ra = score(gold, hyp_a, opt);
  ScoreReport rb = score(gold, hyp_b, opt);
  BootstrapResult result = paired_bootstrap(ra.per_sentence, rb.per_sentence,
                                            samples, alpha, seed, threads);
  if (report_a) *report_a = std::move(ra);
  if (report_b) *report_b = std::move(rb);
  return result;
}

}  // namespace gectk
