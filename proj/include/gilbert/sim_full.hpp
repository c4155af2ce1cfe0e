#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <gmpxx.h>

#include "gilbert/analytic_recurrence.hpp"
#include "gilbert/rng.hpp"

namespace gilbert {

enum class SeedKind { H, V };
enum class Compass { east, north, west, south };

const char* to_string(SeedKind k);
const char* to_string(Compass c);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Seed {
  Point position;
  SeedKind kind = SeedKind::H;
};

/// The recursive blocking test on a fixed seed set. Answers for seeds in
/// the set are memoised per direction as an interval of distances known to
/// be clear and a distance from which the ray is known to be blocked, so a
/// seed added later must lie outside every square already examined (true
/// for the nested-square construction and for static sets).
class BlockResolver {
 public:
  BlockResolver() = default;
  explicit BlockResolver(std::span<const Seed> seeds);

  std::size_t add(const Seed& s);
  const std::vector<Seed>& seeds() const { return seeds_; }
  void clear();

  /// Is the ray from seed `index` in direction u blocked within distance d?
  bool blocked(std::size_t index, double d, Compass u);

  /// Same for a seed that is not in the set (the test seed).
  bool blocked(const Seed& s, double d, Compass u);

  std::uint64_t calls() const { return calls_; }

 private:
  struct Memo {
    std::array<double, 4> clear_to{-1.0, -1.0, -1.0, -1.0};
    std::array<double, 4> blocked_from;
    Memo();
  };

  bool search(const Seed& s, std::optional<std::size_t> self, double d, Compass u, int depth);

  std::vector<Seed> seeds_;
  std::vector<Memo> memo_;
  std::uint64_t calls_ = 0;
};

/// block(s*, d, u) against an arbitrary seed set.
bool block(const Seed& s_star, double d, Compass u, std::span<const Seed> seeds);

/// Outcome of one nested-square episode. blocking_index is absent when the
/// cap was reached with the test ray still unblocked.
struct EpisodeRecord {
  std::optional<int> blocking_index;
  int squares_created = 0;
};

/// One episode for an east-growing test ray at the apex. The construction
/// is scale free, so it runs at unit intensity; lambda only rescales lengths.
EpisodeRecord run_episode(RandomStream& rng, double q, int n_cap);

struct FullSimConfig {
  mpq_class q{1, 2};
  double lambda = 1.0;
  std::uint64_t episodes = 1'000'000;
  int n_cap = 2048;
  std::uint64_t master_seed = 1;
  int threads = 0;

  void validate() const;
};

/// Histogram of blocking indices, which is sufficient for every estimate
/// below. h_hat(n) = #(n* > n) / N for n = 0..n_cap.
struct HHatEstimate {
  mpq_class q;
  double lambda = 1.0;
  int n_cap = 0;
  std::uint64_t episodes = 0;
  std::vector<std::uint64_t> blocked_at;  // index n*: count, n* = 1..n_cap
  std::uint64_t capped = 0;
  std::uint64_t squares_sum = 0;
  std::uint64_t squares_sq_sum = 0;
  int max_squares = 0;

  double h_hat(int n) const;
  double h_hat_se(int n) const;
  std::vector<double> h_hat_all() const;
  double mean_squares() const;
  double mean_squares_se() const;
};

/// Episode i uses RandomStream(master_seed, i); the histogram is an exact
/// integer merge so the result does not depend on the thread count.
HHatEstimate estimate(const FullSimConfig& cfg);

struct LengthEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  bool truncated = false;  // some episodes hit the cap, so the tail is missing
};

/// E(L) = (1/(2 sqrt(2 lambda))) sum_n h_n Gamma(n+1/2)/n!, with the
/// standard error of the per-episode sum g_i = sum_{n < n*_i} c_n.
LengthEstimate mean_length(const HHatEstimate& est, double lambda);

/// Ray-length law implied by an estimate:
///   1 - F(ell) = sum_{n <= n_cap} h_n (2 lambda ell^2)^n e^{-2 lambda ell^2}/n!
/// and its exact derivative. tail_bound covers the terms beyond n_cap.
class FullLengthLaw {
 public:
  FullLengthLaw(const HHatEstimate& est, double lambda);
  SeriesValue cdf(double ell) const;
  SeriesValue pdf(double ell) const;
  // Monte Carlo standard errors of the two, from the per-episode functionals
  // sum_{n < n*} p_n(2 lambda ell^2) and 4 lambda ell p_{n*-1}(2 lambda ell^2)
  double cdf_se(double ell) const;
  double pdf_se(double ell) const;

 private:
  double functional_se(double ell, bool density) const;

  std::vector<double> h_;
  std::vector<std::uint64_t> counts_;  // episodes with n* = k, k = 1..n_cap+1 (capped last)
  double lambda_;
  int n_cap_;
};

SeriesValue full_cdf(const HHatEstimate& est, double lambda, double ell);
SeriesValue full_pdf(const HHatEstimate& est, double lambda, double ell);

struct FractionEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Brute-force h_n: n uniform seeds in the square with diagonal from (0,0)
/// to (2,0), test ray from the western corner over half the diagonal.
FractionEstimate naive_h_hat(int n, std::uint64_t reps, double q, std::uint64_t master_seed,
                             int threads = 0);

/// Density of the sum of two independent ray lengths at each grid point.
std::vector<double> line_length_distribution(const HHatEstimate& est, double lambda,
                                             std::span<const double> grid);

/// Exact Taylor coefficients of the survival functions about ell = 0 for
/// ell^0, ell^2, ell^4, ell^6: half model at lambda = 2 from the recurrence,
/// full model at lambda = 1 from h_0..h_3 = 1, 3/4, 7/12, 7/15.
struct TaylorComparison {
  std::vector<mpq_class> half;
  std::vector<mpq_class> full;
};

TaylorComparison taylor_check();

/// Exact full-model values at q = 1/2 for n = 0..3.
std::vector<mpq_class> full_model_exact_h();

}  // namespace gilbert
