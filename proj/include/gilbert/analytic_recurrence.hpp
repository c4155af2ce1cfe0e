#pragma once

#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace gilbert {

/// Probabilities h_0..h_N that a test ray crosses the isosceles triangle
/// of the half model unblocked, given n uniform seeds, for H-proportion q.
/// Values are exact rationals; doubles are cached for series evaluation.
class HCoefficients {
 public:
  HCoefficients(mpq_class q, std::vector<mpq_class> values);

  const mpq_class& q() const { return q_; }
  const std::vector<mpq_class>& values() const { return values_; }
  std::span<const double> as_double() const { return doubles_; }
  std::size_t size() const { return values_.size(); }
  const mpq_class& operator[](std::size_t n) const { return values_[n]; }

 private:
  mpq_class q_;
  std::vector<mpq_class> values_;
  std::vector<double> doubles_;
};

struct SeriesEvalConfig {
  double lambda = 1.0;  // seeds per unit area
  int n_terms = 200;

  void validate() const;
};

/// A truncated series value together with a rigorous bound on what the
/// omitted terms could contribute (using h_n <= 1).
struct SeriesValue {
  double value = 0.0;
  double tail_bound = 0.0;
  bool truncated = false;  // tail_bound > kSeriesTailLimit
};

inline constexpr double kSeriesTailLimit = 1e-12;

/// Moment series have no rigorous tail bound from h_n <= 1 (the bound
/// diverges), so the tail is extrapolated from the decay of the last terms.
struct MomentSeries {
  double value = 0.0;          // the truncated partial sum
  double tail_estimate = 0.0;  // extrapolated remainder, +inf if divergent
  double decay_exponent = 0.0; // fitted p in term_n ~ n^{-p}
  bool converged = false;
};

/// Exact h_0..h_{n_max} from the double-sum recurrence. Throws
/// std::invalid_argument unless 0 <= q <= 1 and n_max >= 0.
HCoefficients compute_h(const mpq_class& q, int n_max);

/// F(ell) = 1 - sum_{n<N} h_n (lambda ell^2/2)^n e^{-lambda ell^2/2} / n!.
SeriesValue cdf(const HCoefficients& h, const SeriesEvalConfig& cfg,
                double ell);

/// Exact derivative of the truncated cdf.
SeriesValue pdf(const HCoefficients& h, const SeriesEvalConfig& cfg,
                double ell);

/// E(L) = (2 lambda)^{-1/2} sum h_n Gamma(n+1/2)/n!.
MomentSeries mean_series(const HCoefficients& h, const SeriesEvalConfig& cfg);

/// E(L^2) = (2/lambda) sum h_n, from E(L^2) = int 2 ell (1-F) d ell.
MomentSeries second_moment_series(const HCoefficients& h,
                                  const SeriesEvalConfig& cfg);

/// Taylor coefficients about ell = 0 of the Poisson mixture
///   S(ell) = sum_n c_n (s ell^2)^n e^{-s ell^2} / n!
/// returned as the coefficients of ell^0, ell^2, ..., ell^{2 m_max}.
/// With c = h and s = lambda/2 this is 1 - F for the half model; with the
/// full-model h-bar values and s = 2 lambda it is 1 - F-bar.
std::vector<mpq_class> poisson_mixture_taylor(std::span<const mpq_class> c,
                                              const mpq_class& s, int m_max);

/// Poisson(w) upper tail P(N >= n), summed directly.
double poisson_upper_tail(int n, double w);

/// log of the Poisson(w) mass at n; w = 0 handled.
double log_poisson_mass(int n, double w);

/// Parses "p/q", an integer, or a finite decimal into an exact rational.
mpq_class parse_rational(const std::string& text);
std::string to_string(const mpq_class& value);

}  // namespace gilbert
