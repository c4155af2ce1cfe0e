#pragma once

#include <functional>
#include <limits>
#include <vector>

namespace gilbert::special {

struct SpecialFnConfig {
  double series_tol = 1e-14;  // relative term size at which the M series stops
  double quad_tol = 1e-10;    // absolute quadrature tolerance
  // Finite substitute for an infinite upper limit. Zero selects the
  // x = a + s/(1-s) map, which handles slowly decaying tails.
  double quad_cutoff = 0.0;

  void validate() const;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

double gamma(double x);
double log_gamma(double x);
double erfc(double x);

/// Kummer's function M(a,b,z) by direct summation of its power series.
/// Valid for z >= 0 up to roughly 700 (overflow); terms are all positive
/// for a, b > 0 so no cancellation occurs.
double kummer_M(double a, double b, double z,
                const SpecialFnConfig& cfg = {});

/// e^{-z} M(a,b,z). Power series for z <= 40, large-z asymptotic
/// expansion above (requires a, b > 0).
double kummer_M_scaled(double a, double b, double z,
                       const SpecialFnConfig& cfg = {});

/// Kummer's function of the second kind, for a > 0 and b in (0,1) or (1,2).
///
/// b in (0,1):
///   z == 0      Gamma(1-b) / Gamma(1+a-b)
///   z <= 2      reflection combination of two M series
///   2 < z < 40  integral representation, t = w^4 substitution
///   z >= 40     asymptotic series, truncated at its smallest term
/// b in (1,2):   U(a,b,z) = z^{1-b} U(1+a-b, 2-b, z), z > 0.
double kummer_U(double a, double b, double z,
                const SpecialFnConfig& cfg = {});

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
  int intervals = 0;
};

struct QuadOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  int max_intervals = 4000;
};

/// Adaptive 21-point Gauss-Kronrod quadrature with global bisection of the
/// worst interval. `b` may be +infinity. Throws NumericalError when the
/// requested tolerance is not reached within max_intervals.
QuadResult integrate(const std::function<double(double)>& f, double a,
                     double b, const QuadOptions& opts = {});

/// Same, with tolerances and cutoff drawn from a SpecialFnConfig.
QuadResult integrate(const std::function<double(double)>& f, double a,
                     double b, const SpecialFnConfig& cfg);

struct GaussRule {
  std::vector<double> nodes;    // ascending, on [-1, 1]
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1], nodes by Newton iteration.
GaussRule gauss_legendre(int n);

}  // namespace gilbert::special
