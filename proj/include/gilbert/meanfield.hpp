#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace gilbert {

enum class Model { half, full };

/// Ray families: east/west rays come from H seeds, north/south from V seeds.
enum class RayFamily { horizontal, vertical };

const char* to_string(Model m);
Model parse_model(const std::string& text);

/// Homogeneous polynomial in (P, Q) with rational coefficients, keyed by
/// the exponent pair (i, j) of P^i Q^j.
class PQPolynomial {
 public:
  PQPolynomial() = default;
  static PQPolynomial monomial(int i, int j, const mpq_class& c = 1);

  const std::map<std::pair<int, int>, mpq_class>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  PQPolynomial& operator+=(const PQPolynomial& o);
  PQPolynomial& operator*=(const mpq_class& c);
  friend PQPolynomial operator*(const PQPolynomial& a, const PQPolynomial& b);
  friend bool operator==(const PQPolynomial& a, const PQPolynomial& b) {
    return a.terms_ == b.terms_;
  }

  /// P <-> Q interchange.
  PQPolynomial swapped() const;
  mpq_class evaluate(const mpq_class& p, const mpq_class& q) const;
  double evaluate(double p, double q) const;
  std::string to_string() const;

 private:
  void add_term(int i, int j, const mpq_class& c);
  std::map<std::pair<int, int>, mpq_class> terms_;
};

/// Coefficients a_0..a_{n_max} of R_east(t) = sum a_n t^n solving
///   R_east'' = -R_south R_east',  R_south'' = -R_east R_south',
///   R(0) = 0, R_east'(0) = Q, R_south'(0) = P,
/// as exact polynomials in (P, Q). R_south is obtained by swapping P and Q.
std::vector<PQPolynomial> symbolic_series(int n_max);

/// The same series evaluated at numeric (P, Q), with an empirical radius
/// of convergence from the coefficient ratios.
struct MeanFieldSeries {
  double P = 0.0;
  double Q = 0.0;
  std::vector<double> east;   // R_east coefficients
  std::vector<double> south;  // R_south coefficients
  double radius_east = 0.0;
  double radius_south = 0.0;
};

MeanFieldSeries series_coefficients(double P, double Q, int n_max);

/// (P, Q) for a model: half uses ((1-q) lambda, q lambda), full doubles both.
std::pair<double, double> meanfield_intensities(const mpq_class& q, double lambda,
                                                Model model);

struct MeanFieldValue {
  double value = 0.0;
  double truncation = 0.0;  // estimated series remainder (0 for closed forms)
};

inline constexpr int kMeanFieldTerms = 121;
inline constexpr double kMeanFieldTruncationLimit = 1e-6;

/// Per-family state at time t: length density R and growing-end density G.
struct MeanFieldState {
  double R_h = 0.0, G_h = 0.0, R_v = 0.0, G_v = 0.0;
  double truncation = 0.0;
};

MeanFieldState meanfield_state(const mpq_class& q, double lambda, double t, Model model);

/// Pr(L > ell) = G(ell) / G(0) for the requested ray family. q = 1/2 uses
/// the sech^2 closed forms; otherwise the series, throwing NumericalError
/// outside its radius or when the remainder estimate exceeds 1e-6.
MeanFieldValue meanfield_survival(const mpq_class& q, double lambda, double ell,
                                  Model model, RayFamily family = RayFamily::horizontal);

/// -d/d ell of meanfield_survival.
MeanFieldValue meanfield_pdf(const mpq_class& q, double lambda, double ell,
                             Model model, RayFamily family = RayFamily::horizontal);

/// Mean-field expected ray length for q = 1/2: 2/sqrt(lambda) (half),
/// sqrt(2/lambda) (full). Other q throw std::domain_error.
double meanfield_mean(const mpq_class& q, double lambda, Model model);

}  // namespace gilbert
