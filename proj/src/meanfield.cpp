#include "gilbert/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "gilbert/numeric_error.hpp"

namespace gilbert {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

void check_inputs(const mpq_class& q, double lambda, double ell) {
  if (q < 0 || q > 1) throw std::invalid_argument("mean field: q must lie in [0,1]");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("mean field: lambda must be finite and > 0");
  if (!(ell >= 0.0)) throw std::invalid_argument("mean field: ell must be >= 0");
}

bool is_half(const mpq_class& q) { return q == mpq_class(1, 2); }

// Empirical radius from the ratios of the last few nonzero odd coefficients.
double ratio_radius(const std::vector<double>& a) {
  int last = static_cast<int>(a.size()) - 1;
  if (last % 2 == 0) --last;
  double radius = kInfinity;
  int used = 0;
  for (int n = last; n >= 3 && used < 4; n -= 2) {
    if (a[n] == 0.0 || a[n - 2] == 0.0) continue;
    radius = std::min(radius, std::sqrt(std::abs(a[n - 2] / a[n])));
    ++used;
  }
  return used == 0 ? kInfinity : radius;
}

struct SeriesEval {
  double r = 0.0, g = 0.0, dg = 0.0, truncation = 0.0;
};

// R, R', R'' of sum a_n t^n, with a remainder estimate for R' based on
// geometric decay at ratio (t/radius)^2.
SeriesEval eval_series(const std::vector<double>& a, double radius, double t,
                       const char* what) {
  if (t >= radius)
    throw NumericalError(fmt::format(
        "mean-field series for {} evaluated at t = {} outside its radius {}", what, t,
        radius));
  SeriesEval out;
  const int n_max = static_cast<int>(a.size()) - 1;
  double last_term = 0.0;
  double pw = 1.0;
  std::vector<double> powers(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n, pw *= t) powers[n] = pw;
  for (int n = 1; n <= n_max; ++n) {
    out.r += a[n] * powers[n];
    last_term = n * a[n] * powers[n - 1];
    out.g += last_term;
    if (n >= 2) out.dg += n * (n - 1.0) * a[n] * powers[n - 2];
  }
  if (std::isfinite(radius)) {
    const double rho = (t / radius) * (t / radius);
    out.truncation = std::abs(last_term) * rho / (1.0 - rho);
  }
  return out;
}

}  // namespace

const char* to_string(Model m) { return m == Model::half ? "half" : "full"; }

Model parse_model(const std::string& text) {
  if (text == "half") return Model::half;
  if (text == "full") return Model::full;
  throw std::invalid_argument(fmt::format("unknown model '{}'", text));
}

PQPolynomial PQPolynomial::monomial(int i, int j, const mpq_class& c) {
  PQPolynomial p;
  p.add_term(i, j, c);
  return p;
}

void PQPolynomial::add_term(int i, int j, const mpq_class& c) {
  if (c == 0) return;
  mpq_class v = c;
  v.canonicalize();
  auto [it, inserted] = terms_.try_emplace({i, j}, v);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

PQPolynomial& PQPolynomial::operator+=(const PQPolynomial& o) {
  for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, c);
  return *this;
}

PQPolynomial& PQPolynomial::operator*=(const mpq_class& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [k, v] : terms_) v *= c;
  return *this;
}

PQPolynomial operator*(const PQPolynomial& a, const PQPolynomial& b) {
  PQPolynomial out;
  for (const auto& [ka, ca] : a.terms_)
    for (const auto& [kb, cb] : b.terms_)
      out.add_term(ka.first + kb.first, ka.second + kb.second, ca * cb);
  return out;
}

PQPolynomial PQPolynomial::swapped() const {
  PQPolynomial out;
  for (const auto& [k, c] : terms_) out.add_term(k.second, k.first, c);
  return out;
}

mpq_class PQPolynomial::evaluate(const mpq_class& p, const mpq_class& q) const {
  mpq_class sum = 0;
  for (const auto& [k, c] : terms_) {
    mpq_class term = c;
    for (int i = 0; i < k.first; ++i) term *= p;
    for (int j = 0; j < k.second; ++j) term *= q;
    sum += term;
  }
  return sum;
}

double PQPolynomial::evaluate(double p, double q) const {
  double sum = 0.0;
  for (const auto& [k, c] : terms_)
    sum += c.get_d() * std::pow(p, k.first) * std::pow(q, k.second);
  return sum;
}

std::string PQPolynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  // highest power of P first
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [k, c] = *it;
    if (!out.empty()) out += c < 0 ? " - " : " + ";
    else if (c < 0) out += "-";
    const mpq_class mag = abs(c);
    std::string factors;
    auto power = [](const char* sym, int e) -> std::string {
      if (e == 0) return "";
      return e == 1 ? sym : fmt::format("{}^{}", sym, e);
    };
    for (const auto& f : {power("P", k.first), power("Q", k.second)})
      if (!f.empty()) factors += (factors.empty() ? "" : "*") + f;
    if (factors.empty()) out += mag.get_str();
    else if (mag == 1) out += factors;
    else out += mag.get_str() + "*" + factors;
  }
  return out;
}

std::vector<PQPolynomial> symbolic_series(int n_max) {
  if (n_max < 1) throw std::invalid_argument("symbolic_series: n_max must be >= 1");
  std::vector<PQPolynomial> a(static_cast<std::size_t>(n_max) + 1), b(a.size());
  a[1] = PQPolynomial::monomial(0, 1);
  b[1] = PQPolynomial::monomial(1, 0);
  // (n+1)(n+2) a_{n+2} = -sum_{k=1}^{n} b_k (n-k+1) a_{n-k+1}
  for (int n = 1; n + 2 <= n_max; ++n) {
    PQPolynomial acc;
    for (int k = 1; k <= n; ++k) {
      if (b[k].is_zero() || a[n - k + 1].is_zero()) continue;
      PQPolynomial term = b[k] * a[n - k + 1];
      term *= mpq_class(n - k + 1);
      acc += term;
    }
    acc *= mpq_class(-1, (n + 1) * (n + 2));
    a[n + 2] = acc;
    b[n + 2] = acc.swapped();
  }
  return a;
}

MeanFieldSeries series_coefficients(double P, double Q, int n_max) {
  if (!(P >= 0.0) || !(Q >= 0.0))
    throw std::invalid_argument("series_coefficients: P and Q must be >= 0");
  if (n_max < 1) throw std::invalid_argument("series_coefficients: n_max must be >= 1");
  MeanFieldSeries s;
  s.P = P;
  s.Q = Q;
  s.east.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  s.south.assign(s.east.size(), 0.0);
  auto& a = s.east;
  auto& b = s.south;
  a[1] = Q;
  b[1] = P;
  for (int n = 1; n + 2 <= n_max; ++n) {
    double sa = 0.0, sb = 0.0;
    for (int k = 1; k <= n; ++k) {
      sa += b[k] * (n - k + 1) * a[n - k + 1];
      sb += a[k] * (n - k + 1) * b[n - k + 1];
    }
    a[n + 2] = -sa / ((n + 1.0) * (n + 2.0));
    b[n + 2] = -sb / ((n + 1.0) * (n + 2.0));
  }
  s.radius_east = ratio_radius(a);
  s.radius_south = ratio_radius(b);
  return s;
}

std::pair<double, double> meanfield_intensities(const mpq_class& q, double lambda,
                                                Model model) {
  const double scale = model == Model::full ? 2.0 * lambda : lambda;
  const mpq_class p = 1 - q;
  return {p.get_d() * scale, q.get_d() * scale};
}

MeanFieldState meanfield_state(const mpq_class& q, double lambda, double t, Model model) {
  check_inputs(q, lambda, t);
  const auto [P, Q] = meanfield_intensities(q, lambda, model);
  MeanFieldState st;
  if (is_half(q)) {
    // R'' = -R R', R'(0) = Q: R = sqrt(2Q) tanh(c t), G = Q sech^2(c t), c = sqrt(Q/2)
    const double c = std::sqrt(Q / 2.0);
    const double sech = 1.0 / std::cosh(c * t);
    st.R_h = st.R_v = std::sqrt(2.0 * Q) * std::tanh(c * t);
    st.G_h = st.G_v = Q * sech * sech;
    return st;
  }
  const auto s = series_coefficients(P, Q, kMeanFieldTerms);
  const auto e = eval_series(s.east, s.radius_east, t, "horizontal rays");
  const auto v = eval_series(s.south, s.radius_south, t, "vertical rays");
  st.R_h = e.r;
  st.G_h = e.g;
  st.R_v = v.r;
  st.G_v = v.g;
  st.truncation = std::max(e.truncation, v.truncation);
  return st;
}

namespace {

MeanFieldValue general_q_eval(const mpq_class& q, double lambda, double ell, Model model,
                              RayFamily family, bool density) {
  const auto [P, Q] = meanfield_intensities(q, lambda, model);
  const bool horiz = family == RayFamily::horizontal;
  const double g0 = horiz ? Q : P;
  if (g0 == 0.0)
    throw std::domain_error("mean field: no rays of the requested family when q is 0 or 1");
  const auto s = series_coefficients(P, Q, kMeanFieldTerms);
  const auto e = horiz ? eval_series(s.east, s.radius_east, ell, "horizontal rays")
                       : eval_series(s.south, s.radius_south, ell, "vertical rays");
  MeanFieldValue out;
  out.value = density ? -e.dg / g0 : e.g / g0;
  out.truncation = e.truncation / g0;
  if (out.truncation > kMeanFieldTruncationLimit)
    throw NumericalError(fmt::format(
        "mean-field series remainder {} exceeds {} at ell = {} (radius {})",
        out.truncation, kMeanFieldTruncationLimit, ell,
        horiz ? s.radius_east : s.radius_south));
  return out;
}

double closed_form_rate(double lambda, Model model) {
  // c = sqrt(Q/2) with Q = lambda/2 (half) or lambda (full)
  return model == Model::half ? std::sqrt(lambda / 4.0) : std::sqrt(lambda / 2.0);
}

}  // namespace

MeanFieldValue meanfield_survival(const mpq_class& q, double lambda, double ell,
                                  Model model, RayFamily family) {
  check_inputs(q, lambda, ell);
  if (is_half(q)) {
    const double sech = 1.0 / std::cosh(closed_form_rate(lambda, model) * ell);
    return {sech * sech, 0.0};
  }
  return general_q_eval(q, lambda, ell, model, family, false);
}

MeanFieldValue meanfield_pdf(const mpq_class& q, double lambda, double ell, Model model,
                             RayFamily family) {
  check_inputs(q, lambda, ell);
  if (is_half(q)) {
    const double c = closed_form_rate(lambda, model);
    const double sech = 1.0 / std::cosh(c * ell);
    return {2.0 * c * sech * sech * std::tanh(c * ell), 0.0};
  }
  return general_q_eval(q, lambda, ell, model, family, true);
}

double meanfield_mean(const mpq_class& q, double lambda, Model model) {
  check_inputs(q, lambda, 0.0);
  if (!is_half(q))
    throw std::domain_error("meanfield_mean: closed form available only for q = 1/2");
  return 1.0 / closed_form_rate(lambda, model);
}

}  // namespace gilbert
