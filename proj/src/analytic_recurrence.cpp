#include "gilbert/analytic_recurrence.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "gilbert/special_functions.hpp"

namespace gilbert {

namespace {

constexpr int kMinTermsForTailFit = 16;

std::vector<double> log_factorials(std::size_t n) {
  std::vector<double> out(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k)
    out[k] = out[k - 1] + std::log(static_cast<double>(k));
  return out;
}

// Fits term_n ~ C n^{-p} through the last quarter of the terms and
// integrates the power law from N to infinity.
MomentSeries finish_moment(const std::vector<double>& terms, double scale) {
  MomentSeries out;
  double sum = 0.0;
  for (double t : terms) sum += t;
  out.value = scale * sum;

  const int n = static_cast<int>(terms.size());
  if (n < kMinTermsForTailFit) {
    out.tail_estimate = std::numeric_limits<double>::infinity();
    out.converged = false;
    return out;
  }
  const int hi = n - 1;
  const int lo = (3 * n) / 4;
  if (terms[hi] == 0.0) {
    out.tail_estimate = 0.0;
    out.converged = true;
    return out;
  }
  const double p = -std::log(terms[hi] / terms[lo]) /
                   std::log(static_cast<double>(hi) / lo);
  out.decay_exponent = p;
  if (!(p > 1.05)) {
    out.tail_estimate = std::numeric_limits<double>::infinity();
    out.converged = false;
    return out;
  }
  // int_{N}^{inf} t_hi (x/hi)^{-p} dx
  const double tail = terms[hi] * std::pow(static_cast<double>(hi), p) *
                      std::pow(static_cast<double>(n), 1.0 - p) / (p - 1.0);
  out.tail_estimate = scale * tail;
  out.converged = true;
  return out;
}

void require_terms(const HCoefficients& h, const SeriesEvalConfig& cfg) {
  cfg.validate();
  if (h.size() < static_cast<std::size_t>(cfg.n_terms))
    throw std::invalid_argument(fmt::format(
        "series evaluation needs {} coefficients, have {}", cfg.n_terms,
        h.size()));
}

}  // namespace

HCoefficients::HCoefficients(mpq_class q, std::vector<mpq_class> values)
    : q_(std::move(q)), values_(std::move(values)) {
  doubles_.reserve(values_.size());
  for (const auto& v : values_) doubles_.push_back(v.get_d());
}

void SeriesEvalConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("SeriesEvalConfig: lambda must be > 0");
  if (n_terms < 1)
    throw std::invalid_argument("SeriesEvalConfig: n_terms must be >= 1");
}

HCoefficients compute_h(const mpq_class& q, int n_max) {
  if (q < 0 || q > 1)
    throw std::invalid_argument("compute_h: q must lie in [0,1]");
  if (n_max < 0) throw std::invalid_argument("compute_h: n_max must be >= 0");

  std::vector<mpz_class> fact(2 * static_cast<std::size_t>(n_max) + 2);
  fact[0] = 1;
  for (std::size_t i = 1; i < fact.size(); ++i) fact[i] = fact[i - 1] * i;

  std::vector<mpq_class> h(static_cast<std::size_t>(n_max) + 1);
  h[0] = 1;

  // With H_u = h_u/u! = A_u/B over a shared denominator B, the double sum
  // becomes an integer sum_{u,v} c(n,u,v) A_u A_v divided by B^2. The
  // weight c is symmetric in (u,v), so only v >= u is visited.
  std::vector<mpz_class> numer(static_cast<std::size_t>(n_max) + 1);
  numer[0] = 1;
  mpz_class denom = 1;
  mpz_class weight, inner, total;

  for (int n = 1; n <= n_max; ++n) {
    total = 0;
    for (int u = 0; u < n; ++u) {
      inner = 0;
      for (int v = u; v < n - u; ++v) {
        mpz_divexact(weight.get_mpz_t(), fact[n - 1 + u - v].get_mpz_t(),
                     fact[n - 1 - u - v].get_mpz_t());
        weight *= fact[n - 1 - u + v];
        mpz_mul_2exp(weight.get_mpz_t(), weight.get_mpz_t(),
                     static_cast<mp_bitcnt_t>(n - u - v + (v > u ? 1 : 0)));
        mpz_addmul(inner.get_mpz_t(), weight.get_mpz_t(),
                   numer[v].get_mpz_t());
      }
      mpz_addmul(total.get_mpz_t(), inner.get_mpz_t(), numer[u].get_mpz_t());
    }
    mpq_class hn(total * fact[n], fact[2 * n] * denom * denom);
    hn.canonicalize();
    hn *= q;
    h[n] = hn;

    mpq_class scaled = hn / fact[n];
    const mpz_class& den = scaled.get_den();
    mpz_class lcm;
    mpz_lcm(lcm.get_mpz_t(), denom.get_mpz_t(), den.get_mpz_t());
    const mpz_class lift = lcm / denom;
    if (lift != 1)
      for (int i = 0; i < n; ++i) numer[i] *= lift;
    denom = lcm;
    numer[n] = scaled.get_num() * (lcm / den);
  }
  return HCoefficients(q, std::move(h));
}

double log_poisson_mass(int n, double w) {
  if (w == 0.0) return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return n * std::log(w) - w - std::lgamma(n + 1.0);
}

double poisson_upper_tail(int n, double w) {
  if (n <= 0) return 1.0;
  if (w == 0.0) return 0.0;
  double term = std::exp(log_poisson_mass(n, w));
  double sum = 0.0;
  const double stop = w + 40.0 * std::sqrt(w) + 50.0;
  for (int k = n; ; ++k) {
    sum += term;
    if (k > w && term < 1e-18 * sum) break;
    if (k > stop) break;
    term *= w / (k + 1.0);
  }
  return std::min(sum, 1.0);
}

SeriesValue cdf(const HCoefficients& h, const SeriesEvalConfig& cfg,
                double ell) {
  if (ell < 0.0) throw std::invalid_argument("cdf: ell must be >= 0");
  require_terms(h, cfg);
  const double w = 0.5 * cfg.lambda * ell * ell;
  const auto hd = h.as_double();
  const auto logfact = log_factorials(static_cast<std::size_t>(cfg.n_terms));
  const double logw = w > 0.0 ? std::log(w) : 0.0;
  double survival = 0.0;
  for (int n = 0; n < cfg.n_terms; ++n) {
    if (hd[n] == 0.0) continue;
    const double lp = (w > 0.0) ? n * logw - w - logfact[n]
                                : (n == 0 ? 0.0 : -INFINITY);
    survival += hd[n] * std::exp(lp);
  }
  SeriesValue out;
  out.value = 1.0 - survival;
  out.tail_bound = poisson_upper_tail(cfg.n_terms, w);
  out.truncated = out.tail_bound > kSeriesTailLimit;
  return out;
}

SeriesValue pdf(const HCoefficients& h, const SeriesEvalConfig& cfg,
                double ell) {
  if (ell < 0.0) throw std::invalid_argument("pdf: ell must be >= 0");
  require_terms(h, cfg);
  const double w = 0.5 * cfg.lambda * ell * ell;
  const double dw = cfg.lambda * ell;
  SeriesValue out;
  if (w == 0.0) return out;
  const auto hd = h.as_double();
  const auto logfact = log_factorials(static_cast<std::size_t>(cfg.n_terms));
  const double logw = std::log(w);
  const int last = cfg.n_terms - 1;
  double sum = 0.0;
  for (int n = 0; n <= last; ++n) {
    const double diff = (n < last) ? hd[n] - hd[n + 1] : hd[n];
    sum += diff * std::exp(n * logw - w - logfact[n]);
  }
  out.value = dw * sum;
  out.tail_bound =
      dw * (std::exp(last * logw - w - logfact[last]) +
            poisson_upper_tail(cfg.n_terms, w));
  out.truncated = out.tail_bound > kSeriesTailLimit;
  return out;
}

MomentSeries mean_series(const HCoefficients& h, const SeriesEvalConfig& cfg) {
  require_terms(h, cfg);
  const auto hd = h.as_double();
  std::vector<double> terms(static_cast<std::size_t>(cfg.n_terms));
  for (int n = 0; n < cfg.n_terms; ++n) {
    // Gamma(n+1/2)/n! in log space
    const double ratio = std::exp(std::lgamma(n + 0.5) - std::lgamma(n + 1.0));
    terms[n] = hd[n] * ratio;
  }
  return finish_moment(terms, 1.0 / std::sqrt(2.0 * cfg.lambda));
}

MomentSeries second_moment_series(const HCoefficients& h,
                                  const SeriesEvalConfig& cfg) {
  require_terms(h, cfg);
  const auto hd = h.as_double();
  std::vector<double> terms(hd.begin(), hd.begin() + cfg.n_terms);
  return finish_moment(terms, 2.0 / cfg.lambda);
}

std::vector<mpq_class> poisson_mixture_taylor(std::span<const mpq_class> c,
                                              const mpq_class& s, int m_max) {
  if (m_max < 0) throw std::invalid_argument("poisson_mixture_taylor: m_max < 0");
  if (c.size() < static_cast<std::size_t>(m_max) + 1)
    throw std::invalid_argument(
        "poisson_mixture_taylor: need coefficients c_0..c_{m_max}");
  std::vector<mpz_class> fact(static_cast<std::size_t>(m_max) + 1);
  fact[0] = 1;
  for (int i = 1; i <= m_max; ++i) fact[i] = fact[i - 1] * i;

  std::vector<mpq_class> out(static_cast<std::size_t>(m_max) + 1);
  mpq_class s_pow = 1;
  for (int m = 0; m <= m_max; ++m) {
    // ell^{2m}: s^m sum_{n+k=m} c_n (-1)^k / (n! k!)
    mpq_class acc = 0;
    for (int n = 0; n <= m; ++n) {
      const int k = m - n;
      mpq_class term = c[n] / (fact[n] * fact[k]);
      if (k % 2 == 1) term = -term;
      acc += term;
    }
    out[m] = acc * s_pow;
    s_pow *= s;
  }
  return out;
}

mpq_class parse_rational(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty rational");
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    mpq_class r;
    if (r.set_str(text, 10) != 0 || r.get_den() == 0)
      throw std::invalid_argument(fmt::format("invalid rational '{}'", text));
    r.canonicalize();
    return r;
  }
  const auto dot = text.find('.');
  std::string digits = text;
  mpz_class scale = 1;
  if (dot != std::string::npos) {
    digits = text.substr(0, dot) + text.substr(dot + 1);
    const std::size_t decimals = text.size() - dot - 1;
    for (std::size_t i = 0; i < decimals; ++i) scale *= 10;
  }
  mpz_class num;
  if (digits.empty() || digits == "-" || num.set_str(digits, 10) != 0)
    throw std::invalid_argument(fmt::format("invalid rational '{}'", text));
  mpq_class r(num, scale);
  r.canonicalize();
  return r;
}

std::string to_string(const mpq_class& value) { return value.get_str(10); }

}  // namespace gilbert
