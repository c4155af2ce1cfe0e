#include "gilbert/exact_moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "gilbert/numeric_error.hpp"

namespace gilbert {

namespace {

using special::gamma;
using special::kInf;
using special::kummer_M_scaled;
using special::kummer_U;

constexpr double kPi = std::numbers::pi;

void require_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must be finite and > 0");
}

// e^{-t^2} W(t) for f1 = M(1/4,1/2,t^2), f2 = U(1/4,1/2,t^2), using
// t U(5/4,3/2,t^2) = U(3/4,1/2,t^2) so the t = 0 limit is finite.
double scaled_wronskian(double t) {
  const double x = t * t;
  return -0.5 * (kummer_M_scaled(0.25, 0.5, x) * kummer_U(0.75, 0.5, x) +
                 2.0 * t * kummer_U(0.25, 0.5, x) * kummer_M_scaled(1.25, 1.5, x));
}

// Expected horizontal distance to the first stopping seed from a left
// boundary of height y (lambda = 1): e^{y^2/2} sqrt(pi/2) erfc(y/sqrt 2).
double first_step_mean(double y) {
  return std::exp(0.5 * y * y) * std::sqrt(kPi / 2.0) * std::erfc(y / std::numbers::sqrt2);
}

}  // namespace

const char* to_string(MomentMethod m) {
  switch (m) {
    case MomentMethod::closed_form: return "closed_form";
    case MomentMethod::integral_equation: return "integral_equation";
  }
  return "unknown";
}

double mu1(double y, double lambda) {
  require_lambda(lambda);
  if (y < 0.0) throw std::invalid_argument("mu1: y must be >= 0");
  const double b = std::sqrt(kPi) / (std::sqrt(lambda) * gamma(0.75));
  return b * kummer_U(0.25, 0.5, 0.5 * lambda * y * y);
}

double expected_length_exact(double lambda) {
  require_lambda(lambda);
  const double g = gamma(0.75);
  return kPi / (std::sqrt(lambda) * g * g);
}

special::QuadResult particular_kernel_integral(double z,
                                               const special::QuadOptions& opts) {
  if (!(z >= 0.0)) throw std::invalid_argument("particular_kernel_integral: z < 0");
  const double zz = z * z;
  const double f2z = kummer_U(0.25, 0.5, zz);
  const double f1z_scaled = kummer_M_scaled(0.25, 0.5, zz);
  auto integrand = [=](double t) {
    const double x = t * t;
    const double w = scaled_wronskian(t);
    if (!(w < 0.0))
      throw NumericalError(fmt::format("Wronskian vanished at t = {}", t));
    const double f2t = kummer_U(0.25, 0.5, x);
    const double g = f2z * kummer_M_scaled(0.25, 0.5, x) -
                     f1z_scaled * f2t * std::exp(zz - x);
    return g / w * kummer_U(0.75, 0.5, x);
  };
  return special::integrate(integrand, z, kInf, opts);
}

double particular_integral(double y, double lambda,
                           const special::QuadOptions& opts) {
  require_lambda(lambda);
  if (y < 0.0) throw std::invalid_argument("particular_integral: y must be >= 0");
  const double z = std::sqrt(0.5 * lambda) * y;
  const double pre = std::sqrt(2.0 * kPi) / (lambda * gamma(0.75));
  return -pre * particular_kernel_integral(z, opts).value;
}

void SecondMomentConfig::validate() const {
  if (!(inner.abs_tol > 0.0 || inner.rel_tol > 0.0) ||
      !(outer.abs_tol > 0.0 || outer.rel_tol > 0.0))
    throw std::invalid_argument("SecondMomentConfig: tolerances must be positive");
  if (!(z_max > 0.0) || !std::isfinite(z_max))
    throw std::invalid_argument("SecondMomentConfig: z_max must be finite and > 0");
}

SecondMomentResult second_moment_exact(double lambda,
                                       const SecondMomentConfig& cfg) {
  require_lambda(lambda);
  cfg.validate();
  SecondMomentResult out;

  auto outer = [&](double z) {
    return std::erfc(z) * particular_kernel_integral(z, cfg.inner).value;
  };
  const auto k = special::integrate(outer, 0.0, cfg.z_max, cfg.outer);
  out.K = -k.value;
  // erfc(z_max) bounds the dropped piece because |I(z)| < 1 there.
  out.K_error = k.abs_error + std::erfc(cfg.z_max);

  out.fp0 = particular_integral(0.0, lambda, cfg.inner);
  const double g34 = gamma(0.75);
  out.C = (kPi * out.K / g34 + 2.0 * std::numbers::sqrt2) / (g34 * lambda);
  out.value = out.C * kummer_U(0.25, 0.5, 0.0) + out.fp0;
  return out;
}

double mu2(double y, double lambda, const SecondMomentResult& sm,
           const special::QuadOptions& opts) {
  require_lambda(lambda);
  if (y < 0.0) throw std::invalid_argument("mu2: y must be >= 0");
  return sm.C * kummer_U(0.25, 0.5, 0.5 * lambda * y * y) +
         particular_integral(y, lambda, opts);
}

MomentReport half_model_moments(double lambda, const SecondMomentConfig& cfg) {
  MomentReport r;
  r.lambda = lambda;
  r.q = mpq_class(1, 2);
  r.mean = expected_length_exact(lambda);
  const auto sm = second_moment_exact(lambda, cfg);
  r.second_moment = sm.value;
  r.method = MomentMethod::closed_form;
  r.diagnostics.quad_error = sm.K_error;
  return r;
}

void GeneralQConfig::validate() const {
  if (!(y_max > 0.0) || y_max > 25.0)
    throw std::invalid_argument("GeneralQConfig: y_max must lie in (0, 25]");
  if (panels < 2 || nodes_per_panel < 2)
    throw std::invalid_argument("GeneralQConfig: need >= 2 panels and >= 2 nodes");
  if (!(grading >= 1.0))
    throw std::invalid_argument("GeneralQConfig: grading must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("GeneralQConfig: tol must be > 0");
  if (max_iterations < 1)
    throw std::invalid_argument("GeneralQConfig: max_iterations must be >= 1");
}

namespace {

struct CollocationSolution {
  double mu0 = 0.0;
  double mu_max = 0.0;
  int iterations = 0;
  double residual = 0.0;
  int n = 0;
};

CollocationSolution solve_collocation(double q, const GeneralQConfig& cfg,
                                      int panels) {
  const int nq = cfg.nodes_per_panel;
  const auto rule = special::gauss_legendre(nq);
  const int n = panels * nq;

  std::vector<double> edges(panels + 1);
  for (int k = 0; k <= panels; ++k)
    edges[k] = cfg.y_max * std::pow(static_cast<double>(k) / panels, cfg.grading);

  std::vector<double> y(n), w(n), m(n);
  for (int k = 0; k < panels; ++k) {
    const double c = 0.5 * (edges[k] + edges[k + 1]);
    const double h = 0.5 * (edges[k + 1] - edges[k]);
    for (int i = 0; i < nq; ++i) {
      y[k * nq + i] = c + h * rule.nodes[i];
      w[k * nq + i] = h * rule.weights[i];
    }
  }
  for (int j = 0; j < n; ++j) m[j] = first_step_mean(y[j]);

  auto lagrange = [&](int panel, int j, double s) {
    const double* x = &y[panel * nq];
    double v = 1.0;
    for (int i = 0; i < nq; ++i)
      if (i != j) v *= (s - x[i]) / (x[j] - x[i]);
    return v;
  };
  // kernel for u > y: e^{(y^2-u^2)/2} m(u)
  auto upper = [](double yy, double u) {
    return std::exp(0.5 * (yy * yy - u * u)) * first_step_mean(u);
  };

  // A[r][j]: q times the quadrature weight of node j in row r.
  std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
  for (int r = 0; r < n; ++r) {
    const double yr = y[r];
    const int pr = r / nq;
    double* row = &a[static_cast<std::size_t>(r) * n];
    for (int j = 0; j < n; ++j) {
      const int pj = j / nq;
      if (pj < pr) row[j] = q * m[r] * w[j];
      else if (pj > pr) row[j] = q * w[j] * upper(yr, y[j]);
    }
    // The kernel has a kink at u = y_r; split its panel there and
    // integrate the interpolant of mu on each side.
    const double lo = edges[pr], hi = edges[pr + 1];
    const double hl = 0.5 * (yr - lo), cl = 0.5 * (yr + lo);
    const double hr = 0.5 * (hi - yr), cr = 0.5 * (hi + yr);
    for (int i = 0; i < nq; ++i) {
      const double sl = cl + hl * rule.nodes[i], wl = hl * rule.weights[i];
      const double sr = cr + hr * rule.nodes[i], wr = hr * rule.weights[i];
      const double kr = upper(yr, sr);
      for (int j = 0; j < nq; ++j) {
        row[pr * nq + j] += q * (m[r] * wl * lagrange(pr, j, sl) +
                                 wr * kr * lagrange(pr, j, sr));
      }
    }
  }

  std::vector<double> mu = m, next(n);
  CollocationSolution out;
  out.n = n;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    double diff = 0.0;
    for (int r = 0; r < n; ++r) {
      const double* row = &a[static_cast<std::size_t>(r) * n];
      double s = m[r];
      for (int j = 0; j < n; ++j) s += row[j] * mu[j];
      next[r] = s;
      diff = std::max(diff, std::abs(s - mu[r]));
    }
    mu.swap(next);
    out.iterations = it;
    out.residual = diff;
    if (!std::isfinite(diff))
      throw NumericalError("general_q_mean: fixed-point iterates diverged");
    if (diff < cfg.tol) break;
  }
  if (!(out.residual < cfg.tol))
    throw NumericalError(fmt::format(
        "general_q_mean: no convergence after {} iterations (last change {})",
        out.iterations, out.residual));

  double s = std::sqrt(kPi / 2.0);
  for (int j = 0; j < n; ++j) s += q * w[j] * upper(0.0, y[j]) * mu[j];
  out.mu0 = s;
  out.mu_max = *std::max_element(mu.begin(), mu.end());
  return out;
}

}  // namespace

MomentReport general_q_mean(const mpq_class& q, double lambda,
                            const GeneralQConfig& cfg) {
  require_lambda(lambda);
  cfg.validate();
  if (q <= 0 || q >= 1)
    throw std::invalid_argument("general_q_mean: q must lie in (0,1)");
  const double qd = q.get_d();
  const double scale = 1.0 / std::sqrt(lambda);

  const auto base = solve_collocation(qd, cfg, cfg.panels);
  MomentReport r;
  r.lambda = lambda;
  r.q = q;
  r.method = MomentMethod::integral_equation;
  r.mean = base.mu0 * scale;
  auto& d = r.diagnostics;
  d.iterations = base.iterations;
  d.residual = base.residual;
  d.grid_size = base.n;
  d.y_max = cfg.y_max;
  const double yy = cfg.y_max;
  d.tail_bound = qd * base.mu_max * std::exp(-0.5 * yy * yy) / (yy * yy) * scale;
  d.observed_order = std::numeric_limits<double>::quiet_NaN();
  if (cfg.refine) {
    const auto fine = solve_collocation(qd, cfg, 2 * cfg.panels);
    const auto coarse = solve_collocation(qd, cfg, std::max(2, cfg.panels / 2));
    const double d_fine = std::abs(base.mu0 - fine.mu0);
    const double d_coarse = std::abs(coarse.mu0 - base.mu0);
    d.refinement_delta = d_fine * scale;
    if (d_fine > 1e-13 && d_coarse > d_fine)
      d.observed_order = std::log2(d_coarse / d_fine);
  }
  return r;
}

}  // namespace gilbert
