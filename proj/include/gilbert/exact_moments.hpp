#pragma once

#include <optional>

#include <gmpxx.h>

#include "gilbert/special_functions.hpp"

namespace gilbert {

enum class MomentMethod { closed_form, integral_equation };

const char* to_string(MomentMethod m);

struct MomentDiagnostics {
  int iterations = 0;            // fixed-point sweeps
  double residual = 0.0;         // sup-norm change in the last sweep
  int grid_size = 0;             // collocation nodes
  double y_max = 0.0;            // truncation point (lambda = 1 units)
  double tail_bound = 0.0;       // neglected contribution beyond y_max
  double refinement_delta = 0.0; // |mean(grid) - mean(refined grid)|
  double observed_order = 0.0;   // from three nested grids; NaN if at roundoff
  double quad_error = 0.0;       // closed-form route: quadrature error estimate
};

struct MomentReport {
  double lambda = 1.0;
  mpq_class q;
  double mean = 0.0;
  std::optional<double> second_moment;
  MomentMethod method = MomentMethod::closed_form;
  MomentDiagnostics diagnostics;
};

/// Conditional mean ray length mu_1(y) = B U(1/4, 1/2, lambda y^2/2),
/// B = sqrt(pi) / (sqrt(lambda) Gamma(3/4)), for q = 1/2.
double mu1(double y, double lambda);

/// pi / (sqrt(lambda) Gamma(3/4)^2).
double expected_length_exact(double lambda);

/// I(z) = int_z^inf G(z,t) t U(5/4,3/2,t^2) dt with
/// G(z,t) = (f2(z) f1(t) - f1(z) f2(t)) / W(t), f1 = M(1/4,1/2,z^2),
/// f2 = U(1/4,1/2,z^2). Evaluated in exponentially scaled form.
special::QuadResult particular_kernel_integral(double z,
                                               const special::QuadOptions& opts = {});

/// Particular integral of the second-moment equation in the y variable:
/// f_p(y) = -(sqrt(2 pi) / (lambda Gamma(3/4))) I(sqrt(lambda/2) y).
double particular_integral(double y, double lambda,
                           const special::QuadOptions& opts = {});

struct SecondMomentConfig {
  special::QuadOptions inner{1e-12, 0.0, 4000};
  special::QuadOptions outer{1e-10, 0.0, 2000};
  double z_max = 6.5;  // erfc(6.5) < 1e-19

  void validate() const;
};

struct SecondMomentResult {
  double value = 0.0;   // E(L^2)
  double K = 0.0;       // -int_0^inf erfc(z) I(z) dz
  double K_error = 0.0;
  double fp0 = 0.0;     // f_p at y = 0
  double C = 0.0;       // coefficient of U(1/4,1/2,lambda y^2/2) in mu_2
};

/// E(L^2) = C U(1/4,1/2,0) + f_p(0) for q = 1/2, with K by nested quadrature.
SecondMomentResult second_moment_exact(double lambda,
                                       const SecondMomentConfig& cfg = {});

/// mu_2(y) = C U(1/4,1/2,lambda y^2/2) + f_p(y), with C from `sm`.
double mu2(double y, double lambda, const SecondMomentResult& sm,
           const special::QuadOptions& opts = {});

/// Closed-form report for q = 1/2 (mean and second moment).
MomentReport half_model_moments(double lambda,
                                const SecondMomentConfig& cfg = {});

struct GeneralQConfig {
  double y_max = 8.0;      // in lambda = 1 units
  int panels = 16;
  int nodes_per_panel = 10;
  double grading = 1.5;    // breakpoints y_max (k/panels)^grading
  double tol = 1e-8;
  int max_iterations = 20000;
  bool refine = true;      // also solve on coarser and finer grids

  void validate() const;
};

/// Mean east-ray length in the half model for H-proportion q, from the
/// integral equation for the conditional mean (lambda = 1)
///   mu(y) = m(y) + q [ m(y) int_0^y mu + int_y^inf e^{(y^2-u^2)/2} m(u) mu(u) du ],
///   m(y) = e^{y^2/2} sqrt(pi/2) erfc(y/sqrt 2),
/// discretized by panel Gauss-Legendre collocation and solved by fixed-point
/// iteration; the result is scaled by 1/sqrt(lambda).
MomentReport general_q_mean(const mpq_class& q, double lambda,
                            const GeneralQConfig& cfg = {});

}  // namespace gilbert
