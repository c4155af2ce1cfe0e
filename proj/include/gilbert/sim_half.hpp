#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <gmpxx.h>

#include "gilbert/rng.hpp"

namespace gilbert {

/// Trapezoidal stopping set seen by the half-model test ray: height of the
/// current left boundary and horizontal distance travelled so far.
struct TrapezoidState {
  double y = 0.0;
  double x_total = 0.0;
};

enum class StopKind { V, H };

struct StepResult {
  TrapezoidState next;  // meaningful only when kind == H
  StopKind kind = StopKind::V;
  double r = 0.0;       // base length of the new trapezoid
  double area = 0.0;    // r*y + r^2/2, Exp(lambda) distributed
  double length = 0.0;  // terminal length x_total + r when kind == V
};

/// One growth of the trapezoid until it hits a seed. The seed is V with
/// probability 1-q (the ray stops), otherwise the dead zone is dropped and
/// the new boundary height is uniform on (0, r+y).
StepResult half_step(const TrapezoidState& state, double q, double lambda, RandomStream& rng);

struct RaySample {
  double length = 0.0;
  int steps = 0;
};

/// Requires 0 <= q < 1 and lambda > 0.
RaySample sample_ray_length(double q, double lambda, RandomStream& rng);

struct HalfSimConfig {
  mpq_class q{1, 2};
  double lambda = 1.0;
  std::uint64_t samples = 1'000'000;
  std::uint64_t master_seed = 1;
  int threads = 0;
  std::vector<double> survival_grid;

  void validate() const;
};

struct HalfSimReport {
  std::uint64_t samples = 0;
  double mean = 0.0, mean_se = 0.0;
  double second_moment = 0.0, second_moment_se = 0.0;
  double mean_steps = 0.0, steps_se = 0.0;
  std::vector<double> grid, survival, survival_se;
};

/// Sample i uses RandomStream(master_seed, i), and sums are reduced over
/// fixed-size chunks in order, so the report does not depend on threads.
HalfSimReport monte_carlo_report(const HalfSimConfig& cfg);

/// The raw samples in index order (same streams as monte_carlo_report).
std::vector<RaySample> sample_many(const HalfSimConfig& cfg);

/// sup |F_n - F| over [0, upper] for sorted data. A finite upper limit
/// lets a cdf that is only trusted on a bounded range be tested.
double ks_statistic(std::span<const double> sorted, const std::function<double(double)>& cdf,
                    double upper = std::numeric_limits<double>::infinity());

/// Dvoretzky-Kiefer-Wolfowitz band half-width at level alpha.
double dkw_epsilon(std::uint64_t n, double alpha);

}  // namespace gilbert
