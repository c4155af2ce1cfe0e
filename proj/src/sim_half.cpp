#include "gilbert/sim_half.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gilbert/parallel.hpp"

namespace gilbert {

namespace {

constexpr std::uint64_t kChunk = 1 << 16;

void check_params(double q, double lambda) {
  if (!(q >= 0.0) || !(q < 1.0))
    throw std::invalid_argument("half-model sampler: q must lie in [0,1)");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("half-model sampler: lambda must be finite and > 0");
}

struct Sums {
  double l = 0.0, l2 = 0.0, l4 = 0.0, k = 0.0, k2 = 0.0;
  std::vector<std::uint64_t> exceed;
};

}  // namespace

StepResult half_step(const TrapezoidState& state, double q, double lambda, RandomStream& rng) {
  StepResult out;
  const double a = rng.exponential() / lambda;
  // root of r y + r^2/2 = a, written to avoid cancellation when y >> r
  const double y = state.y;
  out.r = 2.0 * a / (y + std::sqrt(y * y + 2.0 * a));
  out.area = a;
  const double x = state.x_total + out.r;
  if (!rng.bernoulli(q)) {
    out.kind = StopKind::V;
    out.length = x;
    return out;
  }
  out.kind = StopKind::H;
  out.next = {rng.uniform() * (out.r + y), x};
  return out;
}

RaySample sample_ray_length(double q, double lambda, RandomStream& rng) {
  check_params(q, lambda);
  TrapezoidState st;
  RaySample s;
  for (;;) {
    ++s.steps;
    const auto step = half_step(st, q, lambda, rng);
    if (step.kind == StopKind::V) {
      s.length = step.length;
      return s;
    }
    st = step.next;
  }
}

void HalfSimConfig::validate() const {
  check_params(q.get_d(), lambda);
  if (samples < 1) throw std::invalid_argument("HalfSimConfig: samples must be >= 1");
  for (double g : survival_grid)
    if (!(g >= 0.0) || !std::isfinite(g))
      throw std::invalid_argument("HalfSimConfig: survival grid points must be finite and >= 0");
}

std::vector<RaySample> sample_many(const HalfSimConfig& cfg) {
  cfg.validate();
  const double q = cfg.q.get_d();
  std::vector<RaySample> out(cfg.samples);
  const std::size_t chunks = (cfg.samples + kChunk - 1) / kChunk;
  run_chunks<int>(chunks, cfg.threads, [&](std::size_t c) {
    const std::uint64_t lo = c * kChunk, hi = std::min(cfg.samples, lo + kChunk);
    for (std::uint64_t i = lo; i < hi; ++i) {
      RandomStream rng(cfg.master_seed, i);
      out[i] = sample_ray_length(q, cfg.lambda, rng);
    }
    return 0;
  });
  return out;
}

HalfSimReport monte_carlo_report(const HalfSimConfig& cfg) {
  cfg.validate();
  const double q = cfg.q.get_d();
  const std::size_t chunks = (cfg.samples + kChunk - 1) / kChunk;
  const auto& grid = cfg.survival_grid;

  auto partial = run_chunks<Sums>(chunks, cfg.threads, [&](std::size_t c) {
    Sums s;
    s.exceed.assign(grid.size(), 0);
    const std::uint64_t lo = c * kChunk, hi = std::min(cfg.samples, lo + kChunk);
    for (std::uint64_t i = lo; i < hi; ++i) {
      RandomStream rng(cfg.master_seed, i);
      const auto r = sample_ray_length(q, cfg.lambda, rng);
      const double l2 = r.length * r.length;
      s.l += r.length;
      s.l2 += l2;
      s.l4 += l2 * l2;
      s.k += r.steps;
      s.k2 += static_cast<double>(r.steps) * r.steps;
      for (std::size_t g = 0; g < grid.size(); ++g)
        if (r.length > grid[g]) ++s.exceed[g];
    }
    return s;
  });

  Sums total;
  total.exceed.assign(grid.size(), 0);
  for (const auto& p : partial) {
    total.l += p.l;
    total.l2 += p.l2;
    total.l4 += p.l4;
    total.k += p.k;
    total.k2 += p.k2;
    for (std::size_t g = 0; g < grid.size(); ++g) total.exceed[g] += p.exceed[g];
  }

  const double n = static_cast<double>(cfg.samples);
  auto se = [n](double sum, double sum_sq) {
    if (n < 2) return 0.0;
    const double m = sum / n;
    const double var = std::max(0.0, (sum_sq - n * m * m) / (n - 1.0));
    return std::sqrt(var / n);
  };

  HalfSimReport rep;
  rep.samples = cfg.samples;
  rep.mean = total.l / n;
  rep.mean_se = se(total.l, total.l2);
  rep.second_moment = total.l2 / n;
  rep.second_moment_se = se(total.l2, total.l4);
  rep.mean_steps = total.k / n;
  rep.steps_se = se(total.k, total.k2);
  rep.grid = grid;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double p = static_cast<double>(total.exceed[g]) / n;
    rep.survival.push_back(p);
    rep.survival_se.push_back(std::sqrt(p * (1.0 - p) / n));
  }
  return rep;
}

double ks_statistic(std::span<const double> sorted, const std::function<double(double)>& cdf,
                    double upper) {
  if (sorted.empty()) throw std::invalid_argument("ks_statistic: no data");
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  std::size_t i = 0;
  for (; i < sorted.size() && sorted[i] <= upper; ++i) {
    if (i > 0 && sorted[i] < sorted[i - 1])
      throw std::invalid_argument("ks_statistic: data not sorted");
    const double f = cdf(sorted[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  if (i < sorted.size() && std::isfinite(upper)) d = std::max(d, cdf(upper) - i / n);
  return d;
}

double dkw_epsilon(std::uint64_t n, double alpha) {
  if (n == 0 || !(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("dkw_epsilon: need n >= 1 and 0 < alpha < 1");
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

}  // namespace gilbert
