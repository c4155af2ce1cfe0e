#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gilbert/analytic_recurrence.hpp"
#include "gilbert/exact_moments.hpp"
#include "gilbert/sim_half.hpp"
#include "support/cdf_table.hpp"

using namespace gilbert;

TEST_CASE("first trapezoid base is Rayleigh") {
  const double lambda = 1.7;
  std::vector<double> r;
  for (std::uint64_t i = 0; i < 1'000'000; ++i) {
    RandomStream rng(11, i);
    r.push_back(half_step({}, 0.5, lambda, rng).r);
  }
  std::sort(r.begin(), r.end());
  const double d = ks_statistic(r, [&](double x) { return 1.0 - std::exp(-0.5 * lambda * x * x); });
  CHECK(d < dkw_epsilon(r.size(), 0.01));
}

TEST_CASE("area increments are exponential along a whole episode") {
  const double lambda = 2.0;
  std::vector<double> areas;
  for (std::uint64_t i = 0; areas.size() < 500'000; ++i) {
    RandomStream rng(5, i);
    TrapezoidState st;
    for (;;) {
      const auto s = half_step(st, 0.75, lambda, rng);
      // recompute from the geometry rather than trusting the field
      areas.push_back(s.r * st.y + 0.5 * s.r * s.r);
      if (s.kind == StopKind::V) break;
      CHECK(s.next.y <= s.r + st.y);
      st = s.next;
    }
  }
  std::sort(areas.begin(), areas.end());
  const double d = ks_statistic(areas, [&](double a) { return -std::expm1(-lambda * a); });
  CHECK(d < dkw_epsilon(areas.size(), 0.01));
}

TEST_CASE("q = 0 stops at the first seed with the Rayleigh mean") {
  HalfSimConfig cfg;
  cfg.q = 0;
  cfg.lambda = 3.0;
  cfg.samples = 400'000;
  const auto rep = monte_carlo_report(cfg);
  CHECK(rep.mean_steps == 1.0);
  CHECK(rep.steps_se == 0.0);
  CHECK(std::abs(rep.mean - std::sqrt(std::numbers::pi / (2 * cfg.lambda))) < 4 * rep.mean_se);
}

TEST_CASE("step count is geometric") {
  for (const mpq_class q : {mpq_class(1, 2), mpq_class(1, 4)}) {
    HalfSimConfig cfg;
    cfg.q = q;
    cfg.samples = 500'000;
    const auto samples = sample_many(cfg);
    std::vector<double> observed(10, 0.0);
    for (const auto& s : samples) observed[std::min(s.steps, 10) - 1] += 1.0;
    const double qd = q.get_d();
    double chi2 = 0.0;
    for (int k = 1; k <= 10; ++k) {
      const double p = k < 10 ? std::pow(qd, k - 1) * (1 - qd) : std::pow(qd, 9);
      const double e = p * cfg.samples;
      chi2 += (observed[k - 1] - e) * (observed[k - 1] - e) / e;
    }
    // chi-square(9) 99% quantile
    CHECK(chi2 < 21.665994);
    const auto rep = monte_carlo_report(cfg);
    CHECK(std::abs(rep.mean_steps - 1.0 / (1.0 - qd)) < 4 * rep.steps_se);
  }
}

TEST_CASE("survival at q = 1/2, lambda = 2 matches the series") {
  HalfSimConfig cfg;
  cfg.lambda = 2.0;
  cfg.samples = 1'000'000;
  cfg.master_seed = 77;
  cfg.survival_grid = {0.5, 1.0, 2.0};
  const auto rep = monte_carlo_report(cfg);
  const auto h = compute_h(mpq_class(1, 2), 200);
  for (std::size_t i = 0; i < cfg.survival_grid.size(); ++i) {
    CAPTURE(cfg.survival_grid[i]);
    const double exact = 1.0 - cdf(h, {2.0, 200}, cfg.survival_grid[i]).value;
    CHECK(std::abs(rep.survival[i] - exact) < 4 * rep.survival_se[i]);
  }
  CHECK(std::abs(rep.mean - expected_length_exact(2.0)) < 4 * rep.mean_se);
}

TEST_CASE("empirical cdf stays inside the DKW band around the series") {
  for (const mpq_class q : {mpq_class(1, 4), mpq_class(1, 2), mpq_class(3, 4)}) {
    CAPTURE(q.get_d());
    // 200 terms are accurate to ell = 14 at lambda = 1; the band is uniform
    // in ell so testing the sup on [0, 14] only is still a valid check.
    const testing::CdfTable table(compute_h(q, 200), 1.0, 14.0);
    HalfSimConfig cfg;
    cfg.q = q;
    cfg.samples = 1'000'000;
    cfg.master_seed = 2024;
    std::vector<double> lengths;
    for (const auto& s : sample_many(cfg)) lengths.push_back(s.length);
    std::sort(lengths.begin(), lengths.end());
    CHECK(ks_statistic(lengths, table, 14.0) < dkw_epsilon(lengths.size(), 0.01));
  }
}

TEST_CASE("mean and second moment at q = 1/2, lambda = 1") {
  HalfSimConfig cfg;
  cfg.samples = 2'000'000;
  cfg.master_seed = 9;
  const auto rep = monte_carlo_report(cfg);
  CHECK(std::abs(rep.mean - 2.0920992) < 4 * rep.mean_se);
  CHECK(std::abs(rep.second_moment - 6.37688) < 4 * rep.second_moment_se);
}

TEST_CASE("lambda = 4 rescales the lambda = 1 report exactly") {
  HalfSimConfig cfg;
  cfg.q = mpq_class(3, 10);
  cfg.samples = 100'000;
  cfg.survival_grid = {0.25, 0.5};
  const auto one = monte_carlo_report(cfg);
  cfg.lambda = 4.0;
  cfg.survival_grid = {0.125, 0.25};
  const auto four = monte_carlo_report(cfg);
  CHECK(four.mean == one.mean / 2);
  CHECK(four.mean_se == one.mean_se / 2);
  CHECK(four.second_moment == one.second_moment / 4);
  CHECK(four.mean_steps == one.mean_steps);
  CHECK(four.survival == one.survival);
}

TEST_CASE("reports are identical for any thread count") {
  HalfSimConfig cfg;
  cfg.samples = 300'000;
  cfg.survival_grid = {1.0, 3.0};
  cfg.threads = 1;
  const auto a = monte_carlo_report(cfg);
  cfg.threads = 4;
  const auto b = monte_carlo_report(cfg);
  CHECK(a.mean == b.mean);
  CHECK(a.second_moment == b.second_moment);
  CHECK(a.mean_se == b.mean_se);
  CHECK(a.survival == b.survival);
}

TEST_CASE("bad input") {
  RandomStream rng(1, 1);
  CHECK_THROWS_AS(sample_ray_length(1.0, 1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_ray_length(0.5, 0.0, rng), std::invalid_argument);
  HalfSimConfig cfg;
  cfg.samples = 0;
  CHECK_THROWS_AS(monte_carlo_report(cfg), std::invalid_argument);
  const std::vector<double> unsorted{2.0, 1.0};
  CHECK_THROWS_AS(ks_statistic(unsorted, [](double) { return 0.5; }), std::invalid_argument);
  CHECK_THROWS_AS(dkw_epsilon(0, 0.01), std::invalid_argument);
  CHECK(dkw_epsilon(1'000'000, 0.01) == doctest::Approx(std::sqrt(std::log(200.0) / 2e6)));
}
