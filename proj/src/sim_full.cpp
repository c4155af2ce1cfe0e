#include "gilbert/sim_full.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "gilbert/parallel.hpp"
#include "gilbert/special_functions.hpp"

namespace gilbert {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kChunk = 1 << 12;

bool horizontal(Compass u) { return u == Compass::east || u == Compass::west; }

void check_direction(const Seed& s, Compass u) {
  if ((s.kind == SeedKind::H) != horizontal(u))
    throw std::invalid_argument("block: H seeds grow east/west, V seeds north/south");
}

// Poisson(w) masses for n in [lo, hi], where everything outside carries
// negligible mass (or is cut by n_max).
struct PoissonWindow {
  int lo = 0;
  std::vector<double> p;
};

PoissonWindow poisson_window(double w, int n_max) {
  PoissonWindow out;
  const double spread = 40.0 * std::sqrt(w) + 50.0;
  out.lo = std::max(0, static_cast<int>(std::floor(w - spread)));
  const int hi = std::min(n_max, static_cast<int>(std::ceil(w + spread)));
  for (int n = out.lo; n <= hi; ++n) out.p.push_back(std::exp(log_poisson_mass(n, w)));
  return out;
}

}  // namespace

const char* to_string(SeedKind k) { return k == SeedKind::H ? "H" : "V"; }

const char* to_string(Compass c) {
  switch (c) {
    case Compass::east: return "east";
    case Compass::north: return "north";
    case Compass::west: return "west";
    case Compass::south: return "south";
  }
  return "unknown";
}

BlockResolver::Memo::Memo() { blocked_from.fill(kInfinity); }

BlockResolver::BlockResolver(std::span<const Seed> seeds) {
  for (const auto& s : seeds) add(s);
}

std::size_t BlockResolver::add(const Seed& s) {
  seeds_.push_back(s);
  memo_.emplace_back();
  return seeds_.size() - 1;
}

void BlockResolver::clear() {
  seeds_.clear();
  memo_.clear();
  calls_ = 0;
}

bool BlockResolver::blocked(std::size_t index, double d, Compass u) {
  if (index >= seeds_.size()) throw std::out_of_range("BlockResolver: bad seed index");
  check_direction(seeds_[index], u);
  return search(seeds_[index], index, d, u, 0);
}

bool BlockResolver::blocked(const Seed& s, double d, Compass u) {
  check_direction(s, u);
  return search(s, std::nullopt, d, u, 0);
}

// "Blocked strictly before distance d". A transversal seed at along-distance
// a < d and offset |p| <= a reaches the line first; it blocks unless its own
// ray is stopped strictly before |p|. Distances strictly decrease down the
// recursion, and an exact tie stops both rays.
bool BlockResolver::search(const Seed& s, std::optional<std::size_t> self, double d, Compass u,
                           int depth) {
  if (!(d > 0.0)) return false;
  ++calls_;
  const auto dir = static_cast<std::size_t>(u);
  if (self) {
    const auto& m = memo_[*self];
    if (d <= m.clear_to[dir]) return false;
    if (d >= m.blocked_from[dir]) return true;
  }
  if (depth > 4 * static_cast<int>(seeds_.size()) + 8)
    throw std::logic_error("block: recursion depth exceeded, resolver is cycling");

  const double ux = u == Compass::east ? 1.0 : u == Compass::west ? -1.0 : 0.0;
  const double uy = u == Compass::north ? 1.0 : u == Compass::south ? -1.0 : 0.0;
  const SeedKind blocker = s.kind == SeedKind::H ? SeedKind::V : SeedKind::H;
  bool result = false;
  for (std::size_t j = 0; j < seeds_.size(); ++j) {
    if (self && j == *self) continue;
    const Seed& b = seeds_[j];
    if (b.kind != blocker) continue;
    const double dx = b.position.x - s.position.x, dy = b.position.y - s.position.y;
    const double along = dx * ux + dy * uy;
    if (!(along > 0.0 && along < d)) continue;
    const double offset = horizontal(u) ? dy : dx;
    if (std::abs(offset) > along) continue;
    const Compass toward = horizontal(u) ? (offset > 0 ? Compass::south : Compass::north)
                                         : (offset > 0 ? Compass::west : Compass::east);
    if (!search(b, j, std::abs(offset), toward, depth + 1)) {
      result = true;
      break;
    }
  }
  if (self) {
    auto& m = memo_[*self];
    if (result) m.blocked_from[dir] = std::min(m.blocked_from[dir], d);
    else m.clear_to[dir] = std::max(m.clear_to[dir], d);
  }
  return result;
}

bool block(const Seed& s_star, double d, Compass u, std::span<const Seed> seeds) {
  BlockResolver r(seeds);
  return r.blocked(s_star, d, u);
}

namespace {

EpisodeRecord episode_with(BlockResolver& resolver, RandomStream& rng, double q, int n_cap) {
  resolver.clear();
  double area = rng.exponential();  // S_1
  double crossing = kInfinity;      // X_k
  for (int k = 1; k <= n_cap; ++k) {
    const double next_area = area + rng.exponential();
    // s_k uniform on the two eastern sides of S_k
    const double half_diag = std::sqrt(area / 2.0);
    const double side = rng.uniform() < 0.5 ? 1.0 : -1.0;
    const double t = rng.uniform();
    const Seed s{{half_diag * (1.0 + t), side * half_diag * (1.0 - t)},
                 rng.bernoulli(q) ? SeedKind::H : SeedKind::V};
    const auto idx = resolver.add(s);
    if (s.kind == SeedKind::V) {
      const double reach = std::abs(s.position.y);
      const Compass toward = side > 0 ? Compass::south : Compass::north;
      if (!resolver.blocked(idx, reach, toward)) crossing = std::min(crossing, s.position.x);
    }
    if (crossing < std::sqrt(next_area / 2.0)) return {k, k + 1};
    area = next_area;
  }
  return {std::nullopt, n_cap + 1};
}

}  // namespace

EpisodeRecord run_episode(RandomStream& rng, double q, int n_cap) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("run_episode: q must lie in [0,1]");
  if (n_cap < 1) throw std::invalid_argument("run_episode: n_cap must be >= 1");
  BlockResolver resolver;
  return episode_with(resolver, rng, q, n_cap);
}

void FullSimConfig::validate() const {
  if (q < 0 || q > 1) throw std::invalid_argument("FullSimConfig: q must lie in [0,1]");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("FullSimConfig: lambda must be finite and > 0");
  if (episodes < 1) throw std::invalid_argument("FullSimConfig: episodes must be >= 1");
  if (n_cap < 1) throw std::invalid_argument("FullSimConfig: n_cap must be >= 1");
}

HHatEstimate estimate(const FullSimConfig& cfg) {
  cfg.validate();
  const double q = cfg.q.get_d();
  struct Partial {
    std::vector<std::uint64_t> hist;
    std::uint64_t capped = 0, sq = 0, sq2 = 0;
    int max_sq = 0;
  };
  const std::size_t chunks = (cfg.episodes + kChunk - 1) / kChunk;
  auto parts = run_chunks<Partial>(chunks, cfg.threads, [&](std::size_t c) {
    Partial p;
    p.hist.assign(static_cast<std::size_t>(cfg.n_cap) + 1, 0);
    BlockResolver resolver;
    const std::uint64_t lo = c * kChunk, hi = std::min(cfg.episodes, lo + kChunk);
    for (std::uint64_t i = lo; i < hi; ++i) {
      RandomStream rng(cfg.master_seed, i);
      const auto rec = episode_with(resolver, rng, q, cfg.n_cap);
      if (rec.blocking_index) ++p.hist[*rec.blocking_index];
      else ++p.capped;
      const auto sq = static_cast<std::uint64_t>(rec.squares_created);
      p.sq += sq;
      p.sq2 += sq * sq;
      p.max_sq = std::max(p.max_sq, rec.squares_created);
    }
    return p;
  });

  HHatEstimate est;
  est.q = cfg.q;
  est.lambda = cfg.lambda;
  est.n_cap = cfg.n_cap;
  est.episodes = cfg.episodes;
  est.blocked_at.assign(static_cast<std::size_t>(cfg.n_cap) + 1, 0);
  for (const auto& p : parts) {
    for (std::size_t k = 0; k < p.hist.size(); ++k) est.blocked_at[k] += p.hist[k];
    est.capped += p.capped;
    est.squares_sum += p.sq;
    est.squares_sq_sum += p.sq2;
    est.max_squares = std::max(est.max_squares, p.max_sq);
  }
  return est;
}

double HHatEstimate::h_hat(int n) const {
  if (n < 0 || n > n_cap) throw std::out_of_range("h_hat: n outside 0..n_cap");
  std::uint64_t blocked = 0;
  for (int k = 1; k <= n; ++k) blocked += blocked_at[k];
  return static_cast<double>(episodes - blocked) / static_cast<double>(episodes);
}

double HHatEstimate::h_hat_se(int n) const {
  const double p = h_hat(n);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(episodes));
}

std::vector<double> HHatEstimate::h_hat_all() const {
  std::vector<double> out(static_cast<std::size_t>(n_cap) + 1);
  std::uint64_t survivors = episodes;
  for (int n = 0; n <= n_cap; ++n) {
    if (n > 0) survivors -= blocked_at[n];
    out[n] = static_cast<double>(survivors) / static_cast<double>(episodes);
  }
  return out;
}

double HHatEstimate::mean_squares() const {
  return static_cast<double>(squares_sum) / static_cast<double>(episodes);
}

double HHatEstimate::mean_squares_se() const {
  const double n = static_cast<double>(episodes);
  if (episodes < 2) return 0.0;
  const double m = mean_squares();
  const double var = (static_cast<double>(squares_sq_sum) - n * m * m) / (n - 1.0);
  return std::sqrt(std::max(0.0, var) / n);
}

LengthEstimate mean_length(const HHatEstimate& est, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("mean_length: lambda must be finite and > 0");
  if (est.episodes == 0) throw std::invalid_argument("mean_length: empty estimate");
  // g(k) = sum_{n<k} Gamma(n+1/2)/n!, the per-episode statistic for n* = k
  double g = 0.0, sum = 0.0, sum_sq = 0.0;
  for (int k = 1; k <= est.n_cap + 1; ++k) {
    g += std::exp(std::lgamma(k - 0.5) - std::lgamma(static_cast<double>(k)));
    const double count = static_cast<double>(k <= est.n_cap ? est.blocked_at[k] : est.capped);
    sum += count * g;
    sum_sq += count * g * g;
  }
  const double n = static_cast<double>(est.episodes);
  const double mean = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
  const double scale = 2.0 * std::sqrt(2.0 * lambda);
  return {mean / scale, std::sqrt(var / n) / scale, est.capped > 0};
}

FullLengthLaw::FullLengthLaw(const HHatEstimate& est, double lambda)
    : h_(est.h_hat_all()), lambda_(lambda), n_cap_(est.n_cap) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("FullLengthLaw: lambda must be finite and > 0");
  counts_.assign(est.blocked_at.begin(), est.blocked_at.end());
  counts_.resize(static_cast<std::size_t>(n_cap_) + 2, 0);
  counts_[n_cap_ + 1] = est.capped;
}

double FullLengthLaw::functional_se(double ell, bool density) const {
  if (!(ell >= 0.0)) throw std::invalid_argument("full-model law: ell must be >= 0");
  const double w = 2.0 * lambda_ * ell * ell;
  const auto win = poisson_window(w, n_cap_);
  const auto p = [&](int n) {
    const int i = n - win.lo;
    return (i >= 0 && i < static_cast<int>(win.p.size())) ? win.p[i] : 0.0;
  };
  double n_total = 0.0, sum = 0.0, sum_sq = 0.0, g = 0.0;
  for (int k = 1; k <= n_cap_ + 1; ++k) {
    g += p(k - 1);
    const double f = density ? 4.0 * lambda_ * ell * p(k - 1) : g;
    const double c = static_cast<double>(counts_[k]);
    n_total += c;
    sum += c * f;
    sum_sq += c * f * f;
  }
  if (n_total < 2.0) return 0.0;
  const double mean = sum / n_total;
  const double var = std::max(0.0, (sum_sq - n_total * mean * mean) / (n_total - 1.0));
  return std::sqrt(var / n_total);
}

double FullLengthLaw::cdf_se(double ell) const { return functional_se(ell, false); }

double FullLengthLaw::pdf_se(double ell) const { return functional_se(ell, true); }

SeriesValue FullLengthLaw::cdf(double ell) const {
  if (!(ell >= 0.0)) throw std::invalid_argument("full-model cdf: ell must be >= 0");
  const double w = 2.0 * lambda_ * ell * ell;
  const auto win = poisson_window(w, n_cap_);
  double survival = 0.0;
  for (std::size_t i = 0; i < win.p.size(); ++i) survival += h_[win.lo + i] * win.p[i];
  SeriesValue out;
  out.value = 1.0 - survival;
  out.tail_bound = poisson_upper_tail(n_cap_ + 1, w);
  out.truncated = out.tail_bound > kSeriesTailLimit;
  return out;
}

SeriesValue FullLengthLaw::pdf(double ell) const {
  if (!(ell >= 0.0)) throw std::invalid_argument("full-model pdf: ell must be >= 0");
  const double w = 2.0 * lambda_ * ell * ell;
  const auto win = poisson_window(w, n_cap_);
  // exact derivative of the cdf truncated after n_cap
  double s = 0.0;
  for (std::size_t i = 0; i < win.p.size(); ++i) {
    const int n = win.lo + static_cast<int>(i);
    const double next = n < n_cap_ ? h_[n + 1] : 0.0;
    s += (h_[n] - next) * win.p[i];
  }
  SeriesValue out;
  out.value = 4.0 * lambda_ * ell * s;
  out.tail_bound = 4.0 * lambda_ * ell * poisson_upper_tail(n_cap_, w);
  out.truncated = out.tail_bound > kSeriesTailLimit;
  return out;
}

SeriesValue full_cdf(const HHatEstimate& est, double lambda, double ell) {
  return FullLengthLaw(est, lambda).cdf(ell);
}

SeriesValue full_pdf(const HHatEstimate& est, double lambda, double ell) {
  return FullLengthLaw(est, lambda).pdf(ell);
}

FractionEstimate naive_h_hat(int n, std::uint64_t reps, double q, std::uint64_t master_seed,
                             int threads) {
  if (n < 0) throw std::invalid_argument("naive_h_hat: n must be >= 0");
  if (reps < 1) throw std::invalid_argument("naive_h_hat: reps must be >= 1");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("naive_h_hat: q must lie in [0,1]");
  const std::size_t chunks = (reps + kChunk - 1) / kChunk;
  const Seed test{{0.0, 0.0}, SeedKind::H};
  auto counts = run_chunks<std::uint64_t>(chunks, threads, [&](std::size_t c) {
    std::uint64_t clear = 0;
    BlockResolver resolver;
    const std::uint64_t lo = c * kChunk, hi = std::min(reps, lo + kChunk);
    for (std::uint64_t i = lo; i < hi; ++i) {
      RandomStream rng(master_seed, i);
      resolver.clear();
      for (int j = 0; j < n; ++j) {
        const double a = rng.uniform(), b = rng.uniform();
        resolver.add({{a + b, a - b}, rng.bernoulli(q) ? SeedKind::H : SeedKind::V});
      }
      if (!resolver.blocked(test, 1.0, Compass::east)) ++clear;
    }
    return clear;
  });
  std::uint64_t clear = 0;
  for (auto c : counts) clear += c;
  const double p = static_cast<double>(clear) / static_cast<double>(reps);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(reps))};
}

std::vector<double> line_length_distribution(const HHatEstimate& est, double lambda,
                                             std::span<const double> grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  const special::QuadOptions opts{1e-12, 1e-9, 2000};
  const FullLengthLaw law(est, lambda);
  auto f = [&](double t) { return law.pdf(t).value; };
  for (double x : grid) {
    if (!(x >= 0.0)) throw std::invalid_argument("line_length_distribution: grid points must be >= 0");
    if (x == 0.0) {
      out.push_back(0.0);
      continue;
    }
    // symmetric integrand, so integrate over half the range
    const auto r = special::integrate([&](double t) { return f(t) * f(x - t); }, 0.0, 0.5 * x, opts);
    out.push_back(2.0 * r.value);
  }
  return out;
}

std::vector<mpq_class> full_model_exact_h() {
  return {mpq_class(1), mpq_class(3, 4), mpq_class(7, 12), mpq_class(7, 15)};
}

TaylorComparison taylor_check() {
  TaylorComparison t;
  const auto h = compute_h(mpq_class(1, 2), 3);
  t.half = poisson_mixture_taylor(h.values(), mpq_class(1), 3);  // s = lambda/2, lambda = 2
  const auto hbar = full_model_exact_h();
  t.full = poisson_mixture_taylor(hbar, mpq_class(2), 3);  // s = 2 lambda, lambda = 1
  return t;
}

}  // namespace gilbert
