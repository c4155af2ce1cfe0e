#include "gilbert/tessellation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace gilbert {

double Window::margin_for(double lambda) const {
  return margin < 0.0 ? 8.0 / std::sqrt(lambda) : margin;
}

void Window::validate() const {
  if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height))
    throw std::invalid_argument("window: width and height must be positive");
  if (std::isnan(margin) || std::isinf(margin))
    throw std::invalid_argument("window: margin must be finite");
}

namespace {

struct Dir {
  double ux, uy;
};

Dir unit(Compass c) {
  switch (c) {
    case Compass::east: return {1, 0};
    case Compass::north: return {0, 1};
    case Compass::west: return {-1, 0};
    case Compass::south: return {0, -1};
  }
  return {0, 0};
}

Compass ray_direction(SeedKind k, int slot) {
  if (k == SeedKind::H) return slot == 0 ? Compass::east : Compass::west;
  return slot == 0 ? Compass::north : Compass::south;
}

int ray_slot(Compass c) { return (c == Compass::east || c == Compass::north) ? 0 : 1; }

bool half_pair_allowed(Compass victim, Compass blocker) {
  switch (victim) {
    case Compass::east: return blocker == Compass::south;
    case Compass::south: return blocker == Compass::east;
    case Compass::west: return blocker == Compass::north;
    case Compass::north: return blocker == Compass::west;
  }
  return false;
}

class RayResolver {
 public:
  RayResolver(Model model, std::span<const Seed> seeds, const Box& box)
      : model_(model), seeds_(seeds), box_(box), state_(2 * seeds.size()) {
    const double area = (box.x1 - box.x0) * (box.y1 - box.y0);
    // about two seeds per cell
    cell_ = seeds.empty() ? 1.0 : std::sqrt(2.0 * area / static_cast<double>(seeds.size()));
    cell_ = std::max(cell_, 1e-9 * std::max(box.x1 - box.x0, box.y1 - box.y0));
    nx_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((box.x1 - box.x0) / cell_)));
    ny_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((box.y1 - box.y0) / cell_)));
    for (auto& g : grid_) g.assign(nx_ * ny_, {});
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const Point p = seeds[i].position;
      if (p.x < box.x0 || p.x > box.x1 || p.y < box.y0 || p.y > box.y1)
        throw std::invalid_argument("resolve_rays: seed outside the box");
      grid_[static_cast<int>(seeds[i].kind)][cell_of(p.x, p.y)].push_back(i);
    }
    for (std::size_t r = 0; r < state_.size(); ++r) {
      const Seed& s = seeds_[r / 2];
      const Compass c = ray_direction(s.kind, static_cast<int>(r % 2));
      auto& st = state_[r];
      switch (c) {
        case Compass::east: st.limit = box.x1 - s.position.x; break;
        case Compass::west: st.limit = s.position.x - box.x0; break;
        case Compass::north: st.limit = box.y1 - s.position.y; break;
        case Compass::south: st.limit = s.position.y - box.y0; break;
      }
      st.band = 2.0 * cell_;
    }
  }

  RaySegment resolve(std::size_t r) {
    const Seed& s = seeds_[r / 2];
    RaySegment out;
    out.seed = s;
    out.seed_index = r / 2;
    out.direction = ray_direction(s.kind, static_cast<int>(r % 2));
    blocked_before(r, std::numeric_limits<double>::infinity(), 0);
    const auto& st = state_[r];
    if (st.stop) {
      out.length = *st.stop;
      out.blocker = st.blocker;
      if (model_ == Model::half &&
          !half_pair_allowed(out.direction, ray_direction(seeds_[st.blocker / 2].kind,
                                                          static_cast<int>(st.blocker % 2))))
        throw std::logic_error("resolve_rays: forbidden blocker pair in the half model");
    } else {
      out.length = st.limit;
      out.truncated = true;
    }
    return out;
  }

 private:
  struct Candidate {
    double along;
    double offset;  // distance the blocking ray travels to the crossing
    std::size_t ray;
  };

  struct State {
    std::vector<Candidate> cands;
    std::size_t next = 0;
    double gathered_to = 0.0;
    double band = 1.0;
    double limit = 0.0;
    bool exhausted = false;
    std::optional<double> stop;
    std::size_t blocker = RaySegment::npos;
    bool active = false;
    double active_along = 0.0;
  };

  std::size_t cell_of(double x, double y) const {
    const auto ix = std::min(nx_ - 1, static_cast<std::size_t>(std::max(0.0, (x - box_.x0) / cell_)));
    const auto iy = std::min(ny_ - 1, static_cast<std::size_t>(std::max(0.0, (y - box_.y0) / cell_)));
    return iy * nx_ + ix;
  }

  // Ray r stopped strictly before distance d?
  bool blocked_before(std::size_t r, double d, int depth) {
    if (depth > kMaxDepth) throw std::logic_error("resolve_rays: recursion too deep");
    auto& st = state_[r];
    if (st.stop) return *st.stop < d;
    if (st.active && d > st.active_along)
      throw std::logic_error("resolve_rays: cycle in the blocking recursion");
    for (;;) {
      if (st.next == st.cands.size()) {
        if (st.exhausted || st.gathered_to >= d) return false;
        gather(r);
        continue;
      }
      const Candidate c = st.cands[st.next];
      if (c.along >= d) return false;
      st.active = true;
      st.active_along = c.along;
      const bool blocker_alive = !blocked_before(c.ray, c.offset, depth + 1);
      auto& again = state_[r];
      again.active = false;
      if (blocker_alive) {
        again.stop = c.along;
        again.blocker = c.ray;
        return c.along < d;
      }
      ++again.next;
    }
  }

  // Append the candidates with along in the next band, sorted.
  void gather(std::size_t r) {
    auto& st = state_[r];
    const Seed& s = seeds_[r / 2];
    const Compass dir = ray_direction(s.kind, static_cast<int>(r % 2));
    const Dir u = unit(dir);
    const double lo = st.gathered_to;
    double hi = lo + st.band;
    st.band *= 2.0;
    bool last = false;
    if (hi >= st.limit) {
      hi = st.limit;
      last = true;
    }
    const SeedKind other = s.kind == SeedKind::H ? SeedKind::V : SeedKind::H;
    const Point p = s.position;
    // bounding rectangle of the band's cone
    double xa, xb, ya, yb;
    if (u.ux != 0.0) {
      xa = p.x + u.ux * lo;
      xb = p.x + u.ux * hi;
      ya = p.y - hi;
      yb = p.y + hi;
    } else {
      ya = p.y + u.uy * lo;
      yb = p.y + u.uy * hi;
      xa = p.x - hi;
      xb = p.x + hi;
    }
    if (xa > xb) std::swap(xa, xb);
    if (ya > yb) std::swap(ya, yb);
    xa = std::max(xa, box_.x0);
    xb = std::min(xb, box_.x1);
    ya = std::max(ya, box_.y0);
    yb = std::min(yb, box_.y1);
    const std::size_t first = st.cands.size();
    if (xa <= xb && ya <= yb) {
      const std::size_t c0 = cell_of(xa, ya), c1 = cell_of(xb, yb);
      const std::size_t ix0 = c0 % nx_, iy0 = c0 / nx_, ix1 = c1 % nx_, iy1 = c1 / nx_;
      const auto& bucket = grid_[static_cast<int>(other)];
      for (std::size_t iy = iy0; iy <= iy1; ++iy) {
        for (std::size_t ix = ix0; ix <= ix1; ++ix) {
          for (std::size_t j : bucket[iy * nx_ + ix]) {
            const Point b = seeds_[j].position;
            const double dx = b.x - p.x, dy = b.y - p.y;
            const double along = dx * u.ux + dy * u.uy;
            const double off = u.ux != 0.0 ? dy : dx;
            if (!(along > 0.0) || along < lo) continue;
            if (last ? along > hi : along >= hi) continue;
            if (std::abs(off) > along) continue;
            // the blocker's ray heads from b back toward the victim's line
            Compass w;
            if (u.ux != 0.0)
              w = off > 0.0 ? Compass::south : Compass::north;
            else
              w = off > 0.0 ? Compass::west : Compass::east;
            if (model_ == Model::half) {
              if (off == 0.0) {
                w = dir == Compass::east    ? Compass::south
                    : dir == Compass::south ? Compass::east
                    : dir == Compass::west  ? Compass::north
                                            : Compass::west;
              } else if (!half_pair_allowed(dir, w)) {
                continue;
              }
            }
            st.cands.push_back({along, std::abs(off), 2 * j + static_cast<std::size_t>(ray_slot(w))});
          }
        }
      }
    }
    std::sort(st.cands.begin() + static_cast<std::ptrdiff_t>(first), st.cands.end(),
              [](const Candidate& a, const Candidate& b) {
                return a.along != b.along ? a.along < b.along : a.ray < b.ray;
              });
    st.gathered_to = hi;
    st.exhausted = last;
  }

  static constexpr int kMaxDepth = 20000;

  Model model_;
  std::span<const Seed> seeds_;
  Box box_;
  std::vector<State> state_;
  double cell_ = 1.0;
  std::size_t nx_ = 1, ny_ = 1;
  std::array<std::vector<std::vector<std::size_t>>, 2> grid_;
};

}  // namespace

Point RaySegment::end() const {
  const Dir u = unit(direction);
  return {seed.position.x + u.ux * length, seed.position.y + u.uy * length};
}

std::vector<RaySegment> resolve_rays(Model model, std::span<const Seed> seeds, const Box& box) {
  if (!(box.x1 > box.x0) || !(box.y1 > box.y0))
    throw std::invalid_argument("resolve_rays: empty box");
  RayResolver resolver(model, seeds, box);
  std::vector<RaySegment> out;
  out.reserve(2 * seeds.size());
  for (std::size_t r = 0; r < 2 * seeds.size(); ++r) out.push_back(resolver.resolve(r));
  return out;
}

bool Tessellation::interior(const RaySegment& r) const {
  const Point p = r.seed.position;
  return !r.truncated && p.x >= 0.0 && p.x <= window.width && p.y >= 0.0 &&
         p.y <= window.height;
}

Tessellation generate(Model model, double q, double lambda, const Window& window,
                      RandomStream& rng) {
  window.validate();
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("generate: q must be in [0, 1]");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("generate: lambda must be positive");
  Tessellation t;
  t.model = model;
  t.q = q;
  t.lambda = lambda;
  t.window = window;
  t.window.margin = window.margin_for(lambda);
  const double m = t.window.margin;
  const Box box{-m, -m, window.width + m, window.height + m};
  const double h = box.y1 - box.y0;
  const double expected = lambda * (box.x1 - box.x0) * h;
  if (expected > 1e6) throw std::invalid_argument("generate: more than 1e6 expected seeds");
  // Poisson process swept left to right: exponential gaps in x at rate lambda*h
  double x = box.x0;
  for (;;) {
    x += rng.exponential() / (lambda * h);
    if (x >= box.x1) break;
    const double y = rng.uniform(box.y0, box.y1);
    const SeedKind k = rng.bernoulli(q) ? SeedKind::V : SeedKind::H;
    t.seeds.push_back({{x, y}, k});
  }
  t.rays = resolve_rays(model, t.seeds, box);
  return t;
}

namespace {

// Clip to [0, w] x [0, h]; false if nothing is left.
bool clip(Point& a, Point& b, double w, double h) {
  if (a.y == b.y) {
    if (a.y < 0.0 || a.y > h) return false;
    double lo = std::min(a.x, b.x), hi = std::max(a.x, b.x);
    lo = std::max(lo, 0.0);
    hi = std::min(hi, w);
    if (lo >= hi) return false;
    a.x = lo;
    b.x = hi;
    return true;
  }
  if (a.x < 0.0 || a.x > w) return false;
  double lo = std::min(a.y, b.y), hi = std::max(a.y, b.y);
  lo = std::max(lo, 0.0);
  hi = std::min(hi, h);
  if (lo >= hi) return false;
  a.y = lo;
  b.y = hi;
  return true;
}

}  // namespace

std::string render_svg(std::span<const RaySegment> rays, const Window& window,
                       const SvgStyle& style) {
  window.validate();
  const double s = style.scale;
  const double w = window.width * s, h = window.height * s;
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.3f}\" height=\"{1:.3f}\" "
      "viewBox=\"0 0 {0:.3f} {1:.3f}\">\n",
      w, h);
  out += fmt::format(
      "<rect x=\"0\" y=\"0\" width=\"{:.3f}\" height=\"{:.3f}\" fill=\"white\" stroke=\"black\" "
      "stroke-width=\"{:.3f}\"/>\n",
      w, h, style.stroke_width);
  out += fmt::format("<g stroke=\"black\" stroke-width=\"{:.3f}\" stroke-linecap=\"square\">\n",
                     style.stroke_width);
  for (const auto& r : rays) {
    Point a = r.seed.position, b = r.end();
    if (!clip(a, b, window.width, window.height)) continue;
    // svg y runs downward
    out += fmt::format("<line x1=\"{:.3f}\" y1=\"{:.3f}\" x2=\"{:.3f}\" y2=\"{:.3f}\"/>\n", a.x * s,
                       (window.height - a.y) * s, b.x * s, (window.height - b.y) * s);
  }
  out += "</g>\n";
  if (style.show_seeds) {
    out += "<g fill=\"red\">\n";
    for (std::size_t i = 0; i < rays.size(); ++i) {
      if (i > 0 && rays[i].seed_index == rays[i - 1].seed_index) continue;
      const Point p = rays[i].seed.position;
      if (p.x < 0.0 || p.x > window.width || p.y < 0.0 || p.y > window.height) continue;
      out += fmt::format("<circle cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"{:.3f}\"/>\n", p.x * s,
                         (window.height - p.y) * s, 1.5 * style.stroke_width);
    }
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

void write_segments_csv(std::ostream& os, std::span<const RaySegment> rays) {
  os << "# gilbert-csv v1\n";
  os << "seed_x,seed_y,kind,direction,length,truncated\n";
  for (const auto& r : rays) {
    os << fmt::format("{:.17g},{:.17g},{},{},{:.17g},{}\n", r.seed.position.x, r.seed.position.y,
                      to_string(r.seed.kind), to_string(r.direction), r.length,
                      r.truncated ? 1 : 0);
  }
}

}  // namespace gilbert
