#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gilbert/meanfield.hpp"
#include "gilbert/rng.hpp"
#include "gilbert/sim_full.hpp"

namespace gilbert {

/// Inner view [0, width] x [0, height]; seeds are drawn in the view plus a
/// buffer of the given width on every side. A negative margin means the
/// default 8/sqrt(lambda).
struct Window {
  double width = 10.0;
  double height = 10.0;
  double margin = -1.0;

  double margin_for(double lambda) const;
  void validate() const;
};

struct Box {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
};

struct RaySegment {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  Seed seed;
  std::size_t seed_index = 0;
  Compass direction = Compass::east;
  double length = 0.0;
  bool truncated = false;        // ran into the edge of the seed box
  std::size_t blocker = npos;    // index of the blocking ray, if any

  Point end() const;
};

/// Two rays per seed (H: east, west; V: north, south) stored at 2i, 2i+1.
/// A ray stops at the first crossing, in order of distance, where the
/// transversal ray arrives no later and has not itself been stopped
/// earlier. Rays that are never stopped end on the box edge.
std::vector<RaySegment> resolve_rays(Model model, std::span<const Seed> seeds, const Box& box);

struct Tessellation {
  Model model = Model::full;
  double q = 0.5;
  double lambda = 1.0;
  Window window;  // margin resolved
  std::vector<Seed> seeds;
  std::vector<RaySegment> rays;

  /// Seed inside the view and the ray not truncated.
  bool interior(const RaySegment& r) const;
};

Tessellation generate(Model model, double q, double lambda, const Window& window,
                      RandomStream& rng);

struct SvgStyle {
  double scale = 40.0;  // pixels per unit length
  double stroke_width = 1.0;
  bool show_seeds = false;
};

/// Segments clipped to the view. Fixed-precision output, so identical
/// inputs give identical bytes.
std::string render_svg(std::span<const RaySegment> rays, const Window& window,
                       const SvgStyle& style = {});

void write_segments_csv(std::ostream& os, std::span<const RaySegment> rays);

}  // namespace gilbert
