#include "metafal/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace metafal {

double normalize_angle(double angle) {
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) {
    a += 2.0 * kPi;
  }
  return a;
}

double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 a) { return std::hypot(a.x, a.y); }
Vec2 unit_from_angle(double angle) { return {std::cos(angle), std::sin(angle)}; }

Pose2::Pose2(double x, double y, double heading)
    : x_(x), y_(y), heading_(normalize_angle(heading)) {}

Vec2 Pose2::to_world(Vec2 local) const {
  const double c = std::cos(heading_);
  const double s = std::sin(heading_);
  return {x_ + c * local.x - s * local.y, y_ + s * local.x + c * local.y};
}

Vec2 Pose2::to_local(Vec2 world) const {
  const double c = std::cos(heading_);
  const double s = std::sin(heading_);
  const double dx = world.x - x_;
  const double dy = world.y - y_;
  return {c * dx + s * dy, -s * dx + c * dy};
}

bool Disc::valid() const {
  return std::isfinite(cx) && std::isfinite(cy) && std::isfinite(r) && r > 0.0;
}

std::array<Vec2, 4> OrientedRect::corners() const {
  const double hl = 0.5 * length;
  const double hw = 0.5 * width;
  // Counter-clockwise starting at the front-left corner.
  return {center.to_world({hl, hw}), center.to_world({-hl, hw}),
          center.to_world({-hl, -hw}), center.to_world({hl, -hw})};
}

TrackGeometry::TrackGeometry(Centerline centerline, double x_start, double x_end,
                             double half_width, double end_zone_start,
                             double sample_step, double pad)
    : centerline_(std::move(centerline)),
      x_start_(x_start),
      x_end_(x_end),
      half_width_(half_width),
      end_zone_start_(end_zone_start),
      step_(sample_step),
      x0_(x_start - pad) {
  if (!(x_start < x_end) || !(half_width > 0.0) || !(sample_step > 0.0) || !(pad >= 0.0)) {
    throw std::invalid_argument("TrackGeometry: invalid range, width or sampling step");
  }
  if (!centerline_.value || !centerline_.slope) {
    throw std::invalid_argument("TrackGeometry: centerline functions required");
  }
  const auto n = static_cast<std::size_t>(std::ceil((x_end + pad - x0_) / step_)) + 1;
  xs_.resize(n);
  cs_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs_[i] = x0_ + static_cast<double>(i) * step_;
    cs_[i] = centerline_.value(xs_[i]);
  }
}

double TrackGeometry::centerline_sampled(double x) const {
  const auto last = static_cast<std::ptrdiff_t>(xs_.size()) - 2;
  auto idx = static_cast<std::ptrdiff_t>(std::floor((x - x0_) / step_));
  idx = std::clamp<std::ptrdiff_t>(idx, 0, last);
  const auto i = static_cast<std::size_t>(idx);
  const double t = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
  return cs_[i] + t * (cs_[i + 1] - cs_[i]);
}

bool TrackGeometry::in_band(Vec2 p) const {
  return std::abs(p.y - centerline_sampled(p.x)) <= half_width_;
}

Region TrackGeometry::region_at(Vec2 p) const {
  if (!in_band(p)) {
    return Region::kShoulder;
  }
  return p.x >= end_zone_start_ ? Region::kEndZone : Region::kDrivable;
}

std::pair<std::ptrdiff_t, std::ptrdiff_t> TrackGeometry::vertex_window(double x_lo,
                                                                        double x_hi) const {
  const auto last = static_cast<std::ptrdiff_t>(xs_.size()) - 1;
  auto first = static_cast<std::ptrdiff_t>(std::floor((x_lo - x0_) / step_)) - 1;
  auto end = static_cast<std::ptrdiff_t>(std::ceil((x_hi - x0_) / step_)) + 1;
  first = std::max<std::ptrdiff_t>(first, 0);
  end = std::min(end, last);
  return {first, end};
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

double ray_segment_hit(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b) {
  const Vec2 e = b - a;
  const double denom = cross(dir, e);
  if (std::abs(denom) < 1e-15) {
    return -1.0;
  }
  const Vec2 ao = a - origin;
  const double t = cross(ao, e) / denom;
  const double s = cross(ao, dir) / denom;
  if (t < 0.0 || s < 0.0 || s > 1.0) {
    return -1.0;
  }
  return t;
}

double ray_disc_hit(Vec2 origin, Vec2 dir, const Disc& disc) {
  const Vec2 m = origin - disc.center();
  const double b = dot(m, dir);
  const double c = dot(m, m) - disc.r * disc.r;
  if (c <= 0.0) {
    return 0.0;
  }
  if (b > 0.0) {
    return -1.0;
  }
  const double disc_term = b * b - c;
  if (disc_term < 0.0) {
    return -1.0;
  }
  return -b - std::sqrt(disc_term);
}

double rect_to_disc_distance(const OrientedRect& rect, const Disc& disc) {
  const Vec2 q = rect.center.to_local(disc.center());
  const double dx = std::abs(q.x) - 0.5 * rect.length;
  const double dy = std::abs(q.y) - 0.5 * rect.width;
  if (dx > 0.0 || dy > 0.0) {
    return std::hypot(std::max(dx, 0.0), std::max(dy, 0.0)) - disc.r;
  }
  return std::max(dx, dy) - disc.r;
}

namespace {

// Vertical extent of a convex polygon at abscissa x.
std::optional<std::pair<double, double>> vertical_slice(const std::array<Vec2, 4>& poly,
                                                        double x) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % poly.size()];
    const double xmin = std::min(a.x, b.x);
    const double xmax = std::max(a.x, b.x);
    if (x < xmin || x > xmax) {
      continue;
    }
    if (a.x == b.x) {
      lo = std::min({lo, a.y, b.y});
      hi = std::max({hi, a.y, b.y});
      continue;
    }
    const double t = (x - a.x) / (b.x - a.x);
    const double y = a.y + t * (b.y - a.y);
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  if (lo > hi) {
    return std::nullopt;
  }
  return std::make_pair(lo, hi);
}

double point_box_distance(Vec2 p, double hl, double hw) {
  return std::hypot(std::max(std::abs(p.x) - hl, 0.0), std::max(std::abs(p.y) - hw, 0.0));
}

}  // namespace

double rect_to_shoulders_distance(const OrientedRect& rect, const TrackGeometry& track) {
  const auto corners = rect.corners();
  double xmin = corners[0].x;
  double xmax = corners[0].x;
  for (const Vec2& c : corners) {
    xmin = std::min(xmin, c.x);
    xmax = std::max(xmax, c.x);
  }

  // Largest excursion beyond either boundary. Between polyline vertices the
  // boundary is linear, so the maximum over the rectangle sits at a corner
  // or on a vertical line through a vertex.
  double penetration = -std::numeric_limits<double>::infinity();
  double upper_bound = std::numeric_limits<double>::infinity();
  for (const Vec2& c : corners) {
    const double up = c.y - track.upper(c.x);
    const double down = track.lower(c.x) - c.y;
    penetration = std::max({penetration, up, down});
    upper_bound = std::min({upper_bound, -up, -down});
  }
  const auto [first, last] = track.vertex_window(xmin, xmax);
  for (std::ptrdiff_t k = first; k <= last; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double vx = track.vertex_x(i);
    if (vx <= xmin || vx >= xmax) {
      continue;
    }
    const auto slice = vertical_slice(corners, vx);
    if (!slice) {
      continue;
    }
    penetration = std::max({penetration, slice->second - track.upper_vertex(i).y,
                            track.lower_vertex(i).y - slice->first});
  }
  if (penetration > 0.0) {
    return -penetration;
  }
  if (upper_bound <= 0.0) {
    return 0.0;
  }

  // Disjoint: the clearance is attained at a vertex of the rectangle or of a
  // boundary segment. Segments farther in x than the vertical corner gap
  // cannot beat it.
  const double hl = 0.5 * rect.length;
  const double hw = 0.5 * rect.width;
  std::array<Vec2, 4> box{Vec2{hl, hw}, Vec2{-hl, hw}, Vec2{-hl, -hw}, Vec2{hl, -hw}};
  double best = upper_bound;
  const auto [wfirst, wlast] = track.vertex_window(xmin - upper_bound, xmax + upper_bound);
  for (std::ptrdiff_t k = wfirst; k < wlast; ++k) {
    const auto i = static_cast<std::size_t>(k);
    for (int side = 0; side < 2; ++side) {
      const Vec2 a = rect.center.to_local(side == 0 ? track.upper_vertex(i) : track.lower_vertex(i));
      const Vec2 b =
          rect.center.to_local(side == 0 ? track.upper_vertex(i + 1) : track.lower_vertex(i + 1));
      best = std::min({best, point_box_distance(a, hl, hw), point_box_distance(b, hl, hw)});
      for (const Vec2& corner : box) {
        best = std::min(best, point_segment_distance(corner, a, b));
      }
    }
  }
  return best;
}

bool rect_in_end_zone(const OrientedRect& rect, const TrackGeometry& track) {
  for (const Vec2& c : rect.corners()) {
    if (c.x < track.end_zone_start() || c.x > track.x_end()) {
      return false;
    }
  }
  return true;
}

bool sector_intersects_disc(const SectorFOV& fov, const Disc& disc, bool conservative) {
  double range = fov.range;
  double half_angle = fov.half_angle;
  double radius = disc.r;
  if (conservative) {
    range += 1e-7;
    radius += 1e-7;
    half_angle = std::min(kPi, half_angle + 1e-7);
  }
  const Vec2 apex = fov.apex.position();
  const Vec2 rel = disc.center() - apex;
  const double d = norm(rel);
  if (d <= radius) {
    return true;
  }
  const double theta = normalize_angle(std::atan2(rel.y, rel.x) - fov.apex.heading());
  if (std::abs(theta) <= half_angle) {
    // Centre inside the angular span: the nearest sector point is the centre
    // itself or the arc.
    return d <= range + radius;
  }
  for (double side : {-1.0, 1.0}) {
    const Vec2 tip = apex + range * unit_from_angle(fov.apex.heading() + side * half_angle);
    if (point_segment_distance(disc.center(), apex, tip) <= radius) {
      return true;
    }
  }
  return false;
}

double cast_ray(const Pose2& origin, double bearing, double max_range,
                const TrackGeometry& track, std::span<const Disc> obstacles) {
  const Vec2 o = origin.position();
  const Vec2 dir = unit_from_angle(origin.heading() + bearing);
  double best = max_range;
  for (const Disc& d : obstacles) {
    const double t = ray_disc_hit(o, dir, d);
    if (t >= 0.0 && t < best) {
      best = t;
    }
  }

  const Vec2 end = o + max_range * dir;
  const auto [first, last] = track.vertex_window(std::min(o.x, end.x), std::max(o.x, end.x));
  // Along a ray, x is monotone in the hit distance, and the boundary
  // segments are ordered by x: the first segment hit in ray order is the
  // nearest one.
  const bool forward = dir.x >= 0.0;
  for (int side = 0; side < 2; ++side) {
    for (std::ptrdiff_t n = 0; n < last - first; ++n) {
      const auto k = static_cast<std::size_t>(forward ? first + n : last - 1 - n);
      const Vec2 a = side == 0 ? track.upper_vertex(k) : track.lower_vertex(k);
      const Vec2 b = side == 0 ? track.upper_vertex(k + 1) : track.lower_vertex(k + 1);
      const double t = ray_segment_hit(o, dir, a, b);
      if (t >= 0.0) {
        best = std::min(best, t);
        break;
      }
    }
  }
  return std::min(best, max_range);
}

}  // namespace metafal
