#pragma once

#include <array>
#include <compare>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace metafal {

inline constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

double dot(Vec2 a, Vec2 b);
double cross(Vec2 a, Vec2 b);
double norm(Vec2 a);
Vec2 unit_from_angle(double angle);

class Pose2 {
 public:
  Pose2() = default;
  Pose2(double x, double y, double heading);

  double x() const { return x_; }
  double y() const { return y_; }
  double heading() const { return heading_; }
  Vec2 position() const { return {x_, y_}; }

  /// Point expressed in this pose's frame, mapped to the world frame.
  Vec2 to_world(Vec2 local) const;
  /// World point mapped into this pose's frame.
  Vec2 to_local(Vec2 world) const;

  friend bool operator==(const Pose2&, const Pose2&) = default;

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double heading_ = 0.0;
};

/// Circular element [x, y, r]. Ordering is lexicographic and only used to
/// compare collections as multisets.
struct Disc {
  double cx = 0.0;
  double cy = 0.0;
  double r = 0.0;

  Vec2 center() const { return {cx, cy}; }
  bool valid() const;

  friend auto operator<=>(const Disc&, const Disc&) = default;
};

/// Rectangle centred on `center`, `length` along the heading and `width`
/// across it.
struct OrientedRect {
  Pose2 center;
  double length = 0.0;
  double width = 0.0;

  std::array<Vec2, 4> corners() const;
};

struct SectorFOV {
  Pose2 apex;
  double range = 0.0;
  double half_angle = 0.0;
};

struct Centerline {
  std::function<double(double)> value;
  std::function<double(double)> slope;
};

enum class Region { kDrivable, kEndZone, kShoulder };

/// Band of half-width `half_width` around y = c(x). The boundaries are
/// polylines sampled from the analytic centerline every `sample_step` units,
/// over [x_start - pad, x_end + pad]; every geometric query uses the
/// polylines so that region membership and distances agree.
///
/// Regions: shoulders are everything with |y - c(x)| > half_width; the end
/// zone is the band part with x >= end_zone_start; the rest of the band is
/// drivable.
class TrackGeometry {
 public:
  TrackGeometry(Centerline centerline, double x_start, double x_end,
                double half_width, double end_zone_start,
                double sample_step = 0.01, double pad = 3.0);

  double x_start() const { return x_start_; }
  double x_end() const { return x_end_; }
  double half_width() const { return half_width_; }
  double end_zone_start() const { return end_zone_start_; }
  double sample_step() const { return step_; }

  double centerline(double x) const { return centerline_.value(x); }
  double centerline_slope(double x) const { return centerline_.slope(x); }
  /// Piecewise-linear centerline through the sampled vertices.
  double centerline_sampled(double x) const;
  double upper(double x) const { return centerline_sampled(x) + half_width_; }
  double lower(double x) const { return centerline_sampled(x) - half_width_; }

  Region region_at(Vec2 p) const;
  bool in_band(Vec2 p) const;

  std::size_t vertex_count() const { return xs_.size(); }
  double vertex_x(std::size_t i) const { return xs_[i]; }
  Vec2 upper_vertex(std::size_t i) const { return {xs_[i], cs_[i] + half_width_}; }
  Vec2 lower_vertex(std::size_t i) const { return {xs_[i], cs_[i] - half_width_}; }

  /// Index range [first, last] of vertices whose x lies in [x_lo, x_hi],
  /// widened by one vertex on each side. Empty when first > last.
  std::pair<std::ptrdiff_t, std::ptrdiff_t> vertex_window(double x_lo, double x_hi) const;

 private:
  Centerline centerline_;
  double x_start_;
  double x_end_;
  double half_width_;
  double end_zone_start_;
  double step_;
  double x0_;
  std::vector<double> xs_;
  std::vector<double> cs_;
};

/// Signed clearance between the rectangle and the disc; negative iff the
/// shapes overlap.
double rect_to_disc_distance(const OrientedRect& rect, const Disc& disc);

/// Signed clearance between the rectangle and the nearer shoulder boundary.
/// Negative iff part of the rectangle lies beyond a boundary polyline; the
/// magnitude is then the largest vertical excursion past that boundary.
double rect_to_shoulders_distance(const OrientedRect& rect, const TrackGeometry& track);

/// True iff every corner has x in [end_zone_start, x_end].
bool rect_in_end_zone(const OrientedRect& rect, const TrackGeometry& track);

/// Closed-sector/disc intersection. With `conservative` set the sector is
/// inflated slightly in range and angle, so rounding can only add hits.
bool sector_intersects_disc(const SectorFOV& fov, const Disc& disc, bool conservative = false);

/// Distance along the ray at `origin.heading() + bearing` to the first
/// obstacle or shoulder boundary, clamped to `max_range`.
double cast_ray(const Pose2& origin, double bearing, double max_range,
                const TrackGeometry& track, std::span<const Disc> obstacles);

// Lower-level helpers, exposed for tests and the renderer.
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);
/// Ray/segment hit parameter (distance along unit `dir`), or a negative value
/// when they do not meet.
double ray_segment_hit(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b);
double ray_disc_hit(Vec2 origin, Vec2 dir, const Disc& disc);

}  // namespace metafal
