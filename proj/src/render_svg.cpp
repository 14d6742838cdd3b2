#include "metafal/render_svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string_view>

namespace metafal {

namespace {

class Canvas {
 public:
  Canvas(double x0, double x1, double y0, double y1, double ppu)
      : x0_(x0), y1_(y1), ppu_(ppu), w_((x1 - x0) * ppu), h_((y1 - y0) * ppu) {}

  double px(double x) const { return (x - x0_) * ppu_; }
  double py(double y) const { return (y1_ - y) * ppu_; }

  void raw(std::string_view s) { body_ += s; }

  void printf(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    body_ += buf;
  }

  void point(Vec2 p) { printf("%.2f,%.2f ", px(p.x), py(p.y)); }

  std::string finish() const {
    char head[256];
    std::snprintf(head, sizeof head,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                  "viewBox=\"0 0 %.2f %.2f\">\n",
                  w_, h_, w_, h_);
    return std::string(head) + body_ + "</svg>\n";
  }

  double width() const { return w_; }
  double height() const { return h_; }

 private:
  double x0_;
  double y1_;
  double ppu_;
  double w_;
  double h_;
  std::string body_;
};

void polygon(Canvas& c, const std::vector<Vec2>& pts, const char* style) {
  c.raw("<polygon points=\"");
  for (Vec2 p : pts) {
    c.point(p);
  }
  c.printf("\" %s/>\n", style);
}

}  // namespace

std::string render_svg(const Environment& env, const Trajectory& traj, const StatusReport& status,
                       const ScenarioConfig& cfg, const RenderOptions& opts) {
  const TrackGeometry& track = env.track();
  const double margin = 0.5;
  const double reach = std::abs(env.params().amplitude) + track.half_width() + margin;
  Canvas c(track.x_start() - margin, track.x_end() + margin, -reach, reach, opts.pixels_per_unit);

  c.printf("<rect x=\"0\" y=\"0\" width=\"%.2f\" height=\"%.2f\" fill=\"#b9a88c\"/>\n", c.width(),
           c.height());

  auto band = [&](double lo, double hi, const char* style) {
    std::vector<Vec2> pts;
    for (std::size_t i = 0; i < track.vertex_count(); ++i) {
      const double x = track.vertex_x(i);
      if (x >= lo && x <= hi) {
        pts.push_back(track.upper_vertex(i));
      }
    }
    for (std::size_t i = track.vertex_count(); i-- > 0;) {
      const double x = track.vertex_x(i);
      if (x >= lo && x <= hi) {
        pts.push_back(track.lower_vertex(i));
      }
    }
    polygon(c, pts, style);
  };
  band(track.x_start() - margin, track.x_end() + margin, "fill=\"#e8e8e8\"");
  band(track.end_zone_start(), track.x_end(), "fill=\"#9fd89f\"");

  for (const Disc& d : env.obstacles()) {
    c.printf("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"#333333\"/>\n", c.px(d.cx),
             c.py(d.cy), d.r * opts.pixels_per_unit);
  }

  if (traj.empty()) {
    return c.finish();
  }

  const std::size_t last = traj.size() - 1;
  const std::size_t fov_at = std::min(opts.fov_step.value_or(last), last);
  const SectorFOV fov = sensor_footprint(traj.states[fov_at], cfg);
  {
    const Vec2 apex = fov.apex.position();
    const Vec2 a = apex + fov.range * unit_from_angle(fov.apex.heading() - fov.half_angle);
    const Vec2 b = apex + fov.range * unit_from_angle(fov.apex.heading() + fov.half_angle);
    const double r = fov.range * opts.pixels_per_unit;
    // Screen y is flipped, so the counter-clockwise world sweep is clockwise
    // on screen (sweep flag 0).
    c.printf(
        "<path d=\"M %.2f %.2f L %.2f %.2f A %.2f %.2f 0 %d 0 %.2f %.2f Z\" "
        "fill=\"#ffd54f\" fill-opacity=\"0.35\" stroke=\"#c9a000\" stroke-width=\"1\"/>\n",
        c.px(apex.x), c.py(apex.y), c.px(a.x), c.py(a.y), r, r, fov.half_angle > 0.5 * kPi ? 1 : 0,
        c.px(b.x), c.py(b.y));
  }

  c.raw("<polyline fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"2\" points=\"");
  for (const SystemState& s : traj.states) {
    c.point({s.x, s.y});
  }
  c.raw("\"/>\n");

  const bool collided = status.kind == FailureKind::kCollisionObstacle ||
                        status.kind == FailureKind::kCollisionShoulder;
  const auto corners = car_shape(traj.states[last], cfg).corners();
  polygon(c, {corners.begin(), corners.end()},
          collided ? "fill=\"#d62728\" stroke=\"#7f0000\" stroke-width=\"1\""
                   : "fill=\"#1f5fbf\" stroke=\"#0b2d5e\" stroke-width=\"1\"");

  c.printf(
      "<text x=\"8\" y=\"18\" font-family=\"monospace\" font-size=\"14\">status %d  %s  step "
      "%zu</text>\n",
      status.status, std::string(to_string(status.kind)).c_str(), status.terminal_step);
  return c.finish();
}

}  // namespace metafal
