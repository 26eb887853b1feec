#include "rasid/geometry.hpp"

#include <algorithm>

namespace rasid {

double point_segment_distance(Point p, const Segment& s) {
  const double dx = s.b.x - s.a.x;
  const double dy = s.b.y - s.a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 == 0.0) return distance(p, s.a);
  double u = ((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / len2;
  u = std::clamp(u, 0.0, 1.0);
  return distance(p, Point{s.a.x + u * dx, s.a.y + u * dy});
}

namespace {

double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

bool on_segment(Point p, const Segment& s) {
  return std::min(s.a.x, s.b.x) <= p.x && p.x <= std::max(s.a.x, s.b.x) &&
         std::min(s.a.y, s.b.y) <= p.y && p.y <= std::max(s.a.y, s.b.y);
}

bool intersects(const Segment& s, const Segment& t) {
  const int d1 = sign(cross(t.a, t.b, s.a));
  const int d2 = sign(cross(t.a, t.b, s.b));
  const int d3 = sign(cross(s.a, s.b, t.a));
  const int d4 = sign(cross(s.a, s.b, t.b));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  // collinear touching cases
  if (d1 == 0 && on_segment(s.a, t)) return true;
  if (d2 == 0 && on_segment(s.b, t)) return true;
  if (d3 == 0 && on_segment(t.a, s)) return true;
  if (d4 == 0 && on_segment(t.b, s)) return true;
  return false;
}

}  // namespace

double segment_distance(const Segment& s, const Segment& t) {
  if (intersects(s, t)) return 0.0;
  return std::min({point_segment_distance(s.a, t), point_segment_distance(s.b, t),
                   point_segment_distance(t.a, s), point_segment_distance(t.b, s)});
}

}  // namespace rasid
