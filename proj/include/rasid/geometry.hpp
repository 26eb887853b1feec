#pragma once

#include <cmath>

namespace rasid {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Line-of-sight segment between an access point and a monitoring point.
struct Segment {
  Point a;
  Point b;
};

struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  [[nodiscard]] bool contains(Point p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
};

inline double distance(Point p, Point q) { return std::hypot(p.x - q.x, p.y - q.y); }

double point_segment_distance(Point p, const Segment& s);

/// Closed-form minimum distance between two segments (0 when they touch).
double segment_distance(const Segment& s, const Segment& t);

}  // namespace rasid
