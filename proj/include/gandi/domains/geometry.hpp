#pragma once

// Axis-aligned 2D geometry shared by the packing and reconfiguration domains.
// Overlap tests use open intervals: squares touching edge-to-edge do not
// count as colliding.

#include <vector>

namespace gandi {

struct Rect {
    double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;

    static Rect square(double cx, double cy, double side) {
        const double h = side / 2.0;
        return {cx - h, cy - h, cx + h, cy + h};
    }

    bool overlaps(const Rect& o) const {
        return xmin < o.xmax && o.xmin < xmax && ymin < o.ymax && o.ymin < ymax;
    }

    bool inside(const Rect& outer) const {
        return xmin >= outer.xmin && ymin >= outer.ymin && xmax <= outer.xmax &&
               ymax <= outer.ymax;
    }

    Rect inflated(double margin) const {
        return {xmin - margin, ymin - margin, xmax + margin, ymax + margin};
    }
};

/// Access corridor: sweep of the square from the opening edge at x = 0 to its
/// placement, same y-extent. Empty (zero width) when the square sits at the
/// opening.
inline Rect access_corridor(double cx, double cy, double side) {
    const double h = side / 2.0;
    return {0.0, cy - h, cx - h, cy + h};
}

inline bool rect_clear(const Rect& r, const std::vector<Rect>& obstacles, int skip = -1) {
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        if (static_cast<int>(i) == skip) continue;
        if (r.overlaps(obstacles[i])) return false;
    }
    return true;
}

} // namespace gandi
