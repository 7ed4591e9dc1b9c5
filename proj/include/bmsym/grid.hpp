#pragma once
// Deterministic sample grids over a chart. Default ranges keep well away from
// singular hyperplanes other than t = 0 itself.

#include "bmsym/chart.hpp"
#include "bmsym/eval.hpp"

#include <string>
#include <vector>

namespace bmsym {

struct GridAxis {
    std::string coord;
    double lo, hi;
    int count;
};

struct GridSpec {
    std::vector<GridAxis> axes;
};

inline std::vector<Point> enumerate_grid(const GridSpec& g) {
    std::vector<Point> pts;
    pts.push_back({});
    for (const auto& ax : g.axes) {
        std::vector<Point> next;
        next.reserve(pts.size() * static_cast<size_t>(ax.count));
        for (int i = 0; i < ax.count; ++i) {
            double v = ax.count == 1 ? ax.lo : ax.lo + (ax.hi - ax.lo) * i / (ax.count - 1);
            for (const auto& p : pts) {
                Point q = p;
                q[ax.coord] = v;
                next.push_back(std::move(q));
            }
        }
        pts = std::move(next);
    }
    return pts;
}

// include_zero: put t = 0 on the grid (count odd over a symmetric range)
inline GridSpec default_grid(const ChartModel& chart, bool include_zero = true,
                             int defining_count = 11, int other_count = 5) {
    GridSpec g;
    for (size_t i = 0; i < chart.coords.size(); ++i) {
        const std::string& c = chart.coords[i];
        if (chart.defining && c == *chart.defining) {
            int n = include_zero ? (defining_count | 1) : defining_count;
            g.axes.push_back({c, -0.5, 0.5, n});
        } else if (chart.periodic[i]) {
            g.axes.push_back({c, 0.4, 5.9, other_count});
        } else {
            g.axes.push_back({c, -1.0, 1.0, other_count});
        }
    }
    return g;
}

// grid on the slice t = 0
inline GridSpec slice_grid(const ChartModel& chart, int count = 5) {
    GridSpec g;
    for (size_t i = 0; i < chart.coords.size(); ++i) {
        const std::string& c = chart.coords[i];
        if (chart.defining && c == *chart.defining) {
            g.axes.push_back({c, 0.0, 0.0, 1});
        } else if (chart.periodic[i]) {
            g.axes.push_back({c, 0.4, 5.9, count});
        } else {
            g.axes.push_back({c, -1.0, 1.0, count});
        }
    }
    return g;
}

}  // namespace bmsym
