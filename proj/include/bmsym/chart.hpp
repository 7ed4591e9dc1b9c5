#pragma once
// Coordinate chart with an optional defining coordinate t for the critical
// hypersurface Z = {t = 0} and the singularity order m attached to the chart.

#include "bmsym/error.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace bmsym {

struct ChartModel {
    std::vector<std::string> coords;
    std::vector<bool> periodic;  // angle vs line, aligned with coords
    std::optional<std::string> defining;
    int m = 1;

    ChartModel() = default;
    ChartModel(std::vector<std::string> names, std::vector<bool> per,
               std::optional<std::string> def = std::nullopt, int order = 1)
        : coords(std::move(names)), periodic(std::move(per)), defining(std::move(def)), m(order) {
        validate();
    }

    void validate() const {
        if (periodic.size() != coords.size())
            throw InputError("chart: periodicity flags do not match coordinates");
        if (m < 1) throw InputError("chart: singularity order m must be >= 1");
        for (size_t i = 0; i < coords.size(); ++i)
            for (size_t j = i + 1; j < coords.size(); ++j)
                if (coords[i] == coords[j]) throw InputError("chart: duplicate coordinate " + coords[i]);
        if (defining) {
            auto it = std::find(coords.begin(), coords.end(), *defining);
            if (it == coords.end())
                throw InputError("chart: defining coordinate " + *defining + " not in chart");
            if (periodic[static_cast<size_t>(it - coords.begin())])
                throw InputError("chart: defining coordinate must be non-periodic");
        }
    }

    size_t dim() const { return coords.size(); }

    bool has(const std::string& name) const {
        return std::find(coords.begin(), coords.end(), name) != coords.end();
    }

    int index(const std::string& name) const {
        auto it = std::find(coords.begin(), coords.end(), name);
        if (it == coords.end()) throw InputError("unknown coordinate: " + name);
        return static_cast<int>(it - coords.begin());
    }

    int defining_index() const {
        if (!defining) throw InputError("chart has no defining coordinate");
        return index(*defining);
    }

    bool same_coords(const ChartModel& o) const { return coords == o.coords; }
};

}  // namespace bmsym
