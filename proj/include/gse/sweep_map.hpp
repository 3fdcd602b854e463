#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "gse/core.hpp"

namespace gse {

/// A 2-D transmission map: one spectrum per sweep value, all on the same
/// probe frequencies. Written out in long format (sweep_value, frequency).
struct SweepMap {
    std::vector<double> sweep_values;
    std::vector<Spectrum> columns;
};

/// Indices of strict local minima of |S21| in one column.
inline std::vector<std::size_t> local_minima(const Spectrum& s) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const double m = std::abs(s.s21[i]);
        if (m < std::abs(s.s21[i - 1]) && m <= std::abs(s.s21[i + 1])) out.push_back(i);
    }
    return out;
}

/// Sub-grid location of a minimum of |S21| by a parabola through three samples.
inline double refine_minimum(const Spectrum& s, std::size_t i) {
    if (i == 0 || i + 1 >= s.size()) return s.frequency_hz[i];
    const double y0 = std::abs(s.s21[i - 1]), y1 = std::abs(s.s21[i]), y2 = std::abs(s.s21[i + 1]);
    const double denom = y0 - 2.0 * y1 + y2;
    if (denom <= 0.0) return s.frequency_hz[i];
    const double h = s.frequency_hz[i + 1] - s.frequency_hz[i];
    return s.frequency_hz[i] + 0.5 * h * (y0 - y2) / denom;
}

/// Full width of the region where |S21| lies below the half-depth level
/// (1 + min|S21|)/2, measured around the global minimum by linear
/// interpolation. Empty when the dip runs off the grid.
inline std::optional<double> half_depth_width(const Spectrum& s) {
    if (s.size() < 3) return std::nullopt;
    std::size_t imin = 0;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (std::abs(s.s21[i]) < std::abs(s.s21[imin])) imin = i;
    const double level = 0.5 * (1.0 + std::abs(s.s21[imin]));
    auto crossing = [&](std::size_t a, std::size_t b) {
        const double ya = std::abs(s.s21[a]) - level, yb = std::abs(s.s21[b]) - level;
        return s.frequency_hz[a] + (s.frequency_hz[b] - s.frequency_hz[a]) * ya / (ya - yb);
    };
    std::size_t lo = imin;
    while (lo > 0 && std::abs(s.s21[lo]) < level) --lo;
    std::size_t hi = imin;
    while (hi + 1 < s.size() && std::abs(s.s21[hi]) < level) ++hi;
    if (std::abs(s.s21[lo]) < level || std::abs(s.s21[hi]) < level) return std::nullopt;
    return crossing(hi - 1, hi) - crossing(lo, lo + 1);
}

/// Dip branches of an anticrossing: for each column with exactly two local
/// minima, the separation of the refined minima.
struct DipSplitting {
    double sweep_value = 0.0;
    double lower_hz = 0.0;
    double upper_hz = 0.0;
    double separation() const { return upper_hz - lower_hz; }
};

inline std::vector<DipSplitting> two_dip_columns(const SweepMap& map) {
    std::vector<DipSplitting> out;
    for (std::size_t c = 0; c < map.columns.size(); ++c) {
        const auto minima = local_minima(map.columns[c]);
        if (minima.size() != 2) continue;
        out.push_back({map.sweep_values[c], refine_minimum(map.columns[c], minima[0]),
                       refine_minimum(map.columns[c], minima[1])});
    }
    return out;
}

}  // namespace gse
