#pragma once

// Domain types shared by every module.
//
// Unit convention: every frequency and every rate is stored as an ordinary
// (linear) frequency in Hz, i.e. the angular quantity divided by 2*pi.
// Formulas written in terms of omega convert with omega = 2*pi*f at the
// point of use. Lengths are meters, speeds m/s, fields tesla.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gse/errors.hpp"

namespace gse {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// gamma/2pi of the Kittel law, Hz per tesla.
inline constexpr double default_gyromagnetic_hz_per_tesla = 28.0e9;

inline void require_finite(double value, std::string_view what) {
    if (!std::isfinite(value)) throw ConfigError(std::string(what) + " must be finite");
}

// ---------------------------------------------------------------------------

struct CouplingPoint {
    double position_m = 0.0;
    double kappa_hz = 0.0;  ///< per-point radiative rate kappa/2pi
};

/// One spin ensemble coupled to the waveguide at one or more points.
class Emitter {
public:
    Emitter(std::string name, double f_res_hz, double beta_hz, std::vector<CouplingPoint> points)
        : name_(std::move(name)), f_res_(f_res_hz), beta_(beta_hz), points_(std::move(points)) {
        require_finite(f_res_, "emitter '" + name_ + "' f_res");
        require_finite(beta_, "emitter '" + name_ + "' beta");
        require(f_res_ > 0.0, "emitter '" + name_ + "': f_res must be > 0");
        require(beta_ >= 0.0, "emitter '" + name_ + "': beta must be >= 0");
        require(!points_.empty(), "emitter '" + name_ + "' has no coupling points");
        for (std::size_t k = 0; k < points_.size(); ++k) {
            require_finite(points_[k].position_m, "coupling position");
            require_finite(points_[k].kappa_hz, "coupling rate");
            require(points_[k].kappa_hz >= 0.0, "emitter '" + name_ + "': coupling rates must be >= 0");
            if (k > 0)
                require(points_[k].position_m > points_[k - 1].position_m,
                        "emitter '" + name_ + "': positions must be strictly increasing");
        }
    }

    const std::string& name() const noexcept { return name_; }
    double f_res() const noexcept { return f_res_; }
    double beta() const noexcept { return beta_; }
    const std::vector<CouplingPoint>& points() const noexcept { return points_; }
    std::size_t point_count() const noexcept { return points_.size(); }

    double first_position() const noexcept { return points_.front().position_m; }
    double last_position() const noexcept { return points_.back().position_m; }
    double span() const noexcept { return last_position() - first_position(); }

    Emitter with_f_res(double f_res_hz) const { return {name_, f_res_hz, beta_, points_}; }

private:
    std::string name_;
    double f_res_;
    double beta_;
    std::vector<CouplingPoint> points_;
};

class Waveguide {
public:
    explicit Waveguide(double speed_mps) : speed_(speed_mps) {
        require_finite(speed_, "waveguide speed");
        require(speed_ > 0.0, "waveguide speed must be > 0");
    }
    double speed() const noexcept { return speed_; }

    /// Travel time across `length_m`.
    double delay(double length_m) const noexcept { return length_m / speed_; }

private:
    double speed_;
};

enum class TopologyKind { single, nested, braided, separate, general };

inline std::string_view to_string(TopologyKind kind) {
    switch (kind) {
        case TopologyKind::single: return "single";
        case TopologyKind::nested: return "nested";
        case TopologyKind::braided: return "braided";
        case TopologyKind::separate: return "separate";
        case TopologyKind::general: return "general";
    }
    return "general";
}

/// Ordered collection of emitters sharing one waveguide. Co-located points of
/// different emitters are accepted here (the multipoint engine handles them);
/// classify_topology() rejects them.
class Topology {
public:
    explicit Topology(std::vector<Emitter> emitters) : emitters_(std::move(emitters)) {
        require(!emitters_.empty(), "topology needs at least one emitter");
    }

    const std::vector<Emitter>& emitters() const noexcept { return emitters_; }
    std::size_t size() const noexcept { return emitters_.size(); }
    const Emitter& operator[](std::size_t i) const { return emitters_.at(i); }

private:
    std::vector<Emitter> emitters_;
};

/// Informational tag; nothing downstream branches on it.
inline TopologyKind classify_topology(const Topology& t) {
    std::vector<double> all;
    for (const auto& e : t.emitters())
        for (const auto& p : e.points()) all.push_back(p.position_m);
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
        throw ConfigError("topology has duplicate coupling positions");

    if (t.size() == 1) return TopologyKind::single;
    if (t.size() > 2) return TopologyKind::general;
    const auto& a = t[0];
    const auto& b = t[1];
    if (a.point_count() > 2 || b.point_count() > 2) return TopologyKind::general;

    const double a1 = a.first_position(), a2 = a.last_position();
    const double b1 = b.first_position(), b2 = b.last_position();
    if (a2 < b1 || b2 < a1) return TopologyKind::separate;
    if ((a1 < b1 && b2 < a2) || (b1 < a1 && a2 < b2)) return TopologyKind::nested;
    return TopologyKind::braided;
}

// ---------------------------------------------------------------------------

/// Uniform probe grid with exact endpoints.
class FrequencyGrid {
public:
    FrequencyGrid(double f_start_hz, double f_stop_hz, std::size_t n_points)
        : start_(f_start_hz), stop_(f_stop_hz), n_(n_points) {
        require_finite(start_, "f_start");
        require_finite(stop_, "f_stop");
        require(n_ >= 2, "frequency grid needs at least 2 points");
        require(start_ > 0.0 && stop_ > start_, "frequency grid requires f_stop > f_start > 0");
    }

    double f_start() const noexcept { return start_; }
    double f_stop() const noexcept { return stop_; }
    std::size_t size() const noexcept { return n_; }
    double step() const noexcept { return (stop_ - start_) / static_cast<double>(n_ - 1); }

    double operator[](std::size_t i) const noexcept {
        if (i + 1 == n_) return stop_;
        return start_ + static_cast<double>(i) * step();
    }

    std::vector<double> points() const {
        std::vector<double> out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = (*this)[i];
        return out;
    }

    /// Grid of `n` points spanning `center +/- half_width`.
    static FrequencyGrid centered(double center_hz, double half_width_hz, std::size_t n) {
        return {center_hz - half_width_hz, center_hz + half_width_hz, n};
    }

private:
    double start_;
    double stop_;
    std::size_t n_;
};

/// Complex transmission sampled on a sorted frequency list. Points where the
/// response is singular carry a unit value and are listed in `singular_points`.
struct Spectrum {
    std::vector<double> frequency_hz;
    std::vector<cplx> s21;
    std::vector<std::size_t> singular_points;

    std::size_t size() const noexcept { return frequency_hz.size(); }

    double magnitude(std::size_t i) const { return std::abs(s21[i]); }
    double db(std::size_t i) const { return 20.0 * std::log10(std::abs(s21[i])); }
};

/// Transmission plus the port-1 reflection on the same frequencies.
struct TwoPortSpectrum {
    Spectrum s21;
    std::vector<cplx> reflection;
};

/// |S21| only, as produced by scalar network analyzers or lossy exports.
struct MagnitudeSpectrum {
    std::vector<double> frequency_hz;
    std::vector<double> magnitude;

    std::size_t size() const noexcept { return frequency_hz.size(); }
};

/// Sign of the interference Lamb shift in an emitter's complex frequency.
/// The steady-state single-emitter equation and the nested Heisenberg
/// equations put the resonance at f + kappa sin(phi) (`heisenberg`); the
/// printed complex frequencies of the nested transmission use
/// f - kappa sin(phi) (`complex_frequency`).
enum class ShiftConvention { heisenberg, complex_frequency };

inline double shift_sign(ShiftConvention c) noexcept {
    return c == ShiftConvention::heisenberg ? 1.0 : -1.0;
}

// ---------------------------------------------------------------------------

/// Reduce an angle into [0, 2pi).
inline double reduce_angle(double radians) {
    double r = std::fmod(radians, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

/// Propagation phase 2*pi*f*L/v, unreduced.
inline double propagation_phase(double f_hz, double length_m, const Waveguide& wg) {
    require_finite(f_hz, "frequency");
    require_finite(length_m, "length");
    require(f_hz > 0.0, "phase: frequency must be > 0");
    require(length_m >= 0.0, "phase: length must be >= 0");
    return two_pi * f_hz * length_m / wg.speed();
}

inline double propagation_phase_reduced(double f_hz, double length_m, const Waveguide& wg) {
    return reduce_angle(propagation_phase(f_hz, length_m, wg));
}

/// Kittel law f = (gamma/2pi)(B + H_A).
inline double field_to_frequency(double bias_tesla, double anisotropy_tesla,
                                 double gyromagnetic_hz_per_tesla = default_gyromagnetic_hz_per_tesla) {
    require_finite(bias_tesla, "bias field");
    require_finite(anisotropy_tesla, "anisotropy field");
    const double f = gyromagnetic_hz_per_tesla * (bias_tesla + anisotropy_tesla);
    if (!(f > 0.0)) throw ConfigError("field_to_frequency: resulting frequency must be > 0");
    return f;
}

}  // namespace gse
