#pragma once

// Closed-form observables of one emitter coupled at two points with equal
// strength: interference-modulated decay, Lamb shift, and transmission.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "gse/core.hpp"
#include "gse/parallel.hpp"
#include "gse/sweep_map.hpp"

namespace gse {

/// Where the propagation phase is evaluated. `resonance` uses the emitter's
/// own f_res for every probe frequency; `probe` re-evaluates it at each probe
/// frequency (wideband extension).
enum class PhaseReference { resonance, probe };

struct SingleGseParams {
    double kappa_hz = 0.0;  ///< radiative rate per coupling point
    double beta_hz = 0.0;   ///< intrinsic rate
    double length_m = 0.0;  ///< distance between the two coupling points
    double f_res_hz = 0.0;
    Waveguide waveguide{1.0};

    void validate() const {
        require_finite(kappa_hz, "kappa");
        require_finite(beta_hz, "beta");
        require_finite(length_m, "length");
        require_finite(f_res_hz, "f_res");
        require(kappa_hz >= 0.0, "kappa must be >= 0");
        require(beta_hz >= 0.0, "beta must be >= 0");
        require(length_m > 0.0, "length must be > 0");
        require(f_res_hz > 0.0, "f_res must be > 0");
    }

    double phase_at(double f_hz) const { return propagation_phase(f_hz, length_m, waveguide); }

    /// Equivalent two-point emitter starting at `origin_m`.
    Emitter as_emitter(std::string name = "gse", double origin_m = 0.0) const {
        return Emitter(std::move(name), f_res_hz, beta_hz,
                       {{origin_m, kappa_hz}, {origin_m + length_m, kappa_hz}});
    }
};

/// kappa_G = 2 kappa (1 + cos phi), phase evaluated at `at_f_hz`.
inline double giant_decay(const SingleGseParams& p, double at_f_hz) {
    p.validate();
    return 2.0 * p.kappa_hz * (1.0 + std::cos(p.phase_at(at_f_hz)));
}

/// Interference Lamb shift kappa sin phi. Positive values move the resonance up.
inline double lamb_shift(const SingleGseParams& p, double at_f_hz) {
    p.validate();
    return p.kappa_hz * std::sin(p.phase_at(at_f_hz));
}

namespace detail {

struct SinglePoint {
    cplx s21;
    bool singular;
};

inline SinglePoint s21_single_point(const SingleGseParams& p, double f_hz, PhaseReference ref) {
    const double at = ref == PhaseReference::resonance ? p.f_res_hz : f_hz;
    const double phi = p.phase_at(at);
    const double kg = 2.0 * p.kappa_hz * (1.0 + std::cos(phi));
    const double shift = p.kappa_hz * std::sin(phi);
    const double detuning = f_hz - p.f_res_hz - shift;
    const cplx denom(-(kg + p.beta_hz), detuning);
    if (denom == cplx(0.0, 0.0)) return {cplx(1.0, 0.0), true};
    return {1.0 + kg / denom, false};
}

}  // namespace detail

/// S21 = 1 + kappa_G / [i(f - f_res - kappa sin phi) - kappa_G - beta].
inline Spectrum s21_single(const SingleGseParams& p, std::span<const double> frequencies_hz,
                           PhaseReference ref = PhaseReference::resonance) {
    p.validate();
    Spectrum out;
    out.frequency_hz.assign(frequencies_hz.begin(), frequencies_hz.end());
    out.s21.reserve(out.frequency_hz.size());
    for (std::size_t i = 0; i < out.frequency_hz.size(); ++i) {
        const auto pt = detail::s21_single_point(p, out.frequency_hz[i], ref);
        out.s21.push_back(pt.s21);
        if (pt.singular) out.singular_points.push_back(i);
    }
    return out;
}

inline Spectrum s21_single(const SingleGseParams& p, const FrequencyGrid& grid,
                           PhaseReference ref = PhaseReference::resonance) {
    const auto f = grid.points();
    return s21_single(p, std::span<const double>(f), ref);
}

/// Reflection r = S21 - 1 of the symmetric two-port, sampled like `s21`.
inline std::vector<cplx> reflection_single(const Spectrum& s21) {
    std::vector<cplx> r(s21.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = s21.s21[i] - 1.0;
    return r;
}

/// Transmission map versus bias field: the resonance of each column follows
/// the Kittel law with anisotropy offset `anisotropy_tesla`.
inline SweepMap map_single_vs_field(const SingleGseParams& p, std::span<const double> fields_tesla,
                                    double anisotropy_tesla, const FrequencyGrid& grid,
                                    PhaseReference ref = PhaseReference::resonance, std::size_t threads = 1,
                                    double gyromagnetic_hz_per_tesla = default_gyromagnetic_hz_per_tesla) {
    const auto f = grid.points();
    std::vector<SingleGseParams> columns;
    columns.reserve(fields_tesla.size());
    for (double b : fields_tesla) {
        auto c = p;
        c.f_res_hz = field_to_frequency(b, anisotropy_tesla, gyromagnetic_hz_per_tesla);
        c.validate();
        columns.push_back(c);
    }
    SweepMap map;
    map.sweep_values.assign(fields_tesla.begin(), fields_tesla.end());
    map.columns = parallel_map(columns.size(), threads, [&](std::size_t i) {
        return s21_single(columns[i], std::span<const double>(f), ref);
    });
    return map;
}

}  // namespace gse
