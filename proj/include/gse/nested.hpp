#pragma once

// Two emitters in the nested layout: outer pair of coupling points at 0 and
// L_o, inner pair placed symmetrically at (L_o -/+ L_i)/2.
//
//   outer-left --phi1-- inner-left --phi2-- inner-right --phi3-- outer-right
//
// Two transmission models live here. The matrix model builds the 2x2
// resolvent from per-point phases; the eight-parameter rational form is the
// one used to fit measured spectra. Eigenvalue traces of the effective
// non-Hermitian Hamiltonian track level repulsion and attraction.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gse/core.hpp"
#include "gse/parallel.hpp"
#include "gse/sweep_map.hpp"

namespace gse {

struct NestedEmitterParams {
    double kappa_hz = 0.0;  ///< per-point radiative rate
    double beta_hz = 0.0;
    double length_m = 0.0;  ///< distance between this emitter's two points
    double f_res_hz = 0.0;
};

struct NestedParams {
    NestedEmitterParams inner;
    NestedEmitterParams outer;
    double phi1 = 0.0;  ///< outer-left to inner-left
    double phi2 = 0.0;  ///< inner span
    double phi3 = 0.0;  ///< inner-right to outer-right
    Waveguide waveguide{1.0};

    void validate() const {
        for (const auto* e : {&inner, &outer}) {
            require_finite(e->kappa_hz, "kappa");
            require_finite(e->beta_hz, "beta");
            require_finite(e->length_m, "length");
            require_finite(e->f_res_hz, "f_res");
            require(e->kappa_hz >= 0.0 && e->beta_hz >= 0.0, "nested rates must be >= 0");
            require(e->length_m > 0.0, "nested lengths must be > 0");
            require(e->f_res_hz > 0.0, "nested resonance frequencies must be > 0");
        }
        for (double phi : {phi1, phi2, phi3}) {
            require_finite(phi, "nested phase");
            require(phi >= 0.0, "nested phases must be >= 0");
        }
        require(outer.length_m > inner.length_m, "nesting requires L_outer > L_inner");
    }

    /// Phases of the symmetric device evaluated at `reference_f_hz`.
    static NestedParams from_geometry(NestedEmitterParams inner, NestedEmitterParams outer,
                                      const Waveguide& wg, double reference_f_hz) {
        require(outer.length_m > inner.length_m, "nesting requires L_outer > L_inner");
        NestedParams p{inner, outer, 0.0, 0.0, 0.0, wg};
        p.phi1 = propagation_phase(reference_f_hz, 0.5 * (outer.length_m - inner.length_m), wg);
        p.phi2 = propagation_phase(reference_f_hz, inner.length_m, wg);
        p.phi3 = p.phi1;
        p.validate();
        return p;
    }

    /// Phases referenced to the mean resonance of the two emitters.
    static NestedParams from_geometry(NestedEmitterParams inner, NestedEmitterParams outer,
                                      const Waveguide& wg) {
        return from_geometry(inner, outer, wg, 0.5 * (inner.f_res_hz + outer.f_res_hz));
    }

    /// The same device as a general two-emitter topology (outer first).
    Topology as_topology() const {
        const double a = 0.5 * (outer.length_m - inner.length_m);
        const double b = 0.5 * (outer.length_m + inner.length_m);
        return Topology({Emitter("outer", outer.f_res_hz, outer.beta_hz,
                                 {{0.0, outer.kappa_hz}, {outer.length_m, outer.kappa_hz}}),
                         Emitter("inner", inner.f_res_hz, inner.beta_hz,
                                 {{a, inner.kappa_hz}, {b, inner.kappa_hz}})});
    }
};

/// Nested parameters from a two-emitter topology. Each emitter needs two
/// points of equal rate, and the inner pair must sit symmetrically inside the
/// outer pair; other layouts belong to the general engine.
inline NestedParams nested_from_topology(const Topology& t, const Waveguide& wg,
                                         std::optional<double> reference_f_hz = std::nullopt) {
    require(t.size() == 2, "nested model needs exactly two emitters");
    require(classify_topology(t) == TopologyKind::nested, "emitters are not nested");
    const bool first_outer = t[0].span() > t[1].span();
    const Emitter& o = first_outer ? t[0] : t[1];
    const Emitter& i = first_outer ? t[1] : t[0];
    for (const Emitter* e : {&o, &i}) {
        require(e->point_count() == 2, "nested emitter '" + e->name() + "' needs exactly two coupling points");
        require(e->points()[0].kappa_hz == e->points()[1].kappa_hz,
                "nested emitter '" + e->name() + "' needs equal rates at both points");
    }
    const double left = i.first_position() - o.first_position();
    const double right = o.last_position() - i.last_position();
    require(std::abs(left - right) <= 1e-9 * o.span(),
            "inner emitter is not centred in the outer one; use the general engine");
    const NestedEmitterParams inner{i.points()[0].kappa_hz, i.beta(), i.span(), i.f_res()};
    const NestedEmitterParams outer{o.points()[0].kappa_hz, o.beta(), o.span(), o.f_res()};
    return reference_f_hz ? NestedParams::from_geometry(inner, outer, wg, *reference_f_hz)
                          : NestedParams::from_geometry(inner, outer, wg);
}

struct CouplingStrengths {
    double j_hz = 0.0;      ///< coherent part
    double gamma_hz = 0.0;  ///< dissipative part
    cplx complex_coupling() const { return {j_hz, -gamma_hz}; }  ///< J - i Gamma
};

/// Four-term coupling sums for arbitrary phi1, phi2, phi3.
inline CouplingStrengths coupling_strengths(double kappa_inner_hz, double kappa_outer_hz, double phi1,
                                            double phi2, double phi3) {
    const double g = std::sqrt(kappa_inner_hz * kappa_outer_hz);
    CouplingStrengths c;
    c.gamma_hz = g * (std::cos(phi1) + std::cos(phi3) + std::cos(phi1 + phi2) + std::cos(phi2 + phi3));
    c.j_hz = 0.5 * g * (std::sin(phi1) + std::sin(phi3) + std::sin(phi1 + phi2) + std::sin(phi2 + phi3));
    return c;
}

inline CouplingStrengths coupling_strengths(const NestedParams& p) {
    p.validate();
    return coupling_strengths(p.inner.kappa_hz, p.outer.kappa_hz, p.phi1, p.phi2, p.phi3);
}

/// Strong-coupling condition at the coherent point:
/// sqrt(kappa_o kappa_i) > max(kappa_iG + beta_i, beta_o).
inline bool strong_coherent_coupling(double kappa_inner_hz, double kappa_outer_hz, double kappa_inner_giant_hz,
                                     double beta_inner_hz, double beta_outer_hz) {
    return std::sqrt(kappa_inner_hz * kappa_outer_hz) > std::max(kappa_inner_giant_hz + beta_inner_hz, beta_outer_hz);
}

// ---------------------------------------------------------------------------
// Matrix model

/// `printed` evaluates the coupling vectors at the probe frequency, the
/// complex frequencies at each emitter's resonance, and J, Gamma from the
/// stored phases. `probe` evaluates everything at the probe frequency from
/// the lengths; that variant is lossless-unitary.
enum class NestedPhaseMode { printed, probe };

struct NestedOptions {
    NestedPhaseMode mode = NestedPhaseMode::printed;
    ShiftConvention shift = ShiftConvention::complex_frequency;
};

/// Diagonal complex frequencies and the mutual coupling, all in Hz.
struct EffectiveTwoMode {
    cplx omega_inner;
    cplx omega_outer;
    cplx coupling;  ///< J - i Gamma
};

namespace detail {

inline cplx complex_frequency(const NestedEmitterParams& e, const Waveguide& wg, double at_f_hz, ShiftConvention s) {
    const double phi = propagation_phase(at_f_hz, e.length_m, wg);
    const double shift = shift_sign(s) * e.kappa_hz * std::sin(phi);
    const double width = 2.0 * e.kappa_hz * (1.0 + std::cos(phi)) + e.beta_hz;
    return {e.f_res_hz + shift, -width};
}

}  // namespace detail

/// Effective two-mode model. In `probe` mode the phases are taken at `probe_f_hz`;
/// in `printed` mode that argument is ignored.
inline EffectiveTwoMode effective_two_mode(const NestedParams& p, const NestedOptions& opt = {},
                                           double probe_f_hz = 0.0) {
    p.validate();
    EffectiveTwoMode m;
    if (opt.mode == NestedPhaseMode::printed) {
        m.omega_inner = detail::complex_frequency(p.inner, p.waveguide, p.inner.f_res_hz, opt.shift);
        m.omega_outer = detail::complex_frequency(p.outer, p.waveguide, p.outer.f_res_hz, opt.shift);
        m.coupling = coupling_strengths(p).complex_coupling();
    } else {
        require(probe_f_hz > 0.0, "probe-mode effective model needs a probe frequency");
        m.omega_inner = detail::complex_frequency(p.inner, p.waveguide, probe_f_hz, opt.shift);
        m.omega_outer = detail::complex_frequency(p.outer, p.waveguide, probe_f_hz, opt.shift);
        const auto at = NestedParams::from_geometry(p.inner, p.outer, p.waveguide, probe_f_hz);
        m.coupling = coupling_strengths(at).complex_coupling();
    }
    return m;
}

inline TwoPortSpectrum scatter_nested_matrix(const NestedParams& p, std::span<const double> frequencies_hz,
                                             const NestedOptions& opt = {}) {
    p.validate();
    const double v = p.waveguide.speed();
    const double lo = p.outer.length_m, li = p.inner.length_m;
    const double sko = std::sqrt(p.outer.kappa_hz), ski = std::sqrt(p.inner.kappa_hz);

    EffectiveTwoMode fixed{};
    if (opt.mode == NestedPhaseMode::printed) fixed = effective_two_mode(p, opt);

    TwoPortSpectrum out;
    out.s21.frequency_hz.assign(frequencies_hz.begin(), frequencies_hz.end());
    out.s21.s21.reserve(frequencies_hz.size());
    out.reflection.reserve(frequencies_hz.size());
    for (std::size_t k = 0; k < frequencies_hz.size(); ++k) {
        const double f = frequencies_hz[k];
        const double w = two_pi * f / v;  // wavenumber
        const auto eff = opt.mode == NestedPhaseMode::printed ? fixed : effective_two_mode(p, opt, f);

        // Emission into the forward mode (u) and driving by the input (w).
        const std::array<cplx, 2> u{sko * (1.0 + std::polar(1.0, -w * lo)),
                                    ski * (std::polar(1.0, -w * (lo - li) / 2.0) + std::polar(1.0, -w * (lo + li) / 2.0))};
        const std::array<cplx, 2> d{std::conj(u[0]), std::conj(u[1])};

        const cplx m00 = f - eff.omega_outer;
        const cplx m11 = f - eff.omega_inner;
        const cplx m01 = -eff.coupling;  // i Gamma - J
        const cplx det = m00 * m11 - m01 * m01;
        if (std::abs(det) < 1e-300) {
            out.s21.s21.emplace_back(1.0, 0.0);
            out.reflection.emplace_back(0.0, 0.0);
            out.s21.singular_points.push_back(k);
            continue;
        }
        // Solve M x = d via the adjugate.
        const cplx x0 = (m11 * d[0] - m01 * d[1]) / det;
        const cplx x1 = (m00 * d[1] - m01 * d[0]) / det;
        const cplx i(0.0, 1.0);
        out.s21.s21.push_back(1.0 - i * (u[0] * x0 + u[1] * x1));
        out.reflection.push_back(-i * (d[0] * x0 + d[1] * x1));
    }
    return out;
}

inline Spectrum s21_nested_matrix(const NestedParams& p, std::span<const double> frequencies_hz,
                                  const NestedOptions& opt = {}) {
    return scatter_nested_matrix(p, frequencies_hz, opt).s21;
}

inline Spectrum s21_nested_matrix(const NestedParams& p, const FrequencyGrid& grid, const NestedOptions& opt = {}) {
    const auto f = grid.points();
    return s21_nested_matrix(p, std::span<const double>(f), opt);
}

// ---------------------------------------------------------------------------
// Eight-parameter fit form

struct NestedFitParams {
    double f_inner_hz = 0.0;
    double f_outer_hz = 0.0;
    double kappa_inner_giant_hz = 0.0;  ///< kappa_iG
    double kappa_outer_giant_hz = 0.0;  ///< kappa_oG
    double beta_inner_hz = 0.0;
    double beta_outer_hz = 0.0;
    double j_hz = 0.0;
    double gamma_hz = 0.0;

    double total_inner() const { return kappa_inner_giant_hz + beta_inner_hz; }
    double total_outer() const { return kappa_outer_giant_hz + beta_outer_hz; }

    void validate() const {
        for (double v : {f_inner_hz, f_outer_hz, kappa_inner_giant_hz, kappa_outer_giant_hz, beta_inner_hz,
                         beta_outer_hz, j_hz, gamma_hz})
            require_finite(v, "fit-form parameter");
        require(kappa_inner_giant_hz >= 0.0 && kappa_outer_giant_hz >= 0.0 && beta_inner_hz >= 0.0 &&
                    beta_outer_hz >= 0.0,
                "fit-form rates must be >= 0");
    }
};

inline cplx s21_nested_fitform_at(const NestedFitParams& p, double f) {
    const cplx i(0.0, 1.0);
    const cplx a = f - p.f_outer_hz + i * p.total_outer();
    const cplx b = f - p.f_inner_hz + i * p.total_inner();
    const cplx c(p.j_hz, -p.gamma_hz);  // J - i Gamma
    const cplx num = 2.0 * i * std::sqrt(p.kappa_inner_giant_hz * p.kappa_outer_giant_hz) * c +
                     i * p.kappa_inner_giant_hz * a + i * p.kappa_outer_giant_hz * b;
    const cplx den = a * b - (i * p.gamma_hz - p.j_hz) * (i * p.gamma_hz - p.j_hz);
    return 1.0 - num / den;
}

inline Spectrum s21_nested_fitform(const NestedFitParams& p, std::span<const double> frequencies_hz) {
    p.validate();
    Spectrum out;
    out.frequency_hz.assign(frequencies_hz.begin(), frequencies_hz.end());
    out.s21.reserve(out.frequency_hz.size());
    for (double f : out.frequency_hz) out.s21.push_back(s21_nested_fitform_at(p, f));
    return out;
}

inline Spectrum s21_nested_fitform(const NestedFitParams& p, const FrequencyGrid& grid) {
    const auto f = grid.points();
    return s21_nested_fitform(p, std::span<const double>(f));
}

// ---------------------------------------------------------------------------
// Eigenvalue traces

struct EigenPoint {
    double sweep_value = 0.0;
    cplx first;
    cplx second;
    bool exceptional = false;
};

namespace detail {

struct Eigen2 {
    std::array<cplx, 2> values;
    std::array<std::array<cplx, 2>, 2> vectors;  // unit norm
};

inline std::array<cplx, 2> normalized(cplx a, cplx b) {
    const double n = std::sqrt(std::norm(a) + std::norm(b));
    if (n == 0.0) return {cplx(1.0), cplx(0.0)};
    return {a / n, b / n};
}

// Symmetric 2x2 [[a, c], [c, b]].
inline Eigen2 eigen_symmetric2(cplx a, cplx b, cplx c) {
    const cplx mean = 0.5 * (a + b);
    const cplx half = 0.5 * (a - b);
    const cplx root = std::sqrt(half * half + c * c);
    Eigen2 e;
    e.values = {mean + root, mean - root};
    for (int k = 0; k < 2; ++k) {
        const cplx lam = e.values[k];
        // Pick the better-conditioned of the two null-vector candidates.
        const cplx p0 = c, p1 = lam - a;
        const cplx q0 = lam - b, q1 = c;
        e.vectors[k] = std::norm(p0) + std::norm(p1) >= std::norm(q0) + std::norm(q1) ? normalized(p0, p1)
                                                                                   : normalized(q0, q1);
    }
    return e;
}

inline double overlap(const std::array<cplx, 2>& x, const std::array<cplx, 2>& y) {
    return std::abs(std::conj(x[0]) * y[0] + std::conj(x[1]) * y[1]);
}

}  // namespace detail

/// Eigenvalues of [[f_i - i k_iT, J - i Gamma], [J - i Gamma, f_o - i k_oT]] as the
/// outer frequency is swept. Branches are continued by maximal eigenvector
/// overlap with the previous sweep point; the first point is ordered by real part.
inline std::vector<EigenPoint> eigen_traces(const NestedFitParams& p, std::span<const double> outer_frequencies_hz) {
    p.validate();
    require(!outer_frequencies_hz.empty(), "eigen_traces: sweep is empty");
    const cplx c(p.j_hz, -p.gamma_hz);
    const double scale = std::abs(c) + p.total_inner() + p.total_outer() + 1.0;

    std::vector<EigenPoint> out;
    out.reserve(outer_frequencies_hz.size());
    std::array<std::array<cplx, 2>, 2> prev_vec{};
    for (std::size_t k = 0; k < outer_frequencies_hz.size(); ++k) {
        const double fo = outer_frequencies_hz[k];
        const cplx a(p.f_inner_hz, -p.total_inner());
        const cplx b(fo, -p.total_outer());
        auto e = detail::eigen_symmetric2(a, b, c);
        const bool ep = std::abs(e.values[0] - e.values[1]) <= 1e-9 * (scale + std::abs(fo - p.f_inner_hz));

        if (k == 0) {
            if (e.values[1].real() < e.values[0].real()) {
                std::swap(e.values[0], e.values[1]);
                std::swap(e.vectors[0], e.vectors[1]);
            }
        } else {
            const double keep = detail::overlap(prev_vec[0], e.vectors[0]) + detail::overlap(prev_vec[1], e.vectors[1]);
            const double swap = detail::overlap(prev_vec[0], e.vectors[1]) + detail::overlap(prev_vec[1], e.vectors[0]);
            bool do_swap = swap > keep;
            if (std::abs(swap - keep) < 1e-12) {
                // Degenerate overlaps (at or near an exceptional point): fall back to value continuity.
                const auto& last = out.back();
                const double d_keep = std::abs(last.first - e.values[0]) + std::abs(last.second - e.values[1]);
                const double d_swap = std::abs(last.first - e.values[1]) + std::abs(last.second - e.values[0]);
                do_swap = d_swap < d_keep;
            }
            if (do_swap) {
                std::swap(e.values[0], e.values[1]);
                std::swap(e.vectors[0], e.vectors[1]);
            }
        }
        prev_vec = e.vectors;
        out.push_back({fo, e.values[0], e.values[1], ep});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Detuning maps

inline SweepMap map_nested_vs_detuning(const NestedFitParams& p, std::span<const double> outer_frequencies_hz,
                                       const FrequencyGrid& grid, std::size_t threads = 1) {
    p.validate();
    const auto f = grid.points();
    SweepMap map;
    map.sweep_values.assign(outer_frequencies_hz.begin(), outer_frequencies_hz.end());
    map.columns = parallel_map(map.sweep_values.size(), threads, [&](std::size_t i) {
        auto c = p;
        c.f_outer_hz = map.sweep_values[i];
        return s21_nested_fitform(c, std::span<const double>(f));
    });
    return map;
}

inline SweepMap map_nested_vs_detuning(const NestedParams& p, std::span<const double> outer_frequencies_hz,
                                       const FrequencyGrid& grid, const NestedOptions& opt = {},
                                       std::size_t threads = 1) {
    p.validate();
    const auto f = grid.points();
    SweepMap map;
    map.sweep_values.assign(outer_frequencies_hz.begin(), outer_frequencies_hz.end());
    map.columns = parallel_map(map.sweep_values.size(), threads, [&](std::size_t i) {
        auto c = p;
        c.outer.f_res_hz = map.sweep_values[i];
        return s21_nested_matrix(c, std::span<const double>(f), opt);
    });
    return map;
}

}  // namespace gse
