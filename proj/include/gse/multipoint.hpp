#pragma once

// General effective model for N emitters with any number of coupling points.
//
// For emitters j, l with points p, q (rates k_jp, k_lq, positions x):
//
//   Gamma_jl = sum_pq sqrt(k_jp k_lq) cos(w |x_jp - x_lq| / v)
//   J_jl     = 1/2 sum_pq sqrt(k_jp k_lq) sin(w |x_jp - x_lq| / v)
//
// The diagonal self-energy of emitter j is f_j + s J_jj - i (Gamma_jj + beta_j)
// with s the Lamb-shift sign; off-diagonals are J_jl - i Gamma_jl. The
// transmission is S21 = 1 - i u (f - H)^-1 d with coupling vectors built from
// per-point phases at the probe frequency.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "gse/core.hpp"

namespace gse {

/// Frequency at which the phases of the effective Hamiltonian are evaluated.
/// `resonance`: each emitter's own f_res on the diagonal, the pair's mean
/// resonance off the diagonal. `probe`: the probe frequency everywhere.
enum class EngineReference { resonance, probe };

struct EngineOptions {
    EngineReference reference = EngineReference::resonance;
    ShiftConvention shift = ShiftConvention::heisenberg;
};

struct EffectiveModel {
    std::size_t n = 0;
    std::vector<cplx> diag;     ///< self-energies, Hz
    Eigen::MatrixXcd coupling;  ///< J - i Gamma, symmetric; diagonal holds the self terms J_jj - i Gamma_jj
    Eigen::MatrixXd gamma;      ///< Gamma_jl
    Eigen::MatrixXd j;          ///< J_jl
    Topology topology;
    Waveguide waveguide;
    std::vector<std::string> warnings;

    /// Full non-Hermitian Hamiltonian: self-energies on the diagonal.
    Eigen::MatrixXcd hamiltonian() const {
        Eigen::MatrixXcd h = coupling;
        for (std::size_t k = 0; k < n; ++k) h(k, k) = diag[k];
        return h;
    }
};

namespace detail {

inline double pair_gamma(const Emitter& a, const Emitter& b, double k) {
    double s = 0.0;
    for (const auto& p : a.points())
        for (const auto& q : b.points())
            s += std::sqrt(p.kappa_hz * q.kappa_hz) * std::cos(k * std::abs(p.position_m - q.position_m));
    return s;
}

inline double pair_j(const Emitter& a, const Emitter& b, double k) {
    double s = 0.0;
    for (const auto& p : a.points())
        for (const auto& q : b.points())
            s += std::sqrt(p.kappa_hz * q.kappa_hz) * std::sin(k * std::abs(p.position_m - q.position_m));
    return 0.5 * s;
}

inline void markov_guard(EffectiveModel& m) {
    double lo = m.topology[0].first_position(), hi = m.topology[0].last_position();
    double width = 0.0;
    for (std::size_t j = 0; j < m.n; ++j) {
        lo = std::min(lo, m.topology[j].first_position());
        hi = std::max(hi, m.topology[j].last_position());
        width = std::max(width, -m.diag[j].imag());
    }
    const double product = m.waveguide.delay(hi - lo) * width;
    if (product > 0.1) {
        std::ostringstream os;
        os << "non-Markovian regime: max delay x max linewidth = " << product << " > 0.1";
        m.warnings.push_back(os.str());
    }
}

// `at(j, l)` gives the evaluation frequency for the (j, l) entry.
template <class RefFn>
EffectiveModel build(const Topology& t, const Waveguide& wg, ShiftConvention shift, RefFn at) {
    const std::size_t n = t.size();
    EffectiveModel m{n, std::vector<cplx>(n), Eigen::MatrixXcd(n, n), Eigen::MatrixXd(n, n),
                     Eigen::MatrixXd(n, n), t, wg, {}};
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = j; l < n; ++l) {
            const double k = two_pi * at(j, l) / wg.speed();
            const double g = pair_gamma(t[j], t[l], k);
            const double c = pair_j(t[j], t[l], k);
            m.gamma(j, l) = m.gamma(l, j) = g;
            m.j(j, l) = m.j(l, j) = c;
            m.coupling(j, l) = m.coupling(l, j) = cplx(c, -g);
        }
        m.diag[j] = cplx(t[j].f_res() + shift_sign(shift) * m.j(j, j), -(m.gamma(j, j) + t[j].beta()));
    }
    markov_guard(m);
    return m;
}

}  // namespace detail

/// Effective model with phases at the resonance frequencies (mean resonance
/// for inter-emitter terms).
inline EffectiveModel build_effective(const Topology& t, const Waveguide& wg,
                                      ShiftConvention shift = ShiftConvention::heisenberg) {
    return detail::build(t, wg, shift, [&](std::size_t j, std::size_t l) {
        return j == l ? t[j].f_res() : 0.5 * (t[j].f_res() + t[l].f_res());
    });
}

/// Effective model with every phase evaluated at `f_hz`.
inline EffectiveModel build_effective_at(const Topology& t, const Waveguide& wg, double f_hz,
                                         ShiftConvention shift = ShiftConvention::heisenberg) {
    require(f_hz > 0.0, "build_effective_at: frequency must be > 0");
    return detail::build(t, wg, shift, [&](std::size_t, std::size_t) { return f_hz; });
}

/// Forward-emission (u) and drive (d) vectors at probe frequency `f_hz`.
struct CouplingVectors {
    Eigen::VectorXcd emit;
    Eigen::VectorXcd drive;
};

inline CouplingVectors coupling_vectors(const Topology& t, const Waveguide& wg, double f_hz) {
    const double k = two_pi * f_hz / wg.speed();
    CouplingVectors cv{Eigen::VectorXcd::Zero(t.size()), Eigen::VectorXcd::Zero(t.size())};
    for (std::size_t j = 0; j < t.size(); ++j)
        for (const auto& p : t[j].points()) {
            const double a = std::sqrt(p.kappa_hz);
            cv.emit(j) += a * std::polar(1.0, -k * p.position_m);
            cv.drive(j) += a * std::polar(1.0, k * p.position_m);
        }
    return cv;
}

namespace detail {

// Returns false when the resolvent is singular at f.
inline bool scatter_point(const Eigen::MatrixXcd& h, const CouplingVectors& cv, double f, cplx& s21, cplx& r) {
    const auto n = h.rows();
    const Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(n, n) * f - h;
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
    const Eigen::VectorXcd x = lu.solve(cv.drive);
    if (!x.allFinite() || std::abs(lu.determinant()) < 1e-300) return false;
    const cplx i(0.0, 1.0);
    s21 = 1.0 - i * (cv.emit.array() * x.array()).sum();
    r = -i * (cv.drive.array() * x.array()).sum();
    return true;
}

inline void push(TwoPortSpectrum& out, std::size_t k, bool ok, cplx s21, cplx r) {
    if (ok) {
        out.s21.s21.push_back(s21);
        out.reflection.push_back(r);
    } else {
        out.s21.s21.emplace_back(1.0, 0.0);
        out.reflection.emplace_back(0.0, 0.0);
        out.s21.singular_points.push_back(k);
    }
}

}  // namespace detail

/// Transmission and reflection of a prebuilt model; coupling vectors follow
/// the probe frequency.
inline TwoPortSpectrum s_matrix(const EffectiveModel& m, std::span<const double> frequencies_hz) {
    require(m.n >= 1, "s_matrix: empty model");
    const Eigen::MatrixXcd h = m.hamiltonian();
    TwoPortSpectrum out;
    out.s21.frequency_hz.assign(frequencies_hz.begin(), frequencies_hz.end());
    for (std::size_t k = 0; k < frequencies_hz.size(); ++k) {
        const double f = frequencies_hz[k];
        cplx s21, r;
        const bool ok = detail::scatter_point(h, coupling_vectors(m.topology, m.waveguide, f), f, s21, r);
        detail::push(out, k, ok, s21, r);
    }
    return out;
}

/// Transmission and reflection of a topology under the given options. With
/// EngineReference::probe the Hamiltonian is rebuilt at every probe frequency.
inline TwoPortSpectrum s_matrix(const Topology& t, const Waveguide& wg, std::span<const double> frequencies_hz,
                                const EngineOptions& opt = {}) {
    if (opt.reference == EngineReference::resonance) return s_matrix(build_effective(t, wg, opt.shift), frequencies_hz);
    TwoPortSpectrum out;
    out.s21.frequency_hz.assign(frequencies_hz.begin(), frequencies_hz.end());
    for (std::size_t k = 0; k < frequencies_hz.size(); ++k) {
        const double f = frequencies_hz[k];
        const auto m = build_effective_at(t, wg, f, opt.shift);
        cplx s21, r;
        const bool ok = detail::scatter_point(m.hamiltonian(), coupling_vectors(t, wg, f), f, s21, r);
        detail::push(out, k, ok, s21, r);
    }
    return out;
}

}  // namespace gse
