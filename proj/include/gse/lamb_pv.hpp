#pragma once

// Principal-value integrals behind the frequency-dependent decay and Lamb
// shift of a two-point emitter. With u = w / w_m and x = w_m t12:
//
//   A(x) = PV int_0^inf u cos(x u) / (u +/- 1) du
//   B(x) = PV int_0^inf u sin(x u) / (u +/- 1) du
//
// both understood as the alpha -> 0+ limit with a factor exp(-alpha u).
// Writing u/(u +/- 1) = 1 -/+ 1/(u +/- 1), the constant part contributes 0 to
// A and 1/x to B, and the rest reduces to the auxiliary functions f, g:
//
//   A+ = -g(x)                 B+ = 1/x - f(x)
//   A- =  g(x) - pi sin x      B- = 1/x - f(x) + pi cos x
//
// A is even in x and B is odd.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gse/core.hpp"
#include "gse/special_functions.hpp"

namespace gse {

/// Sign in the denominator u +/- 1. `minus` carries the pole at u = 1.
enum class Branch { plus, minus };

inline std::string_view to_string(Branch b) { return b == Branch::plus ? "+" : "-"; }

struct PvResult {
    double a = 0.0;  ///< raw A
    double b = 0.0;  ///< raw B
    Branch branch = Branch::plus;
    double argument = 0.0;  ///< x

    double a_over_pi() const { return a / pi; }
    double b_over_pi() const { return b / pi; }
};

namespace detail {

inline void require_nonzero_argument(double x, const char* who) {
    require_finite(x, "x");
    if (x == 0.0) throw NumericError(std::string(who) + ": integrals diverge at x = 0");
}

}  // namespace detail

/// M(x) = g(x)/pi; diverges as x -> 0 and decays like 1/(pi x^2).
inline double pv_m(double x) {
    detail::require_nonzero_argument(x, "M");
    return special::auxiliary_fg(std::abs(x)).second / pi;
}

/// N(x) = f(x)/pi, odd in x; decays like 1/(pi x).
inline double pv_n(double x) {
    detail::require_nonzero_argument(x, "N");
    const double n = special::auxiliary_fg(std::abs(x)).first / pi;
    return x < 0.0 ? -n : n;
}

inline PvResult pv_closed(double x, Branch branch) {
    detail::require_nonzero_argument(x, "pv_closed");
    const double ax = std::abs(x);
    const auto [f, g] = special::auxiliary_fg(ax);
    PvResult r{0.0, 0.0, branch, x};
    if (branch == Branch::plus) {
        r.a = -g;
        r.b = 1.0 / ax - f;
    } else {
        r.a = g - pi * std::sin(ax);
        r.b = 1.0 / ax - f + pi * std::cos(ax);
    }
    if (x < 0.0) r.b = -r.b;
    return r;
}

// ---------------------------------------------------------------------------
// Quadrature oracle. Only elementary functions enter: the regularized
// integrand is integrated panel by panel with Gauss-Legendre, the pole is
// removed by folding the interval [0, 2] onto itself around u = 1 (the
// symmetric-excision limit), and the result is extrapolated to alpha = 0 from
// a geometric alpha sequence.

namespace detail {

inline constexpr std::size_t gl_order = 16;

struct GaussLegendre {
    std::array<double, gl_order> node{};
    std::array<double, gl_order> weight{};
};

inline const GaussLegendre& gauss_legendre() {
    static const GaussLegendre rule = [] {
        GaussLegendre r;
        const std::size_t n = gl_order;
        for (std::size_t i = 0; i < n; ++i) {
            double z = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (std::size_t k = 1; k <= n; ++k) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / static_cast<double>(k);
                }
                dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            r.node[i] = z;
            r.weight[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
        return r;
    }();
    return rule;
}

// exp(-alpha_k u) for a halving sequence alpha_k, by repeated squaring from
// the smallest alpha.
inline void damping_factors(const std::vector<double>& alphas, double u, std::vector<double>& out) {
    double e = std::exp(-alphas.back() * u);
    for (std::size_t k = alphas.size(); k-- > 0;) {
        out[k] = e;
        e *= e;
    }
}

// Accumulates int_lo^hi fn(u) * exp(-alpha_k u) du for every alpha_k at once.
template <class Fn>
void integrate_panels(double lo, double hi, double panel, const std::vector<double>& alphas, Fn fn,
                      std::vector<double>& acc) {
    const auto& gl = gauss_legendre();
    const auto n_panels = static_cast<std::size_t>(std::ceil((hi - lo) / panel));
    const double h = (hi - lo) / static_cast<double>(n_panels);
    std::vector<double> damp(alphas.size());
    for (std::size_t p = 0; p < n_panels; ++p) {
        const double a = lo + static_cast<double>(p) * h;
        for (std::size_t i = 0; i < gl_order; ++i) {
            const double u = a + 0.5 * h * (gl.node[i] + 1.0);
            const double w = 0.5 * h * gl.weight[i];
            const double v = w * fn(u);
            damping_factors(alphas, u, damp);
            for (std::size_t k = 0; k < alphas.size(); ++k) acc[k] += v * damp[k];
        }
    }
}

// Folded pole neighbourhood: int_0^1 [G(1+s) e^{-a(1+s)} - G(1-s) e^{-a(1-s)}] / s ds.
template <class Fn>
void integrate_folded(double panel, const std::vector<double>& alphas, Fn g, std::vector<double>& acc) {
    const auto& gl = gauss_legendre();
    const auto n_panels = static_cast<std::size_t>(std::ceil(1.0 / panel));
    const double h = 1.0 / static_cast<double>(n_panels);
    std::vector<double> up_damp(alphas.size()), dn_damp(alphas.size());
    for (std::size_t p = 0; p < n_panels; ++p) {
        const double a = static_cast<double>(p) * h;
        for (std::size_t i = 0; i < gl_order; ++i) {
            const double s = a + 0.5 * h * (gl.node[i] + 1.0);
            const double w = 0.5 * h * gl.weight[i] / s;
            const double up = g(1.0 + s), dn = g(1.0 - s);
            damping_factors(alphas, 1.0 + s, up_damp);
            damping_factors(alphas, 1.0 - s, dn_damp);
            for (std::size_t k = 0; k < alphas.size(); ++k) acc[k] += w * (up * up_damp[k] - dn * dn_damp[k]);
        }
    }
}

struct Extrapolated {
    double value;
    double residual;
};

// Neville extrapolation of y(alpha) to alpha = 0; residual is the change
// contributed by the last order.
inline Extrapolated extrapolate_to_zero(const std::vector<double>& alphas, std::vector<double> y) {
    const std::size_t n = alphas.size();
    double prev = y[n - 1];
    double change = 0.0;
    for (std::size_t m = 1; m < n; ++m) {
        for (std::size_t i = 0; i + m < n; ++i)
            y[i] = (alphas[i] * y[i + 1] - alphas[i + m] * y[i]) / (alphas[i] - alphas[i + m]);
        change = std::abs(y[0] - prev);
        prev = y[0];
    }
    return {y[0], change};
}

}  // namespace detail

struct PvQuadratureOptions {
    std::size_t alpha_levels = 6;
    double tail_decades = 10.0;  ///< truncate where exp(-alpha_min u) = 10^-tail_decades
    double tolerance = 1e-5;     ///< extrapolation residual above which the result is rejected
};

inline PvResult pv_quadrature(double x, Branch branch, const PvQuadratureOptions& opt = {}) {
    detail::require_nonzero_argument(x, "pv_quadrature");
    require(opt.alpha_levels >= 2, "pv_quadrature: need at least two alpha levels");
    const double ax = std::abs(x);

    std::vector<double> alphas(opt.alpha_levels);
    alphas[0] = std::min(0.25, ax / 4.0);
    for (std::size_t k = 1; k < alphas.size(); ++k) alphas[k] = 0.5 * alphas[k - 1];  // halving is assumed by damping_factors
    const double upper = opt.tail_decades * std::log(10.0) / alphas.back();
    const double panel = std::min(two_pi / ax, 1.0);

    const double sign = branch == Branch::plus ? 1.0 : -1.0;
    std::vector<double> acc_a(alphas.size(), 0.0), acc_b(alphas.size(), 0.0);
    auto cos_part = [&](double u) { return u * std::cos(ax * u) / (u + sign); };
    auto sin_part = [&](double u) { return u * std::sin(ax * u) / (u + sign); };

    double start = 0.0;
    if (branch == Branch::minus) {
        detail::integrate_folded(panel, alphas, [&](double u) { return u * std::cos(ax * u); }, acc_a);
        detail::integrate_folded(panel, alphas, [&](double u) { return u * std::sin(ax * u); }, acc_b);
        start = 2.0;
    }
    detail::integrate_panels(start, upper, panel, alphas, cos_part, acc_a);
    detail::integrate_panels(start, upper, panel, alphas, sin_part, acc_b);

    const auto ea = detail::extrapolate_to_zero(alphas, acc_a);
    const auto eb = detail::extrapolate_to_zero(alphas, acc_b);
    const double residual = std::max(ea.residual, eb.residual);
    if (!std::isfinite(ea.value) || !std::isfinite(eb.value) || residual > opt.tolerance)
        throw NumericError("pv_quadrature: alpha extrapolation did not converge at x = " + std::to_string(x) +
                           " (residual " + std::to_string(residual) + ")");
    return {ea.value, x < 0.0 ? -eb.value : eb.value, branch, x};
}

// ---------------------------------------------------------------------------

struct DecayShift {
    double decay;  ///< 2 pi cos x
    double shift;  ///< -pi sin x
};

/// Radiative-decay and Lamb-shift weights of a pair of coupling points
/// separated by phase x, after renormalization.
inline DecayShift decay_shift_decomposition(double x) {
    require_finite(x, "x");
    return {two_pi * std::cos(x), -pi * std::sin(x)};
}

struct GiantRates {
    double decay_hz;
    double shift_hz;
};

/// Assemble the decay and shift of a two-point emitter (equal rates kappa,
/// phase x between the points) from the pairwise decomposition. Every ordered
/// pair of points contributes to the decay; only distinct pairs shift.
inline GiantRates assemble_two_point(double kappa_hz, double x) {
    const std::array<std::array<double, 2>, 2> sep{{{0.0, x}, {x, 0.0}}};
    GiantRates r{0.0, 0.0};
    for (std::size_t p = 0; p < 2; ++p)
        for (std::size_t q = 0; q < 2; ++q) {
            const auto d = decay_shift_decomposition(sep[p][q]);
            r.decay_hz += kappa_hz * d.decay / two_pi;
            if (p != q) r.shift_hz -= kappa_hz * d.shift / two_pi;
        }
    return r;
}

}  // namespace gse
