#pragma once

// Sine and cosine integrals
//
//   Si(x) = int_0^x sin(t)/t dt
//   Ci(x) = gamma_E + ln x + int_0^x (cos(t) - 1)/t dt
//
// and the auxiliary functions
//
//   f(x) = Ci(x) sin x - (Si(x) - pi/2) cos x
//   g(x) = -Ci(x) cos x - (Si(x) - pi/2) sin x
//
// Power series below x = 4, where cancellation costs at most one digit.
// Above that, the continued fraction for exp(ix) E1(ix) = g(x) - i f(x)
// (modified Lentz), which converges in a handful of terms for large x and
// yields f and g without cancellation.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <utility>

#include "gse/errors.hpp"

namespace gse::special {

namespace detail {

inline constexpr double series_limit = 4.0;

struct SiCi {
    double si;
    double ci;
};

inline SiCi series(double x) {
    const double x2 = x * x;
    double si = 0.0, ci = 0.0;
    double term = x;  // x^(2k+1)/(2k+1)!
    for (int k = 0; k < 60; ++k) {
        const double n = 2.0 * k + 1.0;
        const double si_term = term / n;
        si += si_term;
        term *= -x2 / ((n + 1.0) * (n + 2.0));
        if (std::abs(si_term) < 1e-18 * std::abs(si)) break;
    }
    term = -x2 / 2.0;  // (-1)^k x^(2k)/(2k)!, k = 1
    for (int k = 1; k < 60; ++k) {
        const double n = 2.0 * k;
        const double ci_term = term / n;
        ci += ci_term;
        term *= -x2 / ((n + 1.0) * (n + 2.0));
        if (std::abs(ci_term) < 1e-18) break;
    }
    ci += std::numbers::egamma + std::log(x);
    return {si, ci};
}

// exp(ix) E1(ix) for x > 0 by continued fraction.
inline std::complex<double> scaled_e1_imag(double x) {
    using C = std::complex<double>;
    constexpr double tiny = 1e-300;
    C b(1.0, x);
    C c(1.0 / tiny, 0.0);
    C d = 1.0 / b;
    C h = d;
    for (int i = 2; i < 10000; ++i) {
        const double a = -static_cast<double>(i - 1) * static_cast<double>(i - 1);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const C del = c * d;
        h *= del;
        if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < 1e-16) return h;
    }
    throw NumericError("sine/cosine integral continued fraction did not converge");
}

}  // namespace detail

/// Auxiliary pair (f, g), x > 0.
inline std::pair<double, double> auxiliary_fg(double x) {
    if (!(x > 0.0)) throw ConfigError("auxiliary_fg: argument must be > 0");
    if (x <= detail::series_limit) {
        const auto s = detail::series(x);
        const double si = s.si - std::numbers::pi / 2.0;
        return {s.ci * std::sin(x) - si * std::cos(x), -s.ci * std::cos(x) - si * std::sin(x)};
    }
    const auto h = detail::scaled_e1_imag(x);
    return {-h.imag(), h.real()};
}

inline double si(double x) {
    if (std::isnan(x)) return x;
    if (x < 0.0) return -si(-x);
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return std::numbers::pi / 2.0;
    if (x <= detail::series_limit) return detail::series(x).si;
    const auto h = detail::scaled_e1_imag(x);
    const auto e1 = std::polar(1.0, -x) * h;  // E1(ix) = -Ci + i(Si - pi/2)
    return std::numbers::pi / 2.0 + e1.imag();
}

inline double ci(double x) {
    if (!(x > 0.0)) throw ConfigError("ci: argument must be > 0");
    if (std::isinf(x)) return 0.0;
    if (x <= detail::series_limit) return detail::series(x).ci;
    const auto h = detail::scaled_e1_imag(x);
    return -(std::polar(1.0, -x) * h).real();
}

}  // namespace gse::special
