#pragma once

// Helpers shared by the unit tests. Nothing here calls into the library, so
// values computed with these routines are independent checks.

#include <array>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

namespace test_support {

inline constexpr double euler_gamma = 0.57721566490153286061;

// Adaptive Gauss-Kronrod (7/15) on [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-14,
                        int depth = 0) {
    static constexpr std::array<double, 8> xk{0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                              0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                              0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                              0.207784955007898467600689403773245, 0.0};
    static constexpr std::array<double, 8> wk{0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                              0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                              0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                              0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr std::array<double, 4> wg{0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                              0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double kron = wk[7] * f(c);
    double gauss = wg[3] * f(c);
    for (int i = 0; i < 7; ++i) {
        const double s = f(c - h * xk[i]) + f(c + h * xk[i]);
        kron += wk[i] * s;
        if (i % 2 == 1) gauss += wg[i / 2] * s;
    }
    kron *= h;
    gauss *= h;
    if (std::abs(kron - gauss) <= tol * std::max(1.0, std::abs(kron)) || depth > 40) return kron;
    return integrate(f, a, c, tol, depth + 1) + integrate(f, c, b, tol, depth + 1);
}

// Sine and cosine integrals from their defining integrals, split into unit
// panels so the oscillation never outruns the rule.
inline double si_quad(double x) {
    auto f = [](double t) { return t == 0.0 ? 1.0 : std::sin(t) / t; };
    double s = 0.0;
    for (double a = 0.0; a < x; a += 1.0) s += integrate(f, a, std::min(a + 1.0, x));
    return s;
}

inline double ci_quad(double x) {
    auto f = [](double t) { return t == 0.0 ? 0.0 : (std::cos(t) - 1.0) / t; };
    double s = 0.0;
    for (double a = 0.0; a < x; a += 1.0) s += integrate(f, a, std::min(a + 1.0, x));
    return euler_gamma + std::log(x) + s;
}

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    std::random_device rd;
    auto dir = std::filesystem::temp_directory_path() / ("gse_" + tag + "_" + std::to_string(rd()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace test_support
