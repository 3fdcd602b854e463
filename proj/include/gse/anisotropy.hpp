#pragma once

// Magnetocrystalline anisotropy of a cubic sphere rotated in a {110} plane:
// crystal angle theta_H (between [001] and the bias field) to Kittel-mode
// frequency. Shape anisotropy is absent for a sphere.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "gse/core.hpp"

namespace gse {

struct AnisotropyParams {
    double bias_tesla = 0.0;        ///< H_e0
    double anisotropy_tesla = 0.0;  ///< first-order anisotropy field H_A (signed)
    double gyromagnetic_hz_per_tesla = default_gyromagnetic_hz_per_tesla;
    double azimuth_rad = pi / 4.0;  ///< phi0; pi/4 for rotation in the (110) plane
    double magnetization_a_per_m = 1.4e5;  ///< M0; only scales the tensor components

    void validate() const {
        require_finite(bias_tesla, "H_e0");
        require_finite(anisotropy_tesla, "H_A");
        require_finite(gyromagnetic_hz_per_tesla, "gamma");
        require_finite(azimuth_rad, "phi0");
        require(bias_tesla > 0.0, "H_e0 must be > 0");
        require(gyromagnetic_hz_per_tesla > 0.0, "gamma must be > 0");
    }

    /// |H_A| / H_e0 above which the first-order law is unreliable.
    static constexpr double weak_anisotropy_limit = 0.1;
    bool weak_anisotropy() const { return std::abs(anisotropy_tesla) / bias_tesla <= weak_anisotropy_limit; }
};

/// Effective demagnetization components of the anisotropy field, dimensionless.
struct DemagTensor {
    double n11 = 0.0;
    double n22 = 0.0;
    double n12 = 0.0;
    double n33 = 0.0;
};

inline DemagTensor demag_tensor(double theta_rad, double azimuth_rad, double anisotropy_tesla,
                                double magnetization_a_per_m) {
    require_finite(magnetization_a_per_m, "M0");
    require(magnetization_a_per_m != 0.0, "demag_tensor: M0 must be nonzero");
    const double r = anisotropy_tesla / magnetization_a_per_m;
    const double s2 = std::sin(theta_rad) * std::sin(theta_rad);
    const double sin2phi_sq = std::pow(std::sin(2.0 * azimuth_rad), 2);
    DemagTensor n;
    n.n11 = -3.0 * r * s2 * sin2phi_sq;
    n.n22 = -3.0 * r * s2 * (1.0 - 0.25 * sin2phi_sq);
    n.n12 = -3.0 * r * s2 * std::cos(theta_rad) * std::sin(4.0 * azimuth_rad);
    n.n33 = r * (1.0 + std::pow(std::cos(2.0 * theta_rad), 2) - s2 * s2 * sin2phi_sq);
    return n;
}

/// Resonance from the full quadratic law, Hz.
inline double resonance_full(const AnisotropyParams& p, double theta_rad) {
    p.validate();
    const double h = p.bias_tesla, ha = p.anisotropy_tesla;
    const double c2 = std::cos(2.0 * theta_rad), c4 = std::cos(4.0 * theta_rad);
    const double sp = std::pow(std::sin(2.0 * p.azimuth_rad), 2);
    const double first = h + ha * (1.5 + 0.5 * c4 + (-15.0 / 8.0 + 2.0 * c2 - c4 / 8.0) * sp);
    const double second = h + ha * (2.0 * c4 + (0.5 * c2 - 0.5 * c4) * sp);
    const double cross = 2.25 * ha * ha * std::pow(std::sin(theta_rad), 2) * std::pow(std::sin(2.0 * theta_rad), 2) *
                         std::pow(std::sin(4.0 * p.azimuth_rad), 2);
    const double radicand = first * second - cross;
    if (!(radicand > 0.0)) throw ConfigError("resonance_full: negative radicand (unphysical anisotropy regime)");
    return p.gyromagnetic_hz_per_tesla * std::sqrt(radicand);
}

/// Angular factor of the first-order law: -3/16 + 5/4 cos 2t + 15/16 cos 4t.
/// Ranges over [-4/3, 2].
inline double angular_factor(double theta_rad) {
    return -3.0 / 16.0 + 1.25 * std::cos(2.0 * theta_rad) + 15.0 / 16.0 * std::cos(4.0 * theta_rad);
}

/// d(angular_factor)/d theta.
inline double angular_factor_derivative(double theta_rad) {
    return -2.5 * std::sin(2.0 * theta_rad) - 3.75 * std::sin(4.0 * theta_rad);
}

/// Resonance in the weak-anisotropy limit (phi0 = pi/4), Hz.
inline double resonance_simple(const AnisotropyParams& p, double theta_rad) {
    p.validate();
    return p.gyromagnetic_hz_per_tesla * (p.bias_tesla + p.anisotropy_tesla * angular_factor(theta_rad));
}

enum class AnisotropyLaw { full, simple };

inline std::vector<double> angle_sweep(const AnisotropyParams& p, std::span<const double> thetas_rad,
                                       AnisotropyLaw law = AnisotropyLaw::simple) {
    std::vector<double> out;
    out.reserve(thetas_rad.size());
    for (double t : thetas_rad) out.push_back(law == AnisotropyLaw::full ? resonance_full(p, t) : resonance_simple(p, t));
    return out;
}

/// H_A that gives a total angular tuning range `range_hz` under the first-order law.
inline double anisotropy_for_tuning_range(double range_hz,
                                          double gyromagnetic_hz_per_tesla = default_gyromagnetic_hz_per_tesla) {
    return range_hz / (gyromagnetic_hz_per_tesla * (10.0 / 3.0));
}

}  // namespace gse
