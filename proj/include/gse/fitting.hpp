#pragma once

// Least-squares extraction of model parameters from transmission spectra.
//
// Models are addressed by parameter name so that any subset can be freed:
//
//   single          kappa_hz beta_hz f_res_hz length_m speed_mps
//   lorentzian      kappa_giant_hz beta_hz f_center_hz
//   nested_fitform  f_inner_hz f_outer_hz kappa_inner_giant_hz
//                   kappa_outer_giant_hz beta_inner_hz beta_outer_hz j_hz gamma_hz
//
// The optimizer is Levenberg-Marquardt with Marquardt scaling on stacked real
// residuals and a forward-difference Jacobian. Before iterating, a central-
// difference Jacobian is checked for rank; unidentifiable combinations are
// reported by name. If the damped normal equations break down, Nelder-Mead
// takes over from the best point so far.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gse/core.hpp"
#include "gse/nested.hpp"
#include "gse/single.hpp"
#include "gse/sweep_map.hpp"

namespace gse {

// ---------------------------------------------------------------------------
// Data and problem description

/// Spectrum to be fitted: complex S21 or magnitude only, with optional
/// per-point standard deviations.
struct FitData {
    std::vector<double> frequency_hz;
    std::vector<cplx> s21;          ///< empty for magnitude-only data
    std::vector<double> magnitude;  ///< empty for complex data
    std::vector<double> sigma;      ///< empty for uniform weighting

    static FitData from_complex(const Spectrum& s) { return {s.frequency_hz, s.s21, {}, {}}; }
    static FitData from_magnitude(const MagnitudeSpectrum& s) { return {s.frequency_hz, {}, s.magnitude, {}}; }

    bool is_complex() const noexcept { return !s21.empty(); }
    std::size_t size() const noexcept { return frequency_hz.size(); }

    void validate() const {
        require(!frequency_hz.empty(), "fit data is empty");
        require(is_complex() != !magnitude.empty(), "fit data must hold either complex or magnitude values");
        require((is_complex() ? s21.size() : magnitude.size()) == size(), "fit data columns differ in length");
        require(sigma.empty() || sigma.size() == size(), "sigma column length differs from data");
        for (std::size_t k = 0; k < size(); ++k) {
            require_finite(frequency_hz[k], "data frequency");
            if (k > 0) require(frequency_hz[k] > frequency_hz[k - 1], "data frequencies must be strictly increasing");
            if (is_complex())
                require(std::isfinite(s21[k].real()) && std::isfinite(s21[k].imag()), "data S21 must be finite");
            else
                require_finite(magnitude[k], "data magnitude");
            if (!sigma.empty()) require(sigma[k] > 0.0 && std::isfinite(sigma[k]), "sigma must be finite and > 0");
        }
    }
};

enum class FitModel { single, lorentzian, nested_fitform };

/// Objective for magnitude-only data.
enum class MagnitudeObjective { linear, db };

/// Single resonance parametrized directly by its giant decay and center:
/// S21 = 1 + kG / [i(f - f_c) - kG - beta]. Phase- and geometry-free.
struct LorentzianParams {
    double kappa_giant_hz = 0.0;
    double beta_hz = 0.0;
    double f_center_hz = 0.0;
};

inline cplx s21_lorentzian_at(const LorentzianParams& p, double f) {
    const cplx denom(-(p.kappa_giant_hz + p.beta_hz), f - p.f_center_hz);
    return 1.0 + p.kappa_giant_hz / denom;
}

/// A free parameter. Missing bounds fall back to the model's physical range;
/// `scale` (0 = automatic) sets the finite-difference and step scaling.
struct ParamSpec {
    std::string name;
    double initial = 0.0;
    std::optional<double> lower = std::nullopt;
    std::optional<double> upper = std::nullopt;
    double scale = 0.0;
};

struct FitProblem {
    FitData data;
    FitModel model = FitModel::single;
    std::vector<ParamSpec> free;
    SingleGseParams single{};  ///< fixed values for the single model
    PhaseReference reference = PhaseReference::resonance;
    LorentzianParams lorentzian{};
    NestedFitParams nested{};
    MagnitudeObjective magnitude_objective = MagnitudeObjective::linear;
};

struct FitOptions {
    std::size_t max_iterations = 200;
    double gradient_tolerance = 1e-6;  ///< max cosine between residual and any Jacobian column
    double step_tolerance = 1e-14;     ///< relative step below which iteration stops
    double residual_floor = 1e-12;     ///< rms residual treated as an exact fit
    double fd_step = 1e-6;             ///< relative forward-difference step
    double rank_tolerance = 1e-9;      ///< relative singular value marking a null direction
    bool allow_nelder_mead = true;
};

struct FitResult {
    std::vector<std::string> names;
    std::vector<double> values;
    std::vector<double> sigmas;  ///< 1-sigma; +inf when the covariance is singular
    double residual_norm = 0.0;  ///< Euclidean norm of the weighted residual vector
    std::size_t n_iter = 0;
    bool converged = false;
    double gradient_cosine = 0.0;
    std::string method = "levenberg-marquardt";
    std::vector<std::string> warnings;
    std::vector<double> dataset_residual_norms;  ///< per dataset for joint fits

    std::size_t index(std::string_view name) const {
        for (std::size_t k = 0; k < names.size(); ++k)
            if (names[k] == name) return k;
        throw ConfigError("fit result has no parameter '" + std::string(name) + "'");
    }
    double value(std::string_view name) const { return values[index(name)]; }
    double sigma(std::string_view name) const { return sigmas[index(name)]; }
};

// ---------------------------------------------------------------------------
// Parameter addressing

namespace detail {

struct ParamInfo {
    std::string_view name;
    double lower;
    double upper;
    double typical;  ///< used when the initial value is zero
};

inline constexpr double inf = std::numeric_limits<double>::infinity();

inline std::span<const ParamInfo> model_params(FitModel m) {
    static const ParamInfo single[] = {{"kappa_hz", 0.0, inf, 1e5},
                                       {"beta_hz", 0.0, inf, 1e5},
                                       {"f_res_hz", 0.0, inf, 1e9},
                                       {"length_m", 0.0, inf, 1e-2},
                                       {"speed_mps", 0.0, inf, 1e7}};
    static const ParamInfo lorentz[] = {
        {"kappa_giant_hz", 0.0, inf, 1e5}, {"beta_hz", 0.0, inf, 1e5}, {"f_center_hz", 0.0, inf, 1e9}};
    static const ParamInfo nested[] = {{"f_inner_hz", 0.0, inf, 1e9},
                                       {"f_outer_hz", 0.0, inf, 1e9},
                                       {"kappa_inner_giant_hz", 0.0, inf, 1e5},
                                       {"kappa_outer_giant_hz", 0.0, inf, 1e5},
                                       {"beta_inner_hz", 0.0, inf, 1e5},
                                       {"beta_outer_hz", 0.0, inf, 1e5},
                                       {"j_hz", -inf, inf, 1e5},
                                       {"gamma_hz", -inf, inf, 1e5}};
    switch (m) {
        case FitModel::single: return single;
        case FitModel::lorentzian: return lorentz;
        case FitModel::nested_fitform: return nested;
    }
    return single;
}

inline const ParamInfo& param_info(FitModel m, std::string_view name) {
    for (const auto& p : model_params(m))
        if (p.name == name) return p;
    std::string known;
    for (const auto& p : model_params(m)) known += (known.empty() ? "" : ", ") + std::string(p.name);
    throw ConfigError("unknown fit parameter '" + std::string(name) + "' (expected one of: " + known + ")");
}

inline void set_param(FitProblem& pr, std::string_view n, double v) {
    switch (pr.model) {
        case FitModel::single: {
            auto& q = pr.single;
            if (n == "kappa_hz") q.kappa_hz = v;
            else if (n == "beta_hz") q.beta_hz = v;
            else if (n == "f_res_hz") q.f_res_hz = v;
            else if (n == "length_m") q.length_m = v;
            else q.waveguide = Waveguide(v);
            return;
        }
        case FitModel::lorentzian:
            if (n == "kappa_giant_hz") pr.lorentzian.kappa_giant_hz = v;
            else if (n == "beta_hz") pr.lorentzian.beta_hz = v;
            else pr.lorentzian.f_center_hz = v;
            return;
        case FitModel::nested_fitform: {
            auto& q = pr.nested;
            if (n == "f_inner_hz") q.f_inner_hz = v;
            else if (n == "f_outer_hz") q.f_outer_hz = v;
            else if (n == "kappa_inner_giant_hz") q.kappa_inner_giant_hz = v;
            else if (n == "kappa_outer_giant_hz") q.kappa_outer_giant_hz = v;
            else if (n == "beta_inner_hz") q.beta_inner_hz = v;
            else if (n == "beta_outer_hz") q.beta_outer_hz = v;
            else if (n == "j_hz") q.j_hz = v;
            else q.gamma_hz = v;
            return;
        }
    }
}

inline cplx model_at(const FitProblem& pr, double f) {
    switch (pr.model) {
        case FitModel::single: return s21_single_point(pr.single, f, pr.reference).s21;
        case FitModel::lorentzian: return s21_lorentzian_at(pr.lorentzian, f);
        case FitModel::nested_fitform: return s21_nested_fitform_at(pr.nested, f);
    }
    return {1.0, 0.0};
}

// Residuals of `pr` (already holding the trial values) appended to `out` from `offset`.
inline void fill_residuals(const FitProblem& pr, Eigen::VectorXd& out, Eigen::Index offset) {
    const auto& d = pr.data;
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double w = d.sigma.empty() ? 1.0 : 1.0 / d.sigma[k];
        const cplx m = model_at(pr, d.frequency_hz[k]);
        if (d.is_complex()) {
            const cplx e = (m - d.s21[k]) * w;
            out(offset + 2 * static_cast<Eigen::Index>(k)) = e.real();
            out(offset + 2 * static_cast<Eigen::Index>(k) + 1) = e.imag();
        } else if (pr.magnitude_objective == MagnitudeObjective::db) {
            out(offset + static_cast<Eigen::Index>(k)) =
                w * 20.0 * (std::log10(std::abs(m)) - std::log10(d.magnitude[k]));
        } else {
            out(offset + static_cast<Eigen::Index>(k)) = w * (std::abs(m) - d.magnitude[k]);
        }
    }
}

inline Eigen::Index residual_count(const FitData& d) {
    return static_cast<Eigen::Index>(d.is_complex() ? 2 * d.size() : d.size());
}

// Generic bounded least-squares problem.
struct LeastSquares {
    std::vector<std::string> names;
    Eigen::VectorXd x0, lower, upper, scale;
    Eigen::Index m = 0;
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> residuals;
};

inline Eigen::VectorXd clamp(const LeastSquares& ls, Eigen::VectorXd x) {
    return x.cwiseMax(ls.lower).cwiseMin(ls.upper);
}

inline double step_size(const LeastSquares& ls, const Eigen::VectorXd& x, Eigen::Index k, double rel) {
    return rel * std::max(std::abs(x(k)), ls.scale(k));
}

inline Eigen::MatrixXd jacobian_forward(const LeastSquares& ls, const Eigen::VectorXd& x, const Eigen::VectorXd& r,
                                        double rel) {
    Eigen::MatrixXd jac(ls.m, x.size());
    Eigen::VectorXd rp(ls.m);
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        double h = step_size(ls, x, k, rel);
        if (x(k) + h > ls.upper(k)) h = -h;
        Eigen::VectorXd xp = x;
        xp(k) += h;
        ls.residuals(xp, rp);
        jac.col(k) = (rp - r) / (xp(k) - x(k));
    }
    return jac;
}

// Central differences with one Richardson step, O(h^4). Large propagation
// phases make plain central differences too coarse to expose exact
// degeneracies.
inline Eigen::MatrixXd jacobian_central(const LeastSquares& ls, const Eigen::VectorXd& x, double rel) {
    Eigen::MatrixXd jac(ls.m, x.size());
    Eigen::VectorXd rp(ls.m), rm(ls.m);
    auto central = [&](Eigen::Index k, double h) {
        Eigen::VectorXd xp = x, xm = x;
        xp(k) += h;
        xm(k) -= h;
        ls.residuals(xp, rp);
        ls.residuals(xm, rm);
        return Eigen::VectorXd((rp - rm) / (2.0 * h));
    };
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double h = step_size(ls, x, k, rel);
        jac.col(k) = (4.0 * central(k, 0.5 * h) - central(k, h)) / 3.0;
    }
    return jac;
}

// Throws when the Jacobian at x has a null direction, naming the parameters
// that span it.
inline void check_identifiable(const LeastSquares& ls, const Eigen::VectorXd& x, double rank_tol) {
    const Eigen::MatrixXd jac = jacobian_central(ls, x, 2e-5);
    const Eigen::Index n = jac.cols();
    std::vector<std::string> offending;
    Eigen::MatrixXd normed = jac;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double c = jac.col(k).norm();
        if (!(c > 0.0) || !std::isfinite(c)) {
            offending.push_back(ls.names[static_cast<std::size_t>(k)]);
            normed.col(k).setZero();
        } else {
            normed.col(k) /= c;
        }
    }
    if (offending.empty() && n > 1) {
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(normed, Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        for (Eigen::Index s = 0; s < n; ++s) {
            if (sv(s) > rank_tol * sv(0)) continue;
            for (Eigen::Index k = 0; k < n; ++k)
                if (std::abs(svd.matrixV()(k, s)) > 0.2) {
                    const auto& name = ls.names[static_cast<std::size_t>(k)];
                    if (std::find(offending.begin(), offending.end(), name) == offending.end())
                        offending.push_back(name);
                }
        }
    }
    if (!offending.empty()) {
        std::string list;
        for (const auto& o : offending) list += (list.empty() ? "" : ", ") + o;
        throw NumericError("singular Jacobian: parameters not identifiable from the data: " + list);
    }
}

inline double gradient_cosine(const Eigen::MatrixXd& jac, const Eigen::VectorXd& r) {
    const double rn = r.norm();
    if (rn == 0.0) return 0.0;
    const Eigen::VectorXd g = jac.transpose() * r;
    double worst = 0.0;
    for (Eigen::Index k = 0; k < jac.cols(); ++k) {
        const double c = jac.col(k).norm();
        if (c > 0.0) worst = std::max(worst, std::abs(g(k)) / (c * rn));
    }
    return worst;
}

inline std::vector<double> covariance_sigmas(const Eigen::MatrixXd& jac, double cost, Eigen::Index m) {
    const Eigen::Index n = jac.cols();
    std::vector<double> out(static_cast<std::size_t>(n), inf);
    if (m <= n) return out;
    const double s2 = 2.0 * cost / static_cast<double>(m - n);
    const Eigen::MatrixXd a = jac.transpose() * jac;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return out;
    const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(n, n));
    for (Eigen::Index k = 0; k < n; ++k) {
        const double v = s2 * cov(k, k);
        out[static_cast<std::size_t>(k)] = v >= 0.0 && std::isfinite(v) ? std::sqrt(v) : inf;
    }
    return out;
}

// Nelder-Mead on the scaled coordinates; box handled by clamping.
inline Eigen::VectorXd nelder_mead(const LeastSquares& ls, Eigen::VectorXd start, std::size_t max_evals,
                                   std::size_t& evals) {
    const Eigen::Index n = start.size();
    Eigen::VectorXd r(ls.m);
    auto cost = [&](const Eigen::VectorXd& y) {
        ++evals;
        ls.residuals(clamp(ls, start + y.cwiseProduct(ls.scale)), r);
        const double c = r.squaredNorm();
        return std::isfinite(c) ? c : inf;
    };
    std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(n + 1), Eigen::VectorXd::Zero(n));
    for (Eigen::Index k = 0; k < n; ++k) simplex[static_cast<std::size_t>(k + 1)](k) = 0.05;
    std::vector<double> f(simplex.size());
    for (std::size_t i = 0; i < simplex.size(); ++i) f[i] = cost(simplex[i]);
    std::vector<std::size_t> order(simplex.size());
    while (evals < max_evals) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
        if (std::abs(f[worst] - f[best]) <= 1e-15 * (std::abs(f[best]) + 1e-300)) break;
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i : order)
            if (i != worst) centroid += simplex[i];
        centroid /= static_cast<double>(n);
        const Eigen::VectorXd xr = centroid + (centroid - simplex[worst]);
        const double fr = cost(xr);
        if (fr < f[best]) {
            const Eigen::VectorXd xe = centroid + 2.0 * (centroid - simplex[worst]);
            const double fe = cost(xe);
            if (fe < fr) simplex[worst] = xe, f[worst] = fe;
            else simplex[worst] = xr, f[worst] = fr;
        } else if (fr < f[second]) {
            simplex[worst] = xr, f[worst] = fr;
        } else {
            const Eigen::VectorXd xc = centroid + 0.5 * (simplex[worst] - centroid);
            const double fc = cost(xc);
            if (fc < f[worst]) {
                simplex[worst] = xc, f[worst] = fc;
            } else {
                for (std::size_t i = 0; i < simplex.size(); ++i) {
                    if (i == best) continue;
                    simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
                    f[i] = cost(simplex[i]);
                }
            }
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(f.begin(), f.end()) - f.begin());
    return clamp(ls, start + simplex[best].cwiseProduct(ls.scale));
}

inline FitResult solve(const LeastSquares& ls, const FitOptions& opt) {
    const Eigen::Index n = ls.x0.size();
    const Eigen::Index m = ls.m;
    FitResult res;
    res.names = ls.names;

    Eigen::VectorXd x = clamp(ls, ls.x0);
    Eigen::VectorXd r(m), r_new(m);
    ls.residuals(x, r);
    if (!r.allFinite()) throw NumericError("fit: model is not finite at the initial guess");
    check_identifiable(ls, x, opt.rank_tolerance);

    const double floor_norm = opt.residual_floor * std::sqrt(static_cast<double>(m));
    double cost = 0.5 * r.squaredNorm();
    double lambda = -1.0, nu = 2.0;
    Eigen::VectorXd diag_scale = Eigen::VectorXd::Zero(n);
    bool breakdown = false;
    std::size_t iter = 0;
    Eigen::MatrixXd jac;

    for (; iter < opt.max_iterations; ++iter) {
        jac = jacobian_forward(ls, x, r, opt.fd_step);
        if (r.norm() <= floor_norm || gradient_cosine(jac, r) <= opt.gradient_tolerance) break;
        const Eigen::MatrixXd a = jac.transpose() * jac;
        const Eigen::VectorXd g = jac.transpose() * r;
        diag_scale = diag_scale.cwiseMax(a.diagonal());
        if (lambda < 0.0) lambda = 1e-3;

        bool accepted = false;
        double rel_step = 0.0;
        for (int trial = 0; trial < 60; ++trial) {
            Eigen::MatrixXd damped = a;
            damped.diagonal() += lambda * diag_scale.cwiseMax(1e-300);
            const Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
            const Eigen::VectorXd step = ldlt.solve(-g);
            if (ldlt.info() != Eigen::Success || !step.allFinite()) {
                breakdown = true;
                break;
            }
            const Eigen::VectorXd x_new = clamp(ls, x + step);
            const Eigen::VectorXd taken = x_new - x;
            ls.residuals(x_new, r_new);
            const double cost_new = r_new.allFinite() ? 0.5 * r_new.squaredNorm() : inf;
            const double predicted = -(g.dot(taken) + 0.5 * taken.dot(a * taken));
            rel_step = (taken.array().abs() / x.array().abs().max(ls.scale.array())).maxCoeff();
            if (cost_new < cost) {
                const double rho = predicted > 0.0 ? (cost - cost_new) / predicted : 0.0;
                lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
                nu = 2.0;
                x = x_new;
                r = r_new;
                cost = cost_new;
                accepted = true;
                break;
            }
            lambda *= nu;
            nu *= 2.0;
            if (lambda > 1e20 || rel_step < opt.step_tolerance) break;
        }
        if (breakdown) break;
        if (!accepted || rel_step < opt.step_tolerance) {
            ++iter;
            jac = jacobian_forward(ls, x, r, opt.fd_step);
            break;
        }
    }

    if (breakdown) {
        if (!opt.allow_nelder_mead) throw NumericError("fit: damped normal equations are singular");
        std::size_t evals = 0;
        x = nelder_mead(ls, x, 4000 * static_cast<std::size_t>(n), evals);
        ls.residuals(x, r);
        cost = 0.5 * r.squaredNorm();
        jac = jacobian_forward(ls, x, r, opt.fd_step);
        res.method = "nelder-mead";
        res.warnings.push_back("Levenberg-Marquardt broke down; result from Nelder-Mead");
        iter += evals;
    }
    if (jac.size() == 0) jac = jacobian_forward(ls, x, r, opt.fd_step);

    res.values.assign(x.data(), x.data() + n);
    res.residual_norm = r.norm();
    res.n_iter = iter;
    res.gradient_cosine = gradient_cosine(jac, r);
    res.converged = res.residual_norm <= floor_norm || res.gradient_cosine <= opt.gradient_tolerance;
    res.sigmas = covariance_sigmas(jac, cost, m);
    if (!res.converged && iter >= opt.max_iterations)
        res.warnings.push_back("iteration limit reached before convergence");
    return res;
}

inline LeastSquares make_least_squares(FitModel model, const std::vector<ParamSpec>& free) {
    require(!free.empty(), "fit needs at least one free parameter");
    LeastSquares ls;
    const auto n = static_cast<Eigen::Index>(free.size());
    ls.x0.resize(n);
    ls.lower.resize(n);
    ls.upper.resize(n);
    ls.scale.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto& s = free[static_cast<std::size_t>(k)];
        const auto& info = param_info(model, s.name);
        for (std::size_t j = 0; j < static_cast<std::size_t>(k); ++j)
            require(free[j].name != s.name, "fit parameter '" + s.name + "' listed twice");
        require_finite(s.initial, "initial value of " + s.name);
        ls.names.push_back(s.name);
        ls.x0(k) = s.initial;
        ls.lower(k) = s.lower.value_or(info.lower);
        ls.upper(k) = s.upper.value_or(info.upper);
        require(ls.lower(k) < ls.upper(k), "fit parameter '" + s.name + "': lower bound must be below upper bound");
        require(s.initial >= ls.lower(k) && s.initial <= ls.upper(k),
                "fit parameter '" + s.name + "': initial value outside bounds");
        ls.scale(k) = s.scale > 0.0 ? s.scale : (s.initial != 0.0 ? std::abs(s.initial) : info.typical);
    }
    return ls;
}

}  // namespace detail

/// Fit one spectrum.
inline FitResult fit(const FitProblem& problem, const FitOptions& opt = {}) {
    problem.data.validate();
    require(problem.data.size() >= 2 * problem.free.size(), "fit: need at least two data points per free parameter");
    auto ls = detail::make_least_squares(problem.model, problem.free);
    ls.m = detail::residual_count(problem.data);
    ls.residuals = [&problem, names = ls.names](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
        FitProblem trial = problem;
        for (std::size_t k = 0; k < names.size(); ++k) {
            const double v = x(static_cast<Eigen::Index>(k));
            if (names[k] == "speed_mps" && !(v > 0.0)) {
                out.setConstant(std::numeric_limits<double>::quiet_NaN());
                return;
            }
            detail::set_param(trial, names[k], v);
        }
        detail::fill_residuals(trial, out, 0);
    };
    return detail::solve(ls, opt);
}

// ---------------------------------------------------------------------------
// Joint geometry fit

struct GeometryDataset {
    FitData data;
    double f_res_hz = 0.0;
};

/// Several single-emitter spectra at known resonance frequencies sharing
/// kappa, beta, L and v. Free names are a subset of
/// {kappa_hz, beta_hz, length_m, speed_mps}. L and v enter only through L/v,
/// so freeing both is reported as unidentifiable.
struct GeometryProblem {
    std::vector<GeometryDataset> datasets;
    SingleGseParams base{};
    std::vector<ParamSpec> free;
    PhaseReference reference = PhaseReference::resonance;
    MagnitudeObjective magnitude_objective = MagnitudeObjective::linear;
};

inline FitResult fit_global_geometry(const GeometryProblem& problem, const FitOptions& opt = {}) {
    require(problem.datasets.size() >= 3, "fit_global_geometry: need at least 3 datasets");
    for (const auto& s : problem.free)
        require(s.name == "kappa_hz" || s.name == "beta_hz" || s.name == "length_m" || s.name == "speed_mps",
                "fit_global_geometry: '" + s.name + "' is not a shared parameter");
    double lo = problem.datasets.front().f_res_hz, hi = lo;
    std::size_t total = 0;
    std::vector<Eigen::Index> offsets;
    Eigen::Index m = 0;
    for (const auto& d : problem.datasets) {
        d.data.validate();
        require(d.f_res_hz > 0.0, "fit_global_geometry: dataset f_res must be > 0");
        lo = std::min(lo, d.f_res_hz);
        hi = std::max(hi, d.f_res_hz);
        total += d.data.size();
        offsets.push_back(m);
        m += detail::residual_count(d.data);
    }
    require(total >= 2 * problem.free.size(), "fit_global_geometry: too few data points");
    if (hi == lo)
        throw ConfigError("fit_global_geometry: all datasets share one resonance frequency; geometry is degenerate");
    const double period = problem.base.waveguide.speed() / problem.base.length_m;

    auto ls = detail::make_least_squares(FitModel::single, problem.free);
    ls.m = m;
    ls.residuals = [&problem, &offsets, names = ls.names](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
        FitProblem trial;
        trial.model = FitModel::single;
        trial.single = problem.base;
        trial.reference = problem.reference;
        trial.magnitude_objective = problem.magnitude_objective;
        for (std::size_t k = 0; k < names.size(); ++k) {
            const double v = x(static_cast<Eigen::Index>(k));
            if (names[k] == "speed_mps" && !(v > 0.0)) {
                out.setConstant(std::numeric_limits<double>::quiet_NaN());
                return;
            }
            detail::set_param(trial, names[k], v);
        }
        for (std::size_t j = 0; j < problem.datasets.size(); ++j) {
            trial.single.f_res_hz = problem.datasets[j].f_res_hz;
            trial.data = problem.datasets[j].data;
            detail::fill_residuals(trial, out, offsets[j]);
        }
    };
    auto res = detail::solve(ls, opt);
    if (hi - lo < period) {
        std::ostringstream os;
        os << "datasets span " << (hi - lo) << " Hz, less than one interference period (" << period
           << " Hz); L and v are weakly constrained";
        res.warnings.push_back(os.str());
    }

    Eigen::VectorXd x(static_cast<Eigen::Index>(res.values.size()));
    for (std::size_t k = 0; k < res.values.size(); ++k) x(static_cast<Eigen::Index>(k)) = res.values[k];
    Eigen::VectorXd r(m);
    ls.residuals(x, r);
    for (std::size_t j = 0; j < problem.datasets.size(); ++j) {
        const Eigen::Index len = detail::residual_count(problem.datasets[j].data);
        res.dataset_residual_norms.push_back(r.segment(offsets[j], len).norm());
    }
    return res;
}

// ---------------------------------------------------------------------------
// Decay curve and initial guesses

struct DecayMeasurement {
    double f_res_hz = 0.0;
    double kappa_giant_hz = 0.0;
    double sigma_hz = 0.0;
};

struct DecayCurvePoint {
    double f_res_hz;
    double kappa_giant_fit_hz;
    double sigma_hz;
    double kappa_giant_model_hz;  ///< 2 kappa (1 + cos phi) at f_res
};

/// Per-resonance fitted giant decay, sorted by frequency, alongside the
/// interference prediction of `model` (its kappa, L and v are used).
inline std::vector<DecayCurvePoint> extract_decay_curve(std::span<const DecayMeasurement> fits,
                                                        const SingleGseParams& model) {
    require(!fits.empty(), "extract_decay_curve: no fits given");
    std::vector<DecayCurvePoint> out;
    out.reserve(fits.size());
    for (const auto& d : fits) {
        require_finite(d.kappa_giant_hz, "fitted decay");
        out.push_back({d.f_res_hz, d.kappa_giant_hz, d.sigma_hz, giant_decay(model, d.f_res_hz)});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.f_res_hz < b.f_res_hz; });
    return out;
}

/// Decay measurement from a lorentzian fit.
inline DecayMeasurement decay_from_fit(const FitResult& r) {
    return {r.value("f_center_hz"), r.value("kappa_giant_hz"), r.sigma("kappa_giant_hz")};
}

struct SingleGuess {
    LorentzianParams lorentzian;
    SingleGseParams single;
};

/// Starting values from the deepest |S21| dip. Depth m = beta / (kG + beta)
/// and the full width W at level (1 + m)/2 give the total rate through
/// |S21|^2 = (D^2 + beta^2) / (D^2 + T^2). The per-point kappa and f_res then
/// follow from the phase of `geometry` at the dip.
inline SingleGuess initial_guess_single(const FitData& data, const SingleGseParams& geometry) {
    data.validate();
    require(data.size() >= 5, "initial_guess_single: need at least 5 points");
    Spectrum s;
    s.frequency_hz = data.frequency_hz;
    s.s21.resize(data.size());
    for (std::size_t k = 0; k < data.size(); ++k)
        s.s21[k] = data.is_complex() ? data.s21[k] : cplx(data.magnitude[k], 0.0);

    std::size_t imin = 0;
    for (std::size_t k = 1; k < s.size(); ++k)
        if (s.magnitude(k) < s.magnitude(imin)) imin = k;
    const double f_dip = refine_minimum(s, imin);
    const double depth = std::clamp(s.magnitude(imin), 0.0, 0.999);
    const auto width = half_depth_width(s);
    if (!width) throw NumericError("initial_guess_single: dip is not resolved inside the data window");

    const double h = 0.5 * (1.0 + depth);
    const double total = *width / (2.0 * std::sqrt((h * h - depth * depth) / (1.0 - h * h)));
    SingleGuess g;
    g.lorentzian = {(1.0 - depth) * total, depth * total, f_dip};

    g.single = geometry;
    const double phi = geometry.phase_at(f_dip);
    const double weight = 2.0 * (1.0 + std::cos(phi));
    if (weight < 1e-6) throw NumericError("initial_guess_single: phase near pi, kappa cannot be separated");
    g.single.kappa_hz = g.lorentzian.kappa_giant_hz / weight;
    g.single.beta_hz = g.lorentzian.beta_hz;
    g.single.f_res_hz = f_dip - g.single.kappa_hz * std::sin(phi);
    return g;
}

}  // namespace gse
