#pragma once

// Text formats: spectrum and table CSV, the JSON device configuration,
// unit-suffixed quantities, fit reports and synthetic noisy spectra.
//
// Numbers are written in the shortest form that parses back to the same
// double, so every CSV value round-trips exactly.

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "gse/anisotropy.hpp"
#include "gse/core.hpp"
#include "gse/fitting.hpp"
#include "gse/nested.hpp"
#include "gse/single.hpp"
#include "gse/sweep_map.hpp"

namespace gse::io {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Numbers

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Strict parse of a full token; nullopt on any trailing garbage.
inline std::optional<double> parse_double(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

// ---------------------------------------------------------------------------
// Quantities with mandatory unit suffix

enum class Quantity { frequency, field, angle, length, speed, plain };

/// Unit expected for a config key, inferred from its suffix.
inline Quantity quantity_for_key(std::string_view key) {
    auto ends = [&](std::string_view suf) {
        return key.size() >= suf.size() && key.substr(key.size() - suf.size()) == suf;
    };
    if (ends("_hz")) return Quantity::frequency;
    if (ends("_tesla")) return Quantity::field;
    if (ends("_rad")) return Quantity::angle;
    if (ends("_mps")) return Quantity::speed;
    if (ends("_m")) return Quantity::length;
    return Quantity::plain;
}

/// Parses "4.35GHz", "155 mT", "45deg", "8.28cm", "3.26e7m/s" into SI
/// (Hz, T, rad, m, m/s). The unit is required except for Quantity::plain.
inline double parse_quantity(std::string_view text, Quantity q) {
    std::string t(text);
    t.erase(std::remove_if(t.begin(), t.end(), [](unsigned char c) { return std::isspace(c); }), t.end());
    if (q == Quantity::plain) {
        const auto v = parse_double(t);
        if (!v) throw ConfigError("expected a number, got '" + std::string(text) + "'");
        return *v;
    }
    struct Unit {
        std::string_view suffix;
        double factor;
    };
    static const Unit frequency[] = {{"GHz", 1e9}, {"MHz", 1e6}, {"kHz", 1e3}, {"Hz", 1.0}};
    static const Unit field[] = {{"mT", 1e-3}, {"T", 1.0}};
    static const Unit angle[] = {{"deg", pi / 180.0}, {"rad", 1.0}};
    static const Unit length[] = {{"mm", 1e-3}, {"cm", 1e-2}, {"m", 1.0}};
    static const Unit speed[] = {{"m/s", 1.0}};
    std::span<const Unit> units;
    const char* what = "";
    switch (q) {
        case Quantity::frequency: units = frequency, what = "frequency (Hz, kHz, MHz, GHz)"; break;
        case Quantity::field: units = field, what = "field (T, mT)"; break;
        case Quantity::angle: units = angle, what = "angle (deg, rad)"; break;
        case Quantity::length: units = length, what = "length (m, cm, mm)"; break;
        case Quantity::speed: units = speed, what = "speed (m/s)"; break;
        case Quantity::plain: break;
    }
    for (const auto& u : units) {
        if (t.size() > u.suffix.size() && t.compare(t.size() - u.suffix.size(), u.suffix.size(), u.suffix) == 0) {
            const auto v = parse_double(std::string_view(t).substr(0, t.size() - u.suffix.size()));
            if (v && std::isfinite(*v)) return *v * u.factor;
            break;
        }
    }
    throw ConfigError("'" + std::string(text) + "' is not a " + what + " with a unit suffix");
}

struct Range {
    double start;
    double stop;
    std::size_t count;

    double at(std::size_t k) const {
        if (count == 1) return start;
        if (k + 1 == count) return stop;
        return start + (stop - start) * static_cast<double>(k) / static_cast<double>(count - 1);
    }
    std::vector<double> values() const {
        std::vector<double> v(count);
        for (std::size_t k = 0; k < count; ++k) v[k] = at(k);
        return v;
    }
};

/// "a:b:n" with unit-suffixed endpoints (plain numbers for Quantity::plain).
inline Range parse_range(std::string_view text, Quantity q) {
    const auto c1 = text.find(':');
    const auto c2 = c1 == std::string_view::npos ? c1 : text.find(':', c1 + 1);
    if (c2 == std::string_view::npos) throw ConfigError("range '" + std::string(text) + "' must look like start:stop:count");
    const double a = parse_quantity(text.substr(0, c1), q);
    const double b = parse_quantity(text.substr(c1 + 1, c2 - c1 - 1), q);
    const auto n = parse_double(text.substr(c2 + 1));
    if (!n || *n < 1.0 || std::floor(*n) != *n) throw ConfigError("range count must be a positive integer");
    return {a, b, static_cast<std::size_t>(*n)};
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error while reading '" + path + "'");
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("error while writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// CSV emission

inline std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (std::size_t k = 0; k < header.size(); ++k) out += (k ? "," : "") + header[k];
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) out += ',';
            out += format_double(row[k]);
        }
        out += '\n';
    }
    return out;
}

inline std::string spectrum_csv(const Spectrum& s) {
    std::vector<std::vector<double>> rows;
    rows.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        rows.push_back({s.frequency_hz[i], s.s21[i].real(), s.s21[i].imag(), s.magnitude(i), s.db(i)});
    return csv_table({"frequency_hz", "s21_re", "s21_im", "s21_mag", "s21_db"}, rows);
}

inline std::string reflection_csv(const std::vector<double>& f, const std::vector<cplx>& r) {
    std::vector<std::vector<double>> rows;
    rows.reserve(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        rows.push_back({f[i], r[i].real(), r[i].imag(), std::abs(r[i]), 20.0 * std::log10(std::abs(r[i]))});
    return csv_table({"frequency_hz", "r_re", "r_im", "r_mag", "r_db"}, rows);
}

inline std::string map_csv(const SweepMap& m) {
    std::vector<std::vector<double>> rows;
    for (std::size_t c = 0; c < m.columns.size(); ++c)
        for (std::size_t i = 0; i < m.columns[c].size(); ++i)
            rows.push_back({m.sweep_values[c], m.columns[c].frequency_hz[i], m.columns[c].magnitude(i),
                            m.columns[c].db(i)});
    return csv_table({"sweep_value", "frequency_hz", "s21_mag", "s21_db"}, rows);
}

inline std::string eigen_csv(const std::vector<EigenPoint>& pts) {
    std::vector<std::vector<double>> rows;
    for (const auto& p : pts)
        rows.push_back({p.sweep_value, p.first.real(), p.first.imag(), p.second.real(), p.second.imag()});
    return csv_table({"sweep_value", "re1_hz", "im1_hz", "re2_hz", "im2_hz"}, rows);
}

// ---------------------------------------------------------------------------
// CSV ingestion

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        std::string cell(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        cell.erase(0, cell.find_first_not_of(" \t\""));
        const auto last = cell.find_last_not_of(" \t\"");
        cell.erase(last == std::string::npos ? 0 : last + 1);
        out.push_back(cell);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline std::optional<std::size_t> find_column(const std::vector<std::string>& header,
                                              std::initializer_list<std::string_view> names) {
    for (auto n : names)
        for (std::size_t k = 0; k < header.size(); ++k)
            if (lower(header[k]) == n) return k;
    return std::nullopt;
}

}  // namespace detail

/// Reads a spectrum CSV with a header row. Recognized columns: frequency
/// (frequency_hz, frequency, freq_hz, f_hz), complex pair (s21_re/s21_im or
/// re/im), magnitude (s21_mag, mag, magnitude) or dB (s21_db, db), and an
/// optional per-point sigma. A complex pair wins over magnitude columns.
inline FitData parse_spectrum_csv(std::string_view text, const std::string& source = "<csv>") {
    std::vector<std::pair<std::size_t, std::string>> lines;
    std::size_t lineno = 0, pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string line(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first != std::string::npos && line[first] != '#') lines.emplace_back(lineno, line);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    auto fail = [&](std::size_t line, const std::string& msg) -> IoError {
        return IoError(source + ":" + std::to_string(line) + ": " + msg);
    };
    if (lines.empty()) throw IoError(source + ": empty spectrum file");

    const auto header = detail::split_csv_line(lines[0].second);
    if (parse_double(header[0])) throw fail(lines[0].first, "missing header row");
    const auto fcol = detail::find_column(header, {"frequency_hz", "frequency", "freq_hz", "f_hz", "freq"});
    if (!fcol) throw fail(lines[0].first, "no frequency column in header");
    const auto re = detail::find_column(header, {"s21_re", "re", "real"});
    const auto im = detail::find_column(header, {"s21_im", "im", "imag"});
    const auto mag = detail::find_column(header, {"s21_mag", "mag", "magnitude", "abs"});
    const auto db = detail::find_column(header, {"s21_db", "db"});
    const auto sig = detail::find_column(header, {"sigma", "s21_sigma"});
    const bool complex = re && im;
    if (!complex && !mag && !db) throw fail(lines[0].first, "no S21 columns (need re/im pair, magnitude or dB)");

    FitData d;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto& [ln, line] = lines[r];
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw fail(ln, "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()));
        auto num = [&](std::size_t col) {
            const auto v = parse_double(cells[col]);
            if (!v || !std::isfinite(*v)) throw fail(ln, "column '" + header[col] + "': not a finite number: '" + cells[col] + "'");
            return *v;
        };
        const double f = num(*fcol);
        if (!d.frequency_hz.empty()) {
            if (f == d.frequency_hz.back()) throw fail(ln, "duplicate frequency " + cells[*fcol]);
            if (f < d.frequency_hz.back()) throw fail(ln, "frequencies are not sorted ascending");
        }
        d.frequency_hz.push_back(f);
        if (complex) d.s21.emplace_back(num(*re), num(*im));
        else if (mag) d.magnitude.push_back(num(*mag));
        else d.magnitude.push_back(std::pow(10.0, num(*db) / 20.0));
        if (sig) d.sigma.push_back(num(*sig));
    }
    if (d.frequency_hz.empty()) throw IoError(source + ": no data rows");
    return d;
}

inline FitData ingest_spectrum(const std::string& path) { return parse_spectrum_csv(read_text_file(path), path); }

// ---------------------------------------------------------------------------
// JSON configuration
//
// {
//   "waveguide": {"speed_mps": 3.26e7},
//   "emitters": [{"name": "inner", "f_res_hz": 4.35e9, "beta_hz": 1.58e6,
//                 "points": [{"position_m": 0.0414, "kappa_hz": 0.76e6}, ...]}],
//   "probe": {"f_start_hz": 4.3e9, "f_stop_hz": 4.4e9, "n_points": 2001},
//   "nested_fitform": {...NestedFitParams field names...},
//   "anisotropy": {"bias_tesla": ..., "anisotropy_tesla": ..., ...},
//   "fit": {"model": "single", "objective": "linear",
//           "free": [{"name": "kappa_hz", "initial": 1e6, "lower": 0, "upper": 1e7}]}
// }

inline json parse_json(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(source + ": invalid JSON: " + e.what());
    }
}

inline json load_config(const std::string& path) { return parse_json(read_text_file(path), path); }

inline const json& at_pointer(const json& doc, const std::string& pointer) {
    const json::json_pointer ptr(pointer);
    if (!doc.contains(ptr)) throw ConfigError("config " + pointer + ": missing");
    return doc.at(ptr);
}

inline double number_at(const json& doc, const std::string& pointer) {
    const auto& v = at_pointer(doc, pointer);
    if (!v.is_number()) throw ConfigError("config " + pointer + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError("config " + pointer + ": must be finite");
    return d;
}

inline double number_or(const json& doc, const std::string& pointer, double fallback) {
    return doc.contains(json::json_pointer(pointer)) ? number_at(doc, pointer) : fallback;
}

inline std::string string_at(const json& doc, const std::string& pointer) {
    const auto& v = at_pointer(doc, pointer);
    if (!v.is_string()) throw ConfigError("config " + pointer + ": expected a string");
    return v.get<std::string>();
}

// Re-throws a validation failure with the pointer of the object it came from.
template <class Fn>
auto at_path(const std::string& pointer, Fn fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        if (msg.rfind("config ", 0) == 0) throw;
        throw ConfigError("config " + pointer + ": " + msg);
    }
}

/// Applies "dotted.key=value" overrides. Array indices are numeric segments;
/// values take the unit implied by the key suffix (e.g. f_res_hz=4.36GHz).
inline void apply_overrides(json& doc, const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' must look like key=value");
        const std::string key = o.substr(0, eq);
        std::string pointer;
        std::string last;
        std::size_t start = 0;
        while (true) {
            const auto dot = key.find('.', start);
            last = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
            if (last.empty()) throw ConfigError("override '" + o + "': empty key segment");
            pointer += "/" + last;
            if (dot == std::string::npos) break;
            start = dot + 1;
        }
        const std::string value = o.substr(eq + 1);
        const auto q = quantity_for_key(last);
        json v;
        if (q == Quantity::plain) {
            const auto d = parse_double(value);
            if (d) v = *d;
            else if (value == "true" || value == "false") v = value == "true";
            else v = value;
        } else {
            try {
                v = parse_quantity(value, q);
            } catch (const ConfigError& e) {
                throw ConfigError("override '" + o + "': " + e.what());
            }
        }
        try {
            doc[json::json_pointer(pointer)] = v;
        } catch (const json::exception& e) {
            throw ConfigError("override '" + o + "': " + e.what());
        }
    }
}

inline Waveguide waveguide_from_config(const json& doc) {
    return at_path("/waveguide", [&] { return Waveguide(number_at(doc, "/waveguide/speed_mps")); });
}

inline FrequencyGrid probe_from_config(const json& doc) {
    const double n = number_at(doc, "/probe/n_points");
    if (n < 2.0 || std::floor(n) != n) throw ConfigError("config /probe/n_points: must be an integer >= 2");
    return at_path("/probe", [&] {
        return FrequencyGrid(number_at(doc, "/probe/f_start_hz"), number_at(doc, "/probe/f_stop_hz"),
                             static_cast<std::size_t>(n));
    });
}

inline Topology topology_from_config(const json& doc) {
    const auto& arr = at_pointer(doc, "/emitters");
    if (!arr.is_array() || arr.empty()) throw ConfigError("config /emitters: expected a non-empty array");
    std::vector<Emitter> emitters;
    for (std::size_t e = 0; e < arr.size(); ++e) {
        const std::string base = "/emitters/" + std::to_string(e);
        const auto& pts = at_pointer(doc, base + "/points");
        if (!pts.is_array()) throw ConfigError("config " + base + "/points: expected an array");
        std::vector<CouplingPoint> points;
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const std::string pb = base + "/points/" + std::to_string(k);
            points.push_back({number_at(doc, pb + "/position_m"), number_at(doc, pb + "/kappa_hz")});
        }
        const std::string name = doc.contains(json::json_pointer(base + "/name")) ? string_at(doc, base + "/name")
                                                                                 : "emitter" + std::to_string(e);
        emitters.push_back(at_path(base, [&] {
            return Emitter(name, number_at(doc, base + "/f_res_hz"), number_or(doc, base + "/beta_hz", 0.0), points);
        }));
    }
    return Topology(std::move(emitters));
}

/// First emitter as a symmetric two-point emitter.
inline SingleGseParams single_from_config(const json& doc) {
    const auto t = topology_from_config(doc);
    const auto& e = t[0];
    if (e.point_count() != 2 || e.points()[0].kappa_hz != e.points()[1].kappa_hz)
        throw ConfigError("config /emitters/0: single-emitter model needs two points with equal kappa_hz");
    SingleGseParams p{e.points()[0].kappa_hz, e.beta(), e.span(), e.f_res(), waveguide_from_config(doc)};
    at_path("/emitters/0", [&] { p.validate(); return 0; });
    return p;
}

inline NestedFitParams nested_fitform_from_config(const json& doc) {
    const std::string b = "/nested_fitform";
    NestedFitParams p;
    p.f_inner_hz = number_at(doc, b + "/f_inner_hz");
    p.f_outer_hz = number_at(doc, b + "/f_outer_hz");
    p.kappa_inner_giant_hz = number_at(doc, b + "/kappa_inner_giant_hz");
    p.kappa_outer_giant_hz = number_at(doc, b + "/kappa_outer_giant_hz");
    p.beta_inner_hz = number_at(doc, b + "/beta_inner_hz");
    p.beta_outer_hz = number_at(doc, b + "/beta_outer_hz");
    p.j_hz = number_at(doc, b + "/j_hz");
    p.gamma_hz = number_at(doc, b + "/gamma_hz");
    at_path(b, [&] { p.validate(); return 0; });
    return p;
}

inline AnisotropyParams anisotropy_from_config(const json& doc) {
    const std::string b = "/anisotropy";
    AnisotropyParams p;
    p.bias_tesla = number_at(doc, b + "/bias_tesla");
    p.anisotropy_tesla = number_at(doc, b + "/anisotropy_tesla");
    p.gyromagnetic_hz_per_tesla = number_or(doc, b + "/gyromagnetic_hz_per_tesla", p.gyromagnetic_hz_per_tesla);
    p.azimuth_rad = number_or(doc, b + "/azimuth_rad", p.azimuth_rad);
    p.magnetization_a_per_m = number_or(doc, b + "/magnetization_a_per_m", p.magnetization_a_per_m);
    at_path(b, [&] { p.validate(); return 0; });
    return p;
}

inline FitModel fit_model_from_string(const std::string& s, const std::string& pointer) {
    if (s == "single") return FitModel::single;
    if (s == "lorentzian") return FitModel::lorentzian;
    if (s == "nested_fitform") return FitModel::nested_fitform;
    throw ConfigError("config " + pointer + ": unknown model '" + s + "' (single, lorentzian, nested_fitform)");
}

struct FitSection {
    FitModel model = FitModel::single;
    MagnitudeObjective objective = MagnitudeObjective::linear;
    std::vector<ParamSpec> free;
    std::vector<bool> has_initial;  ///< false where the initial value is to be guessed
};

inline FitSection fit_section_from_config(const json& doc) {
    FitSection s;
    s.model = fit_model_from_string(string_at(doc, "/fit/model"), "/fit/model");
    if (doc.contains(json::json_pointer("/fit/objective"))) {
        const auto o = string_at(doc, "/fit/objective");
        if (o == "db") s.objective = MagnitudeObjective::db;
        else if (o != "linear") throw ConfigError("config /fit/objective: expected 'linear' or 'db'");
    }
    const auto& arr = at_pointer(doc, "/fit/free");
    if (!arr.is_array() || arr.empty()) throw ConfigError("config /fit/free: expected a non-empty array");
    for (std::size_t k = 0; k < arr.size(); ++k) {
        const std::string b = "/fit/free/" + std::to_string(k);
        ParamSpec p;
        p.name = string_at(doc, b + "/name");
        const bool has = doc.contains(json::json_pointer(b + "/initial"));
        if (has) p.initial = number_at(doc, b + "/initial");
        if (doc.contains(json::json_pointer(b + "/lower"))) p.lower = number_at(doc, b + "/lower");
        if (doc.contains(json::json_pointer(b + "/upper"))) p.upper = number_at(doc, b + "/upper");
        p.scale = number_or(doc, b + "/scale", 0.0);
        at_path(b, [&] { gse::detail::param_info(s.model, p.name); return 0; });
        s.free.push_back(p);
        s.has_initial.push_back(has);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Reports and synthetic data

inline json fit_report(const FitResult& r) {
    json params = json::object(), sigmas = json::object();
    for (std::size_t k = 0; k < r.names.size(); ++k) {
        params[r.names[k]] = r.values[k];
        sigmas[r.names[k]] = std::isfinite(r.sigmas[k]) ? json(r.sigmas[k]) : json(nullptr);
    }
    json j = {{"params", params},
              {"sigmas", sigmas},
              {"residual_norm", r.residual_norm},
              {"converged", r.converged},
              {"n_iter", r.n_iter}};
    if (!r.warnings.empty()) j["warnings"] = r.warnings;
    if (!r.dataset_residual_norms.empty()) j["dataset_residual_norms"] = r.dataset_residual_norms;
    j["method"] = r.method;
    return j;
}

/// Model spectrum plus i.i.d. circular complex Gaussian noise with
/// E|n|^2 = sigma^2, reproducible from `seed`.
inline Spectrum add_noise(Spectrum s, double sigma, std::uint64_t seed) {
    require_finite(sigma, "noise sigma");
    require(sigma >= 0.0, "noise sigma must be >= 0");
    if (sigma == 0.0) return s;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, sigma / std::sqrt(2.0));
    for (auto& z : s.s21) {
        const double re = n(rng);
        const double im = n(rng);
        z += cplx(re, im);
    }
    return s;
}

}  // namespace gse::io
