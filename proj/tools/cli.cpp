#include "cli.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "gse/gse.hpp"

namespace gse::cli {

namespace {

using io::json;

constexpr const char* tool_version = "1.0.0";

/// Everything a command produces, held in memory until the run succeeds.
struct Artifacts {
    std::vector<std::pair<std::string, std::string>> files;  // path, content
    std::vector<std::pair<std::string, std::string>> inputs; // path, content
    std::vector<std::string> warnings;

    void add(const std::string& path, std::string content) { files.emplace_back(path, std::move(content)); }
    void input(const std::string& path, std::string content) { inputs.emplace_back(path, std::move(content)); }
};

struct Context {
    const RunConfig& cfg;
    std::ostream& log;
    json doc;
    std::size_t threads;
    Artifacts out;
    int status = exit_ok;  ///< outputs are still written when a check fails
};

// ---------------------------------------------------------------------------
// Option decoding

PhaseReference phase_reference(const std::string& s) {
    if (s == "resonance") return PhaseReference::resonance;
    if (s == "probe") return PhaseReference::probe;
    throw ConfigError("--phase-reference must be 'resonance' or 'probe'");
}

ShiftConvention shift_convention(const std::string& s, ShiftConvention fallback) {
    if (s.empty()) return fallback;
    if (s == "heisenberg") return ShiftConvention::heisenberg;
    if (s == "complex_frequency") return ShiftConvention::complex_frequency;
    throw ConfigError("--shift must be 'heisenberg' or 'complex_frequency'");
}

bool use_fitform(const Context& c) {
    const auto& m = c.cfg.model;
    if (m == "fitform") return true;
    if (m == "matrix") return false;
    if (m == "auto") return c.doc.contains("nested_fitform");
    throw ConfigError("--model must be 'matrix', 'fitform' or 'auto'");
}

NestedOptions nested_options(const Context& c) {
    NestedOptions o;
    if (c.cfg.nested_mode == "probe") o.mode = NestedPhaseMode::probe;
    else if (c.cfg.nested_mode != "printed") throw ConfigError("--mode must be 'printed' or 'probe'");
    o.shift = shift_convention(c.cfg.shift, ShiftConvention::complex_frequency);
    return o;
}

void require_output(const RunConfig& cfg) {
    if (cfg.output_path.empty()) throw ConfigError("--output is required");
}

io::Range range_or(const RunConfig& cfg, const std::string& fallback, io::Quantity q) {
    return io::parse_range(cfg.range.empty() ? fallback : cfg.range, q);
}

// ---------------------------------------------------------------------------
// Commands

void simulate_single(Context& c) {
    const auto p = io::single_from_config(c.doc);
    const auto grid = io::probe_from_config(c.doc);
    const auto s = s21_single(p, grid, phase_reference(c.cfg.phase_reference));
    c.out.add(c.cfg.output_path, io::spectrum_csv(s));
    if (!c.cfg.reflection_path.empty())
        c.out.add(c.cfg.reflection_path, io::reflection_csv(s.frequency_hz, reflection_single(s)));
}

void simulate_nested(Context& c) {
    const auto grid = io::probe_from_config(c.doc);
    if (use_fitform(c)) {
        if (!c.cfg.reflection_path.empty()) throw ConfigError("--reflection needs the matrix model");
        c.out.add(c.cfg.output_path, io::spectrum_csv(s21_nested_fitform(io::nested_fitform_from_config(c.doc), grid)));
        return;
    }
    const auto t = io::topology_from_config(c.doc);
    const auto np = nested_from_topology(t, io::waveguide_from_config(c.doc));
    const auto f = grid.points();
    const auto s = scatter_nested_matrix(np, f, nested_options(c));
    if (!s.s21.singular_points.empty())
        c.out.warnings.push_back(std::to_string(s.s21.singular_points.size()) + " singular probe points set to S21 = 1");
    c.out.add(c.cfg.output_path, io::spectrum_csv(s.s21));
    if (!c.cfg.reflection_path.empty()) c.out.add(c.cfg.reflection_path, io::reflection_csv(f, s.reflection));
}

void simulate_general(Context& c) {
    const auto t = io::topology_from_config(c.doc);
    const auto wg = io::waveguide_from_config(c.doc);
    const auto grid = io::probe_from_config(c.doc);
    EngineOptions opt;
    if (c.cfg.engine_reference == "probe") opt.reference = EngineReference::probe;
    else if (c.cfg.engine_reference != "resonance") throw ConfigError("--reference must be 'resonance' or 'probe'");
    opt.shift = shift_convention(c.cfg.shift, ShiftConvention::heisenberg);
    try {
        c.log << "topology: " << to_string(classify_topology(t)) << '\n';
    } catch (const ConfigError&) {
        c.log << "topology: general (co-located coupling points)\n";
    }
    for (auto& w : build_effective(t, wg, opt.shift).warnings) c.out.warnings.push_back(w);
    const auto f = grid.points();
    const auto s = s_matrix(t, wg, f, opt);
    if (!s.s21.singular_points.empty())
        c.out.warnings.push_back(std::to_string(s.s21.singular_points.size()) + " singular probe points set to S21 = 1");
    c.out.add(c.cfg.output_path, io::spectrum_csv(s.s21));
    if (!c.cfg.reflection_path.empty()) c.out.add(c.cfg.reflection_path, io::reflection_csv(f, s.reflection));
}

void map_command(Context& c) {
    const auto grid = io::probe_from_config(c.doc);
    SweepMap map;
    if (c.cfg.sweep == "field") {
        const auto p = io::single_from_config(c.doc);
        const auto fields = io::parse_range(c.cfg.range, io::Quantity::field).values();
        const double ha = io::parse_quantity(c.cfg.anisotropy_field, io::Quantity::field);
        map = map_single_vs_field(p, fields, ha, grid, phase_reference(c.cfg.phase_reference), c.threads);
    } else if (c.cfg.sweep == "detuning") {
        const auto outer = io::parse_range(c.cfg.range, io::Quantity::frequency).values();
        if (use_fitform(c)) {
            const auto p = io::nested_fitform_from_config(c.doc);
            map = map_nested_vs_detuning(p, outer, grid, c.threads);
            if (!c.cfg.eigen_path.empty()) c.out.add(c.cfg.eigen_path, io::eigen_csv(eigen_traces(p, outer)));
        } else {
            if (!c.cfg.eigen_path.empty()) throw ConfigError("--eigen needs the fit-form model");
            const auto np = nested_from_topology(io::topology_from_config(c.doc), io::waveguide_from_config(c.doc));
            map = map_nested_vs_detuning(np, outer, grid, nested_options(c), c.threads);
        }
    } else if (c.cfg.sweep == "angle") {
        const auto p = io::single_from_config(c.doc);
        const auto a = io::anisotropy_from_config(c.doc);
        if (!a.weak_anisotropy()) c.out.warnings.push_back("|H_A|/H_e0 exceeds 0.1; the first-order angle law is approximate");
        const auto thetas = io::parse_range(c.cfg.range, io::Quantity::angle).values();
        const auto law = c.cfg.law == "full" ? AnisotropyLaw::full : AnisotropyLaw::simple;
        const auto f_res = angle_sweep(a, thetas, law);
        const auto f = grid.points();
        const auto ref = phase_reference(c.cfg.phase_reference);
        map.sweep_values = thetas;
        map.columns = parallel_map(thetas.size(), c.threads, [&](std::size_t i) {
            auto q = p;
            q.f_res_hz = f_res[i];
            return s21_single(q, std::span<const double>(f), ref);
        });
    } else {
        throw ConfigError("--sweep must be 'field', 'detuning' or 'angle'");
    }
    c.out.add(c.cfg.output_path, io::map_csv(map));
}

FitResult run_fit(Context& c, const FitData& data) {
    const auto sec = io::fit_section_from_config(c.doc);
    FitProblem pr;
    pr.data = data;
    pr.model = sec.model;
    pr.free = sec.free;
    pr.magnitude_objective = sec.objective;
    pr.reference = phase_reference(c.cfg.phase_reference);

    const bool needs_guess = std::find(sec.has_initial.begin(), sec.has_initial.end(), false) != sec.has_initial.end();
    std::optional<SingleGuess> guess;
    if (sec.model == FitModel::single) {
        pr.single = io::single_from_config(c.doc);
        if (needs_guess) guess = initial_guess_single(data, pr.single);
    } else if (sec.model == FitModel::lorentzian) {
        SingleGseParams geometry{1.0, 0.0, 1.0, 1.0, Waveguide(1.0)};
        guess = initial_guess_single(data, geometry);
        pr.lorentzian = guess->lorentzian;
    } else {
        pr.nested = io::nested_fitform_from_config(c.doc);
        if (needs_guess) throw ConfigError("config /fit/free: nested fits need explicit initial values");
    }
    for (std::size_t k = 0; k < pr.free.size(); ++k) {
        if (sec.has_initial[k]) continue;
        auto& s = pr.free[k];
        const auto& g = *guess;
        if (s.name == "kappa_hz") s.initial = g.single.kappa_hz;
        else if (s.name == "beta_hz") s.initial = sec.model == FitModel::single ? g.single.beta_hz : g.lorentzian.beta_hz;
        else if (s.name == "f_res_hz") s.initial = g.single.f_res_hz;
        else if (s.name == "kappa_giant_hz") s.initial = g.lorentzian.kappa_giant_hz;
        else if (s.name == "f_center_hz") s.initial = g.lorentzian.f_center_hz;
        else if (s.name == "length_m") s.initial = pr.single.length_m;
        else s.initial = pr.single.waveguide.speed();
        c.log << "initial " << s.name << " = " << io::format_double(s.initial) << " (guessed)\n";
    }
    return fit(pr);
}

void fit_command(Context& c) {
    if (c.cfg.data_path.empty()) throw ConfigError("--data is required");
    const auto text = io::read_text_file(c.cfg.data_path);
    c.out.input(c.cfg.data_path, text);
    const auto r = run_fit(c, io::parse_spectrum_csv(text, c.cfg.data_path));
    for (const auto& w : r.warnings) c.out.warnings.push_back(w);
    c.out.add(c.cfg.output_path, io::fit_report(r).dump(2) + "\n");
    if (!r.converged) c.status = exit_numeric;
}

void fit_geometry(Context& c) {
    const auto sec = io::fit_section_from_config(c.doc);
    if (sec.model != FitModel::single) throw ConfigError("config /fit/model: geometry fits use the 'single' model");
    GeometryProblem gp;
    gp.base = io::single_from_config(c.doc);
    gp.free = sec.free;
    gp.magnitude_objective = sec.objective;
    gp.reference = phase_reference(c.cfg.phase_reference);
    for (std::size_t k = 0; k < gp.free.size(); ++k) {
        if (sec.has_initial[k]) continue;
        auto& s = gp.free[k];
        if (s.name == "kappa_hz") s.initial = gp.base.kappa_hz;
        else if (s.name == "beta_hz") s.initial = gp.base.beta_hz;
        else if (s.name == "length_m") s.initial = gp.base.length_m;
        else s.initial = gp.base.waveguide.speed();
    }
    for (const auto& spec : c.cfg.datasets) {
        const auto at = spec.rfind('@');
        if (at == std::string::npos || at == 0) throw ConfigError("--dataset '" + spec + "' must look like path@frequency");
        const std::string path = spec.substr(0, at);
        const double f = io::parse_quantity(spec.substr(at + 1), io::Quantity::frequency);
        const auto text = io::read_text_file(path);
        c.out.input(path, text);
        gp.datasets.push_back({io::parse_spectrum_csv(text, path), f});
    }
    const auto r = fit_global_geometry(gp);
    for (const auto& w : r.warnings) c.out.warnings.push_back(w);
    c.out.add(c.cfg.output_path, io::fit_report(r).dump(2) + "\n");
    if (!r.converged) c.status = exit_numeric;
}

void anisotropy_command(Context& c) {
    const auto a = io::anisotropy_from_config(c.doc);
    if (!a.weak_anisotropy()) c.out.warnings.push_back("|H_A|/H_e0 exceeds 0.1; the first-order angle law is approximate");
    AnisotropyLaw law;
    if (c.cfg.law == "simple") law = AnisotropyLaw::simple;
    else if (c.cfg.law == "full") law = AnisotropyLaw::full;
    else throw ConfigError("--law must be 'simple' or 'full'");
    const auto thetas = range_or(c.cfg, "0deg:360deg:361", io::Quantity::angle).values();
    const auto f = angle_sweep(a, thetas, law);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < thetas.size(); ++i) rows.push_back({thetas[i], f[i]});
    c.out.add(c.cfg.output_path, io::csv_table({"theta_rad", "frequency_hz"}, rows));
}

void pv_check(Context& c) {
    Branch b;
    if (c.cfg.branch == "plus" || c.cfg.branch == "+") b = Branch::plus;
    else if (c.cfg.branch == "minus" || c.cfg.branch == "-") b = Branch::minus;
    else throw ConfigError("--branch must be 'plus' or 'minus'");
    const auto xs = io::parse_range(c.cfg.x_range, io::Quantity::plain).values();
    struct Row {
        PvResult closed, quad;
    };
    const auto rows = parallel_map(xs.size(), c.threads, [&](std::size_t i) {
        return Row{pv_closed(xs[i], b), pv_quadrature(xs[i], b)};
    });
    std::vector<std::vector<double>> table;
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto& r = rows[i];
        const double ea = std::abs(r.closed.a - r.quad.a), eb = std::abs(r.closed.b - r.quad.b);
        worst = std::max({worst, ea, eb});
        table.push_back({xs[i], r.closed.a, r.quad.a, r.closed.b, r.quad.b, ea, eb});
    }
    c.out.add(c.cfg.output_path,
              io::csv_table({"x", "a_closed", "a_quad", "b_closed", "b_quad", "abs_err_a", "abs_err_b"}, table));
    c.log << "pv-check: max abs error " << io::format_double(worst) << '\n';
    if (worst > c.cfg.tolerance) {
        c.status = exit_numeric;
        c.out.warnings.push_back("pv-check: max abs error " + io::format_double(worst) + " exceeds tolerance " +
                                 io::format_double(c.cfg.tolerance));
    }
}

void synth(Context& c) {
    const auto grid = io::probe_from_config(c.doc);
    Spectrum s;
    if (c.cfg.model == "fitform") s = s21_nested_fitform(io::nested_fitform_from_config(c.doc), grid);
    else if (c.cfg.model == "single" || c.cfg.model == "auto")
        s = s21_single(io::single_from_config(c.doc), grid, phase_reference(c.cfg.phase_reference));
    else throw ConfigError("synth --model must be 'single' or 'fitform'");
    c.out.add(c.cfg.output_path, io::spectrum_csv(io::add_noise(std::move(s), c.cfg.noise_sigma, c.cfg.seed)));
}

const std::map<std::string, std::function<void(Context&)>, std::less<>>& commands() {
    static const std::map<std::string, std::function<void(Context&)>, std::less<>> table{
        {"simulate-single", simulate_single}, {"simulate-nested", simulate_nested},
        {"simulate-general", simulate_general}, {"map", map_command},
        {"fit", fit_command},                 {"fit-geometry", fit_geometry},
        {"anisotropy", anisotropy_command},   {"pv-check", pv_check},
        {"synth", synth}};
    return table;
}

bool needs_config(const std::string& command) { return command != "pv-check"; }

// ---------------------------------------------------------------------------
// Manifest

json settings(const RunConfig& cfg) {
    json j = {{"command", cfg.command}, {"config", cfg.config_path}, {"overrides", cfg.overrides},
              {"seed", cfg.seed},       {"output", cfg.output_path}};
    auto put = [&](const char* key, const std::string& v) {
        if (!v.empty()) j[key] = v;
    };
    if (cfg.command == "simulate-single" || cfg.command == "map" || cfg.command == "synth" ||
        cfg.command == "fit" || cfg.command == "fit-geometry")
        put("phase_reference", cfg.phase_reference);
    if (cfg.command == "simulate-nested" || cfg.command == "map" || cfg.command == "synth") {
        put("model", cfg.model);
        put("mode", cfg.nested_mode);
    }
    if (cfg.command == "simulate-general") put("reference", cfg.engine_reference);
    put("shift", cfg.shift);
    put("reflection", cfg.reflection_path);
    put("eigen", cfg.eigen_path);
    put("sweep", cfg.sweep);
    put("range", cfg.range);
    if (cfg.command == "map" && cfg.sweep == "field") put("anisotropy_field", cfg.anisotropy_field);
    if (cfg.command == "anisotropy" || cfg.command == "map") put("law", cfg.law);
    put("data", cfg.data_path);
    if (!cfg.datasets.empty()) j["datasets"] = cfg.datasets;
    if (cfg.command == "pv-check") {
        j["x"] = cfg.x_range;
        j["branch"] = cfg.branch;
        j["tolerance"] = cfg.tolerance;
    }
    if (cfg.command == "synth") j["noise_sigma"] = cfg.noise_sigma;
    return j;
}

std::string manifest(const RunConfig& cfg, const Artifacts& a) {
    json inputs = json::array(), outputs = json::array();
    for (const auto& [path, content] : a.inputs)
        inputs.push_back({{"path", path}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
    for (const auto& [path, content] : a.files)
        outputs.push_back({{"path", path}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
    json m = {{"tool", "gse"},
              {"version", tool_version},
              {"libraries",
               {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION)},
                {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
              {"settings", settings(cfg)},
              {"inputs", inputs},
              {"outputs", outputs},
              {"warnings", a.warnings}};
    return m.dump(2) + "\n";
}

void write_all(const RunConfig& cfg, const Artifacts& a) {
    std::vector<std::string> written;
    try {
        for (const auto& [path, content] : a.files) {
            io::write_text_file(path, content);
            written.push_back(path);
        }
        const std::string mpath = cfg.output_path + ".manifest.json";
        io::write_text_file(mpath, manifest(cfg, a));
    } catch (...) {
        std::error_code ec;
        for (const auto& p : written) std::filesystem::remove(p, ec);
        throw;
    }
}

}  // namespace

// ---------------------------------------------------------------------------

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw IoError("SHA-256 computation failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return os.str();
}

int run(const RunConfig& cfg, std::ostream& log) {
    try {
        const auto it = commands().find(cfg.command);
        if (it == commands().end()) throw ConfigError("unknown command '" + cfg.command + "'");
        require_output(cfg);
        Context c{cfg, log, json::object(), resolve_threads(cfg.threads), {}};
        if (needs_config(cfg.command)) {
            if (cfg.config_path.empty()) throw ConfigError("--config is required");
            const auto text = io::read_text_file(cfg.config_path);
            c.out.input(cfg.config_path, text);
            c.doc = io::parse_json(text, cfg.config_path);
        } else if (!cfg.config_path.empty()) {
            const auto text = io::read_text_file(cfg.config_path);
            c.out.input(cfg.config_path, text);
            c.doc = io::parse_json(text, cfg.config_path);
        }
        io::apply_overrides(c.doc, cfg.overrides);
        it->second(c);
        for (const auto& w : c.out.warnings) log << "warning: " << w << '\n';
        write_all(cfg, c.out);
        return c.status;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const NumericError& e) {
        log << "numeric error: " << e.what() << '\n';
        return exit_numeric;
    } catch (const IoError& e) {
        log << "i/o error: " << e.what() << '\n';
        return exit_io;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return exit_numeric;
    }
}

int parse_command_line(int argc, const char* const* argv, RunConfig& cfg, std::ostream& out, std::ostream& err) {
    CLI::App app{"Giant spin ensemble simulation and fitting"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);

    auto common = [&](CLI::App* sub, bool config_required) {
        auto* o = sub->add_option("-c,--config", cfg.config_path, "JSON device configuration");
        if (config_required) o->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--output", cfg.output_path, "primary output file")->required();
        sub->add_option("--set", cfg.overrides, "override a config value, e.g. emitters.0.f_res_hz=4.36GHz");
        sub->add_option("-j,--threads", cfg.threads, "worker threads (0 = automatic; GSE_THREADS overrides)");
        sub->add_option("--seed", cfg.seed, "seed for synthetic noise");
    };
    auto phase_ref = [&](CLI::App* sub) {
        sub->add_option("--phase-reference", cfg.phase_reference, "resonance | probe");
    };
    auto nested_opts = [&](CLI::App* sub) {
        sub->add_option("--model", cfg.model, "matrix | fitform | auto");
        sub->add_option("--mode", cfg.nested_mode, "printed | probe");
        sub->add_option("--shift", cfg.shift, "heisenberg | complex_frequency");
    };

    auto* s1 = app.add_subcommand("simulate-single", "two-point emitter spectrum");
    common(s1, true);
    phase_ref(s1);
    s1->add_option("--reflection", cfg.reflection_path, "also write the reflection CSV");

    auto* s2 = app.add_subcommand("simulate-nested", "nested two-emitter spectrum");
    common(s2, true);
    nested_opts(s2);
    s2->add_option("--reflection", cfg.reflection_path, "also write the reflection CSV (matrix model)");

    auto* s3 = app.add_subcommand("simulate-general", "arbitrary multipoint topology");
    common(s3, true);
    s3->add_option("--reference", cfg.engine_reference, "resonance | probe");
    s3->add_option("--shift", cfg.shift, "heisenberg | complex_frequency");
    s3->add_option("--reflection", cfg.reflection_path, "also write the reflection CSV");

    auto* mp = app.add_subcommand("map", "2-D transmission map");
    common(mp, true);
    phase_ref(mp);
    nested_opts(mp);
    mp->add_option("--sweep", cfg.sweep, "field | detuning | angle")->required();
    mp->add_option("--range", cfg.range, "start:stop:count with units, e.g. 4.34GHz:4.36GHz:201")->required();
    mp->add_option("--anisotropy-field", cfg.anisotropy_field, "field sweep offset H_A, e.g. 2mT");
    mp->add_option("--law", cfg.law, "angle sweep law: simple | full");
    mp->add_option("--eigen", cfg.eigen_path, "also write eigenvalue traces (detuning, fit form)");

    auto* ft = app.add_subcommand("fit", "fit one spectrum");
    common(ft, true);
    phase_ref(ft);
    ft->add_option("--data", cfg.data_path, "spectrum CSV")->required()->check(CLI::ExistingFile);

    auto* fg = app.add_subcommand("fit-geometry", "joint fit over several resonance frequencies");
    common(fg, true);
    phase_ref(fg);
    fg->add_option("--dataset", cfg.datasets, "path@f_res, e.g. run1.csv@4.35GHz")->required();

    auto* an = app.add_subcommand("anisotropy", "resonance versus crystal angle");
    common(an, true);
    an->add_option("--range", cfg.range, "angles start:stop:count, default 0deg:360deg:361");
    an->add_option("--law", cfg.law, "simple | full");

    auto* pv = app.add_subcommand("pv-check", "principal-value closed forms versus quadrature");
    common(pv, false);
    pv->add_option("--x", cfg.x_range, "a:b:n");
    pv->add_option("--branch", cfg.branch, "plus | minus");
    pv->add_option("--tolerance", cfg.tolerance, "maximum accepted absolute error");

    auto* sy = app.add_subcommand("synth", "model spectrum with complex Gaussian noise");
    common(sy, true);
    phase_ref(sy);
    sy->add_option("--model", cfg.model, "single | fitform");
    sy->add_option("--noise", cfg.noise_sigma, "noise standard deviation, E|n|^2 = sigma^2");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_config;
    }
    for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
    return -1;
}

}  // namespace gse::cli
