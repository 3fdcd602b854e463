#pragma once

// Command-line front end. Parsing and execution are split so tests can drive
// run() without a process boundary.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gse::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_numeric = 3;
inline constexpr int exit_io = 4;

struct RunConfig {
    std::string command;
    std::string config_path;
    std::vector<std::string> overrides;  ///< key=value, see io::apply_overrides
    std::string output_path;
    std::size_t threads = 0;  ///< 0 = automatic
    std::uint64_t seed = 0;

    // Command-specific options; unit-suffixed strings are parsed in run().
    std::string phase_reference = "resonance";  ///< simulate-single, map, synth: resonance | probe
    std::string model = "auto";                 ///< nested: matrix | fitform | auto; synth: single | fitform
    std::string nested_mode = "printed";        ///< printed | probe
    std::string shift;                          ///< heisenberg | complex_frequency; empty = model default
    std::string engine_reference = "resonance"; ///< simulate-general: resonance | probe
    std::string reflection_path;
    std::string eigen_path;
    std::string sweep;  ///< map: field | detuning | angle
    std::string range;  ///< start:stop:count with units
    std::string anisotropy_field = "0T";
    std::string law = "simple";  ///< anisotropy: simple | full
    std::string data_path;
    std::vector<std::string> datasets;  ///< fit-geometry: path@frequency
    std::string x_range = "0.5:50:100";
    std::string branch = "minus";  ///< plus | minus
    double tolerance = 1e-6;
    double noise_sigma = 0.0;
};

/// Executes one command. Diagnostics go to `log`; the return value is the
/// process exit code.
int run(const RunConfig& config, std::ostream& log);

/// Parses argv into `config`. Returns -1 to continue, otherwise an exit code
/// (help printed, or a usage error).
int parse_command_line(int argc, const char* const* argv, RunConfig& config, std::ostream& out, std::ostream& err);

/// SHA-256 of a byte string as lowercase hex.
std::string sha256_hex(const std::string& bytes);

}  // namespace gse::cli
