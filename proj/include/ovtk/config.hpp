#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ovtk/adjoint.hpp"
#include "ovtk/scenarios.hpp"

namespace ovtk {

/// Run settings shared by the CLI subcommands. Parsed from a plain-text
/// `key = value` file (# comments); unknown keys are rejected with the line
/// number. CLI flags override file values.
struct RunConfig {
    std::string scenario = "example1";  // example1 | example2
    std::uint64_t seed = 1;
    std::size_t n_paths = 1u << 14;
    double dt = 1.0 / 64.0;
    std::vector<double> horizons = {2, 4, 8, 16, 32};
    int basis_degree = 3;
    AdjointMethod solver = AdjointMethod::kAuto;
    unsigned threads = 1;
    std::string candidate = "builtin";        // builtin | const:<v>
    std::vector<std::string> challengers;     // empty => scenario defaults
    std::string out_dir = "ovtk-out";
    int needle_count = 2;
    double needle_width = 0.5;
    double needle_height_scale = 0.5;
    double tol_zero = 1e-9;
    double decay_ratio_max = 0.9;
    double blowup_guard = 1e12;
    std::size_t validation_budget = 2048;
    Example1Params ex1;
    Example2Params ex2;

    double t_end() const;  // largest horizon
};

RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

/// Apply a `key=value` override (same keys as the file). Throws InputError on
/// unknown keys or malformed values.
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

/// Validate cross-field constraints (horizon divisibility by dt, ranges).
void validate_config(const RunConfig& cfg);

/// Render the full effective config as canonical `key = value` lines.
std::string render_config(const RunConfig& cfg);

}  // namespace ovtk
