#include "ovtk/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "ovtk/errors.hpp"
#include "ovtk/fmt.hpp"

namespace ovtk {
namespace {

std::string trim(std::string s) {
    const auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && issp(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    while (!s.empty() && issp(static_cast<unsigned char>(s.back()))) s.pop_back();
    return s;
}

double parse_double_value(const std::string& key, const std::string& v) {
    double out = 0.0;
    const char* b = v.data();
    const char* e = b + v.size();
    auto [p, ec] = std::from_chars(b, e, out);
    if (ec != std::errc{} || p != e || !std::isfinite(out))
        throw InputError("config key '" + key + "': malformed number '" + v + "'");
    return out;
}

template <class Int>
Int parse_int_value(const std::string& key, const std::string& v) {
    Int out{};
    const char* b = v.data();
    const char* e = b + v.size();
    auto [p, ec] = std::from_chars(b, e, out);
    if (ec != std::errc{} || p != e)
        throw InputError("config key '" + key + "': malformed integer '" + v + "'");
    return out;
}

bool parse_bool_value(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw InputError("config key '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split_list(v)) out.push_back(parse_double_value(key, item));
    return out;
}

AdjointMethod parse_solver(const std::string& v) {
    if (v == "auto") return AdjointMethod::kAuto;
    if (v == "lsmc") return AdjointMethod::kLsmc;
    if (v == "explicit") return AdjointMethod::kExplicitTail;
    throw InputError("config key 'solver': expected auto, lsmc, or explicit; got '" + v + "'");
}

std::string solver_name(AdjointMethod m) {
    switch (m) {
        case AdjointMethod::kAuto: return "auto";
        case AdjointMethod::kLsmc: return "lsmc";
        case AdjointMethod::kExplicitTail: return "explicit";
    }
    return "auto";
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += items[i];
    }
    return out;
}

std::string join(const std::vector<double>& items) {
    std::vector<std::string> s;
    s.reserve(items.size());
    for (double v : items) s.push_back(format_double(v));
    return join(s);
}

}  // namespace

double RunConfig::t_end() const {
    if (horizons.empty()) throw InputError("config: horizons list is empty");
    return *std::max_element(horizons.begin(), horizons.end());
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "scenario") cfg.scenario = value;
    else if (key == "seed") cfg.seed = parse_int_value<std::uint64_t>(key, value);
    else if (key == "n_paths") cfg.n_paths = parse_int_value<std::size_t>(key, value);
    else if (key == "dt") cfg.dt = parse_double_value(key, value);
    else if (key == "horizons") cfg.horizons = parse_double_list(key, value);
    else if (key == "basis_degree") cfg.basis_degree = parse_int_value<int>(key, value);
    else if (key == "solver") cfg.solver = parse_solver(value);
    else if (key == "threads") cfg.threads = parse_int_value<unsigned>(key, value);
    else if (key == "candidate") cfg.candidate = value;
    else if (key == "challengers") cfg.challengers = split_list(value);
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "needle_count") cfg.needle_count = parse_int_value<int>(key, value);
    else if (key == "needle_width") cfg.needle_width = parse_double_value(key, value);
    else if (key == "needle_height_scale")
        cfg.needle_height_scale = parse_double_value(key, value);
    else if (key == "tol_zero") cfg.tol_zero = parse_double_value(key, value);
    else if (key == "decay_ratio_max") cfg.decay_ratio_max = parse_double_value(key, value);
    else if (key == "blowup_guard") cfg.blowup_guard = parse_double_value(key, value);
    else if (key == "validation_budget")
        cfg.validation_budget = parse_int_value<std::size_t>(key, value);
    else if (key == "ex1.rho") cfg.ex1.rho = parse_double_value(key, value);
    else if (key == "ex1.sigma") cfg.ex1.sigma = parse_double_value(key, value);
    else if (key == "ex2.r") cfg.ex2.r = parse_double_value(key, value);
    else if (key == "ex2.delta") cfg.ex2.delta = parse_double_value(key, value);
    else if (key == "ex2.sigma") cfg.ex2.sigma = parse_double_value(key, value);
    else if (key == "ex2.k0") cfg.ex2.k0 = parse_double_value(key, value);
    else if (key == "ex2.u_lo") cfg.ex2.u_lo = parse_double_value(key, value);
    else if (key == "ex2.u_hi") cfg.ex2.u_hi = parse_double_value(key, value);
    else if (key == "ex2.pi_constant") cfg.ex2.pi_constant = parse_bool_value(key, value);
    else if (key == "ex2.pi_bar") cfg.ex2.pi_bar = parse_double_value(key, value);
    else if (key == "ex2.ou.theta") cfg.ex2.ou.theta = parse_double_value(key, value);
    else if (key == "ex2.ou.mean") cfg.ex2.ou.mean = parse_double_value(key, value);
    else if (key == "ex2.ou.vol") cfg.ex2.ou.vol = parse_double_value(key, value);
    else if (key == "ex2.ou.max") cfg.ex2.ou.max = parse_double_value(key, value);
    else if (key == "ex2.q_fit_extra_over_rpd")
        cfg.ex2.q_fit_extra_over_rpd = parse_double_value(key, value);
    else
        throw InputError("unknown config key '" + key + "'");
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError(origin + ":" + std::to_string(line_no) +
                             ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw InputError(origin + ":" + std::to_string(line_no) + ": empty key");
        try {
            apply_override(cfg, key, value);
        } catch (const InputError& e) {
            throw InputError(origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

void validate_config(const RunConfig& cfg) {
    if (cfg.scenario != "example1" && cfg.scenario != "example2")
        throw InputError("config: unknown scenario '" + cfg.scenario +
                         "' (expected example1 or example2)");
    if (cfg.n_paths < 2) throw InputError("config: n_paths must be at least 2");
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt))
        throw InputError("config: dt must be finite and > 0");
    if (cfg.horizons.empty()) throw InputError("config: horizons list is empty");
    double prev = 0.0;
    for (double T : cfg.horizons) {
        if (!(T > prev))
            throw InputError("config: horizons must be positive and strictly ascending (offender " +
                             format_double(T) + ")");
        const double k = std::round(T / cfg.dt);
        if (k < 1.0 || std::abs(k * cfg.dt - T) > 1e-9 * std::max(1.0, T))
            throw InputError("config: horizon " + format_double(T) +
                             " is not an integer multiple of dt = " + format_double(cfg.dt));
        prev = T;
    }
    if (cfg.basis_degree < 0 || cfg.basis_degree > 12)
        throw InputError("config: basis_degree must lie in [0, 12]");
    if (cfg.needle_count < 0 || cfg.needle_count > 64)
        throw InputError("config: needle_count must lie in [0, 64]");
    if (!(cfg.needle_width > 0.0)) throw InputError("config: needle_width must be > 0");
    if (!(cfg.needle_height_scale > 0.0))
        throw InputError("config: needle_height_scale must be > 0");
    if (!(cfg.tol_zero >= 0.0)) throw InputError("config: tol_zero must be >= 0");
    if (!(cfg.decay_ratio_max > 0.0) || !(cfg.decay_ratio_max < 1.0))
        throw InputError("config: decay_ratio_max must lie in (0, 1)");
    if (!(cfg.blowup_guard > 0.0)) throw InputError("config: blowup_guard must be > 0");
    if (cfg.validation_budget < 16)
        throw InputError("config: validation_budget must be at least 16");
    if (!(cfg.ex1.sigma >= 0.0)) throw InputError("config: ex1.sigma must be >= 0");
}

std::string render_config(const RunConfig& cfg) {
    std::string out;
    const auto put = [&out](const std::string& key, const std::string& value) {
        out += key;
        out += " = ";
        out += value;
        out += "\n";
    };
    put("scenario", cfg.scenario);
    put("seed", std::to_string(cfg.seed));
    put("n_paths", std::to_string(cfg.n_paths));
    put("dt", format_double(cfg.dt));
    put("horizons", join(cfg.horizons));
    put("basis_degree", std::to_string(cfg.basis_degree));
    put("solver", solver_name(cfg.solver));
    put("threads", std::to_string(cfg.threads));
    put("candidate", cfg.candidate);
    put("challengers", join(cfg.challengers));
    put("out_dir", cfg.out_dir);
    put("needle_count", std::to_string(cfg.needle_count));
    put("needle_width", format_double(cfg.needle_width));
    put("needle_height_scale", format_double(cfg.needle_height_scale));
    put("tol_zero", format_double(cfg.tol_zero));
    put("decay_ratio_max", format_double(cfg.decay_ratio_max));
    put("blowup_guard", format_double(cfg.blowup_guard));
    put("validation_budget", std::to_string(cfg.validation_budget));
    put("ex1.rho", format_double(cfg.ex1.rho));
    put("ex1.sigma", format_double(cfg.ex1.sigma));
    put("ex2.r", format_double(cfg.ex2.r));
    put("ex2.delta", format_double(cfg.ex2.delta));
    put("ex2.sigma", format_double(cfg.ex2.sigma));
    put("ex2.k0", format_double(cfg.ex2.k0));
    put("ex2.u_lo", format_double(cfg.ex2.u_lo));
    put("ex2.u_hi", format_double(cfg.ex2.u_hi));
    put("ex2.pi_constant", cfg.ex2.pi_constant ? "true" : "false");
    put("ex2.pi_bar", format_double(cfg.ex2.pi_bar));
    put("ex2.ou.theta", format_double(cfg.ex2.ou.theta));
    put("ex2.ou.mean", format_double(cfg.ex2.ou.mean));
    put("ex2.ou.vol", format_double(cfg.ex2.ou.vol));
    put("ex2.ou.max", format_double(cfg.ex2.ou.max));
    put("ex2.q_fit_extra_over_rpd", format_double(cfg.ex2.q_fit_extra_over_rpd));
    return out;
}

}  // namespace ovtk
