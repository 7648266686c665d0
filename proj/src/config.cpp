/// @file config.cpp
/// @brief Configuration parser and validation.

#include "tfd/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "tfd/errors.hpp"
#include "tfd/explicit_scheme.hpp"

namespace tfd {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config " + where + ": " + what);
}

bool parse_bool(const std::string& where, const std::string& text) {
    if (text == "true" || text == "on" || text == "yes" || text == "1") return true;
    if (text == "false" || text == "off" || text == "no" || text == "0") return false;
    fail(where, "expected a boolean, got '" + text + "'");
}

double parse_real(const std::string& where, const std::string& text) {
    try {
        return parse_config_number(text);
    } catch (const ConfigError& e) {
        fail(where, e.what());
    }
}

int parse_int(const std::string& where, const std::string& text) {
    const double v = parse_real(where, text);
    const double r = std::nearbyint(v);
    if (std::abs(v - r) > 1e-12 || std::abs(r) > 2e9)
        fail(where, "expected an integer, got '" + text + "'");
    return static_cast<int>(r);
}

}  // namespace

double parse_config_number(const std::string& text_in) {
    const std::string text = trim(text_in);
    if (text.empty()) throw ConfigError("empty number");
    const size_t slash = text.find('/');
    if (slash != std::string::npos) {
        const std::string num = trim(text.substr(0, slash));
        const std::string den = trim(text.substr(slash + 1));
        if (num.empty() || den.empty() || den.find('/') != std::string::npos)
            throw ConfigError("malformed fraction '" + text + "'");
        const double a = parse_config_number(num);
        const double b = parse_config_number(den);
        if (b == 0.0) throw ConfigError("zero denominator in '" + text + "'");
        return a / b;
    }
    size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError("malformed number '" + text + "'");
    }
    if (used != text.size()) throw ConfigError("trailing characters in number '" + text + "'");
    if (!std::isfinite(value)) throw ConfigError("non-finite number '" + text + "'");
    return value;
}

RunConfig parse_run_config(std::istream& in, const std::string& source_name) {
    RunConfig cfg;
    std::string section;
    std::set<std::string> seen;  // "section.key"
    std::string line;
    int line_no = 0;

    auto here = [&](const std::string& key) {
        return source_name + ":" + std::to_string(line_no) + " [" + section + "] " + key;
    };

    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                fail(source_name + ":" + std::to_string(line_no), "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            static const std::set<std::string> known{
                "domain", "scheme", "velocity", "initial", "solver",
                "levelset", "oracle", "output"};
            if (!known.count(section))
                fail(source_name + ":" + std::to_string(line_no),
                     "unknown section [" + section + "]");
            continue;
        }

        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail(source_name + ":" + std::to_string(line_no), "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(source_name + ":" + std::to_string(line_no), "empty key");
        if (value.empty()) fail(here(key), "empty value");
        if (section.empty())
            fail(source_name + ":" + std::to_string(line_no),
                 "key '" + key + "' appears before any [section]");
        if (!seen.insert(section + "." + key).second) fail(here(key), "duplicate key");

        const std::string& w = here(key);
        if (section == "domain") {
            if (key == "lo_x") cfg.box_lo.x = parse_real(w, value);
            else if (key == "lo_y") cfg.box_lo.y = parse_real(w, value);
            else if (key == "lo_z") cfg.box_lo.z = parse_real(w, value);
            else if (key == "hi_x") cfg.box_hi.x = parse_real(w, value);
            else if (key == "hi_y") cfg.box_hi.y = parse_real(w, value);
            else if (key == "hi_z") cfg.box_hi.z = parse_real(w, value);
            else if (key == "h") cfg.h = parse_real(w, value);
            else fail(w, "unknown key");
        } else if (section == "scheme") {
            if (key == "type") cfg.scheme = value;
            else if (key == "alpha") cfg.alpha = parse_real(w, value);
            else if (key == "beta") cfg.beta = parse_real(w, value);
            else if (key == "tau") cfg.tau = parse_real(w, value);
            else if (key == "truncation") cfg.truncation = parse_bool(w, value);
            else if (key == "t_final") cfg.t_final = parse_real(w, value);
            else if (key == "quad_space_order") cfg.quad_space_order = parse_int(w, value);
            else if (key == "quad_time_order") cfg.quad_time_order = parse_int(w, value);
            else if (key == "cfl_safety") cfg.cfl_safety = parse_real(w, value);
            else fail(w, "unknown key");
        } else if (section == "velocity") {
            if (key == "preset") cfg.velocity_preset = value;
            else if (key == "csv") cfg.velocity_csv = value;
            else cfg.velocity_params[key] = parse_real(w, value);
        } else if (section == "initial") {
            if (key == "preset") cfg.initial_preset = value;
            else cfg.initial_params[key] = parse_real(w, value);
        } else if (section == "solver") {
            if (key == "hhd_tolerance") cfg.hhd.rel_tol = parse_real(w, value);
            else if (key == "hhd_max_iterations") cfg.hhd.max_iterations = parse_int(w, value);
            else if (key == "gmres_tolerance") cfg.gmres.rel_tol = parse_real(w, value);
            else if (key == "gmres_restart") cfg.gmres.restart = parse_int(w, value);
            else if (key == "gmres_max_restarts") cfg.gmres.max_restarts = parse_int(w, value);
            else fail(w, "unknown key");
        } else if (section == "levelset") {
            if (key == "enabled") cfg.levelset_enabled = parse_bool(w, value);
            else if (key == "level") cfg.level = parse_real(w, value);
            else if (key == "refine") cfg.levelset_refine = parse_bool(w, value);
            else if (key == "orient_outward") cfg.levelset_outward = parse_bool(w, value);
            else fail(w, "unknown key");
        } else if (section == "oracle") {
            if (key == "enabled") cfg.oracle_enabled = parse_bool(w, value);
            else fail(w, "unknown key");
        } else if (section == "output") {
            if (key == "directory") cfg.output_dir = value;
            else if (key == "label") cfg.label = value;
            else if (key == "snapshot_every") cfg.snapshot_every = parse_int(w, value);
            else if (key == "write_vtk") cfg.write_vtk = parse_bool(w, value);
            else if (key == "write_csv") cfg.write_csv = parse_bool(w, value);
            else fail(w, "unknown key");
        }
    }
    validate_run_config(cfg);
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    return parse_run_config(in, path);
}

namespace {

/// Truncation-mode step: the canonical coupling h^(2 - alpha) capped by the
/// largest step the scaling gate tau * h^(-beta) / h <= 2/7 admits (the cap
/// binds at practical grid sizes, the canonical value in the limit h -> 0).
double truncation_time_step(double h, double alpha, double beta) {
    const double canonical = std::pow(h, 2.0 - alpha);
    const double gate_cap = (2.0 / 7.0) * h / std::pow(h, -beta);
    return std::min(canonical, gate_cap);
}

}  // namespace

void validate_run_config(const RunConfig& cfg) {
    if (!(cfg.h > 0.0)) throw ConfigError("config [domain] h: must be positive");
    for (int a = 0; a < 3; ++a)
        if (!(cfg.box_hi[a] - cfg.box_lo[a] >= 3.0 * cfg.h))
            throw ConfigError("config [domain]: each box extent needs at least three cells");
    derive_grid(cfg);  // validates integral extents and minimum node counts

    if (cfg.scheme != "explicit" && cfg.scheme != "implicit")
        throw ConfigError("config [scheme] type: must be 'explicit' or 'implicit', got '" +
                          cfg.scheme + "'");
    if (!(cfg.t_final > 0.0)) throw ConfigError("config [scheme] t_final: must be positive");
    if (cfg.tau < 0.0) throw ConfigError("config [scheme] tau: must be nonnegative");
    if (cfg.tau > 0.0 && cfg.tau > cfg.t_final)
        throw ConfigError("config [scheme] tau: exceeds the time horizon t_final");
    if (cfg.quad_space_order < 1 || cfg.quad_space_order > 5)
        throw ConfigError("config [scheme] quad_space_order: supported orders are 1..5");
    if (cfg.quad_time_order < 1 || cfg.quad_time_order > 5)
        throw ConfigError("config [scheme] quad_time_order: supported orders are 1..5");
    if (!(cfg.cfl_safety > 0.0) || cfg.cfl_safety > 1.0)
        throw ConfigError("config [scheme] cfl_safety: must lie in (0, 1]");

    if (cfg.scheme == "explicit" && cfg.truncation) {
        // Truncation mode constrains the exponent pair: the scheme couples
        // tau <= h^(2 - alpha) with the clamp threshold h^(-beta), and the
        // stencil weights stay nonnegative only under the scaling gate.
        if (!(cfg.alpha > 0.0))
            throw ConfigError("config [scheme] alpha: truncation mode needs alpha > 0, got " +
                              std::to_string(cfg.alpha));
        if (!(cfg.beta > 0.5))
            throw ConfigError(
                "config [scheme] beta: the truncation exponent must exceed 1/2 "
                "(threshold h^(-beta) must grow slower than the measure budget), got " +
                std::to_string(cfg.beta));
        if (!(cfg.alpha + cfg.beta < 1.0))
            throw ConfigError(
                "config [scheme]: truncation mode needs alpha + beta < 1 so the "
                "scaling gate tau * h^(-beta) / h <= 2/7 can hold under refinement, "
                "got alpha + beta = " + std::to_string(cfg.alpha + cfg.beta));
        SchemeParams probe{cfg.h, cfg.tau, cfg.alpha, cfg.beta, true};
        if (probe.tau <= 0.0) probe.tau = truncation_time_step(cfg.h, cfg.alpha, cfg.beta);
        const ScalingCheck check = check_scaling(probe);
        if (!check.ok())
            throw ConfigError("config [scheme]: " + check.describe());
    }
    if (cfg.scheme == "implicit") {
        if (!(cfg.hhd.rel_tol > 0.0))
            throw ConfigError("config [solver] hhd_tolerance: must be positive");
        if (!(cfg.gmres.rel_tol > 0.0))
            throw ConfigError("config [solver] gmres_tolerance: must be positive");
        if (cfg.gmres.restart < 1)
            throw ConfigError("config [solver] gmres_restart: must be at least 1");
        if (cfg.gmres.max_restarts < 1)
            throw ConfigError("config [solver] gmres_max_restarts: must be at least 1");
    }

    if (!cfg.velocity_csv.empty() && !cfg.velocity_params.empty())
        throw ConfigError("config [velocity]: csv input does not take preset parameters");
    if (!cfg.velocity_csv.empty() && cfg.velocity_preset != "zero")
        throw ConfigError("config [velocity]: give either a preset or a csv table, not both");
    if (cfg.snapshot_every < 0)
        throw ConfigError("config [output] snapshot_every: must be nonnegative");
    if (cfg.output_dir.empty()) throw ConfigError("config [output] directory: must be nonempty");
    if (cfg.label.empty()) throw ConfigError("config [output] label: must be nonempty");
    for (char c : cfg.label)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'))
            throw ConfigError("config [output] label: use letters, digits, '-' or '_'");
}

GridSpec derive_grid(const RunConfig& cfg) {
    Vec3i dims;
    for (int a = 0; a < 3; ++a) {
        const double extent = cfg.box_hi[a] - cfg.box_lo[a];
        if (!(extent > 0.0))
            throw ConfigError("config [domain]: box extents must be positive");
        const double cells = extent / cfg.h;
        const double rounded = std::nearbyint(cells);
        if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, rounded))
            throw ConfigError(
                "config [domain]: box extent along axis " + std::to_string(a) +
                " is not an integer multiple of h");
        dims[a] = static_cast<int>(rounded) + 1;
    }
    return GridSpec(cfg.h, cfg.box_lo, dims);
}

SchemeParams derive_scheme_params(const RunConfig& cfg, double sup_velocity) {
    SchemeParams params{cfg.h, cfg.tau, cfg.alpha, cfg.beta, cfg.truncation};
    const double canonical = std::pow(cfg.h, 2.0 - cfg.alpha);
    if (params.tau <= 0.0) {
        if (cfg.truncation) {
            params.tau = truncation_time_step(cfg.h, cfg.alpha, cfg.beta);
        } else if (!(sup_velocity > 0.0)) {
            params.tau = canonical;
        } else {
            // Largest step with every stencil weight nonnegative, shrunk by
            // the safety factor; never above the canonical coupling.
            const double weight_cap = cfg.cfl_safety * (2.0 / 7.0) * cfg.h / sup_velocity;
            params.tau = std::min(canonical, weight_cap);
        }
    }
    if (!(params.tau > 0.0))
        throw ConfigError("config [scheme] tau: derived step is not positive");
    return params;
}

VelocityField build_velocity(const RunConfig& cfg) {
    if (!cfg.velocity_csv.empty()) return load_velocity_csv(cfg.velocity_csv);
    return make_velocity_preset(cfg.velocity_preset, cfg.velocity_params);
}

InitialData build_initial(const RunConfig& cfg) {
    return make_initial_preset(cfg.initial_preset, cfg.initial_params);
}

}  // namespace tfd
