/// @file tfd_main.cpp
/// @brief Command-line driver: run / study / validate-config / presets.
///
/// Exit codes: 0 success, 2 configuration error, 3 solver error, 4 numeric
/// degeneracy, 1 unexpected failure.  The only environment override honored
/// is TFD_OUTPUT_DIR (output directory); an explicit --output-dir flag wins
/// over it, the config file value is the fallback.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tfd/config.hpp"
#include "tfd/errors.hpp"
#include "tfd/io.hpp"
#include "tfd/presets.hpp"
#include "tfd/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUnexpected = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitNumeric = 4;

std::string resolve_output_dir(const std::string& flag_value, const std::string& config_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("TFD_OUTPUT_DIR"); env && *env) return env;
    return config_value;
}

void print_kv(const char* key, double v) {
    std::printf("%s = %s\n", key, tfd::format_real(v).c_str());
}

void print_run(const tfd::RunArtifacts& a) {
    print_kv("h", a.h);
    print_kv("tau", a.tau);
    std::printf("n_steps = %d\n", a.n_steps);
    print_kv("t_reached", a.t_reached);
    print_kv("final_sup", a.final_sup);
    print_kv("final_l2", a.final_l2);
    print_kv("final_mass", a.final_mass);
    print_kv("sup_err", a.errors.sup_err);
    print_kv("l2_err", a.errors.l2_err);
    print_kv("grad_err", a.errors.grad_err);
    print_kv("hess_err", a.errors.hess_err);
    print_kv("hausdorff", a.errors.hausdorff);
    print_kv("normal_err", a.errors.normal_err);
    print_kv("curv_err", a.errors.curv_err);
    print_kv("area_err", a.errors.area_err);
    print_kv("mean_curvature", a.mean_curvature);
    print_kv("surface_area", a.surface_area_value);
    std::printf("artifacts = %zu\n", a.files.size());
    std::printf("manifest = %s\n", a.manifest_path.c_str());
}

int dispatch(const std::string& verb, const std::string& config_path,
             const std::string& output_dir_flag, const std::vector<std::string>& resolutions) {
    if (verb == "presets") {
        std::printf("velocity presets:\n");
        for (const std::string& name : tfd::velocity_preset_names())
            std::printf("  %s\n", name.c_str());
        std::printf("initial presets:\n");
        for (const std::string& name : tfd::initial_preset_names())
            std::printf("  %s\n", name.c_str());
        return kExitOk;
    }

    tfd::RunConfig cfg = tfd::load_run_config(config_path);
    cfg.output_dir = resolve_output_dir(output_dir_flag, cfg.output_dir);

    if (verb == "validate-config") {
        std::printf("ok: %s\n", config_path.c_str());
        return kExitOk;
    }
    if (verb == "run") {
        const tfd::RunArtifacts artifacts = tfd::run_single(cfg);
        print_run(artifacts);
        return kExitOk;
    }
    // verb == "study"
    std::vector<double> hs;
    hs.reserve(resolutions.size());
    for (const std::string& text : resolutions) hs.push_back(tfd::parse_config_number(text));
    const tfd::StudyResult study = tfd::run_study(cfg, hs);
    for (const tfd::StudyRow& row : study.rows) {
        std::printf("h = %s  tau = %s  sup_err = %s  l2_err = %s\n",
                    tfd::format_real(row.h).c_str(), tfd::format_real(row.tau).c_str(),
                    tfd::format_real(row.errors.sup_err).c_str(),
                    tfd::format_real(row.errors.l2_err).c_str());
    }
    print_kv("sup_order", study.orders.sup_order);
    print_kv("l2_order", study.orders.l2_order);
    print_kv("grad_order", study.orders.grad_order);
    print_kv("hess_order", study.orders.hess_order);
    std::printf("table = %s\n", study.csv_path.c_str());
    std::printf("manifest = %s\n", study.manifest_path.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structured-grid transport solver suite"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir_flag;
    std::vector<std::string> resolutions;

    CLI::App* cmd_run = app.add_subcommand("run", "Execute one configured run");
    cmd_run->add_option("config", config_path, "Configuration file")->required();
    cmd_run->add_option("--output-dir", output_dir_flag, "Override the output directory");

    CLI::App* cmd_study =
        app.add_subcommand("study", "Convergence study over a list of grid spacings");
    cmd_study->add_option("config", config_path, "Configuration file")->required();
    cmd_study
        ->add_option("--resolution", resolutions,
                     "Grid spacing (repeatable; fractions like 1/64 accepted)")
        ->required();
    cmd_study->add_option("--output-dir", output_dir_flag, "Override the output directory");

    CLI::App* cmd_validate =
        app.add_subcommand("validate-config", "Parse and validate a configuration file");
    cmd_validate->add_option("config", config_path, "Configuration file")->required();

    app.add_subcommand("presets", "List the built-in velocity and initial presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    const std::string verb = app.get_subcommands().front()->get_name();
    try {
        return dispatch(verb, config_path, output_dir_flag, resolutions);
    } catch (const tfd::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const tfd::SolverError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return kExitSolver;
    } catch (const tfd::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return kExitUnexpected;
    }
}
