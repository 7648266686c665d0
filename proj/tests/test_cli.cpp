/// @file test_cli.cpp
/// @brief Tests for config parsing/validation, artifact writers, the run/study
/// drivers, and the installed command-line binary (when TFD_CLI is set).

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "tfd/config.hpp"
#include "tfd/errors.hpp"
#include "tfd/explicit_scheme.hpp"
#include "tfd/fields.hpp"
#include "tfd/grid.hpp"
#include "tfd/io.hpp"
#include "tfd/levelset.hpp"
#include "tfd/presets.hpp"
#include "tfd/runner.hpp"

namespace fs = std::filesystem;
using namespace tfd;

namespace {

RunConfig parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse_run_config(in, "<test>");
}

fs::path scratch(const std::string& name) {
    fs::path dir = fs::path("cli_scratch") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    REQUIRE(out.good());
}

std::vector<std::string> read_lines(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

/// Zero-velocity explicit configuration used by several driver tests.
RunConfig quiet_config(const fs::path& dir) {
    RunConfig cfg;
    cfg.box_lo = {-1.0, -1.0, -1.0};
    cfg.box_hi = {1.0, 1.0, 1.0};
    cfg.h = 0.125;
    cfg.alpha = 1.0;  // tau = h
    cfg.t_final = 0.3;
    cfg.velocity_preset = "zero";
    cfg.initial_preset = "bump";
    cfg.initial_params = {{"width", 0.3}, {"cx", 0.0}};
    cfg.oracle_enabled = true;
    cfg.output_dir = dir.string();
    cfg.label = "zv";
    return cfg;
}

}  // namespace

TEST_CASE("config: number grammar accepts reals and fractions") {
    CHECK(parse_config_number("0.25") == doctest::Approx(0.25));
    CHECK(parse_config_number("1/64") == doctest::Approx(1.0 / 64.0));
    CHECK(parse_config_number("-3/8") == doctest::Approx(-0.375));
    CHECK(parse_config_number(" 2.5e-3 ") == doctest::Approx(0.0025));
    CHECK(parse_config_number("10") == doctest::Approx(10.0));

    CHECK_THROWS_WITH_AS(parse_config_number(""), doctest::Contains("empty number"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_number("1/0"), doctest::Contains("zero denominator"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_number("1/"), doctest::Contains("malformed fraction"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_number("abc"), doctest::Contains("malformed number"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_number("3.5x"), doctest::Contains("trailing characters"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_number("nan"), doctest::Contains("non-finite"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_number("inf"), doctest::Contains("non-finite"), ConfigError);
}

TEST_CASE("config: full file round-trip hits every section") {
    const std::string text = R"(# exercise every section
[domain]
lo_x = -1.0   # trailing comment
lo_y = -1.0
lo_z = -1.0
hi_x = 1.0
hi_y = 1.0
hi_z = 1.0
h = 1/8

[scheme]
type = implicit
alpha = 0.3
beta = 0.6
tau = 1/32
truncation = off
t_final = 0.5
quad_space_order = 2
quad_time_order = 4
cfl_safety = 0.9

[velocity]
preset = rotation
omega = 0.25
r_in = 0.9
r_out = 1.05

[initial]
preset = sphere
radius = 0.4
cx = 0.1

[solver]
hhd_tolerance = 1e-9
hhd_max_iterations = 300
gmres_tolerance = 1e-11
gmres_restart = 30
gmres_max_restarts = 20

[levelset]
enabled = yes
level = 1.0
refine = no
orient_outward = false

[oracle]
enabled = true

[output]
directory = outdir
label = case-7_x
snapshot_every = 5
write_vtk = 0
write_csv = 1
)";
    const RunConfig cfg = parse_text(text);
    CHECK(cfg.box_lo.x == -1.0);
    CHECK(cfg.box_hi.z == 1.0);
    CHECK(cfg.h == doctest::Approx(0.125));
    CHECK(cfg.scheme == "implicit");
    CHECK(cfg.alpha == doctest::Approx(0.3));
    CHECK(cfg.beta == doctest::Approx(0.6));
    CHECK(cfg.tau == doctest::Approx(1.0 / 32.0));
    CHECK_FALSE(cfg.truncation);
    CHECK(cfg.t_final == doctest::Approx(0.5));
    CHECK(cfg.quad_space_order == 2);
    CHECK(cfg.quad_time_order == 4);
    CHECK(cfg.cfl_safety == doctest::Approx(0.9));
    CHECK(cfg.velocity_preset == "rotation");
    CHECK(cfg.velocity_params.at("omega") == doctest::Approx(0.25));
    CHECK(cfg.velocity_params.at("r_in") == doctest::Approx(0.9));
    CHECK(cfg.initial_preset == "sphere");
    CHECK(cfg.initial_params.at("radius") == doctest::Approx(0.4));
    CHECK(cfg.initial_params.at("cx") == doctest::Approx(0.1));
    CHECK(cfg.hhd.rel_tol == doctest::Approx(1e-9));
    CHECK(cfg.hhd.max_iterations == 300);
    CHECK(cfg.gmres.rel_tol == doctest::Approx(1e-11));
    CHECK(cfg.gmres.restart == 30);
    CHECK(cfg.gmres.max_restarts == 20);
    CHECK(cfg.levelset_enabled);
    CHECK(cfg.level == doctest::Approx(1.0));
    CHECK_FALSE(cfg.levelset_refine);
    CHECK_FALSE(cfg.levelset_outward);
    CHECK(cfg.oracle_enabled);
    CHECK(cfg.output_dir == "outdir");
    CHECK(cfg.label == "case-7_x");
    CHECK(cfg.snapshot_every == 5);
    CHECK_FALSE(cfg.write_vtk);
    CHECK(cfg.write_csv);
}

TEST_CASE("config: boolean spellings") {
    for (const char* word : {"true", "on", "yes", "1"}) {
        RunConfig cfg = parse_text(std::string("[oracle]\nenabled = ") + word + "\n");
        CHECK(cfg.oracle_enabled);
    }
    for (const char* word : {"false", "off", "no", "0"}) {
        RunConfig cfg = parse_text(std::string("[oracle]\nenabled = ") + word + "\n");
        CHECK_FALSE(cfg.oracle_enabled);
    }
    CHECK_THROWS_WITH_AS(parse_text("[oracle]\nenabled = maybe\n"),
                         doctest::Contains("expected a boolean"), ConfigError);
}

TEST_CASE("config: parse failures carry location and cause") {
    CHECK_THROWS_WITH_AS(parse_text("[nowhere]\n"), doctest::Contains("unknown section"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("[domain\nh = 0.1\n"),
                         doctest::Contains("unterminated section header"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("h = 0.1\n"), doctest::Contains("before any [section]"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("[domain]\nh 0.1\n"), doctest::Contains("expected 'key = value'"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("[domain]\n= 0.1\n"), doctest::Contains("empty key"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("[domain]\nh =\n"), doctest::Contains("empty value"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("[domain]\nh = 1/8\nh = 1/4\n"),
                         doctest::Contains("duplicate key"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("[domain]\nwidth = 1\n"), doctest::Contains("unknown key"),
                         ConfigError);
    // The location prefix names the source, line, section, and key.
    CHECK_THROWS_WITH_AS(parse_text("[scheme]\nalpha = oops\n"),
                         doctest::Contains("<test>:2 [scheme] alpha"), ConfigError);
}

TEST_CASE("config: preset parameter forwarding and rejection") {
    RunConfig cfg = parse_text("[velocity]\npreset = cellular\namplitude = 2.5\n");
    CHECK(cfg.velocity_params.at("amplitude") == doctest::Approx(2.5));
    // Unknown names only fail once the preset is constructed.
    cfg.velocity_params["bogus"] = 1.0;
    CHECK_THROWS_WITH_AS(build_velocity(cfg), doctest::Contains("unknown parameter 'bogus'"),
                         ConfigError);
}

TEST_CASE("config: validation rejects inconsistent scheme settings") {
    RunConfig base;
    CHECK_NOTHROW(validate_run_config(base));

    RunConfig c = base;
    c.truncation = true;
    c.beta = 0.4;
    CHECK_THROWS_WITH_AS(validate_run_config(c), doctest::Contains("must exceed 1/2"), ConfigError);

    c = base;
    c.truncation = true;
    c.alpha = 0.0;
    CHECK_THROWS_WITH_AS(validate_run_config(c), doctest::Contains("alpha > 0"), ConfigError);

    c = base;
    c.truncation = true;
    c.alpha = 0.45;
    c.beta = 0.6;
    CHECK_THROWS_WITH_AS(validate_run_config(c), doctest::Contains("alpha + beta < 1"),
                         ConfigError);

    // An explicit tau above the admissible ceiling trips the scaling gate.
    c = base;
    c.truncation = true;
    c.alpha = 0.3;
    c.beta = 0.55;
    c.tau = std::pow(c.h, 2.0 - c.alpha);
    CHECK_THROWS_WITH_AS(validate_run_config(c), doctest::Contains("exceeds 2/7"), ConfigError);

    c = base;
    c.tau = 2.0 * c.t_final;
    CHECK_THROWS_WITH_AS(validate_run_config(c), doctest::Contains("exceeds the time horizon"),
                         ConfigError);

    c = base;
    c.scheme = "semi-lagrangian";
    CHECK_THROWS_WITH_AS(validate_run_config(c), doctest::Contains("'explicit' or 'implicit'"),
                         ConfigError);

    c = base;
    c.h = 0.3;  // 2.5 / 0.3 is not an integer
    CHECK_THROWS_AS(validate_run_config(c), ConfigError);

    c = base;
    c.h = 1.25;  // only two cells per extent
    CHECK_THROWS_WITH_AS(validate_run_config(c), doctest::Contains("at least three cells"),
                         ConfigError);

    c = base;
    c.quad_space_order = 6;
    CHECK_THROWS_WITH_AS(validate_run_config(c), doctest::Contains("supported orders are 1..5"),
                         ConfigError);

    c = base;
    c.cfl_safety = 1.5;
    CHECK_THROWS_WITH_AS(validate_run_config(c), doctest::Contains("(0, 1]"), ConfigError);

    c = base;
    c.velocity_csv = "table.csv";
    c.velocity_params["omega"] = 1.0;
    CHECK_THROWS_WITH_AS(validate_run_config(c),
                         doctest::Contains("csv input does not take preset parameters"),
                         ConfigError);

    c = base;
    c.velocity_csv = "table.csv";
    c.velocity_preset = "rotation";
    CHECK_THROWS_WITH_AS(validate_run_config(c), doctest::Contains("not both"), ConfigError);

    c = base;
    c.snapshot_every = -1;
    CHECK_THROWS_WITH_AS(validate_run_config(c), doctest::Contains("nonnegative"), ConfigError);

    c = base;
    c.label = "bad label!";
    CHECK_THROWS_WITH_AS(validate_run_config(c), doctest::Contains("letters, digits"), ConfigError);

    c = base;
    c.output_dir = "";
    CHECK_THROWS_WITH_AS(validate_run_config(c), doctest::Contains("nonempty"), ConfigError);

    c = base;
    c.scheme = "implicit";
    c.hhd.rel_tol = 0.0;
    CHECK_THROWS_WITH_AS(validate_run_config(c), doctest::Contains("hhd_tolerance"), ConfigError);
}

TEST_CASE("config: grid and time-step derivation") {
    RunConfig cfg;
    cfg.h = 1.0 / 16.0;
    const GridSpec grid = derive_grid(cfg);
    CHECK(grid.dims.i == 41);
    CHECK(grid.dims.j == 41);
    CHECK(grid.dims.k == 41);
    CHECK(grid.origin.x == doctest::Approx(-1.25));
    CHECK(grid.h == doctest::Approx(cfg.h));

    SUBCASE("smooth mode caps tau by the weight-positivity budget") {
        cfg.alpha = 1.0;
        cfg.cfl_safety = 1.0;
        SchemeParams p = derive_scheme_params(cfg, 0.5);
        CHECK(p.tau == doctest::Approx((2.0 / 7.0) * cfg.h / 0.5));
        // Slow velocity: the canonical step h^(2-alpha) binds instead.
        p = derive_scheme_params(cfg, 0.01);
        CHECK(p.tau == doctest::Approx(cfg.h));
        // No velocity bound at all: canonical step.
        p = derive_scheme_params(cfg, 0.0);
        CHECK(p.tau == doctest::Approx(cfg.h));
    }

    SUBCASE("truncation mode caps tau by the scaling gate") {
        cfg.truncation = true;
        cfg.alpha = 0.3;
        cfg.beta = 0.55;
        const SchemeParams p = derive_scheme_params(cfg, 123.0);  // sup plays no role here
        const double canonical = std::pow(cfg.h, 2.0 - cfg.alpha);
        const double gate_cap = (2.0 / 7.0) * cfg.h / std::pow(cfg.h, -cfg.beta);
        CHECK(p.tau == doctest::Approx(std::min(canonical, gate_cap)));
        CHECK(check_scaling(p).ok());
    }

    SUBCASE("a pinned tau is honored") {
        cfg.tau = 0.01;
        const SchemeParams p = derive_scheme_params(cfg, 5.0);
        CHECK(p.tau == 0.01);
    }
}

TEST_CASE("io: real formatting round-trips at full precision") {
    for (double v : {1.0 / 3.0, 0.1, -2.7182818284590452, 1e-17, 3.0, 0.0}) {
        const std::string text = format_real(v);
        CHECK(std::strtod(text.c_str(), nullptr) == v);
    }
    CHECK(format_real(std::nan("")) == "nan");
}

TEST_CASE("io: field writers emit the documented layout") {
    const fs::path dir = scratch("io_field");
    GridSpec grid;
    grid.h = 0.5;
    grid.origin = {0.0, 0.0, 0.0};
    grid.dims = {2, 2, 2};
    ScalarField f(IndexBox{{0, 0, 0}, {2, 2, 2}});
    int counter = 0;
    f.transform([&](Vec3i, double) { return static_cast<double>(counter++); });

    const fs::path csv = dir / "f.csv";
    write_field_csv(csv.string(), f, grid);
    const std::vector<std::string> lines = read_lines(csv);
    REQUIRE(lines.size() == 9);
    CHECK(lines[0] == "i,j,k,x,y,z,value");
    CHECK(lines[1] == "0,0,0,0,0,0,0");
    // i varies fastest.
    CHECK(split_csv(lines[2])[0] == "1");
    CHECK(split_csv(lines[2])[1] == "0");

    const fs::path vtk = dir / "f.vtk";
    write_vtk_scalar(vtk.string(), f, grid, "g");
    const std::string text = slurp(vtk);
    CHECK(text.find("# vtk DataFile Version 3.0") == 0);
    CHECK(text.find("DATASET STRUCTURED_POINTS") != std::string::npos);
    CHECK(text.find("DIMENSIONS 2 2 2") != std::string::npos);
    CHECK(text.find("POINT_DATA 8") != std::string::npos);
    CHECK(text.find("SCALARS g double 1") != std::string::npos);
}

TEST_CASE("io: interface writers and the artifact manifest") {
    const fs::path dir = scratch("io_iface");
    GridSpec grid;
    grid.h = 0.125;
    grid.origin = {-1.0, -1.0, -1.0};
    grid.dims = {17, 17, 17};
    ScalarField g(IndexBox{{0, 0, 0}, grid.dims});
    g.transform([&](Vec3i idx, double) {
        const Vec3 x = grid.position(idx);
        return 2.0 * std::exp(-std::log(2.0) / 0.25 * dot(x, x));  // level 1 at |x| = 0.5
    });
    LevelSetOptions opt;
    opt.level = 1.0;
    const InterfaceExtraction iface = extract_interface(g, grid, opt);
    REQUIRE(iface.points.size() > 50);

    ArtifactWriter writer(dir.string());
    write_interface_csv(writer.path_of("iface.csv"), iface);
    writer.record("iface.csv");
    write_interface_vtk(writer.path_of("iface.vtk"), iface);
    writer.record("iface.vtk");

    const std::vector<std::string> lines = read_lines(dir / "iface.csv");
    CHECK(lines[0] == "i,j,k,x,y,z,nx,ny,nz,mean_curvature,area_weight,projection_axis,refined");
    CHECK(lines.size() > 50);

    const std::string manifest_path = writer.write_manifest();
    const nlohmann::json doc = nlohmann::json::parse(slurp(manifest_path));
    CHECK(doc.at("directory").get<std::string>() == dir.string());
    REQUIRE(doc.at("files").size() == 2);
    for (const auto& row : doc.at("files")) {
        const fs::path p = dir / row.at("path").get<std::string>();
        CHECK(row.at("bytes").get<std::uint64_t>() == fs::file_size(p));
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a64_file(p.string())));
        CHECK(row.at("fnv1a64").get<std::string>() == buf);
    }

    CHECK_THROWS_AS(fnv1a64_file((dir / "missing.bin").string()), ConfigError);
}

TEST_CASE("runner: zero-velocity run emits the full artifact set") {
    const fs::path dir = scratch("run_zero");
    RunConfig cfg = quiet_config(dir / "a");
    cfg.snapshot_every = 1;

    const RunArtifacts art = run_single(cfg);
    CHECK(art.h == doctest::Approx(0.125));
    CHECK(art.tau == doctest::Approx(0.125));
    CHECK(art.n_steps == 2);
    CHECK(art.t_reached == doctest::Approx(0.25));

    // Snapshots at n = 0, 1, 2 in both formats, final pair, summary table.
    REQUIRE(art.files.size() == 9);
    bool saw_first = false, saw_summary = false;
    for (const ManifestEntry& e : art.files) {
        CHECK(e.bytes > 0);
        if (e.path == "zv_step_000000.csv") saw_first = true;
        if (e.path == "zv_summary.csv") saw_summary = true;
    }
    CHECK(saw_first);
    CHECK(saw_summary);
    CHECK(fs::exists(art.manifest_path));

    // The averaging scheme cannot create new extrema.
    CHECK(art.final_sup <= 1.0 + 1e-12);
    CHECK(art.final_sup > 0.1);
    CHECK(art.final_mass > 0.0);

    // Stationary solution: the oracle sees only averaging error, and the
    // closed-form derivative cascade is available.
    CHECK(art.errors.sup_err >= 0.0);
    CHECK(art.errors.sup_err < 0.2);
    CHECK(std::isfinite(art.errors.l2_err));
    CHECK(std::isfinite(art.errors.grad_err));
    CHECK(std::isfinite(art.errors.hess_err));
    CHECK(!std::isfinite(art.errors.hausdorff));  // no level-set stage requested

    const std::vector<std::string> summary = read_lines(dir / "a" / "zv_summary.csv");
    REQUIRE(summary.size() == 2);
    CHECK(summary[0] ==
          "h,tau,n_steps,t_reached,final_sup,final_l2,final_mass,sup_err,l2_err,grad_err,hess_err,"
          "hausdorff,normal_err,curv_err,area_err,mean_curvature,surface_area");
    CHECK(split_csv(summary[1]).size() == 17);
}

TEST_CASE("runner: repeated runs are byte-identical") {
    const fs::path dir = scratch("run_repeat");
    RunConfig cfg = quiet_config(dir / "a");
    const RunArtifacts first = run_single(cfg);
    cfg.output_dir = (dir / "b").string();
    const RunArtifacts second = run_single(cfg);

    REQUIRE(first.files.size() == second.files.size());
    for (std::size_t i = 0; i < first.files.size(); ++i) {
        CHECK(first.files[i].path == second.files[i].path);
        CHECK(first.files[i].checksum == second.files[i].checksum);
        CHECK(first.files[i].bytes == second.files[i].bytes);
    }
}

TEST_CASE("runner: implicit smoke run reports oracle errors") {
    const fs::path dir = scratch("run_implicit");
    RunConfig cfg;
    cfg.h = 0.125;
    cfg.scheme = "implicit";
    cfg.tau = 0.025;
    cfg.t_final = 0.05;
    cfg.velocity_preset = "rotation";
    cfg.velocity_params = {{"omega", 0.5}};
    cfg.initial_preset = "bump";  // default center (0.3, 0, 0): value oracle only
    cfg.oracle_enabled = true;
    cfg.output_dir = dir.string();
    cfg.label = "imp";
    cfg.write_vtk = false;

    const RunArtifacts art = run_single(cfg);
    CHECK(art.n_steps == 2);
    CHECK(std::isfinite(art.errors.sup_err));
    CHECK(std::isfinite(art.errors.l2_err));
    CHECK(art.errors.l2_err < 0.1);
    CHECK(!std::isfinite(art.errors.grad_err));  // support leaves the rigid core
    CHECK(art.final_sup < 1.1);
}

TEST_CASE("runner: level-set stage recovers the spherical interface") {
    const fs::path dir = scratch("run_levelset");
    RunConfig cfg;
    cfg.h = 0.125;
    cfg.alpha = 1.0;
    cfg.t_final = 0.02;  // below one step: geometry of the averaged initial data
    cfg.velocity_preset = "zero";
    cfg.initial_preset = "sphere";
    cfg.initial_params = {{"radius", 0.5}, {"cx", 0.2}};
    cfg.oracle_enabled = true;
    cfg.levelset_enabled = true;
    cfg.level = 1.0;
    cfg.levelset_outward = false;
    cfg.output_dir = dir.string();
    cfg.label = "ls";
    cfg.write_vtk = false;

    const RunArtifacts art = run_single(cfg);
    CHECK(art.n_steps == 0);
    CHECK(std::isfinite(art.errors.hausdorff));
    CHECK(art.errors.hausdorff < 0.05);
    CHECK(art.errors.normal_err < 0.3);
    CHECK(art.errors.curv_err < 2.0);
    CHECK(art.errors.area_err < 0.1);
    // Inward orientation: mean curvature near -2/r = -4.
    CHECK(art.mean_curvature < 0.0);
    CHECK(std::abs(art.mean_curvature + 4.0) < 1.0);
    CHECK(art.surface_area_value == doctest::Approx(4.0 * 3.14159265358979 * 0.25).epsilon(0.10));

    bool saw_interface = false;
    for (const ManifestEntry& e : art.files)
        if (e.path == "ls_interface.csv") saw_interface = true;
    CHECK(saw_interface);

    SUBCASE("outward orientation flips the curvature sign") {
        cfg.levelset_outward = true;
        cfg.output_dir = (dir / "outward").string();
        const RunArtifacts out = run_single(cfg);
        CHECK(out.mean_curvature > 0.0);
    }
}

TEST_CASE("runner: study table and fitted orders") {
    const fs::path dir = scratch("study_zero");
    RunConfig cfg = quiet_config(dir / "a");
    cfg.t_final = 0.25;
    const std::vector<double> hs = {1.0 / 8.0, 1.0 / 16.0};

    const StudyResult study = run_study(cfg, hs);
    REQUIRE(study.rows.size() == 2);
    CHECK(study.rows[0].h == doctest::Approx(0.125));
    CHECK(study.rows[1].h == doctest::Approx(0.0625));
    CHECK(study.rows[0].errors.sup_err > study.rows[1].errors.sup_err);
    CHECK(study.rows[0].errors.grad_err > study.rows[1].errors.grad_err);
    CHECK(study.orders.sup_order > 0.3);
    CHECK(std::isfinite(study.orders.grad_order));
    CHECK(std::isfinite(study.orders.hess_order));
    CHECK(!std::isfinite(study.orders.hausdorff_order));

    const std::vector<std::string> lines = read_lines(study.csv_path);
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] ==
          "h,tau,sup_err,l2_err,grad_err,hess_err,hausdorff,normal_err,curv_err,area_err");
    CHECK(split_csv(lines[1]).size() == 10);
    const std::vector<std::string> order_row = split_csv(lines[3]);
    REQUIRE(order_row.size() == 10);
    CHECK(order_row[0] == "order");
    CHECK(order_row[1] == "");
    CHECK(std::strtod(order_row[2].c_str(), nullptr) > 0.3);

    // Sub-run artifacts are recorded in the root manifest under res_<i>/.
    const nlohmann::json doc = nlohmann::json::parse(slurp(study.manifest_path));
    bool saw_sub = false;
    for (const auto& row : doc.at("files"))
        if (row.at("path").get<std::string>().rfind("res_0/", 0) == 0) saw_sub = true;
    CHECK(saw_sub);

    SUBCASE("study tables are byte-identical across repeats") {
        cfg.output_dir = (dir / "b").string();
        const StudyResult again = run_study(cfg, hs);
        CHECK(slurp(again.csv_path) == slurp(study.csv_path));
    }

    SUBCASE("a pinned tau rescales proportionally to h") {
        cfg.output_dir = (dir / "c").string();
        cfg.tau = cfg.h / 2.0;
        const StudyResult pinned = run_study(cfg, hs);
        for (const StudyRow& row : pinned.rows)
            CHECK(row.tau == doctest::Approx(row.h / 2.0));
    }

    CHECK_THROWS_AS(run_study(cfg, {}), ConfigError);
    CHECK_THROWS_AS(run_study(cfg, {-0.1}), ConfigError);
}

TEST_CASE("cli binary: verbs, exit codes, and output-dir resolution") {
    const char* cli = std::getenv("TFD_CLI");
    if (cli == nullptr || *cli == '\0') {
        WARN("TFD_CLI is not set; skipping command-line binary checks");
        return;
    }
    const std::string exe = cli;
    const fs::path dir = scratch("cli_bin");

    const std::string quiet_cfg = R"([domain]
lo_x = -1.0
lo_y = -1.0
lo_z = -1.0
hi_x = 1.0
hi_y = 1.0
hi_z = 1.0
h = 1/8

[scheme]
alpha = 1.0
t_final = 0.05

[velocity]
preset = zero

[initial]
preset = bump
width = 0.3
cx = 0.0

[output]
directory = )" + (dir / "cfg_dir").string() +
                                  R"(
label = mini
write_vtk = off
)";
    spit(dir / "good.cfg", quiet_cfg);

    auto run_cmd = [&](const std::string& cmd) {
        const int status = std::system((cmd + " >" + (dir / "stdout.txt").string() + " 2>" +
                                        (dir / "stderr.txt").string())
                                           .c_str());
        REQUIRE(status != -1);
        return WEXITSTATUS(status);
    };

    SUBCASE("validate-config accepts a good file") {
        CHECK(run_cmd(exe + " validate-config " + (dir / "good.cfg").string()) == 0);
        CHECK(slurp(dir / "stdout.txt").find("ok:") != std::string::npos);
    }

    SUBCASE("a bad exponent is a config error naming the constraint") {
        spit(dir / "bad.cfg", "[scheme]\ntruncation = on\nbeta = 0.4\n");
        CHECK(run_cmd(exe + " validate-config " + (dir / "bad.cfg").string()) == 2);
        CHECK(slurp(dir / "stderr.txt").find("must exceed 1/2") != std::string::npos);
    }

    SUBCASE("a missing file is a config error") {
        CHECK(run_cmd(exe + " validate-config " + (dir / "absent.cfg").string()) == 2);
    }

    SUBCASE("a CFL-violating manual step is a solver error") {
        spit(dir / "cfl.cfg",
             "[scheme]\ntau = 1.25\nt_final = 1.25\n[velocity]\npreset = steep\n[output]\n"
             "directory = " +
                 (dir / "cfl_out").string() + "\n");
        CHECK(run_cmd(exe + " run " + (dir / "cfl.cfg").string()) == 3);
        CHECK(slurp(dir / "stderr.txt").find("solver error") != std::string::npos);
    }

    SUBCASE("run produces a snapshot and exits 0") {
        CHECK(run_cmd(exe + " run " + (dir / "good.cfg").string()) == 0);
        CHECK(fs::exists(dir / "cfg_dir" / "mini_final.csv"));
        CHECK(fs::exists(dir / "cfg_dir" / "manifest.json"));
        const std::string out = slurp(dir / "stdout.txt");
        CHECK(out.find("n_steps = ") != std::string::npos);
        CHECK(out.find("manifest = ") != std::string::npos);
    }

    SUBCASE("TFD_OUTPUT_DIR overrides the config, the flag overrides both") {
        const fs::path env_dir = dir / "env_dir";
        CHECK(run_cmd("TFD_OUTPUT_DIR=" + env_dir.string() + " " + exe + " run " +
                      (dir / "good.cfg").string()) == 0);
        CHECK(fs::exists(env_dir / "manifest.json"));

        const fs::path flag_dir = dir / "flag_dir";
        const fs::path loser_dir = dir / "loser_dir";
        CHECK(run_cmd("TFD_OUTPUT_DIR=" + loser_dir.string() + " " + exe + " run " +
                      (dir / "good.cfg").string() + " --output-dir " + flag_dir.string()) == 0);
        CHECK(fs::exists(flag_dir / "manifest.json"));
        CHECK(!fs::exists(loser_dir));
    }

    SUBCASE("study emits the table and per-resolution directories") {
        CHECK(run_cmd(exe + " study " + (dir / "good.cfg").string() +
                      " --resolution 1/8 --resolution 1/16 --output-dir " +
                      (dir / "study_dir").string()) == 0);
        CHECK(fs::exists(dir / "study_dir" / "mini_study.csv"));
        CHECK(fs::exists(dir / "study_dir" / "res_1" / "manifest.json"));
        const std::string out = slurp(dir / "stdout.txt");
        CHECK(out.find("sup_order = ") != std::string::npos);
    }

    SUBCASE("presets lists the built-in names") {
        CHECK(run_cmd(exe + " presets") == 0);
        const std::string out = slurp(dir / "stdout.txt");
        CHECK(out.find("rotation") != std::string::npos);
        CHECK(out.find("sphere") != std::string::npos);
    }

    SUBCASE("an unknown verb is a usage error") {
        CHECK(run_cmd(exe + " frobnicate") == 2);
    }
}
