/// @file runner.cpp
/// @brief Batch orchestration: single runs and convergence studies.

#include "tfd/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "tfd/errors.hpp"
#include "tfd/explicit_scheme.hpp"
#include "tfd/fields.hpp"
#include "tfd/implicit_scheme.hpp"
#include "tfd/levelset.hpp"
#include "tfd/reference.hpp"

namespace tfd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double param_or(const ParamMap& params, const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

// ----------------------------------------------------------------------------
// Final-state summaries and oracle errors
// ----------------------------------------------------------------------------

struct StateSummary {
    double sup = 0.0;
    double l2 = 0.0;
    double mass = 0.0;
};

StateSummary summarize_state(const ScalarField& g, double h) {
    StateSummary s;
    double sq = 0.0;
    g.for_each([&](const Vec3i&, double v) {
        s.sup = std::max(s.sup, std::abs(v));
        sq += v * v;
        s.mass += v;
    });
    const double vol = h * h * h;
    s.l2 = std::sqrt(sq * vol);
    s.mass *= vol;
    return s;
}

/// Max and l2 node error of a state against the oracle at time t.
void value_errors(const ScalarField& g, const GridSpec& grid, const ExactSolution& oracle,
                  double t, double& sup_err, double& l2_err) {
    double sup = 0.0, sq = 0.0;
    g.for_each([&](const Vec3i& p, double v) {
        const double e = v - oracle.value(t, grid.position(p));
        sup = std::max(sup, std::abs(e));
        sq += e * e;
    });
    sup_err = sup;
    l2_err = std::sqrt(sq * grid.h * grid.h * grid.h);
}

// ----------------------------------------------------------------------------
// Exact sphere geometry
// ----------------------------------------------------------------------------

struct SphereSpec {
    bool valid = false;
    Vec3 center{};
    double radius = 0.0;
};

/// The exact level-c set of the transported sphere datum at time t, when it
/// is available in closed form: sphere preset, level inside the clean range
/// [1/2, 2) of the profile, planar-rotation velocity with the whole level
/// sphere inside the rigid cylinder (so it moves as a rigid body).
SphereSpec exact_sphere(const RunConfig& cfg, const VelocityField& velocity, double t) {
    SphereSpec s;
    if (cfg.initial_preset != "sphere" || !cfg.velocity_csv.empty()) return s;
    if (!velocity.planar_rotation) return s;
    if (!(cfg.level >= 0.5 && cfg.level < 2.0)) return s;
    const double radius0 = param_or(cfg.initial_params, "radius", 0.5);
    const Vec3 c0{param_or(cfg.initial_params, "cx", 0.3),
                  param_or(cfg.initial_params, "cy", 0.0),
                  param_or(cfg.initial_params, "cz", 0.0)};
    // Profile value 2 * 2^(-d^2 / radius0^2): level c sits at distance
    // radius0 * sqrt(log2(2 / c)) from the center.
    const double radius = radius0 * std::sqrt(std::log2(2.0 / cfg.level));
    if (!(radius > 0.0)) return s;
    if (std::hypot(c0.x, c0.y) + radius > velocity.rigid_radius) return s;
    if (std::abs(c0.z) + radius > velocity.rigid_halfheight) return s;
    const double angle = velocity.omega * t;
    const double c = std::cos(angle), d = std::sin(angle);
    s.center = {c * c0.x - d * c0.y, d * c0.x + c * c0.y, c0.z};
    s.radius = radius;
    s.valid = true;
    return s;
}

/// Geometry errors of an extracted interface against an exact sphere; sets
/// hausdorff / normal_err / curv_err / area_err (see RunErrors).
void sphere_geometry(const InterfaceExtraction& interface, bool refined_only,
                     const SphereSpec& sphere, bool orient_outward, RunErrors& err) {
    std::vector<const InterfacePoint*> pts;
    for (const InterfacePoint& p : interface.points) {
        if (p.degenerate) continue;
        if (refined_only && !p.refined) continue;
        pts.push_back(&p);
    }
    if (pts.empty()) return;

    const double sign = orient_outward ? 1.0 : -1.0;
    const double kappa_exact = sign * 2.0 / sphere.radius;
    double d_fwd = 0.0, wsum = 0.0, normal_sq = 0.0, curv_sq = 0.0;
    for (const InterfacePoint* p : pts) {
        const Vec3 d = p->position - sphere.center;
        const double rho = norm2(d);
        d_fwd = std::max(d_fwd, std::abs(rho - sphere.radius));
        const Vec3 n_exact = (sign / std::max(rho, 1e-300)) * d;
        normal_sq += p->area_weight * dot(p->normal - n_exact, p->normal - n_exact);
        const double dk = p->mean_curvature - kappa_exact;
        curv_sq += p->area_weight * dk * dk;
        wsum += p->area_weight;
    }

    // Reverse direction of the Hausdorff distance: distance from a golden-
    // spiral sample of the exact sphere to the interface point cloud.
    const int n_samples = 2048;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    double d_back = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        const double zu = 1.0 - (2.0 * s + 1.0) / n_samples;
        const double ru = std::sqrt(std::max(0.0, 1.0 - zu * zu));
        const double th = golden * s;
        const Vec3 q = sphere.center + sphere.radius * Vec3{ru * std::cos(th),
                                                            ru * std::sin(th), zu};
        double best = std::numeric_limits<double>::infinity();
        for (const InterfacePoint* p : pts) {
            const Vec3 d = p->position - q;
            best = std::min(best, dot(d, d));
        }
        d_back = std::max(d_back, std::sqrt(best));
    }

    err.hausdorff = std::max(d_fwd, d_back);
    err.normal_err = std::sqrt(normal_sq / wsum);
    err.curv_err = std::sqrt(curv_sq / wsum);
    const double area_exact = 4.0 * std::numbers::pi * sphere.radius * sphere.radius;
    err.area_err = std::abs(wsum - area_exact) / area_exact;
}

// ----------------------------------------------------------------------------
// Artifact helpers
// ----------------------------------------------------------------------------

std::string step_suffix(int n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_step_%06d", n);
    return buf;
}

void write_summary_csv(const std::string& path, const RunArtifacts& a) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + path);
    out << "h,tau,n_steps,t_reached,final_sup,final_l2,final_mass,sup_err,l2_err,"
           "grad_err,hess_err,hausdorff,normal_err,curv_err,area_err,mean_curvature,"
           "surface_area\n";
    out << format_real(a.h) << ',' << format_real(a.tau) << ',' << a.n_steps << ','
        << format_real(a.t_reached) << ',' << format_real(a.final_sup) << ','
        << format_real(a.final_l2) << ',' << format_real(a.final_mass) << ','
        << format_real(a.errors.sup_err) << ',' << format_real(a.errors.l2_err) << ','
        << format_real(a.errors.grad_err) << ',' << format_real(a.errors.hess_err) << ','
        << format_real(a.errors.hausdorff) << ',' << format_real(a.errors.normal_err) << ','
        << format_real(a.errors.curv_err) << ',' << format_real(a.errors.area_err) << ','
        << format_real(a.mean_curvature) << ',' << format_real(a.surface_area_value) << '\n';
    if (!out) throw ConfigError("failed writing output file: " + path);
}

/// Least-squares slope of log(err) against log(h) over the finite positive
/// entries; NaN with fewer than two usable rows.
double fit_order(const std::vector<StudyRow>& rows, double RunErrors::*column) {
    std::vector<double> xs, ys;
    for (const StudyRow& row : rows) {
        const double e = row.errors.*column;
        if (!(row.h > 0.0) || !std::isfinite(e) || !(e > 0.0)) continue;
        xs.push_back(std::log(row.h));
        ys.push_back(std::log(e));
    }
    if (xs.size() < 2) return kNaN;
    double mx = 0.0, my = 0.0;
    for (size_t q = 0; q < xs.size(); ++q) {
        mx += xs[q];
        my += ys[q];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxx = 0.0, sxy = 0.0;
    for (size_t q = 0; q < xs.size(); ++q) {
        sxx += (xs[q] - mx) * (xs[q] - mx);
        sxy += (xs[q] - mx) * (ys[q] - my);
    }
    if (!(sxx > 0.0)) return kNaN;
    return sxy / sxx;
}

}  // namespace

// ----------------------------------------------------------------------------
// Defaults
// ----------------------------------------------------------------------------

RunErrors::RunErrors()
    : sup_err(kNaN),
      l2_err(kNaN),
      grad_err(kNaN),
      hess_err(kNaN),
      hausdorff(kNaN),
      normal_err(kNaN),
      curv_err(kNaN),
      area_err(kNaN) {}

RunArtifacts::RunArtifacts() : mean_curvature(kNaN), surface_area_value(kNaN) {}

StudyOrders::StudyOrders()
    : sup_order(kNaN),
      l2_order(kNaN),
      grad_order(kNaN),
      hess_order(kNaN),
      hausdorff_order(kNaN),
      normal_order(kNaN),
      curv_order(kNaN),
      area_order(kNaN) {}

// ----------------------------------------------------------------------------
// Single run
// ----------------------------------------------------------------------------

RunArtifacts run_single(const RunConfig& cfg) {
    validate_run_config(cfg);
    const GridSpec grid = derive_grid(cfg);
    const VelocityField velocity = build_velocity(cfg);
    const InitialData f0 = build_initial(cfg);
    const SchemeParams params = derive_scheme_params(cfg, velocity.sup_hint);
    const TimeGrid planned = make_time_grid(params.tau, cfg.t_final);

    RunArtifacts out;
    out.h = params.h;
    out.tau = params.tau;

    ArtifactWriter writer(cfg.output_dir);
    const IndexBox universe{{0, 0, 0}, grid.dims};
    const auto initial_fn = [&f0](const Vec3& x) { return f0.value(x); };

    // State dumps every snapshot_every steps (step 0 = initial averages).
    const auto snapshot_hook = [&](int n, double, const ScalarField& state) {
        if (cfg.snapshot_every <= 0 || n % cfg.snapshot_every != 0) return;
        const std::string stem = cfg.label + step_suffix(n);
        if (cfg.write_vtk) {
            write_vtk_scalar(writer.path_of(stem + ".vtk"), state, grid, "g");
            writer.record(stem + ".vtk");
        }
        if (cfg.write_csv) {
            write_field_csv(writer.path_of(stem + ".csv"), state, grid);
            writer.record(stem + ".csv");
        }
    };

    ExactSolution oracle;
    bool have_oracle = false;
    if (cfg.oracle_enabled) {
        FlowIntegratorConfig icfg;
        icfg.max_substep = default_flow_substep(params.tau, cfg.t_final);
        icfg.box_lo = cfg.box_lo;
        icfg.box_hi = cfg.box_hi;
        oracle = make_exact_solution(f0, velocity, icfg);
        have_oracle = true;
    }

    ScalarField final_state;
    TimeGrid time;
    if (cfg.scheme == "explicit") {
        ExplicitConfig run_cfg;
        run_cfg.grid = grid;
        run_cfg.universe = universe;
        run_cfg.params = params;
        run_cfg.velocity = &velocity;
        run_cfg.initial = initial_fn;
        run_cfg.t_final = cfg.t_final;
        run_cfg.quad_space_order = cfg.quad_space_order;
        run_cfg.quad_time_order = cfg.quad_time_order;
        if (have_oracle && oracle.closed_derivatives) {
            // Single pass: per-step sup errors at all three derivative levels
            // (maxima over the whole run), snapshots, final-state capture.
            run_cfg.on_step = [&](int n, double t, const ScalarField& state) {
                snapshot_hook(n, t, state);
                if (n == planned.n_steps) final_state = state;
            };
            const ErrorCascade cascade = error_cascade_run(run_cfg, oracle);
            out.errors.sup_err = cascade.value_sup;
            out.errors.grad_err = cascade.grad_sup;
            out.errors.hess_err = cascade.hess_sup;
            time = planned;
        } else {
            run_cfg.on_step = snapshot_hook;
            ExplicitRun run = run_explicit(run_cfg);
            final_state = std::move(run.g);
            time = run.time;
        }
    } else {
        const Domain domain = Domain::box(cfg.box_lo, cfg.box_hi);
        const DomainMask mask(grid, domain);
        ImplicitConfig run_cfg;
        run_cfg.grid = grid;
        run_cfg.mask = &mask;
        run_cfg.params = params;
        run_cfg.velocity = &velocity;
        run_cfg.initial = initial_fn;
        run_cfg.t_final = cfg.t_final;
        run_cfg.quad_space_order = cfg.quad_space_order;
        run_cfg.quad_time_order = cfg.quad_time_order;
        run_cfg.hhd = cfg.hhd;
        run_cfg.gmres = cfg.gmres;
        run_cfg.on_step = snapshot_hook;
        ImplicitRun run = run_implicit(run_cfg);
        final_state = std::move(run.g);
        time = run.time;
    }
    out.n_steps = time.n_steps;
    out.t_reached = time.time(time.n_steps);

    const StateSummary summary = summarize_state(final_state, grid.h);
    out.final_sup = summary.sup;
    out.final_l2 = summary.l2;
    out.final_mass = summary.mass;

    if (have_oracle) {
        double sup = 0.0, l2 = 0.0;
        value_errors(final_state, grid, oracle, out.t_reached, sup, l2);
        out.errors.l2_err = l2;
        if (!std::isfinite(out.errors.sup_err)) out.errors.sup_err = sup;
    }

    if (cfg.levelset_enabled) {
        LevelSetOptions options;
        options.level = cfg.level;
        options.orient_outward = cfg.levelset_outward;
        options.refine = cfg.levelset_refine;
        const InterfaceExtraction interface = extract_interface(final_state, grid, options);
        const bool refined_only = cfg.levelset_refine;
        const double area = surface_area(interface, refined_only);
        if (area > 0.0) {
            out.surface_area_value = area;
            out.mean_curvature =
                surface_integral(
                    interface, [](const InterfacePoint& p) { return p.mean_curvature; },
                    refined_only) /
                area;
        }
        if (cfg.write_csv) {
            write_interface_csv(writer.path_of(cfg.label + "_interface.csv"), interface);
            writer.record(cfg.label + "_interface.csv");
        }
        if (cfg.write_vtk) {
            write_interface_vtk(writer.path_of(cfg.label + "_interface.vtk"), interface);
            writer.record(cfg.label + "_interface.vtk");
        }
        if (have_oracle) {
            const SphereSpec sphere = exact_sphere(cfg, velocity, out.t_reached);
            if (sphere.valid)
                sphere_geometry(interface, refined_only, sphere, cfg.levelset_outward,
                                out.errors);
        }
    }

    if (cfg.write_vtk) {
        write_vtk_scalar(writer.path_of(cfg.label + "_final.vtk"), final_state, grid, "g");
        writer.record(cfg.label + "_final.vtk");
    }
    if (cfg.write_csv) {
        write_field_csv(writer.path_of(cfg.label + "_final.csv"), final_state, grid);
        writer.record(cfg.label + "_final.csv");
    }
    write_summary_csv(writer.path_of(cfg.label + "_summary.csv"), out);
    writer.record(cfg.label + "_summary.csv");

    out.manifest_path = writer.write_manifest();
    out.files = writer.entries();
    out.directory = writer.directory();
    return out;
}

// ----------------------------------------------------------------------------
// Convergence study
// ----------------------------------------------------------------------------

StudyResult run_study(const RunConfig& base, const std::vector<double>& resolutions) {
    if (resolutions.empty()) throw ConfigError("study: need at least one resolution");
    const double step_ratio = base.tau > 0.0 ? base.tau / base.h : 0.0;

    StudyResult result;
    ArtifactWriter writer(base.output_dir);
    for (size_t r = 0; r < resolutions.size(); ++r) {
        if (!(resolutions[r] > 0.0))
            throw ConfigError("study: resolutions must be positive grid spacings");
        RunConfig cfg = base;
        cfg.h = resolutions[r];
        cfg.tau = step_ratio > 0.0 ? step_ratio * cfg.h : 0.0;
        const std::string sub = "res_" + std::to_string(r);
        cfg.output_dir = base.output_dir + "/" + sub;
        const RunArtifacts artifacts = run_single(cfg);

        StudyRow row;
        row.h = artifacts.h;
        row.tau = artifacts.tau;
        row.errors = artifacts.errors;
        result.rows.push_back(row);

        for (const ManifestEntry& entry : artifacts.files) writer.record(sub + "/" + entry.path);
        writer.record(sub + "/manifest.json");
    }

    result.orders.sup_order = fit_order(result.rows, &RunErrors::sup_err);
    result.orders.l2_order = fit_order(result.rows, &RunErrors::l2_err);
    result.orders.grad_order = fit_order(result.rows, &RunErrors::grad_err);
    result.orders.hess_order = fit_order(result.rows, &RunErrors::hess_err);
    result.orders.hausdorff_order = fit_order(result.rows, &RunErrors::hausdorff);
    result.orders.normal_order = fit_order(result.rows, &RunErrors::normal_err);
    result.orders.curv_order = fit_order(result.rows, &RunErrors::curv_err);
    result.orders.area_order = fit_order(result.rows, &RunErrors::area_err);

    const std::string csv_rel = base.label + "_study.csv";
    {
        std::ofstream out(writer.path_of(csv_rel), std::ios::binary);
        if (!out) throw ConfigError("cannot open output file: " + writer.path_of(csv_rel));
        out << "h,tau,sup_err,l2_err,grad_err,hess_err,hausdorff,normal_err,curv_err,"
               "area_err\n";
        for (const StudyRow& row : result.rows) {
            out << format_real(row.h) << ',' << format_real(row.tau) << ','
                << format_real(row.errors.sup_err) << ',' << format_real(row.errors.l2_err)
                << ',' << format_real(row.errors.grad_err) << ','
                << format_real(row.errors.hess_err) << ',' << format_real(row.errors.hausdorff)
                << ',' << format_real(row.errors.normal_err) << ','
                << format_real(row.errors.curv_err) << ',' << format_real(row.errors.area_err)
                << '\n';
        }
        out << "order,," << format_real(result.orders.sup_order) << ','
            << format_real(result.orders.l2_order) << ',' << format_real(result.orders.grad_order)
            << ',' << format_real(result.orders.hess_order) << ','
            << format_real(result.orders.hausdorff_order) << ','
            << format_real(result.orders.normal_order) << ','
            << format_real(result.orders.curv_order) << ','
            << format_real(result.orders.area_order) << '\n';
        if (!out) throw ConfigError("failed writing output file: " + writer.path_of(csv_rel));
    }
    writer.record(csv_rel);

    result.directory = writer.directory();
    result.csv_path = writer.path_of(csv_rel);
    result.manifest_path = writer.write_manifest();
    return result;
}

}  // namespace tfd
