/// @file explicit_scheme.cpp
/// @brief Explicit seven-point transport scheme implementation.

#include "tfd/explicit_scheme.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

#include "tfd/errors.hpp"
#include "tfd/numerics.hpp"

namespace tfd {

namespace {

constexpr double kSeventh = 1.0 / 7.0;

double sup_abs_of(const VectorField& u) {
    double s = 0.0;
    for (const auto& comp : u.c)
        for (double v : comp.values()) s = std::max(s, std::abs(v));
    return s;
}

double sup_abs_of(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values()) s = std::max(s, std::abs(v));
    return s;
}

/// True when any node on one of the six faces of f's window is nonzero.
bool rim_nonzero(const ScalarField& f) {
    const IndexBox& w = f.window();
    Vec3i p;
    for (int axis = 0; axis < 3; ++axis) {
        const int a1 = (axis + 1) % 3;
        const int a2 = (axis + 2) % 3;
        for (int face = 0; face < 2; ++face) {
            p[axis] = face == 0 ? w.lo[axis] : w.lo[axis] + w.n[axis] - 1;
            for (int s = w.lo[a1]; s < w.lo[a1] + w.n[a1]; ++s)
                for (int t = w.lo[a2]; t < w.lo[a2] + w.n[a2]; ++t) {
                    p[a1] = s;
                    p[a2] = t;
                    if (f.at(p) != 0.0) return true;
                }
        }
    }
    return false;
}

/// Central-divergence extremes of `u` over its own window, zero-extended, so
/// that 1 + tau * div is exactly the coefficient-column sum of a source node.
void divergence_extremes(const VectorField& u, double h, double& div_min, double& div_max) {
    div_min = 0.0;
    div_max = 0.0;
    const IndexBox& w = u.window();
    Vec3i p;
    for (p.k = w.lo.k; p.k < w.lo.k + w.n.k; ++p.k)
        for (p.j = w.lo.j; p.j < w.lo.j + w.n.j; ++p.j)
            for (p.i = w.lo.i; p.i < w.lo.i + w.n.i; ++p.i) {
                double d = 0.0;
                for (int axis = 0; axis < 3; ++axis) {
                    const Vec3i e = unit_offset(axis, 1);
                    d += u.c[axis].at(p + e) - u.c[axis].at(p - e);
                }
                d /= 2.0 * h;
                div_min = std::min(div_min, d);
                div_max = std::max(div_max, d);
            }
}

}  // namespace

// ============================================================================
// Parameter gate
// ============================================================================

bool ScalingCheck::ok() const {
    return alpha_positive && beta_above_half && sum_below_one && tau_admissible && cfl_satisfied;
}

std::string ScalingCheck::describe() const {
    if (ok()) return "scaling admissible";
    std::string msg = "scaling violated:";
    if (!alpha_positive) msg += " alpha must be positive;";
    if (!beta_above_half) msg += " beta must exceed 1/2;";
    if (!sum_below_one) msg += " alpha + beta must stay below 1;";
    if (!tau_admissible) msg += " tau must lie in (0, h^(2-alpha)];";
    if (!cfl_satisfied) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), " tau * h^(-beta) / h = %.6g exceeds 2/7;", gate_value);
        msg += buf;
    }
    return msg;
}

ScalingCheck check_scaling(const SchemeParams& params) {
    ScalingCheck c;
    c.alpha_positive = params.alpha > 0.0;
    c.beta_above_half = params.beta > 0.5;
    c.sum_below_one = params.alpha + params.beta < 1.0;
    const double tau_max = std::pow(params.h, 2.0 - params.alpha);
    c.tau_admissible = params.tau > 0.0 && params.tau <= tau_max * (1.0 + 1e-12);
    c.gate_value = params.tau * std::pow(params.h, -params.beta) / params.h;
    c.canonical_gate = std::pow(params.h, 1.0 - params.alpha - params.beta);
    c.cfl_satisfied = c.gate_value <= c.gate_limit * (1.0 + 1e-12);
    return c;
}

// ============================================================================
// Single step
// ============================================================================

StepDiagnostics step_explicit(ScalarField& out, const ScalarField& g, const VectorField& u,
                              const SchemeParams& params, bool with_diagnostics) {
    if (&out == &g) throw NumericError("step_explicit: output must not alias the input state");
    const double h = params.h;
    const double r = params.tau / (2.0 * h);

    const IndexBox& w = out.window();
    const bool same_layout = (w.lo == g.window().lo && w.n == g.window().n &&
                              w.lo == u.window().lo && w.n == u.window().n);

    if (same_layout) {
        const std::int64_t sx = 1;
        const std::int64_t sy = w.n.i;
        const std::int64_t sz = static_cast<std::int64_t>(w.n.i) * w.n.j;
        const double* gd = g.values().data();
        const double* u0 = u.c[0].values().data();
        const double* u1 = u.c[1].values().data();
        const double* u2 = u.c[2].values().data();
        double* od = out.values().data();

        Vec3i p;
        for (p.k = w.lo.k; p.k < w.lo.k + w.n.k; ++p.k) {
            const bool kin = p.k > w.lo.k && p.k < w.lo.k + w.n.k - 1;
            for (p.j = w.lo.j; p.j < w.lo.j + w.n.j; ++p.j) {
                const bool jin = p.j > w.lo.j && p.j < w.lo.j + w.n.j - 1;
                const std::int64_t row =
                    (static_cast<std::int64_t>(p.k - w.lo.k) * w.n.j + (p.j - w.lo.j)) * w.n.i;
                if (kin && jin && w.n.i > 2) {
                    // Interior fast path: all six neighbours stay in bounds.
                    for (std::int64_t q = 1; q < w.n.i - 1; ++q) {
                        const std::int64_t c = row + q;
                        const double a0 = r * u0[c];
                        const double a1 = r * u1[c];
                        const double a2 = r * u2[c];
                        double acc = kSeventh * gd[c];
                        acc += (kSeventh + a0) * gd[c - sx];
                        acc += (kSeventh - a0) * gd[c + sx];
                        acc += (kSeventh + a1) * gd[c - sy];
                        acc += (kSeventh - a1) * gd[c + sy];
                        acc += (kSeventh + a2) * gd[c - sz];
                        acc += (kSeventh - a2) * gd[c + sz];
                        od[c] = acc;
                    }
                    // Row ends through the checked path.
                    for (int q : {0, w.n.i - 1}) {
                        p.i = w.lo.i + q;
                        double acc = kSeventh * g.at(p);
                        for (int axis = 0; axis < 3; ++axis) {
                            const Vec3i e = unit_offset(axis, 1);
                            const double a = r * u.c[axis].at(p);
                            acc += (kSeventh + a) * g.at(p - e);
                            acc += (kSeventh - a) * g.at(p + e);
                        }
                        od[row + q] = acc;
                    }
                } else {
                    for (int q = 0; q < w.n.i; ++q) {
                        p.i = w.lo.i + q;
                        double acc = kSeventh * g.at(p);
                        for (int axis = 0; axis < 3; ++axis) {
                            const Vec3i e = unit_offset(axis, 1);
                            const double a = r * u.c[axis].at(p);
                            acc += (kSeventh + a) * g.at(p - e);
                            acc += (kSeventh - a) * g.at(p + e);
                        }
                        od[row + q] = acc;
                    }
                }
            }
        }
    } else {
        out.transform([&](const Vec3i& p, double) {
            double acc = kSeventh * g.at(p);
            for (int axis = 0; axis < 3; ++axis) {
                const Vec3i e = unit_offset(axis, 1);
                const double a = r * u.c[axis].at(p);
                acc += (kSeventh + a) * g.at(p - e);
                acc += (kSeventh - a) * g.at(p + e);
            }
            return acc;
        });
    }

    StepDiagnostics diag;
    diag.u_sup = sup_abs_of(u);
    diag.min_weight = kSeventh - r * diag.u_sup;
    if (with_diagnostics) {
        divergence_extremes(u, h, diag.div_min, diag.div_max);
        PairwiseAccumulator acc;
        acc.reserve(static_cast<size_t>(out.window().count()));
        for (double v : out.values()) acc.push(v);
        diag.mass = acc.total() * h * h * h;
        diag.sup_abs = sup_abs_of(out);
    }
    return diag;
}

// ============================================================================
// Run driver
// ============================================================================

ExplicitRun run_explicit(const ExplicitConfig& cfg) {
    if (cfg.velocity == nullptr) throw ConfigError("run_explicit: velocity not set");
    if (!cfg.initial) throw ConfigError("run_explicit: initial datum not set");
    if (cfg.grid.h != cfg.params.h)
        throw ConfigError("run_explicit: grid.h and params.h disagree");
    if (cfg.params.truncation_enabled) {
        const ScalingCheck gate = check_scaling(cfg.params);
        if (!gate.ok()) throw ConfigError("run_explicit: " + gate.describe());
    } else if (!(cfg.params.tau > 0.0)) {
        throw ConfigError("run_explicit: tau must be positive");
    }

    ExplicitRun run;
    run.time = make_time_grid(cfg.params.tau, cfg.t_final);
    run.g = average_initial(cfg.grid, cfg.universe, cfg.initial, cfg.quad_space_order);
    if (cfg.on_step) cfg.on_step(0, 0.0, run.g);

    const double h = cfg.params.h;
    const double h3 = h * h * h;
    const double tau = cfg.params.tau;
    const double threshold = cfg.params.truncation_threshold();
    run.steps.reserve(static_cast<size_t>(run.time.n_steps));

    // Steady velocities are averaged and clamped once and reused each step.
    const bool steady = cfg.velocity->time_independent;
    VectorField u_cached(IndexBox{{0, 0, 0}, {1, 1, 1}});
    std::array<std::int64_t, 3> clamp_cached{0, 0, 0};
    std::array<double, 3> cube_cached{0.0, 0.0, 0.0};
    bool cached = false;

    ScalarField g_next(cfg.universe);
    for (int n = 0; n < run.time.n_steps; ++n) {
        const double t0 = run.time.time(n);
        const double t1 = run.time.time(n + 1);

        std::array<std::int64_t, 3> clamped{0, 0, 0};
        std::array<double, 3> cubes{0.0, 0.0, 0.0};
        const VectorField* u_step = nullptr;
        VectorField u_local(IndexBox{{0, 0, 0}, {1, 1, 1}});
        if (steady && cached) {
            u_step = &u_cached;
            clamped = clamp_cached;
            cubes = cube_cached;
        } else {
            VectorField u_avg = average_velocity(cfg.grid, cfg.universe, *cfg.velocity, t0, t1,
                                                 cfg.quad_space_order, cfg.quad_time_order);
            if (cfg.params.truncation_enabled) {
                TruncationResult tr = truncate_velocity(u_avg, threshold);
                u_avg = std::move(tr.u);
                clamped = tr.clamped_count;
            }
            for (int c = 0; c < 3; ++c) {
                PairwiseAccumulator acc;
                for (double s : u_avg.c[c].values()) acc.push(std::abs(s) * s * s);
                cubes[static_cast<size_t>(c)] = acc.total() * h3;
            }
            if (steady) {
                u_cached = std::move(u_avg);
                clamp_cached = clamped;
                cube_cached = cubes;
                cached = true;
                u_step = &u_cached;
            } else {
                u_local = std::move(u_avg);
                u_step = &u_local;
            }
        }

        StepDiagnostics diag =
            step_explicit(g_next, run.g, *u_step, cfg.params, cfg.with_diagnostics);
        diag.clamped = clamped;
        if (cfg.check_cfl && diag.min_weight < -1e-14) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "run_explicit: negative stencil weight %.6g at step %d "
                          "(sup |u| = %.6g, tau / 2h = %.6g)",
                          diag.min_weight, n, diag.u_sup, tau / (2.0 * h));
            throw SolverError(buf);
        }
        std::swap(run.g, g_next);
        if (run.support_cap_step < 0 && rim_nonzero(run.g)) run.support_cap_step = n + 1;

        const std::int64_t clamp_step = clamped[0] + clamped[1] + clamped[2];
        run.clamped_total += clamp_step;
        run.measure.measure_sum += static_cast<double>(clamp_step) * h3 * tau;
        for (int c = 0; c < 3; ++c)
            run.measure.l3_sum[static_cast<size_t>(c)] += cubes[static_cast<size_t>(c)] * tau;
        run.cfl_fraction =
            std::max(run.cfl_fraction, diag.u_sup * tau / (2.0 * h * kSeventh));
        run.steps.push_back(diag);
        if (cfg.on_step) cfg.on_step(n + 1, t1, run.g);
    }
    return run;
}

// ============================================================================
// Stability and comparison certificates
// ============================================================================

std::vector<LpGrowthRow> lp_growth_bound(const std::vector<ScalarField>& history,
                                         const std::vector<VectorField>& velocities,
                                         const SchemeParams& params, double p) {
    if (p < 1.0) throw NumericError("lp_growth_bound: p must be at least 1");
    if (history.size() != velocities.size() + 1)
        throw NumericError("lp_growth_bound: need one state per step boundary");
    const double h = params.h;
    const double h3 = h * h * h;

    auto power_sum = [&](const ScalarField& f) {
        PairwiseAccumulator acc;
        acc.reserve(f.values().size());
        for (double v : f.values()) acc.push(std::pow(std::abs(v), p));
        return acc.total() * h3;
    };

    std::vector<LpGrowthRow> rows;
    rows.reserve(velocities.size());
    double prev = power_sum(history.front());
    for (size_t n = 0; n < velocities.size(); ++n) {
        const VectorField& u = velocities[n];
        PairwiseAccumulator div_acc;
        history[n].for_each([&](const Vec3i& q, double v) {
            if (v == 0.0) return;
            double d = 0.0;
            for (int axis = 0; axis < 3; ++axis) {
                const Vec3i e = unit_offset(axis, 1);
                d += u.c[axis].at(q + e) - u.c[axis].at(q - e);
            }
            div_acc.push(d / (2.0 * h) * std::pow(std::abs(v), p));
        });
        LpGrowthRow row;
        row.rhs = prev + params.tau * h3 * div_acc.total();
        row.lhs = power_sum(history[n + 1]);
        rows.push_back(row);
        prev = row.lhs;
    }
    return rows;
}

std::vector<double> compare_runs(const ExplicitConfig& low, const ExplicitConfig& high) {
    if (!(low.universe.lo == high.universe.lo && low.universe.n == high.universe.n) ||
        low.params.h != high.params.h || low.params.tau != high.params.tau ||
        low.t_final != high.t_final)
        throw ConfigError("compare_runs: runs must share universe, params and horizon");

    std::vector<ScalarField> states_low;
    ExplicitConfig a = low;
    a.on_step = [&](int, double, const ScalarField& g) { states_low.push_back(g); };
    run_explicit(a);

    std::vector<double> gaps;
    gaps.reserve(states_low.size());
    ExplicitConfig b = high;
    size_t idx = 0;
    b.on_step = [&](int, double, const ScalarField& g) {
        const ScalarField& other = states_low.at(idx++);
        double gap = std::numeric_limits<double>::infinity();
        const auto lo_vals = other.values();
        const auto hi_vals = g.values();
        for (size_t q = 0; q < hi_vals.size(); ++q)
            gap = std::min(gap, hi_vals[q] - lo_vals[q]);
        gaps.push_back(gap);
    };
    run_explicit(b);
    return gaps;
}

// ============================================================================
// Weak forms
// ============================================================================

WeakFormReport weak_form_identity(const std::vector<ScalarField>& history,
                                  const std::vector<VectorField>& velocities,
                                  const GridSpec& grid, const SchemeParams& params,
                                  const std::function<double(double, const Vec3&)>& phi,
                                  const TimeGrid& time) {
    if (history.size() != velocities.size() + 1)
        throw NumericError("weak_form_identity: need one state per step boundary");
    const int steps = static_cast<int>(velocities.size());
    const double h = params.h;
    const double h3 = h * h * h;

    auto sample_phi = [&](double t, const IndexBox& box) {
        return sample_nodes(grid, box, [&](const Vec3& x) { return phi(t, x); });
    };

    WeakFormReport report;
    {
        const ScalarField& g0 = history.front();
        const ScalarField& gN = history.back();
        const ScalarField phi0 = sample_phi(time.time(0), g0.window());
        const ScalarField phiN = sample_phi(time.time(steps), gN.window());
        report.boundary_term = inner_product(gN, phiN, h) - inner_product(g0, phi0, h);
    }

    PairwiseAccumulator time_acc, avg_acc, adv_acc;
    for (int n = 0; n < steps; ++n) {
        const ScalarField& g = history[static_cast<size_t>(n)];
        const ScalarField& g_next = history[static_cast<size_t>(n) + 1];
        const VectorField& u = velocities[static_cast<size_t>(n)];
        // phi at t_n is read on g's grown window and on g_next's window.
        IndexBox hull = g.window().grown(1);
        const IndexBox& wn = g_next.window();
        for (int axis = 0; axis < 3; ++axis) {
            const int lo = std::min(hull.lo[axis], wn.lo[axis]);
            const int hi = std::max(hull.lo[axis] + hull.n[axis], wn.lo[axis] + wn.n[axis]);
            hull.lo[axis] = lo;
            hull.n[axis] = hi - lo;
        }
        const ScalarField phi_cur = sample_phi(time.time(n), hull);
        const ScalarField phi_next = sample_phi(time.time(n + 1), g_next.window());

        g_next.for_each([&](const Vec3i& p, double v) {
            if (v != 0.0) time_acc.push(v * (phi_next.at(p) - phi_cur.at(p)) * h3);
        });
        g.for_each([&](const Vec3i& p, double v) {
            if (v == 0.0) return;
            double m7 = phi_cur.at(p);
            double adv = 0.0;
            for (int axis = 0; axis < 3; ++axis) {
                const Vec3i e = unit_offset(axis, 1);
                const double fp = phi_cur.at(p + e);
                const double fm = phi_cur.at(p - e);
                m7 += fp + fm;
                adv += (u.c[axis].at(p + e) * fp - u.c[axis].at(p - e) * fm) / (2.0 * h);
            }
            avg_acc.push(v * (m7 / 7.0 - phi_cur.at(p)) * h3);
            adv_acc.push(v * adv * params.tau * h3);
        });
    }
    report.time_term = time_acc.total();
    report.average_term = avg_acc.total();
    report.advection_term = adv_acc.total();
    report.scale = std::abs(report.boundary_term) + std::abs(report.time_term) +
                   std::abs(report.average_term) + std::abs(report.advection_term);
    return report;
}

WeakFormResidual weak_form_residual(const std::vector<ScalarField>& history,
                                    const std::vector<VectorField>& velocities,
                                    const GridSpec& grid, const SchemeParams& params,
                                    const std::function<double(double, const Vec3&)>& phi,
                                    const std::function<double(double, const Vec3&)>& dt_phi,
                                    const std::function<Vec3(double, const Vec3&)>& grad_phi,
                                    const TimeGrid& time) {
    if (history.size() != velocities.size() + 1)
        throw NumericError("weak_form_residual: need one state per step boundary");
    const int steps = static_cast<int>(velocities.size());
    const double h = params.h;
    const double h3 = h * h * h;
    const double tau = params.tau;

    // The final boundary term sum_x g^N phi(t_N, x) h^3 is dropped, which is
    // only legitimate when phi has already vanished at the last discrete time.
    {
        const double t_last = time.time(steps);
        bool vanishes = true;
        history.back().for_each([&](const Vec3i& p, double) {
            if (vanishes && phi(t_last, grid.position(p)) != 0.0) vanishes = false;
        });
        if (!vanishes)
            throw ConfigError("weak_form_residual: test function must vanish near the final time");
    }

    WeakFormResidual res;
    {
        PairwiseAccumulator acc;
        history.front().for_each([&](const Vec3i& p, double v) {
            if (v != 0.0) acc.push(v * phi(0.0, grid.position(p)) * h3);
        });
        res.initial_term = acc.total();
    }

    PairwiseAccumulator time_acc, div_acc, adv_acc, quad_acc, time_rem_acc, avg_rem_acc;
    for (int n = 0; n < steps; ++n) {
        const double t_cur = time.time(n);
        const double t_next = time.time(n + 1);
        const VectorField& u = velocities[static_cast<size_t>(n)];

        history[static_cast<size_t>(n)].for_each([&](const Vec3i& p, double v) {
            if (v == 0.0) return;
            const Vec3 x = grid.position(p);
            const double phi_c = phi(t_cur, x);
            const Vec3 dphi = grad_phi(t_cur, x);
            double m7 = phi_c;
            for (int axis = 0; axis < 3; ++axis) {
                const Vec3i e = unit_offset(axis, 1);
                const Vec3 xp = grid.position(p + e);
                const Vec3 xm = grid.position(p - e);
                const double phi_p = phi(t_cur, xp);
                const double phi_m = phi(t_cur, xm);
                m7 += phi_p + phi_m;
                const double du = (u.c[axis].at(p + e) - u.c[axis].at(p - e)) / (2.0 * h);
                const double central = (phi_p - phi_m) / (2.0 * h);
                div_acc.push(du * v * phi_m * h3 * tau);
                adv_acc.push(u.c[axis].at(p + e) * v * dphi[axis] * h3 * tau);
                quad_acc.push(u.c[axis].at(p + e) * v * (central - dphi[axis]) * h3 * tau);
            }
            avg_rem_acc.push(v * (m7 / 7.0 - phi_c) * h3);
        });
        history[static_cast<size_t>(n) + 1].for_each([&](const Vec3i& p, double v) {
            if (v == 0.0) return;
            const Vec3 x = grid.position(p);
            const double dphi_t = dt_phi(t_next, x);
            time_acc.push(v * dphi_t * h3 * tau);
            time_rem_acc.push(v * ((phi(t_next, x) - phi(t_cur, x)) - tau * dphi_t) * h3);
        });
    }
    res.time_term = time_acc.total();
    res.divergence_term = div_acc.total();
    res.advection_term = adv_acc.total();
    res.quadrature_term = quad_acc.total();
    res.time_remainder = time_rem_acc.total();
    res.averaging_remainder = avg_rem_acc.total();
    res.scale = std::abs(res.initial_term) + std::abs(res.time_term) +
                std::abs(res.divergence_term) + std::abs(res.advection_term) +
                std::abs(res.quadrature_term) + std::abs(res.time_remainder) +
                std::abs(res.averaging_remainder);
    return res;
}

}  // namespace tfd
