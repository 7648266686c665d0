#include "tfd/reference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include "tfd/errors.hpp"

namespace tfd {

// ============================================================================
// Flow map
// ============================================================================

double default_flow_substep(double tau, double t_final) {
    if (!(tau > 0.0) || !(t_final > 0.0))
        throw ConfigError("flow substep: need tau > 0 and t_final > 0");
    return std::min(tau / 4.0, 1e-3 * t_final);
}

namespace {

void check_inside(const FlowIntegratorConfig& cfg, const Vec3& x) {
    for (int axis = 0; axis < 3; ++axis)
        if (x[axis] < cfg.box_lo[axis] - cfg.escape_margin ||
            x[axis] > cfg.box_hi[axis] + cfg.escape_margin)
            throw NumericError("flow map: trajectory left the integration box");
}

Vec3 rk4_step(const VelocityField& v, double t, double dt, const Vec3& x) {
    const Vec3 k1 = v.value(t, x);
    const Vec3 k2 = v.value(t + 0.5 * dt, x + (0.5 * dt) * k1);
    const Vec3 k3 = v.value(t + 0.5 * dt, x + (0.5 * dt) * k2);
    const Vec3 k4 = v.value(t + dt, x + dt * k3);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vec3 integrate_fixed(const VelocityField& v, const FlowIntegratorConfig& cfg, double s,
                     double tau0, Vec3 x) {
    const double total = s - tau0;
    const int n_sub =
        std::max(1, static_cast<int>(std::ceil(std::abs(total) / cfg.max_substep)));
    const double ds = total / n_sub;
    for (int q = 0; q < n_sub; ++q) {
        x = rk4_step(v, tau0 + ds * q, ds, x);
        check_inside(cfg, x);
    }
    return x;
}

/// One embedded Dormand-Prince 5(4) stage; returns the 5th-order update and
/// the infinity norm of the local error estimate.
Vec3 dp45_step(const VelocityField& v, double t, double dt, const Vec3& x, double& err) {
    const Vec3 k1 = v.value(t, x);
    const Vec3 k2 = v.value(t + dt / 5.0, x + (dt / 5.0) * k1);
    const Vec3 k3 = v.value(t + 3.0 * dt / 10.0, x + dt * ((3.0 / 40.0) * k1 + (9.0 / 40.0) * k2));
    const Vec3 k4 = v.value(t + 4.0 * dt / 5.0,
                            x + dt * ((44.0 / 45.0) * k1 + (-56.0 / 15.0) * k2 + (32.0 / 9.0) * k3));
    const Vec3 k5 =
        v.value(t + 8.0 * dt / 9.0,
                x + dt * ((19372.0 / 6561.0) * k1 + (-25360.0 / 2187.0) * k2 +
                          (64448.0 / 6561.0) * k3 + (-212.0 / 729.0) * k4));
    const Vec3 k6 = v.value(
        t + dt, x + dt * ((9017.0 / 3168.0) * k1 + (-355.0 / 33.0) * k2 + (46732.0 / 5247.0) * k3 +
                          (49.0 / 176.0) * k4 + (-5103.0 / 18656.0) * k5));
    const Vec3 x5 = x + dt * ((35.0 / 384.0) * k1 + (500.0 / 1113.0) * k3 + (125.0 / 192.0) * k4 +
                              (-2187.0 / 6784.0) * k5 + (11.0 / 84.0) * k6);
    const Vec3 k7 = v.value(t + dt, x5);
    const Vec3 x4 = x + dt * ((5179.0 / 57600.0) * k1 + (7571.0 / 16695.0) * k3 +
                              (393.0 / 640.0) * k4 + (-92097.0 / 339200.0) * k5 +
                              (187.0 / 2100.0) * k6 + (1.0 / 40.0) * k7);
    err = norm_inf(x5 - x4);
    return x5;
}

Vec3 integrate_adaptive(const VelocityField& v, const FlowIntegratorConfig& cfg, double s,
                        double tau0, Vec3 x) {
    const double dir = (s >= tau0) ? 1.0 : -1.0;
    double t = tau0;
    double dt = dir * std::min(cfg.max_substep, std::abs(s - tau0));
    const double span = std::abs(s - tau0);
    std::int64_t iterations = 0;
    while (dir * (s - t) > 0.0) {
        if (std::abs(dt) < 1e-15 * (1.0 + span))
            throw NumericError("flow map: adaptive step underflow");
        if (++iterations > 100000000) throw NumericError("flow map: adaptive step stalled");
        double err = 0.0;
        const Vec3 trial = dp45_step(v, t, dt, x, err);
        const double target = cfg.tolerance * (1.0 + norm_inf(x));
        if (err <= target) {
            x = trial;
            t += dt;
            check_inside(cfg, x);
        }
        const double factor =
            (err > 0.0) ? std::clamp(0.9 * std::pow(target / err, 0.2), 0.2, 5.0) : 5.0;
        dt *= factor;
        const double cap = std::min(cfg.max_substep, std::abs(s - t));
        if (std::abs(dt) > cap) dt = dir * cap;
        if (dt == 0.0) break;
    }
    return x;
}

}  // namespace

Vec3 FlowMap::flow(double s, double tau0, const Vec3& xi) const {
    if (!velocity.value) throw ConfigError("flow map: velocity sampler is empty");
    if (!(cfg.max_substep > 0.0)) throw ConfigError("flow map: max_substep must be positive");
    check_inside(cfg, xi);
    if (s == tau0) return xi;
    return cfg.adaptive ? integrate_adaptive(velocity, cfg, s, tau0, xi)
                        : integrate_fixed(velocity, cfg, s, tau0, xi);
}

Mat3 FlowMap::flow_jacobian(double s, double tau0, const Vec3& xi, double dx) const {
    if (!(dx > 0.0)) throw ConfigError("flow jacobian: dx must be positive");
    Mat3 jac;
    for (int col = 0; col < 3; ++col) {
        Vec3 xp = xi, xm = xi;
        xp[col] += dx;
        xm[col] -= dx;
        const Vec3 fp = flow(s, tau0, xp);
        const Vec3 fm = flow(s, tau0, xm);
        for (int row = 0; row < 3; ++row) jac(row, col) = (fp[row] - fm[row]) / (2.0 * dx);
    }
    return jac;
}

// ============================================================================
// Exact transported solution
// ============================================================================

namespace {

/// Rotation about the x3-axis by the angle theta.
Vec3 rotate_z(double theta, const Vec3& x) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * x.x - s * x.y, s * x.x + c * x.y, x.z};
}

Mat3 rot_z_mat(double theta) {
    Mat3 r;
    const double c = std::cos(theta), s = std::sin(theta);
    r(0, 0) = c;
    r(0, 1) = -s;
    r(1, 0) = s;
    r(1, 1) = c;
    r(2, 2) = 1.0;
    return r;
}

Mat3 mat_mul(const Mat3& a, const Mat3& b) {
    Mat3 out;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            out(r, c) = a(r, 0) * b(0, c) + a(r, 1) * b(1, c) + a(r, 2) * b(2, c);
    return out;
}

bool inside_rigid(const VelocityField& v, const Vec3& x) {
    return std::hypot(x.x, x.y) <= v.rigid_radius && std::abs(x.z) <= v.rigid_halfheight;
}

}  // namespace

ExactSolution make_exact_solution(const InitialData& f0, const VelocityField& v,
                                  const FlowIntegratorConfig& cfg) {
    ExactSolution ex;
    ex.f0 = f0;
    ex.flow = FlowMap{v, cfg};
    ex.closed_value = v.planar_rotation && static_cast<bool>(v.spin);
    if (ex.closed_value) {
        const double r_support =
            std::hypot(f0.support_center.x, f0.support_center.y) + f0.support_radius;
        const double z_support = std::abs(f0.support_center.z) + f0.support_radius;
        ex.closed_derivatives =
            r_support <= v.rigid_radius && z_support <= v.rigid_halfheight;
    }
    return ex;
}

double ExactSolution::value(double t, const Vec3& x) const {
    if (value_override) return value_override(t, x);
    if (closed_value) return f0.value(rotate_z(-flow.velocity.spin(x) * t, x));
    return f0.value(flow.flow(0.0, t, x));
}

Vec3 ExactSolution::gradient(double t, const Vec3& x) const {
    if (gradient_override) return gradient_override(t, x);
    if (!closed_derivatives)
        throw ConfigError(
            "exact solution: analytic derivatives need a rigid-transport preset whose "
            "initial support fits the rigid cylinder");
    // Cylinder radius and height are conserved, so the solution vanishes
    // identically outside the rigid cylinder containing the initial support.
    if (!inside_rigid(flow.velocity, x)) return {};
    const double theta = -flow.velocity.omega * t;
    const Vec3 g0 = f0.gradient(rotate_z(theta, x));
    return rotate_z(-theta, g0);
}

Mat3 ExactSolution::hessian(double t, const Vec3& x) const {
    if (hessian_override) return hessian_override(t, x);
    if (!closed_derivatives)
        throw ConfigError(
            "exact solution: analytic derivatives need a rigid-transport preset whose "
            "initial support fits the rigid cylinder");
    if (!inside_rigid(flow.velocity, x)) return {};
    const double theta = -flow.velocity.omega * t;
    const Mat3 a = rot_z_mat(theta);
    const Mat3 at = rot_z_mat(-theta);
    const Mat3 h0 = f0.hessian(rotate_z(theta, x));
    return mat_mul(at, mat_mul(h0, a));
}

// ============================================================================
// Derivative error cascade
// ============================================================================

namespace {

DerivativeErrorRow cascade_row(int n, double t, const ScalarField& g, const GridSpec& grid,
                               const ExactSolution& oracle) {
    DerivativeErrorRow row;
    row.n = n;
    row.t = t;
    const double h = grid.h;
    const VelocityField& v = oracle.flow.velocity;
    // A = R(-omega t) pulls a point back along the rigid rotation.
    const double theta = -v.omega * t;
    const Mat3 a = rot_z_mat(theta);
    const Mat3 at = rot_z_mat(-theta);

    const IndexBox valid = g.window().grown(-1);
    for (int k = valid.lo.k; k < valid.lo.k + valid.n.k; ++k)
        for (int j = valid.lo.j; j < valid.lo.j + valid.n.j; ++j)
            for (int i = valid.lo.i; i < valid.lo.i + valid.n.i; ++i) {
                const Vec3i p{i, j, k};
                const Vec3 pos = grid.position(p);
                double fval = 0.0;
                Vec3 grad{};
                Mat3 hess{};
                if (oracle.value_override) {
                    fval = oracle.value(t, pos);
                    grad = oracle.gradient(t, pos);
                    hess = oracle.hessian(t, pos);
                } else if (inside_rigid(v, pos)) {
                    const Vec3 y = rotate_z(theta, pos);
                    fval = oracle.f0.value(y);
                    grad = rotate_z(-theta, oracle.f0.gradient(y));
                    hess = mat_mul(at, mat_mul(oracle.f0.hessian(y), a));
                }
                const double g0 = g.at(p);
                row.value_err = std::max(row.value_err, std::abs(g0 - fval));
                for (int ax = 0; ax < 3; ++ax) {
                    const Vec3i e = unit_offset(ax, 1);
                    const double d1 = (g.at(p + e) - g0) / h;
                    row.grad_err = std::max(row.grad_err, std::abs(d1 - grad[ax]));
                    for (int bx = 0; bx < 3; ++bx) {
                        const Vec3i eb = unit_offset(bx, 1);
                        const double d2 =
                            ((g.at(p + e) - g0) - (g.at(p + e - eb) - g.at(p - eb))) / (h * h);
                        row.hess_err = std::max(row.hess_err, std::abs(d2 - hess(ax, bx)));
                    }
                }
            }
    return row;
}

void finalize_cascade(ErrorCascade& cascade, const SchemeParams& params) {
    const double h_alpha = std::pow(params.h, params.alpha);
    for (size_t q = 0; q < cascade.rows.size(); ++q) {
        const DerivativeErrorRow& row = cascade.rows[q];
        cascade.value_sup = std::max(cascade.value_sup, row.value_err);
        cascade.grad_sup = std::max(cascade.grad_sup, row.grad_err);
        cascade.hess_sup = std::max(cascade.hess_sup, row.hess_err);
        if (q > 0) {
            const double prev = cascade.rows[q - 1].grad_err;
            const double growth = row.grad_err - prev;
            if (growth > 0.0)
                cascade.growth_constant = std::max(
                    cascade.growth_constant, growth / (params.tau * (prev + h_alpha)));
        }
    }
}

void require_closed_derivatives(const ExactSolution& oracle) {
    if (!oracle.closed_derivatives)
        throw ConfigError(
            "error cascade: the oracle must provide analytic derivatives "
            "(rigid-transport preset with the support inside the rigid cylinder)");
}

}  // namespace

ErrorCascade error_cascade(const std::vector<ScalarField>& history, const GridSpec& grid,
                           const TimeGrid& time, const SchemeParams& params,
                           const ExactSolution& oracle) {
    require_closed_derivatives(oracle);
    if (history.size() != static_cast<size_t>(time.n_steps) + 1)
        throw ConfigError("error cascade: history must hold n_steps + 1 states");
    ErrorCascade cascade;
    cascade.rows.reserve(history.size());
    for (size_t n = 0; n < history.size(); ++n)
        cascade.rows.push_back(cascade_row(static_cast<int>(n), time.time(static_cast<int>(n)),
                                           history[n], grid, oracle));
    finalize_cascade(cascade, params);
    return cascade;
}

ErrorCascade error_cascade_run(const ExplicitConfig& cfg, const ExactSolution& oracle) {
    require_closed_derivatives(oracle);
    ErrorCascade cascade;
    ExplicitConfig run_cfg = cfg;
    run_cfg.on_step = [&](int n, double t, const ScalarField& g) {
        cascade.rows.push_back(cascade_row(n, t, g, cfg.grid, oracle));
        if (cfg.on_step) cfg.on_step(n, t, g);
    };
    run_explicit(run_cfg);
    finalize_cascade(cascade, cfg.params);
    return cascade;
}

CascadeStudy fit_cascade_orders(std::vector<CascadeStudyRow> rows) {
    if (rows.size() < 2) throw ConfigError("cascade study: need at least two resolutions");
    std::sort(rows.begin(), rows.end(),
              [](const CascadeStudyRow& a, const CascadeStudyRow& b) { return a.h > b.h; });
    std::vector<double> log_h, log_value, log_grad, log_hess;
    for (const CascadeStudyRow& row : rows) {
        if (!(row.h > 0.0)) throw ConfigError("cascade study: resolutions must be positive");
        log_h.push_back(std::log(row.h));
        const double floor_err = std::numeric_limits<double>::min();
        log_value.push_back(std::log(std::max(row.value_sup, floor_err)));
        log_grad.push_back(std::log(std::max(row.grad_sup, floor_err)));
        log_hess.push_back(std::log(std::max(row.hess_sup, floor_err)));
    }
    CascadeStudy study;
    study.rows = std::move(rows);
    study.value_order = least_squares_slope(log_h, log_value);
    study.grad_order = least_squares_slope(log_h, log_grad);
    study.hess_order = least_squares_slope(log_h, log_hess);
    return study;
}

// ============================================================================
// Derivative recursion check
// ============================================================================

RecursionDefect derivative_recursion_check(const std::vector<ScalarField>& history,
                                           const std::vector<VectorField>& velocities,
                                           const SchemeParams& params) {
    if (history.size() < 2 || history.size() != velocities.size() + 1)
        throw ConfigError("recursion check: need n_steps + 1 states and n_steps velocities");
    const double h = params.h, tau = params.tau;
    const double seventh = 1.0 / 7.0;
    RecursionDefect out;

    const auto same_box = [](const IndexBox& a, const IndexBox& b) {
        return a.lo == b.lo && a.n == b.n;
    };
    for (size_t n = 0; n < velocities.size(); ++n) {
        const ScalarField& g = history[n];
        const ScalarField& g_next = history[n + 1];
        const VectorField& u = velocities[n];
        if (!same_box(g.window(), g_next.window()) || !same_box(g.window(), u.window()))
            throw ConfigError("recursion check: states and velocities must share one window");

        std::array<ScalarField, 3> gi, gi_next;
        std::array<std::array<ScalarField, 3>, 3> gij, gij_next;
        for (int a = 0; a < 3; ++a) {
            const size_t ia = static_cast<size_t>(a);
            gi[ia] = forward_diff(g, a, h);
            gi_next[ia] = forward_diff(g_next, a, h);
            for (int b = 0; b < 3; ++b) {
                gij[ia][static_cast<size_t>(b)] = backward_diff(gi[ia], b, h);
                gij_next[ia][static_cast<size_t>(b)] = backward_diff(gi_next[ia], b, h);
            }
        }

        auto m7 = [&](const ScalarField& f, const Vec3i& p) {
            double acc = f.at(p);
            for (int a = 0; a < 3; ++a) {
                const Vec3i e = unit_offset(a, 1);
                acc += f.at(p - e) + f.at(p + e);
            }
            return seventh * acc;
        };
        auto central = [&](const ScalarField& f, const Vec3i& p, int a) {
            const Vec3i e = unit_offset(a, 1);
            return (f.at(p + e) - f.at(p - e)) / (2.0 * h);
        };

        const IndexBox valid = g.window().grown(-1);
        for (int kk = valid.lo.k; kk < valid.lo.k + valid.n.k; ++kk)
            for (int jj = valid.lo.j; jj < valid.lo.j + valid.n.j; ++jj)
                for (int ii = valid.lo.i; ii < valid.lo.i + valid.n.i; ++ii) {
                    const Vec3i p{ii, jj, kk};
                    for (int a = 0; a < 3; ++a) {
                        const size_t ia = static_cast<size_t>(a);
                        const Vec3i ea = unit_offset(a, 1);
                        const ScalarField& ga = gi[ia];

                        // First-derivative recursion at (p, a).
                        const double avg = m7(ga, p);
                        double adv = 0.0, coupling = 0.0;
                        for (int b = 0; b < 3; ++b) {
                            const Vec3i eb = unit_offset(b, 1);
                            const ScalarField& ub = u.c[b];
                            adv += ub.at(p + ea) * central(ga, p, b);
                            const double dui = (ub.at(p + ea) - ub.at(p)) / h;
                            coupling +=
                                dui * (gi[static_cast<size_t>(b)].at(p) +
                                       gi[static_cast<size_t>(b)].at(p - eb));
                        }
                        const double rhs = avg - tau * adv - 0.5 * tau * coupling;
                        const double lhs = gi_next[ia].at(p);
                        out.first = std::max(out.first, std::abs(lhs - rhs));
                        out.first_scale = std::max(
                            out.first_scale, std::abs(avg) + tau * std::abs(adv) +
                                                 0.5 * tau * std::abs(coupling) + std::abs(lhs));

                        // Second-derivative recursions at (p, a, b).
                        for (int b = 0; b < 3; ++b) {
                            const size_t ib = static_cast<size_t>(b);
                            const Vec3i eb = unit_offset(b, 1);
                            const ScalarField& gab = gij[ia][ib];

                            const double avg2 = m7(gab, p);
                            double adv2 = 0.0, mid = 0.0, coup2 = 0.0, cross = 0.0;
                            for (int c = 0; c < 3; ++c) {
                                const size_t ic = static_cast<size_t>(c);
                                const Vec3i ec = unit_offset(c, 1);
                                const ScalarField& uc = u.c[c];
                                adv2 += uc.at(p + ea) * central(gab, p, c);
                                const double du_mid =
                                    (uc.at(p + ea) - uc.at(p + ea - eb)) / h;
                                mid += du_mid * central(ga, p - eb, c);
                                const double dui = (uc.at(p + ea) - uc.at(p)) / h;
                                coup2 += dui * (gij[ic][ib].at(p) + gij[ic][ib].at(p - ec));
                                const double ddu =
                                    ((uc.at(p + ea) - uc.at(p)) -
                                     (uc.at(p + ea - eb) - uc.at(p - eb))) /
                                    (h * h);
                                cross += ddu * (gi[ic].at(p - eb) + gi[ic].at(p - eb - ec));
                            }
                            const double rhs2 = avg2 - tau * adv2 - tau * mid -
                                                0.5 * tau * coup2 - 0.5 * tau * cross;
                            const double lhs2 = gij_next[ia][ib].at(p);
                            out.second = std::max(out.second, std::abs(lhs2 - rhs2));
                            out.second_scale =
                                std::max(out.second_scale,
                                         std::abs(avg2) + tau * std::abs(adv2) +
                                             tau * std::abs(mid) + 0.5 * tau * std::abs(coup2) +
                                             0.5 * tau * std::abs(cross) + std::abs(lhs2));
                        }
                    }
                }
    }
    return out;
}

}  // namespace tfd
