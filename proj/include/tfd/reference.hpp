/// @file reference.hpp
/// @brief Method-of-characteristics oracle for smooth velocity presets: ODE
/// flow map, exact transported solution with analytic derivatives, the
/// derivative error cascade of the explicit scheme, and the algebraic
/// derivative recursion check.

#pragma once

#include <functional>
#include <vector>

#include "tfd/explicit_scheme.hpp"
#include "tfd/fields.hpp"
#include "tfd/grid.hpp"
#include "tfd/presets.hpp"
#include "tfd/vec.hpp"

namespace tfd {

// ============================================================================
// Flow map
// ============================================================================

/// @brief Integrator settings for the characteristic ODE x'(s) = v(s, x(s)).
///
/// The fixed-step path is classical RK4 with substep |ds| <= max_substep;
/// the adaptive path is an embedded Dormand-Prince 5(4) pair holding the
/// local error below `tolerance` per unit step (still capped by max_substep).
struct FlowIntegratorConfig {
    double max_substep = 1e-3;
    bool adaptive = false;
    double tolerance = 1e-10;

    /// Trajectories must stay inside the box grown by `escape_margin`;
    /// leaving it raises NumericError (compact presets never do).
    Vec3 box_lo{-2.0, -2.0, -2.0};
    Vec3 box_hi{2.0, 2.0, 2.0};
    double escape_margin = 1.0;
};

/// @brief Substep matched to a scheme run: min(tau / 4, 1e-3 * t_final).
double default_flow_substep(double tau, double t_final);

/// @brief Characteristic flow X(s, tau0, xi): the solution of
/// x'(s) = v(s, x(s)) with x(tau0) = xi, evaluated at time s (backward
/// integration, s < tau0, is supported).
struct FlowMap {
    VelocityField velocity;
    FlowIntegratorConfig cfg;

    Vec3 flow(double s, double tau0, const Vec3& xi) const;

    /// Jacobian dX/dxi by central differences with spatial step dx.
    Mat3 flow_jacobian(double s, double tau0, const Vec3& xi, double dx) const;
};

// ============================================================================
// Exact transported solution
// ============================================================================

/// @brief The transported profile f(t, x) = f0(X(0, t, x)).
///
/// For the planar-rotation velocity family the backward characteristic
/// through x is the closed-form rotation by -spin(x) * t (cylinder radius and
/// height are conserved, so the angular speed is constant along it); `value`
/// then bypasses the ODE integrator.  When the support of f0 additionally
/// fits inside the rigid cylinder, the transport there is the rigid rotation
/// R(omega t), gradients and Hessians are available in closed form:
///   grad f(t, x) = A^T grad f0(A x),  hess f(t, x) = A^T hess f0(A x) A
/// with A = R(-omega t), and both vanish identically outside the cylinder.
struct ExactSolution {
    InitialData f0;
    FlowMap flow;

    bool closed_value = false;        ///< planar-rotation fast path for value()
    bool closed_derivatives = false;  ///< support inside the rigid cylinder

    /// Bespoke manufactured solution: when set, these replace the preset
    /// composition entirely (set closed_derivatives = true to mark the
    /// derivative hooks as trustworthy for the error cascade).
    std::function<double(double t, const Vec3& x)> value_override;
    std::function<Vec3(double t, const Vec3& x)> gradient_override;
    std::function<Mat3(double t, const Vec3& x)> hessian_override;

    double value(double t, const Vec3& x) const;
    /// Analytic spatial gradient; ConfigError when closed_derivatives is false.
    Vec3 gradient(double t, const Vec3& x) const;
    /// Analytic spatial Hessian; ConfigError when closed_derivatives is false.
    Mat3 hessian(double t, const Vec3& x) const;
};

/// @brief Builds the oracle and decides which closed forms apply.
ExactSolution make_exact_solution(const InitialData& f0, const VelocityField& v,
                                  const FlowIntegratorConfig& cfg);

// ============================================================================
// Derivative error cascade
// ============================================================================

/// @brief Sup-norm errors of one recorded state against the oracle:
///   value_err = max |g^n(x) - f(t_n, x)|,
///   grad_err  = max over i of |D+_i g^n(x) - d_i f(t_n, x)|,
///   hess_err  = max over i, j of |D-_j D+_i g^n(x) - d_j d_i f(t_n, x)|,
/// maxima over the nodes whose +/-1 neighbourhood lies inside the window.
struct DerivativeErrorRow {
    int n = 0;
    double t = 0.0;
    double value_err = 0.0;
    double grad_err = 0.0;
    double hess_err = 0.0;
};

/// @brief Per-step error table of a run, with the growth constant of the
/// gradient-level recursion: with R^n the per-step grad_err,
///   kappa = max_n (R^{n+1} - R^n)_+ / (tau * (R^n + h^alpha)),
/// the smallest joint constant c1 = c2 = kappa with
///   R^{n+1} - R^n <= c1 tau R^n + c2 h^alpha tau  for every step.
struct ErrorCascade {
    std::vector<DerivativeErrorRow> rows;
    double value_sup = 0.0;
    double grad_sup = 0.0;
    double hess_sup = 0.0;
    double growth_constant = 0.0;
};

/// @brief Evaluates the cascade on a stored history (g^0..g^N).
ErrorCascade error_cascade(const std::vector<ScalarField>& history, const GridSpec& grid,
                           const TimeGrid& time, const SchemeParams& params,
                           const ExactSolution& oracle);

/// @brief Runs the explicit scheme and evaluates the cascade per step without
/// storing the history (cfg.on_step is used internally).  The oracle must
/// provide closed-form derivatives; ConfigError otherwise.
ErrorCascade error_cascade_run(const ExplicitConfig& cfg, const ExactSolution& oracle);

/// @brief One resolution of a cascade study.
struct CascadeStudyRow {
    double h = 0.0;
    double value_sup = 0.0;
    double grad_sup = 0.0;
    double hess_sup = 0.0;
    double growth_constant = 0.0;
};

/// @brief Study with fitted convergence orders (least-squares slopes of
/// log error against log h; requires at least two rows).
struct CascadeStudy {
    std::vector<CascadeStudyRow> rows;
    double value_order = 0.0;
    double grad_order = 0.0;
    double hess_order = 0.0;
};

CascadeStudy fit_cascade_orders(std::vector<CascadeStudyRow> rows);

// ============================================================================
// Derivative recursion check
// ============================================================================

/// @brief Worst-case defects of the first- and second-derivative recursions.
///
/// With g_i := D+_i g and g_ij := D-_j g_i, one scheme step implies, at every
/// node whose +/-1 neighbourhood avoids the velocity window rim,
///   g_i^{n+1}(x) = M7 g_i^n(x) - tau u^n(x + h e^i) . D g_i^n(x)
///                  - (tau/2) sum_j D+_i u^n_j(x) (g_j^n(x) + g_j^n(x - h e^j))
/// and
///   g_ij^{n+1}(x) = M7 g_ij^n(x) - tau u^n(x + h e^i) . D g_ij^n(x)
///                   - tau sum_k (D-_j u^n_k)(x + h e^i) D_k g_i^n(x - h e^j)
///                   - (tau/2) sum_k (D+_i u^n_k)(x) (g_kj^n(x) + g_kj^n(x - h e^k))
///                   - (tau/2) sum_k (D-_j D+_i u^n_k)(x)
///                       (g_k^n(x - h e^j) + g_k^n(x - h e^j - h e^k)),
/// exactly; the defects are pure rounding.  `first`/`second` are the max
/// absolute defects, `first_scale`/`second_scale` the max node-wise sums of
/// term magnitudes they should be compared against.
struct RecursionDefect {
    double first = 0.0;
    double second = 0.0;
    double first_scale = 0.0;
    double second_scale = 0.0;
};

RecursionDefect derivative_recursion_check(const std::vector<ScalarField>& history,
                                           const std::vector<VectorField>& velocities,
                                           const SchemeParams& params);

}  // namespace tfd
