/// @file explicit_scheme.hpp
/// @brief Explicit seven-point transport scheme with velocity truncation:
/// parameter gate, single step, full run driver and the exact weak-form
/// identity used for validation.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tfd/fields.hpp"
#include "tfd/grid.hpp"
#include "tfd/presets.hpp"

namespace tfd {

// ============================================================================
// Parameter gate
// ============================================================================

/// @brief Outcome of the exponent/step-size admissibility check for the
/// truncation mode.  The decisive quantity is gate_value = tau * h^(-beta) / h,
/// which must not exceed 2/7: it makes every stencil weight nonnegative under
/// the clamp |u| <= h^(-beta).
struct ScalingCheck {
    bool alpha_positive = false;
    bool beta_above_half = false;
    bool sum_below_one = false;
    bool tau_admissible = false;  ///< 0 < tau <= h^(2 - alpha)
    bool cfl_satisfied = false;   ///< gate_value <= 2/7

    double gate_value = 0.0;      ///< tau * h^(-beta) / h
    double gate_limit = 2.0 / 7.0;
    double canonical_gate = 0.0;  ///< h^(1 - alpha - beta), the value at tau = h^(2-alpha)

    bool ok() const;
    std::string describe() const;  ///< one-line verdict with failing clauses
};

ScalingCheck check_scaling(const SchemeParams& params);

// ============================================================================
// Single step
// ============================================================================

/// @brief Per-step bookkeeping.  The seven stencil weights at each node sum to
/// one exactly, so min gⁿ <= gⁿ⁺¹ <= max gⁿ; mass instead changes by the
/// divergence: the coefficient column of a source node y sums to
/// 1 + tau * (D . u)(y) with D the central difference read with zero
/// extension, whose extremes are div_min / div_max.  min_weight is the
/// smallest possible stencil weight 1/7 - (tau / 2h) * sup|u|.
struct StepDiagnostics {
    double min_weight = 0.0;
    double div_min = 0.0;
    double div_max = 0.0;
    double mass = 0.0;     ///< sum of g^{n+1} h^3 (only when diagnostics are on)
    double sup_abs = 0.0;  ///< max |g^{n+1}|          (idem)
    double u_sup = 0.0;    ///< sup |u_j| over the step velocity
    std::array<std::int64_t, 3> clamped{0, 0, 0};
};

/// @brief One explicit step: out(x) = (1/7) g(x)
///   + sum_j [ (1/7 + (tau/2h) u_j(x)) g(x - h e_j)
///           + (1/7 - (tau/2h) u_j(x)) g(x + h e_j) ],
/// i.e. the seven-point average minus tau * u(x) . D g(x) in non-divergence
/// form.  Reads outside a field's window are zero; `out` must not alias `g`.
/// When `with_diagnostics` is false, mass / sup_abs / div extremes are skipped.
StepDiagnostics step_explicit(ScalarField& out, const ScalarField& g, const VectorField& u,
                              const SchemeParams& params, bool with_diagnostics = true);

// ============================================================================
// Run driver
// ============================================================================

struct ExplicitConfig {
    GridSpec grid;            ///< lattice; grid.h must equal params.h
    IndexBox universe;        ///< fixed allocation window for all states
    SchemeParams params;
    const VelocityField* velocity = nullptr;
    std::function<double(const Vec3&)> initial;  ///< continuum initial datum
    double t_final = 1.0;
    int quad_space_order = 3;
    int quad_time_order = 3;
    bool check_cfl = true;          ///< negative-weight step raises SolverError
    bool with_diagnostics = true;   ///< per-step mass / sup / divergence scans
    /// Called with (n, t_n, g^n) for n = 0 (initial averages) and after every
    /// step; states live on `universe`.
    std::function<void(int, double, const ScalarField&)> on_step;
};

struct ExplicitRun {
    ScalarField g;                        ///< state at time tau * time.n_steps
    TimeGrid time;
    std::vector<StepDiagnostics> steps;   ///< one entry per step
    TruncationMeasure measure;            ///< accumulated clamp statistics
    double cfl_fraction = 0.0;            ///< max over steps of u_sup tau / (2h/7)
    std::int64_t clamped_total = 0;       ///< total clamped node-component count
    /// First step whose state is nonzero on the rim of the universe window
    /// (-1 if the support never reaches it).  Support spreads at most one cell
    /// per step; once it hits the rim, zero extension starts clipping it.
    int support_cap_step = -1;
};

/// @brief Full explicit run.  In truncation mode the exponent gate is enforced
/// (ConfigError on violation); in smooth mode the step velocity is used
/// unclamped and only the dynamic weight check applies.
ExplicitRun run_explicit(const ExplicitConfig& cfg);

// ============================================================================
// Stability and comparison certificates
// ============================================================================

/// @brief One link of the p-norm growth chain:
///   lhs = ||g^{n+1}||_p^p,
///   rhs = ||g^n||_p^p + tau h^3 sum_x (D . u^n)(x) |g^n(x)|^p.
/// The scheme guarantees lhs <= rhs up to rounding (Jensen on the unit-sum
/// stencil weights plus summation by parts), provided no state touches the
/// edge of its window.
struct LpGrowthRow {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// One row per step; `history` holds the states g^0..g^N and `velocities` the
/// per-step fields u^0..u^{N-1}.  Requires p >= 1.
std::vector<LpGrowthRow> lp_growth_bound(const std::vector<ScalarField>& history,
                                         const std::vector<VectorField>& velocities,
                                         const SchemeParams& params, double p);

/// @brief Runs both configs (which must share grid, universe, params and
/// horizon) and returns, for every step boundary n = 0..N, the minimum over
/// the universe of g_high^n - g_low^n.  All entries >= -1e-14 certifies the
/// comparison principle for this pair.
std::vector<double> compare_runs(const ExplicitConfig& low, const ExplicitConfig& high);

// ============================================================================
// Weak forms
// ============================================================================

/// @brief Exact summation-by-parts decomposition of a recorded run: with
/// M7 the seven-point average and D the central difference,
///   sum_x g^N phi^N - sum_x g^0 phi^0 =
///     sum_n [ sum_x g^{n+1} (phi^{n+1} - phi^n)
///           + sum_x g^n (M7 - I) phi^n
///           + tau sum_x g^n sum_j D_j(u^n_j phi^n) ],
/// all scaled by h^3.  Holds to rounding provided no state touches the edge
/// of its window.
struct WeakFormReport {
    double boundary_term = 0.0;
    double time_term = 0.0;
    double average_term = 0.0;
    double advection_term = 0.0;
    double scale = 0.0;  ///< sum of term magnitudes, for relative residuals

    double residual() const { return boundary_term - time_term - average_term - advection_term; }
};

WeakFormReport weak_form_identity(const std::vector<ScalarField>& history,
                                  const std::vector<VectorField>& velocities,
                                  const GridSpec& grid, const SchemeParams& params,
                                  const std::function<double(double, const Vec3&)>& phi,
                                  const TimeGrid& time);

/// @brief The five weak-form sums of a recorded run against a smooth test
/// function phi vanishing near the final time, using the analytic time and
/// space derivatives of phi:
///   initial_term     = sum_x g^0 phi(0, x) h^3
///   time_term        = sum_n sum_x g^{n+1} dt_phi(t_{n+1}, x) h^3 tau
///   divergence_term  = sum_{j,n,x} D_j u^n_j(x) g^n(x) phi(t_n, x - h e^j) h^3 tau
///   advection_term   = sum_{j,n,x} u^n_j(x + h e^j) g^n(x) d_j phi(t_n, x) h^3 tau
///   quadrature_term  = same with (D_j phi - d_j phi) in place of d_j phi.
/// total() tends to zero as the mesh refines; the defect against zero is
/// exactly time_remainder + averaging_remainder (the Taylor rests of the
/// discrete time quotient and of the seven-point average), so
/// total() + time_remainder + averaging_remainder = 0 to rounding.
struct WeakFormResidual {
    double initial_term = 0.0;
    double time_term = 0.0;
    double divergence_term = 0.0;
    double advection_term = 0.0;
    double quadrature_term = 0.0;
    double time_remainder = 0.0;       ///< sum g^{n+1} [(phi^{n+1}-phi^n) - tau dt_phi(t_{n+1})]
    double averaging_remainder = 0.0;  ///< sum g^n (M7 - I) phi^n
    double scale = 0.0;                ///< sum of term magnitudes

    double total() const {
        return initial_term + time_term + divergence_term + advection_term + quadrature_term;
    }
    double closure() const { return total() + time_remainder + averaging_remainder; }
};

WeakFormResidual weak_form_residual(const std::vector<ScalarField>& history,
                                    const std::vector<VectorField>& velocities,
                                    const GridSpec& grid, const SchemeParams& params,
                                    const std::function<double(double, const Vec3&)>& phi,
                                    const std::function<double(double, const Vec3&)>& dt_phi,
                                    const std::function<Vec3(double, const Vec3&)>& grad_phi,
                                    const TimeGrid& time);

}  // namespace tfd
