/// @file fields.hpp
/// @brief Scheme data construction: time grid, parameter set, cell averages of
/// the initial datum, interval-cell averages of the velocity, the
/// large-velocity truncation and numeric velocity norms.

#pragma once

#include <array>
#include <cstdint>

#include "tfd/grid.hpp"
#include "tfd/presets.hpp"

namespace tfd {

// ============================================================================
// Time discretization and scheme parameters
// ============================================================================

/// @brief Uniform time grid: the number of full steps n_steps satisfies
/// tau * n_steps <= T < tau * (n_steps + 1).
struct TimeGrid {
    double tau = 0.0;
    double T = 0.0;
    int n_steps = 0;

    double time(int n) const { return tau * n; }
};

TimeGrid make_time_grid(double tau, double T);

/// @brief Parameter set of the explicit scheme.
///
/// The canonical coupling is tau = h^(2 - alpha); the truncation threshold is
/// h^(-beta).  `truncation_enabled` distinguishes the rough-velocity mode
/// (truncation on, exponents constrained) from the smooth mode (truncation
/// off, time step chosen directly).
struct SchemeParams {
    double h = 0.0;
    double tau = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    bool truncation_enabled = true;

    double truncation_threshold() const;  ///< h^(-beta)
};

// ============================================================================
// Cell averages
// ============================================================================

/// @brief Cell averages of a function over the half-open cells of the lattice:
/// g(x) = (1/h^3) * integral over [x - h/2, x + h/2)^3, one value per window
/// node, via a tensor Gauss-Legendre rule (order points per axis).
ScalarField average_initial(const GridSpec& grid, const IndexBox& window,
                            const std::function<double(const Vec3&)>& f0, int order = 3);

/// @brief Plain nodal sampling on a window (used for static level-set fields
/// and tests).
ScalarField sample_nodes(const GridSpec& grid, const IndexBox& window,
                         const std::function<double(const Vec3&)>& fn);

/// @brief Interval-cell averages of a velocity:
/// u_j(x) = (1/(dt h^3)) * integral over [t0, t1] x cell(x) of v_j, via tensor
/// Gauss-Legendre (space_order^3 x time_order points).  For fields flagged
/// time-independent the time quadrature collapses to a single sample.
VectorField average_velocity(const GridSpec& grid, const IndexBox& window,
                             const VelocityField& v, double t0, double t1, int space_order = 3,
                             int time_order = 3);

// ============================================================================
// Truncation of large velocity values
// ============================================================================

/// @brief Componentwise clamp to [-threshold, threshold], plus the count of
/// clamped nodes per component (the discrete truncated sets).
struct TruncationResult {
    VectorField u;
    std::array<std::int64_t, 3> clamped_count{0, 0, 0};
};

TruncationResult truncate_velocity(const VectorField& u, double threshold);

// ============================================================================
// Velocity norms (numeric, refined lattice)
// ============================================================================

/// @brief Space-time norms of a velocity over box x [0, T], evaluated on a
/// midpoint lattice of spacing h_ref with central-difference gradients.
struct VelocityNorms {
    std::array<double, 3> grad_l2l2{};   ///< || grad v_j ||_{L2 in t, L2 in x}
    std::array<double, 3> linf_l2{};     ///< sup_t || v_j(t) ||_{L2}
    std::array<double, 3> l3_cubed{};    ///< integral_0^T || v_j ||_{L3}^3 dt
    double sup_abs = 0.0;                ///< max_j sup |v_j|

    /// Component bound 48^(3/2) T^(1/4) ||grad v_j||^(3/2) ||v_j||_{L-inf L2}^(3/2);
    /// dominates the time integral of || v_j ||_{L3}^3.
    std::array<double, 3> m1{};
    double m1_sum = 0.0;
};

VelocityNorms compute_velocity_norms(const VelocityField& v, const Vec3& box_lo,
                                     const Vec3& box_hi, double h_ref, double T,
                                     int time_samples = 9);

// ============================================================================
// Truncation measure bookkeeping
// ============================================================================

/// @brief Accumulated truncation statistics of a run, with the theoretical
/// measure budget they must respect.
struct TruncationMeasure {
    double measure_sum = 0.0;             ///< sum over steps/components of vol * tau
    std::array<double, 3> l3_sum{};       ///< sum |u_j|^3 h^3 tau per component
    std::array<double, 3> m1{};           ///< component budgets
    double bound = 0.0;                   ///< (sum_j m1_j) * h^(3 beta)

    void finalize(const VelocityNorms& norms, const SchemeParams& params);
};

}  // namespace tfd
