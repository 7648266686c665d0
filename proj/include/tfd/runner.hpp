/// @file runner.hpp
/// @brief Batch orchestration: one configured run end to end (fields ->
/// scheme -> optional level-set extraction -> optional oracle comparison ->
/// artifacts + manifest), and multi-resolution convergence studies.

#pragma once

#include <string>
#include <vector>

#include "tfd/config.hpp"
#include "tfd/io.hpp"

namespace tfd {

// ============================================================================
// Single run
// ============================================================================

/// @brief Error summary of one finished run.  Unavailable quantities are NaN:
/// oracle errors need [oracle] enabled; the derivative errors additionally
/// need the closed-form oracle derivatives (rigid planar rotation with the
/// datum support inside the rigid cylinder); geometry errors need [levelset]
/// enabled, the sphere initial preset and a velocity that moves that sphere
/// rigidly (planar rotation containing it in the rigid cylinder).
///
/// Conventions:
///   * sup_err / l2_err     - max / l2 node error of the final state against
///                            the transported exact solution;
///   * grad_err / hess_err  - max forward-difference gradient and mixed
///                            second-difference Hessian errors on the final
///                            state (same stencils as the error cascade);
///   * hausdorff            - symmetric Hausdorff distance between the
///                            extracted interface points and the exact sphere;
///   * normal_err           - area-weighted RMS of |n - n_exact|;
///   * curv_err             - area-weighted RMS of (kappa - kappa_exact),
///                            kappa_exact = +-2/radius by orientation;
///   * area_err             - relative area defect |A - A_exact| / A_exact.
struct RunErrors {
    double sup_err, l2_err, grad_err, hess_err;
    double hausdorff, normal_err, curv_err, area_err;

    RunErrors();  ///< all NaN
};

/// @brief Everything a finished run leaves behind.
struct RunArtifacts {
    std::string directory;
    std::string manifest_path;
    std::vector<ManifestEntry> files;  ///< the manifest entries

    double h = 0.0;
    double tau = 0.0;
    int n_steps = 0;
    double t_reached = 0.0;  ///< tau * n_steps (<= t_final)

    double final_sup = 0.0;  ///< max |g| over the final state
    double final_l2 = 0.0;   ///< sqrt(sum g^2 h^3)
    double final_mass = 0.0; ///< sum g h^3

    RunErrors errors;

    /// Mean curvature over the extracted interface, area-weighted (NaN when
    /// the level-set stage is off or the interface is empty).
    double mean_curvature;
    double surface_area_value;  ///< total refined-layer area (NaN likewise)

    RunArtifacts();
};

/// @brief Executes one validated config: builds the lattice, velocity and
/// datum, derives the time step from the velocity bound, runs the selected
/// scheme, optionally extracts the level set of the final state and compares
/// against the characteristics oracle, writes the requested artifacts
/// (snapshots, final state, interface, one-row summary CSV) and the manifest.
///
/// Throws ConfigError / SolverError / NumericError; never calls exit().
RunArtifacts run_single(const RunConfig& cfg);

// ============================================================================
// Convergence study
// ============================================================================

/// @brief One resolution of a study; the error columns follow RunErrors.
struct StudyRow {
    double h = 0.0;
    double tau = 0.0;
    RunErrors errors;
};

/// @brief Least-squares slopes of log(error) against log(h) per error
/// column, over the rows where the column is finite and positive; NaN when
/// fewer than two such rows exist.
struct StudyOrders {
    double sup_order, l2_order, grad_order, hess_order;
    double hausdorff_order, normal_order, curv_order, area_order;

    StudyOrders();  ///< all NaN
};

struct StudyResult {
    std::vector<StudyRow> rows;  ///< one per resolution, input order
    StudyOrders orders;
    std::string directory;
    std::string csv_path;       ///< the study table artifact
    std::string manifest_path;  ///< lists every emitted file, sub-runs included
};

/// @brief Runs the template config at each grid spacing in `resolutions`
/// (sub-run artifacts under res_0, res_1, ...), collects the error columns,
/// fits convergence orders and writes `<label>_study.csv`:
///
///   h,tau,sup_err,l2_err,grad_err,hess_err,hausdorff,normal_err,curv_err,area_err
///   <one data row per resolution>
///   order,,<fitted order per error column>
///
/// A pinned [scheme] tau is rescaled proportionally to h across resolutions
/// (the ratio tau/h of the template is preserved); tau = 0 re-derives the
/// step at every resolution.  All numbers print with 17 significant digits,
/// so identical configurations reproduce the artifact byte for byte.
StudyResult run_study(const RunConfig& base, const std::vector<double>& resolutions);

}  // namespace tfd
