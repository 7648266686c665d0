/// @file presets.hpp
/// @brief Built-in velocity fields and initial data, plus tabulated velocity input.
///
/// All built-in velocity presets are divergence-free by construction and
/// compactly supported inside the computational domain.  The planar-rotation
/// family v(x) = w(r, z) * (-x2, x1, 0) conserves both the cylinder radius
/// r = |(x1, x2)| and the height x3 along trajectories, so its flow map is a
/// closed-form rotation; that property backs the fast exact-solution path and
/// the geometric oracles.

#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tfd/numerics.hpp"
#include "tfd/vec.hpp"

namespace tfd {

/// @brief Named scalar parameters for a preset (unknown keys are rejected).
using ParamMap = std::map<std::string, double>;

// ============================================================================
// Velocity fields
// ============================================================================

/// @brief Time-dependent velocity sampler with structural metadata.
struct VelocityField {
    std::string name;
    std::function<Vec3(double t, const Vec3& x)> value;

    bool time_independent = true;
    bool divergence_free = true;

    /// Analytic bound on sup |v_j| (0 when unknown; diagnostics measure the
    /// actual value on a refined lattice).
    double sup_hint = 0.0;

    /// Set for the planar-rotation family: v = spin(r, z) * (-x2, x1, 0) with
    /// spin == omega on the rigid cylinder {r <= rigid_radius, |x3| <= rigid_halfheight}.
    /// The exact flow rotates each point about the x3-axis by spin(x) * dt.
    bool planar_rotation = false;
    double omega = 0.0;
    double rigid_radius = 0.0;
    double rigid_halfheight = 0.0;
    std::function<double(const Vec3&)> spin;  ///< angular speed at a point

    Vec3 operator()(double t, const Vec3& x) const { return value(t, x); }
};

/// @brief Available velocity preset names.
std::vector<std::string> velocity_preset_names();

/// @brief Builds a velocity preset by name.
///
/// Presets and parameters (defaults in parentheses):
///  * "zero"      -- identically zero field.
///  * "rotation"  -- planar rotation, rigid angular speed `omega` (0.5) inside
///                   radius `r_in` (0.85), smoothly cut off to zero at `r_out`
///                   (1.1); height cutoff between `z_in` (0.85) and `z_out` (1.1).
///  * "steep"     -- same family with a fast narrow core: `omega` (25),
///                   `r_in` (0.35), `r_out` (0.6), `z_in` (0.5), `z_out` (0.8);
///                   produces large velocity values on a thin annulus.
///  * "cellular"  -- steady cellular (stream-function) field: amplitude `amp`
///                   (1), wavenumber `kappa` (3.141592653589793), cut off
///                   between `in` (0.8) and `out` (1.1) per axis.
/// Throws ConfigError for unknown names or parameters.
VelocityField make_velocity_preset(const std::string& name, const ParamMap& params = {});

/// @brief Loads a tabulated velocity from CSV.
///
/// Layout: one header row
///   t,i,j,k,v1,v2,v3,h=<r>,ox=<r>,oy=<r>,oz=<r>,ni=<n>,nj=<n>,nk=<n>
/// followed by sample rows `t,i,j,k,v1,v2,v3`.  Rows must be grouped by
/// ascending time; each time block may cover any subset of the declared
/// lattice (missing nodes are zero).  Evaluation is trilinear in space,
/// piecewise-linear in time (clamped at the ends), zero outside the lattice.
VelocityField load_velocity_csv(const std::string& path);

// ============================================================================
// Initial data
// ============================================================================

/// @brief C^4 compactly supported initial datum with analytic derivatives.
///
/// Every preset is a sum of radial profiles A * exp(-lambda * s) * cut(s)
/// with s = |x - c|^2 and a C^4 cutoff, so values, gradients and Hessians
/// are available in closed form.
struct InitialData {
    /// One radial term of the datum.
    struct RadialTerm {
        Vec3 center;
        double amp = 1.0;
        double lambda = 1.0;  ///< decay rate in s = |x - c|^2
        Falloff cut;          ///< C^4 cutoff in s

        double profile(double s) const { return amp * std::exp(-lambda * s) * cut.value(s); }
        double profile_d1(double s) const {
            return amp * std::exp(-lambda * s) * (cut.d1(s) - lambda * cut.value(s));
        }
        double profile_d2(double s) const {
            return amp * std::exp(-lambda * s) *
                   (cut.d2(s) - 2.0 * lambda * cut.d1(s) + lambda * lambda * cut.value(s));
        }
    };

    std::string name;
    std::vector<RadialTerm> terms;

    double value(const Vec3& x) const;
    Vec3 gradient(const Vec3& x) const;
    Mat3 hessian(const Vec3& x) const;

    /// Upper bound on sup |f0| (sum of term amplitudes).
    double sup_bound = 0.0;
    /// Support is contained in the ball B(support_center, support_radius).
    Vec3 support_center;
    double support_radius = 0.0;
};

/// @brief Available initial-data preset names.
std::vector<std::string> initial_preset_names();

/// @brief Builds an initial-data preset by name.
///
/// Presets and parameters (defaults in parentheses):
///  * "bump"        -- single positive bump: `amp` (1), `width` (0.25),
///                     `cx`, `cy`, `cz` (0.3, 0, 0); support radius 2.5*width.
///  * "double-bump" -- signed pair of bumps: `amp` (1), `amp2` (-0.6),
///                     `width` (0.2), `width2` (0.15), centers
///                     (`cx`,`cy`,`cz`) = (0.3,0,0) and (`cx2`,`cy2`,`cz2`) =
///                     (-0.25, 0.2, 0.1).
///  * "sphere"      -- level-set datum: value 2 at the center, exactly 1 on the
///                     sphere of radius `radius` (0.5) around (`cx`,`cy`,`cz`)
///                     (0.3, 0, 0), monotone in |x - c|; support radius
///                     2*radius.
InitialData make_initial_preset(const std::string& name, const ParamMap& params = {});

}  // namespace tfd
