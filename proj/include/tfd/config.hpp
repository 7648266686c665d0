/// @file config.hpp
/// @brief Run configuration: the sectioned key = value file format, its
/// parser, cross-field validation and the derived lattice / parameter sets.
///
/// Grammar (one file per run):
///   * lines are independent; '#' starts a comment anywhere;
///   * a section header is "[name]"; keys before any header are rejected;
///   * an entry is "key = value"; keys are unique within their section;
///   * numbers accept plain reals and integer fractions like "1/64";
///   * booleans accept true/false, on/off, yes/no, 1/0.
/// Sections and keys are closed sets except [velocity] and [initial], where
/// unrecognized numeric keys are forwarded to the preset as parameters.

#pragma once

#include <iosfwd>
#include <string>

#include "tfd/fields.hpp"
#include "tfd/grid.hpp"
#include "tfd/hhd.hpp"
#include "tfd/implicit_scheme.hpp"
#include "tfd/levelset.hpp"
#include "tfd/presets.hpp"

namespace tfd {

// ============================================================================
// Run configuration
// ============================================================================

/// @brief Everything one batch run needs; defaults give a small smooth-mode
/// explicit run of the zero-velocity preset.
struct RunConfig {
    // [domain]
    Vec3 box_lo{-1.25, -1.25, -1.25};
    Vec3 box_hi{1.25, 1.25, 1.25};
    double h = 1.0 / 16.0;

    // [scheme]
    std::string scheme = "explicit";  ///< "explicit" or "implicit"
    double alpha = 0.25;  ///< scaling exponent of tau = h^(2 - alpha); smooth
                          ///< studies usually set alpha = 1 (tau ~ h)
    double beta = 0.625;  ///< truncation exponent of the clamp h^(-beta)
    double tau = 0.0;     ///< 0: derive from alpha (and the velocity bound)
    bool truncation = false;
    double t_final = 1.0;
    int quad_space_order = 3;
    int quad_time_order = 3;
    double cfl_safety = 1.0;  ///< smooth mode: fraction of the weight limit

    // [velocity]
    std::string velocity_preset = "zero";
    std::string velocity_csv;  ///< exclusive with the preset name
    ParamMap velocity_params;

    // [initial]
    std::string initial_preset = "bump";
    ParamMap initial_params;

    // [solver]  (implicit scheme)
    HHDOptions hhd{};
    GmresOptions gmres{};

    // [levelset]
    bool levelset_enabled = false;
    double level = 1.0;
    bool levelset_refine = true;
    bool levelset_outward = true;

    // [oracle]
    bool oracle_enabled = false;

    // [output]
    std::string output_dir = "out";
    std::string label = "run";  ///< artifact file prefix
    int snapshot_every = 0;     ///< extra state dumps every n steps (0: none)
    bool write_vtk = true;
    bool write_csv = true;
};

/// @brief Parses one number; integer fractions like "1/64" are evaluated
/// exactly.  Throws ConfigError on malformed input.
double parse_config_number(const std::string& text);

/// @brief Parses a configuration stream / file.  Unknown sections or keys
/// throw ConfigError naming the offender; the result is validated.
RunConfig parse_run_config(std::istream& in, const std::string& source_name = "<stream>");
RunConfig load_run_config(const std::string& path);

/// @brief Cross-field validation; throws ConfigError naming the field and the
/// violated constraint.  Called by the parser; public for hand-built configs.
void validate_run_config(const RunConfig& cfg);

// ============================================================================
// Derived objects
// ============================================================================

/// @brief Lattice covering [box_lo, box_hi] with spacing h; the box extents
/// must be integer multiples of h (relative slack 1e-9).
GridSpec derive_grid(const RunConfig& cfg);

/// @brief Scheme parameters with the time step resolved: an explicit tau is
/// taken as given (after admissibility checks); tau = 0 derives the canonical
/// truncation-mode step h^(2 - alpha), or in smooth mode the largest step
/// keeping every stencil weight nonnegative with the cfl_safety margin
/// against the velocity bound sup_velocity (h^(2 - alpha) when the bound
/// vanishes or is unknown).
SchemeParams derive_scheme_params(const RunConfig& cfg, double sup_velocity);

/// @brief Builds the velocity (preset or CSV table) per the config.
VelocityField build_velocity(const RunConfig& cfg);

/// @brief Builds the initial datum preset per the config.
InitialData build_initial(const RunConfig& cfg);

}  // namespace tfd
