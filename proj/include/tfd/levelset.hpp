/// @file levelset.hpp
/// @brief Level-set geometry of a lattice field: super-level set, its
/// one-ring dilation, the discrete interface with normals, mean curvature and
/// area weights, a single-layer refinement, and surface integrals.

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "tfd/grid.hpp"

namespace tfd {

// ============================================================================
// Extraction
// ============================================================================

/// @brief One interface node with its geometric payload.  The payload fields
/// are only meaningful when `degenerate` is false.
struct InterfacePoint {
    Vec3i node;
    Vec3 position;
    Vec3 normal{};                ///< unit normal from forward differences
    double mean_curvature = 0.0;  ///< divergence of the oriented unit normal
    double area_weight = 0.0;     ///< dS = h^2 |D+ g| / |D+_i g|, i the projection axis
    int projection_axis = 0;      ///< argmax_i |D+_i g| (ties: smallest index)
    bool degenerate = false;      ///< |D+ g| under the floor: no payload
    bool refined = false;         ///< selected by the single-layer refinement
};

struct LevelSetOptions {
    double level = 0.0;          ///< threshold c of the super-level set {g > c}
    bool orient_outward = true;  ///< flip normals away from the super-level set
    double gradient_floor = 1e-12;
    bool refine = true;
    int patch_lateral = 4;       ///< patch half-width across the dominant axis
    int patch_axial = 12;        ///< patch half-width along the dominant axis
};

struct InterfaceExtraction {
    std::vector<InterfacePoint> points;  ///< lexicographic (k, j, i) order
    std::int64_t plus_count = 0;         ///< nodes with g > c
    std::int64_t dilated_count = 0;      ///< nodes of the one-ring dilation
    std::int64_t degenerate_count = 0;
    std::int64_t refined_count = 0;
    double h = 0.0;
};

/// @brief Extract the discrete interface of {g > level} inside g's window.
///
/// The interface is the discrete boundary of the dilation of the super-level
/// set by {0, +-h e^1, +-h e^2, +-h e^3}: every dilated node with an axis
/// neighbour inside the window that is not dilated.  Every interface node y
/// then satisfies g(y) <= level with g(y + h w) > level for some offset w.
/// The refinement greedily covers the interface with axis-aligned patches
/// elongated along the locally dominant gradient axis and keeps, per lateral
/// column of a patch, only the node with the smallest coordinate along that
/// axis, yielding a single layer per column.
InterfaceExtraction extract_interface(const ScalarField& g, const GridSpec& grid,
                                      const LevelSetOptions& options = {});

// ============================================================================
// Surface integrals
// ============================================================================

/// @brief Sum of f(point) * dS over the interface, skipping degenerate nodes;
/// with refined_only, only refinement-selected nodes contribute.
double surface_integral(const InterfaceExtraction& interface,
                        const std::function<double(const InterfacePoint&)>& f,
                        bool refined_only = true);

/// @brief Total area: surface_integral of 1.
double surface_area(const InterfaceExtraction& interface, bool refined_only = true);

}  // namespace tfd
