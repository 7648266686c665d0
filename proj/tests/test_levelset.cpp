/// @file test_levelset.cpp
/// @brief Level-set pipeline tests: plane and sphere oracles, invariants,
/// degenerate handling, refinement layering and surface integrals.

#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "tfd/fields.hpp"
#include "tfd/levelset.hpp"
#include "tfd/presets.hpp"

using namespace tfd;

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

// ============================================================================
// Plane oracle (fully exact)
// ============================================================================

TEST_CASE("a linear field produces one exact plane of interface nodes") {
    const double h = 0.25;
    const GridSpec grid(h, {-2.0, -2.0, -2.0}, {17, 17, 17});
    const IndexBox window{{0, 0, 0}, {17, 17, 17}};
    const ScalarField g = sample_nodes(grid, window, [](const Vec3& x) { return x.x; });

    LevelSetOptions opt;
    opt.level = 0.0;
    opt.orient_outward = false;
    const InterfaceExtraction ext = extract_interface(g, grid, opt);

    // {x1 > 0} holds for 8 of 17 lattice planes; the dilation adds one plane.
    CHECK(ext.plus_count == 8 * 17 * 17);
    CHECK(ext.dilated_count == 9 * 17 * 17);
    REQUIRE(ext.points.size() == 17 * 17);
    CHECK(ext.degenerate_count == 0);
    CHECK(ext.refined_count == 17 * 17);  // already a single layer

    for (const InterfacePoint& pt : ext.points) {
        // Inner boundary of the dilated set {x >= 0}: the x = 0 plane.
        CHECK(std::abs(pt.position.x) <= 1e-14);
        CHECK(pt.normal.x == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(pt.normal.y) <= 1e-14);
        CHECK(std::abs(pt.normal.z) <= 1e-14);
        CHECK(pt.mean_curvature == doctest::Approx(0.0).epsilon(1e-13));
        CHECK(pt.area_weight == doctest::Approx(h * h).epsilon(1e-14));
        CHECK(pt.projection_axis == 0);
        CHECK(pt.refined);
        // Interface invariant.
        CHECK(g.at(pt.node) <= opt.level);
        bool above = false;
        for (int axis = 0; axis < 3; ++axis) {
            const Vec3i e = unit_offset(axis, 1);
            above = above || g.at(pt.node + e) > opt.level || g.at(pt.node - e) > opt.level;
        }
        CHECK(above);
    }
    CHECK(surface_area(ext) == doctest::Approx(17 * 17 * h * h).epsilon(1e-13));
    // Outward orientation flips the normal away from {x1 > 0}.
    opt.orient_outward = true;
    const InterfaceExtraction flipped = extract_interface(g, grid, opt);
    CHECK(flipped.points[0].normal.x == doctest::Approx(-1.0).epsilon(1e-14));
}

// ============================================================================
// Sphere oracle
// ============================================================================

TEST_CASE("the sphere preset yields radius, normals, curvature and area") {
    // The preset value is 2 * 2^(-|x|^2 / r^2) with r = 1/2: its level-1 set
    // is exactly the sphere |x| = 1/2.
    const InitialData sphere =
        make_initial_preset("sphere", {{"cx", 0.0}, {"cy", 0.0}, {"cz", 0.0}});
    const double r = 0.5;
    const double h = 1.0 / 16.0;
    const GridSpec grid(h, {-1.0, -1.0, -1.0}, {33, 33, 33});
    const ScalarField g = sample_nodes(grid, IndexBox{{0, 0, 0}, {33, 33, 33}},
                                       [&](const Vec3& x) { return sphere.value(x); });

    LevelSetOptions opt;
    opt.level = 1.0;
    opt.orient_outward = true;
    const InterfaceExtraction ext = extract_interface(g, grid, opt);
    REQUIRE(ext.points.size() > 100);
    CHECK(ext.degenerate_count == 0);

    for (const InterfacePoint& pt : ext.points) {
        const double rho = norm2(pt.position);
        // Interface nodes sit just outside the sphere.
        CHECK(rho >= r - 1e-12);
        CHECK(rho <= r + 3.0 * h);
        // Invariant.
        CHECK(g.at(pt.node) <= opt.level);
        // Outward normal approximates x / |x| to first order.
        const Vec3 exact = (1.0 / rho) * pt.position;
        CHECK(dot(pt.normal, exact) >= 0.93);
        CHECK(norm2(pt.normal) == doctest::Approx(1.0).epsilon(1e-12));
        // Outward-oriented mean curvature of a sphere is 2 / radius.
        CHECK(pt.mean_curvature >= 0.6 * (2.0 / r));
        CHECK(pt.mean_curvature <= 1.6 * (2.0 / r));
        CHECK(pt.area_weight >= h * h * (1.0 - 1e-13));
        CHECK(pt.area_weight <= std::sqrt(3.0) * h * h * (1.0 + 1e-13));
    }

    // Refined area close to 4 pi r^2 = pi; unrefined overcounts it.
    const double area = surface_area(ext);
    CHECK(area == doctest::Approx(kPi).epsilon(0.08));
    CHECK(surface_area(ext, false) > area);

    // Mean of the curvature against the area measure.
    const double curv_int = surface_integral(
        ext, [](const InterfacePoint& pt) { return pt.mean_curvature; });
    CHECK(curv_int / area == doctest::Approx(2.0 / r).epsilon(0.15));

    // Inward orientation: the same extraction with both signs flipped.
    opt.orient_outward = false;
    const InterfaceExtraction inw = extract_interface(g, grid, opt);
    REQUIRE(inw.points.size() == ext.points.size());
    for (size_t n = 0; n < inw.points.size(); ++n) {
        CHECK(inw.points[n].normal.x == doctest::Approx(-ext.points[n].normal.x).epsilon(1e-14));
        CHECK(inw.points[n].mean_curvature ==
              doctest::Approx(-ext.points[n].mean_curvature).epsilon(1e-14));
        CHECK(inw.points[n].area_weight ==
              doctest::Approx(ext.points[n].area_weight).epsilon(1e-14));
    }
}

TEST_CASE("refinement keeps a single node per projected column on the sphere") {
    const InitialData sphere =
        make_initial_preset("sphere", {{"cx", 0.0}, {"cy", 0.0}, {"cz", 0.0}});
    const double h = 1.0 / 16.0;
    const GridSpec grid(h, {-1.0, -1.0, -1.0}, {33, 33, 33});
    const ScalarField g = sample_nodes(grid, IndexBox{{0, 0, 0}, {33, 33, 33}},
                                       [&](const Vec3& x) { return sphere.value(x); });
    LevelSetOptions opt;
    opt.level = 1.0;
    const InterfaceExtraction ext = extract_interface(g, grid, opt);

    CHECK(ext.refined_count > 0);
    CHECK(ext.refined_count < static_cast<std::int64_t>(ext.points.size()));
    std::int64_t flagged = 0;
    for (const InterfacePoint& pt : ext.points) {
        if (pt.refined) {
            ++flagged;
            CHECK_FALSE(pt.degenerate);
        }
    }
    CHECK(flagged == ext.refined_count);

    // The sphere is symmetric under coordinate permutations and sign flips;
    // the refined area must be stable when the field is mirrored.
    const ScalarField g_mirror =
        sample_nodes(grid, IndexBox{{0, 0, 0}, {33, 33, 33}},
                     [&](const Vec3& x) { return sphere.value({-x.x, x.y, -x.z}); });
    const InterfaceExtraction ext_mirror = extract_interface(g_mirror, grid, opt);
    CHECK(surface_area(ext_mirror) == doctest::Approx(surface_area(ext)).epsilon(1e-12));
}

// ============================================================================
// Degenerate nodes
// ============================================================================

TEST_CASE("flat forward differences are counted and excluded, not evaluated") {
    // Indicator of a small cube: the far faces of the dilated shell see only
    // zero forward differences.
    const double h = 0.5;
    const GridSpec grid(h, {-4.0, -4.0, -4.0}, {17, 17, 17});
    ScalarField g(IndexBox{{0, 0, 0}, {17, 17, 17}});
    Vec3i p;
    for (p.k = 7; p.k <= 9; ++p.k)
        for (p.j = 7; p.j <= 9; ++p.j)
            for (p.i = 7; p.i <= 9; ++p.i) g.ref(p) = 1.0;

    LevelSetOptions opt;
    opt.level = 0.5;
    const InterfaceExtraction ext = extract_interface(g, grid, opt);
    CHECK(ext.plus_count == 27);
    CHECK(ext.degenerate_count > 0);
    for (const InterfacePoint& pt : ext.points) {
        if (pt.degenerate) {
            CHECK_FALSE(pt.refined);
            continue;
        }
        CHECK(std::isfinite(pt.mean_curvature));
        CHECK(std::isfinite(pt.area_weight));
        CHECK(norm2(pt.normal) == doctest::Approx(1.0).epsilon(1e-12));
    }
    const double area = surface_area(ext);
    CHECK(area > 0.0);
    CHECK(std::isfinite(area));
}

// ============================================================================
// Invariants on a generic smooth field
// ============================================================================

TEST_CASE("interface invariants hold for a generic two-bump field") {
    const InitialData f0 = make_initial_preset("double-bump");
    const double h = 1.0 / 12.0;
    const GridSpec grid(h, {-1.5, -1.5, -1.5}, {37, 37, 37});
    const ScalarField g = sample_nodes(grid, IndexBox{{0, 0, 0}, {37, 37, 37}},
                                       [&](const Vec3& x) { return f0.value(x); });
    for (double level : {0.05, 0.3, 0.8}) {
        CAPTURE(level);
        LevelSetOptions opt;
        opt.level = level;
        const InterfaceExtraction ext = extract_interface(g, grid, opt);
        REQUIRE_FALSE(ext.points.empty());
        for (const InterfacePoint& pt : ext.points) {
            CHECK(g.at(pt.node) <= level);
            bool above = false;
            for (int axis = 0; axis < 3; ++axis) {
                const Vec3i e = unit_offset(axis, 1);
                above = above || g.at(pt.node + e) > level || g.at(pt.node - e) > level;
            }
            CHECK(above);
            if (!pt.degenerate) {
                // dS >= h^2 with the argmax projection axis.
                CHECK(pt.area_weight >= h * h * (1.0 - 1e-13));
                Vec3 grad;
                for (int axis = 0; axis < 3; ++axis)
                    grad[axis] = (g.at(pt.node + unit_offset(axis, 1)) - g.at(pt.node)) / h;
                int amax = 0;
                for (int axis = 1; axis < 3; ++axis)
                    if (std::abs(grad[axis]) > std::abs(grad[amax])) amax = axis;
                CHECK(pt.projection_axis == amax);
            }
        }
        // The super-level set shrinks as the level rises.
        LevelSetOptions higher = opt;
        higher.level = level + 0.1;
        CHECK(extract_interface(g, grid, higher).plus_count <= ext.plus_count);
    }
}

TEST_CASE("an empty super-level set yields an empty interface") {
    const double h = 0.5;
    const GridSpec grid(h, {0.0, 0.0, 0.0}, {9, 9, 9});
    const ScalarField g(IndexBox{{0, 0, 0}, {9, 9, 9}});  // all zero
    LevelSetOptions opt;
    opt.level = 0.5;
    const InterfaceExtraction ext = extract_interface(g, grid, opt);
    CHECK(ext.plus_count == 0);
    CHECK(ext.points.empty());
    CHECK(surface_area(ext) == 0.0);
}
