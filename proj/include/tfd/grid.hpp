/// @file grid.hpp
/// @brief Uniform lattice, domain masks, dense fields and difference operators.
///
/// Conventions used across the solver:
///  * the lattice is h * Z^3 anchored at GridSpec::origin, indices are global
///    integer triples (possibly negative) relative to that anchor;
///  * every field is stored on a dense axis-aligned index window and reads as
///    exactly zero outside it, which realises the zero-extension convention;
///  * the cell of a node x is the half-open cube [x_i - h/2, x_i + h/2)^3.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tfd/errors.hpp"
#include "tfd/vec.hpp"

namespace tfd {

// ============================================================================
// Lattice geometry
// ============================================================================

/// @brief Uniform lattice window: spacing, anchor point and node counts.
struct GridSpec {
    double h = 0.0;     ///< lattice spacing, > 0
    Vec3 origin;        ///< position of node (0,0,0)
    Vec3i dims;         ///< node count per axis, >= 4 each

    GridSpec() = default;
    GridSpec(double h_, const Vec3& origin_, const Vec3i& dims_);

    /// @brief Physical position of a (global) node index.
    Vec3 position(const Vec3i& idx) const {
        return {origin.x + h * idx.i, origin.y + h * idx.j, origin.z + h * idx.k};
    }

    std::int64_t node_count() const {
        return static_cast<std::int64_t>(dims.i) * dims.j * dims.k;
    }
};

/// @brief Half-open box of global indices: lo <= idx < lo + n (per axis).
struct IndexBox {
    Vec3i lo;
    Vec3i n;

    bool contains(const Vec3i& p) const {
        return p.i >= lo.i && p.i < lo.i + n.i && p.j >= lo.j && p.j < lo.j + n.j &&
               p.k >= lo.k && p.k < lo.k + n.k;
    }
    std::int64_t count() const { return static_cast<std::int64_t>(n.i) * n.j * n.k; }

    /// @brief Box grown by `m` nodes on every side of every axis.
    IndexBox grown(int m) const {
        return {{lo.i - m, lo.j - m, lo.k - m}, {n.i + 2 * m, n.j + 2 * m, n.k + 2 * m}};
    }
    /// @brief Box grown by one node on both sides of a single axis.
    IndexBox grown_axis(int axis, int m) const {
        IndexBox out = *this;
        out.lo[axis] -= m;
        out.n[axis] += 2 * m;
        return out;
    }
    /// @brief Intersection with another box (empty boxes get n = 0).
    IndexBox clipped(const IndexBox& other) const;
};

// ============================================================================
// Domains
// ============================================================================

/// @brief Open spatial domain, given either as an axis-aligned box or as a
/// signed-distance-style predicate (negative inside).
struct Domain {
    enum class Kind { Box, SignedDistance };

    Kind kind = Kind::Box;
    Vec3 box_lo, box_hi;                        ///< for Kind::Box
    std::function<double(const Vec3&)> sdf;     ///< for Kind::SignedDistance

    static Domain box(const Vec3& lo, const Vec3& hi);
    static Domain signed_distance(std::function<double(const Vec3&)> fn);

    /// @brief Point membership in the open set.
    bool contains(const Vec3& p) const;

    /// @brief Whether the closed cube of side 2h centered at p lies inside.
    ///
    /// For a box domain the test is exact: the half-open cube
    /// [p - h, p + h)^3 must fit in the open box, i.e. p_i - h > lo_i and
    /// p_i + h <= hi_i.  For predicate domains the cube is sampled at its
    /// 8 corners and 6 face centers (exact for convex domains).
    bool contains_cube2h(const Vec3& p, double h) const;
};

/// @brief Discretization of a domain on a lattice.
///
/// interior  = nodes whose surrounding cube of side 2h lies inside the domain;
/// boundary  = interior nodes with at least one axis neighbour not interior;
/// inner     = interior minus boundary (the unknowns of the implicit solvers).
class DomainMask {
public:
    DomainMask() = default;
    DomainMask(const GridSpec& grid, const Domain& domain);

    const GridSpec& grid() const { return grid_; }

    bool in_interior(const Vec3i& p) const { return flag(p) != 0; }
    bool on_boundary(const Vec3i& p) const { return flag(p) == 2; }
    bool in_inner(const Vec3i& p) const { return flag(p) == 1; }

    /// @brief Interior nodes in lexicographic (k, j, i) order.
    std::span<const Vec3i> interior() const { return interior_; }
    /// @brief Boundary-layer nodes (subset of interior).
    std::span<const Vec3i> boundary() const { return boundary_; }
    /// @brief Interior-minus-boundary nodes; the solver unknowns.
    std::span<const Vec3i> inner() const { return inner_; }

    /// @brief Dense rank of an inner node (-1 if not inner); ranks follow the
    /// traversal order of inner().
    std::int64_t inner_rank(const Vec3i& p) const;

private:
    std::uint8_t flag(const Vec3i& p) const;

    GridSpec grid_;
    std::vector<std::uint8_t> flags_;        // 0 outside, 1 inner, 2 boundary
    std::vector<std::int64_t> inner_ranks_;  // -1 where not inner
    std::vector<Vec3i> interior_, boundary_, inner_;
};

// ============================================================================
// Fields
// ============================================================================

/// @brief Dense scalar field on an index window; zero outside the window.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const IndexBox& window);

    const IndexBox& window() const { return window_; }

    /// @brief Zero-extended read at a global index.
    double at(const Vec3i& p) const {
        if (!window_.contains(p)) return 0.0;
        return data_[linear(p)];
    }
    /// @brief Mutable access; index must lie inside the window.
    double& ref(const Vec3i& p) {
        if (!window_.contains(p)) throw NumericError("ScalarField::ref outside window");
        return data_[linear(p)];
    }
    /// @brief Read without the window check (index must be inside).
    double at_unchecked(const Vec3i& p) const { return data_[linear(p)]; }

    std::span<const double> values() const { return data_; }
    std::span<double> values() { return data_; }

    /// @brief Visits all window nodes in deterministic (k, j, i) order.
    template <typename F>
    void for_each(F&& fn) const {
        Vec3i p;
        size_t q = 0;
        for (p.k = window_.lo.k; p.k < window_.lo.k + window_.n.k; ++p.k)
            for (p.j = window_.lo.j; p.j < window_.lo.j + window_.n.j; ++p.j)
                for (p.i = window_.lo.i; p.i < window_.lo.i + window_.n.i; ++p.i, ++q)
                    fn(p, data_[q]);
    }
    template <typename F>
    void transform(F&& fn) {
        Vec3i p;
        size_t q = 0;
        for (p.k = window_.lo.k; p.k < window_.lo.k + window_.n.k; ++p.k)
            for (p.j = window_.lo.j; p.j < window_.lo.j + window_.n.j; ++p.j)
                for (p.i = window_.lo.i; p.i < window_.lo.i + window_.n.i; ++p.i, ++q)
                    data_[q] = fn(p, data_[q]);
    }

private:
    size_t linear(const Vec3i& p) const {
        return static_cast<size_t>((static_cast<std::int64_t>(p.k - window_.lo.k) * window_.n.j +
                                    (p.j - window_.lo.j)) *
                                       window_.n.i +
                                   (p.i - window_.lo.i));
    }

    IndexBox window_{};
    std::vector<double> data_;
};

/// @brief Three scalar components on a shared window.
struct VectorField {
    ScalarField c[3];

    VectorField() = default;
    explicit VectorField(const IndexBox& window)
        : c{ScalarField(window), ScalarField(window), ScalarField(window)} {}

    const IndexBox& window() const { return c[0].window(); }
    Vec3 at(const Vec3i& p) const { return {c[0].at(p), c[1].at(p), c[2].at(p)}; }
};

// ============================================================================
// Difference operators
// ============================================================================
//
// All operators read their argument with zero extension and return a field on
// the input window grown by one node along the differencing axis, which is
// the full support of the result.

/// @brief Forward difference along an axis: (f(x + h e) - f(x)) / h.
ScalarField forward_diff(const ScalarField& f, int axis, double h);
/// @brief Backward difference along an axis: (f(x) - f(x - h e)) / h.
ScalarField backward_diff(const ScalarField& f, int axis, double h);
/// @brief Centered difference along an axis: (f(x + h e) - f(x - h e)) / (2h).
ScalarField central_diff(const ScalarField& f, int axis, double h);
/// @brief Second difference along an axis:
/// (f(x + h e) + f(x - h e) - 2 f(x)) / h^2.
ScalarField second_diff(const ScalarField& f, int axis, double h);

/// @brief Backward divergence of a vector field: sum_j (u_j(x) - u_j(x-h e_j))/h.
ScalarField backward_divergence(const VectorField& u, double h);
/// @brief Centered divergence of a vector field.
ScalarField central_divergence(const VectorField& u, double h);

// ============================================================================
// Norms and inner products (lattice-weighted, deterministic reductions)
// ============================================================================

/// @brief ||f||_p over the window: (sum |f|^p h^3)^(1/p); p = inf -> max |f|.
/// Since fields vanish outside their windows this equals the norm over the
/// whole lattice.
double lp_norm(const ScalarField& f, double p, double h);

/// @brief ||f||_p over an explicit node set (zero-extended reads).
double lp_norm(const ScalarField& f, double p, double h, std::span<const Vec3i> nodes);

/// @brief (f, g) = sum f g h^3 over the union of supports.
double inner_product(const ScalarField& f, const ScalarField& g, double h);

/// @brief (f, g) over an explicit node set.
double inner_product(const ScalarField& f, const ScalarField& g, double h,
                     std::span<const Vec3i> nodes);

}  // namespace tfd
