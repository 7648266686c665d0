/// @file levelset.cpp
/// @brief Interface extraction, payload evaluation and refinement.

#include "tfd/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tfd/errors.hpp"
#include "tfd/numerics.hpp"

namespace tfd {

namespace {

/// Dense flag store over an index window.
class FlagGrid {
public:
    explicit FlagGrid(const IndexBox& w)
        : window_(w), flags_(static_cast<size_t>(w.count()), 0) {}

    bool get(const Vec3i& p) const {
        return window_.contains(p) && flags_[index(p)] != 0;
    }
    void set(const Vec3i& p) { flags_[index(p)] = 1; }
    bool inside(const Vec3i& p) const { return window_.contains(p); }

private:
    size_t index(const Vec3i& p) const {
        return static_cast<size_t>(
            (static_cast<std::int64_t>(p.k - window_.lo.k) * window_.n.j + (p.j - window_.lo.j)) *
                window_.n.i +
            (p.i - window_.lo.i));
    }
    IndexBox window_;
    std::vector<std::uint8_t> flags_;
};

}  // namespace

// ============================================================================
// Extraction
// ============================================================================

InterfaceExtraction extract_interface(const ScalarField& g, const GridSpec& grid,
                                      const LevelSetOptions& options) {
    if (grid.h <= 0.0) throw NumericError("extract_interface: grid spacing must be positive");
    const IndexBox& w = g.window();
    const double h = grid.h;
    const double c = options.level;

    InterfaceExtraction out;
    out.h = h;

    // Super-level set and its one-ring dilation.
    FlagGrid plus(w), dilated(w);
    Vec3i p;
    for (p.k = w.lo.k; p.k < w.lo.k + w.n.k; ++p.k)
        for (p.j = w.lo.j; p.j < w.lo.j + w.n.j; ++p.j)
            for (p.i = w.lo.i; p.i < w.lo.i + w.n.i; ++p.i)
                if (g.at_unchecked(p) > c) {
                    plus.set(p);
                    ++out.plus_count;
                }
    for (p.k = w.lo.k; p.k < w.lo.k + w.n.k; ++p.k)
        for (p.j = w.lo.j; p.j < w.lo.j + w.n.j; ++p.j)
            for (p.i = w.lo.i; p.i < w.lo.i + w.n.i; ++p.i) {
                bool in_dilation = plus.get(p);
                for (int axis = 0; axis < 3 && !in_dilation; ++axis) {
                    const Vec3i e = unit_offset(axis, 1);
                    in_dilation = plus.get(p + e) || plus.get(p - e);
                }
                if (in_dilation) {
                    dilated.set(p);
                    ++out.dilated_count;
                }
            }

    // Interface nodes: dilated with a non-dilated axis neighbour inside the
    // window (neighbours beyond the window are treated as unknown, so the
    // window rim never produces artificial interface nodes).
    const double orient = options.orient_outward ? -1.0 : 1.0;
    for (p.k = w.lo.k; p.k < w.lo.k + w.n.k; ++p.k)
        for (p.j = w.lo.j; p.j < w.lo.j + w.n.j; ++p.j)
            for (p.i = w.lo.i; p.i < w.lo.i + w.n.i; ++p.i) {
                if (!dilated.get(p)) continue;
                bool boundary = false;
                for (int axis = 0; axis < 3 && !boundary; ++axis) {
                    const Vec3i e = unit_offset(axis, 1);
                    boundary = (dilated.inside(p + e) && !dilated.get(p + e)) ||
                               (dilated.inside(p - e) && !dilated.get(p - e));
                }
                if (!boundary) continue;

                InterfacePoint pt;
                pt.node = p;
                pt.position = grid.position(p);

                Vec3 grad;
                for (int axis = 0; axis < 3; ++axis)
                    grad[axis] = (g.at(p + unit_offset(axis, 1)) - g.at(p)) / h;
                const double mag = norm2(grad);
                int amax = 0;
                for (int axis = 1; axis < 3; ++axis)
                    if (std::abs(grad[axis]) > std::abs(grad[amax])) amax = axis;
                pt.projection_axis = amax;

                if (mag < options.gradient_floor) {
                    pt.degenerate = true;
                    ++out.degenerate_count;
                    out.points.push_back(pt);
                    continue;
                }

                const Vec3 nu = (1.0 / mag) * grad;
                // Mean curvature: (Laplacian - nu^T Hess nu) / |grad|, then
                // oriented with the normal.
                double laplace = 0.0;
                double quad = 0.0;
                for (int a = 0; a < 3; ++a) {
                    const Vec3i ea = unit_offset(a, 1);
                    laplace += (g.at(p + ea) - 2.0 * g.at(p) + g.at(p - ea)) / (h * h);
                    for (int b = 0; b < 3; ++b) {
                        const Vec3i eb = unit_offset(b, 1);
                        // D-_a D+_b g at p.
                        const double hab =
                            (g.at(p + eb) - g.at(p) - g.at(p - ea + eb) + g.at(p - ea)) /
                            (h * h);
                        quad += hab * nu[a] * nu[b];
                    }
                }
                pt.normal = orient * nu;
                pt.mean_curvature = orient * (laplace - quad) / mag;
                pt.area_weight = mag / std::abs(grad[amax]) * h * h;
                out.points.push_back(pt);
            }

    // ------------------------------------------------------------------
    // Single-layer refinement
    // ------------------------------------------------------------------
    if (options.refine && !out.points.empty()) {
        // node -> point index lookup.
        std::vector<std::int32_t> id(static_cast<size_t>(w.count()), -1);
        auto index_of = [&](const Vec3i& q) {
            return static_cast<size_t>(
                (static_cast<std::int64_t>(q.k - w.lo.k) * w.n.j + (q.j - w.lo.j)) * w.n.i +
                (q.i - w.lo.i));
        };
        for (size_t n = 0; n < out.points.size(); ++n)
            id[index_of(out.points[n].node)] = static_cast<std::int32_t>(n);

        std::vector<std::uint8_t> claimed(out.points.size(), 0);
        for (size_t seed = 0; seed < out.points.size(); ++seed) {
            if (claimed[seed] || out.points[seed].degenerate) continue;
            const Vec3i center = out.points[seed].node;
            const int axial = out.points[seed].projection_axis;
            const int lat1 = (axial + 1) % 3, lat2 = (axial + 2) % 3;

            Vec3i half;
            half[axial] = options.patch_axial;
            half[lat1] = options.patch_lateral;
            half[lat2] = options.patch_lateral;

            // Column -> (axial coordinate, point index) of every candidate.
            // A column may cross the surface more than once (a small closed
            // surface has two sheets over the same lateral cell), so the
            // dedup has to happen per contiguous axial run, not per column:
            // duplicates of one sheet sit on adjacent nodes, distinct sheets
            // are separated by at least one non-band node.
            std::map<std::pair<int, int>, std::vector<std::pair<int, std::int32_t>>> columns;
            Vec3i q;
            for (q.k = center.k - half.k; q.k <= center.k + half.k; ++q.k)
                for (q.j = center.j - half.j; q.j <= center.j + half.j; ++q.j)
                    for (q.i = center.i - half.i; q.i <= center.i + half.i; ++q.i) {
                        if (!w.contains(q)) continue;
                        const std::int32_t pid = id[index_of(q)];
                        if (pid < 0) continue;
                        auto& cand = out.points[static_cast<size_t>(pid)];
                        // Only nodes whose own dominant axis matches the patch
                        // axis join: their graph slope over the lateral plane
                        // is at most one, so each sheet contributes a short
                        // contiguous run and the extra nodes are dilation
                        // duplicates.  Steeper nodes are left for patches of
                        // their own axis.
                        if (cand.degenerate || claimed[static_cast<size_t>(pid)] ||
                            cand.projection_axis != axial)
                            continue;
                        columns[{q[lat1], q[lat2]}].emplace_back(q[axial], pid);
                    }
            for (auto& [key, cells] : columns) {
                (void)key;
                // The box scan visits the axial index in increasing order for
                // a fixed lateral key, so each column is already sorted.
                size_t lo = 0;
                while (lo < cells.size()) {
                    size_t hi = lo;
                    while (hi + 1 < cells.size() && cells[hi + 1].first <= cells[hi].first + 1)
                        ++hi;
                    // A run cut off by the patch boundary may continue outside;
                    // leave it unclaimed so a patch centered on it (where it is
                    // interior) commits it exactly once.
                    const bool cut = cells[lo].first == center[axial] - half[axial] ||
                                     cells[hi].first == center[axial] + half[axial];
                    if (!cut) {
                        for (size_t n = lo; n <= hi; ++n)
                            claimed[static_cast<size_t>(cells[n].second)] = 1;
                        out.points[static_cast<size_t>(cells[lo].second)].refined = true;
                    }
                    lo = hi + 1;
                }
            }
        }
        for (const InterfacePoint& pt : out.points)
            if (pt.refined) ++out.refined_count;
    }
    return out;
}

// ============================================================================
// Surface integrals
// ============================================================================

double surface_integral(const InterfaceExtraction& interface,
                        const std::function<double(const InterfacePoint&)>& f,
                        bool refined_only) {
    PairwiseAccumulator acc;
    for (const InterfacePoint& pt : interface.points) {
        if (pt.degenerate) continue;
        if (refined_only && !pt.refined) continue;
        acc.push(f(pt) * pt.area_weight);
    }
    return acc.total();
}

double surface_area(const InterfaceExtraction& interface, bool refined_only) {
    return surface_integral(
        interface, [](const InterfacePoint&) { return 1.0; }, refined_only);
}

}  // namespace tfd
