#include "tfd/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tfd/numerics.hpp"

namespace tfd {

// ============================================================================
// GridSpec / IndexBox
// ============================================================================

GridSpec::GridSpec(double h_, const Vec3& origin_, const Vec3i& dims_)
    : h(h_), origin(origin_), dims(dims_) {
    if (!(h > 0.0)) throw ConfigError("GridSpec: spacing must be positive");
    if (dims.i < 4 || dims.j < 4 || dims.k < 4)
        throw ConfigError("GridSpec: need at least 4 nodes per axis");
}

IndexBox IndexBox::clipped(const IndexBox& other) const {
    IndexBox out;
    for (int a = 0; a < 3; ++a) {
        const int lo_a = std::max(lo[a], other.lo[a]);
        const int hi_a = std::min(lo[a] + n[a], other.lo[a] + other.n[a]);
        out.lo[a] = lo_a;
        out.n[a] = std::max(0, hi_a - lo_a);
    }
    return out;
}

// ============================================================================
// Domain
// ============================================================================

Domain Domain::box(const Vec3& lo, const Vec3& hi) {
    Domain d;
    d.kind = Kind::Box;
    d.box_lo = lo;
    d.box_hi = hi;
    for (int a = 0; a < 3; ++a)
        if (!(lo[a] < hi[a])) throw ConfigError("Domain::box: lo must be < hi per axis");
    return d;
}

Domain Domain::signed_distance(std::function<double(const Vec3&)> fn) {
    Domain d;
    d.kind = Kind::SignedDistance;
    d.sdf = std::move(fn);
    if (!d.sdf) throw ConfigError("Domain::signed_distance: null predicate");
    return d;
}

bool Domain::contains(const Vec3& p) const {
    if (kind == Kind::Box) {
        return p.x > box_lo.x && p.x < box_hi.x && p.y > box_lo.y && p.y < box_hi.y &&
               p.z > box_lo.z && p.z < box_hi.z;
    }
    return sdf(p) < 0.0;
}

bool Domain::contains_cube2h(const Vec3& p, double h) const {
    if (kind == Kind::Box) {
        // Exact test for the half-open cube [p - h, p + h)^3 inside the open box.
        for (int a = 0; a < 3; ++a) {
            if (!(p[a] - h > box_lo[a])) return false;
            if (!(p[a] + h <= box_hi[a])) return false;
        }
        return true;
    }
    // Sample the cube at 8 corners and 6 face centers.
    for (int si = -1; si <= 1; si += 2)
        for (int sj = -1; sj <= 1; sj += 2)
            for (int sk = -1; sk <= 1; sk += 2)
                if (!contains({p.x + si * h, p.y + sj * h, p.z + sk * h})) return false;
    for (int a = 0; a < 3; ++a)
        for (int s = -1; s <= 1; s += 2) {
            Vec3 q = p;
            q[a] += s * h;
            if (!contains(q)) return false;
        }
    return true;
}

// ============================================================================
// DomainMask
// ============================================================================

DomainMask::DomainMask(const GridSpec& grid, const Domain& domain) : grid_(grid) {
    const auto n = grid.node_count();
    flags_.assign(static_cast<size_t>(n), 0);
    inner_ranks_.assign(static_cast<size_t>(n), -1);

    auto linear = [&](const Vec3i& p) {
        return static_cast<size_t>((static_cast<std::int64_t>(p.k) * grid_.dims.j + p.j) *
                                       grid_.dims.i +
                                   p.i);
    };

    // Pass 1: interior membership via the 2h cube criterion.
    Vec3i p;
    for (p.k = 0; p.k < grid_.dims.k; ++p.k)
        for (p.j = 0; p.j < grid_.dims.j; ++p.j)
            for (p.i = 0; p.i < grid_.dims.i; ++p.i)
                if (domain.contains_cube2h(grid_.position(p), grid_.h))
                    flags_[linear(p)] = 1;

    // Pass 2: boundary layer = interior nodes with a non-interior axis neighbour.
    for (p.k = 0; p.k < grid_.dims.k; ++p.k)
        for (p.j = 0; p.j < grid_.dims.j; ++p.j)
            for (p.i = 0; p.i < grid_.dims.i; ++p.i) {
                const size_t q = linear(p);
                if (flags_[q] == 0) continue;
                bool layer = false;
                for (int a = 0; a < 3 && !layer; ++a)
                    for (int s = -1; s <= 1 && !layer; s += 2) {
                        const Vec3i nb = p + unit_offset(a, s);
                        if (nb.i < 0 || nb.j < 0 || nb.k < 0 || nb.i >= grid_.dims.i ||
                            nb.j >= grid_.dims.j || nb.k >= grid_.dims.k || flags_[linear(nb)] == 0)
                            layer = true;
                    }
                if (layer) flags_[q] = 2;
            }

    // Pass 3: node lists in deterministic (k, j, i) order, plus inner ranks.
    for (p.k = 0; p.k < grid_.dims.k; ++p.k)
        for (p.j = 0; p.j < grid_.dims.j; ++p.j)
            for (p.i = 0; p.i < grid_.dims.i; ++p.i) {
                const size_t q = linear(p);
                if (flags_[q] == 0) continue;
                interior_.push_back(p);
                if (flags_[q] == 2) {
                    boundary_.push_back(p);
                } else {
                    inner_ranks_[q] = static_cast<std::int64_t>(inner_.size());
                    inner_.push_back(p);
                }
            }
}

std::uint8_t DomainMask::flag(const Vec3i& p) const {
    if (p.i < 0 || p.j < 0 || p.k < 0 || p.i >= grid_.dims.i || p.j >= grid_.dims.j ||
        p.k >= grid_.dims.k)
        return 0;
    return flags_[static_cast<size_t>((static_cast<std::int64_t>(p.k) * grid_.dims.j + p.j) *
                                          grid_.dims.i +
                                      p.i)];
}

std::int64_t DomainMask::inner_rank(const Vec3i& p) const {
    if (p.i < 0 || p.j < 0 || p.k < 0 || p.i >= grid_.dims.i || p.j >= grid_.dims.j ||
        p.k >= grid_.dims.k)
        return -1;
    return inner_ranks_[static_cast<size_t>(
        (static_cast<std::int64_t>(p.k) * grid_.dims.j + p.j) * grid_.dims.i + p.i)];
}

// ============================================================================
// Fields
// ============================================================================

ScalarField::ScalarField(const IndexBox& window) : window_(window) {
    if (window.n.i < 0 || window.n.j < 0 || window.n.k < 0)
        throw NumericError("ScalarField: negative window extent");
    data_.assign(static_cast<size_t>(window.count()), 0.0);
}

// ============================================================================
// Difference operators
// ============================================================================

namespace {

template <typename Stencil>
ScalarField apply_axis_stencil(const ScalarField& f, int axis, Stencil&& stencil) {
    ScalarField out(f.window().grown_axis(axis, 1));
    const Vec3i e = unit_offset(axis, 1);
    out.transform([&](const Vec3i& p, double) { return stencil(f, p, e); });
    return out;
}

}  // namespace

ScalarField forward_diff(const ScalarField& f, int axis, double h) {
    return apply_axis_stencil(f, axis, [h](const ScalarField& g, const Vec3i& p, const Vec3i& e) {
        return (g.at(p + e) - g.at(p)) / h;
    });
}

ScalarField backward_diff(const ScalarField& f, int axis, double h) {
    return apply_axis_stencil(f, axis, [h](const ScalarField& g, const Vec3i& p, const Vec3i& e) {
        return (g.at(p) - g.at(p - e)) / h;
    });
}

ScalarField central_diff(const ScalarField& f, int axis, double h) {
    return apply_axis_stencil(f, axis, [h](const ScalarField& g, const Vec3i& p, const Vec3i& e) {
        return (g.at(p + e) - g.at(p - e)) / (2.0 * h);
    });
}

ScalarField second_diff(const ScalarField& f, int axis, double h) {
    return apply_axis_stencil(f, axis, [h](const ScalarField& g, const Vec3i& p, const Vec3i& e) {
        return (g.at(p + e) + g.at(p - e) - 2.0 * g.at(p)) / (h * h);
    });
}

ScalarField backward_divergence(const VectorField& u, double h) {
    ScalarField out(u.window().grown(1));
    out.transform([&](const Vec3i& p, double) {
        double s = 0.0;
        for (int a = 0; a < 3; ++a) {
            const Vec3i e = unit_offset(a, 1);
            s += (u.c[a].at(p) - u.c[a].at(p - e)) / h;
        }
        return s;
    });
    return out;
}

ScalarField central_divergence(const VectorField& u, double h) {
    ScalarField out(u.window().grown(1));
    out.transform([&](const Vec3i& p, double) {
        double s = 0.0;
        for (int a = 0; a < 3; ++a) {
            const Vec3i e = unit_offset(a, 1);
            s += (u.c[a].at(p + e) - u.c[a].at(p - e)) / (2.0 * h);
        }
        return s;
    });
    return out;
}

// ============================================================================
// Norms
// ============================================================================

double lp_norm(const ScalarField& f, double p, double h) {
    if (p == std::numeric_limits<double>::infinity() || p <= 0.0) {
        if (p <= 0.0) throw NumericError("lp_norm: p must be positive or infinity");
        double m = 0.0;
        for (double v : f.values()) m = std::max(m, std::abs(v));
        return m;
    }
    PairwiseAccumulator acc;
    acc.reserve(f.values().size());
    const double cell = h * h * h;
    for (double v : f.values()) acc.push(std::pow(std::abs(v), p) * cell);
    return std::pow(acc.total(), 1.0 / p);
}

double lp_norm(const ScalarField& f, double p, double h, std::span<const Vec3i> nodes) {
    if (p == std::numeric_limits<double>::infinity() || p <= 0.0) {
        if (p <= 0.0) throw NumericError("lp_norm: p must be positive or infinity");
        double m = 0.0;
        for (const Vec3i& q : nodes) m = std::max(m, std::abs(f.at(q)));
        return m;
    }
    PairwiseAccumulator acc;
    acc.reserve(nodes.size());
    const double cell = h * h * h;
    for (const Vec3i& q : nodes) acc.push(std::pow(std::abs(f.at(q)), p) * cell);
    return std::pow(acc.total(), 1.0 / p);
}

double inner_product(const ScalarField& f, const ScalarField& g, double h) {
    // Iterate over the intersection of supports (the product vanishes elsewhere).
    const IndexBox box = f.window().clipped(g.window());
    PairwiseAccumulator acc;
    acc.reserve(static_cast<size_t>(std::max<std::int64_t>(box.count(), 0)));
    const double cell = h * h * h;
    Vec3i p;
    for (p.k = box.lo.k; p.k < box.lo.k + box.n.k; ++p.k)
        for (p.j = box.lo.j; p.j < box.lo.j + box.n.j; ++p.j)
            for (p.i = box.lo.i; p.i < box.lo.i + box.n.i; ++p.i)
                acc.push(f.at_unchecked(p) * g.at_unchecked(p) * cell);
    return acc.total();
}

double inner_product(const ScalarField& f, const ScalarField& g, double h,
                     std::span<const Vec3i> nodes) {
    PairwiseAccumulator acc;
    acc.reserve(nodes.size());
    const double cell = h * h * h;
    for (const Vec3i& q : nodes) acc.push(f.at(q) * g.at(q) * cell);
    return acc.total();
}

}  // namespace tfd
