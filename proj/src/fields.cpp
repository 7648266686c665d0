#include "tfd/fields.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tfd/numerics.hpp"

namespace tfd {

// ============================================================================
// Time grid and parameters
// ============================================================================

TimeGrid make_time_grid(double tau, double T) {
    if (!(tau > 0.0) || !(T > 0.0)) throw ConfigError("time grid: need tau > 0 and T > 0");
    int k = static_cast<int>(std::floor(T / tau));
    // Guard the floor against rounding on exact multiples.
    while ((k + 1) * tau <= T) ++k;
    while (k > 0 && k * tau > T) --k;
    TimeGrid tg;
    tg.tau = tau;
    tg.T = T;
    tg.n_steps = k;
    return tg;
}

double SchemeParams::truncation_threshold() const { return std::pow(h, -beta); }

// ============================================================================
// Cell averages
// ============================================================================

ScalarField average_initial(const GridSpec& grid, const IndexBox& window,
                            const std::function<double(const Vec3&)>& f0, int order) {
    const QuadratureRule& rule = gauss_legendre(order);
    const int nq = static_cast<int>(rule.nodes.size());
    // Offsets from the cell center and normalized weights (sum to 1).
    std::vector<double> off(static_cast<size_t>(nq)), wn(static_cast<size_t>(nq));
    for (int q = 0; q < nq; ++q) {
        off[static_cast<size_t>(q)] = 0.5 * grid.h * rule.nodes[static_cast<size_t>(q)];
        wn[static_cast<size_t>(q)] = 0.5 * rule.weights[static_cast<size_t>(q)];
    }
    ScalarField g(window);
    g.transform([&](const Vec3i& p, double) {
        const Vec3 x = grid.position(p);
        double acc = 0.0;
        for (int a = 0; a < nq; ++a)
            for (int b = 0; b < nq; ++b) {
                const double wab = wn[static_cast<size_t>(a)] * wn[static_cast<size_t>(b)];
                for (int c = 0; c < nq; ++c)
                    acc += wab * wn[static_cast<size_t>(c)] *
                           f0({x.x + off[static_cast<size_t>(a)], x.y + off[static_cast<size_t>(b)],
                               x.z + off[static_cast<size_t>(c)]});
            }
        return acc;
    });
    return g;
}

ScalarField sample_nodes(const GridSpec& grid, const IndexBox& window,
                         const std::function<double(const Vec3&)>& fn) {
    ScalarField g(window);
    g.transform([&](const Vec3i& p, double) { return fn(grid.position(p)); });
    return g;
}

VectorField average_velocity(const GridSpec& grid, const IndexBox& window,
                             const VelocityField& v, double t0, double t1, int space_order,
                             int time_order) {
    if (!(t1 > t0)) throw ConfigError("average_velocity: need t1 > t0");
    const QuadratureRule& srule = gauss_legendre(space_order);
    const int nq = static_cast<int>(srule.nodes.size());
    std::vector<double> off(static_cast<size_t>(nq)), wn(static_cast<size_t>(nq));
    for (int q = 0; q < nq; ++q) {
        off[static_cast<size_t>(q)] = 0.5 * grid.h * srule.nodes[static_cast<size_t>(q)];
        wn[static_cast<size_t>(q)] = 0.5 * srule.weights[static_cast<size_t>(q)];
    }
    // Time samples; a single midpoint sample is exact for steady fields.
    std::vector<double> tnode, tw;
    if (v.time_independent) {
        tnode = {0.5 * (t0 + t1)};
        tw = {1.0};
    } else {
        const QuadratureRule& trule = gauss_legendre(time_order);
        for (size_t q = 0; q < trule.nodes.size(); ++q) {
            tnode.push_back(0.5 * (t0 + t1) + 0.5 * (t1 - t0) * trule.nodes[q]);
            tw.push_back(0.5 * trule.weights[q]);
        }
    }

    VectorField u(window);
    Vec3i p;
    const IndexBox& w = u.window();
    for (p.k = w.lo.k; p.k < w.lo.k + w.n.k; ++p.k)
        for (p.j = w.lo.j; p.j < w.lo.j + w.n.j; ++p.j)
            for (p.i = w.lo.i; p.i < w.lo.i + w.n.i; ++p.i) {
                const Vec3 x = grid.position(p);
                Vec3 acc;
                for (size_t ti = 0; ti < tnode.size(); ++ti)
                    for (int a = 0; a < nq; ++a)
                        for (int b = 0; b < nq; ++b)
                            for (int c = 0; c < nq; ++c) {
                                const double wt = tw[ti] * wn[static_cast<size_t>(a)] *
                                                  wn[static_cast<size_t>(b)] *
                                                  wn[static_cast<size_t>(c)];
                                const Vec3 s = v.value(
                                    tnode[ti], {x.x + off[static_cast<size_t>(a)],
                                                x.y + off[static_cast<size_t>(b)],
                                                x.z + off[static_cast<size_t>(c)]});
                                acc = acc + wt * s;
                            }
                for (int comp = 0; comp < 3; ++comp) u.c[comp].ref(p) = acc[comp];
            }
    return u;
}

// ============================================================================
// Truncation
// ============================================================================

TruncationResult truncate_velocity(const VectorField& u, double threshold) {
    if (!(threshold > 0.0)) throw NumericError("truncate_velocity: threshold must be positive");
    TruncationResult out;
    out.u = u;
    for (int comp = 0; comp < 3; ++comp) {
        std::int64_t count = 0;
        for (double& s : out.u.c[comp].values()) {
            if (s > threshold) {
                s = threshold;
                ++count;
            } else if (s < -threshold) {
                s = -threshold;
                ++count;
            }
        }
        out.clamped_count[static_cast<size_t>(comp)] = count;
    }
    return out;
}

// ============================================================================
// Velocity norms
// ============================================================================

namespace {

/// Spatial norms of v(t, .) on a midpoint lattice: returns per component the
/// squared L2 norm, the cubed L3 norm and the squared L2 norm of the gradient
/// (central differences at the lattice spacing), plus the pointwise sup.
struct SpatialNorms {
    std::array<double, 3> l2_sq{}, l3_cu{}, grad_sq{};
    double sup_abs = 0.0;
};

SpatialNorms spatial_norms(const VelocityField& v, double t, const Vec3& lo, int ni, int nj,
                           int nk, double hr) {
    SpatialNorms out;
    PairwiseAccumulator l2[3], l3[3], gr[3];
    auto point = [&](int i, int j, int k) -> Vec3 {
        return {lo.x + (i + 0.5) * hr, lo.y + (j + 0.5) * hr, lo.z + (k + 0.5) * hr};
    };
    // Plane cache of sampled values: previous, current, next k-plane.
    const size_t plane = static_cast<size_t>(ni) * nj;
    std::vector<Vec3> planes[3];
    for (auto& pl : planes) pl.assign(plane, Vec3{});
    auto fill_plane = [&](std::vector<Vec3>& dst, int k) {
        if (k < 0 || k >= nk) {
            // Outside the box the field is zero (supports lie inside).
            std::fill(dst.begin(), dst.end(), Vec3{});
            return;
        }
        size_t q = 0;
        for (int j = 0; j < nj; ++j)
            for (int i = 0; i < ni; ++i, ++q) dst[q] = v.value(t, point(i, j, k));
    };
    fill_plane(planes[0], -1);
    fill_plane(planes[1], 0);

    const double cell = hr * hr * hr;
    for (int k = 0; k < nk; ++k) {
        fill_plane(planes[2], k + 1);
        const auto& prev = planes[0];
        const auto& cur = planes[1];
        const auto& next = planes[2];
        auto at = [&](const std::vector<Vec3>& pl, int i, int j) -> Vec3 {
            if (i < 0 || j < 0 || i >= ni || j >= nj) return {};
            return pl[static_cast<size_t>(j) * ni + i];
        };
        for (int j = 0; j < nj; ++j)
            for (int i = 0; i < ni; ++i) {
                const Vec3 val = at(cur, i, j);
                const Vec3 dx = (1.0 / (2.0 * hr)) * (at(cur, i + 1, j) - at(cur, i - 1, j));
                const Vec3 dy = (1.0 / (2.0 * hr)) * (at(cur, i, j + 1) - at(cur, i, j - 1));
                const Vec3 dz = (1.0 / (2.0 * hr)) * (at(next, i, j) - at(prev, i, j));
                for (int comp = 0; comp < 3; ++comp) {
                    const double a = std::abs(val[comp]);
                    out.sup_abs = std::max(out.sup_abs, a);
                    l2[comp].push(a * a * cell);
                    l3[comp].push(a * a * a * cell);
                    gr[comp].push((dx[comp] * dx[comp] + dy[comp] * dy[comp] +
                                   dz[comp] * dz[comp]) *
                                  cell);
                }
            }
        std::swap(planes[0], planes[1]);
        std::swap(planes[1], planes[2]);
    }
    for (int comp = 0; comp < 3; ++comp) {
        out.l2_sq[static_cast<size_t>(comp)] = l2[comp].total();
        out.l3_cu[static_cast<size_t>(comp)] = l3[comp].total();
        out.grad_sq[static_cast<size_t>(comp)] = gr[comp].total();
    }
    return out;
}

}  // namespace

VelocityNorms compute_velocity_norms(const VelocityField& v, const Vec3& box_lo,
                                     const Vec3& box_hi, double h_ref, double T,
                                     int time_samples) {
    if (!(h_ref > 0.0) || !(T > 0.0))
        throw ConfigError("velocity norms: need h_ref > 0 and T > 0");
    const int ni = std::max(1, static_cast<int>(std::ceil((box_hi.x - box_lo.x) / h_ref)));
    const int nj = std::max(1, static_cast<int>(std::ceil((box_hi.y - box_lo.y) / h_ref)));
    const int nk = std::max(1, static_cast<int>(std::ceil((box_hi.z - box_lo.z) / h_ref)));

    VelocityNorms out;
    if (v.time_independent) {
        const SpatialNorms sn = spatial_norms(v, 0.0, box_lo, ni, nj, nk, h_ref);
        out.sup_abs = sn.sup_abs;
        for (int c = 0; c < 3; ++c) {
            const size_t q = static_cast<size_t>(c);
            out.grad_l2l2[q] = std::sqrt(T * sn.grad_sq[q]);
            out.linf_l2[q] = std::sqrt(sn.l2_sq[q]);
            out.l3_cubed[q] = T * sn.l3_cu[q];
        }
    } else {
        if (time_samples < 2) throw ConfigError("velocity norms: need >= 2 time samples");
        std::array<double, 3> grad_int{}, l3_int{};
        for (int s = 0; s < time_samples; ++s) {
            const double t = T * s / (time_samples - 1);
            // Trapezoid weights.
            const double wt = (s == 0 || s == time_samples - 1 ? 0.5 : 1.0) * T /
                              (time_samples - 1);
            const SpatialNorms sn = spatial_norms(v, t, box_lo, ni, nj, nk, h_ref);
            out.sup_abs = std::max(out.sup_abs, sn.sup_abs);
            for (int c = 0; c < 3; ++c) {
                const size_t q = static_cast<size_t>(c);
                grad_int[q] += wt * sn.grad_sq[q];
                l3_int[q] += wt * sn.l3_cu[q];
                out.linf_l2[q] = std::max(out.linf_l2[q], std::sqrt(sn.l2_sq[q]));
            }
        }
        for (int c = 0; c < 3; ++c) {
            const size_t q = static_cast<size_t>(c);
            out.grad_l2l2[q] = std::sqrt(grad_int[q]);
            out.l3_cubed[q] = l3_int[q];
        }
    }

    const double lead = std::pow(48.0, 1.5) * std::pow(T, 0.25);
    for (int c = 0; c < 3; ++c) {
        const size_t q = static_cast<size_t>(c);
        out.m1[q] = lead * std::pow(out.grad_l2l2[q], 1.5) * std::pow(out.linf_l2[q], 1.5);
        out.m1_sum += out.m1[q];
    }
    return out;
}

void TruncationMeasure::finalize(const VelocityNorms& norms, const SchemeParams& params) {
    m1 = norms.m1;
    bound = norms.m1_sum * std::pow(params.h, 3.0 * params.beta);
}

}  // namespace tfd
