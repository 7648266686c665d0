/// @file hhd.cpp
/// @brief Conjugate-gradient solve of the forward-gradient normal equations.

#include "tfd/hhd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tfd/errors.hpp"
#include "tfd/numerics.hpp"

namespace tfd {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    PairwiseAccumulator acc;
    acc.reserve(a.size());
    for (size_t i = 0; i < a.size(); ++i) acc.push(a[i] * b[i]);
    return acc.total();
}

}  // namespace

// ============================================================================
// InnerGradient
// ============================================================================

InnerGradient::InnerGradient(const DomainMask& mask) : h_(mask.grid().h) {
    const auto inner = mask.inner();
    nodes_.assign(inner.begin(), inner.end());
    neighbours_.resize(nodes_.size());
    for (size_t n = 0; n < nodes_.size(); ++n) {
        for (int axis = 0; axis < 3; ++axis) {
            const Vec3i e = unit_offset(axis, 1);
            neighbours_[n][static_cast<size_t>(2 * axis)] =
                static_cast<std::int32_t>(mask.inner_rank(nodes_[n] + e));
            neighbours_[n][static_cast<size_t>(2 * axis + 1)] =
                static_cast<std::int32_t>(mask.inner_rank(nodes_[n] - e));
        }
    }
}

void InnerGradient::apply_normal(const std::vector<double>& x, std::vector<double>& y) const {
    const double inv_h2 = 1.0 / (h_ * h_);
    y.resize(x.size());
    for (size_t n = 0; n < nodes_.size(); ++n) {
        const auto& nb = neighbours_[n];
        double s = 0.0;
        for (int axis = 0; axis < 3; ++axis) {
            const std::int32_t rp = nb[static_cast<size_t>(2 * axis)];
            const std::int32_t rm = nb[static_cast<size_t>(2 * axis + 1)];
            s += x[n] - (rp >= 0 ? x[static_cast<size_t>(rp)] : 0.0);
            if (rm >= 0) s += x[n] - x[static_cast<size_t>(rm)];
        }
        y[n] = s * inv_h2;
    }
}

std::vector<double> InnerGradient::data_term(const VectorField& u, double h) const {
    std::vector<double> b(nodes_.size());
    for (size_t n = 0; n < nodes_.size(); ++n) {
        const Vec3i& p = nodes_[n];
        double s = 0.0;
        for (int axis = 0; axis < 3; ++axis) {
            s += u.c[axis].at(p);
            if (neighbours_[n][static_cast<size_t>(2 * axis + 1)] >= 0)
                s -= u.c[axis].at(p - unit_offset(axis, 1));
        }
        b[n] = -s / h;
    }
    return b;
}

std::array<std::vector<double>, 3> InnerGradient::gradient(const std::vector<double>& x) const {
    std::array<std::vector<double>, 3> g;
    for (auto& comp : g) comp.resize(nodes_.size());
    for (size_t n = 0; n < nodes_.size(); ++n) {
        for (int axis = 0; axis < 3; ++axis) {
            const std::int32_t rp = neighbours_[n][static_cast<size_t>(2 * axis)];
            g[static_cast<size_t>(axis)][n] =
                ((rp >= 0 ? x[static_cast<size_t>(rp)] : 0.0) - x[n]) / h_;
        }
    }
    return g;
}

// ============================================================================
// Projection
// ============================================================================

HHDResult project_divergence_free(const VectorField& u, const DomainMask& mask,
                                  const HHDOptions& options) {
    if (mask.inner().empty())
        throw NumericError("project_divergence_free: the mask has no inner nodes");
    const InnerGradient G(mask);
    const double h = G.h();
    const std::int64_t N = G.size();

    // --- conjugate gradients on G^T G phi = G^T u ---------------------------
    std::vector<double> b = G.data_term(u, h);
    const double b_norm = std::sqrt(dot(b, b));
    std::vector<double> x(static_cast<size_t>(N), 0.0);
    std::vector<double> r = b, p = b, Ap;
    int iterations = 0;
    double rel_res = b_norm > 0.0 ? 1.0 : 0.0;
    if (b_norm > 0.0) {
        int max_iter = options.max_iterations;
        if (max_iter <= 0)
            max_iter = static_cast<int>(
                std::min<std::int64_t>(N, 200 + 40 * static_cast<std::int64_t>(std::cbrt(
                                                        static_cast<double>(N)))));
        double rr = dot(r, r);
        const double stop2 = options.rel_tol * options.rel_tol * b_norm * b_norm;
        while (rr > stop2 && iterations < max_iter) {
            G.apply_normal(p, Ap);
            const double pAp = dot(p, Ap);
            if (!(pAp > 0.0))
                throw SolverError("project_divergence_free: CG lost positivity");
            const double alpha = rr / pAp;
            for (size_t i = 0; i < x.size(); ++i) x[i] += alpha * p[i];
            for (size_t i = 0; i < x.size(); ++i) r[i] -= alpha * Ap[i];
            const double rr_new = dot(r, r);
            const double beta = rr_new / rr;
            for (size_t i = 0; i < x.size(); ++i) p[i] = r[i] + beta * p[i];
            rr = rr_new;
            ++iterations;
        }
        rel_res = std::sqrt(rr) / b_norm;
        if (rel_res > options.rel_tol) {
            char buf[128];
            std::snprintf(buf, sizeof(buf),
                          "project_divergence_free: CG stalled at %.3e after %d iterations",
                          rel_res, iterations);
            throw SolverError(buf);
        }
    }

    // --- reconstruction ------------------------------------------------------
    const std::array<std::vector<double>, 3> grad = G.gradient(x);
    HHDResult result{VectorField(u.window()), ScalarField(u.window())};
    result.cg_iterations = iterations;
    result.cg_relative_residual = rel_res;

    const double h3 = h * h * h;
    PairwiseAccumulator u2_acc, w2_acc, g2_acc, ortho_acc;
    const auto& nodes = G.nodes();
    for (size_t n = 0; n < nodes.size(); ++n) {
        const Vec3i& pnt = nodes[n];
        result.phi.ref(pnt) = x[n];
        for (int axis = 0; axis < 3; ++axis) {
            const double uj = u.c[axis].at(pnt);
            const double gj = grad[static_cast<size_t>(axis)][n];
            const double wj = uj - gj;
            result.w.c[axis].ref(pnt) = wj;
            u2_acc.push(uj * uj * h3);
            w2_acc.push(wj * wj * h3);
            g2_acc.push(gj * gj * h3);
            ortho_acc.push(wj * gj * h3);
        }
    }
    result.u_norm2 = std::sqrt(u2_acc.total());
    result.w_norm2 = std::sqrt(w2_acc.total());
    result.grad_norm2 = std::sqrt(g2_acc.total());
    result.orthogonality = ortho_acc.total();

    double div_inf = 0.0;
    for (const Vec3i& pnt : nodes) {
        double d = 0.0;
        for (int axis = 0; axis < 3; ++axis) {
            const Vec3i e = unit_offset(axis, 1);
            d += result.w.c[axis].at(pnt) - result.w.c[axis].at(pnt - e);
        }
        div_inf = std::max(div_inf, std::abs(d / h));
    }
    result.div_residual_inf = div_inf;
    return result;
}

}  // namespace tfd
