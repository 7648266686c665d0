/// @file implicit_scheme.cpp
/// @brief Implicit step operator, GMRES solver and run driver.

#include "tfd/implicit_scheme.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <utility>

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

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

// ============================================================================
// GMRES
// ============================================================================

GmresResult gmres_solve(
    const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply,
    const std::vector<double>& b, std::vector<double>& x, const GmresOptions& options) {
    const size_t n = b.size();
    if (x.size() != n) throw NumericError("gmres_solve: guess/right-hand side size mismatch");
    const int m = std::max(1, options.restart);

    GmresResult result;
    const double b_norm = norm(b);
    if (b_norm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        result.converged = true;
        return result;
    }
    const double target = options.rel_tol * b_norm;

    std::vector<std::vector<double>> basis;  // allocated lazily, at most m + 1
    std::vector<double> hess(static_cast<size_t>(m + 1) * static_cast<size_t>(m), 0.0);
    auto H = [&](int r, int c) -> double& {
        return hess[static_cast<size_t>(c) * static_cast<size_t>(m + 1) + static_cast<size_t>(r)];
    };
    std::vector<double> cs(static_cast<size_t>(m)), sn(static_cast<size_t>(m)),
        gamma(static_cast<size_t>(m + 1));
    std::vector<double> work(n);

    for (int restart = 0; restart < options.max_restarts; ++restart) {
        apply(x, work);
        std::vector<double> r(n);
        for (size_t i = 0; i < n; ++i) r[i] = b[i] - work[i];
        double beta = norm(r);
        result.relative_residual = beta / b_norm;
        if (beta <= target) {
            result.converged = true;
            return result;
        }

        if (basis.empty()) basis.emplace_back(n);
        basis[0] = std::move(r);
        for (double& v : basis[0]) v /= beta;
        std::fill(gamma.begin(), gamma.end(), 0.0);
        gamma[0] = beta;

        int k = 0;
        for (; k < m; ++k) {
            if (static_cast<int>(basis.size()) < k + 2) basis.emplace_back(n);
            apply(basis[static_cast<size_t>(k)], basis[static_cast<size_t>(k) + 1]);
            std::vector<double>& v = basis[static_cast<size_t>(k) + 1];
            for (int r2 = 0; r2 <= k; ++r2) {
                const double hij = dot(basis[static_cast<size_t>(r2)], v);
                H(r2, k) = hij;
                const std::vector<double>& br = basis[static_cast<size_t>(r2)];
                for (size_t i = 0; i < n; ++i) v[i] -= hij * br[i];
            }
            const double hlast = norm(v);
            H(k + 1, k) = hlast;
            if (hlast > 0.0)
                for (double& c : v) c /= hlast;

            // Apply the stored Givens rotations, then create a new one.
            for (int r2 = 0; r2 < k; ++r2) {
                const double t = cs[static_cast<size_t>(r2)] * H(r2, k) +
                                 sn[static_cast<size_t>(r2)] * H(r2 + 1, k);
                H(r2 + 1, k) = -sn[static_cast<size_t>(r2)] * H(r2, k) +
                               cs[static_cast<size_t>(r2)] * H(r2 + 1, k);
                H(r2, k) = t;
            }
            const double denom = std::hypot(H(k, k), H(k + 1, k));
            if (denom == 0.0) throw SolverError("gmres_solve: breakdown in the rotations");
            cs[static_cast<size_t>(k)] = H(k, k) / denom;
            sn[static_cast<size_t>(k)] = H(k + 1, k) / denom;
            H(k, k) = denom;
            H(k + 1, k) = 0.0;
            gamma[static_cast<size_t>(k) + 1] = -sn[static_cast<size_t>(k)] * gamma[static_cast<size_t>(k)];
            gamma[static_cast<size_t>(k)] *= cs[static_cast<size_t>(k)];
            ++result.iterations;

            if (std::abs(gamma[static_cast<size_t>(k) + 1]) <= target || hlast == 0.0) {
                ++k;
                break;
            }
        }

        // Back substitution of the k x k triangular system.
        std::vector<double> y(static_cast<size_t>(k), 0.0);
        for (int r2 = k - 1; r2 >= 0; --r2) {
            double s = gamma[static_cast<size_t>(r2)];
            for (int c2 = r2 + 1; c2 < k; ++c2) s -= H(r2, c2) * y[static_cast<size_t>(c2)];
            y[static_cast<size_t>(r2)] = s / H(r2, r2);
        }
        for (int c2 = 0; c2 < k; ++c2) {
            const std::vector<double>& bc = basis[static_cast<size_t>(c2)];
            const double yc = y[static_cast<size_t>(c2)];
            for (size_t i = 0; i < n; ++i) x[i] += yc * bc[i];
        }
        result.relative_residual = std::abs(gamma[static_cast<size_t>(k)]) / b_norm;
        if (result.relative_residual <= options.rel_tol) {
            result.converged = true;
            return result;
        }
    }
    return result;
}

// ============================================================================
// Step operator
// ============================================================================

ImplicitOperator::ImplicitOperator(const DomainMask& mask, const VectorField& w, double tau) {
    const double h = mask.grid().h;
    const double r = tau / (2.0 * h);
    const auto inner = mask.inner();
    nodes_.assign(inner.begin(), inner.end());
    neighbours_.resize(nodes_.size());
    diag_.resize(nodes_.size());
    coef_.resize(nodes_.size());
    for (size_t n = 0; n < nodes_.size(); ++n) {
        const Vec3i& p = nodes_[n];
        double d = 1.0;
        for (int axis = 0; axis < 3; ++axis) {
            const Vec3i e = unit_offset(axis, 1);
            neighbours_[n][static_cast<size_t>(2 * axis)] =
                static_cast<std::int32_t>(mask.inner_rank(p + e));
            neighbours_[n][static_cast<size_t>(2 * axis + 1)] =
                static_cast<std::int32_t>(mask.inner_rank(p - e));
            const double w_here = w.c[axis].at(p);
            const double w_back = w.c[axis].at(p - e);
            d += r * (w_back - w_here);
            coef_[n][static_cast<size_t>(2 * axis)] = r * w_here;    // times g(x + h e_j)
            coef_[n][static_cast<size_t>(2 * axis + 1)] = -r * w_back;  // times g(x - h e_j)
        }
        diag_[n] = d;
    }
}

void ImplicitOperator::apply(const std::vector<double>& x, std::vector<double>& y) const {
    y.resize(x.size());
    for (size_t n = 0; n < nodes_.size(); ++n) {
        double s = diag_[n] * x[n];
        const auto& nb = neighbours_[n];
        const auto& cf = coef_[n];
        for (int q = 0; q < 6; ++q)
            if (nb[static_cast<size_t>(q)] >= 0)
                s += cf[static_cast<size_t>(q)] * x[static_cast<size_t>(nb[static_cast<size_t>(q)])];
        y[n] = s;
    }
}

double ImplicitOperator::skew_defect() const {
    double d = 0.0;
    for (double v : diag_) d = std::max(d, std::abs(v - 1.0));
    return d;
}

// ============================================================================
// Run driver
// ============================================================================

ImplicitRun run_implicit(const ImplicitConfig& cfg) {
    if (cfg.velocity == nullptr) throw ConfigError("run_implicit: velocity not set");
    if (cfg.mask == nullptr) throw ConfigError("run_implicit: domain mask not set");
    if (!cfg.initial) throw ConfigError("run_implicit: initial datum not set");
    if (cfg.grid.h != cfg.params.h)
        throw ConfigError("run_implicit: grid.h and params.h disagree");
    if (!(cfg.params.tau > 0.0)) throw ConfigError("run_implicit: tau must be positive");
    if (cfg.mask->inner().empty())
        throw ConfigError("run_implicit: the domain mask has no inner nodes");

    const DomainMask& mask = *cfg.mask;
    const IndexBox window{{0, 0, 0}, cfg.grid.dims};
    const double h = cfg.params.h;
    const double h3 = h * h * h;
    const double threshold = cfg.params.truncation_threshold();

    ImplicitRun run;
    run.time = make_time_grid(cfg.params.tau, cfg.t_final);

    // Initial state: cell averages at inner nodes, zero elsewhere.
    const auto inner = mask.inner();
    const size_t N = inner.size();
    std::vector<double> state(N);
    {
        const ScalarField avg = average_initial(cfg.grid, window, cfg.initial,
                                                cfg.quad_space_order);
        for (size_t n = 0; n < N; ++n) state[n] = avg.at(inner[n]);
    }
    auto to_field = [&](const std::vector<double>& v) {
        ScalarField f(window);
        for (size_t n = 0; n < N; ++n) f.ref(inner[n]) = v[n];
        return f;
    };
    auto energy_of = [&](const std::vector<double>& v) { return std::sqrt(dot(v, v) * h3); };

    run.energy_initial = energy_of(state);
    if (cfg.on_step) cfg.on_step(0, 0.0, to_field(state));

    const bool steady = cfg.velocity->time_independent;
    std::unique_ptr<ImplicitOperator> op;
    double cached_div_inf = 0.0;
    std::array<std::int64_t, 3> cached_clamped{0, 0, 0};

    std::vector<double> next(N);
    run.steps.reserve(static_cast<size_t>(run.time.n_steps));
    for (int n = 0; n < run.time.n_steps; ++n) {
        ImplicitStepStats stats;
        if (!op || !steady) {
            VectorField u_avg = average_velocity(cfg.grid, window, *cfg.velocity,
                                                 run.time.time(n), run.time.time(n + 1),
                                                 cfg.quad_space_order, cfg.quad_time_order);
            if (cfg.params.truncation_enabled) {
                TruncationResult tr = truncate_velocity(u_avg, threshold);
                u_avg = std::move(tr.u);
                cached_clamped = tr.clamped_count;
            } else {
                cached_clamped = {0, 0, 0};
            }
            const HHDResult proj = project_divergence_free(u_avg, mask, cfg.hhd);
            cached_div_inf = proj.div_residual_inf;
            op = std::make_unique<ImplicitOperator>(mask, proj.w, cfg.params.tau);
        }
        stats.hhd_div_inf = cached_div_inf;
        stats.clamped = cached_clamped;
        stats.skew_defect = op->skew_defect();

        next = state;  // initial guess: the previous state
        const GmresResult sol = gmres_solve(
            [&](const std::vector<double>& xx, std::vector<double>& yy) { op->apply(xx, yy); },
            state, next, cfg.gmres);
        if (!sol.converged) {
            char buf[128];
            std::snprintf(buf, sizeof(buf),
                          "run_implicit: GMRES stalled at %.3e at step %d",
                          sol.relative_residual, n);
            throw SolverError(buf);
        }
        stats.gmres_iterations = sol.iterations;
        stats.gmres_residual = sol.relative_residual;
        state.swap(next);
        stats.energy = energy_of(state);
        run.steps.push_back(stats);
        if (cfg.on_step) cfg.on_step(n + 1, run.time.time(n + 1), to_field(state));
    }

    run.g = to_field(state);
    return run;
}

}  // namespace tfd
