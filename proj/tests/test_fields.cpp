/// @file test_fields.cpp
/// @brief Time grid, averaging, truncation and velocity-norm tests.

#include <cmath>
#include <random>

#include "doctest.h"
#include "tfd/fields.hpp"
#include "tfd/numerics.hpp"

using namespace tfd;

// ============================================================================
// Time grid
// ============================================================================

TEST_CASE("time grid step count satisfies tau * n <= T < tau * (n + 1)") {
    CHECK(make_time_grid(0.1, 1.0).n_steps == 10);
    CHECK(make_time_grid(0.3, 1.0).n_steps == 3);
    CHECK(make_time_grid(0.1, 0.999).n_steps == 9);
    CHECK(make_time_grid(2.0, 1.0).n_steps == 0);
    // Exact multiples must not get lost to rounding.
    const TimeGrid tg = make_time_grid(1.0 / 3.0, 1.0);
    CHECK(tg.n_steps == 3);
    for (double tau : {0.1, 0.07, 1.0 / 48.0, 3e-4}) {
        for (double T : {0.5, 1.0, 2.718}) {
            const TimeGrid g = make_time_grid(tau, T);
            CHECK(g.n_steps * tau <= T);
            CHECK(T < (g.n_steps + 1) * tau);
        }
    }
}

// ============================================================================
// Cell averages of the initial datum
// ============================================================================

namespace {

/// Exact cell average of x^q over [a, b) divided by the length.
double monomial_avg(double a, double b, int q) {
    return (std::pow(b, q + 1) - std::pow(a, q + 1)) / ((q + 1) * (b - a));
}

}  // namespace

TEST_CASE("cell averages are exact for polynomials up to degree 5") {
    // f(x, y, z) = 2 x^3 - y^2 + z^5 - 0.5; the tensor 3-point rule is exact
    // up to degree 5 per axis, and the product structure gives a closed form.
    const GridSpec grid(0.25, {-1.0, -1.0, -1.0}, {9, 9, 9});
    auto f = [](const Vec3& p) {
        return 2.0 * p.x * p.x * p.x - p.y * p.y + std::pow(p.z, 5) - 0.5;
    };
    const IndexBox window{{1, 1, 1}, {6, 6, 6}};
    const ScalarField g = average_initial(grid, window, f, 3);
    g.for_each([&](const Vec3i& p, double v) {
        const Vec3 x = grid.position(p);
        const double h2 = 0.5 * grid.h;
        const double expect = 2.0 * monomial_avg(x.x - h2, x.x + h2, 3) -
                              monomial_avg(x.y - h2, x.y + h2, 2) +
                              monomial_avg(x.z - h2, x.z + h2, 5) - 0.5;
        CHECK(v == doctest::Approx(expect).epsilon(1e-13));
    });
}

TEST_CASE("cell average of the bump matches an antithetic Monte-Carlo oracle") {
    // One million quasi-stratified samples (79^3 strata, antithetic pairs) on
    // a single cell; the averaging quadrature must agree to 1e-6 absolutely.
    const InitialData f0 = make_initial_preset("bump");
    const GridSpec grid(1.0 / 16.0, {0.0, 0.0, 0.0}, {9, 9, 9});
    const Vec3i node{4, 1, 0};  // cell near the bump's shoulder
    const IndexBox window{node, {1, 1, 1}};
    const ScalarField g =
        average_initial(grid, window, [&](const Vec3& x) { return f0.value(x); }, 3);

    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int m = 79;
    const Vec3 x0 = grid.position(node);
    const double cell_lo[3] = {x0.x - 0.5 * grid.h, x0.y - 0.5 * grid.h, x0.z - 0.5 * grid.h};
    const double sub = grid.h / m;
    long double acc = 0.0L;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c) {
                const double ox = unit(rng), oy = unit(rng), oz = unit(rng);
                const Vec3 p1{cell_lo[0] + (a + ox) * sub, cell_lo[1] + (b + oy) * sub,
                              cell_lo[2] + (c + oz) * sub};
                const Vec3 p2{cell_lo[0] + (a + 1.0 - ox) * sub, cell_lo[1] + (b + 1.0 - oy) * sub,
                              cell_lo[2] + (c + 1.0 - oz) * sub};
                acc += 0.5L * (static_cast<long double>(f0.value(p1)) + f0.value(p2));
            }
    const double mc = static_cast<double>(acc / (static_cast<long double>(m) * m * m));
    CHECK(std::abs(g.at(node) - mc) <= 1e-6);
    CHECK(g.at(node) > 0.0);  // the cell actually sees the bump
}

TEST_CASE("averaged initial data dominates no lattice p-norm beyond the continuum norm") {
    // Cell averaging is an L^p contraction: h^3 sum |avg|^p <= integral |f|^p.
    // The continuum norms are estimated with a fine midpoint rule.
    const InitialData f0 = make_initial_preset("double-bump");
    const double h = 1.0 / 16.0;
    const GridSpec grid(h, {-1.25, -1.25, -1.25}, {41, 41, 41});
    const ScalarField g = average_initial(
        grid, IndexBox{{0, 0, 0}, grid.dims}, [&](const Vec3& x) { return f0.value(x); }, 3);

    const int n = 240;  // midpoint lattice over [-1.25, 1.25]^3
    const double hr = 2.5 / n;
    for (double p : {1.0, 2.0, 4.0}) {
        PairwiseAccumulator acc;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) {
                    const Vec3 x{-1.25 + (a + 0.5) * hr, -1.25 + (b + 0.5) * hr,
                                 -1.25 + (c + 0.5) * hr};
                    acc.push(std::pow(std::abs(f0.value(x)), p) * hr * hr * hr);
                }
        const double continuum = std::pow(acc.total(), 1.0 / p);
        CHECK(lp_norm(g, p, h) <= continuum + 1e-6);
    }
    double sup_f = 0.0;
    g.for_each([&](const Vec3i&, double v) { sup_f = std::max(sup_f, std::abs(v)); });
    CHECK(sup_f <= f0.sup_bound + 1e-12);
}

// ============================================================================
// Interval-cell averages of the velocity
// ============================================================================

TEST_CASE("velocity averaging is exact for polynomial space-time fields") {
    // v1 = t * x, v2 = y^2, v3 = 1: closed-form interval-cell averages.
    VelocityField v;
    v.name = "poly";
    v.time_independent = false;
    v.value = [](double t, const Vec3& p) -> Vec3 { return {t * p.x, p.y * p.y, 1.0}; };

    const GridSpec grid(0.5, {-1.0, -1.0, -1.0}, {5, 5, 5});
    const IndexBox window{{1, 1, 1}, {3, 3, 3}};
    const double t0 = 0.2, t1 = 0.7;
    const VectorField u = average_velocity(grid, window, v, t0, t1, 3, 3);

    Vec3i p;
    for (p.k = 1; p.k < 4; ++p.k)
        for (p.j = 1; p.j < 4; ++p.j)
            for (p.i = 1; p.i < 4; ++p.i) {
                const Vec3 x = grid.position(p);
                const double h2 = 0.25;
                const double tavg = 0.5 * (t0 + t1);
                CHECK(u.c[0].at(p) == doctest::Approx(tavg * x.x).epsilon(1e-13));
                CHECK(u.c[1].at(p) ==
                      doctest::Approx(monomial_avg(x.y - h2, x.y + h2, 2)).epsilon(1e-13));
                CHECK(u.c[2].at(p) == doctest::Approx(1.0).epsilon(1e-13));
            }
}

TEST_CASE("steady velocity averaging matches a refined quadrature oracle") {
    const VelocityField v = make_velocity_preset("rotation");
    const GridSpec grid(1.0 / 8.0, {-1.25, -1.25, -1.25}, {21, 21, 21});
    const IndexBox window{{4, 4, 8}, {6, 6, 3}};
    const VectorField mid = average_velocity(grid, window, v, 0.0, 0.01, 1, 3);
    const VectorField coarse = average_velocity(grid, window, v, 0.0, 0.01, 3, 3);
    const VectorField fine = average_velocity(grid, window, v, 0.0, 0.01, 5, 3);
    for (int c = 0; c < 3; ++c) {
        double diff_mid = 0.0, diff_coarse = 0.0;
        coarse.c[c].for_each([&](const Vec3i& p, double val) {
            diff_mid = std::max(diff_mid, std::abs(mid.c[c].at(p) - fine.c[c].at(p)));
            diff_coarse = std::max(diff_coarse, std::abs(val - fine.c[c].at(p)));
        });
        CHECK(diff_coarse <= 5e-5);
        if (c < 2) CHECK(diff_coarse < 0.05 * diff_mid);  // order-3 beats midpoint
    }
}

// ============================================================================
// Truncation
// ============================================================================

TEST_CASE("truncation clamps symmetric to the threshold and counts nodes") {
    VectorField u(IndexBox{{0, 0, 0}, {5, 1, 1}});
    const double vals[5] = {-9.0, -2.0, 0.0, 3.0, 12.0};
    for (int i = 0; i < 5; ++i) u.c[0].ref({i, 0, 0}) = vals[i];
    u.c[1].ref({4, 0, 0}) = 5.0;  // exactly at threshold: kept
    const TruncationResult r = truncate_velocity(u, 5.0);
    CHECK(r.u.c[0].at({0, 0, 0}) == -5.0);
    CHECK(r.u.c[0].at({1, 0, 0}) == -2.0);
    CHECK(r.u.c[0].at({3, 0, 0}) == 3.0);
    CHECK(r.u.c[0].at({4, 0, 0}) == 5.0);
    CHECK(r.clamped_count[0] == 2);
    CHECK(r.clamped_count[1] == 0);
    CHECK(r.u.c[1].at({4, 0, 0}) == 5.0);
}

TEST_CASE("truncation threshold follows h^(-beta)") {
    SchemeParams params;
    params.h = 1.0 / 16.0;
    params.beta = 0.625;
    CHECK(params.truncation_threshold() ==
          doctest::Approx(std::pow(16.0, 0.625)).epsilon(1e-14));
}

// ============================================================================
// Velocity norms
// ============================================================================

TEST_CASE("velocity norms match closed forms for a separable sine field") {
    // v1 = sin(pi x) sin(pi y) sin(pi z) on [0,1]^3 (zero outside), v2 = v3 = 0.
    //   ||v1||_L2^2 = 1/8,  ||grad v1||_L2^2 = 3 pi^2 / 8,
    //   ||v1||_L3^3 = (4/(3 pi))^3.
    VelocityField v;
    v.name = "sine";
    v.time_independent = true;
    v.value = [](double, const Vec3& p) -> Vec3 {
        if (p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0 || p.z < 0.0 || p.z > 1.0)
            return {0.0, 0.0, 0.0};
        const double pi = 3.141592653589793;
        return {std::sin(pi * p.x) * std::sin(pi * p.y) * std::sin(pi * p.z), 0.0, 0.0};
    };
    const double T = 2.0;
    const VelocityNorms norms = compute_velocity_norms(v, {0, 0, 0}, {1, 1, 1}, 1.0 / 128.0, T);
    const double pi = 3.141592653589793;
    CHECK(norms.linf_l2[0] == doctest::Approx(std::sqrt(0.125)).epsilon(2e-4));
    CHECK(norms.grad_l2l2[0] ==
          doctest::Approx(std::sqrt(T * 3.0 * pi * pi / 8.0)).epsilon(2e-2));
    CHECK(norms.l3_cubed[0] ==
          doctest::Approx(T * std::pow(4.0 / (3.0 * pi), 3)).epsilon(2e-4));
    CHECK(norms.sup_abs == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(norms.linf_l2[1] == 0.0);
    CHECK(norms.l3_cubed[2] == 0.0);

    // The component budget combines the norms with the fixed leading factor
    // 48^(3/2) T^(1/4); freeze that constant.
    const double lead = 332.55375505322444;  // 48 * sqrt(48)
    CHECK(norms.m1[0] == doctest::Approx(lead * std::pow(T, 0.25) *
                                         std::pow(norms.grad_l2l2[0], 1.5) *
                                         std::pow(norms.linf_l2[0], 1.5))
                             .epsilon(1e-13));
    CHECK(norms.m1_sum == doctest::Approx(norms.m1[0]).epsilon(1e-13));
}

TEST_CASE("time-dependent norms integrate the growth factor correctly") {
    // v = (1 + t) * w(x) with w the sine cell above:
    //   sup_t ||v(t)||_L2 = 2 ||w||,  integral (1+t)^2 dt over [0,1] = 7/3.
    VelocityField v;
    v.name = "ramp";
    v.time_independent = false;
    v.value = [](double t, const Vec3& p) -> Vec3 {
        if (p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0 || p.z < 0.0 || p.z > 1.0)
            return {0.0, 0.0, 0.0};
        const double pi = 3.141592653589793;
        return {(1.0 + t) * std::sin(pi * p.x) * std::sin(pi * p.y) * std::sin(pi * p.z), 0.0,
                0.0};
    };
    const VelocityNorms norms =
        compute_velocity_norms(v, {0, 0, 0}, {1, 1, 1}, 1.0 / 64.0, 1.0, 17);
    CHECK(norms.linf_l2[0] == doctest::Approx(2.0 * std::sqrt(0.125)).epsilon(1e-3));
    const double pi = 3.141592653589793;
    CHECK(norms.grad_l2l2[0] ==
          doctest::Approx(std::sqrt(7.0 / 3.0 * 3.0 * pi * pi / 8.0)).epsilon(3e-2));
}

TEST_CASE("the discrete velocity cube sum is dominated by the continuum bound") {
    // For interval-cell averages u of v, sum |u_j|^3 h^3 tau over steps and
    // nodes is at most the time integral of ||v_j||_{L3}^3 (power-mean
    // inequality per cell), which in turn is below the m1 budget.
    const VelocityField v = make_velocity_preset("steep");
    const double h = 1.0 / 8.0;
    const GridSpec grid(h, {-1.25, -1.25, -1.25}, {21, 21, 21});
    const TimeGrid tg = make_time_grid(0.05, 0.25);
    std::array<double, 3> cube_sum{};
    for (int n = 0; n < tg.n_steps; ++n) {
        const VectorField u = average_velocity(grid, IndexBox{{0, 0, 0}, grid.dims}, v,
                                               tg.time(n), tg.time(n + 1), 3, 3);
        for (int c = 0; c < 3; ++c) {
            PairwiseAccumulator acc;
            for (double s : u.c[c].values()) acc.push(std::abs(s) * s * s);
            cube_sum[static_cast<size_t>(c)] += acc.total() * h * h * h * tg.tau;
        }
    }
    const VelocityNorms norms =
        compute_velocity_norms(v, {-1.25, -1.25, -1.25}, {1.25, 1.25, 1.25}, h / 4.0, tg.T);
    for (int c = 0; c < 3; ++c) {
        CHECK(cube_sum[static_cast<size_t>(c)] <=
              norms.l3_cubed[static_cast<size_t>(c)] * 1.01 + 1e-12);
        CHECK(norms.l3_cubed[static_cast<size_t>(c)] <= norms.m1[static_cast<size_t>(c)]);
    }
}
