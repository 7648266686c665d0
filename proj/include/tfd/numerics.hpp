/// @file numerics.hpp
/// @brief Deterministic reductions, quadrature rules and smooth cutoff profiles.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tfd {

// ============================================================================
// Deterministic summation
// ============================================================================

/// @brief Pairwise (cascade) sum of a contiguous range.
///
/// The reduction tree depends only on the element count, so results are
/// bit-reproducible run to run and accumulate rounding as O(eps * log n)
/// instead of O(eps * n) for the naive left fold.
double pairwise_sum(std::span<const double> values);

/// @brief Accumulator that buffers terms and reduces them pairwise on demand.
///
/// Use for diagnostics that must be reproducible at the bit level; terms are
/// pushed in a deterministic traversal order and summed once at the end.
class PairwiseAccumulator {
public:
    void push(double value) { terms_.push_back(value); }
    void reserve(size_t n) { terms_.reserve(n); }
    double total() const { return pairwise_sum(terms_); }
    size_t size() const { return terms_.size(); }
    void clear() { terms_.clear(); }

private:
    std::vector<double> terms_;
};

// ============================================================================
// Gauss-Legendre quadrature
// ============================================================================

/// @brief One-dimensional Gauss-Legendre rule on [-1, 1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;  // weights sum to 2
};

/// @brief Returns the n-point Gauss-Legendre rule, 1 <= n <= 5 (exact for
/// polynomials of degree 2n-1).
const QuadratureRule& gauss_legendre(int n);

// ============================================================================
// Smooth cutoff profiles (C^4 regularity)
// ============================================================================

/// @brief Polynomial smoothstep with four vanishing derivatives at both ends.
///
/// s(0)=0, s(1)=1 and s', s'', s''', s'''' vanish at t=0 and t=1, so any
/// profile built from it is C^4 across the matching points.  The derivative
/// has the closed form s'(t) = 630 t^4 (1-t)^4.
double smoothstep4(double t);
double smoothstep4_d1(double t);
double smoothstep4_d2(double t);

/// @brief C^4 falloff: 1 on (-inf, a], 0 on [b, inf), monotone in between.
struct Falloff {
    double a = 0.0;
    double b = 1.0;

    double value(double r) const;
    double d1(double r) const;
    double d2(double r) const;
};

// ============================================================================
// Fits
// ============================================================================

/// @brief Least-squares slope of y against x (used for convergence orders on
/// log-log data).  Requires at least two points.
double least_squares_slope(std::span<const double> x, std::span<const double> y);

}  // namespace tfd
