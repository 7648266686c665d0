/// @file hhd.hpp
/// @brief Discrete Helmholtz decomposition on the inner nodes of a domain
/// mask: w = (u - D+ phi) restricted to the inner set, with phi solving the
/// normal equations of the forward gradient, so that the backward divergence
/// of the zero-extended w vanishes on every inner node.

#pragma once

#include <cstdint>

#include "tfd/grid.hpp"

namespace tfd {

// ============================================================================
// Projection
// ============================================================================

/// @brief Result of one projection.  All l2 norms are h^3-weighted sums over
/// the inner set with the three components combined.
struct HHDResult {
    VectorField w;    ///< divergence-free part; zero outside the inner set
    ScalarField phi;  ///< potential; zero outside the inner set

    double div_residual_inf = 0.0;  ///< max over inner nodes of |D- . w|
    double orthogonality = 0.0;     ///< inner product (w, D+ phi) over inner nodes
    double u_norm2 = 0.0;           ///< || u ||_{2, inner}
    double w_norm2 = 0.0;           ///< || w ||_{2, inner}
    double grad_norm2 = 0.0;        ///< || D+ phi ||_{2, inner}

    int cg_iterations = 0;
    double cg_relative_residual = 0.0;
};

/// @brief Options of the conjugate-gradient solve of the normal equations.
struct HHDOptions {
    double rel_tol = 1e-12;  ///< on the normal-equation residual, relative to the data
    int max_iterations = 0;  ///< 0: 40 * cbrt(N) + 200, clipped to N
};

/// @brief Project u onto the discretely divergence-free fields of the mask.
///
/// Only values of u on the inner set are read: the decomposition never sees
/// boundary data.  Throws SolverError if CG stalls above the tolerance and
/// NumericError if the mask has no inner nodes.
HHDResult project_divergence_free(const VectorField& u, const DomainMask& mask,
                                  const HHDOptions& options = {});

// ============================================================================
// Operator pieces (exposed for tests)
// ============================================================================

/// @brief Forward-gradient normal operator y = G^T G x on inner-rank vectors,
/// where (G x)_j = D+ restricted to the inner set (zero extension) and G^T is
/// minus the backward divergence with reads restricted to the inner set.
class InnerGradient {
public:
    InnerGradient(const DomainMask& mask);

    std::int64_t size() const { return static_cast<std::int64_t>(nodes_.size()); }
    const std::vector<Vec3i>& nodes() const { return nodes_; }

    /// y = G^T G x  (x, y of length size()).
    void apply_normal(const std::vector<double>& x, std::vector<double>& y) const;
    /// b = G^T u  with u read on the inner set only.
    std::vector<double> data_term(const VectorField& u, double h) const;
    /// (G x)_j as rank-indexed arrays.
    std::array<std::vector<double>, 3> gradient(const std::vector<double>& x) const;

    double h() const { return h_; }

private:
    std::vector<Vec3i> nodes_;
    // rank of x -+ h e_j, -1 when that node is not inner
    std::vector<std::array<std::int32_t, 6>> neighbours_;
    double h_ = 0.0;
};

}  // namespace tfd
