#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "canouq/moment_core.hpp"

namespace canouq {

/// Finite convex combination of Dirac masses.
struct DiscreteMeasure {
    std::vector<double> atoms;    ///< strictly increasing
    std::vector<double> weights;  ///< same length, sums to 1

    std::size_t size() const noexcept { return atoms.size(); }
    /// Raw moment E[x^order].
    double moment(std::size_t order) const;
    /// Throws InvalidArgument when the measure breaks its invariants for [lower, upper].
    void validate(double lower, double upper) const;
};

/// Monic polynomial, coefficients in ascending powers of x.
struct StarPolynomial {
    std::vector<double> coefficients;

    std::size_t degree() const noexcept { return coefficients.empty() ? 0 : coefficients.size() - 1; }
    double operator()(double x) const;
};

/// Three-term recursion P_{k+1} = (x - a - w(z_{2k} + z_{2k+1})) P_k - w^2 z_{2k-1} z_{2k} P_{k-1}
/// with w = upper - lower, P_{-1} = 0, P_0 = 1, and z_0 = 0. `zeta` holds z_1, z_2, ...
StarPolynomial star_polynomial(std::span<const double> zeta, double lower, double upper,
                               std::size_t degree);

/// Roots of P*_{n_atoms}, ascending, computed as eigenvalues of the symmetric
/// tridiagonal recursion matrix. Throws DegenerateCluster on coincident roots.
std::vector<double> support_from_canonical(const CanonicalVector& p_full, double lower,
                                           double upper, std::size_t n_atoms);

/// Solves sum_k w_k x_k^j = m_j for j = 0..n-1 (m_0 = 1) with the Bjorck-Pereyra
/// elimination. `moments_prefix` holds m_1..m_{n-1} on the same scale as `atoms`.
std::vector<double> weights_from_support(std::span<const double> atoms,
                                         std::span<const double> moments_prefix);

/// Extremal measure on [lower, upper] with fixed moments (given on [0,1]) and
/// free canonical moments p_{N+1}..p_{2N+1}. Free coordinates are clamped away
/// from {0,1}; clamping is tightened and retried if atoms collide.
DiscreteMeasure measure_from_canonical(std::span<const double> fixed_moments01,
                                       std::span<const double> free_canonical, double lower,
                                       double upper);

/// Same as above with the canonical moments of the fixed prefix already known.
DiscreteMeasure measure_from_canonical(std::span<const double> fixed_moments01,
                                       std::span<const double> fixed_canonical,
                                       std::span<const double> free_canonical, double lower,
                                       double upper);

}  // namespace canouq
