#include "canouq/moment_core.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "canouq/error.hpp"

namespace canouq {

namespace {

using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LongVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values)
        if (!std::isfinite(v)) throw NonFiniteInput(what);
}

long double binomial(std::size_t n, std::size_t k) {
    long double r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<long double>(n - k + i) / i;
    return r;
}

// b^T A^{-1} b for a positive definite Hankel-type block; zero for empty blocks.
long double schur_corner(const LongMatrix& a, const LongVector& b) {
    if (a.rows() == 0) return 0;
    Eigen::LDLT<LongMatrix> ldlt(a);
    LongVector x = ldlt.solve(b);
    return b.dot(x);
}

// Extreme values of c_n given c_0..c_{n-1} (c_0 = 1) on [0,1]. Each bound is
// the value of the corner entry that makes the relevant Hankel matrix singular.
std::pair<long double, long double> range_of(const std::vector<long double>& c, std::size_t n) {
    const std::size_t m = n / 2;
    long double lo = 0;
    long double hi = 0;
    if (n % 2 == 0) {
        LongMatrix a(m, m);
        LongVector b(m);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) a(i, j) = c[i + j];
            b(i) = c[i + m];
        }
        lo = schur_corner(a, b);

        const std::size_t k = m - 1;
        LongMatrix a2(k, k);
        LongVector b2(k);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) a2(i, j) = c[i + j + 1] - c[i + j + 2];
            b2(i) = c[i + m] - c[i + m + 1];
        }
        hi = c[2 * m - 1] - schur_corner(a2, b2);
    } else {
        LongMatrix a(m, m);
        LongVector b(m);
        LongMatrix a2(m, m);
        LongVector b2(m);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                a(i, j) = c[i + j + 1];
                a2(i, j) = c[i + j] - c[i + j + 1];
            }
            b(i) = c[i + m + 1];
            b2(i) = c[i + m] - c[i + m + 1];
        }
        lo = schur_corner(a, b);
        hi = c[2 * m] - schur_corner(a2, b2);
    }
    return {lo, hi};
}

template <typename Real>
std::vector<long double> with_unit_mass(std::span<const Real> moments) {
    std::vector<long double> c(moments.size() + 1);
    c[0] = 1;
    std::copy(moments.begin(), moments.end(), c.begin() + 1);
    return c;
}

}  // namespace

CanonicalVector::CanonicalVector(std::vector<double> v, std::optional<std::size_t> degeneracy)
    : values(std::move(v)), degeneracy_index(degeneracy) {
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double pk = values[k];
        if (!std::isfinite(pk)) throw NonFiniteInput("canonical moment");
        if (pk < 0.0 || pk > 1.0)
            throw InvalidArgument("canonical moment p_" + std::to_string(k + 1) + " outside [0,1]");
    }
    const std::size_t interior_count = degeneracy_index ? *degeneracy_index - 1 : values.size();
    for (std::size_t k = 0; k < std::min(interior_count, values.size()); ++k)
        if (values[k] == 0.0 || values[k] == 1.0)
            throw InvalidArgument("canonical moment p_" + std::to_string(k + 1) +
                                  " on the boundary without a degeneracy index");
    if (degeneracy_index) {
        const std::size_t n = *degeneracy_index;
        if (n == 0 || n > values.size())
            throw InvalidArgument("degeneracy index out of range");
        if (values[n - 1] != 0.0 && values[n - 1] != 1.0)
            throw InvalidArgument("canonical moment at the degeneracy index must be 0 or 1");
        for (std::size_t k = n; k < values.size(); ++k)
            if (values[k] != 0.0)
                throw InvalidArgument("canonical moments beyond the degeneracy index must be 0");
    }
}

std::vector<double> affine_rescale_moments(std::span<const double> raw, double lower, double upper) {
    require_finite(raw, "raw moments");
    if (!std::isfinite(lower) || !std::isfinite(upper)) throw NonFiniteInput("interval bounds");
    if (!(lower < upper)) throw InvalidArgument("affine_rescale_moments: lower must be < upper");

    const std::vector<long double> c = with_unit_mass(raw);
    const long double width = static_cast<long double>(upper) - lower;
    std::vector<double> out(raw.size());
    for (std::size_t j = 1; j <= raw.size(); ++j) {
        long double sum = 0;
        for (std::size_t k = 0; k <= j; ++k)
            sum += binomial(j, k) * std::pow(static_cast<long double>(-lower), j - k) * c[k];
        out[j - 1] = static_cast<double>(sum / std::pow(width, j));
    }
    return out;
}

std::vector<double> affine_unscale_moments(std::span<const double> moments01, double lower,
                                           double upper) {
    require_finite(moments01, "moments");
    if (!(lower < upper)) throw InvalidArgument("affine_unscale_moments: lower must be < upper");

    const std::vector<long double> c = with_unit_mass(moments01);
    const long double width = static_cast<long double>(upper) - lower;
    std::vector<double> out(moments01.size());
    for (std::size_t j = 1; j <= moments01.size(); ++j) {
        long double sum = 0;
        for (std::size_t k = 0; k <= j; ++k)
            sum += binomial(j, k) * std::pow(static_cast<long double>(lower), j - k) *
                   std::pow(width, k) * c[k];
        out[j - 1] = static_cast<double>(sum);
    }
    return out;
}

std::pair<double, double> moment_range(std::span<const double> prefix) {
    require_finite(prefix, "moments");
    auto [lo, hi] = range_of(with_unit_mass(prefix), prefix.size() + 1);
    return {static_cast<double>(lo), static_cast<double>(hi)};
}

CanonicalVector moments_to_canonical(std::span<const double> moments01) {
    require_finite(moments01, "moments");
    const std::vector<long double> extended(moments01.begin(), moments01.end());
    return moments_to_canonical(std::span<const long double>(extended));
}

CanonicalVector moments_to_canonical(std::span<const long double> moments01) {
    for (long double v : moments01)
        if (!std::isfinite(v)) throw NonFiniteInput("moments");
    const std::vector<long double> c = with_unit_mass(moments01);
    const std::size_t n = moments01.size();

    std::vector<double> p;
    p.reserve(n);
    std::optional<std::size_t> degeneracy;
    for (std::size_t k = 1; k <= n && !degeneracy; ++k) {
        const auto [lo, hi] = range_of(c, k);
        const long double width = hi - lo;
        if (!(width > 0))
            throw OutsideMomentSpace(k, "empty range for this order");
        const long double pk = (c[k] - lo) / width;
        if (!(pk >= -kValidityTolerance && pk <= 1 + kValidityTolerance))
            throw OutsideMomentSpace(k, "canonical moment " + std::to_string(static_cast<double>(pk)));
        if (pk < kInteriorEpsilon) {
            p.push_back(0.0);
            degeneracy = k;
        } else if (pk > 1 - kInteriorEpsilon) {
            p.push_back(1.0);
            degeneracy = k;
        } else {
            p.push_back(static_cast<double>(pk));
        }
    }
    if (!degeneracy) return CanonicalVector(std::move(p));

    // The measure is determined at the boundary; later moments must agree with it.
    p.resize(n, 0.0);
    CanonicalVector result(std::move(p), degeneracy);
    const std::vector<double> implied = canonical_to_moments(result);
    for (std::size_t k = *degeneracy + 1; k <= n; ++k) {
        if (std::abs(implied[k - 1] - moments01[k - 1]) > 1e-9)
            throw OutsideMomentSpace(k, "inconsistent with the measure fixed at order " +
                                            std::to_string(*degeneracy));
    }
    return result;
}

std::vector<long double> canonical_to_moments_extended(const CanonicalVector& p) {
    // Moments are e_0^T T^k e_0 for the tridiagonal recursion matrix T with
    // diagonal zeta_{2i} + zeta_{2i+1} and off-diagonal products zeta_{2i-1} zeta_{2i}.
    const std::size_t n = p.size();
    std::vector<long double> zeta(2 * n + 4, 0.0L);  // zeta[0] = 0, zeta[k] for k >= 1
    for (std::size_t k = 1; k <= n; ++k) {
        const long double pk = p.values[k - 1];
        zeta[k] = k == 1 ? pk : (1 - static_cast<long double>(p.values[k - 2])) * pk;
    }
    const std::size_t dim = n / 2 + 2;
    std::vector<long double> diag(dim), offprod(dim + 1, 0.0L);
    for (std::size_t i = 0; i < dim; ++i) diag[i] = zeta[2 * i] + zeta[2 * i + 1];
    for (std::size_t i = 1; i < dim; ++i) offprod[i] = zeta[2 * i - 1] * zeta[2 * i];

    std::vector<long double> u(dim, 0.0L), next(dim);
    u[0] = 1;
    std::vector<long double> out(n);
    for (std::size_t k = 1; k <= n; ++k) {
        for (std::size_t i = 0; i < dim; ++i) {
            long double v = diag[i] * u[i];
            if (i + 1 < dim) v += offprod[i + 1] * u[i + 1];
            if (i > 0) v += u[i - 1];
            next[i] = v;
        }
        std::swap(u, next);
        out[k - 1] = u[0];
    }
    return out;
}

std::vector<double> canonical_to_moments(const CanonicalVector& p) {
    const auto extended = canonical_to_moments_extended(p);
    return std::vector<double>(extended.begin(), extended.end());
}

std::vector<double> zeta_sequence(std::span<const double> p) {
    std::vector<double> z(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) z[k] = k == 0 ? p[0] : (1.0 - p[k - 1]) * p[k];
    return z;
}

MomentSpec::MomentSpec(double lower, double upper, EqualityMoments moments)
    : lower_(lower), upper_(upper), constraint_(std::move(moments)) {
    if (!std::isfinite(lower) || !std::isfinite(upper)) throw NonFiniteInput("interval bounds");
    if (!(lower < upper)) throw InvalidArgument("MomentSpec: lower must be < upper");
    const auto& values = std::get<EqualityMoments>(constraint_).values;
    moments01_ = affine_rescale_moments(values, lower, upper);
    CanonicalVector cv = moments_to_canonical(moments01_);
    if (!cv.interior())
        throw OutsideMomentSpace(*cv.degeneracy_index,
                                 "on the boundary of the moment space; equality constraints "
                                 "must be strictly interior");
    canonical_ = std::move(cv.values);
}

MomentSpec::MomentSpec(double lower, double upper, IntervalMoments moments)
    : lower_(lower), upper_(upper), constraint_(std::move(moments)) {
    if (!std::isfinite(lower) || !std::isfinite(upper)) throw NonFiniteInput("interval bounds");
    if (!(lower < upper)) throw InvalidArgument("MomentSpec: lower must be < upper");
    const auto& box = std::get<IntervalMoments>(constraint_);
    if (box.lowers.size() != box.uppers.size())
        throw InvalidArgument("MomentSpec: interval bound lists differ in length");
    require_finite(box.lowers, "moment lower bounds");
    require_finite(box.uppers, "moment upper bounds");
    for (std::size_t j = 0; j < box.lowers.size(); ++j)
        if (box.lowers[j] > box.uppers[j])
            throw InvalidArgument("MomentSpec: empty box for moment order " + std::to_string(j + 1));
}

std::size_t MomentSpec::order() const noexcept {
    if (is_equality()) return std::get<EqualityMoments>(constraint_).values.size();
    return std::get<IntervalMoments>(constraint_).lowers.size();
}

}  // namespace canouq
