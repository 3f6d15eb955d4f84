#include "canouq/measure_gen.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "canouq/error.hpp"

namespace canouq {

namespace {

constexpr double kClusterTolerance = 1e-12;
constexpr double kNegativeWeightLimit = -1e-6;
constexpr int kClampRetries = 3;

// Roots of P*_n for canonical moments p (at least 2n - 1 of them) on [lower, upper].
std::vector<double> jacobi_roots(std::span<const double> p, double lower, double upper,
                                 std::size_t n) {
    if (n == 0) throw InvalidArgument("support_from_canonical: need at least one atom");
    if (p.size() < 2 * n - 1) throw InsufficientZetas(p.size(), 2 * n - 1);
    const double width = upper - lower;
    const std::vector<double> zeta = zeta_sequence(p.first(2 * n - 1));

    // zeta[k - 1] holds zeta_k; zeta_0 = 0.
    auto z = [&](std::size_t k) { return k == 0 ? 0.0 : zeta[k - 1]; };
    Eigen::VectorXd diag(n);
    Eigen::VectorXd sub(n > 1 ? n - 1 : 0);
    for (std::size_t k = 0; k < n; ++k) diag(k) = lower + width * (z(2 * k) + z(2 * k + 1));
    for (std::size_t k = 1; k < n; ++k) sub(k - 1) = width * std::sqrt(z(2 * k - 1) * z(2 * k));

    std::vector<double> roots(n);
    if (n == 1) {
        roots[0] = diag(0);
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
        solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success)
            throw DegenerateCluster("tridiagonal eigenvalue iteration did not converge");
        for (std::size_t k = 0; k < n; ++k) roots[k] = solver.eigenvalues()(k);
    }
    std::sort(roots.begin(), roots.end());
    for (double& r : roots) r = std::clamp(r, lower, upper);
    for (std::size_t k = 1; k < n; ++k)
        if (roots[k] - roots[k - 1] <= kClusterTolerance * width)
            throw DegenerateCluster("support points " + std::to_string(k - 1) + " and " +
                                    std::to_string(k) + " coincide");
    return roots;
}

}  // namespace

double DiscreteMeasure::moment(std::size_t order) const {
    long double sum = 0;
    for (std::size_t k = 0; k < atoms.size(); ++k)
        sum += static_cast<long double>(weights[k]) * std::pow(static_cast<long double>(atoms[k]), order);
    return static_cast<double>(sum);
}

void DiscreteMeasure::validate(double lower, double upper) const {
    if (atoms.empty() || atoms.size() != weights.size())
        throw InvalidArgument("DiscreteMeasure: atoms and weights must be nonempty and equal in size");
    const double slack = 1e-9 * (upper - lower);
    double total = 0;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        if (k > 0 && !(atoms[k] > atoms[k - 1]))
            throw InvalidArgument("DiscreteMeasure: atoms not strictly increasing");
        if (atoms[k] < lower - slack || atoms[k] > upper + slack)
            throw InvalidArgument("DiscreteMeasure: atom outside its interval");
        if (!(weights[k] >= 0.0 && weights[k] <= 1.0))
            throw InvalidArgument("DiscreteMeasure: weight outside [0,1]");
        total += weights[k];
    }
    if (std::abs(total - 1.0) > 1e-10) throw InvalidArgument("DiscreteMeasure: weights do not sum to 1");
}

double StarPolynomial::operator()(double x) const {
    double acc = 0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * x + *it;
    return acc;
}

StarPolynomial star_polynomial(std::span<const double> zeta, double lower, double upper,
                               std::size_t degree) {
    if (!(lower < upper)) throw InvalidArgument("star_polynomial: lower must be < upper");
    if (degree > 0 && zeta.size() < 2 * degree - 1) throw InsufficientZetas(zeta.size(), 2 * degree - 1);
    const double width = upper - lower;
    auto z = [&](std::size_t k) { return k == 0 ? 0.0 : zeta[k - 1]; };

    std::vector<double> prev;          // P_{k-1}
    std::vector<double> cur{1.0};      // P_k
    for (std::size_t k = 0; k < degree; ++k) {
        const double shift = lower + width * (z(2 * k) + z(2 * k + 1));
        const double coupling = k == 0 ? 0.0 : width * width * z(2 * k - 1) * z(2 * k);
        std::vector<double> next(cur.size() + 1, 0.0);
        for (std::size_t i = 0; i < cur.size(); ++i) {
            next[i + 1] += cur[i];
            next[i] -= shift * cur[i];
        }
        for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= coupling * prev[i];
        prev = std::move(cur);
        cur = std::move(next);
    }
    return StarPolynomial{std::move(cur)};
}

std::vector<double> support_from_canonical(const CanonicalVector& p_full, double lower,
                                           double upper, std::size_t n_atoms) {
    if (!(lower < upper)) throw InvalidArgument("support_from_canonical: lower must be < upper");
    return jacobi_roots(p_full.values, lower, upper, n_atoms);
}

std::vector<double> weights_from_support(std::span<const double> atoms,
                                         std::span<const double> moments_prefix) {
    const std::size_t count = atoms.size();
    if (count == 0) throw InvalidArgument("weights_from_support: no atoms");
    if (moments_prefix.size() + 1 != count)
        throw InvalidArgument("weights_from_support: need exactly one moment fewer than atoms");
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = i + 1; j < count; ++j)
            if (atoms[i] == atoms[j]) throw SingularSystem("weights_from_support: repeated atom");

    const std::size_t n = count - 1;
    std::vector<long double> x(atoms.begin(), atoms.end());
    std::vector<long double> b(count);
    b[0] = 1;
    std::copy(moments_prefix.begin(), moments_prefix.end(), b.begin() + 1);

    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = n; i > k; --i) b[i] -= x[k] * b[i - 1];
    for (std::size_t k = n; k-- > 0;) {
        for (std::size_t i = k + 1; i <= n; ++i) b[i] /= x[i] - x[i - k - 1];
        for (std::size_t i = k; i < n; ++i) b[i] -= b[i + 1];
    }

    std::vector<double> w(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double wi = static_cast<double>(b[i]);
        if (!std::isfinite(wi)) throw SingularSystem("weights_from_support: non-finite weight");
        if (wi < kNegativeWeightLimit) throw NegativeWeight(i, wi);
        w[i] = std::clamp(wi, 0.0, 1.0);
    }
    return w;
}

DiscreteMeasure measure_from_canonical(std::span<const double> fixed_moments01,
                                       std::span<const double> free_canonical, double lower,
                                       double upper) {
    const CanonicalVector fixed = moments_to_canonical(fixed_moments01);
    if (!fixed.interior())
        throw OutsideMomentSpace(*fixed.degeneracy_index, "fixed moments must be interior");
    return measure_from_canonical(fixed_moments01, fixed.values, free_canonical, lower, upper);
}

DiscreteMeasure measure_from_canonical(std::span<const double> fixed_moments01,
                                       std::span<const double> fixed_canonical,
                                       std::span<const double> free_canonical, double lower,
                                       double upper) {
    const std::size_t n_fixed = fixed_moments01.size();
    if (fixed_canonical.size() != n_fixed)
        throw InvalidArgument("measure_from_canonical: fixed canonical/moment length mismatch");
    if (free_canonical.size() != n_fixed + 1)
        throw InvalidArgument("measure_from_canonical: need " + std::to_string(n_fixed + 1) +
                              " free canonical moments");
    if (!(lower < upper)) throw InvalidArgument("measure_from_canonical: lower must be < upper");
    for (double v : free_canonical)
        if (!std::isfinite(v)) throw NonFiniteInput("free canonical moment");

    const double width = upper - lower;
    const std::size_t n_atoms = n_fixed + 1;
    std::vector<double> p(fixed_canonical.begin(), fixed_canonical.end());
    p.resize(n_fixed + n_atoms);

    std::optional<Error> last;
    double eps = kInteriorEpsilon;
    for (int attempt = 0; attempt <= kClampRetries; ++attempt, eps *= 10) {
        for (std::size_t k = 0; k < n_atoms; ++k)
            p[n_fixed + k] = std::clamp(free_canonical[k], eps, 1.0 - eps);
        try {
            std::vector<double> atoms01 = jacobi_roots(p, 0.0, 1.0, n_atoms);
            std::vector<double> weights = weights_from_support(atoms01, fixed_moments01);
            DiscreteMeasure m{std::move(atoms01), std::move(weights)};
            bool increasing = true;
            for (std::size_t k = 0; k < n_atoms; ++k) {
                m.atoms[k] = std::clamp(lower + width * m.atoms[k], lower, upper);
                if (k > 0 && !(m.atoms[k] > m.atoms[k - 1])) increasing = false;
            }
            if (!increasing) {
                last = DegenerateCluster("support points merge after mapping to the input interval");
                continue;
            }
            return m;
        } catch (const DegenerateCluster& e) {
            last = e;
        } catch (const NegativeWeight& e) {
            last = e;
        } catch (const SingularSystem& e) {
            last = e;
        }
    }
    throw DegenerateCluster(std::string("measure generation failed after clamping retries: ") +
                            last->what());
}

}  // namespace canouq
