#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace canouq {

/// Canonical moments closer than this to 0 or 1 are treated as boundary values.
inline constexpr double kInteriorEpsilon = 1e-9;
/// Slack allowed on raw canonical moments before a sequence is rejected.
inline constexpr double kValidityTolerance = 1e-12;

/// Canonical moments p_1..p_n of a measure on [0,1].
///
/// When the underlying moment sequence touches the boundary of the moment
/// space at order N, `degeneracy_index` holds N (1-based), p_N is 0 or 1 and
/// every later entry is 0.
struct CanonicalVector {
    std::vector<double> values;
    std::optional<std::size_t> degeneracy_index;

    CanonicalVector() = default;
    explicit CanonicalVector(std::vector<double> v, std::optional<std::size_t> degeneracy = {});

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    bool interior() const noexcept { return !degeneracy_index.has_value(); }
};

/// Raw moments of order 1..n of the image measure on [0,1] under x -> (x - lower)/(upper - lower).
std::vector<double> affine_rescale_moments(std::span<const double> raw, double lower, double upper);

/// Inverse of affine_rescale_moments.
std::vector<double> affine_unscale_moments(std::span<const double> moments01, double lower,
                                           double upper);

/// Extreme values (c_n^-, c_n^+) of the order-n moment given the lower-order
/// moments c_1..c_{n-1} on [0,1]. `prefix` must be interior.
std::pair<double, double> moment_range(std::span<const double> prefix);

/// Canonical moments of a moment sequence on [0,1] (order-0 moment 1 implicit).
/// Throws OutsideMomentSpace naming the first invalid order.
CanonicalVector moments_to_canonical(std::span<const double> moments01);
CanonicalVector moments_to_canonical(std::span<const long double> moments01);

/// Moment sequence on [0,1] with the given canonical moments.
std::vector<double> canonical_to_moments(const CanonicalVector& p);
/// Same sequence without rounding to double. High orders near the edge of the
/// moment space need the extra bits to convert back within 1e-9.
std::vector<long double> canonical_to_moments_extended(const CanonicalVector& p);

/// zeta_1 = p_1, zeta_k = (1 - p_{k-1}) p_k.
std::vector<double> zeta_sequence(std::span<const double> p);
inline std::vector<double> zeta_sequence(const CanonicalVector& p) { return zeta_sequence(p.values); }

struct EqualityMoments {
    std::vector<double> values;  ///< values[j-1] = E[x^j]
};

struct IntervalMoments {
    std::vector<double> lowers;  ///< lowers[j-1] <= E[x^j]
    std::vector<double> uppers;  ///< E[x^j] <= uppers[j-1]
};

/// Support bounds and moment constraints of one independent input.
///
/// Equality constraints are checked on construction: the rescaled sequence must
/// be strictly interior to the moment space of [0,1]. Interval constraints only
/// need consistent boxes here; joint feasibility is discovered during optimization.
class MomentSpec {
public:
    MomentSpec(double lower, double upper, EqualityMoments moments);
    MomentSpec(double lower, double upper, IntervalMoments moments);

    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }
    double width() const noexcept { return upper_ - lower_; }
    /// Number of constrained moment orders N.
    std::size_t order() const noexcept;
    bool is_equality() const noexcept { return std::holds_alternative<EqualityMoments>(constraint_); }

    const EqualityMoments& equality() const { return std::get<EqualityMoments>(constraint_); }
    const IntervalMoments& interval() const { return std::get<IntervalMoments>(constraint_); }

    /// Equality mode only: moments rescaled to [0,1] and their canonical moments.
    const std::vector<double>& moments01() const { return moments01_; }
    const std::vector<double>& canonical() const { return canonical_; }

private:
    double lower_;
    double upper_;
    std::variant<EqualityMoments, IntervalMoments> constraint_;
    std::vector<double> moments01_;
    std::vector<double> canonical_;
};

}  // namespace canouq
