#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "canouq/model.hpp"
#include "canouq/moment_core.hpp"

namespace canouq::models {

// Flood model ------------------------------------------------------------

struct HydraulicInput {
    double flow;          ///< Q, m^3/s
    double strickler;     ///< Ks
    double downstream;    ///< Zv, m
    double upstream;      ///< Zm, m
};

/// River height H = (Q / (300 Ks sqrt((Zm - Zv) / 5000)))^(3/5).
double hydraulic_height(const HydraulicInput& in);

/// Inputs ordered (Q, Ks, Zv, Zm).
class HydraulicModel : public ModelFunction {
public:
    std::size_t dimension() const override { return 4; }
    void evaluate_batch(std::span<const double> points, std::span<double> out) const override;
    std::string name() const override { return "hydraulic"; }
};

class IdentityModel : public ModelFunction {
public:
    std::size_t dimension() const override { return 1; }
    void evaluate_batch(std::span<const double> points, std::span<double> out) const override;
    std::string name() const override { return "identity"; }
};

/// G(x) = sum_i scale_i x_i.
class SumModel : public ModelFunction {
public:
    explicit SumModel(std::vector<double> scales);
    std::size_t dimension() const override { return scales_.size(); }
    void evaluate_batch(std::span<const double> points, std::span<double> out) const override;
    std::string name() const override { return "sum"; }
    const std::vector<double>& scales() const noexcept { return scales_; }

private:
    std::vector<double> scales_;
};

double identity_model(std::span<const double> x);

// Sampling distributions -------------------------------------------------

struct Gumbel { double mode, scale; };
struct Normal { double mean, sd; };
struct Uniform { double a, b; };
struct LogNormal { double mu, sigma; };

using Law = std::variant<Gumbel, Normal, Uniform, LogNormal>;

/// A sampling law, optionally truncated to [lower, upper] by rejection.
struct Distribution {
    Law law;
    std::optional<std::pair<double, double>> truncation;

    double sample(std::mt19937_64& rng) const;
};

/// Empirical CDF of the model output at each threshold from n_samples i.i.d.
/// draws. Sampling is chunked with per-chunk seeds, so results depend only on
/// `seed`, never on `threads`.
std::vector<std::pair<double, double>> plug_in_cdf(std::span<const Distribution> distributions,
                                                   const ModelFunction& model,
                                                   std::span<const double> thresholds,
                                                   std::size_t n_samples, std::uint64_t seed,
                                                   std::size_t threads = 1);

/// Sample raw moments E[x^j], j = 1..order, of one distribution with their standard errors.
struct SampleMoments {
    std::vector<double> means;
    std::vector<double> standard_errors;
};
SampleMoments sample_moments(const Distribution& d, std::size_t order, std::size_t n_samples,
                             std::uint64_t seed);

// Presets ----------------------------------------------------------------

struct NamedInput {
    std::string name;
    double lower;
    double upper;
    std::vector<double> moments;               ///< raw moments of order 1..3 of record
    std::optional<Distribution> distribution;  ///< nominal law, truncated to the bounds
};

/// Flood-model inputs (Q, Ks, Zv, Zm): bounds, moments of record and nominal laws.
/// The downstream/upstream depth moments are the exact uniform-law moments; the
/// published rounded second moments of those inputs sit on or outside the moment
/// space boundary (see `hydraulic_published_moments`).
std::vector<NamedInput> hydraulic_inputs();

/// Moments exactly as published for the flood model, including the rounded
/// depth moments that are not interior.
std::vector<NamedInput> hydraulic_published_moments();

/// Equality specs for the flood model with the first `order` moments of record.
std::vector<MomentSpec> hydraulic_specs(std::size_t order);

/// Nine-input two-moment configuration of the thermal-hydraulic study. Input n°25
/// has no sampling law.
std::vector<NamedInput> cathare_inputs();
std::vector<MomentSpec> cathare_specs();

std::vector<Distribution> nominal_distributions(std::span<const NamedInput> inputs);

}  // namespace canouq::models
