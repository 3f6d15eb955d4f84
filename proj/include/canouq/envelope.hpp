#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "canouq/global_opt.hpp"
#include "canouq/ouq_engine.hpp"

namespace canouq {

struct EnvelopePoint {
    double threshold = 0;
    double inf_cdf = 0;      ///< after isotonic repair
    double raw_inf_cdf = 0;  ///< as returned by the optimizer
    ProductMeasure argmin;
    std::uint64_t model_evals = 0;
};

/// Lower CDF envelope sampled at increasing thresholds.
struct EnvelopeCurve {
    std::vector<EnvelopePoint> points;

    std::uint64_t total_model_evals() const;
};

/// Makes inf_cdf nondecreasing by a running maximum from the left; returns the
/// largest adjustment applied.
double isotonic_repair(EnvelopeCurve& curve);

struct SweepOptions {
    /// Seed part of each threshold's population with the previous argmin.
    bool warm_start = true;
    /// Called after every completed threshold.
    std::function<void(const EnvelopePoint&, std::size_t index, std::size_t count)> progress;
};

/// Minimal-CDF envelope at the given (ascending) thresholds. Each threshold's
/// optimizer seed is derived from config.seed and the threshold index.
EnvelopeCurve sweep(const ObjectiveSpace& space, std::span<const double> thresholds,
                    const OptimizerConfig& config, const SweepOptions& options = {});

EnvelopeCurve sweep(std::span<const MomentSpec> specs, std::shared_ptr<const ModelFunction> model,
                    std::span<const double> thresholds, const OptimizerConfig& config);

struct RobustQuantileResult {
    double alpha = 0;
    double quantile = 0;  ///< conservative upper edge of the final bracket
    std::pair<double, double> bracket;
    int iterations = 0;
    std::uint64_t model_evals = 0;
    ProductMeasure argmin;  ///< extremal measure at the upper bracket edge
};

struct QuantileOptions {
    /// Bracket width to reach; 0 selects 1e-3 of the search interval width.
    double resolution = 0;
    int max_steps = 20;
    int max_widenings = 8;
    std::function<void(double threshold, double inf_cdf, int step)> progress;
};

/// Maximal alpha-quantile over the moment class, by bisection on the minimal CDF.
RobustQuantileResult robust_quantile(const ObjectiveSpace& space, double alpha,
                                     std::pair<double, double> search_interval,
                                     const OptimizerConfig& config, const QuantileOptions& options = {});

RobustQuantileResult robust_quantile(std::span<const MomentSpec> specs,
                                     std::shared_ptr<const ModelFunction> model, double alpha,
                                     std::pair<double, double> search_interval,
                                     const OptimizerConfig& config, double resolution = 0);

}  // namespace canouq
