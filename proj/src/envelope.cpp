#include "canouq/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "canouq/error.hpp"

namespace canouq {

namespace {

constexpr std::uint64_t kSweepStream = 0x5eed;
constexpr std::uint64_t kQuantileStream = 0xb15ec7;

}  // namespace

std::uint64_t EnvelopeCurve::total_model_evals() const {
    std::uint64_t total = 0;
    for (const auto& p : points) total += p.model_evals;
    return total;
}

double isotonic_repair(EnvelopeCurve& curve) {
    double running = 0.0;
    double largest = 0.0;
    for (auto& p : curve.points) {
        running = std::max(running, p.raw_inf_cdf);
        largest = std::max(largest, running - p.raw_inf_cdf);
        p.inf_cdf = running;
    }
    return largest;
}

EnvelopeCurve sweep(const ObjectiveSpace& space, std::span<const double> thresholds,
                    const OptimizerConfig& config, const SweepOptions& options) {
    if (!std::is_sorted(thresholds.begin(), thresholds.end()))
        throw InvalidArgument("sweep: thresholds must be sorted ascending");
    EnvelopeCurve curve;
    curve.points.reserve(thresholds.size());
    std::vector<std::vector<double>> warm;
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
        OptimizerConfig cfg = config;
        cfg.seed = derive_seed(config.seed, kSweepStream, k);
        MinPofResult r = min_pof(space, thresholds[k], cfg, warm);
        EnvelopePoint point;
        point.threshold = thresholds[k];
        point.raw_inf_cdf = r.value;
        point.inf_cdf = r.value;
        point.argmin = std::move(r.argmin);
        point.model_evals = r.model_evals;
        if (options.warm_start) warm = {std::move(r.argmin_params)};
        curve.points.push_back(std::move(point));
        if (options.progress) options.progress(curve.points.back(), k, thresholds.size());
    }
    isotonic_repair(curve);
    return curve;
}

EnvelopeCurve sweep(std::span<const MomentSpec> specs, std::shared_ptr<const ModelFunction> model,
                    std::span<const double> thresholds, const OptimizerConfig& config) {
    ObjectiveSpace space(std::vector<MomentSpec>(specs.begin(), specs.end()),
                         std::make_shared<ModelEvaluator>(std::move(model)));
    return sweep(space, thresholds, config);
}

RobustQuantileResult robust_quantile(const ObjectiveSpace& space, double alpha,
                                     std::pair<double, double> search_interval,
                                     const OptimizerConfig& config, const QuantileOptions& options) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("robust_quantile: alpha must lie in (0,1)");
    auto [lo, hi] = search_interval;
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
        throw InvalidArgument("robust_quantile: search interval must satisfy lo < hi");
    const double resolution = options.resolution > 0 ? options.resolution : 1e-3 * (hi - lo);

    RobustQuantileResult result;
    result.alpha = alpha;
    std::vector<std::vector<double>> warm;
    std::uint64_t calls = 0;
    int step = 0;
    ProductMeasure hi_argmin;
    auto oracle = [&](double h, ProductMeasure* keep) {
        OptimizerConfig cfg = config;
        cfg.seed = derive_seed(config.seed, kQuantileStream, calls++);
        MinPofResult r = min_pof(space, h, cfg, warm);
        result.model_evals += r.model_evals;
        warm = {r.argmin_params};
        if (keep) *keep = std::move(r.argmin);
        if (options.progress) options.progress(h, r.value, step);
        return r.value;
    };

    double span = hi - lo;
    int widen = 0;
    while (oracle(lo, nullptr) >= alpha) {
        if (++widen > options.max_widenings)
            throw BracketFailure("robust_quantile: minimal CDF stays >= alpha below " + std::to_string(lo));
        hi = lo;
        lo -= span;
        span *= 2;
    }
    span = hi - lo;
    widen = 0;
    while (oracle(hi, &hi_argmin) < alpha) {
        if (++widen > options.max_widenings)
            throw BracketFailure("robust_quantile: minimal CDF stays below alpha up to " + std::to_string(hi));
        lo = hi;
        hi += span;
        span *= 2;
    }

    while (hi - lo > resolution && step < options.max_steps) {
        ++step;
        const double mid = 0.5 * (lo + hi);
        ProductMeasure mid_argmin;
        if (oracle(mid, &mid_argmin) >= alpha) {
            hi = mid;
            hi_argmin = std::move(mid_argmin);
        } else {
            lo = mid;
        }
    }
    result.quantile = hi;
    result.bracket = {lo, hi};
    result.iterations = step;
    result.argmin = std::move(hi_argmin);
    return result;
}

RobustQuantileResult robust_quantile(std::span<const MomentSpec> specs,
                                     std::shared_ptr<const ModelFunction> model, double alpha,
                                     std::pair<double, double> search_interval,
                                     const OptimizerConfig& config, double resolution) {
    ObjectiveSpace space(std::vector<MomentSpec>(specs.begin(), specs.end()),
                         std::make_shared<ModelEvaluator>(std::move(model)));
    QuantileOptions options;
    options.resolution = resolution;
    return robust_quantile(space, alpha, search_interval, config, options);
}

}  // namespace canouq
