#include "canouq/ouq_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "canouq/error.hpp"

namespace canouq {

namespace {

constexpr double kCanonicalLo = kInteriorEpsilon;
constexpr double kCanonicalHi = 1.0 - kInteriorEpsilon;

DiscreteMeasure decode_input(std::span<const double> slice, const MomentSpec& spec, std::size_t input) {
    const std::size_t n = spec.order();
    if (spec.is_equality())
        return measure_from_canonical(spec.moments01(), spec.canonical(), slice, spec.lower(), spec.upper());

    const auto& box = spec.interval();
    const auto raw = slice.first(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double slack = 1e-12 * std::max({1.0, std::abs(box.lowers[j]), std::abs(box.uppers[j])});
        if (!(raw[j] >= box.lowers[j] - slack && raw[j] <= box.uppers[j] + slack))
            throw BoxViolation(input, j + 1, raw[j], box.lowers[j], box.uppers[j]);
    }
    const std::vector<double> m01 = affine_rescale_moments(raw, spec.lower(), spec.upper());
    const CanonicalVector fixed = moments_to_canonical(m01);
    if (!fixed.interior())
        throw OutsideMomentSpace(*fixed.degeneracy_index, "input " + std::to_string(input) +
                                                              " moments on the moment-space boundary");
    return measure_from_canonical(m01, fixed.values, slice.subspan(n), spec.lower(), spec.upper());
}

}  // namespace

std::size_t ProductMeasure::grid_size() const {
    std::size_t n = 1;
    for (const auto& c : components) n *= c.size();
    return n;
}

std::size_t parameter_count(const MomentSpec& spec) {
    const std::size_t n = spec.order();
    return spec.is_equality() ? n + 1 : 2 * n + 1;
}

std::size_t parameter_count(std::span<const MomentSpec> specs) {
    std::size_t total = 0;
    for (const auto& s : specs) total += parameter_count(s);
    return total;
}

std::vector<Box> parameter_boxes(std::span<const MomentSpec> specs) {
    std::vector<Box> boxes;
    boxes.reserve(parameter_count(specs));
    for (const auto& spec : specs) {
        if (!spec.is_equality()) {
            const auto& box = spec.interval();
            for (std::size_t j = 0; j < spec.order(); ++j) boxes.push_back({box.lowers[j], box.uppers[j]});
        }
        for (std::size_t k = 0; k <= spec.order(); ++k) boxes.push_back({kCanonicalLo, kCanonicalHi});
    }
    return boxes;
}

ProductMeasure decode(std::span<const double> params, std::span<const MomentSpec> specs) {
    if (params.size() != parameter_count(specs))
        throw InvalidArgument("decode: expected " + std::to_string(parameter_count(specs)) +
                              " parameters, got " + std::to_string(params.size()));
    ProductMeasure pm;
    pm.components.reserve(specs.size());
    std::size_t offset = 0;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const std::size_t len = parameter_count(specs[i]);
        pm.components.push_back(decode_input(params.subspan(offset, len), specs[i], i));
        offset += len;
    }
    return pm;
}

ProductMeasure decode_equality(std::span<const double> params, std::span<const MomentSpec> specs) {
    for (const auto& s : specs)
        if (!s.is_equality()) throw InvalidArgument("decode_equality: interval-constrained input");
    return decode(params, specs);
}

ProductMeasure decode_inequality(std::span<const double> params, std::span<const MomentSpec> specs) {
    for (const auto& s : specs)
        if (s.is_equality()) throw InvalidArgument("decode_inequality: equality-constrained input");
    return decode(params, specs);
}

double probability_of_failure(const ProductMeasure& pm, const ModelEvaluator& evaluator,
                              double threshold) {
    const std::size_t dim = pm.components.size();
    if (dim != evaluator.dimension())
        throw InvalidArgument("probability_of_failure: model dimension " +
                              std::to_string(evaluator.dimension()) + " != number of inputs " +
                              std::to_string(dim));
    if (std::isnan(threshold)) throw NonFiniteInput("threshold");
    const std::size_t total = pm.grid_size();

    thread_local std::vector<double> points;
    thread_local std::vector<double> weights;
    thread_local std::vector<double> outputs;
    thread_local std::vector<std::size_t> digit;
    points.resize(total * dim);
    weights.resize(total);
    outputs.resize(total);
    digit.assign(dim, 0);

    // Odometer over the grid, last input varying fastest.
    for (std::size_t g = 0; g < total; ++g) {
        double w = 1.0;
        double* row = points.data() + g * dim;
        for (std::size_t i = 0; i < dim; ++i) {
            row[i] = pm.components[i].atoms[digit[i]];
            w *= pm.components[i].weights[digit[i]];
        }
        weights[g] = w;
        for (std::size_t i = dim; i-- > 0;) {
            if (++digit[i] < pm.components[i].size()) break;
            digit[i] = 0;
        }
    }
    evaluator.evaluate(std::span<const double>(points.data(), total * dim),
                       std::span<double>(outputs.data(), total));

    double sum = 0.0;
    for (std::size_t g = 0; g < total; ++g)
        if (outputs[g] <= threshold) sum += weights[g];
    return std::clamp(sum, 0.0, 1.0);
}

ObjectiveSpace::ObjectiveSpace(std::vector<MomentSpec> specs, std::shared_ptr<ModelEvaluator> evaluator)
    : specs_(std::move(specs)), evaluator_(std::move(evaluator)) {
    if (!evaluator_) throw InvalidArgument("ObjectiveSpace: null evaluator");
    if (specs_.empty()) throw InvalidArgument("ObjectiveSpace: no inputs");
    if (evaluator_->dimension() != specs_.size())
        throw InvalidArgument("ObjectiveSpace: model expects " + std::to_string(evaluator_->dimension()) +
                              " inputs but " + std::to_string(specs_.size()) + " were specified");
    dimension_ = parameter_count(specs_);
    boxes_ = parameter_boxes(specs_);
}

double ObjectiveSpace::operator()(std::span<const double> params, double threshold) const {
    ProductMeasure pm;
    try {
        pm = decode(params, specs_);
    } catch (const OutsideMomentSpace&) {
        ++rejections_;
        return kInfeasiblePenalty;
    } catch (const BoxViolation&) {
        ++rejections_;
        return kInfeasiblePenalty;
    } catch (const DegenerateCluster&) {
        ++rejections_;
        return kInfeasiblePenalty;
    }
    return probability_of_failure(pm, *evaluator_, threshold);
}

MinPofResult min_pof(const ObjectiveSpace& space, double threshold, const OptimizerConfig& config,
                     std::span<const std::vector<double>> warm_start) {
    if (std::isnan(threshold)) throw NonFiniteInput("threshold");
    const std::uint64_t evals_before = space.evaluator().evaluations();
    const OptimizationResult opt = minimize(
        [&](std::span<const double> x) { return space(x, threshold); }, space.boxes(), config, warm_start);
    if (!(opt.best_value < kInfeasiblePenalty))
        throw InvalidArgument("min_pof: no admissible measure found inside the moment boxes");

    MinPofResult result;
    result.value = opt.best_value;
    result.argmin_params = opt.best_point;
    result.argmin = decode(opt.best_point, space.specs());
    result.objective_evals = opt.evaluations;
    result.model_evals = space.evaluator().evaluations() - evals_before;
    return result;
}

MinPofResult min_pof(std::span<const MomentSpec> specs, std::shared_ptr<const ModelFunction> model,
                     double threshold, const OptimizerConfig& config) {
    ObjectiveSpace space(std::vector<MomentSpec>(specs.begin(), specs.end()),
                         std::make_shared<ModelEvaluator>(std::move(model)));
    return min_pof(space, threshold, config);
}

}  // namespace canouq
