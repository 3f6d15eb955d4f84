#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "canouq/global_opt.hpp"
#include "canouq/measure_gen.hpp"
#include "canouq/model.hpp"
#include "canouq/moment_core.hpp"

namespace canouq {

/// Objective value reported for parameter vectors whose moment slice is infeasible.
inline constexpr double kInfeasiblePenalty = 2.0;

/// One discrete measure per input; the joint law is their product.
struct ProductMeasure {
    std::vector<DiscreteMeasure> components;

    std::size_t grid_size() const;
};

/// Optimizer coordinates used by one input:
///   equality:  N + 1 free canonical moments p_{N+1}..p_{2N+1};
///   interval:  N raw moments c_1..c_N (original units, boxed) followed by
///              N + 1 free canonical moments.
std::size_t parameter_count(const MomentSpec& spec);
std::size_t parameter_count(std::span<const MomentSpec> specs);

/// Search boxes: [1e-9, 1 - 1e-9] for canonical coordinates and [alpha_j, beta_j]
/// for the raw moments of interval-constrained inputs.
std::vector<Box> parameter_boxes(std::span<const MomentSpec> specs);

/// Decodes a parameter vector whose inputs may mix equality and interval constraints.
ProductMeasure decode(std::span<const double> params, std::span<const MomentSpec> specs);
/// Same as decode, but every spec must carry equality constraints.
ProductMeasure decode_equality(std::span<const double> params, std::span<const MomentSpec> specs);
/// Same as decode, but every spec must carry interval constraints.
ProductMeasure decode_inequality(std::span<const double> params, std::span<const MomentSpec> specs);

/// Weighted indicator sum P(G(X) <= threshold) over the tensor grid of atoms.
double probability_of_failure(const ProductMeasure& pm, const ModelEvaluator& evaluator,
                              double threshold);

/// Threshold-parameterized objective over the decoded parameter space.
class ObjectiveSpace {
public:
    ObjectiveSpace(std::vector<MomentSpec> specs, std::shared_ptr<ModelEvaluator> evaluator);

    const std::vector<MomentSpec>& specs() const noexcept { return specs_; }
    const ModelEvaluator& evaluator() const noexcept { return *evaluator_; }
    std::size_t dimension() const noexcept { return dimension_; }
    const std::vector<Box>& boxes() const noexcept { return boxes_; }

    /// Probability of failure of the decoded measure, or kInfeasiblePenalty when
    /// the moment slice of an interval-constrained input is not a valid sequence.
    double operator()(std::span<const double> params, double threshold) const;

    std::uint64_t rejections() const noexcept { return rejections_.load(); }

private:
    std::vector<MomentSpec> specs_;
    std::shared_ptr<ModelEvaluator> evaluator_;
    std::size_t dimension_;
    std::vector<Box> boxes_;
    mutable std::atomic<std::uint64_t> rejections_{0};
};

struct MinPofResult {
    double value = 1.0;
    ProductMeasure argmin;
    std::vector<double> argmin_params;
    std::uint64_t model_evals = 0;
    std::uint64_t objective_evals = 0;
};

/// Lowest probability of failure at `threshold` found by the global optimizer.
/// `warm_start` points seed part of the initial population.
MinPofResult min_pof(const ObjectiveSpace& space, double threshold, const OptimizerConfig& config,
                     std::span<const std::vector<double>> warm_start = {});

MinPofResult min_pof(std::span<const MomentSpec> specs, std::shared_ptr<const ModelFunction> model,
                     double threshold, const OptimizerConfig& config);

}  // namespace canouq
