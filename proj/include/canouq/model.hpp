#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace canouq {

/// Hint used to decide whether model outputs are worth memoizing.
enum class EvaluationCost { cheap, expensive };

/// Deterministic black-box map from R^dimension to R.
///
/// `evaluate_batch` receives `out.size()` points stored row-major in `points`.
/// Implementations that are not safe to call concurrently report it through
/// `concurrent_safe()`; callers then serialize batches.
class ModelFunction {
public:
    virtual ~ModelFunction() = default;

    virtual std::size_t dimension() const = 0;
    virtual void evaluate_batch(std::span<const double> points, std::span<double> out) const = 0;

    virtual EvaluationCost cost() const { return EvaluationCost::cheap; }
    virtual bool concurrent_safe() const { return true; }
    virtual std::string name() const { return "model"; }

    double evaluate(std::span<const double> x) const;
};

/// Adapts a callable taking a point to the model contract.
class FunctionModel : public ModelFunction {
public:
    using Fn = std::function<double(std::span<const double>)>;

    FunctionModel(std::size_t dimension, Fn fn, EvaluationCost cost = EvaluationCost::cheap,
                  std::string name = "function");

    std::size_t dimension() const override { return dimension_; }
    void evaluate_batch(std::span<const double> points, std::span<double> out) const override;
    EvaluationCost cost() const override { return cost_; }
    std::string name() const override { return name_; }

private:
    std::size_t dimension_;
    Fn fn_;
    EvaluationCost cost_;
    std::string name_;
};

/// Bounded LRU map from exact point coordinates to model outputs. Thread-safe.
class EvaluationCache {
public:
    explicit EvaluationCache(std::size_t capacity = std::size_t{1} << 20);

    bool lookup(std::span<const double> point, double& value);
    void insert(std::span<const double> point, double value);
    std::size_t size() const;
    std::size_t capacity() const noexcept { return capacity_; }

private:
    struct KeyHash {
        std::size_t operator()(const std::vector<std::uint64_t>& key) const noexcept;
    };
    using Key = std::vector<std::uint64_t>;
    using Order = std::list<Key>;

    static Key make_key(std::span<const double> point);

    std::size_t capacity_;
    mutable std::mutex mutex_;
    Order order_;
    std::unordered_map<Key, std::pair<double, Order::iterator>, KeyHash> entries_;
};

/// A model plus its evaluation counter and (for expensive models) a memo.
/// Errors raised by the model are rethrown as ModelEvaluationFailure.
class ModelEvaluator {
public:
    explicit ModelEvaluator(std::shared_ptr<const ModelFunction> model,
                            std::size_t memo_capacity = std::size_t{1} << 20);

    const ModelFunction& model() const noexcept { return *model_; }
    std::size_t dimension() const noexcept { return model_->dimension(); }

    /// Evaluates `out.size()` row-major points.
    void evaluate(std::span<const double> points, std::span<double> out) const;

    std::uint64_t evaluations() const noexcept { return evaluations_.load(); }
    bool memoized() const noexcept { return cache_ != nullptr; }

private:
    void call_model(std::span<const double> points, std::span<double> out) const;

    std::shared_ptr<const ModelFunction> model_;
    std::unique_ptr<EvaluationCache> cache_;
    mutable std::mutex serial_;
    mutable std::atomic<std::uint64_t> evaluations_{0};
};

}  // namespace canouq
