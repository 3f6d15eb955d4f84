#include "canouq/model.hpp"

#include <bit>
#include <cmath>

#include "canouq/error.hpp"

namespace canouq {

double ModelFunction::evaluate(std::span<const double> x) const {
    double y = 0;
    evaluate_batch(x, std::span<double>(&y, 1));
    return y;
}

FunctionModel::FunctionModel(std::size_t dimension, Fn fn, EvaluationCost cost, std::string name)
    : dimension_(dimension), fn_(std::move(fn)), cost_(cost), name_(std::move(name)) {}

void FunctionModel::evaluate_batch(std::span<const double> points, std::span<double> out) const {
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = fn_(points.subspan(i * dimension_, dimension_));
}

EvaluationCache::EvaluationCache(std::size_t capacity) : capacity_(capacity) {}

EvaluationCache::Key EvaluationCache::make_key(std::span<const double> point) {
    Key key(point.size());
    for (std::size_t i = 0; i < point.size(); ++i) key[i] = std::bit_cast<std::uint64_t>(point[i]);
    return key;
}

std::size_t EvaluationCache::KeyHash::operator()(const Key& key) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (std::uint64_t v : key) {
        h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h *= 0xff51afd7ed558ccdULL;
    }
    return static_cast<std::size_t>(h ^ (h >> 33));
}

bool EvaluationCache::lookup(std::span<const double> point, double& value) {
    if (capacity_ == 0) return false;
    const Key key = make_key(point);
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return false;
    order_.splice(order_.begin(), order_, it->second.second);
    value = it->second.first;
    return true;
}

void EvaluationCache::insert(std::span<const double> point, double value) {
    if (capacity_ == 0) return;
    Key key = make_key(point);
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it != entries_.end()) {
        it->second.first = value;
        order_.splice(order_.begin(), order_, it->second.second);
        return;
    }
    order_.push_front(key);
    entries_.emplace(std::move(key), std::make_pair(value, order_.begin()));
    if (entries_.size() > capacity_) {
        entries_.erase(order_.back());
        order_.pop_back();
    }
}

std::size_t EvaluationCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

ModelEvaluator::ModelEvaluator(std::shared_ptr<const ModelFunction> model, std::size_t memo_capacity)
    : model_(std::move(model)) {
    if (!model_) throw InvalidArgument("ModelEvaluator: null model");
    if (model_->cost() == EvaluationCost::expensive && memo_capacity > 0)
        cache_ = std::make_unique<EvaluationCache>(memo_capacity);
}

void ModelEvaluator::call_model(std::span<const double> points, std::span<double> out) const {
    const std::size_t dim = model_->dimension();
    try {
        if (model_->concurrent_safe()) {
            model_->evaluate_batch(points, out);
        } else {
            std::lock_guard lock(serial_);
            model_->evaluate_batch(points, out);
        }
    } catch (const ModelEvaluationFailure&) {
        throw;
    } catch (const std::exception& e) {
        // Replay point by point to name the failing input.
        std::string reason = e.what();
        std::size_t failing = 0;
        if (out.size() > 1) {
            for (std::size_t i = 0; i < out.size(); ++i) {
                try {
                    std::lock_guard lock(serial_);
                    model_->evaluate(points.subspan(i * dim, dim));
                } catch (const std::exception& inner) {
                    failing = i;
                    reason = inner.what();
                    break;
                }
            }
        }
        auto p = points.subspan(failing * dim, dim);
        throw ModelEvaluationFailure(std::vector<double>(p.begin(), p.end()), reason);
    }
    evaluations_ += out.size();
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (std::isnan(out[i])) {
            auto p = points.subspan(i * dim, dim);
            throw ModelEvaluationFailure(std::vector<double>(p.begin(), p.end()), "model returned NaN");
        }
    }
}

void ModelEvaluator::evaluate(std::span<const double> points, std::span<double> out) const {
    const std::size_t dim = model_->dimension();
    if (points.size() != out.size() * dim)
        throw InvalidArgument("ModelEvaluator: point buffer does not match output size");
    if (!cache_) {
        call_model(points, out);
        return;
    }
    std::vector<std::size_t> missing;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (!cache_->lookup(points.subspan(i * dim, dim), out[i])) missing.push_back(i);
    if (missing.empty()) return;

    std::vector<double> batch(missing.size() * dim);
    for (std::size_t m = 0; m < missing.size(); ++m)
        std::copy_n(points.begin() + static_cast<std::ptrdiff_t>(missing[m] * dim), dim,
                    batch.begin() + static_cast<std::ptrdiff_t>(m * dim));
    std::vector<double> values(missing.size());
    call_model(batch, values);
    for (std::size_t m = 0; m < missing.size(); ++m) {
        out[missing[m]] = values[m];
        cache_->insert(std::span<const double>(batch).subspan(m * dim, dim), values[m]);
    }
}

}  // namespace canouq
