#pragma once

#include <condition_variable>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "canouq/model.hpp"

namespace canouq {

/// Model backed by a long-running child process.
///
/// Protocol: one request per line on the child's stdin (space-separated
/// decimal floats), one decimal float per line on its stdout. A nonzero exit,
/// an early EOF or an unparsable line raises ModelEvaluationFailure.
///
/// With `concurrent` set, up to `pool_size` children serve batches in
/// parallel; otherwise a single child is used and batches are serialized.
class ExternalCommandModel : public ModelFunction {
public:
    ExternalCommandModel(std::vector<std::string> argv, std::size_t dimension, bool concurrent = false,
                         std::size_t pool_size = 1);
    ~ExternalCommandModel() override;

    ExternalCommandModel(const ExternalCommandModel&) = delete;
    ExternalCommandModel& operator=(const ExternalCommandModel&) = delete;

    std::size_t dimension() const override { return dimension_; }
    void evaluate_batch(std::span<const double> points, std::span<double> out) const override;
    EvaluationCost cost() const override { return EvaluationCost::expensive; }
    bool concurrent_safe() const override { return true; }
    std::string name() const override;

private:
    class Child;

    std::vector<std::string> argv_;
    std::size_t dimension_;
    mutable std::mutex mutex_;
    mutable std::condition_variable available_;
    mutable std::vector<std::unique_ptr<Child>> idle_;
    mutable std::size_t spawned_ = 0;
    std::size_t pool_size_;
};

}  // namespace canouq
