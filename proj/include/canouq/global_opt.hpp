#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace canouq {

struct Box {
    double lo;
    double hi;
};

enum class Strategy { differential_evolution, simulated_annealing };

/// Global optimizer settings. A population of 0 selects max(15 * dim, 60).
struct OptimizerConfig {
    Strategy strategy = Strategy::differential_evolution;
    std::size_t population = 0;
    int max_iterations = 300;
    double de_weight = 0.7;
    double de_crossover = 0.9;
    std::uint64_t seed = 0;
    double target_tolerance = 1e-6;
    int stall_generations = 40;
    bool parallel_evaluations = false;
    std::size_t threads = 0;  ///< 0 = hardware concurrency

    void validate() const;
    std::size_t population_for(std::size_t dimension) const;
};

struct OptimizationResult {
    double best_value = 0;
    std::vector<double> best_point;
    std::uint64_t evaluations = 0;
    int iterations = 0;
    std::vector<double> best_history;  ///< best value after initialization and each generation
};

using Objective = std::function<double(std::span<const double>)>;

/// Minimizes `objective` over the product of `boxes`.
///
/// Deterministic for a fixed (seed, config, objective) regardless of
/// `parallel_evaluations`. Optional `seeds` replace part of the initial
/// population (at most 20%); copies beyond the provided points are jittered.
/// Objective exceptions are rethrown as OptimizerError naming the point.
OptimizationResult minimize(const Objective& objective, std::span<const Box> boxes,
                            const OptimizerConfig& config,
                            std::span<const std::vector<double>> seeds = {});

/// Counter-based seed derivation used to partition random streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace canouq
