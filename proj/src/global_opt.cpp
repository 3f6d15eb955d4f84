#include "canouq/global_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "canouq/error.hpp"
#include "canouq/parallel.hpp"

namespace canouq {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double clip(double v, const Box& b) { return std::clamp(v, b.lo, b.hi); }

double reflect(double v, const Box& b) {
    const double w = b.hi - b.lo;
    if (w <= 0) return b.lo;
    double t = std::fmod(v - b.lo, 2 * w);
    if (t < 0) t += 2 * w;
    return t <= w ? b.lo + t : b.hi - (t - w);
}

class Evaluator {
public:
    Evaluator(const Objective& f, const OptimizerConfig& cfg) : f_(f), cfg_(cfg) {}

    double one(std::span<const double> x) {
        ++count_;
        return guarded(x);
    }

    // Evaluates every row; results land in index order whatever the completion order.
    void many(const std::vector<std::vector<double>>& xs, std::vector<double>& out) {
        out.resize(xs.size());
        count_ += xs.size();
        const std::size_t threads = cfg_.parallel_evaluations ? cfg_.threads : 1;
        parallel_for(xs.size(), threads, [&](std::size_t i) { out[i] = guarded(xs[i]); });
    }

    std::uint64_t count() const { return count_; }

private:
    double guarded(std::span<const double> x) const {
        double v = 0;
        try {
            v = f_(x);
        } catch (const std::exception& e) {
            throw OptimizerError("objective failed at " +
                                 format_point(std::vector<double>(x.begin(), x.end())) + ": " +
                                 e.what());
        }
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    }

    const Objective& f_;
    const OptimizerConfig& cfg_;
    std::uint64_t count_ = 0;
};

std::vector<double> random_point(std::span<const Box> boxes, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(boxes.size());
    for (std::size_t j = 0; j < boxes.size(); ++j) x[j] = boxes[j].lo + u(rng) * (boxes[j].hi - boxes[j].lo);
    return x;
}

bool stalled(const std::vector<double>& history, const OptimizerConfig& cfg) {
    const std::size_t g = history.size() - 1;
    const auto window = static_cast<std::size_t>(cfg.stall_generations);
    if (g < window) return false;
    return history[g - window] - history[g] < cfg.target_tolerance;
}

OptimizationResult differential_evolution(const Objective& objective, std::span<const Box> boxes,
                                          const OptimizerConfig& cfg,
                                          std::span<const std::vector<double>> seeds) {
    const std::size_t dim = boxes.size();
    const std::size_t np = cfg.population_for(dim);
    Evaluator eval(objective, cfg);

    std::vector<std::vector<double>> pop(np);
    for (std::size_t i = 0; i < np; ++i) {
        std::mt19937_64 rng(derive_seed(cfg.seed, 0, i));
        pop[i] = random_point(boxes, rng);
    }
    if (!seeds.empty()) {
        const std::size_t seeded = std::max<std::size_t>(1, np / 5);
        for (std::size_t i = 0; i < seeded; ++i) {
            const auto& s = seeds[i % seeds.size()];
            if (s.size() != dim) throw InvalidArgument("minimize: seed point has wrong dimension");
            std::mt19937_64 rng(derive_seed(cfg.seed, 0, np + i));
            std::normal_distribution<double> jitter(0.0, 0.02);
            for (std::size_t j = 0; j < dim; ++j) {
                const double w = boxes[j].hi - boxes[j].lo;
                const double v = i < seeds.size() ? s[j] : s[j] + jitter(rng) * w;
                pop[i][j] = clip(v, boxes[j]);
            }
        }
    }

    std::vector<double> values;
    eval.many(pop, values);
    std::size_t best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());

    OptimizationResult result;
    result.best_history.push_back(values[best]);

    std::vector<std::vector<double>> trials(np, std::vector<double>(dim));
    std::vector<double> trial_values;
    int generation = 0;
    while (generation < cfg.max_iterations) {
        ++generation;
        for (std::size_t i = 0; i < np; ++i) {
            std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(generation), i));
            std::uniform_int_distribution<std::size_t> pick(0, np - 1);
            std::size_t r1, r2, r3;
            do r1 = pick(rng); while (r1 == i);
            do r2 = pick(rng); while (r2 == i || r2 == r1);
            do r3 = pick(rng); while (r3 == i || r3 == r1 || r3 == r2);
            std::uniform_int_distribution<std::size_t> pick_dim(0, dim - 1);
            const std::size_t forced = pick_dim(rng);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (std::size_t j = 0; j < dim; ++j) {
                const bool cross = u(rng) < cfg.de_crossover || j == forced;
                const double v = cross ? pop[r1][j] + cfg.de_weight * (pop[r2][j] - pop[r3][j]) : pop[i][j];
                trials[i][j] = clip(v, boxes[j]);
            }
        }
        eval.many(trials, trial_values);
        // Ties keep the incumbent.
        for (std::size_t i = 0; i < np; ++i) {
            if (trial_values[i] < values[i]) {
                std::swap(pop[i], trials[i]);
                values[i] = trial_values[i];
                if (values[i] < values[best]) best = i;
            }
        }
        result.best_history.push_back(values[best]);
        if (stalled(result.best_history, cfg)) break;
    }

    result.best_value = values[best];
    result.best_point = pop[best];
    result.evaluations = eval.count();
    result.iterations = generation;
    return result;
}

OptimizationResult simulated_annealing(const Objective& objective, std::span<const Box> boxes,
                                       const OptimizerConfig& cfg,
                                       std::span<const std::vector<double>> seeds) {
    const std::size_t dim = boxes.size();
    const std::size_t moves = cfg.population_for(dim);
    constexpr double kInitialTemperature = 1.0;
    constexpr double kCooling = 0.95;
    constexpr double kStepFraction = 0.1;
    Evaluator eval(objective, cfg);

    std::vector<double> x;
    if (!seeds.empty()) {
        x = seeds[0];
        if (x.size() != dim) throw InvalidArgument("minimize: seed point has wrong dimension");
        for (std::size_t j = 0; j < dim; ++j) x[j] = clip(x[j], boxes[j]);
    } else {
        std::mt19937_64 rng(derive_seed(cfg.seed, 0, 0));
        x = random_point(boxes, rng);
    }
    double fx = eval.one(x);

    OptimizationResult result;
    result.best_point = x;
    result.best_value = fx;
    result.best_history.push_back(fx);

    std::vector<double> y(dim);
    double temperature = kInitialTemperature;
    int iteration = 0;
    while (iteration < cfg.max_iterations) {
        for (std::size_t s = 0; s < moves; ++s) {
            std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(iteration) + 1, s));
            std::normal_distribution<double> step(0.0, 1.0);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (std::size_t j = 0; j < dim; ++j)
                y[j] = reflect(x[j] + step(rng) * kStepFraction * (boxes[j].hi - boxes[j].lo), boxes[j]);
            const double fy = eval.one(y);
            if (fy < fx || u(rng) < std::exp(-(fy - fx) / temperature)) {
                x = y;
                fx = fy;
                if (fx < result.best_value) {
                    result.best_value = fx;
                    result.best_point = x;
                }
            }
        }
        ++iteration;
        temperature *= kCooling;
        result.best_history.push_back(result.best_value);
        if (stalled(result.best_history, cfg)) break;
    }
    result.evaluations = eval.count();
    result.iterations = iteration;
    return result;
}

}  // namespace

void OptimizerConfig::validate() const {
    if (population != 0 && population < 4) throw InvalidArgument("optimizer: population must be >= 4");
    if (!(de_weight > 0.0 && de_weight < 2.0)) throw InvalidArgument("optimizer: F must lie in (0,2)");
    if (!(de_crossover >= 0.0 && de_crossover <= 1.0)) throw InvalidArgument("optimizer: CR must lie in [0,1]");
    if (max_iterations < 0) throw InvalidArgument("optimizer: max_iterations must be >= 0");
    if (stall_generations < 1) throw InvalidArgument("optimizer: stall_generations must be >= 1");
    if (!(target_tolerance >= 0.0)) throw InvalidArgument("optimizer: target_tolerance must be >= 0");
}

std::size_t OptimizerConfig::population_for(std::size_t dimension) const {
    if (population != 0) return population;
    return std::max<std::size_t>(15 * dimension, 60);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd6e8feb86659fd93ULL));
}

OptimizationResult minimize(const Objective& objective, std::span<const Box> boxes,
                            const OptimizerConfig& config,
                            std::span<const std::vector<double>> seeds) {
    config.validate();
    if (boxes.empty()) throw InvalidArgument("minimize: empty search space");
    for (const Box& b : boxes)
        if (!(b.lo <= b.hi) || !std::isfinite(b.lo) || !std::isfinite(b.hi))
            throw InvalidArgument("minimize: invalid box");
    if (config.strategy == Strategy::simulated_annealing)
        return simulated_annealing(objective, boxes, config, seeds);
    return differential_evolution(objective, boxes, config, seeds);
}

}  // namespace canouq
