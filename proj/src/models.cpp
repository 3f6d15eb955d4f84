#include "canouq/models.hpp"

#include <algorithm>
#include <cmath>

#include "canouq/error.hpp"
#include "canouq/global_opt.hpp"
#include "canouq/parallel.hpp"

namespace canouq::models {

namespace {

constexpr std::size_t kChunk = std::size_t{1} << 14;
constexpr int kMaxRejections = 1000000;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double draw(const Law& law, std::mt19937_64& rng) {
    return std::visit(
        overloaded{
            [&](const Gumbel& g) { return std::extreme_value_distribution<double>(g.mode, g.scale)(rng); },
            [&](const Normal& n) { return std::normal_distribution<double>(n.mean, n.sd)(rng); },
            [&](const Uniform& u) { return std::uniform_real_distribution<double>(u.a, u.b)(rng); },
            [&](const LogNormal& l) { return std::lognormal_distribution<double>(l.mu, l.sigma)(rng); },
        },
        law);
}

}  // namespace

double hydraulic_height(const HydraulicInput& in) {
    if (!(in.upstream > in.downstream)) throw DomainError("hydraulic_height: requires Zm > Zv");
    if (!(in.strickler > 0)) throw DomainError("hydraulic_height: requires Ks > 0");
    if (!(in.flow >= 0)) throw DomainError("hydraulic_height: requires Q >= 0");
    const double slope = std::sqrt((in.upstream - in.downstream) / 5000.0);
    return std::pow(in.flow / (300.0 * in.strickler * slope), 0.6);
}

void HydraulicModel::evaluate_batch(std::span<const double> points, std::span<double> out) const {
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double* x = points.data() + 4 * i;
        out[i] = hydraulic_height({x[0], x[1], x[2], x[3]});
    }
}

double identity_model(std::span<const double> x) { return x[0]; }

void IdentityModel::evaluate_batch(std::span<const double> points, std::span<double> out) const {
    std::copy_n(points.begin(), out.size(), out.begin());
}

SumModel::SumModel(std::vector<double> scales) : scales_(std::move(scales)) {
    if (scales_.empty()) throw InvalidArgument("SumModel: no inputs");
}

void SumModel::evaluate_batch(std::span<const double> points, std::span<double> out) const {
    const std::size_t dim = scales_.size();
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = 0;
        for (std::size_t j = 0; j < dim; ++j) s += scales_[j] * points[i * dim + j];
        out[i] = s;
    }
}

double Distribution::sample(std::mt19937_64& rng) const {
    if (!truncation) return draw(law, rng);
    const auto [lo, hi] = *truncation;
    for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
        const double x = draw(law, rng);
        if (x >= lo && x <= hi) return x;
    }
    throw DomainError("Distribution::sample: truncation interval has negligible mass");
}

std::vector<std::pair<double, double>> plug_in_cdf(std::span<const Distribution> distributions,
                                                   const ModelFunction& model,
                                                   std::span<const double> thresholds,
                                                   std::size_t n_samples, std::uint64_t seed,
                                                   std::size_t threads) {
    const std::size_t dim = model.dimension();
    if (distributions.size() != dim)
        throw InvalidArgument("plug_in_cdf: one distribution per model input is required");
    if (n_samples == 0) throw InvalidArgument("plug_in_cdf: n_samples must be positive");

    const std::size_t chunks = (n_samples + kChunk - 1) / kChunk;
    std::vector<std::vector<std::size_t>> counts(chunks, std::vector<std::size_t>(thresholds.size(), 0));
    parallel_for(chunks, threads, [&](std::size_t c) {
        const std::size_t begin = c * kChunk;
        const std::size_t n = std::min(kChunk, n_samples - begin);
        std::mt19937_64 rng(derive_seed(seed, c));
        std::vector<double> points(n * dim);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < dim; ++j) points[i * dim + j] = distributions[j].sample(rng);
        std::vector<double> out(n);
        model.evaluate_batch(points, out);
        for (std::size_t t = 0; t < thresholds.size(); ++t)
            counts[c][t] = static_cast<std::size_t>(
                std::count_if(out.begin(), out.end(), [&](double y) { return y <= thresholds[t]; }));
    });

    std::vector<std::pair<double, double>> cdf(thresholds.size());
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
        std::size_t total = 0;
        for (const auto& chunk : counts) total += chunk[t];
        cdf[t] = {thresholds[t], static_cast<double>(total) / static_cast<double>(n_samples)};
    }
    return cdf;
}

SampleMoments sample_moments(const Distribution& d, std::size_t order, std::size_t n_samples,
                             std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<long double> sum(order, 0), sum_sq(order, 0);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const long double x = d.sample(rng);
        long double power = 1;
        for (std::size_t j = 0; j < order; ++j) {
            power *= x;
            sum[j] += power;
            sum_sq[j] += power * power;
        }
    }
    SampleMoments m;
    const auto n = static_cast<long double>(n_samples);
    for (std::size_t j = 0; j < order; ++j) {
        const long double mean = sum[j] / n;
        const long double var = std::max<long double>(sum_sq[j] / n - mean * mean, 0);
        m.means.push_back(static_cast<double>(mean));
        m.standard_errors.push_back(static_cast<double>(std::sqrt(var / n)));
    }
    return m;
}

std::vector<NamedInput> hydraulic_published_moments() {
    return {
        {"Q", 160.0, 3580.0, {1320.42, 2.1632e6, 4.18e9}, Distribution{Gumbel{1013.0, 558.0}, {{160.0, 3580.0}}}},
        {"Ks", 12.55, 47.45, {30.0, 949.0, 31422.0}, Distribution{Normal{30.0, 7.5}, {{12.55, 47.45}}}},
        {"Zv", 49.0, 51.0, {50.0, 2500.0, 125050.0}, Distribution{Uniform{49.0, 51.0}, {}}},
        {"Zm", 54.0, 55.0, {54.5, 2970.0, 161892.0}, Distribution{Uniform{54.0, 55.0}, {}}},
    };
}

std::vector<NamedInput> hydraulic_inputs() {
    std::vector<NamedInput> inputs = hydraulic_published_moments();
    // Exact moments of U(49, 51) and U(54, 55).
    inputs[2].moments = {50.0, 7501.0 / 3.0, 125050.0};
    inputs[3].moments = {54.5, 8911.0 / 3.0, 647569.0 / 4.0};
    return inputs;
}

std::vector<MomentSpec> hydraulic_specs(std::size_t order) {
    if (order < 1 || order > 3) throw InvalidArgument("hydraulic_specs: order must be 1, 2 or 3");
    std::vector<MomentSpec> specs;
    for (const auto& in : hydraulic_inputs())
        specs.emplace_back(in.lower, in.upper,
                           EqualityMoments{std::vector<double>(in.moments.begin(), in.moments.begin() + order)});
    return specs;
}

std::vector<NamedInput> cathare_inputs() {
    const Distribution heat{LogNormal{0.0, 0.76}, {{0.1, 10.0}}};
    return {
        {"n10", 0.1, 10.0, {1.33, 3.02}, heat},
        {"n22", 0.0, 12.8, {6.4, 45.39}, Distribution{Normal{6.4, 4.27}, {{0.0, 12.8}}}},
        {"n25", 11.1, 16.57, {13.83, 192.22}, std::nullopt},
        {"n2", -44.9, 63.5, {9.3, 1065.0}, Distribution{Uniform{-44.9, 63.5}, {}}},
        {"n12", 0.1, 10.0, {1.33, 3.02}, heat},
        {"n9", 0.1, 10.0, {1.33, 3.02}, heat},
        {"n14", 0.235, 3.45, {0.99, 1.19}, Distribution{LogNormal{-0.1, 0.45}, {{0.235, 3.45}}}},
        {"n15", 0.1, 3.0, {0.64, 0.55}, Distribution{LogNormal{-0.6, 0.57}, {{0.1, 3.0}}}},
        {"n13", 0.1, 10.0, {1.33, 3.02}, heat},
    };
}

std::vector<MomentSpec> cathare_specs() {
    std::vector<MomentSpec> specs;
    for (const auto& in : cathare_inputs()) specs.emplace_back(in.lower, in.upper, EqualityMoments{in.moments});
    return specs;
}

std::vector<Distribution> nominal_distributions(std::span<const NamedInput> inputs) {
    std::vector<Distribution> out;
    for (const auto& in : inputs) {
        if (!in.distribution) throw InvalidArgument("input " + in.name + " has no nominal distribution");
        out.push_back(*in.distribution);
    }
    return out;
}

}  // namespace canouq::models
