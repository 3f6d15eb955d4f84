// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "canouq/envelope.hpp"
#include "canouq/error.hpp"
#include "canouq/measure_gen.hpp"
#include "canouq/models.hpp"
#include "canouq/moment_core.hpp"
#include "canouq/ouq_engine.hpp"
#include "canouq/runner.hpp"

using namespace canouq;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool condition, const std::string& what) {
        if (!condition) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

void report(int id, const std::string& title, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto start = Clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail << " [exception: " << e.what() << "]";
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %d: %s (%.2f s)%s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(),
                seconds_since(start), o.detail.str().c_str());
    std::fflush(stdout);
}

std::shared_ptr<const ModelFunction> identity() { return std::make_shared<models::IdentityModel>(); }

std::vector<MomentSpec> mean_half() { return {MomentSpec(0.0, 1.0, EqualityMoments{{0.5}})}; }

double markov(double h) { return h < 0.5 ? 0.0 : (h < 1.0 ? 1.0 - 0.5 / h : 1.0); }

// Admissibility of a decoded measure against an equality spec: returns the
// worst relative moment error, or infinity when a structural invariant breaks.
double admissibility_error(const DiscreteMeasure& m, const MomentSpec& spec) {
    const double sum = std::accumulate(m.weights.begin(), m.weights.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9) return INFINITY;
    for (std::size_t k = 0; k < m.size(); ++k) {
        if (!(m.weights[k] >= 0.0 && m.weights[k] <= 1.0)) return INFINITY;
        if (m.atoms[k] < spec.lower() || m.atoms[k] > spec.upper()) return INFINITY;
        if (k > 0 && !(m.atoms[k] > m.atoms[k - 1])) return INFINITY;
    }
    double worst = 0;
    const auto& target = spec.equality().values;
    for (std::size_t j = 0; j < target.size(); ++j)
        worst = std::max(worst, std::abs(m.moment(j + 1) - target[j]) / std::max(std::abs(target[j]), 1e-300));
    return worst;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void worked_example(Outcome& o) {
    const auto start = Clock::now();
    const std::vector<double> moments{0.5, 0.35};
    const auto fixed = moments_to_canonical(moments);

    // Two atoms: roots of P*_2 by the tridiagonal eigen solve and by the quadratic formula.
    std::vector<double> p2(fixed.values);
    p2.push_back(0.2);
    const auto atoms2 = support_from_canonical(CanonicalVector(p2), 0.0, 1.0, 2);
    const auto poly = star_polynomial(zeta_sequence(p2), 0.0, 1.0, 2);
    const double b = poly.coefficients[1], c = poly.coefficients[0];
    const double disc = std::sqrt(b * b - 4 * c);
    const std::vector<double> quadratic{(-b - disc) / 2, (-b + disc) / 2};
    const auto w2 = weights_from_support(atoms2, std::vector<double>{moments[0]});
    o.detail << " roots2=(" << atoms2[0] << ", " << atoms2[1] << ") weights2=(" << w2[0] << ", " << w2[1] << ")";
    o.check(std::abs(atoms2[0] - 0.08121) <= 2e-4 && std::abs(atoms2[1] - 0.73878) <= 2e-4, "2-atom roots");
    o.check(std::abs(atoms2[0] - quadratic[0]) <= 1e-12 && std::abs(atoms2[1] - quadratic[1]) <= 1e-12,
            "eigen roots agree with quadratic formula");
    o.check(std::abs(w2[0] - 0.36312) <= 2e-4 && std::abs(w2[1] - 0.63688) <= 2e-4, "2-atom weights");

    // Three atoms through the full decode path.
    const auto m3 = measure_from_canonical(moments, std::vector<double>{0.2, 1e-5, 0.4}, 0.0, 1.0);
    o.detail << " roots3=(" << m3.atoms[0] << ", " << m3.atoms[1] << ", " << m3.atoms[2]
             << ") middle_weight=" << m3.weights[1];
    o.check(m3.size() == 3, "3 atoms");
    o.check(std::abs(m3.atoms[0] - 0.08121) <= 2e-4 && std::abs(m3.atoms[1] - 0.4) <= 2e-4 &&
                std::abs(m3.atoms[2] - 0.73878) <= 2e-4,
            "3-atom roots");
    o.check(m3.weights[1] >= 0.0 && m3.weights[1] <= 1e-4, "middle weight <= 1e-4");
    o.check(std::abs(m3.moment(1) - 0.5) <= 1e-9 && std::abs(m3.moment(2) - 0.35) <= 1e-9, "moments kept");
    o.check(seconds_since(start) < 1.0, "runtime < 1 s");
}

void markov_oracle(Outcome& o) {
    const auto start = Clock::now();
    OptimizerConfig cfg;
    cfg.seed = 1;
    const auto single = min_pof(mean_half(), identity(), 0.75, cfg);
    o.detail << " min_pof(0.75)=" << single.value;
    o.check(single.value >= 1.0 / 3.0 && single.value <= 1.0 / 3.0 + 5e-3, "min_pof in [1/3, 1/3 + 5e-3]");
    const std::vector<double> thresholds{0.6, 0.75, 0.9};
    const auto curve = sweep(mean_half(), identity(), thresholds, cfg);
    o.detail << " envelope=";
    for (const auto& pt : curve.points) {
        o.detail << pt.inf_cdf << " ";
        o.check(std::abs(pt.inf_cdf - markov(pt.threshold)) <= 5e-3, "envelope at " + std::to_string(pt.threshold));
    }
    o.check(seconds_since(start) < 30.0, "runtime < 30 s");
}

void quantile_duality(Outcome& o) {
    const auto start = Clock::now();
    OptimizerConfig cfg;
    cfg.seed = 2;
    const auto r = robust_quantile(mean_half(), identity(), 0.25, {0.5, 1.0}, cfg);
    o.detail << " quantile=" << r.quantile << " bracket=[" << r.bracket.first << ", " << r.bracket.second
             << "] iterations=" << r.iterations;
    o.check(std::abs(r.quantile - 2.0 / 3.0) <= 1e-2, "quantile within 1e-2 of 2/3");
    o.check(seconds_since(start) < 120.0, "runtime < 2 min");
}

void constraint_nesting(Outcome& o) {
    const auto start = Clock::now();
    std::vector<double> thresholds;
    for (int k = 0; k < 10; ++k) thresholds.push_back(1.0 + 0.4 * k);
    OptimizerConfig cfg;
    cfg.seed = 3;
    std::vector<EnvelopeCurve> curves;
    for (std::size_t order = 1; order <= 3; ++order) {
        curves.push_back(sweep(models::hydraulic_specs(order), std::make_shared<models::HydraulicModel>(),
                               thresholds, cfg));
        isotonic_repair(curves.back());
    }
    const auto inputs = models::hydraulic_inputs();
    const auto plug_in = models::plug_in_cdf(models::nominal_distributions(inputs), models::HydraulicModel(),
                                             thresholds, 1000000, 4);
    double worst_nesting = -INFINITY, worst_dominance = -INFINITY;
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
        const double e1 = curves[0].points[k].inf_cdf;
        const double e2 = curves[1].points[k].inf_cdf;
        const double e3 = curves[2].points[k].inf_cdf;
        o.detail << " h=" << thresholds[k] << ":" << e1 << "/" << e2 << "/" << e3 << "/mc=" << plug_in[k].second;
        worst_nesting = std::max({worst_nesting, e1 - (e2 + 5e-3), (e2 + 5e-3) - (e3 + 1e-2)});
        worst_dominance = std::max(worst_dominance, std::max({e1, e2, e3}) - (plug_in[k].second + 5e-3));
    }
    o.check(worst_nesting <= 0, "E1 <= E2 + 5e-3 <= E3 + 1e-2");
    o.check(worst_dominance <= 0, "envelopes below plug-in CDF + 5e-3");
    o.check(seconds_since(start) < 1800.0, "runtime < 30 min");
}

void zero_rejection(Outcome& o) {
    std::vector<MomentSpec> specs = models::hydraulic_specs(3);
    specs.push_back(MomentSpec(0.0, 1.0, EqualityMoments{{0.5, 0.35}}));
    specs.push_back(MomentSpec(-1.0, 1.0, EqualityMoments{{0.1}}));
    const auto boxes = parameter_boxes(specs);
    std::mt19937_64 rng(5);
    std::size_t rejections = 0;
    double worst = 0;
    std::vector<double> params(boxes.size());
    for (int trial = 0; trial < 100000; ++trial) {
        for (std::size_t i = 0; i < boxes.size(); ++i)
            params[i] = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        try {
            const auto pm = decode_equality(params, specs);
            for (std::size_t i = 0; i < specs.size(); ++i) {
                const double err = admissibility_error(pm.components[i], specs[i]);
                if (!(err <= 1e-8)) ++rejections;
                worst = std::max(worst, err);
            }
        } catch (const std::exception&) {
            ++rejections;
        }
    }
    o.detail << " vectors=100000 rejections=" << rejections << " worst_relative_moment_error=" << worst;
    o.check(rejections == 0, "zero rejections");
}

void equality_inequality(Outcome& o) {
    OptimizerConfig cfg;
    cfg.seed = 6;
    double worst = 0;
    for (double h : {0.6, 0.75, 0.9}) {
        const auto eq = min_pof(mean_half(), identity(), h, cfg);
        const std::vector<MomentSpec> collapsed{MomentSpec(0.0, 1.0, IntervalMoments{{0.5}, {0.5}})};
        const auto ineq = min_pof(collapsed, identity(), h, cfg);
        worst = std::max(worst, std::abs(eq.value - ineq.value));
        if (h == 0.75) {
            const std::vector<MomentSpec> wide{MomentSpec(0.0, 1.0, IntervalMoments{{0.4}, {0.6}})};
            const auto relaxed = min_pof(wide, identity(), h, cfg);
            o.detail << " equality(0.75)=" << eq.value << " widened=" << relaxed.value;
            o.check(relaxed.value <= eq.value, "widened box <= equality value");
        }
    }
    o.detail << " worst_collapsed_gap=" << worst;
    o.check(worst <= 1e-3, "collapsed boxes match equality within 1e-3");
}

void property_suites(Outcome& o) {
    const auto start = Clock::now();

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    double worst = 0, worst_double = 0;
    for (int trial = 0; trial < 70000; ++trial) {
        std::vector<double> p(1 + trial % 7);
        for (auto& v : p) v = u(rng);
        const auto c = canonical_to_moments_extended(CanonicalVector(p));
        const auto back = moments_to_canonical(std::span<const long double>(c));
        const auto back_double = moments_to_canonical(canonical_to_moments(CanonicalVector(p)));
        for (std::size_t k = 0; k < p.size(); ++k) {
            worst = std::max(worst, std::abs(back[k] - p[k]));
            worst_double = std::max(worst_double, std::abs(back_double[k] - p[k]));
        }
    }
    o.detail << " round_trip=" << worst << " via_double_moments=" << worst_double;
    o.check(worst <= 1e-9, "round trip within 1e-9");

    const std::vector<MomentSpec> mixed{MomentSpec(0.0, 1.0, EqualityMoments{{0.5}}),
                                        MomentSpec(0.0, 1.0, EqualityMoments{{0.5, 0.35}}),
                                        MomentSpec(0.0, 2.0, EqualityMoments{{1.0, 1.5, 2.5}})};
    auto evaluator = std::make_shared<ModelEvaluator>(
        std::make_shared<models::SumModel>(std::vector<double>{1.0, 1.0, 1.0}), 0);
    ObjectiveSpace space(mixed, evaluator);
    std::vector<double> params(space.dimension());
    for (auto& v : params) v = u(rng);
    const auto pm = decode(params, mixed);
    const auto before = evaluator->evaluations();
    space(params, 1.5);
    o.detail << " grid=" << pm.grid_size() << " evals=" << evaluator->evaluations() - before;
    o.check(pm.grid_size() == 2u * 3u * 4u && evaluator->evaluations() - before == 24u, "grid-size law");

    OptimizerConfig cfg;
    cfg.seed = 8;
    std::vector<double> thresholds;
    for (int k = 0; k < 12; ++k) thresholds.push_back(0.45 + 0.05 * k);
    auto curve = sweep(mean_half(), identity(), thresholds, cfg);
    isotonic_repair(curve);
    bool isotonic = true;
    for (std::size_t k = 1; k < curve.points.size(); ++k)
        isotonic = isotonic && curve.points[k - 1].inf_cdf <= curve.points[k].inf_cdf;
    o.check(isotonic, "isotonic envelope after repair");

    const fs::path dir = fs::temp_directory_path() / "canouq_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const nlohmann::json config = {
        {"inputs",
         {{{"name", "Q"}, {"bounds", {160, 3580}}, {"moments", {1320.42}}},
          {{"name", "Ks"}, {"bounds", {12.55, 47.45}}, {"moments", {30.0}}},
          {{"name", "Zv"}, {"bounds", {49, 51}}, {"moments", {50.0}}},
          {{"name", "Zm"}, {"bounds", {54, 55}}, {"moments", {54.5}}}}},
        {"model", {{"builtin", "hydraulic"}}},
        {"mode", {{"sweep", {{"lo", 1.0}, {"hi", 4.0}, {"count", 4}}}}},
        {"seed", 9},
        {"output", (dir / "out" / "run").string()}};
    std::ofstream(dir / "config.json") << config.dump(2);
    std::ostringstream log;
    std::vector<std::string> runs;
    for (const char* threads : {"1", "3"}) {
        ::setenv("CANOUQ_PARALLELISM", threads, 1);
        const int code = run_command(dir / "config.json", log);
        o.check(code == kExitOk, std::string("run exit code with ") + threads + " thread(s)");
        runs.push_back(slurp(dir / "out" / "run.envelope.csv") + slurp(dir / "out" / "run.argmin.json"));
    }
    ::unsetenv("CANOUQ_PARALLELISM");
    fs::remove_all(dir);
    o.check(runs.size() == 2 && !runs[0].empty() && runs[0] == runs[1], "byte-identical reruns");

    o.check(seconds_since(start) < 60.0, "runtime < 1 min");
}

void nine_input_shape(Outcome& o) {
    const auto start = Clock::now();
    const auto inputs = models::cathare_inputs();
    const auto specs = models::cathare_specs();
    std::vector<double> scales;
    double center = 0;
    for (const auto& in : inputs) {
        scales.push_back(1.0 / (in.upper - in.lower));
        center += in.moments[0] / (in.upper - in.lower);
    }
    auto model = std::make_shared<models::SumModel>(scales);
    OptimizerConfig cfg;
    cfg.seed = 10;
    const auto r = min_pof(specs, model, center, cfg);
    o.detail << " threshold=" << center << " min_pof=" << r.value << " model_evals=" << r.model_evals;

    std::size_t expected_grid = 1;
    for (const auto& s : specs) expected_grid *= s.order() + 1;
    o.check(r.argmin.grid_size() == expected_grid, "grid-size law on argmin");
    double worst = 0;
    for (std::size_t i = 0; i < specs.size(); ++i)
        worst = std::max(worst, admissibility_error(r.argmin.components[i], specs[i]));
    o.check(worst <= 1e-8, "argmin measures admissible");
    o.check(r.value >= 0.0 && r.value <= 1.0, "min_pof in [0, 1]");

    const auto boxes = parameter_boxes(specs);
    std::mt19937_64 rng(11);
    std::size_t rejections = 0;
    std::vector<double> params(boxes.size());
    for (int trial = 0; trial < 10000; ++trial) {
        for (std::size_t i = 0; i < boxes.size(); ++i)
            params[i] = std::uniform_real_distribution<double>(boxes[i].lo, boxes[i].hi)(rng);
        try {
            const auto pm = decode_equality(params, specs);
            for (std::size_t i = 0; i < specs.size(); ++i)
                if (!(admissibility_error(pm.components[i], specs[i]) <= 1e-8)) ++rejections;
        } catch (const std::exception&) {
            ++rejections;
        }
    }
    o.detail << " worst_argmin_error=" << worst << " sampled_rejections=" << rejections;
    o.check(rejections == 0, "random decodes admissible");
    o.check(seconds_since(start) < 3600.0, "runtime < 1 hour");
}

}  // namespace

int main() {
    report(1, "worked example reproduction", worked_example);
    report(2, "Markov bound oracle", markov_oracle);
    report(3, "robust quantile duality", quantile_duality);
    report(4, "constraint-order nesting on the hydraulic model", constraint_nesting);
    report(5, "zero-rejection decoding", zero_rejection);
    report(6, "equality/inequality consistency", equality_inequality);
    report(7, "round-trip and property suites", property_suites);
    report(8, "nine-input configuration shape", nine_input_shape);
    return failures == 0 ? 0 : 1;
}
