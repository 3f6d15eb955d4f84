#include "canouq/runner.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "canouq/config.hpp"
#include "canouq/envelope.hpp"
#include "canouq/ouq_engine.hpp"

namespace canouq {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

json measure_json(const ProblemConfig& config, const ProductMeasure& pm) {
    json out = json::array();
    for (std::size_t i = 0; i < pm.components.size(); ++i) {
        out.push_back({{"input", config.inputs[i].name},
                       {"atoms", pm.components[i].atoms},
                       {"weights", pm.components[i].weights}});
    }
    return out;
}

std::filesystem::path with_suffix(const std::string& prefix, const char* suffix) {
    return std::filesystem::path(prefix + suffix);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw Error("write to '" + path.string() + "' failed");
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

struct Prepared {
    ProblemConfig config;
    std::vector<MomentSpec> specs;
    std::shared_ptr<const ModelFunction> model;
    std::size_t threads = 1;
};

Prepared prepare(const std::filesystem::path& path) {
    Prepared p{load_config(path), {}, {}, 1};
    p.specs = build_specs(p.config);
    p.threads = effective_parallelism(p.config);
    p.model = build_model(p.config, p.threads);
    p.config.optimizer.threads = p.threads;
    if (p.threads == 1) p.config.optimizer.parallel_evaluations = false;
    return p;
}

std::vector<std::filesystem::path> run_sweep(const Prepared& p, const SweepMode& mode,
                                             const std::string& digest, std::ostream& log) {
    auto evaluator = std::make_shared<ModelEvaluator>(p.model);
    ObjectiveSpace space(p.specs, evaluator);
    SweepOptions options;
    options.progress = [&](const EnvelopePoint& pt, std::size_t k, std::size_t n) {
        log << "[sweep] " << (k + 1) << "/" << n << " h=" << fmt(pt.threshold)
            << " inf_cdf=" << fmt(pt.raw_inf_cdf) << " model_evals=" << pt.model_evals << std::endl;
    };
    EnvelopeCurve curve = sweep(space, mode.thresholds, p.config.optimizer, options);
    const double adjustment = isotonic_repair(curve);
    if (adjustment > 0) log << "[sweep] isotonic repair, largest adjustment " << fmt(adjustment) << std::endl;
    const std::uint64_t total = curve.total_model_evals();

    std::string csv = "# config_digest=" + digest + " total_model_evals=" + std::to_string(total) + "\n";
    csv += "h,inf_cdf,raw_inf_cdf,model_evals\n";
    json points = json::array();
    for (const auto& pt : curve.points) {
        csv += fmt(pt.threshold) + "," + fmt(pt.inf_cdf) + "," + fmt(pt.raw_inf_cdf) + "," +
               std::to_string(pt.model_evals) + "\n";
        points.push_back({{"h", pt.threshold},
                          {"inf_cdf", pt.inf_cdf},
                          {"raw_inf_cdf", pt.raw_inf_cdf},
                          {"measures", measure_json(p.config, pt.argmin)}});
    }
    const json argmin = {{"config_digest", digest}, {"total_model_evals", total}, {"thresholds", points}};

    const auto csv_path = with_suffix(p.config.output, ".envelope.csv");
    const auto json_path = with_suffix(p.config.output, ".argmin.json");
    write_file(csv_path, csv);
    write_file(json_path, argmin.dump(2) + "\n");
    return {csv_path, json_path};
}

std::vector<std::filesystem::path> run_quantile(const Prepared& p, const QuantileMode& mode,
                                                const std::string& digest, std::ostream& log) {
    auto evaluator = std::make_shared<ModelEvaluator>(p.model);
    ObjectiveSpace space(p.specs, evaluator);
    QuantileOptions options;
    options.resolution = mode.resolution;
    options.max_steps = mode.max_steps;
    options.progress = [&](double h, double value, int step) {
        log << "[quantile] step " << step << " h=" << fmt(h) << " inf_cdf=" << fmt(value)
            << " model_evals=" << evaluator->evaluations() << std::endl;
    };
    const RobustQuantileResult r =
        robust_quantile(space, mode.alpha, {mode.search_lo, mode.search_hi}, p.config.optimizer, options);
    const json out = {{"config_digest", digest},
                      {"total_model_evals", r.model_evals},
                      {"alpha", r.alpha},
                      {"quantile", r.quantile},
                      {"bracket", {r.bracket.first, r.bracket.second}},
                      {"iterations", r.iterations},
                      {"argmin", measure_json(p.config, r.argmin)}};
    const auto path = with_suffix(p.config.output, ".quantile.json");
    write_file(path, out.dump(2) + "\n");
    return {path};
}

}  // namespace

int run_command(const std::filesystem::path& config_path, std::ostream& log) {
    Prepared p;
    try {
        p = prepare(config_path);
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << std::endl;
        return kExitValidation;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << std::endl;
        return kExitValidation;
    }

    const std::string digest = config_digest(p.config);
    const auto start = std::chrono::steady_clock::now();
    const std::string started = utc_timestamp();
    log << "[run] " << p.config.inputs.size() << " inputs, model " << p.model->name() << ", "
        << p.threads << " worker(s)" << std::endl;
    try {
        std::vector<std::filesystem::path> written;
        if (const auto* s = std::get_if<SweepMode>(&p.config.mode)) written = run_sweep(p, *s, digest, log);
        else written = run_quantile(p, std::get<QuantileMode>(p.config.mode), digest, log);

        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        json files = json::array();
        for (const auto& w : written) files.push_back(w.string());
        const json meta = {{"config_digest", digest},
                           {"version", std::string(kVersion)},
                           {"started", started},
                           {"elapsed_seconds", elapsed},
                           {"parallelism", p.threads},
                           {"files", files}};
        write_file(with_suffix(p.config.output, ".meta.json"), meta.dump(2) + "\n");
        for (const auto& w : written) log << "[run] wrote " << w.string() << std::endl;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << std::endl;
        return kExitRuntime;
    }
    return kExitOk;
}

int validate_command(const std::filesystem::path& config_path, std::ostream& out, std::ostream& log) {
    try {
        Prepared p = prepare(config_path);
        out << "ok: " << p.config.inputs.size() << " inputs, model " << p.model->name() << ", config digest "
            << config_digest(p.config) << std::endl;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << std::endl;
        return kExitValidation;
    }
    return kExitOk;
}

}  // namespace canouq
