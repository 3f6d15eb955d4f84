#include "canouq/config.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "canouq/external_model.hpp"
#include "canouq/models.hpp"
#include "canouq/parallel.hpp"

namespace canouq {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!keys.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

const json& require(const json& obj, const std::string& where, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(where + ": missing key '" + key + "'");
    return *it;
}

const json& object_at(const json& obj, const std::string& where, const char* key) {
    const json& v = require(obj, where, key);
    if (!v.is_object()) throw ConfigError(where + "." + key + ": expected an object");
    return v;
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where + ": expected a finite number");
    return x;
}

std::uint64_t unsigned_integer(const json& v, const std::string& where) {
    const bool ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    if (!ok) throw ConfigError(where + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
}

bool boolean(const json& v, const std::string& where) {
    if (!v.is_boolean()) throw ConfigError(where + ": expected true or false");
    return v.get<bool>();
}

std::pair<double, double> pair_of(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2) throw ConfigError(where + ": expected [lo, hi]");
    return {number(v[0], where + "[0]"), number(v[1], where + "[1]")};
}

InputConfig parse_input(const json& v, std::size_t index) {
    std::string where = "inputs[" + std::to_string(index) + "]";
    if (!v.is_object()) throw ConfigError(where + ": expected an object");
    reject_unknown(v, where, {"name", "bounds", "moments"});
    InputConfig in;
    const json& name = require(v, where, "name");
    if (!name.is_string() || name.get<std::string>().empty())
        throw ConfigError(where + ".name: expected a non-empty string");
    in.name = name.get<std::string>();
    where = "input '" + in.name + "'";
    std::tie(in.lower, in.upper) = pair_of(require(v, where, "bounds"), where + ".bounds");
    if (!(in.lower < in.upper)) throw ConfigError(where + ".bounds: requires lower < upper");

    const json& m = require(v, where, "moments");
    if (!m.is_array() || m.empty()) throw ConfigError(where + ".moments: expected a non-empty list");
    if (m[0].is_array()) {
        IntervalMoments im;
        for (std::size_t j = 0; j < m.size(); ++j) {
            const auto [lo, hi] = pair_of(m[j], where + ".moments[" + std::to_string(j) + "]");
            im.lowers.push_back(lo);
            im.uppers.push_back(hi);
        }
        in.moments = std::move(im);
    } else {
        EqualityMoments em;
        for (std::size_t j = 0; j < m.size(); ++j)
            em.values.push_back(number(m[j], where + ".moments[" + std::to_string(j) + "]"));
        in.moments = std::move(em);
    }
    return in;
}

ModelConfig parse_model(const json& v) {
    reject_unknown(v, "model", {"builtin", "scales", "command", "concurrent"});
    ModelConfig mc;
    const bool has_builtin = v.contains("builtin");
    const bool has_command = v.contains("command");
    if (has_builtin == has_command) throw ConfigError("model: exactly one of 'builtin' or 'command' is required");
    if (has_builtin) {
        if (v.contains("concurrent")) throw ConfigError("model: 'concurrent' applies to commands only");
        const json& b = v["builtin"];
        if (!b.is_string()) throw ConfigError("model.builtin: expected a string");
        mc.builtin = b.get<std::string>();
        if (mc.builtin != "hydraulic" && mc.builtin != "identity" && mc.builtin != "sum")
            throw ConfigError("model.builtin: unknown model '" + mc.builtin + "'");
        if (v.contains("scales")) {
            if (mc.builtin != "sum") throw ConfigError("model.scales: applies to the sum model only");
            const json& s = v["scales"];
            if (!s.is_array()) throw ConfigError("model.scales: expected a list");
            for (std::size_t i = 0; i < s.size(); ++i)
                mc.scales.push_back(number(s[i], "model.scales[" + std::to_string(i) + "]"));
        }
    } else {
        if (v.contains("scales")) throw ConfigError("model.scales: applies to the sum model only");
        const json& c = v["command"];
        if (!c.is_array() || c.empty()) throw ConfigError("model.command: expected a non-empty argv list");
        for (const auto& a : c) {
            if (!a.is_string()) throw ConfigError("model.command: arguments must be strings");
            mc.command.push_back(a.get<std::string>());
        }
        if (v.contains("concurrent")) mc.concurrent = boolean(v["concurrent"], "model.concurrent");
    }
    return mc;
}

SweepMode parse_sweep(const json& v) {
    if (!v.is_object()) throw ConfigError("mode.sweep: expected an object");
    reject_unknown(v, "mode.sweep", {"thresholds", "lo", "hi", "count"});
    SweepMode sm;
    if (v.contains("thresholds")) {
        if (v.contains("lo") || v.contains("hi") || v.contains("count"))
            throw ConfigError("mode.sweep: give either 'thresholds' or 'lo'/'hi'/'count'");
        const json& t = v["thresholds"];
        if (!t.is_array() || t.empty()) throw ConfigError("mode.sweep.thresholds: expected a non-empty list");
        for (std::size_t i = 0; i < t.size(); ++i)
            sm.thresholds.push_back(number(t[i], "mode.sweep.thresholds[" + std::to_string(i) + "]"));
    } else {
        const double lo = number(require(v, "mode.sweep", "lo"), "mode.sweep.lo");
        const double hi = number(require(v, "mode.sweep", "hi"), "mode.sweep.hi");
        const std::uint64_t count = unsigned_integer(require(v, "mode.sweep", "count"), "mode.sweep.count");
        if (count == 0) throw ConfigError("mode.sweep.count: must be positive");
        if (count > 1 && !(lo < hi)) throw ConfigError("mode.sweep: requires lo < hi");
        for (std::uint64_t k = 0; k < count; ++k)
            sm.thresholds.push_back(count == 1 ? lo
                                               : lo + (hi - lo) * static_cast<double>(k) /
                                                          static_cast<double>(count - 1));
    }
    for (std::size_t i = 1; i < sm.thresholds.size(); ++i)
        if (!(sm.thresholds[i - 1] < sm.thresholds[i]))
            throw ConfigError("mode.sweep: thresholds must be strictly increasing");
    return sm;
}

QuantileMode parse_quantile(const json& v) {
    if (!v.is_object()) throw ConfigError("mode.quantile: expected an object");
    reject_unknown(v, "mode.quantile", {"alpha", "search", "resolution", "max_steps"});
    QuantileMode qm;
    qm.alpha = number(require(v, "mode.quantile", "alpha"), "mode.quantile.alpha");
    if (!(qm.alpha > 0 && qm.alpha < 1)) throw ConfigError("mode.quantile.alpha: must lie in (0, 1)");
    std::tie(qm.search_lo, qm.search_hi) = pair_of(require(v, "mode.quantile", "search"), "mode.quantile.search");
    if (!(qm.search_lo < qm.search_hi)) throw ConfigError("mode.quantile.search: requires lo < hi");
    if (v.contains("resolution")) {
        qm.resolution = number(v["resolution"], "mode.quantile.resolution");
        if (!(qm.resolution > 0)) throw ConfigError("mode.quantile.resolution: must be positive");
    }
    if (v.contains("max_steps")) {
        const auto steps = unsigned_integer(v["max_steps"], "mode.quantile.max_steps");
        if (steps == 0 || steps > 200) throw ConfigError("mode.quantile.max_steps: must lie in [1, 200]");
        qm.max_steps = static_cast<int>(steps);
    }
    return qm;
}

OptimizerConfig parse_optimizer(const json& v) {
    reject_unknown(v, "optimizer",
                   {"strategy", "population", "max_iterations", "de_weight", "de_crossover",
                    "target_tolerance", "stall_generations", "parallel_evaluations"});
    OptimizerConfig oc;
    oc.parallel_evaluations = true;
    if (v.contains("strategy")) {
        const json& s = v["strategy"];
        const std::string name = s.is_string() ? s.get<std::string>() : "";
        if (name == "differential_evolution") oc.strategy = Strategy::differential_evolution;
        else if (name == "simulated_annealing") oc.strategy = Strategy::simulated_annealing;
        else throw ConfigError("optimizer.strategy: expected 'differential_evolution' or 'simulated_annealing'");
    }
    if (v.contains("population"))
        oc.population = static_cast<std::size_t>(unsigned_integer(v["population"], "optimizer.population"));
    if (v.contains("max_iterations"))
        oc.max_iterations = static_cast<int>(unsigned_integer(v["max_iterations"], "optimizer.max_iterations"));
    if (v.contains("de_weight")) oc.de_weight = number(v["de_weight"], "optimizer.de_weight");
    if (v.contains("de_crossover")) oc.de_crossover = number(v["de_crossover"], "optimizer.de_crossover");
    if (v.contains("target_tolerance"))
        oc.target_tolerance = number(v["target_tolerance"], "optimizer.target_tolerance");
    if (v.contains("stall_generations"))
        oc.stall_generations =
            static_cast<int>(unsigned_integer(v["stall_generations"], "optimizer.stall_generations"));
    if (v.contains("parallel_evaluations"))
        oc.parallel_evaluations = boolean(v["parallel_evaluations"], "optimizer.parallel_evaluations");
    try {
        oc.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("optimizer: ") + e.what());
    }
    return oc;
}

std::optional<std::size_t> env_parallelism() {
    const char* raw = std::getenv("CANOUQ_PARALLELISM");
    if (!raw || !*raw) return std::nullopt;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(raw, &end, 10);
    if (*end != '\0' || v == 0) throw ConfigError("CANOUQ_PARALLELISM: expected a positive integer");
    return static_cast<std::size_t>(v);
}

}  // namespace

ProblemConfig parse_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    reject_unknown(doc, "config", {"inputs", "model", "mode", "optimizer", "seed", "parallelism", "output"});
    ProblemConfig cfg;
    cfg.document = doc;

    const json& inputs = require(doc, "config", "inputs");
    if (!inputs.is_array() || inputs.empty()) throw ConfigError("inputs: expected a non-empty list");
    std::set<std::string> names;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        cfg.inputs.push_back(parse_input(inputs[i], i));
        if (!names.insert(cfg.inputs.back().name).second)
            throw ConfigError("inputs: duplicate name '" + cfg.inputs.back().name + "'");
    }

    cfg.model = parse_model(object_at(doc, "config", "model"));

    const json& mode = object_at(doc, "config", "mode");
    reject_unknown(mode, "mode", {"sweep", "quantile"});
    if (mode.size() != 1) throw ConfigError("mode: exactly one of 'sweep' or 'quantile' is required");
    if (mode.contains("sweep")) cfg.mode = parse_sweep(mode["sweep"]);
    else cfg.mode = parse_quantile(mode["quantile"]);

    if (doc.contains("optimizer")) {
        if (!doc["optimizer"].is_object()) throw ConfigError("optimizer: expected an object");
        cfg.optimizer = parse_optimizer(doc["optimizer"]);
    } else {
        cfg.optimizer = parse_optimizer(json::object());
    }
    if (doc.contains("seed")) cfg.seed = unsigned_integer(doc["seed"], "seed");
    cfg.optimizer.seed = cfg.seed;
    if (doc.contains("parallelism")) {
        cfg.parallelism = static_cast<std::size_t>(unsigned_integer(doc["parallelism"], "parallelism"));
        if (cfg.parallelism == 0) throw ConfigError("parallelism: must be positive");
    }

    const json& out = require(doc, "config", "output");
    if (!out.is_string() || out.get<std::string>().empty())
        throw ConfigError("output: expected a non-empty path prefix");
    cfg.output = out.get<std::string>();
    return cfg;
}

ProblemConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path.string() + "': " + e.what());
    }
    return parse_config(doc);
}

std::vector<MomentSpec> build_specs(const ProblemConfig& config) {
    std::vector<MomentSpec> specs;
    for (const auto& in : config.inputs) {
        try {
            std::visit([&](const auto& m) { specs.emplace_back(in.lower, in.upper, m); }, in.moments);
        } catch (const Error& e) {
            throw ConfigError("input '" + in.name + "': " + e.what());
        }
    }
    return specs;
}

std::shared_ptr<const ModelFunction> build_model(const ProblemConfig& config, std::size_t threads) {
    const std::size_t dim = config.inputs.size();
    std::shared_ptr<const ModelFunction> model;
    if (!config.model.command.empty()) {
        model = std::make_shared<ExternalCommandModel>(config.model.command, dim, config.model.concurrent, threads);
    } else if (config.model.builtin == "hydraulic") {
        model = std::make_shared<models::HydraulicModel>();
    } else if (config.model.builtin == "identity") {
        model = std::make_shared<models::IdentityModel>();
    } else {
        std::vector<double> scales = config.model.scales;
        if (scales.empty()) scales.assign(dim, 1.0);
        model = std::make_shared<models::SumModel>(std::move(scales));
    }
    if (model->dimension() != dim)
        throw ConfigError("model '" + model->name() + "' takes " + std::to_string(model->dimension()) +
                          " inputs but " + std::to_string(dim) + " are configured");
    return model;
}

std::size_t effective_parallelism(const ProblemConfig& config) {
    if (!config.model.command.empty() && !config.model.concurrent) return 1;
    if (auto env = env_parallelism()) return *env;
    if (config.parallelism > 0) return config.parallelism;
    return default_thread_count();
}

std::string config_digest(const ProblemConfig& config) {
    const std::string text = config.document.dump();
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

}  // namespace canouq
