#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "canouq/error.hpp"
#include "canouq/global_opt.hpp"
#include "canouq/model.hpp"
#include "canouq/moment_core.hpp"
#include "json.hpp"

namespace canouq {

/// Schema or semantic error in a problem configuration (exit code 1).
class ConfigError : public Error {
public:
    using Error::Error;
};

struct InputConfig {
    std::string name;
    double lower = 0;
    double upper = 1;
    std::variant<EqualityMoments, IntervalMoments> moments;
};

struct ModelConfig {
    std::string builtin;               ///< "hydraulic", "identity" or "sum"
    std::vector<double> scales;        ///< sum model only; defaults to all ones
    std::vector<std::string> command;  ///< external command argv
    bool concurrent = false;           ///< external command may run as several processes
};

struct SweepMode {
    std::vector<double> thresholds;
};

struct QuantileMode {
    double alpha = 0.5;
    double search_lo = 0;
    double search_hi = 1;
    double resolution = 0;
    int max_steps = 20;
};

/// Parsed and schema-checked problem description.
struct ProblemConfig {
    std::vector<InputConfig> inputs;
    ModelConfig model;
    std::variant<SweepMode, QuantileMode> mode;
    OptimizerConfig optimizer;
    std::uint64_t seed = 0;
    std::size_t parallelism = 0;  ///< 0 = not set
    std::string output;
    nlohmann::json document;  ///< normalized source document, used for the digest
};

ProblemConfig parse_config(const nlohmann::json& doc);
ProblemConfig load_config(const std::filesystem::path& path);

/// Builds one MomentSpec per input. Moment-space errors are reported as
/// ConfigError naming the input.
std::vector<MomentSpec> build_specs(const ProblemConfig& config);

/// Instantiates the configured model; `threads` sizes the process pool of
/// concurrent external commands.
std::shared_ptr<const ModelFunction> build_model(const ProblemConfig& config, std::size_t threads);

/// Worker count: environment override CANOUQ_PARALLELISM, else the config
/// value, else the number of processors. External commands run serially unless
/// declared concurrent.
std::size_t effective_parallelism(const ProblemConfig& config);

/// Hex SHA-256 of the normalized configuration document.
std::string config_digest(const ProblemConfig& config);

}  // namespace canouq
