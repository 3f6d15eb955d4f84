#include "canouq/error.hpp"

#include <charconv>
#include <utility>

namespace canouq {

namespace {

std::string to_string_exact(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string format_point(const std::vector<double>& point) {
    std::string out = "(";
    for (std::size_t i = 0; i < point.size(); ++i) {
        if (i) out += ", ";
        out += to_string_exact(point[i]);
    }
    out += ")";
    return out;
}

OutsideMomentSpace::OutsideMomentSpace(std::size_t order, const std::string& detail)
    : Error("OutsideMomentSpace: moment sequence invalid at order " + std::to_string(order) +
            (detail.empty() ? "" : " (" + detail + ")")),
      order_(order) {}

InsufficientZetas::InsufficientZetas(std::size_t have, std::size_t need)
    : Error("InsufficientZetas: have " + std::to_string(have) + " recursion coefficients, need " +
            std::to_string(need)) {}

NegativeWeight::NegativeWeight(std::size_t index, double value)
    : Error("NegativeWeight: weight " + std::to_string(index) + " = " + to_string_exact(value)),
      index_(index),
      value_(value) {}

BoxViolation::BoxViolation(std::size_t input, std::size_t order, double value, double lo, double hi)
    : Error("BoxViolation: input " + std::to_string(input) + " moment of order " +
            std::to_string(order) + " = " + to_string_exact(value) + " outside [" +
            to_string_exact(lo) + ", " + to_string_exact(hi) + "]") {}

ModelEvaluationFailure::ModelEvaluationFailure(std::vector<double> point, const std::string& reason)
    : Error("ModelEvaluationFailure at " + format_point(point) + ": " + reason),
      point_(std::move(point)) {}

}  // namespace canouq
