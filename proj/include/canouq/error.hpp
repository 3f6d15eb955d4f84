#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace canouq {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonFiniteInput : public Error {
public:
    explicit NonFiniteInput(const std::string& what) : Error("non-finite input: " + what) {}
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A prefix of a moment sequence is not attainable by any probability
/// measure on the interval. `order` is the first offending moment order (1-based).
class OutsideMomentSpace : public Error {
public:
    OutsideMomentSpace(std::size_t order, const std::string& detail);
    std::size_t order() const noexcept { return order_; }

private:
    std::size_t order_;
};

class InsufficientZetas : public Error {
public:
    InsufficientZetas(std::size_t have, std::size_t need);
};

/// Two support points coincide; the canonical vector is too close to the boundary.
class DegenerateCluster : public Error {
public:
    using Error::Error;
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

class NegativeWeight : public Error {
public:
    NegativeWeight(std::size_t index, double value);
    std::size_t index() const noexcept { return index_; }
    double value() const noexcept { return value_; }

private:
    std::size_t index_;
    double value_;
};

/// A raw moment supplied in inequality mode lies outside its box.
class BoxViolation : public Error {
public:
    BoxViolation(std::size_t input, std::size_t order, double value, double lo, double hi);
};

class ModelEvaluationFailure : public Error {
public:
    ModelEvaluationFailure(std::vector<double> point, const std::string& reason);
    const std::vector<double>& point() const noexcept { return point_; }

private:
    std::vector<double> point_;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class BracketFailure : public Error {
public:
    using Error::Error;
};

class OptimizerError : public Error {
public:
    using Error::Error;
};

/// Formats a point as "(x1, x2, ...)" with round-trip precision.
std::string format_point(const std::vector<double>& point);

}  // namespace canouq
