#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace msde {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Evaluating a model coefficient produced a non-finite value.
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// A single integrator step failed (e.g. Newton did not converge).
class StepError : public std::runtime_error {
public:
    explicit StepError(const std::string& what) : std::runtime_error(what) {}
};

/// A trajectory left the representable range; carries the offending step.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, int step)
        : std::runtime_error(what + " at step " + std::to_string(step)), step_index(step) {}
    int step_index;
};

/// Invalid experiment configuration (bad key, bad value, step constraint).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Two objects that must share a time grid do not.
class GridMismatchError : public std::runtime_error {
public:
    explicit GridMismatchError(const std::string& what) : std::runtime_error(what) {}
};

/// A combinatorial or memory budget was exceeded.
class BudgetError : public std::runtime_error {
public:
    explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

inline void require_finite(const Vec& v, const char* what) {
    if (!v.allFinite()) throw ModelError(std::string(what) + ": non-finite value");
}

inline void require_finite(const Mat& v, const char* what) {
    if (!v.allFinite()) throw ModelError(std::string(what) + ": non-finite value");
}

}  // namespace msde
