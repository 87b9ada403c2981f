#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "msde/model.hpp"
#include "msde/paths.hpp"

namespace msde {

enum class Scheme { Implicit, Tamed, Explicit };

const char* scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

/// Solution trajectory on a grid. State k lives in row k of `states`.
struct StatePath {
    TimeGrid grid;
    Mat states;  // (n_steps+1) x d
    Scheme scheme = Scheme::Implicit;
    std::uint64_t source_stream = 0;

    Vec state(int k) const { return states.row(k).transpose(); }
    int dim() const { return static_cast<int>(states.cols()); }
};

/// One drift-implicit Euler step: solves x' = x + b(x') dt + sigma(x) dW by
/// Newton iteration on G(z) = z - x - b(z) dt - sigma(x) dW. Requires
/// dt * L < 1 so the implicit equation has a unique root.
Vec implicit_step(const SdeModel& model, const Vec& x, double dt, const Vec& dW);

/// Integrate dX = b dt + sigma dW along the given Brownian path.
/// The explicit scheme is only allowed for models flagged globally Lipschitz;
/// the tamed scheme uses the drift increment b dt / (1 + dt |b|).
StatePath solve_sde(const SdeModel& model, const Vec& x0, const BrownianPath& path, Scheme scheme);

/// Node-wise coefficients B(t_k) = grad b(X(t_k)) and
/// Sigma^i(t_k) = grad sigma^i(X(t_k)) along a trajectory. Shared (read-only)
/// by every linear solve on the same path.
struct LinearFieldData {
    std::vector<Mat> B;                  // n+1 matrices, d x d
    std::vector<std::vector<Mat>> Sigma; // n+1 entries of m matrices, d x d
};

LinearFieldData linearize_along(const SdeModel& model, const StatePath& xpath);

/// Coefficients of the generic linear SDE
///   Y(t) = alpha + int_r^t (U + B Y) du + sum_i int_r^t (V^i + Sigma^i Y) dW^i.
/// U rows / V entries may be left empty for zero forcing.
struct LinearSdeCoefficients {
    int start_index = 0;  // r
    Vec alpha;
    Mat U;                // (n+1) x d, or 0 x 0 for zero forcing
    std::vector<Mat> V;   // n+1 of d x m, or empty for zero forcing
    std::shared_ptr<const LinearFieldData> fields;
};

/// Explicit Euler-Maruyama recursion for the linear SDE; Y vanishes before
/// the start index.
StatePath solve_linear_sde(const LinearSdeCoefficients& coeffs, const BrownianPath& path);

/// Strong-convergence regression against a fine-grid oracle driven by the
/// same Brownian paths (increments aggregated onto the coarse grids).
struct StrongErrorTable {
    std::vector<int> resolutions;
    std::vector<double> dt;
    std::vector<double> rms_error;  // at T, over paths
    double slope = 0.0;             // fitted log-log slope vs dt
    double r_squared = 0.0;
    int oracle_steps = 0;
};

StrongErrorTable strong_error_table(const SdeModel& model, const Vec& x0, double T,
                                    const std::vector<int>& resolutions, int n_paths,
                                    std::uint64_t seed, Scheme scheme, int oracle_factor = 4,
                                    int workers = 1);

/// Least-squares line fit of y against x; returns slope, intercept, R^2.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace msde
