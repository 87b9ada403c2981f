#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "msde/hyperdual.hpp"
#include "msde/types.hpp"

namespace msde {

enum class DerivMode { Analytic, ForwardAD, FiniteDifference };

enum class DerivTarget { Drift, DiffusionColumn };

/// Directional-derivative callback: the order-k derivative tensor of a vector
/// field at x, contracted against the given direction vectors.
using DirDerivFn = std::function<Vec(const Vec&, const std::vector<Vec>&)>;

/// Field evaluator lifted to the hyperdual algebra (used for forward AD).
using GenericFieldFn = std::function<HDVector(const HDVector&)>;

/// Coefficients of dX = b(X) dt + sigma(X) dW plus derivative oracles and the
/// declared assumption constants. Evaluation is pure: a model value can be
/// shared read-only across any number of workers.
struct SdeModel {
    int d = 1;
    int m = 1;
    std::string name = "custom";

    std::function<Vec(const Vec&)> drift;
    std::function<Mat(const Vec&)> diffusion;

    DerivMode deriv_mode = DerivMode::FiniteDifference;

    // Analytic directional derivatives, wired per order when available.
    // drift_deriv[k-1] is the order-k callback (k = 1..3);
    // diffusion_deriv[k-1][i] differentiates diffusion column i (k = 1..2).
    std::array<DirDerivFn, 3> drift_deriv{};
    std::array<std::vector<DirDerivFn>, 2> diffusion_deriv{};

    // Hyperdual evaluators for forward-AD mode.
    GenericFieldFn drift_generic;
    std::vector<GenericFieldFn> diffusion_column_generic;

    // Declared assumption constants (monotonicity L, polynomial growth L1 and
    // exponent N, Jacobian lower bound L3). N >= 1 always.
    double constant_L = 0.0;
    double constant_L1 = 0.0;
    double exponent_N = 1.0;
    double constant_L3 = 0.0;
    bool globally_lipschitz = false;

    Vec eval_drift(const Vec& x) const;
    Mat eval_diffusion(const Vec& x) const;
};

/// Order-k directional derivative of the drift or of one diffusion column,
/// contracted against `directions` (size k). Dispatches on model.deriv_mode;
/// analytic mode falls back to finite differences for orders that were not
/// wired. k <= 3 for the drift, k <= 2 for diffusion columns.
Vec deriv_apply(const SdeModel& model, DerivTarget target, int column, const Vec& x, int order,
                const std::vector<Vec>& directions);

/// Jacobian of the drift at x (columns = derivative along basis vectors).
Mat drift_jacobian(const SdeModel& model, const Vec& x);

/// Jacobian of diffusion column i at x.
Mat diffusion_column_jacobian(const SdeModel& model, int column, const Vec& x);

/// Axis-aligned sampling box for assumption validation.
struct SamplingBox {
    Vec lo;
    Vec hi;
};

struct AssumptionReport {
    double constant_L = 0.0;   // smallest sampled monotonicity constant
    double constant_L1 = 0.0;  // smallest sampled growth constant at exponent_N
    double exponent_N = 1.0;
    double constant_L3 = 0.0;  // smallest sampled Jacobian lower-bound constant
    double growth_C = 0.0;     // empirical sup of |b|^2 / (1 + |x|^{2N})
    int sample_count = 0;
    double max_violation = 0.0;  // excess of sampled constants over declared ones; <= 0 passes
    bool monotone_pass = true;
    bool growth_pass = true;
    bool jacobian_pass = true;
    SamplingBox box;
};

/// Sample pairs in `box` and estimate the smallest constants satisfying the
/// monotonicity, polynomial-growth and Jacobian lower-bound assumptions.
/// The growth exponent is taken from the model declaration (the smallest
/// (L1, N) pair is not identifiable from samples on a bounded box).
AssumptionReport validate_assumptions(const SdeModel& model, const SamplingBox& box,
                                      int n_samples, std::uint64_t rng_seed);

/// Central finite-difference step sizes used by the fallback oracle
/// (truncation / round-off balance per order).
double fd_step(int order, const Vec& x);

}  // namespace msde
