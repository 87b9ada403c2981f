#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "msde/model.hpp"

namespace msde {

/// Point-evaluable vector field with a directional Jacobian action, closed
/// under Lie bracketing. `word` records how the field was built,
/// e.g. "[s1,[s0,s1]]".
struct VectorFieldExpr {
    int dimension = 0;
    std::function<Vec(const Vec&)> eval;
    std::function<Vec(const Vec&, const Vec&)> jac_action;  // x, w -> dV(x) w
    std::string word;
    int eval_fd_levels = 0;  // nested finite-difference levels in eval
    int jac_fd_levels = 0;   // and in jac_action
};

/// Diffusion column j as a vector field (word "s<j>", 1-based).
VectorFieldExpr diffusion_field(const SdeModel& model, int column);

/// Stratonovich-corrected drift sigma^0 = b - 1/2 sum_i (d sigma^i) sigma^i.
VectorFieldExpr stratonovich_drift(const SdeModel& model);

/// [V, U](x) = dU(x) V(x) - dV(x) U(x). The bracket's own Jacobian action is
/// a central finite difference of its evaluator (outermost level beyond the
/// available analytic order).
VectorFieldExpr lie_bracket(const VectorFieldExpr& v, const VectorFieldExpr& u);

struct BracketBasis {
    Vec x;
    int depth = 0;
    std::vector<std::pair<std::string, Vec>> vectors;  // deduplicated, in generation order
    int rank = 0;
    Vec singular_values;
    bool budget_exceeded = false;
    std::vector<int> rank_by_depth;
    int max_fd_nesting = 0;         // deepest FD nesting among evaluated words
    double fd_error_estimate = 0.0; // rough relative error of those values
};

/// Evaluate the bracket recursion Sigma_0 = {s^1..s^m},
/// Sigma_k = {[s^j, V] : j = 0..m, V in Sigma_{k-1}} at x, pruning vectors
/// whose component orthogonal to the current span falls below the relative
/// dedup tolerance. Stops early at full rank or at the word cap.
BracketBasis bracket_generate(const SdeModel& model, const Vec& x, int max_depth,
                              std::size_t word_cap = 10000);

struct HormanderResult {
    bool satisfied = false;
    int rank = 0;
    int depth_at_full_rank = -1;
    std::vector<int> rank_by_depth;
    bool budget_exceeded = false;
    int max_fd_nesting = 0;
    double fd_error_estimate = 0.0;
};

/// Numerical rank test for the Hormander hypothesis at x: satisfied when the
/// singular values above tol * largest span R^d by max_depth.
HormanderResult hormander_rank(const SdeModel& model, const Vec& x, int max_depth, double tol);

}  // namespace msde
