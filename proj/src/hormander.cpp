#include "msde/hormander.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace msde {

namespace {

constexpr double kDedupTol = 1e-9;

Vec stacked_singular_values(const std::vector<std::pair<std::string, Vec>>& vectors, int d,
                            std::size_t count) {
    if (count == 0) return Vec::Zero(0);
    Mat stacked(d, static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) stacked.col(static_cast<Eigen::Index>(i)) = vectors[i].second;
    Eigen::JacobiSVD<Mat> svd(stacked);
    return svd.singularValues();
}

int rank_at_tol(const Vec& singular_values, double tol) {
    if (singular_values.size() == 0) return 0;
    const double largest = singular_values.maxCoeff();
    if (largest <= 0.0) return 0;
    int rank = 0;
    for (int i = 0; i < singular_values.size(); ++i) {
        if (singular_values[i] > tol * largest) ++rank;
    }
    return rank;
}

}  // namespace

VectorFieldExpr diffusion_field(const SdeModel& model, int column) {
    if (column < 0 || column >= model.m) throw ConfigError("diffusion_field: column out of range");
    VectorFieldExpr field;
    field.dimension = model.d;
    field.word = "s" + std::to_string(column + 1);
    field.jac_fd_levels = model.deriv_mode == DerivMode::FiniteDifference ? 1 : 0;
    field.eval = [model, column](const Vec& x) -> Vec {
        return model.eval_diffusion(x).col(column);
    };
    field.jac_action = [model, column](const Vec& x, const Vec& w) {
        return deriv_apply(model, DerivTarget::DiffusionColumn, column, x, 1, {w});
    };
    return field;
}

VectorFieldExpr stratonovich_drift(const SdeModel& model) {
    VectorFieldExpr field;
    field.dimension = model.d;
    field.word = "s0";
    field.eval_fd_levels = model.deriv_mode == DerivMode::FiniteDifference ? 1 : 0;
    field.jac_fd_levels = model.deriv_mode == DerivMode::FiniteDifference ? 2 : 0;
    field.eval = [model](const Vec& x) {
        Vec out = model.eval_drift(x);
        const Mat sigma = model.eval_diffusion(x);
        for (int i = 0; i < model.m; ++i) {
            out -= 0.5 * deriv_apply(model, DerivTarget::DiffusionColumn, i, x, 1,
                                     {Vec(sigma.col(i))});
        }
        return out;
    };
    field.jac_action = [model](const Vec& x, const Vec& w) {
        Vec out = deriv_apply(model, DerivTarget::Drift, 0, x, 1, {w});
        const Mat sigma = model.eval_diffusion(x);
        for (int i = 0; i < model.m; ++i) {
            const Vec col = sigma.col(i);
            // d/dw [ (d sigma^i) sigma^i ] = D2 sigma^i[sigma^i, w]
            //                              + (d sigma^i)(d sigma^i w)
            out -= 0.5 * deriv_apply(model, DerivTarget::DiffusionColumn, i, x, 2, {col, w});
            const Vec inner = deriv_apply(model, DerivTarget::DiffusionColumn, i, x, 1, {w});
            out -= 0.5 * deriv_apply(model, DerivTarget::DiffusionColumn, i, x, 1, {inner});
        }
        return out;
    };
    return field;
}

VectorFieldExpr lie_bracket(const VectorFieldExpr& v, const VectorFieldExpr& u) {
    if (v.dimension != u.dimension) throw ConfigError("lie_bracket: dimension mismatch");
    VectorFieldExpr out;
    out.dimension = v.dimension;
    out.word = "[" + v.word + "," + u.word + "]";
    out.eval_fd_levels = std::max(v.jac_fd_levels, u.jac_fd_levels);
    out.jac_fd_levels = out.eval_fd_levels + 1;
    auto veval = v.eval, ueval = u.eval;
    auto vjac = v.jac_action, ujac = u.jac_action;
    out.eval = [veval, ueval, vjac, ujac](const Vec& x) -> Vec {
        return ujac(x, veval(x)) - vjac(x, ueval(x));
    };
    auto self_eval = out.eval;
    out.jac_action = [self_eval](const Vec& x, const Vec& w) -> Vec {
        const double scale = w.norm();
        if (scale == 0.0) return Vec::Zero(x.size());
        const Vec unit = w / scale;
        const double h = fd_step(1, x);
        return scale * (self_eval(x + h * unit) - self_eval(x - h * unit)) / (2.0 * h);
    };
    return out;
}

BracketBasis bracket_generate(const SdeModel& model, const Vec& x, int max_depth,
                              std::size_t word_cap) {
    if (max_depth < 0) throw ConfigError("bracket_generate: max_depth must be >= 0");
    BracketBasis basis;
    basis.x = x;

    std::vector<VectorFieldExpr> base;
    base.push_back(stratonovich_drift(model));
    for (int i = 0; i < model.m; ++i) base.push_back(diffusion_field(model, i));

    std::vector<Vec> ortho;  // orthonormal basis of the accepted span
    double sigma_max = 0.0;
    std::vector<int> accepted_depth;
    std::size_t words_evaluated = 0;

    auto try_accept = [&](const std::string& word, const Vec& value, int depth) {
        Vec residual = value;
        for (const Vec& q : ortho) residual -= q.dot(value) * q;
        const double threshold = kDedupTol * std::max({sigma_max, value.norm(), 1e-300});
        if (residual.norm() <= threshold) return false;
        ortho.push_back(residual.normalized());
        basis.vectors.emplace_back(word, value);
        accepted_depth.push_back(depth);
        const Vec sv = stacked_singular_values(basis.vectors, model.d, basis.vectors.size());
        sigma_max = sv.size() > 0 ? sv.maxCoeff() : 0.0;
        return true;
    };

    auto note_nesting = [&basis](const VectorFieldExpr& field) {
        basis.max_fd_nesting = std::max(basis.max_fd_nesting, field.eval_fd_levels);
    };

    std::vector<VectorFieldExpr> level;
    for (int i = 0; i < model.m; ++i) {
        const VectorFieldExpr& field = base[i + 1];
        ++words_evaluated;
        note_nesting(field);
        if (try_accept(field.word, field.eval(x), 0)) level.push_back(field);
    }
    basis.rank_by_depth.push_back(static_cast<int>(ortho.size()));
    basis.depth = 0;

    for (int depth = 1; depth <= max_depth; ++depth) {
        if (static_cast<int>(ortho.size()) >= model.d || level.empty()) break;
        if (words_evaluated + level.size() * base.size() > word_cap) {
            basis.budget_exceeded = true;
            break;
        }
        std::vector<VectorFieldExpr> next_level;
        for (const VectorFieldExpr& prev : level) {
            for (const VectorFieldExpr& gen : base) {
                VectorFieldExpr bracket = lie_bracket(gen, prev);
                ++words_evaluated;
                note_nesting(bracket);
                if (try_accept(bracket.word, bracket.eval(x), depth)) {
                    next_level.push_back(std::move(bracket));
                }
                if (static_cast<int>(ortho.size()) >= model.d) break;
            }
            if (static_cast<int>(ortho.size()) >= model.d) break;
        }
        basis.depth = depth;
        basis.rank_by_depth.push_back(static_cast<int>(ortho.size()));
        level = std::move(next_level);
    }

    basis.singular_values = stacked_singular_values(basis.vectors, model.d, basis.vectors.size());
    basis.rank = static_cast<int>(ortho.size());
    if (basis.max_fd_nesting > 0) {
        constexpr double eps = std::numeric_limits<double>::epsilon();
        const double order = std::max(0.0, 2.0 - (basis.max_fd_nesting - 1)) / 3.0;
        basis.fd_error_estimate = std::pow(eps, order);
    }
    return basis;
}

HormanderResult hormander_rank(const SdeModel& model, const Vec& x, int max_depth, double tol) {
    const BracketBasis basis = bracket_generate(model, x, max_depth);
    HormanderResult result;
    result.budget_exceeded = basis.budget_exceeded;
    result.max_fd_nesting = basis.max_fd_nesting;
    result.fd_error_estimate = basis.fd_error_estimate;

    // every accepted vector advances the span by one, so the accepted count
    // recorded per depth is also the prefix length of basis.vectors
    int depth_full = -1;
    for (std::size_t depth = 0; depth < basis.rank_by_depth.size(); ++depth) {
        const auto prefix = static_cast<std::size_t>(basis.rank_by_depth[depth]);
        const Vec sv = stacked_singular_values(basis.vectors, model.d, prefix);
        const int rank = rank_at_tol(sv, tol);
        result.rank_by_depth.push_back(rank);
        if (rank >= model.d && depth_full < 0) depth_full = static_cast<int>(depth);
    }
    result.rank = result.rank_by_depth.empty() ? 0 : result.rank_by_depth.back();
    result.satisfied = result.rank >= model.d;
    result.depth_at_full_rank = depth_full;
    return result;
}

}  // namespace msde
