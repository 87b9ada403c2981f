#include "msde/model.hpp"

#include <cmath>
#include <limits>

#include "msde/rng.hpp"

namespace msde {

namespace {

std::string fmt_point(const Vec& x) {
    std::string s = "(";
    for (int i = 0; i < x.size(); ++i) {
        s += std::to_string(x[i]);
        if (i + 1 < x.size()) s += ", ";
    }
    return s + ")";
}

Vec eval_target(const SdeModel& model, DerivTarget target, int column, const Vec& x) {
    if (target == DerivTarget::Drift) return model.eval_drift(x);
    return model.eval_diffusion(x).col(column);
}

Vec fd_order1(const SdeModel& model, DerivTarget target, int column, const Vec& x, const Vec& v) {
    const double scale = v.norm();
    if (scale == 0.0) return Vec::Zero(model.d);
    const Vec u = v / scale;
    const double h = fd_step(1, x);
    const Vec fp = eval_target(model, target, column, x + h * u);
    const Vec fm = eval_target(model, target, column, x - h * u);
    return scale * (fp - fm) / (2.0 * h);
}

Vec fd_order2(const SdeModel& model, DerivTarget target, int column, const Vec& x, const Vec& v1,
              const Vec& v2) {
    const double s1 = v1.norm(), s2 = v2.norm();
    if (s1 == 0.0 || s2 == 0.0) return Vec::Zero(model.d);
    const Vec u1 = v1 / s1, u2 = v2 / s2;
    const double h = fd_step(2, x);
    const Vec fpp = eval_target(model, target, column, x + h * u1 + h * u2);
    const Vec fpm = eval_target(model, target, column, x + h * u1 - h * u2);
    const Vec fmp = eval_target(model, target, column, x - h * u1 + h * u2);
    const Vec fmm = eval_target(model, target, column, x - h * u1 - h * u2);
    return s1 * s2 * (fpp - fpm - fmp + fmm) / (4.0 * h * h);
}

// Order-2 derivative preferring the analytic callback when wired.
Vec order2_best(const SdeModel& model, DerivTarget target, int column, const Vec& x, const Vec& v1,
                const Vec& v2) {
    const DirDerivFn* fn = nullptr;
    if (model.deriv_mode == DerivMode::Analytic) {
        if (target == DerivTarget::Drift) {
            if (model.drift_deriv[1]) fn = &model.drift_deriv[1];
        } else if (static_cast<int>(model.diffusion_deriv[1].size()) > column &&
                   model.diffusion_deriv[1][column]) {
            fn = &model.diffusion_deriv[1][column];
        }
    }
    if (fn) return (*fn)(x, {v1, v2});
    return fd_order2(model, target, column, x, v1, v2);
}

Vec fd_order3(const SdeModel& model, DerivTarget target, int column, const Vec& x, const Vec& v1,
              const Vec& v2, const Vec& v3) {
    const double s3 = v3.norm();
    if (s3 == 0.0) return Vec::Zero(model.d);
    const Vec u3 = v3 / s3;
    const double h = fd_step(3, x);
    const Vec dp = order2_best(model, target, column, x + h * u3, v1, v2);
    const Vec dm = order2_best(model, target, column, x - h * u3, v1, v2);
    return s3 * (dp - dm) / (2.0 * h);
}

Vec forward_ad(const SdeModel& model, DerivTarget target, int column, const Vec& x, int order,
               const std::vector<Vec>& dirs) {
    const GenericFieldFn* fn = nullptr;
    if (target == DerivTarget::Drift) {
        fn = model.drift_generic ? &model.drift_generic : nullptr;
    } else if (static_cast<int>(model.diffusion_column_generic.size()) > column &&
               model.diffusion_column_generic[column]) {
        fn = &model.diffusion_column_generic[column];
    }
    if (!fn) throw ModelError("forward-AD requested but no hyperdual evaluator is wired");
    HDVector hx(model.d);
    for (int i = 0; i < model.d; ++i) {
        hx[i] = HyperDual(x[i]);
        for (int k = 0; k < order; ++k) hx[i].comp[1 << k] = dirs[k][i];
    }
    const HDVector out = (*fn)(hx);
    const int mask = (1 << order) - 1;
    Vec result(model.d);
    for (int i = 0; i < model.d; ++i) result[i] = out[i].comp[mask];
    return result;
}

}  // namespace

Vec SdeModel::eval_drift(const Vec& x) const {
    if (!x.allFinite()) throw ModelError("eval_drift: non-finite input " + fmt_point(x));
    Vec b = drift(x);
    if (b.size() != d) throw ModelError("eval_drift: output dimension != d");
    if (!b.allFinite()) throw ModelError("eval_drift: non-finite output at x = " + fmt_point(x));
    return b;
}

Mat SdeModel::eval_diffusion(const Vec& x) const {
    if (!x.allFinite()) throw ModelError("eval_diffusion: non-finite input " + fmt_point(x));
    Mat s = diffusion(x);
    if (s.rows() != d || s.cols() != m) {
        throw ModelError("eval_diffusion: output shape is not d x m");
    }
    if (!s.allFinite()) {
        throw ModelError("eval_diffusion: non-finite output at x = " + fmt_point(x));
    }
    return s;
}

double fd_step(int order, const Vec& x) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double scale = 1.0 + x.norm();
    switch (order) {
        case 1: return std::cbrt(eps) * scale;
        case 2: return std::pow(eps, 0.25) * scale;
        default: return std::pow(eps, 0.2) * scale;
    }
}

Vec deriv_apply(const SdeModel& model, DerivTarget target, int column, const Vec& x, int order,
                const std::vector<Vec>& directions) {
    const int max_order = target == DerivTarget::Drift ? 3 : 2;
    if (order < 1 || order > max_order) {
        throw ModelError("deriv_apply: order " + std::to_string(order) +
                         " outside supported range for this target");
    }
    if (static_cast<int>(directions.size()) != order) {
        throw ModelError("deriv_apply: need one direction per derivative order");
    }
    if (target == DerivTarget::DiffusionColumn && (column < 0 || column >= model.m)) {
        throw ModelError("deriv_apply: diffusion column out of range");
    }

    Vec result;
    if (model.deriv_mode == DerivMode::ForwardAD) {
        result = forward_ad(model, target, column, x, order, directions);
    } else {
        const DirDerivFn* fn = nullptr;
        if (model.deriv_mode == DerivMode::Analytic) {
            if (target == DerivTarget::Drift) {
                if (model.drift_deriv[order - 1]) fn = &model.drift_deriv[order - 1];
            } else if (static_cast<int>(model.diffusion_deriv[order - 1].size()) > column &&
                       model.diffusion_deriv[order - 1][column]) {
                fn = &model.diffusion_deriv[order - 1][column];
            }
        }
        if (fn) {
            result = (*fn)(x, directions);
        } else if (order == 1) {
            result = fd_order1(model, target, column, x, directions[0]);
        } else if (order == 2) {
            result = fd_order2(model, target, column, x, directions[0], directions[1]);
        } else {
            result = fd_order3(model, target, column, x, directions[0], directions[1],
                               directions[2]);
        }
    }
    if (!result.allFinite()) {
        throw ModelError("deriv_apply: non-finite derivative at x = " + fmt_point(x));
    }
    return result;
}

Mat drift_jacobian(const SdeModel& model, const Vec& x) {
    Mat jac(model.d, model.d);
    for (int j = 0; j < model.d; ++j) {
        jac.col(j) = deriv_apply(model, DerivTarget::Drift, 0, x, 1, {Vec::Unit(model.d, j)});
    }
    return jac;
}

Mat diffusion_column_jacobian(const SdeModel& model, int column, const Vec& x) {
    Mat jac(model.d, model.d);
    for (int j = 0; j < model.d; ++j) {
        jac.col(j) = deriv_apply(model, DerivTarget::DiffusionColumn, column, x, 1,
                                 {Vec::Unit(model.d, j)});
    }
    return jac;
}

AssumptionReport validate_assumptions(const SdeModel& model, const SamplingBox& box, int n_samples,
                                      std::uint64_t rng_seed) {
    if (n_samples < 2) throw ConfigError("validate_assumptions: n_samples must be >= 2");
    if (model.exponent_N < 1.0) {
        throw ConfigError("validate_assumptions: growth exponent N must be >= 1");
    }
    if (box.lo.size() != model.d || box.hi.size() != model.d ||
        ((box.hi - box.lo).array() <= 0.0).any()) {
        throw ConfigError("validate_assumptions: degenerate sampling box");
    }

    RandomStream rng(rng_seed, 0);
    const Vec span = box.hi - box.lo;
    auto draw_point = [&] {
        Vec x(model.d);
        for (int i = 0; i < model.d; ++i) x[i] = box.lo[i] + span[i] * rng.uniform();
        return x;
    };
    auto draw_unit = [&] {
        Vec u(model.d);
        for (int i = 0; i < model.d; ++i) u[i] = rng.normal();
        const double n = u.norm();
        return n == 0.0 ? Vec::Unit(model.d, 0) : Vec(u / n);
    };

    const double twoNm2 = 2.0 * model.exponent_N - 2.0;
    const double near_scale = 1e-4 * span.maxCoeff();
    AssumptionReport report;
    report.exponent_N = model.exponent_N;
    report.sample_count = n_samples;
    report.box = box;

    double max_L = -std::numeric_limits<double>::infinity();
    double max_L1 = 0.0;
    double max_L3 = -std::numeric_limits<double>::infinity();
    double max_C = 0.0;

    for (int i = 0; i < n_samples; ++i) {
        const Vec x1 = draw_point();
        // alternate far pairs with near pairs; the monotonicity supremum is
        // typically attained in the x2 -> x1 limit
        const Vec x2 = (i % 2 == 0) ? draw_point() : Vec(x1 + near_scale * draw_unit());
        const Vec dx = x1 - x2;
        const double dist2 = dx.squaredNorm();
        if (dist2 == 0.0) continue;

        const Vec b1 = model.eval_drift(x1);
        const Vec b2 = model.eval_drift(x2);
        const Vec db = b1 - b2;

        max_L = std::max(max_L, dx.dot(db) / dist2);
        const double growth = 1.0 + std::pow(x1.norm(), twoNm2) + std::pow(x2.norm(), twoNm2);
        max_L1 = std::max(max_L1, db.squaredNorm() / (growth * dist2));
        max_C = std::max(max_C, b1.squaredNorm() /
                                    (1.0 + std::pow(x1.norm(), 2.0 * model.exponent_N)));

        const Mat jac = drift_jacobian(model, x1);
        const Mat sym = 0.5 * (jac + jac.transpose());
        Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
        max_L3 = std::max(max_L3, -eig.eigenvalues().minCoeff());
    }

    report.constant_L = max_L;
    report.constant_L1 = max_L1;
    report.constant_L3 = std::max(max_L3, 0.0);
    report.growth_C = max_C;

    const double viol_M = max_L - model.constant_L;
    const double viol_P = max_L1 - model.constant_L1;
    const double viol_J = report.constant_L3 - model.constant_L3;
    report.monotone_pass = viol_M <= 0.0;
    report.growth_pass = viol_P <= 0.0;
    report.jacobian_pass = viol_J <= 0.0;
    report.max_violation = std::max({viol_M, viol_P, viol_J});
    return report;
}

}  // namespace msde
