#include "msde/model_zoo.hpp"

#include <algorithm>
#include <cmath>

namespace msde {

namespace {

double take(ParamMap& params, const std::string& key, double fallback) {
    const auto it = params.find(key);
    if (it == params.end()) return fallback;
    const double v = it->second;
    params.erase(it);
    return v;
}

void finish_params(const std::string& name, const ParamMap& params) {
    if (!params.empty()) {
        throw ConfigError("model '" + name + "': unknown parameter '" + params.begin()->first +
                          "'");
    }
}

double require_noise_scale(const std::string& name, double c) {
    if (c < 0.0 || !std::isfinite(c)) {
        throw ConfigError("model '" + name + "': noise scale must be finite and >= 0");
    }
    return c;
}

SdeModel make_ginzburg_landau(ParamMap params) {
    const double eta = take(params, "eta", 1.0);
    const double c = require_noise_scale("ginzburg_landau", take(params, "c", 0.5));
    finish_params("ginzburg_landau", params);

    SdeModel model;
    model.name = "ginzburg_landau";
    model.d = model.m = 1;
    model.deriv_mode = DerivMode::Analytic;
    model.drift = [eta](const Vec& x) { return Vec::Constant(1, eta * x[0] - x[0] * x[0] * x[0]); };
    model.diffusion = [c](const Vec& x) { return Mat::Constant(1, 1, c * x[0]); };
    model.drift_deriv[0] = [eta](const Vec& x, const std::vector<Vec>& v) {
        return Vec::Constant(1, (eta - 3.0 * x[0] * x[0]) * v[0][0]);
    };
    model.drift_deriv[1] = [](const Vec& x, const std::vector<Vec>& v) {
        return Vec::Constant(1, -6.0 * x[0] * v[0][0] * v[1][0]);
    };
    model.drift_deriv[2] = [](const Vec&, const std::vector<Vec>& v) {
        return Vec::Constant(1, -6.0 * v[0][0] * v[1][0] * v[2][0]);
    };
    model.diffusion_deriv[0] = {[c](const Vec&, const std::vector<Vec>& v) {
        return Vec::Constant(1, c * v[0][0]);
    }};
    model.diffusion_deriv[1] = {[](const Vec&, const std::vector<Vec>&) {
        return Vec::Zero(1);
    }};
    model.drift_generic = [eta](const HDVector& x) {
        return HDVector{HyperDual(eta) * x[0] - x[0] * x[0] * x[0]};
    };
    model.diffusion_column_generic = {[c](const HDVector& x) {
        return HDVector{HyperDual(c) * x[0]};
    }};
    model.constant_L = eta;
    model.exponent_N = 3.0;
    model.constant_L1 = std::max(2.0 * eta * eta, 9.0);
    model.constant_L3 = 3.0 * 4.0 - eta + 1.0;  // box-scale bound for |x| <= 2
    return model;
}

SdeModel make_gbm(ParamMap params) {
    const double mu = take(params, "mu", 0.05);
    const double c = require_noise_scale("gbm", take(params, "c", 0.2));
    finish_params("gbm", params);

    SdeModel model;
    model.name = "gbm";
    model.d = model.m = 1;
    model.deriv_mode = DerivMode::Analytic;
    model.globally_lipschitz = true;
    model.drift = [mu](const Vec& x) { return Vec::Constant(1, mu * x[0]); };
    model.diffusion = [c](const Vec& x) { return Mat::Constant(1, 1, c * x[0]); };
    model.drift_deriv[0] = [mu](const Vec&, const std::vector<Vec>& v) {
        return Vec::Constant(1, mu * v[0][0]);
    };
    model.drift_deriv[1] = [](const Vec&, const std::vector<Vec>&) { return Vec::Zero(1); };
    model.drift_deriv[2] = [](const Vec&, const std::vector<Vec>&) { return Vec::Zero(1); };
    model.diffusion_deriv[0] = {[c](const Vec&, const std::vector<Vec>& v) {
        return Vec::Constant(1, c * v[0][0]);
    }};
    model.diffusion_deriv[1] = {[](const Vec&, const std::vector<Vec>&) {
        return Vec::Zero(1);
    }};
    model.drift_generic = [mu](const HDVector& x) { return HDVector{HyperDual(mu) * x[0]}; };
    model.diffusion_column_generic = {[c](const HDVector& x) {
        return HDVector{HyperDual(c) * x[0]};
    }};
    model.constant_L = mu;
    model.exponent_N = 1.0;
    model.constant_L1 = mu * mu;
    model.constant_L3 = std::max(-mu, 0.0);
    return model;
}

SdeModel make_ou(ParamMap params) {
    const double theta = take(params, "theta", 1.0);
    const double level = take(params, "level", 0.0);
    const double c = require_noise_scale("ou", take(params, "c", 1.0));
    finish_params("ou", params);
    if (theta < 0.0) throw ConfigError("model 'ou': theta must be >= 0");

    SdeModel model;
    model.name = "ou";
    model.d = model.m = 1;
    model.deriv_mode = DerivMode::Analytic;
    model.globally_lipschitz = true;
    model.drift = [theta, level](const Vec& x) {
        return Vec::Constant(1, -theta * (x[0] - level));
    };
    model.diffusion = [c](const Vec&) { return Mat::Constant(1, 1, c); };
    model.drift_deriv[0] = [theta](const Vec&, const std::vector<Vec>& v) {
        return Vec::Constant(1, -theta * v[0][0]);
    };
    model.drift_deriv[1] = [](const Vec&, const std::vector<Vec>&) { return Vec::Zero(1); };
    model.drift_deriv[2] = [](const Vec&, const std::vector<Vec>&) { return Vec::Zero(1); };
    model.diffusion_deriv[0] = {[](const Vec&, const std::vector<Vec>&) { return Vec::Zero(1); }};
    model.diffusion_deriv[1] = {[](const Vec&, const std::vector<Vec>&) { return Vec::Zero(1); }};
    model.drift_generic = [theta, level](const HDVector& x) {
        return HDVector{HyperDual(-theta) * (x[0] - HyperDual(level))};
    };
    model.diffusion_column_generic = {[c](const HDVector&) { return HDVector{HyperDual(c)}; }};
    model.constant_L = -theta;
    model.exponent_N = 1.0;
    model.constant_L1 = theta * theta;
    model.constant_L3 = theta;
    return model;
}

SdeModel make_brownian(ParamMap params) {
    const int dim = static_cast<int>(take(params, "dim", 1.0));
    const double c = require_noise_scale("brownian", take(params, "c", 1.0));
    finish_params("brownian", params);
    if (dim < 1) throw ConfigError("model 'brownian': dim must be >= 1");

    SdeModel model;
    model.name = "brownian";
    model.d = model.m = dim;
    model.deriv_mode = DerivMode::Analytic;
    model.globally_lipschitz = true;
    model.drift = [dim](const Vec&) { return Vec::Zero(dim); };
    model.diffusion = [dim, c](const Vec&) { return Mat(c * Mat::Identity(dim, dim)); };
    for (auto& fn : model.drift_deriv) {
        fn = [dim](const Vec&, const std::vector<Vec>&) { return Vec::Zero(dim); };
    }
    for (int order = 0; order < 2; ++order) {
        model.diffusion_deriv[order].assign(
            dim, [dim](const Vec&, const std::vector<Vec>&) { return Vec::Zero(dim); });
    }
    model.drift_generic = [dim](const HDVector&) { return HDVector(dim, HyperDual(0.0)); };
    for (int i = 0; i < dim; ++i) {
        model.diffusion_column_generic.push_back([dim, c, i](const HDVector&) {
            HDVector col(dim, HyperDual(0.0));
            col[i] = HyperDual(c);
            return col;
        });
    }
    model.constant_L = 0.0;
    model.exponent_N = 1.0;
    model.constant_L1 = 0.0;
    model.constant_L3 = 0.0;
    return model;
}

SdeModel make_lorenz(ParamMap params) {
    const double sp = take(params, "sigma", 10.0);
    const double rho = take(params, "rho", 28.0);
    const double beta = take(params, "beta", 8.0 / 3.0);
    const double c = require_noise_scale("lorenz", take(params, "c", 1.0));
    finish_params("lorenz", params);

    SdeModel model;
    model.name = "lorenz";
    model.d = model.m = 3;
    model.deriv_mode = DerivMode::Analytic;
    model.drift = [sp, rho, beta](const Vec& x) {
        Vec b(3);
        b[0] = sp * (x[1] - x[0]);
        b[1] = x[0] * (rho - x[2]) - x[1];
        b[2] = x[0] * x[1] - beta * x[2];
        return b;
    };
    model.diffusion = [c](const Vec&) { return Mat(c * Mat::Identity(3, 3)); };
    model.drift_deriv[0] = [sp, rho, beta](const Vec& x, const std::vector<Vec>& dirs) {
        const Vec& v = dirs[0];
        Vec out(3);
        out[0] = sp * (v[1] - v[0]);
        out[1] = (rho - x[2]) * v[0] - v[1] - x[0] * v[2];
        out[2] = x[1] * v[0] + x[0] * v[1] - beta * v[2];
        return out;
    };
    model.drift_deriv[1] = [](const Vec&, const std::vector<Vec>& dirs) {
        const Vec& u = dirs[0];
        const Vec& v = dirs[1];
        Vec out(3);
        out[0] = 0.0;
        out[1] = -(u[0] * v[2] + u[2] * v[0]);
        out[2] = u[0] * v[1] + u[1] * v[0];
        return out;
    };
    model.drift_deriv[2] = [](const Vec&, const std::vector<Vec>&) { return Vec::Zero(3); };
    for (int order = 0; order < 2; ++order) {
        model.diffusion_deriv[order].assign(
            3, [](const Vec&, const std::vector<Vec>&) { return Vec::Zero(3); });
    }
    model.drift_generic = [sp, rho, beta](const HDVector& x) {
        HDVector b(3);
        b[0] = HyperDual(sp) * (x[1] - x[0]);
        b[1] = x[0] * (HyperDual(rho) - x[2]) - x[1];
        b[2] = x[0] * x[1] - HyperDual(beta) * x[2];
        return b;
    };
    for (int i = 0; i < 3; ++i) {
        model.diffusion_column_generic.push_back([c, i](const HDVector&) {
            HDVector col(3, HyperDual(0.0));
            col[i] = HyperDual(c);
            return col;
        });
    }
    // box-scale constants, calibrated for |x_i| <= 20
    model.constant_L = 30.0;
    model.exponent_N = 2.0;
    model.constant_L1 = 6000.0;
    model.constant_L3 = 40.0;
    return model;
}

SdeModel make_duffing_van_der_pol(ParamMap params) {
    const double alpha = take(params, "alpha", 1.0);
    const double c = require_noise_scale("duffing_van_der_pol", take(params, "c", 0.5));
    finish_params("duffing_van_der_pol", params);

    SdeModel model;
    model.name = "duffing_van_der_pol";
    model.d = 2;
    model.m = 1;
    model.deriv_mode = DerivMode::Analytic;
    model.drift = [alpha](const Vec& x) {
        Vec b(2);
        b[0] = x[1];
        b[1] = alpha * x[1] * (1.0 - x[0] * x[0]) - x[0] * x[0] * x[0];
        return b;
    };
    model.diffusion = [c](const Vec& x) {
        Mat s = Mat::Zero(2, 1);
        s(1, 0) = c * x[0];
        return s;
    };
    model.drift_deriv[0] = [alpha](const Vec& x, const std::vector<Vec>& dirs) {
        const Vec& v = dirs[0];
        Vec out(2);
        out[0] = v[1];
        out[1] = (-2.0 * alpha * x[0] * x[1] - 3.0 * x[0] * x[0]) * v[0] +
                 alpha * (1.0 - x[0] * x[0]) * v[1];
        return out;
    };
    model.drift_deriv[1] = [alpha](const Vec& x, const std::vector<Vec>& dirs) {
        const Vec& u = dirs[0];
        const Vec& v = dirs[1];
        Vec out(2);
        out[0] = 0.0;
        out[1] = (-2.0 * alpha * x[1] - 6.0 * x[0]) * u[0] * v[0] -
                 2.0 * alpha * x[0] * (u[0] * v[1] + u[1] * v[0]);
        return out;
    };
    model.drift_deriv[2] = [alpha](const Vec&, const std::vector<Vec>& dirs) {
        const Vec& u = dirs[0];
        const Vec& v = dirs[1];
        const Vec& w = dirs[2];
        Vec out(2);
        out[0] = 0.0;
        out[1] = -6.0 * u[0] * v[0] * w[0] -
                 2.0 * alpha * (u[0] * v[0] * w[1] + u[0] * v[1] * w[0] + u[1] * v[0] * w[0]);
        return out;
    };
    model.diffusion_deriv[0] = {[c](const Vec&, const std::vector<Vec>& dirs) {
        Vec out(2);
        out[0] = 0.0;
        out[1] = c * dirs[0][0];
        return out;
    }};
    model.diffusion_deriv[1] = {[](const Vec&, const std::vector<Vec>&) { return Vec::Zero(2); }};
    model.drift_generic = [alpha](const HDVector& x) {
        HDVector b(2);
        b[0] = x[1];
        b[1] = HyperDual(alpha) * x[1] * (HyperDual(1.0) - x[0] * x[0]) - x[0] * x[0] * x[0];
        return b;
    };
    model.diffusion_column_generic = {[c](const HDVector& x) {
        HDVector col(2, HyperDual(0.0));
        col[1] = HyperDual(c) * x[0];
        return col;
    }};
    // box-scale constants, calibrated for |x_i| <= 2
    model.constant_L = 6.5 * alpha + 7.0;
    model.exponent_N = 3.0;
    model.constant_L1 = 40.0 * std::max(1.0, alpha * alpha);
    model.constant_L3 = 6.5 * alpha + 13.0;
    return model;
}

SdeModel make_kinetic(ParamMap params) {
    finish_params("kinetic", params);
    SdeModel model;
    model.name = "kinetic";
    model.d = 2;
    model.m = 1;
    model.deriv_mode = DerivMode::Analytic;
    model.globally_lipschitz = true;
    model.drift = [](const Vec& x) {
        Vec b(2);
        b[0] = 0.0;
        b[1] = x[0];
        return b;
    };
    model.diffusion = [](const Vec&) {
        Mat s = Mat::Zero(2, 1);
        s(0, 0) = 1.0;
        return s;
    };
    model.drift_deriv[0] = [](const Vec&, const std::vector<Vec>& dirs) {
        Vec out(2);
        out[0] = 0.0;
        out[1] = dirs[0][0];
        return out;
    };
    model.drift_deriv[1] = [](const Vec&, const std::vector<Vec>&) { return Vec::Zero(2); };
    model.drift_deriv[2] = [](const Vec&, const std::vector<Vec>&) { return Vec::Zero(2); };
    model.diffusion_deriv[0] = {[](const Vec&, const std::vector<Vec>&) { return Vec::Zero(2); }};
    model.diffusion_deriv[1] = {[](const Vec&, const std::vector<Vec>&) { return Vec::Zero(2); }};
    model.drift_generic = [](const HDVector& x) {
        HDVector b(2, HyperDual(0.0));
        b[1] = x[0];
        return b;
    };
    model.diffusion_column_generic = {[](const HDVector&) {
        HDVector col(2, HyperDual(0.0));
        col[0] = HyperDual(1.0);
        return col;
    }};
    model.constant_L = 0.5;
    model.exponent_N = 1.0;
    model.constant_L1 = 1.0;
    model.constant_L3 = 0.5;
    return model;
}

}  // namespace

SdeModel model_zoo(const std::string& name, const ParamMap& params) {
    if (name == "ginzburg_landau") return make_ginzburg_landau(params);
    if (name == "gbm") return make_gbm(params);
    if (name == "ou") return make_ou(params);
    if (name == "brownian") return make_brownian(params);
    if (name == "lorenz") return make_lorenz(params);
    if (name == "duffing_van_der_pol") return make_duffing_van_der_pol(params);
    if (name == "kinetic") return make_kinetic(params);
    throw ConfigError("unknown model '" + name + "'");
}

std::vector<std::string> model_zoo_names() {
    return {"ginzburg_landau", "duffing_van_der_pol", "lorenz", "gbm",
            "ou",              "brownian",            "kinetic"};
}

}  // namespace msde
