#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "msde/model.hpp"
#include "msde/model_zoo.hpp"
#include "msde/rng.hpp"

using namespace msde;

namespace {

SdeModel cubic_model() {
    // b(x) = x - x^3, sigma = 0.5 x, FD-only derivatives
    SdeModel model;
    model.d = model.m = 1;
    model.deriv_mode = DerivMode::FiniteDifference;
    model.drift = [](const Vec& x) { return Vec::Constant(1, x[0] - x[0] * x[0] * x[0]); };
    model.diffusion = [](const Vec& x) { return Mat::Constant(1, 1, 0.5 * x[0]); };
    return model;
}

}  // namespace

TEST_CASE("hyperdual products truncate nilpotent powers") {
    HyperDual x(2.0);
    x.comp[1] = 1.0;  // e0 tangent
    x.comp[2] = 1.0;  // e1 tangent
    x.comp[4] = 1.0;  // e2 tangent
    const HyperDual y = x * x * x;  // f(x) = x^3
    CHECK(y.comp[0] == 8.0);        // value
    CHECK(y.comp[1] == 12.0);       // f' = 3 x^2
    CHECK(y.comp[3] == 12.0);       // f'' = 6 x
    CHECK(y.comp[7] == 6.0);        // f''' = 6
}

TEST_CASE("hyperdual reciprocal and transcendentals") {
    HyperDual x(1.5);
    x.comp[1] = 1.0;
    x.comp[2] = 1.0;
    const HyperDual inv = HyperDual(1.0) / x;
    CHECK(inv.comp[0] == doctest::Approx(1.0 / 1.5));
    CHECK(inv.comp[1] == doctest::Approx(-1.0 / 2.25));
    CHECK(inv.comp[3] == doctest::Approx(2.0 / std::pow(1.5, 3)));
    const HyperDual e = exp(x);
    CHECK(e.comp[0] == doctest::Approx(std::exp(1.5)));
    CHECK(e.comp[3] == doctest::Approx(std::exp(1.5)));
    const HyperDual lg = log(x);
    CHECK(lg.comp[1] == doctest::Approx(1.0 / 1.5));
}

TEST_CASE("drift evaluation: zoo examples") {
    const SdeModel gl = model_zoo("ginzburg_landau", {{"eta", 1.0}, {"c", 0.5}});
    CHECK(gl.eval_drift(Vec::Constant(1, 2.0))[0] == doctest::Approx(-6.0));

    const SdeModel flat = model_zoo("brownian", {{"dim", 3.0}});
    CHECK(flat.eval_drift(Vec::Ones(3)).norm() == 0.0);

    const SdeModel lorenz = model_zoo("lorenz");
    const Vec b = lorenz.eval_drift(Vec::Ones(3));
    CHECK(b[0] == doctest::Approx(0.0));
    CHECK(b[1] == doctest::Approx(26.0));
    CHECK(b[2] == doctest::Approx(1.0 - 8.0 / 3.0));
}

TEST_CASE("diffusion evaluation: shapes and degenerate cases") {
    const SdeModel flat = model_zoo("brownian", {{"dim", 2.0}});
    CHECK(flat.eval_diffusion(Vec::Zero(2)) == Mat::Identity(2, 2));

    const SdeModel gbm = model_zoo("gbm", {{"mu", 0.0}, {"c", 0.5}});
    CHECK(gbm.eval_diffusion(Vec::Constant(1, 3.0))(0, 0) == doctest::Approx(1.5));

    const SdeModel none = model_zoo("gbm", {{"c", 0.0}});
    CHECK(none.eval_diffusion(Vec::Constant(1, 4.0)).norm() == 0.0);
}

TEST_CASE("non-finite drift output raises a model error carrying x") {
    SdeModel bad;
    bad.d = bad.m = 1;
    bad.drift = [](const Vec& x) { return Vec::Constant(1, 1.0 / x[0]); };
    bad.diffusion = [](const Vec&) { return Mat::Zero(1, 1); };
    CHECK_THROWS_AS(bad.eval_drift(Vec::Zero(1)), ModelError);
    try {
        bad.eval_drift(Vec::Zero(1));
    } catch (const ModelError& e) {
        CHECK(std::string(e.what()).find("0.0") != std::string::npos);
    }
}

TEST_CASE("deriv_apply: spec arithmetic cases") {
    // b(x) = x^3 in 1-d, FD mode
    SdeModel cubic;
    cubic.d = cubic.m = 1;
    cubic.deriv_mode = DerivMode::FiniteDifference;
    cubic.drift = [](const Vec& x) { return Vec::Constant(1, x[0] * x[0] * x[0]); };
    cubic.diffusion = [](const Vec&) { return Mat::Zero(1, 1); };
    const Vec one = Vec::Ones(1);
    const Vec x2 = Vec::Constant(1, 2.0);
    CHECK(deriv_apply(cubic, DerivTarget::Drift, 0, x2, 2, {one, one})[0] ==
          doctest::Approx(12.0).epsilon(1e-5));

    // linear drift: order 1 gives Av, order 2 vanishes
    SdeModel linear;
    linear.d = linear.m = 2;
    linear.deriv_mode = DerivMode::FiniteDifference;
    Mat a(2, 2);
    a << 1.0, 2.0, -0.5, 0.25;
    linear.drift = [a](const Vec& x) -> Vec { return a * x; };
    linear.diffusion = [](const Vec&) { return Mat::Identity(2, 2); };
    Vec v(2);
    v << 0.3, -0.7;
    const Vec dv = deriv_apply(linear, DerivTarget::Drift, 0, Vec::Ones(2), 1, {v});
    CHECK((dv - a * v).norm() < 1e-8);
    const Vec d2 = deriv_apply(linear, DerivTarget::Drift, 0, Vec::Ones(2), 2, {v, v});
    CHECK(d2.norm() < 1e-6);

    // b = x - x^3 at x = 1, third order along (1),(1),(1) -> -6
    const SdeModel gl = cubic_model();
    CHECK(deriv_apply(gl, DerivTarget::Drift, 0, one, 3, {one, one, one})[0] ==
          doctest::Approx(-6.0).epsilon(1e-3));
}

TEST_CASE("deriv_apply rejects unsupported orders") {
    const SdeModel gl = model_zoo("ginzburg_landau");
    const Vec one = Vec::Ones(1);
    CHECK_THROWS_AS(deriv_apply(gl, DerivTarget::Drift, 0, one, 4, {one, one, one, one}),
                    ModelError);
    CHECK_THROWS_AS(deriv_apply(gl, DerivTarget::DiffusionColumn, 0, one, 3, {one, one, one}),
                    ModelError);
}

TEST_CASE("analytic, forward-AD and finite differences agree on random probes") {
    SdeModel gl = model_zoo("ginzburg_landau", {{"eta", 1.0}, {"c", 0.5}});
    SdeModel gl_fd = gl;
    gl_fd.deriv_mode = DerivMode::FiniteDifference;
    SdeModel gl_ad = gl;
    gl_ad.deriv_mode = DerivMode::ForwardAD;

    RandomStream rng(77, 0);
    const double tol[3] = {1e-7, 1e-5, 5e-4};
    for (int probe = 0; probe < 100; ++probe) {
        const Vec x = Vec::Constant(1, 4.0 * rng.uniform() - 2.0);
        std::vector<Vec> dirs;
        for (int order = 1; order <= 3; ++order) {
            dirs.push_back(Vec::Constant(1, 2.0 * rng.uniform() - 1.0));
            const Vec exact = deriv_apply(gl, DerivTarget::Drift, 0, x, order, dirs);
            const Vec fd = deriv_apply(gl_fd, DerivTarget::Drift, 0, x, order, dirs);
            const Vec ad = deriv_apply(gl_ad, DerivTarget::Drift, 0, x, order, dirs);
            CHECK((exact - fd).norm() <= tol[order - 1] * (1.0 + exact.norm()));
            CHECK((exact - ad).norm() <= 1e-12 * (1.0 + exact.norm()));
            if (order <= 2) {
                const Vec se = deriv_apply(gl, DerivTarget::DiffusionColumn, 0, x, order, dirs);
                const Vec sf = deriv_apply(gl_fd, DerivTarget::DiffusionColumn, 0, x, order, dirs);
                CHECK((se - sf).norm() <= tol[order - 1] * (1.0 + se.norm()));
            }
        }
    }
}

TEST_CASE("lorenz analytic derivatives agree with forward AD on probes") {
    SdeModel lorenz = model_zoo("lorenz");
    SdeModel ad = lorenz;
    ad.deriv_mode = DerivMode::ForwardAD;
    RandomStream rng(5, 0);
    for (int probe = 0; probe < 50; ++probe) {
        Vec x(3), u(3), v(3);
        for (int i = 0; i < 3; ++i) {
            x[i] = 10.0 * (rng.uniform() - 0.5);
            u[i] = rng.normal();
            v[i] = rng.normal();
        }
        const Vec a1 = deriv_apply(lorenz, DerivTarget::Drift, 0, x, 1, {u});
        const Vec b1 = deriv_apply(ad, DerivTarget::Drift, 0, x, 1, {u});
        CHECK((a1 - b1).norm() < 1e-11 * (1.0 + a1.norm()));
        const Vec a2 = deriv_apply(lorenz, DerivTarget::Drift, 0, x, 2, {u, v});
        const Vec b2 = deriv_apply(ad, DerivTarget::Drift, 0, x, 2, {u, v});
        CHECK((a2 - b2).norm() < 1e-11 * (1.0 + a2.norm()));
    }
}

TEST_CASE("assumption validation: monotone cubic has L <= 0") {
    SdeModel model;
    model.d = model.m = 1;
    model.deriv_mode = DerivMode::FiniteDifference;
    model.drift = [](const Vec& x) { return Vec::Constant(1, -x[0] * x[0] * x[0]); };
    model.diffusion = [](const Vec&) { return Mat::Zero(1, 1); };
    model.exponent_N = 3.0;
    model.constant_L1 = 9.0;
    model.constant_L3 = 13.0;
    const SamplingBox box{Vec::Constant(1, -2.0), Vec::Constant(1, 2.0)};
    const AssumptionReport report = validate_assumptions(model, box, 4000, 99);
    CHECK(report.constant_L <= 1e-12);
    CHECK(report.monotone_pass);
}

TEST_CASE("assumption validation: ginzburg-landau monotonicity constant is 1") {
    const SdeModel gl = model_zoo("ginzburg_landau", {{"eta", 1.0}, {"c", 0.5}});
    const SamplingBox box{Vec::Constant(1, -2.0), Vec::Constant(1, 2.0)};
    const AssumptionReport report = validate_assumptions(gl, box, 8000, 7);
    CHECK(report.constant_L == doctest::Approx(1.0).epsilon(0.05));
    CHECK(report.constant_L <= 1.0);  // declared constant dominates the samples
    CHECK(report.monotone_pass);
    CHECK(report.growth_pass);
    CHECK(report.jacobian_pass);
    CHECK(report.max_violation <= 0.0);
}

TEST_CASE("assumption validation: globally Lipschitz drift gives L1 = K^2 at N = 1") {
    const double k = 2.5;
    SdeModel model;
    model.d = model.m = 1;
    model.deriv_mode = DerivMode::FiniteDifference;
    model.drift = [k](const Vec& x) { return Vec::Constant(1, -k * x[0]); };
    model.diffusion = [](const Vec&) { return Mat::Identity(1, 1); };
    model.exponent_N = 1.0;
    model.constant_L1 = k * k;
    model.constant_L3 = k;
    const SamplingBox box{Vec::Constant(1, -3.0), Vec::Constant(1, 3.0)};
    const AssumptionReport report = validate_assumptions(model, box, 2000, 3);
    CHECK(report.constant_L1 == doctest::Approx(k * k / 3.0).epsilon(1e-6));
    // the sampled quotient is |b(x)-b(y)|^2 / ((1+2)|x-y|^2) = K^2/3 at N=1;
    // the declared K^2 dominates it
    CHECK(report.growth_pass);
    CHECK(report.exponent_N == 1.0);
}

TEST_CASE("growth sanity: |b|^2 <= C (1 + |x|^{2N}) over the box") {
    const SdeModel gl = model_zoo("ginzburg_landau");
    const SamplingBox box{Vec::Constant(1, -2.0), Vec::Constant(1, 2.0)};
    const AssumptionReport report = validate_assumptions(gl, box, 2000, 11);
    RandomStream rng(13, 0);
    for (int i = 0; i < 500; ++i) {
        const Vec x = Vec::Constant(1, 4.0 * rng.uniform() - 2.0);
        const double lhs = gl.eval_drift(x).squaredNorm();
        CHECK(lhs <= (report.growth_C + 1e-9) * (1.0 + std::pow(x.norm(), 2.0 * gl.exponent_N)));
    }
}

TEST_CASE("validation rejects a growth exponent below 1") {
    SdeModel model = model_zoo("gbm");
    model.exponent_N = 0.5;
    const SamplingBox box{Vec::Constant(1, -1.0), Vec::Constant(1, 1.0)};
    CHECK_THROWS_AS(validate_assumptions(model, box, 10, 1), ConfigError);
}

TEST_CASE("zoo rejects unknown names and invalid parameters") {
    CHECK_THROWS_AS(model_zoo("heston"), ConfigError);
    CHECK_THROWS_AS(model_zoo("gbm", {{"c", -1.0}}), ConfigError);
    CHECK_THROWS_AS(model_zoo("gbm", {{"volatility", 0.1}}), ConfigError);
}

TEST_CASE("zoo wiring: ginzburg_landau carries derivatives up to order 3") {
    const SdeModel gl = model_zoo("ginzburg_landau", {{"eta", 1.0}, {"c", 0.5}});
    const Vec x = Vec::Constant(1, 1.0);
    const Vec one = Vec::Ones(1);
    CHECK(deriv_apply(gl, DerivTarget::Drift, 0, x, 1, {one})[0] == doctest::Approx(-2.0));
    CHECK(deriv_apply(gl, DerivTarget::Drift, 0, x, 2, {one, one})[0] == doctest::Approx(-6.0));
    CHECK(deriv_apply(gl, DerivTarget::Drift, 0, x, 3, {one, one, one})[0] ==
          doctest::Approx(-6.0));
    CHECK(deriv_apply(gl, DerivTarget::DiffusionColumn, 0, x, 1, {one})[0] ==
          doctest::Approx(0.5));
    CHECK(gl.eval_diffusion(x)(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("kinetic model matches the hand-checkable hypoelliptic example") {
    const SdeModel kin = model_zoo("kinetic");
    CHECK(kin.d == 2);
    CHECK(kin.m == 1);
    Vec x(2);
    x << 0.7, -0.3;
    const Vec b = kin.eval_drift(x);
    CHECK(b[0] == 0.0);
    CHECK(b[1] == doctest::Approx(0.7));
    const Mat s = kin.eval_diffusion(x);
    CHECK(s(0, 0) == 1.0);
    CHECK(s(1, 0) == 0.0);
}
