#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "msde/integrate.hpp"
#include "msde/model_zoo.hpp"

using namespace msde;

namespace {

SdeModel monotone_cubic() {
    SdeModel model;
    model.d = model.m = 1;
    model.deriv_mode = DerivMode::FiniteDifference;
    model.drift = [](const Vec& x) { return Vec::Constant(1, -x[0] * x[0] * x[0]); };
    model.diffusion = [](const Vec&) { return Mat::Zero(1, 1); };
    model.constant_L = 0.0;
    return model;
}

}  // namespace

TEST_CASE("implicit step: cubic root z^3 + z - 2 = 0") {
    const SdeModel model = monotone_cubic();
    const Vec x = Vec::Constant(1, 2.0);
    const Vec next = implicit_step(model, x, 1.0, Vec::Zero(1));
    CHECK(next[0] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("implicit step: zero drift reduces to the diffusion increment") {
    const SdeModel model = model_zoo("brownian", {{"dim", 2.0}, {"c", 0.5}});
    Vec x(2), dw(2);
    x << 1.0, -2.0;
    dw << 0.3, 0.1;
    const Vec next = implicit_step(model, x, 0.01, dw);
    CHECK((next - (x + 0.5 * dw)).norm() < 1e-12);
}

TEST_CASE("implicit step: linear drift solves the backward-Euler equation") {
    const SdeModel model = model_zoo("ou", {{"theta", 1.0}, {"c", 0.0}});
    const Vec next = implicit_step(model, Vec::Ones(1), 0.5, Vec::Zero(1));
    CHECK(next[0] == doctest::Approx(1.0 / 1.5).epsilon(1e-12));
}

TEST_CASE("implicit step rejects dt * L >= 1") {
    const SdeModel gl = model_zoo("ginzburg_landau");  // L = eta = 1
    CHECK_THROWS_AS(implicit_step(gl, Vec::Ones(1), 1.5, Vec::Zero(1)), StepError);
}

TEST_CASE("solve_sde: no drift, no noise keeps the state constant") {
    const SdeModel model = model_zoo("ou", {{"theta", 0.0}, {"c", 0.0}});
    const TimeGrid grid{1.0, 32};
    const BrownianPath path = sample_brownian(grid, 1, 0, 4);
    const StatePath x = solve_sde(model, Vec::Constant(1, 2.5), path, Scheme::Implicit);
    for (int k = 0; k <= grid.n_steps; ++k) CHECK(x.states(k, 0) == 2.5);
}

TEST_CASE("solve_sde: deterministic decay converges to e^{-1} at first order") {
    const SdeModel model = model_zoo("ou", {{"theta", 1.0}, {"c", 0.0}});
    const TimeGrid grid{1.0, 100};
    const BrownianPath path = sample_brownian(grid, 1, 0, 4);
    const StatePath x = solve_sde(model, Vec::Ones(1), path, Scheme::Implicit);
    CHECK(std::abs(x.states(grid.n_steps, 0) - std::exp(-1.0)) <= grid.dt());
}

TEST_CASE("solve_sde: explicit GBM matches the closed form on the same path") {
    const double mu = 0.05, c = 0.2;
    const SdeModel model = model_zoo("gbm", {{"mu", mu}, {"c", c}});
    const TimeGrid grid{1.0, 512};
    const BrownianPath path = sample_brownian(grid, 1, 17, 99);
    const StatePath x = solve_sde(model, Vec::Ones(1), path, Scheme::Explicit);
    for (int k = 0; k <= grid.n_steps; k += 64) {
        const double exact =
            std::exp((mu - 0.5 * c * c) * grid.node(k) + c * path.cumulative(k, 0));
        CHECK(std::abs(x.states(k, 0) - exact) < 5.0 * std::sqrt(grid.dt()) * c);
    }
}

TEST_CASE("explicit scheme is rejected for super-linear drift") {
    const SdeModel gl = model_zoo("ginzburg_landau");
    const BrownianPath path = sample_brownian(TimeGrid{1.0, 32}, 1, 0, 1);
    CHECK_THROWS_AS(solve_sde(gl, Vec::Ones(1), path, Scheme::Explicit), ConfigError);
}

TEST_CASE("monotone contraction: implicit trajectories do not separate") {
    const SdeModel model = monotone_cubic();
    const TimeGrid grid{2.0, 64};
    const BrownianPath path = sample_brownian(grid, 1, 0, 12);
    const StatePath a = solve_sde(model, Vec::Constant(1, 2.0), path, Scheme::Implicit);
    const StatePath b = solve_sde(model, Vec::Constant(1, -1.5), path, Scheme::Implicit);
    double prev = std::abs(a.states(0, 0) - b.states(0, 0));
    for (int k = 1; k <= grid.n_steps; ++k) {
        const double gap = std::abs(a.states(k, 0) - b.states(k, 0));
        CHECK(gap <= prev + 1e-14);
        prev = gap;
    }
}

TEST_CASE("linear sde: zero coefficients keep alpha") {
    const int n = 32;
    const BrownianPath path = sample_brownian(TimeGrid{1.0, n}, 1, 0, 3);
    auto fields = std::make_shared<LinearFieldData>();
    fields->B.assign(n + 1, Mat::Zero(1, 1));
    fields->Sigma.assign(n + 1, {Mat::Zero(1, 1)});
    LinearSdeCoefficients coeffs;
    coeffs.alpha = Vec::Constant(1, 3.25);
    coeffs.fields = fields;
    const StatePath y = solve_linear_sde(coeffs, path);
    for (int k = 0; k <= n; ++k) CHECK(y.states(k, 0) == 3.25);
}

TEST_CASE("linear sde: constant drift forcing integrates exactly") {
    const int n = 64;
    const TimeGrid grid{1.0, n};
    const BrownianPath path = sample_brownian(grid, 1, 0, 3);
    auto fields = std::make_shared<LinearFieldData>();
    fields->B.assign(n + 1, Mat::Zero(1, 1));
    fields->Sigma.assign(n + 1, {Mat::Zero(1, 1)});
    LinearSdeCoefficients coeffs;
    coeffs.alpha = Vec::Zero(1);
    coeffs.U = Mat::Constant(n + 1, 1, 0.75);
    coeffs.fields = fields;
    const StatePath y = solve_linear_sde(coeffs, path);
    for (int k = 0; k <= n; ++k) {
        CHECK(y.states(k, 0) == doctest::Approx(0.75 * grid.node(k)).epsilon(1e-13));
    }
}

TEST_CASE("linear sde: constant multiplicative drift gives e^{beta T} at first order") {
    const int n = 256;
    const double beta = 1.0;
    const TimeGrid grid{1.0, n};
    const BrownianPath path = sample_brownian(grid, 1, 0, 3);
    auto fields = std::make_shared<LinearFieldData>();
    fields->B.assign(n + 1, Mat::Constant(1, 1, beta));
    fields->Sigma.assign(n + 1, {Mat::Zero(1, 1)});
    LinearSdeCoefficients coeffs;
    coeffs.alpha = Vec::Ones(1);
    coeffs.fields = fields;
    const StatePath y = solve_linear_sde(coeffs, path);
    CHECK(std::abs(y.states(n, 0) - std::exp(beta)) <= 2.0 * std::exp(beta) * grid.dt());
}

TEST_CASE("linear sde: state vanishes before the start index") {
    const int n = 16;
    const BrownianPath path = sample_brownian(TimeGrid{1.0, n}, 1, 0, 3);
    auto fields = std::make_shared<LinearFieldData>();
    fields->B.assign(n + 1, Mat::Zero(1, 1));
    fields->Sigma.assign(n + 1, {Mat::Zero(1, 1)});
    LinearSdeCoefficients coeffs;
    coeffs.start_index = 5;
    coeffs.alpha = Vec::Ones(1);
    coeffs.fields = fields;
    const StatePath y = solve_linear_sde(coeffs, path);
    for (int k = 0; k < 5; ++k) CHECK(y.states(k, 0) == 0.0);
    CHECK(y.states(5, 0) == 1.0);
}

TEST_CASE("strong order: explicit Euler-Maruyama on GBM is about 1/2") {
    const SdeModel model = model_zoo("gbm", {{"mu", 0.05}, {"c", 0.2}});
    const StrongErrorTable table = strong_error_table(model, Vec::Ones(1), 1.0, {16, 32, 64, 128},
                                                      600, 2024, Scheme::Explicit, 8, 2);
    CHECK(table.slope == doctest::Approx(0.5).epsilon(0.3));
    CHECK(std::abs(table.slope - 0.5) <= 0.15);
}

TEST_CASE("strong order: backward Euler on a deterministic ODE is about 1") {
    const SdeModel model = model_zoo("ou", {{"theta", 1.0}, {"c", 0.0}});
    const StrongErrorTable table = strong_error_table(model, Vec::Ones(1), 1.0, {16, 32, 64, 128},
                                                      1, 7, Scheme::Implicit, 8, 1);
    CHECK(std::abs(table.slope - 1.0) <= 0.15);
}

TEST_CASE("strong order: implicit scheme on Ginzburg-Landau is about 1/2") {
    const SdeModel model = model_zoo("ginzburg_landau", {{"eta", 1.0}, {"c", 0.5}});
    const StrongErrorTable table = strong_error_table(model, Vec::Ones(1), 1.0, {32, 64, 128, 256},
                                                      300, 11, Scheme::Implicit, 8, 2);
    CHECK(std::abs(table.slope - 0.5) <= 0.2);
}

TEST_CASE("strong_error_table rejects non-nested resolutions") {
    const SdeModel model = model_zoo("gbm");
    CHECK_THROWS_AS(strong_error_table(model, Vec::Ones(1), 1.0, {12, 32}, 4, 1, Scheme::Explicit),
                    ConfigError);
}

TEST_CASE("tamed and implicit schemes agree within 3x of each other's error band") {
    const SdeModel model = model_zoo("ginzburg_landau", {{"eta", 1.0}, {"c", 0.5}});
    const std::vector<int> res = {128};
    const StrongErrorTable implicit_err =
        strong_error_table(model, Vec::Ones(1), 1.0, res, 400, 5, Scheme::Implicit, 16, 2);
    const StrongErrorTable tamed_err =
        strong_error_table(model, Vec::Ones(1), 1.0, res, 400, 5, Scheme::Tamed, 16, 2);
    const double a = implicit_err.rms_error[0];
    const double b = tamed_err.rms_error[0];
    CHECK(b <= 3.0 * a);
    CHECK(a <= 3.0 * b);
}

TEST_CASE("divergence carries the failing step index") {
    SdeModel unstable;
    unstable.d = unstable.m = 1;
    unstable.globally_lipschitz = true;  // lie to reach the explicit path
    unstable.deriv_mode = DerivMode::FiniteDifference;
    unstable.drift = [](const Vec& x) { return Vec::Constant(1, x[0] * 1e155); };
    unstable.diffusion = [](const Vec&) { return Mat::Zero(1, 1); };
    const BrownianPath path = sample_brownian(TimeGrid{1.0, 8}, 1, 0, 1);
    CHECK_THROWS_AS(solve_sde(unstable, Vec::Ones(1), path, Scheme::Explicit), DivergenceError);
}
