#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "msde/harness.hpp"
#include "msde/hormander.hpp"

namespace py = pybind11;
using namespace msde;

namespace {

Mat simulate_one(const SdeModel& model, const Vec& x0, double T, int steps,
                 std::uint64_t stream_id, std::uint64_t seed, const std::string& scheme) {
    const BrownianPath path = sample_brownian(TimeGrid{T, steps}, model.m, stream_id, seed);
    return solve_sde(model, x0, path, scheme_from_name(scheme)).states;
}

}  // namespace

PYBIND11_MODULE(_msde, m) {
    m.doc() = "monotone-drift SDE simulation with Malliavin and Hormander diagnostics";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<DivergenceError>(m, "DivergenceError");

    py::class_<SdeModel>(m, "SdeModel")
        .def_readonly("d", &SdeModel::d)
        .def_readonly("m", &SdeModel::m)
        .def_readonly("name", &SdeModel::name)
        .def_readonly("monotonicity_L", &SdeModel::constant_L)
        .def_readonly("growth_N", &SdeModel::exponent_N)
        .def("drift", [](const SdeModel& model, const Vec& x) { return model.eval_drift(x); })
        .def("diffusion",
             [](const SdeModel& model, const Vec& x) { return model.eval_diffusion(x); });

    m.def("model_zoo", &model_zoo, py::arg("name"), py::arg("params") = ParamMap{});
    m.def("model_zoo_names", &model_zoo_names);

    py::class_<AssumptionReport>(m, "AssumptionReport")
        .def_readonly("constant_L", &AssumptionReport::constant_L)
        .def_readonly("constant_L1", &AssumptionReport::constant_L1)
        .def_readonly("exponent_N", &AssumptionReport::exponent_N)
        .def_readonly("constant_L3", &AssumptionReport::constant_L3)
        .def_readonly("growth_C", &AssumptionReport::growth_C)
        .def_readonly("max_violation", &AssumptionReport::max_violation)
        .def_readonly("monotone_pass", &AssumptionReport::monotone_pass)
        .def_readonly("growth_pass", &AssumptionReport::growth_pass)
        .def_readonly("jacobian_pass", &AssumptionReport::jacobian_pass);

    m.def(
        "validate_assumptions",
        [](const SdeModel& model, const Vec& lo, const Vec& hi, int n_samples,
           std::uint64_t seed) {
            return validate_assumptions(model, SamplingBox{lo, hi}, n_samples, seed);
        },
        py::arg("model"), py::arg("lo"), py::arg("hi"), py::arg("n_samples") = 1000,
        py::arg("seed") = 0);

    m.def("simulate", &simulate_one, py::arg("model"), py::arg("x0"), py::arg("T"),
          py::arg("steps"), py::arg("stream_id") = 0, py::arg("seed") = 0,
          py::arg("scheme") = "implicit",
          "Integrate one path; returns the (steps+1) x d trajectory.");

    m.def(
        "brownian_path",
        [](double T, int steps, int m_dim, std::uint64_t stream_id, std::uint64_t seed) {
            const BrownianPath path = sample_brownian(TimeGrid{T, steps}, m_dim, stream_id, seed);
            return py::make_tuple(path.increments, path.cumulative);
        },
        py::arg("T"), py::arg("steps"), py::arg("m") = 1, py::arg("stream_id") = 0,
        py::arg("seed") = 0, "Sample a Brownian path; returns (increments, cumulative).");

    m.def(
        "malliavin_first",
        [](const SdeModel& model, const Vec& x0, double T, int steps, std::uint64_t stream_id,
           std::uint64_t seed, const std::string& method, const std::string& scheme) {
            const TimeGrid grid{T, steps};
            const BrownianPath path = sample_brownian(grid, model.m, stream_id, seed);
            const StatePath x = solve_sde(model, x0, path, scheme_from_name(scheme));
            const auto grid_method =
                method == "direct" ? FirstOrderMethod::Direct : FirstOrderMethod::Flow;
            const DerivativeGrid d = malliavin_first(model, x, path, grid_method);
            py::array_t<double> out({steps + 1, steps + 1, model.d, model.m});
            auto buf = out.mutable_unchecked<4>();
            for (int s = 0; s <= steps; ++s) {
                for (int t = 0; t <= steps; ++t) {
                    for (int i = 0; i < model.d; ++i) {
                        for (int j = 0; j < model.m; ++j) {
                            buf(s, t, i, j) = t >= s ? d.block(s, t)(i, j) : 0.0;
                        }
                    }
                }
            }
            return out;
        },
        py::arg("model"), py::arg("x0"), py::arg("T"), py::arg("steps"), py::arg("stream_id") = 0,
        py::arg("seed") = 0, py::arg("method") = "flow", py::arg("scheme") = "implicit",
        "Dense D_s X(t) grid (zero above the diagonal).");

    m.def(
        "malliavin_matrix",
        [](const SdeModel& model, const Vec& x0, double T, int steps, std::uint64_t stream_id,
           std::uint64_t seed, const std::string& scheme) {
            const TimeGrid grid{T, steps};
            const BrownianPath path = sample_brownian(grid, model.m, stream_id, seed);
            const StatePath x = solve_sde(model, x0, path, scheme_from_name(scheme));
            const FlowMatrices flow = compute_flow(model, x, path);
            const MalliavinMatrix q = malliavin_matrix(flow, x, model, steps);
            return py::make_tuple(q.Q, q.eigenvalues);
        },
        py::arg("model"), py::arg("x0"), py::arg("T"), py::arg("steps"), py::arg("stream_id") = 0,
        py::arg("seed") = 0, py::arg("scheme") = "implicit",
        "Malliavin covariance at T; returns (Q, eigenvalues).");

    m.def(
        "hormander_rank",
        [](const SdeModel& model, const Vec& x, int max_depth, double tol) {
            const HormanderResult r = hormander_rank(model, x, max_depth, tol);
            py::dict out;
            out["satisfied"] = r.satisfied;
            out["rank"] = r.rank;
            out["rank_by_depth"] = r.rank_by_depth;
            out["depth_at_full_rank"] = r.depth_at_full_rank;
            out["budget_exceeded"] = r.budget_exceeded;
            return out;
        },
        py::arg("model"), py::arg("x"), py::arg("max_depth") = 6, py::arg("tol") = 1e-6);

    m.def(
        "gateaux_test",
        [](const SdeModel& model, const Vec& x0, double T, int steps,
           const std::vector<double>& epsilons, int n_paths, std::uint64_t seed,
           const std::string& scheme, int workers) {
            const TimeGrid grid{T, steps};
            const auto h = CameronMartinDirection::constant(grid, Vec::Ones(model.m));
            const GateauxReport r = gateaux_quotient_test(model, x0, grid, h, epsilons, n_paths,
                                                          seed, scheme_from_name(scheme), workers);
            py::dict out;
            out["epsilons"] = r.epsilons;
            out["mean_sup_error"] = r.mean_sup_error;
            out["slope"] = r.slope;
            out["n_excluded"] = r.n_excluded;
            return out;
        },
        py::arg("model"), py::arg("x0"), py::arg("T"), py::arg("steps"), py::arg("epsilons"),
        py::arg("n_paths") = 100, py::arg("seed") = 0, py::arg("scheme") = "implicit",
        py::arg("workers") = 1);

    m.def(
        "cameron_martin",
        [](double rate, double T, int steps, int n_paths, std::uint64_t seed, int workers) {
            py::list out;
            for (const auto& c : cameron_martin_cases(rate, T, steps, n_paths, seed, workers)) {
                py::dict row;
                row["name"] = c.name;
                row["lhs"] = c.check.lhs;
                row["rhs"] = c.check.rhs;
                row["ci"] = c.check.ci;
                row["target"] = c.target;
                row["pass"] = c.pass;
                out.append(row);
            }
            return out;
        },
        py::arg("rate") = 0.5, py::arg("T") = 1.0, py::arg("steps") = 128,
        py::arg("n_paths") = 10000, py::arg("seed") = 0, py::arg("workers") = 1);

    m.def(
        "kde",
        [](const std::vector<double>& samples, std::optional<double> bandwidth) {
            const KdeResult r = kde_density(samples, bandwidth);
            return py::make_tuple(r.x, r.density, r.bandwidth);
        },
        py::arg("samples"), py::arg("bandwidth") = std::nullopt);

    m.def(
        "strong_order",
        [](const SdeModel& model, const Vec& x0, double T, const std::vector<int>& resolutions,
           int n_paths, std::uint64_t seed, const std::string& scheme, int workers) {
            const StrongErrorTable t = strong_error_table(model, x0, T, resolutions, n_paths,
                                                          seed, scheme_from_name(scheme), 4,
                                                          workers);
            py::dict out;
            out["dt"] = t.dt;
            out["rms_error"] = t.rms_error;
            out["slope"] = t.slope;
            out["r_squared"] = t.r_squared;
            return out;
        },
        py::arg("model"), py::arg("x0"), py::arg("T"), py::arg("resolutions"),
        py::arg("n_paths") = 200, py::arg("seed") = 0, py::arg("scheme") = "implicit",
        py::arg("workers") = 1);

    m.attr("__version__") = MSDE_VERSION;
}
