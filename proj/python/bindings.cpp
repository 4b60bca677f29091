#include "grouphub/em.hpp"
#include "grouphub/experiments.hpp"
#include "grouphub/identifiability.hpp"
#include "grouphub/io.hpp"
#include "grouphub/model.hpp"
#include "grouphub/oracle.hpp"
#include "grouphub/penalized.hpp"
#include "grouphub/profile.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace grouphub;

namespace {

using IntArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

// Integer matrix to grouped data. Values other than 0/1 are kept as 255 so
// validation can report them.
GroupedData to_data(const IntArray& x) {
    if (x.ndim() != 2) throw Error(ErrorCode::DimensionMismatch, "grouped data must be a 2-d array");
    const auto T = static_cast<std::size_t>(x.shape(0)), n = static_cast<std::size_t>(x.shape(1));
    std::vector<std::uint8_t> values(T * n);
    const auto* p = x.data();
    for (std::size_t i = 0; i < T * n; ++i) values[i] = p[i] == 0 ? 0 : p[i] == 1 ? 1 : 255;
    return GroupedData(T, n, std::move(values));
}

py::array_t<std::uint8_t> from_data(const GroupedData& d) {
    py::array_t<std::uint8_t> out({d.T(), d.n()});
    std::copy(d.values().begin(), d.values().end(), out.mutable_data());
    return out;
}

Variant variant_of(const std::string& s) { return parse_variant(s); }

py::dict fit_dict(const FitResult& f) {
    py::dict d;
    d["params"] = f.params;
    d["log_lik"] = f.logLik;
    d["iterations"] = f.iterations;
    d["converged"] = f.converged;
    d["restart_index"] = f.restartIndex;
    d["posterior"] = f.posterior.h;
    d["labels"] = map_labels(f.posterior, f.params.variant).z;
    d["trace"] = f.trace;
    return d;
}

py::dict sparse_dict(const SparseFit& f) {
    py::dict d;
    d["params"] = f.params;
    d["selected"] = f.selectedSet;
    d["lambda"] = f.lambda;
    d["log_lik"] = f.logLik;
    d["penalized_obj"] = f.penalizedObjective;
    d["iterations"] = f.iterations;
    d["converged"] = f.converged;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hub models for grouped co-occurrence data";

    py::register_exception<Error>(m, "GroupHubError", PyExc_ValueError);

    py::class_<HubModelParams>(m, "HubModelParams")
        .def(py::init([](const std::string& variant, std::size_t n, std::vector<std::size_t> hubs, Vector rho,
                         Matrix A) {
                 HubModelParams p;
                 p.variant = variant_of(variant);
                 p.n = n;
                 p.hubs = std::move(hubs);
                 p.rho = std::move(rho);
                 p.A = std::move(A);
                 p.validate();
                 return p;
             }),
             py::arg("variant"), py::arg("n"), py::arg("hubs"), py::arg("rho"), py::arg("A"))
        .def_property_readonly("variant", [](const HubModelParams& p) { return std::string(to_string(p.variant)); })
        .def_readonly("n", &HubModelParams::n)
        .def_readonly("hubs", &HubModelParams::hubs)
        .def_readonly("rho", &HubModelParams::rho)
        .def_readonly("A", &HubModelParams::A)
        .def("to_json", [](const HubModelParams& p) { return params_to_json(p).dump(); })
        .def_static("from_json", [](const std::string& s) { return params_from_json(Json::parse(s)); })
        .def("__repr__", [](const HubModelParams& p) {
            return "<HubModelParams " + std::string(to_string(p.variant)) + " n=" + std::to_string(p.n) +
                   " hubs=" + std::to_string(p.hubs.size()) + ">";
        });

    m.def(
        "build_scenario",
        [](const std::string& variant, std::size_t nL, std::size_t n, double alpha, double rho0, std::uint64_t seed) {
            ScenarioSpec s;
            s.variant = variant_of(variant);
            s.nL = nL;
            s.n = n;
            s.alpha = alpha;
            s.rho0 = rho0;
            s.seed = seed;
            const Scenario sc = build_scenario(s);
            return py::make_tuple(sc.params, sc.Vsets);
        },
        py::arg("variant") = "asymmetric", py::arg("n_l") = 10, py::arg("n") = 100, py::arg("alpha") = 1.0,
        py::arg("rho0") = 0.2, py::arg("seed") = 42, "Simulation scenario: (params, follower sets). Nodes are 0-based.");

    m.def(
        "generate",
        [](const HubModelParams& p, std::size_t T, std::uint64_t seed) {
            auto [data, z] = generate(p, T, seed);
            return py::make_tuple(from_data(data), z.z);
        },
        py::arg("params"), py::arg("T"), py::arg("seed"), "Draw T groups: (0/1 matrix, labels with 0 = hubless).");

    m.def(
        "log_likelihood", [](const HubModelParams& p, const IntArray& x) { return log_likelihood(p, to_data(x)); },
        py::arg("params"), py::arg("data"));
    m.def(
        "group_log_likelihoods",
        [](const HubModelParams& p, const IntArray& x) { return group_log_likelihoods(p, to_data(x)); },
        py::arg("params"), py::arg("data"));

    m.def(
        "fit_em",
        [](const IntArray& x, std::vector<std::size_t> hubs, const std::string& variant, std::size_t restarts,
           std::uint64_t seed, std::size_t threads) {
            FitConfig c;
            c.numRestarts = restarts;
            c.seed = seed;
            c.threads = threads;
            const GroupedData data = to_data(x);
            FitResult r;
            {
                py::gil_scoped_release release;
                r = fit_em(data, hubs, variant_of(variant), c);
            }
            return fit_dict(r);
        },
        py::arg("data"), py::arg("hubs"), py::arg("variant") = "asymmetric", py::arg("restarts") = 20,
        py::arg("seed") = 42, py::arg("threads") = 0, "Standard EM with a known hub set (0-based node ids).");

    m.def(
        "mislabel_rate",
        [](std::vector<int> a, std::vector<int> b) { return mislabel_rate({std::move(a)}, {std::move(b)}); },
        py::arg("z_true"), py::arg("z_hat"));

    m.def(
        "modified_em",
        [](const IntArray& x, std::vector<std::size_t> potential, double lambda, std::size_t restarts,
           std::uint64_t seed) {
            PenaltyConfig pen;
            pen.lambda = lambda;
            FitConfig c;
            c.numRestarts = restarts;
            c.seed = seed;
            const GroupedData data = to_data(x);
            SparseFit f;
            {
                py::gil_scoped_release release;
                f = modified_em(data, potential, pen, c);
            }
            return sparse_dict(f);
        },
        py::arg("data"), py::arg("potential"), py::arg("lam"), py::arg("restarts") = 20, py::arg("seed") = 42);

    m.def(
        "lambda_path",
        [](const IntArray& x, std::vector<std::size_t> potential, std::vector<double> grid, std::size_t restarts,
           std::size_t fresh, std::uint64_t seed) {
            PathConfig pc;
            pc.fit.numRestarts = restarts;
            pc.fit.seed = seed;
            pc.freshRestarts = fresh;
            const GroupedData data = to_data(x);
            SelectionPath path;
            {
                py::gil_scoped_release release;
                path = lambda_path(data, potential, grid, pc);
            }
            py::list rows;
            for (const auto& e : path.entries) {
                py::dict d = sparse_dict(e.fit);
                d["k"] = e.criteria.k;
                d["AIC"] = e.criteria.AIC;
                d["BIC"] = e.criteria.BIC;
                rows.append(d);
            }
            py::dict out;
            out["path"] = rows;
            out["chosen_by_aic"] = path.chosenByAIC;
            out["chosen_by_bic"] = path.chosenByBIC;
            return out;
        },
        py::arg("data"), py::arg("potential"), py::arg("grid"), py::arg("restarts") = 20, py::arg("fresh") = 20,
        py::arg("seed") = 42);

    m.def(
        "solve_rho",
        [](const Matrix& logd, const Vector& rhoInit, double lambda) {
            PenaltyConfig pen;
            pen.lambda = lambda;
            const auto s = solve_rho_subproblem(logd, pen, rhoInit);
            py::dict d;
            d["rho"] = s.rho;
            d["objective"] = s.objective;
            d["initial_objective"] = s.initialObjective;
            d["stationarity"] = s.stationarity;
            return d;
        },
        py::arg("log_density"), py::arg("rho_init"), py::arg("lam"));

    m.def(
        "enumerate_pmf", [](const HubModelParams& p) { return enumerate_pmf(p).probs; }, py::arg("params"),
        "Probability of every outcome; bit j of the index is node j.");
    m.def(
        "tv_distance",
        [](const HubModelParams& a, const HubModelParams& b) { return tv_distance(enumerate_pmf(a), enumerate_pmf(b)); },
        py::arg("a"), py::arg("b"));
    m.def(
        "check_identifiability",
        [](const HubModelParams& p) { return identifiability_to_json(check_identifiability(p)).dump(); },
        py::arg("params"), "Report as a JSON string.");
}
