#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>

#include "rost/boundary.hpp"
#include "rost/embed.hpp"
#include "rost/measure.hpp"
#include "rost/oracle.hpp"
#include "rost/payoff.hpp"
#include "rost/solver.hpp"

namespace py = pybind11;
using namespace rost;

namespace {

double ext_to_float(const Extended& e) {
    return e.is_finite() ? e.value() : std::numeric_limits<double>::infinity();
}

ProbabilityMeasure make_measure(const std::vector<std::pair<double, double>>& atoms,
                                const std::vector<std::tuple<double, double, double>>& pieces) {
    std::vector<Atom> a;
    for (const auto& [x, w] : atoms) a.push_back({x, w});
    std::vector<DensityPiece> p;
    for (const auto& [lo, hi, d] : pieces) p.push_back({lo, hi, d});
    return ProbabilityMeasure(std::move(a), std::move(p));
}

struct PySolved {
    Problem problem;
    ValueSurface surface;
    BoundarySet boundaries;
    ReversedBarrier barrier;
};

PySolved solve_pipeline(const ProbabilityMeasure& nu, const ProbabilityMeasure& mu, double T,
                        double dx, double lambda, double margin) {
    LatticeParams p;
    p.dx = dx;
    p.lambda = lambda;
    p.margin = margin;
    Problem pr = prepare(nu, mu, T, p);
    ValueSurface s = solve(pr);
    BoundarySet b = extract_boundaries(s, s.eps_stop());
    ReversedBarrier r = reverse(b, T);
    return {std::move(pr), std::move(s), std::move(b), std::move(r)};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Rost reversed barriers from finite-horizon optimal stopping";

    py::class_<ProbabilityMeasure>(m, "Measure")
        .def(py::init(&make_measure), py::arg("atoms") = std::vector<std::pair<double, double>>{},
             py::arg("pieces") = std::vector<std::tuple<double, double, double>>{})
        .def("cdf", &ProbabilityMeasure::cdf)
        .def("cdf_left", &ProbabilityMeasure::cdf_left)
        .def("quantile", &ProbabilityMeasure::quantile)
        .def("mass_open",
             [](const ProbabilityMeasure& m_, double lo, double hi) {
                 return m_.mass_open(lo, hi);
             })
        .def_property_readonly("support_min", &ProbabilityMeasure::support_min)
        .def_property_readonly("support_max", &ProbabilityMeasure::support_max);

    m.def("validate", [](const ProbabilityMeasure& nu, const ProbabilityMeasure& mu) {
        const ValidationReport r = validate(nu, mu);
        py::dict d;
        d["d1_ok"] = r.d1_ok;
        d["d2_ok"] = r.d2_ok;
        d["connected_ok"] = r.connected_ok;
        d["messages"] = r.messages;
        return d;
    });

    m.def("support_summary", [](const ProbabilityMeasure& nu, const ProbabilityMeasure& mu) {
        const SupportSummary s = support_summary(nu, mu);
        py::dict d;
        d["a_plus"] = s.a_plus;
        d["a_minus"] = s.a_minus;
        d["mu_plus"] = s.mu_plus;
        d["mu_minus"] = s.mu_minus;
        d["bhat_plus"] = ext_to_float(s.bhat_plus);
        d["bhat_minus"] = ext_to_float(s.bhat_minus);
        return d;
    });

    py::class_<PayoffCurve>(m, "Payoff")
        .def(py::init([](const ProbabilityMeasure& nu, const ProbabilityMeasure& mu) {
            return PayoffCurve::build(nu, mu);
        }))
        .def("__call__", [](const PayoffCurve& g, double x) { return g(x); })
        .def("deriv_right", &PayoffCurve::deriv_right)
        .def("deriv_left", &PayoffCurve::deriv_left)
        .def_property_readonly("g_plus_inf", &PayoffCurve::g_plus_inf)
        .def_property_readonly("g_minus_inf", &PayoffCurve::g_minus_inf)
        .def_property_readonly("argmin", &PayoffCurve::argmin);

    m.def(
        "oracle_value",
        [](const PayoffCurve& g, int depth, double dx_tree, double x0) {
            TinyTree tree{depth, dx_tree, x0};
            return oracle_enumerate(g, tree).convert_to<double>();
        },
        py::arg("payoff"), py::arg("depth"), py::arg("dx_tree"), py::arg("x0"),
        "Exact optimal value over all adapted stopping rules on the tiny tree");

    py::class_<PySolved>(m, "Solved")
        .def_property_readonly("times",
                               [](const PySolved& s) {
                                   std::vector<double> t;
                                   for (std::size_t k = 0; k < s.boundaries.n_rows(); ++k)
                                       t.push_back(s.boundaries.time(k));
                                   return t;
                               })
        .def_property_readonly("b_plus",
                               [](const PySolved& s) {
                                   std::vector<double> v;
                                   for (const auto& e : s.boundaries.b_plus)
                                       v.push_back(ext_to_float(e));
                                   return v;
                               })
        .def_property_readonly("b_minus",
                               [](const PySolved& s) {
                                   std::vector<double> v;
                                   for (const auto& e : s.boundaries.b_minus)
                                       v.push_back(ext_to_float(e));
                                   return v;
                               })
        .def_property_readonly("s_plus",
                               [](const PySolved& s) {
                                   std::vector<double> v{ext_to_float(s.barrier.s0_plus())};
                                   for (const auto& e : s.barrier.plus_knots())
                                       v.push_back(ext_to_float(e));
                                   return v;
                               })
        .def_property_readonly("s_minus",
                               [](const PySolved& s) {
                                   std::vector<double> v{ext_to_float(s.barrier.s0_minus())};
                                   for (const auto& e : s.barrier.minus_knots())
                                       v.push_back(ext_to_float(e));
                                   return v;
                               })
        .def_property_readonly("dt", [](const PySolved& s) { return s.boundaries.dt; })
        .def_property_readonly(
            "value_at_start",
            [](const PySolved& s) {
                return s.surface.value(0, s.problem.lattice.index_near(0.0));
            })
        .def("phi",
             [](const PySolved& s, double x) {
                 return ext_to_float(InverseBarrier(s.barrier).phi(x));
             })
        .def(
            "embed",
            [](const PySolved& s, std::size_t n_paths, double dt_sim, double t_max,
               std::uint64_t seed, bool bridge) {
                PathConfig cfg;
                cfg.n_paths = n_paths;
                cfg.dt_sim = dt_sim;
                cfg.t_max = t_max;
                cfg.seed = seed;
                cfg.bridge_correction = bridge;
                const EmbeddingReport r = verify_embedding(
                    s.barrier, s.problem.nu, s.problem.mu, cfg, 2.5 * s.boundaries.dx);
                py::dict d;
                d["absorbed_fraction"] = r.absorbed_fraction;
                d["ks_distance"] = r.ks_distance;
                py::dict atoms;
                for (const auto& [loc, f] : r.atom_frequencies)
                    atoms[py::float_(loc)] = f;
                d["atom_frequencies"] = atoms;
                d["sigma_quantiles"] = r.sigma_quantiles;
                return d;
            },
            py::arg("n_paths") = 10000, py::arg("dt_sim") = 1e-3, py::arg("t_max") = 10.0,
            py::arg("seed") = 1, py::arg("bridge") = false);

    m.def("solve", &solve_pipeline, py::arg("nu"), py::arg("mu"), py::arg("horizon"),
          py::arg("dx"), py::arg("lam") = 0.5, py::arg("margin") = 5.0,
          "Validate, solve the obstacle problem, extract and reverse the boundaries");
}
