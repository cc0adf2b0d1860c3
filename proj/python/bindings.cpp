#include "fracheat/cli.hpp"
#include "fracheat/errors.hpp"
#include "fracheat/experiments.hpp"
#include "fracheat/norms.hpp"
#include "fracheat/operators.hpp"
#include "fracheat/solver.hpp"
#include "fracheat/specfun.hpp"
#include "fracheat/spectral.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>
#include <optional>
#include <sstream>

namespace py = pybind11;
using namespace fracheat;
using spectral::Field;
using spectral::Grid;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Field to_field(const Grid& grid, const Array& a) {
    if (static_cast<std::size_t>(a.size()) != grid.size()) {
        throw UsageError("array has " + std::to_string(a.size()) + " entries, the grid " + std::to_string(grid.size()));
    }
    return Field(grid, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Field& f) {
    std::vector<py::ssize_t> shape(static_cast<std::size_t>(f.grid().dim()), static_cast<py::ssize_t>(f.grid().n()));
    Array out(shape);
    std::copy(f.values().begin(), f.values().end(), out.mutable_data());
    return out;
}

operators::OperatorBackend backend(const std::string& name, std::size_t quad_nodes) {
    return {operators::parse_backend(name), quad_nodes};
}

py::dict report_dict(const experiments::AdmissibilityReport& r) {
    auto interval = [](const experiments::Interval& i) {
        return py::make_tuple(i.lo, i.hi, i.lo_closed, i.hi_closed);
    };
    py::dict d;
    d["local_ok"] = r.local_ok;
    d["local_reasons"] = r.local_reasons;
    d["global_ok"] = r.global_ok;
    d["global_reasons"] = r.global_reasons;
    d["s_window"] = interval(r.s_window);
    d["p_window"] = interval(r.p_window);
    d["gamma_threshold"] = r.gamma_threshold;
    d["beta"] = r.beta;
    d["q_c"] = r.q_c;
    d["critical_s"] = r.critical_s;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Time-fractional semilinear heat equation: special functions, norms, operators and solver";

    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<AccuracyError>(m, "AccuracyError", PyExc_ArithmeticError);

    m.def("wright_phi", py::vectorize(&specfun::wright_phi), py::arg("alpha"), py::arg("theta"));
    m.def("wright_moment", &specfun::wright_moment, py::arg("alpha"), py::arg("r"));
    m.def("mittag_leffler", py::vectorize(&specfun::mittag_leffler), py::arg("alpha"), py::arg("beta"), py::arg("x"));

    py::class_<Grid>(m, "Grid")
        .def(py::init<int, std::size_t, double>(), py::arg("dim"), py::arg("n"), py::arg("half_width"))
        .def_property_readonly("dim", &Grid::dim)
        .def_property_readonly("n", &Grid::n)
        .def_property_readonly("half_width", &Grid::half_width)
        .def_property_readonly("spacing", &Grid::spacing)
        .def_property_readonly("size", &Grid::size)
        .def("coords", [](const Grid& g) {
            Array out(static_cast<py::ssize_t>(g.n()));
            for (std::size_t i = 0; i < g.n(); ++i) out.mutable_data()[i] = g.coord(i);
            return out;
        });

    m.def("make_data",
          [](const Grid& grid, const std::string& kind, double amplitude, double scale, std::uint64_t seed,
             double exponent) {
              experiments::DataSpec spec{experiments::parse_data_kind(kind), amplitude, scale, seed, exponent};
              return to_array(experiments::as_field(experiments::make_data(spec, grid)));
          },
          py::arg("grid"), py::arg("kind") = "gaussian", py::arg("amplitude") = 1.0, py::arg("scale") = 1.0,
          py::arg("seed") = 0, py::arg("exponent") = 1.0,
          "Datum sampled on the grid; measures are binned (weight / cell volume).");

    m.def("heat", [](double t, const Grid& g, const Array& u) { return to_array(spectral::heat_semigroup(t, to_field(g, u))); },
          py::arg("t"), py::arg("grid"), py::arg("values"));
    m.def("p_alpha",
          [](double t, const Grid& g, const Array& u, double alpha, const std::string& b, std::size_t nodes) {
              return to_array(operators::p_alpha(t, to_field(g, u), {alpha, 3.0, g.dim()}, backend(b, nodes)));
          },
          py::arg("t"), py::arg("grid"), py::arg("values"), py::arg("alpha"), py::arg("backend") = "ml_multiplier",
          py::arg("quad_nodes") = 16);
    m.def("s_alpha",
          [](double t, const Grid& g, const Array& u, double alpha, const std::string& b, std::size_t nodes) {
              return to_array(operators::s_alpha(t, to_field(g, u), {alpha, 3.0, g.dim()}, backend(b, nodes)));
          },
          py::arg("t"), py::arg("grid"), py::arg("values"), py::arg("alpha"), py::arg("backend") = "ml_multiplier",
          py::arg("quad_nodes") = 16);

    m.def("morrey_norm",
          [](const Grid& g, const Array& u, double p, double q, bool local, std::size_t stride) {
              return norms::morrey_norm(to_field(g, u), {p, q, local}, {stride, {}}).value;
          },
          py::arg("grid"), py::arg("values"), py::arg("p"), py::arg("q"), py::arg("local") = false,
          py::arg("stride") = 1);
    m.def("besov_morrey_norm",
          [](const Grid& g, const Array& u, double s, double p, double q, double r, bool homogeneous,
             std::size_t stride) {
              const auto bank = spectral::filter_bank(g, homogeneous);
              return norms::besov_morrey_norm(to_field(g, u), {s, p, q, r, homogeneous}, bank, {stride, {}}).value;
          },
          py::arg("grid"), py::arg("values"), py::arg("s"), py::arg("p"), py::arg("q"),
          py::arg("r") = std::numeric_limits<double>::infinity(), py::arg("homogeneous") = false,
          py::arg("stride") = 1);

    m.def("admissible_params",
          [](double alpha, double gamma, int dim, double s, double p, double q) {
              return report_dict(experiments::admissible_params({alpha, gamma, dim}, {s, p, q}));
          },
          py::arg("alpha"), py::arg("gamma"), py::arg("dim"), py::arg("s"), py::arg("p"), py::arg("q"));

    m.def("solve",
          [](const Grid& g, const Array& u0, double alpha, double gamma, double s, double p, double q, double T,
             std::size_t M, double rho, const std::string& metric, bool linear, std::size_t max_iters, double tol) {
              solver::SolverConfig sc;
              sc.fp = {alpha, gamma, g.dim()};
              sc.space = {s, p, q};
              sc.time = solver::TimeGrid::graded(T, M, rho);
              sc.metric = metric == "global" ? solver::Metric::Global : solver::Metric::Local;
              sc.linear = linear;
              sc.max_picard_iters = max_iters;
              sc.cauchy_tol = tol;
              sc.validate();
              const Field datum = to_field(g, u0);
              std::optional<solver::Solution> result;
              {
                  py::gil_scoped_release release;
                  result = solver::solve(datum, sc);
              }
              const auto& sol = *result;
              const auto& tr = sol.trajectory;
              Array states({static_cast<py::ssize_t>(tr.states.size()), static_cast<py::ssize_t>(g.size())});
              for (std::size_t k = 0; k < tr.states.size(); ++k) {
                  std::copy(tr.states[k].values().begin(), tr.states[k].values().end(),
                            states.mutable_data() + k * g.size());
              }
              py::dict d;
              d["times"] = tr.time.nodes();
              d["states"] = states;
              d["weighted_norms"] = tr.weighted_norms;
              d["verdict"] = std::string(solver::verdict_name(sol.diagnostics.verdict));
              d["iterations"] = sol.diagnostics.iterations;
              d["distances"] = sol.diagnostics.distances;
              d["horizon"] = sol.diagnostics.horizon;
              d["warnings"] = sol.diagnostics.warnings;
              return d;
          },
          py::arg("grid"), py::arg("values"), py::arg("alpha"), py::arg("gamma"), py::arg("s"), py::arg("p"),
          py::arg("q"), py::arg("T") = 0.5, py::arg("M") = 64, py::arg("rho") = 2.0, py::arg("metric") = "local",
          py::arg("linear") = false, py::arg("max_iters") = 30, py::arg("tol") = 1e-8);

    m.def("run_cli",
          [](std::vector<std::string> args) {
              args.insert(args.begin(), "fracheat");
              std::vector<const char*> argv;
              for (const auto& a : args) argv.push_back(a.c_str());
              std::ostringstream out, err;
              const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
              return py::make_tuple(code, out.str(), err.str());
          },
          py::arg("args"), "Runs the command line tool in-process; returns (exit_code, stdout, stderr).");
}
