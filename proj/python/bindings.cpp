#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>

#include "hamosc/criteria.hpp"
#include "hamosc/dynamics.hpp"
#include "hamosc/oracle.hpp"
#include "hamosc/report.hpp"

namespace py = pybind11;
using namespace hamosc;
using json = nlohmann::ordered_json;

namespace {

py::object json_to_py(const json& j) {
    switch (j.type()) {
        case json::value_t::null: return py::none();
        case json::value_t::boolean: return py::bool_(j.get<bool>());
        case json::value_t::number_integer: return py::int_(j.get<long long>());
        case json::value_t::number_unsigned: return py::int_(j.get<unsigned long long>());
        case json::value_t::number_float: return py::float_(j.get<double>());
        case json::value_t::string: return py::str(j.get<std::string>());
        case json::value_t::array: {
            py::list out;
            for (const auto& v : j) out.append(json_to_py(v));
            return out;
        }
        case json::value_t::object: {
            py::dict out;
            for (auto it = j.begin(); it != j.end(); ++it)
                out[py::str(it.key())] = json_to_py(it.value());
            return out;
        }
        default: return py::none();
    }
}

py::dict report_to_py(const CriterionReport& rep) { return json_to_py(to_json(rep)); }

CriterionOptions options_from_kwargs(int grid, int stages, double threshold, double quad_tol) {
    CriterionOptions opt;
    opt.grid_samples = grid;
    opt.stages = stages;
    opt.divergence_threshold = threshold;
    opt.quad_tol = quad_tol;
    return opt;
}

py::dict detection_to_py(const ZeroDetection& det) {
    py::dict out;
    py::list zeros, near;
    for (const auto& e : det.zeros) zeros.append(py::make_tuple(e.t, e.sigma));
    for (const auto& e : det.near) near.append(py::make_tuple(e.t, e.sigma));
    out["zeros"] = zeros;
    out["near"] = near;
    out["threshold"] = det.threshold;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Oscillation criteria and simulations for linear matrix Hamiltonian systems";
    m.attr("__version__") = kToolVersion;

    py::register_exception<SyntaxError>(m, "ExprSyntaxError");
    py::register_exception<EvalError>(m, "ExprEvalError");
    py::register_exception<NotPositiveSemidefinite>(m, "NotPositiveSemidefiniteError");
    py::register_exception<PreconditionFailed>(m, "PreconditionError");
    py::register_exception<StepSizeUnderflow>(m, "StepSizeUnderflowError");
    py::register_exception<HermitianViolation>(m, "HermitianViolationError");
    py::register_exception<SystemParseError>(m, "SystemParseErrorPy");
    py::register_exception<Error>(m, "HamoscError");

    py::class_<Expr>(m, "Expr")
        .def_static("parse", &Expr::parse, py::arg("source"))
        .def("eval", &Expr::eval, py::arg("t"))
        .def("serialize", &Expr::serialize)
        .def("__eq__", [](const Expr& a, const Expr& b) { return a == b; })
        .def("__repr__", [](const Expr& e) { return "Expr(" + e.serialize() + ")"; });

    py::class_<SystemSpec>(m, "SystemSpec")
        .def_static("load", [](const std::filesystem::path& p, double a, double b) {
            return load_system(p, {{a, b}});
        }, py::arg("path"), py::arg("span_begin") = 0.0, py::arg("span_end") = 10.0)
        .def_static("parse", [](const std::string& text, double a, double b) {
            return parse_system(text, {{a, b}});
        }, py::arg("json_text"), py::arg("span_begin") = 0.0, py::arg("span_end") = 10.0)
        .def_static("constant", &SystemSpec::constant, py::arg("A"), py::arg("B"), py::arg("C"),
                    py::arg("t0") = 0.0, py::arg("name") = std::string{})
        .def_property_readonly("n", &SystemSpec::n)
        .def_property_readonly("t0", &SystemSpec::t0)
        .def_property_readonly("name", &SystemSpec::name)
        .def_property_readonly("diagonal_B", &SystemSpec::diagonal_B)
        .def_property_readonly("zero_A", &SystemSpec::zero_A)
        .def("A", &SystemSpec::A, py::arg("t"))
        .def("B", &SystemSpec::B, py::arg("t"))
        .def("C", &SystemSpec::C, py::arg("t"));

    m.def("hermitian_sqrt", &hermitian_sqrt, py::arg("B"));
    m.def("pseudoinverse", &pseudoinverse, py::arg("M"), py::arg("rel_tol") = 1e-12);

    py::class_<Trajectory>(m, "Trajectory")
        .def_property_readonly("t", [](const Trajectory& tr) { return tr.t; })
        .def_property_readonly("sigma_min", [](const Trajectory& tr) { return tr.sigma_min; })
        .def_property_readonly("conjoined_defect",
                               [](const Trajectory& tr) { return tr.conjoined_defect; })
        .def("at", &Trajectory::at, py::arg("t"))
        .def("sigma_min_at", &Trajectory::sigma_min_at, py::arg("t"))
        .def("max_relative_defect", &Trajectory::max_relative_defect)
        .def("write_csv", [](const Trajectory& tr, const std::filesystem::path& p) {
            std::ofstream os(p);
            if (!os) throw Error("cannot open '" + p.string() + "'");
            tr.write_csv(os);
        }, py::arg("path"));

    m.def("integrate_hamiltonian",
          [](const SystemSpec& sys, const Matrix& Phi0, const Matrix& Psi0, double t_begin,
             double t_end, double rtol, double atol) {
              return integrate_hamiltonian(sys, Phi0, Psi0, t_begin, t_end, {rtol, atol});
          },
          py::arg("system"), py::arg("Phi0"), py::arg("Psi0"), py::arg("t_begin"),
          py::arg("t_end"), py::arg("rtol") = 1e-9, py::arg("atol") = 1e-12);

    m.def("detect_zeros",
          [](const Trajectory& traj, double a, double b, double sigma_tol, int scan_samples) {
              return detection_to_py(detect_zeros(traj, Window(a, b), sigma_tol, scan_samples));
          },
          py::arg("trajectory"), py::arg("a"), py::arg("b"), py::arg("sigma_tol") = -1.0,
          py::arg("scan_samples") = 4096);

    py::class_<MatrixRiccatiPath>(m, "MatrixRiccatiPath")
        .def_property_readonly("t", [](const MatrixRiccatiPath& p) { return p.t; })
        .def_property_readonly("blow_up", [](const MatrixRiccatiPath& p) -> py::object {
            if (!p.blow_up) return py::none();
            return py::make_tuple(p.blow_up->t, p.blow_up->norm);
        })
        .def("at", &MatrixRiccatiPath::at, py::arg("t"));

    m.def("integrate_matrix_riccati",
          [](const SystemSpec& sys, const Matrix& Z0, double t_begin, double t_end,
             double blowup_norm, double rtol, double atol) {
              return integrate_matrix_riccati(sys, Z0, t_begin, t_end, blowup_norm, {rtol, atol});
          },
          py::arg("system"), py::arg("Z0"), py::arg("t_begin"), py::arg("t_end"),
          py::arg("blowup_norm") = 1e8, py::arg("rtol") = 1e-9, py::arg("atol") = 1e-12);

    m.def("check",
          [](const SystemSpec& sys, const std::string& criterion, int j, py::object window,
             py::object horizon, int grid, int stages, double threshold, double quad_tol) {
              CriterionOptions opt = options_from_kwargs(grid, stages, threshold, quad_tol);
              bool windowed = !window.is_none();
              if (windowed == !horizon.is_none())
                  throw PreconditionFailed("pass exactly one of window or horizon");
              std::optional<Window> w;
              if (windowed) {
                  auto t = window.cast<std::pair<double, double>>();
                  w = Window(t.first, t.second);
              }
              double T = horizon.is_none() ? 0.0 : horizon.cast<double>();
              CriterionReport rep;
              if (criterion == "thm2.2") rep = factorization_route_window(sys, j, *w, opt);
              else if (criterion == "thm2.4") rep = unitary_route_window(sys, j, *w, opt);
              else if (criterion == "cor2.2") rep = diagonal_window_criterion(sys, j, *w, opt);
              else if (criterion == "thm2.1") rep = factorization_route_ray(sys, j, T, opt);
              else if (criterion == "thm2.3") rep = unitary_route_ray(sys, j, T, opt);
              else if (criterion == "cor2.1") rep = diagonal_ray_criterion(sys, j, T, opt);
              else throw PreconditionFailed("unknown criterion id '" + criterion + "'");
              return report_to_py(rep);
          },
          py::arg("system"), py::arg("criterion"), py::arg("j") = 1,
          py::arg("window") = py::none(), py::arg("horizon") = py::none(),
          py::arg("grid") = 2048, py::arg("stages") = 8, py::arg("threshold") = 10.0,
          py::arg("quad_tol") = 1e-9);

    m.def("empirical_oracle",
          [](const SystemSpec& sys, double a, double b, int trials, std::uint64_t seed) {
              OracleParams params;
              params.trials = trials;
              params.seed = seed;
              return json_to_py(to_json(empirical_oracle(sys, Window(a, b), params)));
          },
          py::arg("system"), py::arg("a"), py::arg("b"), py::arg("trials") = 10,
          py::arg("seed") = 1);

    m.attr("CRITERIA") = py::make_tuple("thm2.1", "thm2.2", "thm2.3", "thm2.4", "cor2.1",
                                        "cor2.2", "thm3.2", "thm3.3");
}
