#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "magbeam/baseline.hpp"
#include "magbeam/closedform.hpp"
#include "magbeam/geometry.hpp"
#include "magbeam/model.hpp"
#include "magbeam/scenario.hpp"
#include "magbeam/sdp.hpp"

namespace py = pybind11;
using namespace magbeam;

namespace {

SystemParams make_params(double omega, const std::vector<double>& r_tx,
                         double r_parasitic, double r_load, const VectorXd& m,
                         const MatrixXd& m_tx,
                         const std::optional<std::vector<double>>& v_max,
                         const std::optional<std::vector<double>>& a_max) {
    SystemParams p;
    p.omega = omega;
    for (size_t k = 0; k < r_tx.size(); ++k) {
        TxCoil c;
        c.r_ohm = r_tx[k];
        if (v_max && k < v_max->size()) c.v_max_v = (*v_max)[k];
        if (a_max && k < a_max->size()) c.a_max_a = (*a_max)[k];
        p.tx.push_back(c);
    }
    p.rx = {r_parasitic, r_load};
    p.m = m;
    p.m_tx = m_tx;
    return p;
}

py::dict solution_dict(const CurrentSolution& sol) {
    py::dict d;
    std::vector<Complex> currents(sol.currents.data(), sol.currents.data() + sol.currents.size());
    d["currents"] = currents;
    d["load_power_w"] = sol.load_power;
    d["total_power_w"] = sol.total_power;
    d["efficiency"] = sol.efficiency;
    d["status"] = std::string(to_string(sol.status));
    d["binding"] = sol.binding.binding_names();
    return d;
}

} // namespace

PYBIND11_MODULE(magbeam, mod) {
    mod.doc() = "Current design for multi-transmitter resonant wireless power transfer";

    py::register_exception<Error>(mod, "MagbeamError");

    mod.def(
        "solve",
        [](double omega, const std::vector<double>& r_tx, double r_parasitic,
           double r_load, const VectorXd& m, const MatrixXd& m_tx, double beta0,
           const std::optional<std::vector<double>>& v_max,
           const std::optional<std::vector<double>>& a_max, double tol) {
            const SystemModel model = build_system(
                make_params(omega, r_tx, r_parasitic, r_load, m, m_tx, v_max, a_max));
            return solution_dict(solve_p1(model, beta0, tol));
        },
        py::arg("omega"), py::arg("r_tx"), py::arg("r_parasitic"), py::arg("r_load"),
        py::arg("m"), py::arg("m_tx"), py::arg("beta0"), py::arg("v_max") = py::none(),
        py::arg("a_max") = py::none(), py::arg("tol") = 1e-7,
        "Minimize total source power for a target load power under peak limits");

    mod.def(
        "solve_unconstrained",
        [](double omega, const std::vector<double>& r_tx, double r_parasitic,
           double r_load, const VectorXd& m, const MatrixXd& m_tx, double beta0) {
            const SystemModel model = build_system(make_params(
                omega, r_tx, r_parasitic, r_load, m, m_tx, std::nullopt, std::nullopt));
            const ClosedFormSolution cf = solve_unconstrained(model, beta0);
            py::dict d = solution_dict(cf.solution);
            d["dual_v"] = cf.dual_v;
            return d;
        },
        py::arg("omega"), py::arg("r_tx"), py::arg("r_parasitic"), py::arg("r_load"),
        py::arg("m"), py::arg("m_tx"), py::arg("beta0"),
        "Closed-form optimum with only the load-power constraint");

    mod.def(
        "equal_current",
        [](double omega, const std::vector<double>& r_tx, double r_parasitic,
           double r_load, const VectorXd& m, const MatrixXd& m_tx, double beta0,
           const std::optional<std::vector<double>>& v_max,
           const std::optional<std::vector<double>>& a_max) {
            const SystemModel model = build_system(
                make_params(omega, r_tx, r_parasitic, r_load, m, m_tx, v_max, a_max));
            return solution_dict(equal_current_min_power(model, beta0));
        },
        py::arg("omega"), py::arg("r_tx"), py::arg("r_parasitic"), py::arg("r_load"),
        py::arg("m"), py::arg("m_tx"), py::arg("beta0"), py::arg("v_max") = py::none(),
        py::arg("a_max") = py::none(), "Equal-current benchmark at a target load power");

    mod.def(
        "max_deliverable_power",
        [](double omega, const std::vector<double>& r_tx, double r_parasitic,
           double r_load, const VectorXd& m, const MatrixXd& m_tx,
           const std::optional<std::vector<double>>& v_max,
           const std::optional<std::vector<double>>& a_max) {
            const SystemModel model = build_system(
                make_params(omega, r_tx, r_parasitic, r_load, m, m_tx, v_max, a_max));
            auto [beta_max, sol] = max_deliverable_power(model);
            py::dict d = solution_dict(sol);
            d["beta_max_w"] = beta_max;
            return d;
        },
        py::arg("omega"), py::arg("r_tx"), py::arg("r_parasitic"), py::arg("r_load"),
        py::arg("m"), py::arg("m_tx"), py::arg("v_max") = py::none(),
        py::arg("a_max") = py::none(),
        "Largest deliverable load power under the peak limits");

    mod.def(
        "solve_scenario_file",
        [](const std::string& path) {
            const Scenario s = load_scenario(path);
            return run_solve(s).to_json_text();
        },
        py::arg("path"), "Run the solve block of a scenario file; returns JSON text");

    mod.def(
        "sweep_scenario_file",
        [](const std::string& path) {
            const Scenario s = load_scenario(path);
            return sweep_to_csv(run_sweep(s), static_cast<int>(s.tx.size()));
        },
        py::arg("path"), "Run the sweep of a scenario file; returns CSV text");

    mod.def("mutual_inductance_coaxial", &mutual_inductance_coaxial, py::arg("r1"),
            py::arg("r2"), py::arg("d"),
            "Mutual inductance of coaxial circular loops (Maxwell's formula)");
    mod.def("self_inductance_loop", &self_inductance_loop, py::arg("radius"),
            py::arg("wire_radius"), py::arg("turns") = 1,
            "Thin-wire self-inductance of a circular loop");
    mod.def(
        "mutual_inductance",
        [](const Eigen::Vector3d& center_a, const Eigen::Vector3d& axis_a, double radius_a,
           int turns_a, double wire_radius_a, const Eigen::Vector3d& center_b,
           const Eigen::Vector3d& axis_b, double radius_b, int turns_b,
           double wire_radius_b, int segments) {
            const Loop a{center_a, axis_a, radius_a, turns_a, wire_radius_a};
            const Loop b{center_b, axis_b, radius_b, turns_b, wire_radius_b};
            return mutual_inductance_neumann(a, b, segments);
        },
        py::arg("center_a"), py::arg("axis_a"), py::arg("radius_a"), py::arg("turns_a"),
        py::arg("wire_radius_a"), py::arg("center_b"), py::arg("axis_b"),
        py::arg("radius_b"), py::arg("turns_b"), py::arg("wire_radius_b"),
        py::arg("segments") = 256,
        "Mutual inductance of two circular loops in general position");
}
