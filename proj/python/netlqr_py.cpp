#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "netlqr/analysis.hpp"
#include "netlqr/errors.hpp"

namespace py = pybind11;
using namespace netlqr;

namespace {

py::dict decay_dict(const DecayConstants& dc) {
  py::dict d;
  d["log_gamma_F"] = dc.log_gamma_F;
  d["log_gamma_G"] = dc.log_gamma_G;
  d["log_L_P"] = dc.log_L_P;
  d["log_L_H"] = dc.log_L_H;
  d["log_mu_bar"] = dc.log_mu_bar;
  d["log_gamma_H"] = dc.log_gamma_H;
  d["log_Upsilon"] = dc.log_Upsilon;
  d["log_rho"] = dc.rho.log_value;
  d["log_one_minus_rho"] = dc.rho.log_complement;
  return d;
}

}  // namespace

PYBIND11_MODULE(_netlqr, m) {
  m.doc() = "Distributed LQR analysis for networked systems.";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<NonConvergence>(m, "NonConvergence", base);
  py::register_exception<SizeGuardError>(m, "SizeGuardError", base);

  py::class_<NetworkedSystem>(m, "NetworkedSystem")
      .def_property_readonly("num_nodes", &NetworkedSystem::num_nodes)
      .def_property_readonly("total_states", &NetworkedSystem::total_states)
      .def_property_readonly("total_inputs", &NetworkedSystem::total_inputs)
      .def_property_readonly("kind", [](const NetworkedSystem& s) { return std::string(to_string(s.kind)); })
      .def_property_readonly("edges", [](const NetworkedSystem& s) { return s.graph.edges; })
      .def("dense", [](const NetworkedSystem& s) {
        const DenseSystem d = assemble_dense(s);
        return py::make_tuple(d.A, d.B, d.Q, d.R);
      }, "Assembled (A, B, Q, R).");

  m.def("build_hvac", &build_hvac, py::arg("rows"), py::arg("cols"), py::arg("dt") = 1.0,
        py::arg("k") = 0.05, py::arg("eta1") = 1.0, py::arg("eta2") = 1.0, py::arg("eta3") = 0.0);
  m.def("load_system", [](const std::string& path) { return build_system(load_config(path)); },
        py::arg("config"), "Build the model described by a config file.");
  m.def("parse_block_file", [](const std::string& text) { return parse_block_file(text); });

  m.def("solve_dare", [](const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R) {
    const DareSolution s = solve_dare(A, B, Q, R);
    return py::make_tuple(s.P, s.iterations);
  }, py::arg("A"), py::arg("B"), py::arg("Q"), py::arg("R"), "Returns (P, iterations).");
  m.def("optimal_gain", py::overload_cast<const Matrix&, const Matrix&, const Matrix&, const Matrix&>(&optimal_gain),
        py::arg("A"), py::arg("B"), py::arg("R"), py::arg("P"));
  m.def("solve_discrete_lyapunov", &solve_discrete_lyapunov, py::arg("Phi"), py::arg("M"));

  m.def("truncation_errors", [](const NetworkedSystem& sys) {
    const DenseSystem d = assemble_dense(sys);
    const DareSolution s = solve_dare(d.A, d.B, d.Q, d.R);
    const GainMatrix K = optimal_gain(sys, d, s.P);
    const DistanceMatrix dist = all_pairs_distances(sys.graph);
    std::vector<double> out;
    for (int kappa = 0; kappa <= diameter(dist); ++kappa)
      out.push_back(truncation_error(K, truncate_gain(K, dist, kappa)).absolute);
    return out;
  }, py::arg("system"), "||K* - K^kappa|| for kappa = 0..diameter.");

  m.def("decay_constants", [](double L, double alpha, double gamma) {
    return decay_dict(decay_constants({L, alpha, gamma}));
  }, py::arg("L"), py::arg("alpha"), py::arg("gamma"), "Log-domain decay constants.");

  m.def("sweep", [](const std::string& config, std::vector<double> etas) {
    SweepOptions o;
    o.etas = std::move(etas);
    o.bound_audit = false;
    const SweepResult r = run_sweep(load_config(config), o);
    py::list rows;
    for (const auto& row : r.rows) {
      py::dict d;
      d["eta"] = row.eta;
      d["kappa"] = row.kappa;
      d["rel_trunc_err"] = row.rel_trunc_err ? py::cast(*row.rel_trunc_err) : py::none();
      d["spectral_radius"] = row.spectral_radius;
      d["rel_opt_gap"] = row.rel_opt_gap ? py::cast(*row.rel_opt_gap) : py::none();
      d["stable"] = row.stable;
      rows.append(d);
    }
    return rows;
  }, py::arg("config"), py::arg("etas") = std::vector<double>{});

  m.def("constants_report", [](const std::string& config) {
    std::ostringstream ss;
    write_constants_report(run_constants_audit(load_config(config)), ss);
    return ss.str();
  }, py::arg("config"));

  m.def("oracle_check", [](const std::string& config, std::optional<int> T) {
    const OracleReport r = run_oracle_check(load_config(config), T);
    py::dict d;
    d["horizon"] = r.T;
    d["dimension"] = r.dim;
    d["discrepancy"] = r.discrepancy;
    d["horizon_drift"] = r.horizon_drift ? py::cast(*r.horizon_drift) : py::none();
    d["bandwidth_same_stage"] = r.bandwidth_same_stage;
    d["bandwidth_transition_stage"] = r.bandwidth_transition_stage;
    return d;
  }, py::arg("config"), py::arg("horizon") = py::none());
}
