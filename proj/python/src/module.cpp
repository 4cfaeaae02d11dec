#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ahfl/analytics.hpp"
#include "ahfl/config_file.hpp"
#include "ahfl/engine.hpp"
#include "ahfl/errors.hpp"
#include "ahfl/fl_core.hpp"
#include "ahfl/timing_sim.hpp"

namespace py = pybind11;
using namespace ahfl;

namespace {

// Flattened (client_id, event_index, time, staleness) rows, sorted by client.
py::dict staleness_columns(const StalenessTrace& trace) {
  std::vector<int> client;
  std::vector<std::int64_t> index, staleness;
  std::vector<double> time;
  for (std::size_t c = 0; c < trace.per_client.size(); ++c) {
    for (const auto& s : trace.per_client[c]) {
      client.push_back(static_cast<int>(c));
      index.push_back(s.event_index);
      time.push_back(s.time);
      staleness.push_back(s.staleness);
    }
  }
  py::dict d;
  d["client_id"] = client;
  d["event_index"] = index;
  d["sim_time"] = time;
  d["staleness"] = staleness;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ahfl, m) {
  m.doc() = "Asynchronous hierarchical federated learning simulator";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);
  py::register_exception<InsufficientDataError>(m, "InsufficientDataError", PyExc_ValueError);

  py::class_<TopologyConfig>(m, "TopologyConfig")
      .def(py::init<>())
      .def_static("from_fractions", &TopologyConfig::from_fractions, py::arg("n"), py::arg("e"),
                  py::arg("alpha") = 0.5, py::arg("beta") = 0.5)
      .def_static("from_quorums", &TopologyConfig::from_quorums, py::arg("n"), py::arg("e"),
                  py::arg("m"), py::arg("k"))
      .def_readonly("n", &TopologyConfig::n)
      .def_readonly("e", &TopologyConfig::e)
      .def_readonly("l", &TopologyConfig::l)
      .def_readonly("m", &TopologyConfig::m)
      .def_readonly("k", &TopologyConfig::k)
      .def_readonly("alpha", &TopologyConfig::alpha)
      .def_readonly("beta", &TopologyConfig::beta)
      .def(py::self == py::self)
      .def("__repr__", [](const TopologyConfig& t) {
        return "TopologyConfig(n=" + std::to_string(t.n) + ", e=" + std::to_string(t.e) +
               ", l=" + std::to_string(t.l) + ", m=" + std::to_string(t.m) +
               ", k=" + std::to_string(t.k) + ")";
      });

  py::class_<TimingConfig>(m, "TimingConfig")
      .def(py::init([](double lambda, double c, double mu_tilde) {
             TimingConfig tc{lambda, c, mu_tilde};
             tc.validate();
             return tc;
           }),
           py::arg("lam") = 1.0, py::arg("c") = 1.0, py::arg("mu_tilde") = 1.0)
      .def_readwrite("lam", &TimingConfig::lambda)
      .def_readwrite("c", &TimingConfig::c)
      .def_readwrite("mu_tilde", &TimingConfig::mu_tilde);

  py::class_<LearningConfig>(m, "LearningConfig")
      .def(py::init<>())
      .def_readwrite("rho", &LearningConfig::rho)
      .def_readwrite("eta", &LearningConfig::eta)
      .def_readwrite("t_tilde", &LearningConfig::t_tilde)
      .def_readwrite("sigma_exponent", &LearningConfig::sigma_exponent)
      .def_readwrite("batch", &LearningConfig::batch);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("topology", &RunConfig::topology)
      .def_readwrite("timing", &RunConfig::timing)
      .def_readwrite("learning", &RunConfig::learning)
      .def_readwrite("d", &RunConfig::d)
      .def_readwrite("dataset_size", &RunConfig::dataset_size)
      .def_readwrite("T", &RunConfig::T)
      .def_readwrite("seed", &RunConfig::seed)
      .def("validate", &RunConfig::validate);

  m.def("parse_config", [](const std::string& text) { return parse_config(text).run; },
        py::arg("text"), "Parse config text into a RunConfig.");
  m.def("write_config", [](const RunConfig& cfg) { return write_config(SystemConfig{cfg}); },
        py::arg("config"));

  // Closed forms.
  m.def("harmonic", &analytics::harmonic, py::arg("j"));
  m.def("expected_availability_wait", &analytics::expected_availability_wait, py::arg("timing"),
        py::arg("l"), py::arg("m"));
  m.def("expected_uplink_wait", &analytics::expected_uplink_wait, py::arg("timing"), py::arg("m"),
        py::arg("k"));
  m.def("expected_cycle_time", &analytics::expected_cycle_time, py::arg("timing"), py::arg("topology"));
  m.def("expected_client_update_time", &analytics::expected_client_update_time, py::arg("timing"),
        py::arg("topology"));
  m.def("expected_cloud_rate", &analytics::expected_cloud_rate, py::arg("timing"), py::arg("topology"));
  m.def("expected_staleness", &analytics::expected_staleness, py::arg("topology"));
  m.def("ideal_expected_staleness", &analytics::ideal_expected_staleness, py::arg("topology"));
  m.def("staleness_bound_probability", &analytics::staleness_bound_probability, py::arg("topology"),
        py::arg("M"));
  m.def("min_bound_for_confidence",
        py::overload_cast<const TopologyConfig&, double>(&analytics::min_bound_for_confidence),
        py::arg("topology"), py::arg("epsilon"));

  // Timing simulation.
  py::class_<TimingResult>(m, "TimingResult")
      .def_property_readonly("cloud_version", [](const TimingResult& r) { return r.ledger.cloud_version; })
      .def_property_readonly("total_time", [](const TimingResult& r) { return r.trace.total_time; })
      .def_readonly("cloud_gaps", &TimingResult::cloud_gaps)
      .def("staleness", [](const TimingResult& r) { return staleness_columns(r.trace); })
      .def("mean_staleness",
           [](const TimingResult& r, double burn_in) { return empirical_mean_staleness(r.trace, burn_in); },
           py::arg("burn_in") = 0.1)
      .def("cloud_rate", [](const TimingResult& r) { return empirical_cloud_rate(r.cloud_gaps); })
      .def("mean_cycle_time",
           [](const TimingResult& r, int edge) { return empirical_mean_cycle_time(r.cycles, edge); },
           py::arg("edge") = -1)
      .def("bound_satisfaction",
           [](const TimingResult& r, std::int64_t M, double burn_in) {
             return empirical_bound_satisfaction(r.trace, M, burn_in);
           },
           py::arg("M"), py::arg("burn_in") = 0.0);

  m.def("run_timing_sim", &run_timing_sim, py::arg("topology"), py::arg("timing"),
        py::arg("num_updates"), py::arg("seed"), py::call_guard<py::gil_scoped_release>());

  // Learning.
  py::class_<Dataset>(m, "Dataset")
      .def_readonly("X", &Dataset::X)
      .def_readonly("y", &Dataset::y)
      .def_readonly("w_star", &Dataset::w_star)
      .def_readonly("shards", &Dataset::shards)
      .def_readonly("seed", &Dataset::seed)
      .def_property_readonly("size", &Dataset::size)
      .def_property_readonly("dim", &Dataset::dim);

  m.def("generate_dataset", &generate_dataset, py::arg("d"), py::arg("size"), py::arg("n"),
        py::arg("seed"));
  m.def("loss", py::overload_cast<const ModelVector&, const Dataset&>(&loss), py::arg("theta"),
        py::arg("dataset"));
  m.def("gradient", py::overload_cast<const ModelVector&, const Dataset&>(&gradient),
        py::arg("theta"), py::arg("dataset"));
  m.def("smoothness_constant", &smoothness_constant, py::arg("dataset"), py::arg("rel_tol") = 1e-8,
        py::arg("max_iter") = 200000);
  m.def("staleness_weight", &staleness_weight, py::arg("version_gap"), py::arg("exponent"));

  py::class_<RunResult>(m, "RunResult")
      .def_property_readonly("loss",
                             [](const RunResult& r) {
                               std::vector<double> v;
                               for (const auto& p : r.loss_trace) v.push_back(p.loss);
                               return v;
                             })
      .def_property_readonly("grad_norm_sq",
                             [](const RunResult& r) {
                               std::vector<double> v;
                               for (const auto& p : r.loss_trace) v.push_back(p.grad_norm_sq);
                               return v;
                             })
      .def_property_readonly("sim_time",
                             [](const RunResult& r) {
                               std::vector<double> v;
                               for (const auto& p : r.loss_trace) v.push_back(p.sim_time);
                               return v;
                             })
      .def_readonly("min_grad_norm_sq", &RunResult::min_grad_norm_sq)
      .def_readonly("final_model", &RunResult::final_model)
      .def_readonly("cloud_gaps", &RunResult::cloud_gaps)
      .def("staleness", [](const RunResult& r) { return staleness_columns(r.staleness_trace); })
      .def("mean_staleness",
           [](const RunResult& r, double burn_in) {
             return empirical_mean_staleness(r.staleness_trace, burn_in);
           },
           py::arg("burn_in") = 0.1);

  m.def("run", py::overload_cast<const RunConfig&>(&run), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("min_gradient_norm", &min_gradient_norm, py::arg("result"), py::arg("stride") = 1);
  m.def("updates_to_reach", &updates_to_reach, py::arg("result"), py::arg("fraction"));
}
