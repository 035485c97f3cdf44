#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qmpi/engine.hpp"
#include "qmpi/nqasm.hpp"
#include "qmpi/programs.hpp"
#include "qmpi/runtime.hpp"

namespace py = pybind11;

namespace {

qmpi::SchedulerMode scheduler_from_name(const std::string& name) {
    if (name == "round-robin-deterministic") return qmpi::SchedulerMode::RoundRobinDeterministic;
    if (name == "concurrent") return qmpi::SchedulerMode::Concurrent;
    throw qmpi::Error(qmpi::ErrorCode::BadLaunchSpec,
                      "scheduler must be 'round-robin-deterministic' or 'concurrent', got '" +
                          name + "'");
}

qmpi::LaunchSpec make_spec(const std::string& program, int num_ranks,
                           std::optional<std::uint64_t> seed, const std::string& scheduler,
                           std::optional<std::string> config,
                           std::optional<std::string> trace,
                           const std::map<std::string, std::string>& args) {
    qmpi::LaunchSpec spec;
    spec.program = program;
    spec.num_ranks = num_ranks;
    spec.seed = seed;
    spec.scheduler = scheduler_from_name(scheduler);
    spec.config_path = std::move(config);
    spec.trace_path = std::move(trace);
    spec.args = args;
    return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "SPMD runtime for distributed quantum programs over a simulated "
              "entanglement fabric";

    qmpi::programs::ensure_builtin_programs();

    py::register_exception<qmpi::Error>(m, "Error");

    py::class_<qmpi::QubitHandle>(m, "QubitHandle")
        .def_readonly("id", &qmpi::QubitHandle::id)
        .def_readonly("owner", &qmpi::QubitHandle::owner)
        .def("__repr__", [](const qmpi::QubitHandle& h) {
            return "QubitHandle(id=" + std::to_string(h.id) +
                   ", owner=" + std::to_string(h.owner) + ")";
        });

    py::class_<qmpi::StateEngine>(m, "Engine")
        .def(py::init<int, std::uint64_t>(), py::arg("qubit_cap") = qmpi::kDefaultQubitCap,
             py::arg("seed") = 0)
        .def("alloc", &qmpi::StateEngine::alloc_qubit, py::arg("owner") = 0)
        .def("h",
             [](qmpi::StateEngine& e, qmpi::QubitHandle q) {
                 e.apply_gate(qmpi::GateKind::H, {&q, 1});
             })
        .def("x",
             [](qmpi::StateEngine& e, qmpi::QubitHandle q) {
                 e.apply_gate(qmpi::GateKind::X, {&q, 1});
             })
        .def("z",
             [](qmpi::StateEngine& e, qmpi::QubitHandle q) {
                 e.apply_gate(qmpi::GateKind::Z, {&q, 1});
             })
        .def("cnot",
             [](qmpi::StateEngine& e, qmpi::QubitHandle control, qmpi::QubitHandle target) {
                 const qmpi::QubitHandle pair[2] = {control, target};
                 e.apply_gate(qmpi::GateKind::Cnot, {pair, 2});
             })
        .def("measure", &qmpi::StateEngine::measure)
        .def("free", &qmpi::StateEngine::free_qubit)
        .def("bell", &qmpi::StateEngine::create_bell, py::arg("owner_a") = 0,
             py::arg("owner_b") = 1)
        .def("ghz",
             [](qmpi::StateEngine& e, const std::vector<int>& owners) {
                 return e.create_ghz({owners.data(), owners.size()});
             })
        .def("snapshot",
             [](const qmpi::StateEngine& e, const std::vector<qmpi::QubitHandle>& qubits) {
                 return e.snapshot_amplitudes({qubits.data(), qubits.size()});
             })
        .def("is_live", &qmpi::StateEngine::is_live)
        .def_property_readonly("live_count", &qmpi::StateEngine::live_count)
        .def_property_readonly("norm", &qmpi::StateEngine::norm);

    py::class_<qmpi::RankReport>(m, "RankReport")
        .def_readonly("output", &qmpi::RankReport::output)
        .def_readonly("bits", &qmpi::RankReport::bits)
        .def_readonly("ok", &qmpi::RankReport::ok)
        .def_readonly("error", &qmpi::RankReport::error);

    py::class_<qmpi::RunReport>(m, "RunReport")
        .def_readonly("ranks", &qmpi::RunReport::ranks)
        .def_readonly("ok", &qmpi::RunReport::ok)
        .def_readonly("failed_rank", &qmpi::RunReport::failed_rank)
        .def_readonly("error", &qmpi::RunReport::error)
        .def_readonly("wall_seconds", &qmpi::RunReport::wall_seconds)
        .def("bitstring", &qmpi::RunReport::bitstring);

    m.def("list_programs", [] { return qmpi::ProgramRegistry::global().names(); });

    m.def(
        "launch",
        [](const std::string& program, int num_ranks, std::optional<std::uint64_t> seed,
           const std::string& scheduler, std::optional<std::string> config,
           std::optional<std::string> trace, const std::map<std::string, std::string>& args) {
            const qmpi::LaunchSpec spec = make_spec(program, num_ranks, seed, scheduler,
                                                    std::move(config), std::move(trace), args);
            py::gil_scoped_release release;
            return qmpi::launch(spec);
        },
        py::arg("program"), py::arg("num_ranks") = 1, py::arg("seed") = py::none(),
        py::arg("scheduler") = "round-robin-deterministic", py::arg("config") = py::none(),
        py::arg("trace") = py::none(), py::arg("args") = std::map<std::string, std::string>{},
        "Run a registered program once and return its report.");

    m.def(
        "run_shots",
        [](const std::string& program, int num_ranks, int shots,
           std::optional<std::uint64_t> seed, const std::string& scheduler,
           std::optional<std::string> config, const std::map<std::string, std::string>& args) {
            const qmpi::LaunchSpec spec = make_spec(program, num_ranks, seed, scheduler,
                                                    std::move(config), std::nullopt, args);
            std::map<std::string, int> counts;
            {
                py::gil_scoped_release release;
                counts = qmpi::run_shots(spec, shots).counts;
            }
            return counts;
        },
        py::arg("program"), py::arg("num_ranks") = 1, py::arg("shots") = 1,
        py::arg("seed") = py::none(), py::arg("scheduler") = "round-robin-deterministic",
        py::arg("config") = py::none(), py::arg("args") = std::map<std::string, std::string>{},
        "Repeat a launch with derived seeds; returns {bitstring: count}.");

    m.def(
        "canonicalize_assembly",
        [](const std::string& text) { return qmpi::nqasm::disassemble(qmpi::nqasm::parse(text)); },
        py::arg("text"),
        "Parse assembly text and render it back in canonical spelling.");
}
