#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <sstream>

#include "leapgrid/actions.hpp"
#include "leapgrid/datagen.hpp"
#include "leapgrid/errors.hpp"
#include "leapgrid/grid.hpp"
#include "leapgrid/leapnet.hpp"
#include "leapgrid/matpower.hpp"
#include "leapgrid/powerflow.hpp"
#include "leapgrid/train.hpp"

namespace py = pybind11;
using namespace leapgrid;

namespace {

Tensor2 tensor_from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw ShapeError("expected a 2-D array");
    Tensor2 t(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    std::copy(a.data(), a.data() + t.size(), t.data.begin());
    return t;
}

py::array_t<double> tensor_to_numpy(const Tensor2& t) {
    py::array_t<double> a({t.rows, t.cols});
    std::copy(t.data.begin(), t.data.end(), a.mutable_data());
    return a;
}

TopologyVector tau_from_list(const std::vector<int>& bits) {
    TopologyVector tau;
    tau.bits.reserve(bits.size());
    for (int b : bits) tau.bits.push_back(static_cast<std::uint8_t>(b != 0));
    return tau;
}

}  // namespace

PYBIND11_MODULE(leapgrid, m) {
    m.doc() = "Power-grid flow surrogate: AC/DC power flow, topology actions, "
              "LEAP-net and baseline models, dataset protocol.";

    py::register_exception<ParseError>(m, "ParseError");
    py::register_exception<ValidationError>(m, "ValidationError");
    py::register_exception<TopologyError>(m, "TopologyError");
    py::register_exception<SolveError>(m, "SolveError");
    py::register_exception<ConvergenceError>(m, "ConvergenceError");
    py::register_exception<ShapeError>(m, "ShapeError");
    py::register_exception<NumericsError>(m, "NumericsError");
    py::register_exception<DataGenError>(m, "DataGenError");
    py::register_exception<ArtifactError>(m, "ArtifactError");

    py::class_<GridCase>(m, "GridCase")
        .def_property_readonly("name", [](const GridCase& g) { return g.name; })
        .def_property_readonly("base_mva", [](const GridCase& g) { return g.base_mva; })
        .def_property_readonly("n_buses", [](const GridCase& g) { return g.buses.size(); })
        .def_property_readonly("n_branches", [](const GridCase& g) { return g.branches.size(); })
        .def_property_readonly("n_injections", [](const GridCase& g) { return g.injections.size(); })
        .def("to_json", [](const GridCase& g) { return grid_to_json(g).dump(); })
        .def("__repr__", [](const GridCase& g) {
            std::ostringstream os;
            os << "<GridCase " << g.name << ": " << g.buses.size() << " buses, "
               << g.branches.size() << " branches, " << g.injections.size() << " injections>";
            return os.str();
        });

    py::class_<ActionDictionary>(m, "ActionDictionary")
        .def("__len__", [](const ActionDictionary& d) { return d.size(); })
        .def("to_json", [](const ActionDictionary& d) { return dictionary_to_json(d).dump(); })
        .def_property_readonly("hash", [](const ActionDictionary& d) { return dictionary_hash(d); });

    py::class_<AcSolution>(m, "AcSolution")
        .def_readonly("vm", &AcSolution::vm)
        .def_readonly("va", &AcSolution::va)
        .def_readonly("flows_mw", &AcSolution::flows_mw)
        .def_readonly("iterations", &AcSolution::iterations)
        .def_readonly("max_mismatch_pu", &AcSolution::max_mismatch_pu);

    m.def("parse_matpower_case", [](const std::string& text) { return parse_matpower_case(text); },
          py::arg("text"), "Parse a Matpower-style case body into a GridCase.");
    m.def("load_case", &load_matpower_file, py::arg("path"));
    m.def("grid_from_json",
          [](const std::string& text) { return grid_from_json(nlohmann::ordered_json::parse(text)); },
          py::arg("text"));

    m.def("enumerate_actions",
          [](const GridCase& g, bool line_disconnects, bool bus_splits, int min_split_elements) {
              ActionConfig cfg;
              cfg.line_disconnects = line_disconnects;
              cfg.bus_splits = bus_splits;
              cfg.min_split_elements = min_split_elements;
              return enumerate_actions(g, cfg);
          },
          py::arg("grid"), py::arg("line_disconnects") = true, py::arg("bus_splits") = true,
          py::arg("min_split_elements") = 4);

    m.def("apply_topology",
          [](const GridCase& g, const std::vector<int>& tau, const ActionDictionary& dict) {
              return apply_topology(g, tau_from_list(tau), dict);
          },
          py::arg("grid"), py::arg("tau"), py::arg("dictionary"));

    m.def("nominal_p", [](const GridCase& g) { return nominal_injection(g).p_mw; }, py::arg("grid"));

    m.def("dc_solve",
          [](const GridCase& g, const std::vector<double>& p) {
              return dc_solve(g, injection_from_p(g, p));
          },
          py::arg("grid"), py::arg("p_mw"),
          "DC linear approximation; load reactive power is irrelevant here.");

    m.def("ac_solve",
          [](const GridCase& g, const std::vector<double>& p, double tol, int max_iter) {
              return ac_solve(g, injection_from_p(g, p), tol, max_iter);
          },
          py::arg("grid"), py::arg("p_mw"), py::arg("tol") = 1e-8, py::arg("max_iter") = 20,
          "Newton-Raphson AC power flow from a flat start; load q follows the "
          "nominal power factor.");

    m.def("oracle",
          [](const GridCase& g, const std::vector<int>& tau, const ActionDictionary& dict,
             const std::vector<double>& p) {
              return oracle(g, tau_from_list(tau), dict, injection_from_p(g, p));
          },
          py::arg("grid"), py::arg("tau"), py::arg("dictionary"), py::arg("p_mw"));

    py::class_<LeapNet>(m, "LeapNet")
        .def_static(
            "create",
            [](int n_x, int n_tau, int n_y, int hidden, int units_per_action, std::uint64_t seed) {
                LeapNetConfig cfg;
                cfg.n_x = n_x;
                cfg.n_tau = n_tau;
                cfg.n_y = n_y;
                cfg.hidden = hidden;
                cfg.units_per_action = units_per_action;
                return LeapNet::init(cfg, seed);
            },
            py::arg("n_x"), py::arg("n_tau"), py::arg("n_y"), py::arg("hidden") = 0,
            py::arg("units_per_action") = 2, py::arg("seed") = 1)
        .def("predict",
             [](const LeapNet& net, const py::array_t<double>& x, const py::array_t<double>& tau) {
                 return tensor_to_numpy(net.predict(tensor_from_numpy(x), tensor_from_numpy(tau)));
             })
        .def("predict_reference",
             [](const LeapNet& net, const py::array_t<double>& x) {
                 return tensor_to_numpy(net.predict_reference(tensor_from_numpy(x)));
             })
        .def("param_count", &LeapNet::param_count)
        .def("superposition_check",
             [](const LeapNet& net, const std::vector<double>& x, std::size_t i, std::size_t j) {
                 return superposition_check(net, x, i, j);
             });

    py::class_<BaselineNet>(m, "BaselineNet")
        .def_static(
            "create",
            [](int n_x, int n_tau, int n_y, int hidden, std::uint64_t seed) {
                BaselineConfig cfg;
                cfg.n_x = n_x;
                cfg.n_tau = n_tau;
                cfg.n_y = n_y;
                if (hidden <= 0) {
                    LeapNetConfig leap_cfg;
                    leap_cfg.n_x = n_x;
                    leap_cfg.n_tau = n_tau;
                    leap_cfg.n_y = n_y;
                    cfg.hidden = baseline_parity_hidden(leap_cfg);
                } else {
                    cfg.hidden = hidden;
                }
                return BaselineNet::init(cfg, seed);
            },
            py::arg("n_x"), py::arg("n_tau"), py::arg("n_y"), py::arg("hidden") = 0,
            py::arg("seed") = 1)
        .def("predict",
             [](const BaselineNet& net, const py::array_t<double>& x, const py::array_t<double>& tau) {
                 return tensor_to_numpy(net.predict(tensor_from_numpy(x), tensor_from_numpy(tau)));
             })
        .def("param_count", &BaselineNet::param_count);

    m.def("load_checkpoint_model",
          [](const std::string& path) -> py::object {
              LoadedCheckpoint ck = load_checkpoint(path);
              if (auto* leap = std::get_if<LeapNet>(&ck.model)) return py::cast(*leap);
              return py::cast(std::get<BaselineNet>(ck.model));
          },
          py::arg("path"));

    m.def("read_dataset_arrays",
          [](const std::string& path) {
              const Dataset ds = read_dataset(path);
              const DataMatrices mats = to_matrices(ds);
              py::dict header;
              header["grid_name"] = ds.header.grid_name;
              header["dict_hash"] = ds.header.dict_hash;
              header["seed"] = ds.header.seed;
              header["rows"] = ds.rows.size();
              return py::make_tuple(header, tensor_to_numpy(mats.x), tensor_to_numpy(mats.tau),
                                    tensor_to_numpy(mats.y));
          },
          py::arg("path"), "Dataset file -> (header, x, tau, y) numpy arrays.");

    m.attr("__version__") = "0.1.0";
}
