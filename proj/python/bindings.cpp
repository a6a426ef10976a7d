#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "oswitch/commands.hpp"
#include "oswitch/config.hpp"
#include "oswitch/domain.hpp"
#include "oswitch/errors.hpp"
#include "oswitch/rbsde.hpp"
#include "oswitch/reflection.hpp"

namespace py = pybind11;
using namespace oswitch;

namespace {

ControlledTransitionModel builtin_by_name(const std::string& name, const py::kwargs& kw) {
  auto num = [&](const char* key, double def) { return kw.contains(key) ? kw[key].cast<double>() : def; };
  if (name == "example1") return builtin::example1();
  if (name == "example2") return builtin::example2(num("c", 1.0));
  if (name == "example3")
    return builtin::example3(kw.contains("grid") ? kw["grid"].cast<int>() : 101,
                             kw.contains("closed_form") ? kw["closed_form"].cast<bool>() : true);
  if (name == "signed-two-control") return builtin::signed_two_control();
  if (name == "symmetric") return builtin::symmetric(kw.contains("d") ? kw["d"].cast<int>() : 3, num("c", 1.0));
  if (name == "dim3")
    return builtin::dim3(num("p", 0.5), num("q", 0.5), num("r", 0.5),
                         kw.contains("c") ? kw["c"].cast<Vector>() : Vector(Vector::Ones(3)));
  if (name == "dim4") return builtin::dim4();
  throw ConfigError("unknown builtin model '" + name + "'");
}

py::dict certificate_dict(const NonEmptinessCertificate& c) {
  py::dict d;
  d["verdict"] = to_string(c.verdict);
  d["lp_slack"] = c.lpSlack;
  d["lp_feasible"] = c.lpFeasible;
  d["lp_strict"] = c.lpStrict;
  d["anchor"] = c.anchor;
  d["uncontrolled"] = c.uncontrolled;
  if (c.uncontrolled) {
    d["conditions"] = py::dict(py::arg("lp") = c.condLp, py::arg("some_pair") = c.condSomePair,
                               py::arg("mu_cbar") = c.condMuCbar, py::arg("all_pairs") = c.condAllPairs);
    d["conditions_agree"] = c.conditionsAgree;
  }
  if (c.mu) d["mu"] = *c.mu;
  if (c.muChat) d["mu_chat"] = *c.muChat;
  if (c.Chat) d["C_hat"] = *c.Chat;
  d["notes"] = c.notes;
  return d;
}

py::dict h_certificate_dict(const HCertificate& c) {
  py::dict d;
  d["passed"] = c.passed;
  d["construction"] = to_string(c.construction);
  d["eta_min"] = c.etaMin;
  d["cone_max_defect"] = c.coneMaxDefect;
  d["symmetry_defect"] = c.symmetryDefect;
  d["L"] = c.L;
  d["samples"] = c.samples;
  d["failures"] = c.failures;
  d["record"] = c.to_record();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Oblique reflection and switching on Markov-chain domains";

  auto base = py::register_exception<Error>(m, "OswitchError");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<GeometryError>(m, "GeometryError", base.ptr());
  py::register_exception<StabilityError>(m, "StabilityError", base.ptr());
  py::register_exception<CapabilityError>(m, "CapabilityError", base.ptr());

  py::class_<ControlledTransitionModel>(m, "Model")
      .def_readonly("name", &ControlledTransitionModel::name)
      .def_readonly("d", &ControlledTransitionModel::d)
      .def_readonly("controls", &ControlledTransitionModel::controls)
      .def_readonly("P", &ControlledTransitionModel::P)
      .def_readonly("costs", &ControlledTransitionModel::cbar)
      .def_readonly("closed_form_obstacle", &ControlledTransitionModel::closedFormObstacle)
      .def("__repr__", [](const ControlledTransitionModel& mm) {
        return "<Model " + mm.name + " d=" + std::to_string(mm.d) +
               " controls=" + std::to_string(mm.control_count()) + ">";
      });

  m.def("builtin_model", &builtin_by_name, py::arg("name"),
        "Built-in model by name: example1, example2, example3, signed-two-control, symmetric, dim3, dim4.");
  m.def(
      "model_from_arrays",
      [](std::vector<Matrix> P, std::vector<Vector> costs, std::vector<double> controls, std::string name) {
        ControlledTransitionModel mm;
        mm.name = std::move(name);
        if (P.empty()) throw ConfigError("model_from_arrays: no transition matrices");
        mm.d = P.front().rows();
        if (controls.empty())
          for (std::size_t u = 0; u < P.size(); ++u) controls.push_back(static_cast<double>(u));
        mm.controls = std::move(controls);
        mm.P = std::move(P);
        mm.cbar = std::move(costs);
        mm.check();
        return mm;
      },
      py::arg("P"), py::arg("costs"), py::arg("controls") = std::vector<double>{}, py::arg("name") = "custom");

  m.def("nonemptiness_report", [](const ControlledTransitionModel& mm) { return certificate_dict(nonemptiness_report(mm)); });
  m.def("membership", [](const Vector& y, const ControlledTransitionModel& mm) {
    const auto r = membership(y, mm);
    return py::make_tuple(r.member, r.slack);
  });
  m.def("oblique_project", [](const Vector& y, const ControlledTransitionModel& mm) {
    const auto r = oblique_project(y, mm);
    if (!r.converged) throw StabilityError("oblique_project: did not converge");
    return r.z;
  });
  m.def("slice_vertices", py::overload_cast<const ControlledTransitionModel&>(&slice_vertices));
  m.def("slice_polygon", [](const ControlledTransitionModel& mm, int resolution) {
    const auto pts = emit_slice_polygon(mm, resolution);
    Matrix out(static_cast<Index>(pts.size()), mm.d);
    for (std::size_t k = 0; k < pts.size(); ++k) out.row(static_cast<Index>(k)) = pts[k].transpose();
    return out;
  }, py::arg("model"), py::arg("resolution") = 180);

  m.def(
      "build_h",
      [](const std::string& construction, py::kwargs kw) {
        const Construction c = parse_construction(construction);
        switch (c) {
          case Construction::markovian:
            if (!kw.contains("model")) throw ConfigError("build_h: markovian needs model=");
            return build_H_markovian(kw["model"].cast<ControlledTransitionModel>());
          case Construction::dim3: {
            auto num = [&](const char* key) { return kw.contains(key) ? kw[key].cast<double>() : 0.5; };
            return build_H_dim3(num("p"), num("q"), num("r"),
                                kw.contains("c") ? kw["c"].cast<Vector>() : Vector(Vector::Ones(3)));
          }
          case Construction::symmetric:
            return build_H_symmetric(kw.contains("d") ? kw["d"].cast<int>() : 3);
          case Construction::controlled_dim3:
            return build_H_controlled_dim3_vertices();
        }
        throw ConfigError("build_h: unknown construction");
      },
      py::arg("construction"));
  py::class_<ReflectionField>(m, "ReflectionField")
      .def_readonly("vertices", &ReflectionField::vertices)
      .def_readonly("vertex_matrices", &ReflectionField::vertexMatrices)
      .def_readonly("vertex_only", &ReflectionField::vertexOnly)
      .def("__call__", &ReflectionField::evaluate, py::arg("y"));
  m.def("verify_h", [](const ReflectionField& f, int samples, std::uint64_t seed) {
    return h_certificate_dict(verify_H(f, samples, seed));
  }, py::arg("field"), py::arg("samples") = 1000, py::arg("seed") = 1);

  m.def(
      "solve_config",
      [](const std::string& path) {
        const auto cfg = load_config(path);
        const auto model = config_model(cfg);
        const auto lattice = build_lattice(config_sde(cfg), config_lattice(cfg));
        SolveOptions so;
        so.interiorPoint = config_run(cfg).interiorPoint;
        const auto sol = solve(model, lattice, config_driver(cfg), so);
        py::dict d;
        d["root"] = sol.root();
        d["x"] = sol.x;
        d["dt"] = sol.dt;
        d["Y"] = py::array_t<double>({sol.steps + 1, sol.M, static_cast<int>(sol.d)}, sol.Yv.data());
        d["membership_defect"] = sol.diagnostics.membershipDefect;
        d["skorokhod_defect"] = sol.diagnostics.skorokhodDefect;
        return d;
      },
      py::arg("config"), "Solve the lattice problem described by a config file.");

  m.def(
      "run_command",
      [](const std::string& name, const std::string& config, std::optional<std::uint64_t> seed,
         const std::string& out, std::optional<std::string> construction, std::optional<int> refine) {
        CommandOptions opt;
        opt.configPath = config;
        opt.seed = seed;
        opt.outDir = out;
        if (construction) opt.construction = parse_construction(*construction);
        opt.refine = refine;
        std::ostringstream os;
        const int code = run_command(name, opt, os);
        return py::make_tuple(code, os.str());
      },
      py::arg("name"), py::arg("config"), py::arg("seed") = py::none(), py::arg("out") = "",
      py::arg("construction") = py::none(), py::arg("refine") = py::none(),
      "Run a CLI command in-process; returns (exit_code, report). Library errors raise.");
}
