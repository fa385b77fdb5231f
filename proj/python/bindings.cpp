#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qnuis/bounds.hpp"
#include "qnuis/errors.hpp"
#include "qnuis/fisher.hpp"
#include "qnuis/linalg.hpp"
#include "qnuis/metrology.hpp"
#include "qnuis/models.hpp"
#include "qnuis/oracle.hpp"
#include "qnuis/povm.hpp"

namespace py = pybind11;
using namespace qnuis;

namespace {

Povm to_povm(const std::vector<CMatrix>& effects) {
  Povm p;
  p.effects = effects;
  for (std::size_t k = 0; k < effects.size(); ++k) p.labels.push_back(std::to_string(k));
  return p;
}

py::dict bound_dict(const BoundResult& r) {
  py::dict d;
  d["value"] = r.value;
  py::dict comps;
  for (const auto& [name, v] : r.components) comps[py::str(name)] = v;
  d["components"] = comps;
  if (r.optimal_weights) d["optimal_weights"] = *r.optimal_weights;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Core routines of qnuis";

  py::register_exception<Error>(m, "QnuisError", PyExc_ValueError);

  py::class_<ParametricModel>(m, "Model")
      .def(py::init([](const std::string& name, const std::vector<double>& fixed) { return make_builtin(name, fixed); }),
           py::arg("name"), py::arg("fixed") = std::vector<double>{})
      .def_readonly("name", &ParametricModel::name)
      .def_readonly("n", &ParametricModel::n)
      .def_readonly("m", &ParametricModel::m)
      .def("state", [](const ParametricModel& model, const RVector& t) { return evaluate(model, t); })
      .def("derivatives", [](const ParametricModel& model, const RVector& t) { return derivatives(model, t); })
      .def("bloch_vector", [](const ParametricModel& model, const RVector& t) { return bloch_vector(model, t); })
      .def("__repr__", [](const ParametricModel& model) {
        return "<qnuis.Model " + model.name + " n=" + std::to_string(model.n) + " m=" + std::to_string(model.m) + ">";
      });

  m.def("builtin_models", &builtin_names);
  m.def(
      "orthogonalize",
      [](const ParametricModel& model) { return orthogonalize(model, builtin_reparametrization(model)); },
      py::arg("model"));

  m.def("solve_sld", [](const CMatrix& rho, const CMatrix& drho) { return solve_sld(rho, drho); }, py::arg("rho"),
        py::arg("drho"));
  m.def("fidelity", [](const CMatrix& a, const CMatrix& b) { return fidelity(a, b); }, py::arg("a"), py::arg("b"));

  m.def(
      "sld_fisher",
      [](const ParametricModel& model, const RVector& t) {
        const FisherBundle b = sld_fisher(model, t);
        py::dict d;
        d["G"] = b.G;
        d["G_inv"] = b.G_inv;
        d["slds"] = b.slds;
        return d;
      },
      py::arg("model"), py::arg("theta"));
  m.def(
      "classical_fisher",
      [](const ParametricModel& model, const RVector& t, const std::vector<CMatrix>& effects) {
        return classical_fisher(model, t, to_povm(effects)).J;
      },
      py::arg("model"), py::arg("theta"), py::arg("effects"));
  m.def("partial_fisher", [](const RMatrix& J, int k) { return partial_fisher(J, k); }, py::arg("J"), py::arg("m"));
  m.def("information_loss", [](const RMatrix& J, int k) { return information_loss(J, k); }, py::arg("J"),
        py::arg("m"));

  m.def("bloch_pvm", [](const Eigen::Vector3d& u) { return bloch_pvm(u).effects; }, py::arg("direction"));
  m.def(
      "optimal_interest_pvm",
      [](const ParametricModel& model, const RVector& t) { return optimal_interest_pvm(model, t).effects; },
      py::arg("model"), py::arg("theta"));

  m.def("sld_cr_bound", &sld_cr_bound, py::arg("W"), py::arg("G_inv"));
  m.def("nagaoka_bound", [](const RMatrix& W, const RMatrix& G) { return nagaoka_bound(W, G); }, py::arg("W"),
        py::arg("G_inv"));
  m.def("hgm_bound", [](const RMatrix& W, const RMatrix& G) { return hgm_bound(W, G); }, py::arg("W"),
        py::arg("G_inv"));
  m.def(
      "weight_limit_bound",
      [](const std::string& kind, const RMatrix& W_I, const RMatrix& G_inv) {
        const auto r = weight_limit_bound(parse_weight_limit_kind(kind), W_I, G_inv);
        py::dict d;
        d["value"] = r.value;
        d["closed_form"] = r.closed_form;
        d["epsilons"] = r.epsilons;
        d["ladder"] = r.ladder;
        return d;
      },
      py::arg("kind"), py::arg("W_I"), py::arg("G_inv"));
  m.def(
      "nui_bound_11", [](const RMatrix& G, double v_in, double v_nn) { return bound_dict(nui_bound_11(G, v_in, v_nn)); },
      py::arg("G_inv"), py::arg("V_IN"), py::arg("V_NN"));
  m.def(
      "nui_bound_12", [](const RMatrix& G, const RMatrix& V_NN) { return bound_dict(nui_bound_12(G, V_NN)); },
      py::arg("G_inv"), py::arg("V_NN"));
  m.def(
      "nui_bound_21",
      [](const RMatrix& W_I, const RMatrix& G, double v33) { return bound_dict(nui_bound_21(W_I, G, v33)); },
      py::arg("W_I"), py::arg("G_inv"), py::arg("V_33"));
  m.def(
      "classical_weight_elimination",
      [](const RMatrix& M, const RMatrix& W_I) {
        const auto r = classical_weight_elimination(M, W_I);
        py::dict d = bound_dict(r.bound);
        d["W_IN"] = r.W_IN;
        d["W_N"] = r.W_N;
        return d;
      },
      py::arg("M"), py::arg("W_I"));

  m.def(
      "oracle_minimize",
      [](const ParametricModel& model, const RVector& t, const RMatrix& W_I, int grid_density, int refinement_rounds,
         bool mixtures, bool random, std::uint64_t seed) {
        OracleConfig cfg;
        cfg.grid_density = grid_density;
        cfg.refinement_rounds = refinement_rounds;
        cfg.use_mixtures = mixtures;
        cfg.use_random = random;
        cfg.seed = seed;
        const auto r = oracle_minimize(model, t, W_I, cfg);
        py::dict d;
        d["value"] = r.value;
        d["family"] = r.family;
        d["effects"] = r.povm.effects;
        d["trace"] = r.trace;
        return d;
      },
      py::arg("model"), py::arg("theta"), py::arg("W_I"), py::arg("grid_density") = 64,
      py::arg("refinement_rounds") = 3, py::arg("mixtures") = false, py::arg("random") = false,
      py::arg("seed") = OracleConfig{}.seed);

  m.def("noise_presets", &noise_preset_names);
  m.def(
      "fisher_time_series",
      [](const std::string& preset, int variant, const std::vector<double>& times) {
        const NoiseModelSpec spec = noise_preset(preset, variant);
        const auto ts = fisher_time_series(spec, times.empty() ? default_time_grid(spec) : times);
        py::dict d;
        d["t"] = ts.times;
        d["g11_over_t2"] = ts.g11_normalized;
        d["g11_partial_over_t2"] = ts.g11_partial_normalized;
        std::vector<std::string> status;
        for (const auto& p : ts.points) status.push_back(to_string(p.status));
        d["status"] = status;
        return d;
      },
      py::arg("preset"), py::arg("variant"), py::arg("times") = std::vector<double>{});
}
