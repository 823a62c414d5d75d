// Python bindings for the main operations: experiment runs with structured
// reports, complex construction summaries, and the layered memory kernel.
#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nlhconv/complex_core.hpp"
#include "nlhconv/experiments.hpp"
#include "nlhconv/maxwell.hpp"
#include "nlhconv/reporting.hpp"

#include <string>

namespace py = pybind11;

namespace {

nlhconv::BcTag bc_from_string(const std::string& bc) {
  if (bc == "dirichlet" || bc == "clamped") return nlhconv::BcTag::Dirichlet;
  if (bc == "neumann" || bc == "free") return nlhconv::BcTag::Neumann;
  throw nlhconv::ConfigError("unknown boundary condition '" + bc +
                             "' (known: dirichlet, neumann)");
}

py::dict table_to_dict(const nlhconv::ReportTable& t) {
  py::dict out;
  out["experiment"] = t.experiment;
  out["verdict"] = t.verdict;
  out["converged"] = t.converged;
  out["seed"] = t.seed;
  out["notes"] = t.notes;
  py::dict cfg;
  for (const auto& [key, value] : t.config) cfg[py::str(key)] = value;
  out["config"] = cfg;
  py::list rows;
  for (const nlhconv::ReportRow& r : t.rows) {
    py::dict row;
    row["n"] = r.n;
    row["quantity"] = r.quantity;
    row["value"] = r.value;
    row["reference"] = r.reference;
    row["error"] = r.error;
    rows.append(row);
  }
  out["rows"] = rows;
  out["csv"] = nlhconv::to_csv(t);
  out["json"] = nlhconv::to_json(t);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Block-operator limit experiments on discrete Hilbert complexes: "
      "probe-based weak limits, block algebra, and Laplace-domain solves.";
  m.attr("__version__") = "0.1.0";

  // Translators run newest-first: register the base class before the derived
  // one so configuration errors surface as ValueError, not the generic base.
  py::register_exception<nlhconv::Error>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<nlhconv::ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def(
      "run_experiment",
      [](const std::string& experiment, int grid, int n_max, int probe_k, double tol,
         unsigned long long seed) {
        nlhconv::ExperimentConfig cfg;
        cfg.experiment = nlhconv::experiment_from_name(experiment);
        cfg.grid = grid;
        cfg.n_max = n_max;
        cfg.probe_k = probe_k;
        cfg.tol = tol;
        cfg.seed = seed;
        return table_to_dict(nlhconv::run_experiment(cfg));
      },
      py::arg("experiment"), py::arg("grid") = 0, py::arg("n_max") = 0, py::arg("probe_k") = 0,
      py::arg("tol") = 0.0, py::arg("seed") = 0,
      "Run one named experiment (verify, means1d, homog1d, hlimit3d, bcgap, conv, maxwell, "
      "divcurl). Zero-valued settings take the experiment's documented default. Returns a dict "
      "with the verdict, the effective config, the measured rows, and csv/json renderings.");

  m.def(
      "complex_summary",
      [](const std::string& kind, int n, const std::string& bc) {
        nlhconv::HilbertComplex c = [&]() {
          if (kind == "trivial") return nlhconv::build_trivial_complex(n);
          if (kind == "interval") return nlhconv::build_interval_complex(n, bc_from_string(bc));
          if (kind == "grid") {
            const nlhconv::Index e = n;
            return nlhconv::build_grid_complex_3d({e, e, e}, bc_from_string(bc));
          }
          if (kind == "composed") {
            const nlhconv::Index e = n;
            return nlhconv::compose_grid_maxwell_complex({e, e, e});
          }
          throw nlhconv::ConfigError("unknown complex kind '" + kind +
                                     "' (known: trivial, interval, grid, composed)");
        }();
        const nlhconv::ComplexReport r = nlhconv::verify_complex(c);
        py::dict out;
        out["name"] = c.name();
        out["dim_h0"] = static_cast<long>(c.dim_h0());
        out["dim_h1"] = static_cast<long>(c.dim_h1());
        out["dim_h2"] = static_cast<long>(c.dim_h2());
        out["is_complex"] = r.is_complex;
        out["is_exact"] = r.is_exact;
        out["rank_a0"] = static_cast<long>(r.rank_a0);
        out["rank_a1"] = static_cast<long>(r.rank_a1);
        out["cohomology_dim"] = static_cast<long>(r.cohomology_dim);
        out["composition_norm"] = r.composition_norm;
        return out;
      },
      py::arg("kind"), py::arg("n"), py::arg("bc") = "dirichlet",
      "Build a named complex (trivial, interval, grid, composed) of size n and "
      "return its verification summary.");

  m.def(
      "memory_kernel_two_phase",
      [](double e1, double e2, double s1, double s2, double lam) {
        return nlhconv::memory_kernel(nlhconv::make_two_phase_cell(e1, e2),
                                      nlhconv::make_two_phase_cell(s1, s2), lam);
      },
      py::arg("e1"), py::arg("e2"), py::arg("s1"), py::arg("s2"), py::arg("lam"),
      "Effective Laplace-domain coefficient of the layered two-component medium "
      "with phase values (e1, s1) and (e2, s2) at parameter lam.");
}
