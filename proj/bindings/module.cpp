#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "finsler/conformal.hpp"
#include "finsler/criteria.hpp"
#include "finsler/error.hpp"
#include "finsler/groups.hpp"
#include "finsler/instance.hpp"
#include "finsler/model_io.hpp"
#include "finsler/report.hpp"

namespace py = pybind11;

namespace {

using namespace finsler;

std::vector<std::vector<double>> mat_rows(const Mat& m) {
  std::vector<std::vector<double>> rows(m.rows, std::vector<double>(m.cols));
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) rows[i][j] = m(i, j);
  }
  return rows;
}

// A field may be given as frame coefficients (floats, frame-bearing models),
// chart expression strings, or None for the zero field.
VectorFieldExpr field_from_py(const GeometryModel& geo, const py::object& x) {
  if (x.is_none()) return VectorFieldExpr::zero(geo.coords);
  const py::sequence seq = x.cast<py::sequence>();
  if (seq.size() == 0) throw Error("field components must be nonempty");
  if (py::isinstance<py::str>(seq[0])) {
    VectorFieldExpr field;
    for (const auto& item : seq) {
      field.components.push_back(
          ScalarExpr::parse(item.cast<std::string>(), geo.coords));
    }
    if (field.dim() != geo.dim()) {
      throw Error("field needs one component per coordinate");
    }
    return field;
  }
  const std::vector<double> values = x.cast<std::vector<double>>();
  if (static_cast<int>(values.size()) != geo.dim()) {
    throw Error("field needs one component per coordinate");
  }
  if (geo.has_frame()) return chart_field_from_frame(geo, values);
  return VectorFieldExpr::constant(geo.coords, values);
}

PhiFamily phi_from_py(const std::string& spec, double b0) {
  return PhiFamily::from_string(spec, b0);
}

FinslerInstance make_instance(const ModelFile& mf, const py::object& x,
                              const std::string& phi, double b0,
                              const py::object& f) {
  const GeometryModel& geo = mf.model.geometry;
  VectorFieldExpr field =
      x.is_none() && mf.field ? *mf.field : field_from_py(geo, x);
  std::optional<ScalarExpr> factor;
  if (!f.is_none()) {
    factor = ScalarExpr::parse(f.cast<std::string>(), geo.coords);
  } else if (mf.factor) {
    factor = mf.factor;
  }
  return FinslerInstance(geo, std::move(field), phi_from_py(phi, b0),
                         std::move(factor));
}

double berwald_residual_py(const ModelFile& mf, const py::object& x,
                           const std::string& f) {
  const GeometryModel& geo = mf.model.geometry;
  const VectorFieldExpr field = field_from_py(geo, x);
  const ScalarExpr factor = ScalarExpr::parse(f, geo.coords);
  const ConformalPair pair = conformal_transform(geo, field, factor);
  const auto points = sample_points(geo, mf.seed, mf.sample_count);
  return berwald_residual(pair, points);
}

double douglas_residual_py(const ModelFile& mf, const py::object& x,
                           const std::string& f) {
  const GeometryModel& geo = mf.model.geometry;
  const VectorFieldExpr field = field_from_py(geo, x);
  const ScalarExpr factor = ScalarExpr::parse(f, geo.coords);
  const ConformalPair pair = conformal_transform(geo, field, factor);
  const auto points = sample_points(geo, mf.seed, mf.sample_count);

  std::vector<VectorFieldExpr> basis;
  if (geo.has_frame()) {
    basis = geo.frame;
  } else {
    for (int i = 0; i < geo.dim(); ++i) {
      basis.push_back(VectorFieldExpr::axis(geo.coords, i));
    }
  }
  double worst = 0.0;
  for (const auto& pt : points) {
    for (size_t i = 0; i < basis.size(); ++i) {
      for (size_t j = i + 1; j < basis.size(); ++j) {
        worst = std::max(
            worst, std::abs(douglas_residual(pair, basis[i], basis[j], pt)));
      }
    }
  }
  return worst;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Finsler (alpha,beta)-metric curvature and criteria checks";

  py::register_exception<Error>(m, "FinslerError");

  py::class_<ScalarExpr>(m, "Expression")
      .def("__str__", &ScalarExpr::str)
      .def("__call__",
           [](const ScalarExpr& e, const std::vector<double>& x) {
             return e(x);
           })
      .def(
          "partial",
          [](const ScalarExpr& e, const std::vector<double>& x,
             const std::vector<int>& index) {
            int order = 0;
            for (int k : index) order += k;
            Jet jet = e.jet(x, order);
            return jet.partial(index);
          },
          py::arg("x"), py::arg("index"),
          "mixed partial derivative for a multi-index like [1, 0, 2]");

  m.def(
      "parse_expression",
      [](const std::string& text, const std::vector<std::string>& coords) {
        return ScalarExpr::parse(text, make_coords(coords));
      },
      py::arg("text"), py::arg("coords"));

  py::class_<ModelFile>(m, "Model")
      .def_property_readonly(
          "name", [](const ModelFile& mf) { return mf.model.geometry.name; })
      .def_property_readonly("dim", &ModelFile::dim)
      .def_property_readonly(
          "coords",
          [](const ModelFile& mf) { return *mf.model.geometry.coords; })
      .def_property_readonly("digest",
                             [](const ModelFile& mf) { return mf.digest; })
      .def_property_readonly("seed",
                             [](const ModelFile& mf) { return mf.seed; })
      .def("serialize", [](const ModelFile& mf) { return serialize_model(mf); })
      .def(
          "sample_points",
          [](const ModelFile& mf, int count) {
            return sample_points(mf.model.geometry, mf.seed, count);
          },
          py::arg("count"))
      .def(
          "metric",
          [](const ModelFile& mf, const std::vector<double>& x) {
            return mat_rows(metric_at(mf.model.geometry, x));
          },
          py::arg("x"))
      .def(
          "sectional_curvature",
          [](const ModelFile& mf, const std::vector<double>& x,
             const std::vector<double>& u, const std::vector<double>& v) {
            return sectional_curvature(mf.model.geometry, x, u, v);
          },
          py::arg("x"), py::arg("u"), py::arg("v"));

  m.def("load_model", &load_model, py::arg("spec"),
        "load 'builtin:<name>' or a model file path");
  m.def("builtin_models", &builtin_model_names);
  m.def("emit_model", &builtin_model_text, py::arg("name"));

  py::class_<FinslerInstance>(m, "Instance")
      .def_property_readonly("dim", &FinslerInstance::dim)
      .def(
          "F",
          [](const FinslerInstance& inst, const std::vector<double>& x,
             const std::vector<double>& y) { return inst.eval(x, y); },
          py::arg("x"), py::arg("y"))
      .def(
          "b_squared",
          [](const FinslerInstance& inst, const std::vector<double>& x) {
            return inst.b_squared(x);
          },
          py::arg("x"))
      .def(
          "fundamental_tensor",
          [](const FinslerInstance& inst, const std::vector<double>& x,
             const std::vector<double>& y) {
            return mat_rows(inst.fundamental_tensor_formula(x, y));
          },
          py::arg("x"), py::arg("y"))
      .def(
          "fundamental_tensor_hessian",
          [](const FinslerInstance& inst, const std::vector<double>& x,
             const std::vector<double>& y) {
            return mat_rows(inst.fundamental_tensor_hessian(x, y));
          },
          py::arg("x"), py::arg("y"))
      .def(
          "spray",
          [](const FinslerInstance& inst, const std::vector<double>& x,
             const std::vector<double>& y) { return inst.spray_values(x, y); },
          py::arg("x"), py::arg("y"))
      .def(
          "flag_curvature",
          [](const FinslerInstance& inst, const std::vector<double>& x,
             const std::vector<double>& y, const std::vector<double>& u) {
            return inst.flag_curvature(x, y, u);
          },
          py::arg("x"), py::arg("y"), py::arg("u"))
      .def(
          "flag_curvature_closed_form",
          [](const FinslerInstance& inst, const std::vector<double>& x,
             const std::vector<double>& y, const std::vector<double>& u) {
            const ClosedFormFlag flag = inst.flag_curvature_closed_form(x, y, u);
            py::dict out;
            out["value"] = flag.value;
            out["orthonormal_value"] =
                flag.orthonormal_value ? py::cast(*flag.orthonormal_value)
                                       : py::none();
            out["riemannian_curvature"] = flag.riemannian_curvature;
            return out;
          },
          py::arg("x"), py::arg("y"), py::arg("u"))
      .def(
          "berwald_witness",
          [](const FinslerInstance& inst, const std::vector<double>& x,
             const std::vector<double>& y) {
            return inst.berwald_witness(x, y);
          },
          py::arg("x"), py::arg("y"));

  m.def("make_instance", &make_instance, py::arg("model"),
        py::arg("X") = py::none(), py::arg("phi") = "randers",
        py::arg("b0") = 1.0, py::arg("f") = py::none(),
        "X: frame coefficients (floats), chart expressions (strings), or "
        "None for the model's own field");

  m.def(
      "phi_admissible",
      [](const std::string& phi, double b, int dim, double b0) {
        const AdmissibilityReport rep =
            phi_admissible(phi_from_py(phi, b0), b, dim);
        py::dict out;
        out["admissible"] = rep.admissible;
        out["min_phi"] = rep.min_phi;
        out["min_margin_rank"] = rep.min_margin_rank;
        out["min_margin_convex"] = rep.min_margin_convex;
        out["s_range"] = py::make_tuple(rep.s_lo, rep.s_hi);
        return out;
      },
      py::arg("phi"), py::arg("b"), py::arg("dim"), py::arg("b0") = 1.0);

  m.def("berwald_residual", &berwald_residual_py, py::arg("model"),
        py::arg("X"), py::arg("f"));
  m.def("douglas_residual", &douglas_residual_py, py::arg("model"),
        py::arg("X"), py::arg("f"));

  m.def(
      "run_checks",
      [](std::uint64_t seed) {
        CriteriaOptions opts;
        opts.seed = seed;
        const CheckReport rep = run_criteria(opts);
        return py::make_tuple(rep.all_pass(), report_json(rep));
      },
      py::arg("seed") = 42,
      "run the verification corpus; returns (all_pass, report_json)");

  m.attr("__version__") = "0.1.0";
}
