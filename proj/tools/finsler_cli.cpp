#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "finsler/conformal.hpp"
#include "finsler/criteria.hpp"
#include "finsler/error.hpp"
#include "finsler/groups.hpp"
#include "finsler/instance.hpp"
#include "finsler/model_io.hpp"
#include "finsler/report.hpp"
#include "finsler/sampling.hpp"

namespace {

using namespace finsler;

constexpr double kNoTolerance = std::numeric_limits<double>::infinity();

Vec parse_vector(const std::string& text, const char* what) {
  Vec out;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string token = text.substr(pos, comma - pos);
    size_t consumed = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &consumed);
    } catch (const std::exception&) {
      throw Error(std::string(what) + ": '" + token + "' is not a number");
    }
    while (consumed < token.size() &&
           std::isspace(static_cast<unsigned char>(token[consumed]))) {
      ++consumed;
    }
    if (consumed != token.size()) {
      throw Error(std::string(what) + ": '" + token + "' is not a number");
    }
    out.push_back(value);
    if (comma == text.size()) break;
    pos = comma + 1;
  }
  if (out.empty()) throw Error(std::string(what) + ": empty vector");
  return out;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    out.push_back(text.substr(pos, comma - pos));
    if (comma == text.size()) break;
    pos = comma + 1;
  }
  return out;
}

struct CommonArgs {
  std::string model_spec;
  std::string x_frame;
  std::string x_chart;
  std::string f_text;
  std::string phi_text;
  double b0 = 1.0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int samples = 0;
  std::string out_path;
};

void add_model_options(CLI::App* cmd, CommonArgs& args, bool with_field) {
  cmd->add_option("--model", args.model_spec,
                  "builtin:<name> or a path to a model file")
      ->required();
  cmd->add_option("--out", args.out_path, "write the structured report here");
  cmd->add_option("--seed", args.seed, "sampling seed (overrides FINSLER_SEED)")
      ->each([&args](const std::string&) { args.seed_given = true; });
  cmd->add_option("--samples", args.samples, "sample count override");
  if (with_field) {
    cmd->add_option("--X", args.x_frame,
                    "field as comma-separated frame coefficients");
    cmd->add_option("--X-chart", args.x_chart,
                    "field as comma-separated chart expressions");
    cmd->add_option("--f", args.f_text, "conformal exponent expression");
    cmd->add_option("--phi", args.phi_text,
                    "phi family: randers|kropina|matsumoto|riemannian|"
                    "custom:<expr>|custom-general:<expr>");
    cmd->add_option("--b0", args.b0, "validity radius for custom phi");
  }
}

ModelFile resolve_model(const CommonArgs& args, bool phi_from_flags_only,
                        bool* phi_overridden = nullptr) {
  ModelFile mf = load_model(args.model_spec);
  const GeometryModel& geo = mf.model.geometry;

  if (!args.x_frame.empty() && !args.x_chart.empty()) {
    throw Error("pass only one of --X and --X-chart");
  }
  if (!args.x_frame.empty()) {
    if (!geo.has_frame()) {
      throw Error("--X frame coefficients need a frame-bearing model");
    }
    const Vec coeffs = parse_vector(args.x_frame, "--X");
    if (static_cast<int>(coeffs.size()) != geo.dim()) {
      throw Error("--X needs one coefficient per frame field");
    }
    mf.frame_coefficients = coeffs;
    mf.field = chart_field_from_frame(geo, coeffs);
  }
  if (!args.x_chart.empty()) {
    VectorFieldExpr field;
    for (const auto& comp : split_commas(args.x_chart)) {
      field.components.push_back(ScalarExpr::parse(comp, geo.coords));
    }
    if (field.dim() != geo.dim()) {
      throw Error("--X-chart needs one expression per coordinate");
    }
    mf.frame_coefficients.reset();
    mf.field = std::move(field);
  }
  if (!args.phi_text.empty()) {
    mf.phi = PhiFamily::from_string(args.phi_text, args.b0);
    if (phi_overridden) *phi_overridden = true;
  } else if (phi_from_flags_only && phi_overridden) {
    *phi_overridden = false;
  }
  if (!args.f_text.empty()) {
    mf.factor = ScalarExpr::parse(args.f_text, geo.coords);
  }

  if (args.seed_given) {
    mf.seed = args.seed;
  } else if (const char* env = std::getenv("FINSLER_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      throw Error("FINSLER_SEED must be an unsigned integer");
    }
    mf.seed = v;
  }
  if (args.samples > 0) mf.sample_count = args.samples;
  return mf;
}

VectorFieldExpr require_field(const ModelFile& mf) {
  if (!mf.field) {
    throw Error("this check needs a field: pass --X or --X-chart, or add "
                "'X' to the model file");
  }
  return *mf.field;
}

ScalarExpr factor_or_zero(const ModelFile& mf) {
  if (mf.factor) return *mf.factor;
  return ScalarExpr::number(0.0, mf.model.geometry.coords);
}

int finish(CheckReport& rep, const std::string& out_path,
           std::chrono::steady_clock::time_point started) {
  rep.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - started)
                    .count();
  print_report_table(std::cout, rep);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write report to '" + out_path + "'");
    out << report_json(rep);
  }
  return rep.all_pass() ? 0 : 1;
}

// The spray witness needs a phi family whose validity radius exceeds the
// field norm; Berwald-ness of the underlying data does not depend on the
// choice, so an affine family with a wide radius keeps the witness exact.
PhiFamily witness_phi(double b_max) {
  double radius = 4.0;
  while (radius <= b_max) radius *= 4.0;
  const std::string expr = "1 + s/" + format_number(radius);
  return PhiFamily::custom(ScalarExpr::parse(expr, make_coords({"w", "s"})),
                           radius);
}

int cmd_validate(const CommonArgs& args) {
  const auto started = std::chrono::steady_clock::now();
  const ModelFile mf = resolve_model(args, false);
  const GeometryModel& geo = mf.model.geometry;
  const int n = geo.dim();
  const Tolerances& tol = mf.tolerances;

  CheckReport rep;
  rep.tool = "finslerlab";
  rep.model_digest = mf.digest;

  const auto points = sample_points(geo, mf.seed, mf.sample_count);

  double sym_dev = 0.0;
  double pd_failures = 0.0;
  for (const auto& x : points) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double gij = geo.metric_entry(i, j)(x);
        const double gji = geo.metric_entry(j, i)(x);
        sym_dev = std::max(sym_dev, std::abs(gij - gji));
      }
    }
    try {
      metric_at(geo, x);
    } catch (const DomainError&) {
      pd_failures += 1.0;
    }
  }
  rep.add("validate/metric-symmetry", sym_dev, tol.algebraic, mf.seed,
          mf.sample_count);
  rep.add("validate/positive-definite", pd_failures, 0.0, mf.seed,
          mf.sample_count);

  if (geo.has_frame()) {
    double ortho_dev = 0.0;
    for (const auto& x : points) {
      const Mat g = metric_at(geo, x);
      const Mat frame = frame_matrix_at(geo, x);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          Vec ei(n), ej(n);
          for (int c = 0; c < n; ++c) {
            ei[c] = frame(i, c);
            ej[c] = frame(j, c);
          }
          const double target = i == j ? 1.0 : 0.0;
          ortho_dev = std::max(ortho_dev,
                               std::abs(inner(g, ei, ej) - target));
        }
      }
    }
    rep.add("validate/frame-orthonormality", ortho_dev, tol.algebraic,
            mf.seed, mf.sample_count);
  }
  if (!mf.model.brackets.empty()) {
    rep.add("validate/structure-constants",
            structure_constant_residual(mf.model, points), tol.algebraic,
            mf.seed, mf.sample_count);
  }
  if (mf.field) {
    double b_max = 0.0;
    for (const auto& x : points) {
      const Vec xv = (*mf.field)(x);
      b_max = std::max(b_max, std::sqrt(inner(metric_at(geo, x), xv, xv)));
    }
    rep.add("validate/field-norm-margin",
            std::max(0.0, b_max - mf.phi.b0()), 0.0, mf.seed,
            mf.sample_count);
    if (b_max < mf.phi.b0() && !(mf.phi.is_kropina() && b_max == 0.0)) {
      const AdmissibilityReport adm = phi_admissible(mf.phi, b_max, n);
      rep.add("validate/phi-admissible", adm.admissible ? 0.0 : 1.0, 0.0,
              mf.seed, adm.grid);
    }
  }
  return finish(rep, args.out_path, started);
}

int cmd_curvature(const CommonArgs& args, const std::string& at_text,
                  const std::string& u_text, const std::string& v_text) {
  const auto started = std::chrono::steady_clock::now();
  const ModelFile mf = resolve_model(args, false);
  const GeometryModel& geo = mf.model.geometry;
  const int n = geo.dim();

  CheckReport rep;
  rep.tool = "finslerlab";
  rep.model_digest = mf.digest;

  if (!at_text.empty()) {
    const Vec x = parse_vector(at_text, "--at");
    Vec u, v;
    if (!u_text.empty() && !v_text.empty()) {
      u = parse_vector(u_text, "--u");
      v = parse_vector(v_text, "--v");
    } else if (n == 2) {
      u = {1.0, 0.0};
      v = {0.0, 1.0};
    } else {
      throw Error("curvature at a point needs --u and --v when dim > 2");
    }
    rep.add("sectional/at", sectional_curvature(geo, x, u, v), kNoTolerance,
            mf.seed, 1);
  } else {
    const auto points = sample_points(geo, mf.seed, mf.sample_count);
    Sampler rng(mix_seed(mf.seed, "curvature/planes"));
    int index = 0;
    for (const auto& x : points) {
      const Mat g = metric_at(geo, x);
      Vec u, v;
      for (int attempt = 0; attempt < 256; ++attempt) {
        u = rng.direction(n);
        v = rng.direction(n);
        const double gram =
            inner(g, u, u) * inner(g, v, v) - inner(g, u, v) * inner(g, u, v);
        if (gram > 0.05 * inner(g, u, u) * inner(g, v, v)) break;
      }
      char name[64];
      std::snprintf(name, sizeof(name), "sectional/point-%03d", index++);
      rep.add(name, sectional_curvature(geo, x, u, v), kNoTolerance, mf.seed,
              1);
    }
  }
  return finish(rep, args.out_path, started);
}

int cmd_flag_curvature(const CommonArgs& args, const std::string& at_text,
                       const std::string& y_text, const std::string& u_text,
                       const std::string& method) {
  const auto started = std::chrono::steady_clock::now();
  const ModelFile mf = resolve_model(args, false);
  const GeometryModel& geo = mf.model.geometry;

  VectorFieldExpr field = mf.field ? *mf.field
                                   : VectorFieldExpr::zero(geo.coords);
  FinslerInstance inst(geo, field, mf.phi, mf.factor);

  const Vec x = parse_vector(at_text, "--at");
  const Vec y = parse_vector(y_text, "--y");
  const Vec u = parse_vector(u_text, "--u");

  CheckReport rep;
  rep.tool = "finslerlab";
  rep.model_digest = mf.digest;

  if (method == "spray" || method == "both") {
    rep.add("flag-curvature/spray", inst.flag_curvature(x, y, u),
            kNoTolerance, mf.seed, 1);
  }
  if (method == "closed" || method == "both") {
    const ClosedFormFlag closed = inst.flag_curvature_closed_form(x, y, u);
    rep.add("flag-curvature/closed-form", closed.value, kNoTolerance, mf.seed,
            1);
    if (closed.orthonormal_value) {
      rep.add("flag-curvature/orthonormal-form", *closed.orthonormal_value,
              kNoTolerance, mf.seed, 1);
    }
  }
  return finish(rep, args.out_path, started);
}

int cmd_check_berwald(const CommonArgs& args) {
  const auto started = std::chrono::steady_clock::now();
  bool phi_overridden = false;
  const ModelFile mf = resolve_model(args, true, &phi_overridden);
  const GeometryModel& geo = mf.model.geometry;
  const VectorFieldExpr field = require_field(mf);
  const ScalarExpr f = factor_or_zero(mf);
  const Tolerances& tol = mf.tolerances;

  CheckReport rep;
  rep.tool = "finslerlab";
  rep.model_digest = mf.digest;

  const ConformalPair pair = conformal_transform(geo, field, f);
  const auto points = sample_points(geo, mf.seed, mf.sample_count);
  rep.add("berwald/criterion", berwald_residual(pair, points), tol.berwald,
          mf.seed, mf.sample_count);

  double b_max = 0.0;
  for (const auto& x : points) {
    const Vec xv = field(x);
    b_max = std::max(b_max, std::sqrt(inner(metric_at(geo, x), xv, xv)));
  }
  const PhiFamily family = phi_overridden ? mf.phi : witness_phi(b_max);
  FinslerInstance inst(geo, field, family, mf.factor);
  Sampler rng(mix_seed(mf.seed, "berwald/witness"));
  double witness = 0.0;
  const int witness_points = std::min<int>(8, points.size());
  for (int k = 0; k < witness_points; ++k) {
    for (int draw = 0; draw < 2; ++draw) {
      const Vec y = rng.direction(geo.dim());
      witness = std::max(witness, inst.berwald_witness(points[k], y));
    }
  }
  rep.add("berwald/spray-witness", witness, tol.pipeline, mf.seed,
          witness_points * 2);
  return finish(rep, args.out_path, started);
}

int cmd_check_douglas(const CommonArgs& args) {
  const auto started = std::chrono::steady_clock::now();
  const ModelFile mf = resolve_model(args, false);
  const GeometryModel& geo = mf.model.geometry;
  if (mf.phi.kind() != PhiKind::kRanders) {
    throw Error("the Douglas check applies to Randers instances; "
                "got phi family '" + mf.phi.describe() + "'");
  }
  const VectorFieldExpr field = require_field(mf);
  const ScalarExpr f = factor_or_zero(mf);
  const Tolerances& tol = mf.tolerances;

  CheckReport rep;
  rep.tool = "finslerlab";
  rep.model_digest = mf.digest;

  const ConformalPair pair = conformal_transform(geo, field, f);
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
  for (const auto& x : points) {
    for (size_t i = 0; i < basis.size(); ++i) {
      for (size_t j = i + 1; j < basis.size(); ++j) {
        worst = std::max(worst,
                         std::abs(douglas_residual(pair, basis[i], basis[j], x)));
      }
    }
  }
  rep.add("douglas/criterion", worst, tol.douglas, mf.seed, mf.sample_count);
  rep.add("douglas/transformed-closedness",
          beta_closedness_residual(pair.transformed, pair.transformed_field,
                                   points),
          tol.douglas, mf.seed, mf.sample_count);

  if (mf.model.builtin && mf.frame_coefficients) {
    double system_max = 0.0;
    for (const auto& x : points) {
      for (const auto& r :
           pde_residuals(mf.model, *mf.frame_coefficients, f, x)) {
        system_max = std::max(system_max, std::abs(r.value));
      }
    }
    rep.add("douglas/reduced-system", system_max, tol.douglas, mf.seed,
            mf.sample_count);
  }
  return finish(rep, args.out_path, started);
}

int cmd_check_paper(const CommonArgs& args) {
  const auto started = std::chrono::steady_clock::now();
  CriteriaOptions opts;
  opts.seed = 42;
  if (args.seed_given) {
    opts.seed = args.seed;
  } else if (const char* env = std::getenv("FINSLER_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      throw Error("FINSLER_SEED must be an unsigned integer");
    }
    opts.seed = v;
  }

  CheckReport rep = run_criteria(opts);
  rep.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - started)
                    .count();
  print_report_table(std::cout, rep);
  std::cout << "\n";
  for (const auto& s : summarize_criteria(rep)) {
    std::cout << s.id << (s.id.size() == 2 ? "  " : " ")
              << (s.pass() ? "pass" : "FAIL") << "  (" << s.checks
              << (s.checks == 1 ? " check)" : " checks)") << "\n";
  }
  if (!args.out_path.empty()) {
    std::ofstream out(args.out_path);
    if (!out) throw Error("cannot write report to '" + args.out_path + "'");
    out << report_json(rep);
  }
  return rep.all_pass() ? 0 : 1;
}

int cmd_emit_model(const std::string& name, const std::string& out_path) {
  const std::string text = builtin_model_text(name);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write model to '" + out_path + "'");
    out << text;
  } else {
    std::cout << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finsler: (alpha,beta)-metric curvature and criteria checks"};
  app.require_subcommand(1);

  CommonArgs validate_args;
  CLI::App* validate = app.add_subcommand(
      "validate", "check a model description for internal consistency");
  add_model_options(validate, validate_args, true);

  CommonArgs curvature_args;
  std::string curv_at, curv_u, curv_v;
  CLI::App* curvature = app.add_subcommand(
      "curvature", "sectional curvature samples of the base metric");
  add_model_options(curvature, curvature_args, false);
  curvature->add_option("--at", curv_at, "evaluation point");
  curvature->add_option("--u", curv_u, "first plane vector");
  curvature->add_option("--v", curv_v, "second plane vector");

  CommonArgs flag_args;
  std::string flag_at, flag_y, flag_u, flag_method = "spray";
  CLI::App* flag = app.add_subcommand(
      "flag-curvature", "flag curvature of the Finsler instance");
  add_model_options(flag, flag_args, true);
  flag->add_option("--at", flag_at, "base point")->required();
  flag->add_option("--y", flag_y, "flagpole vector")->required();
  flag->add_option("--u", flag_u, "flag edge vector")->required();
  flag->add_option("--method", flag_method, "spray | closed | both")
      ->check(CLI::IsMember({"spray", "closed", "both"}));

  CommonArgs berwald_args;
  CLI::App* berwald = app.add_subcommand(
      "check-berwald", "Berwald criterion and spray witness");
  add_model_options(berwald, berwald_args, true);

  CommonArgs douglas_args;
  CLI::App* douglas = app.add_subcommand(
      "check-douglas", "Douglas criterion for Randers instances");
  add_model_options(douglas, douglas_args, true);

  CommonArgs paper_args;
  CLI::App* paper = app.add_subcommand(
      "check-paper", "run the built-in verification corpus");
  paper->add_option("--seed", paper_args.seed, "sampling seed")
      ->each([&paper_args](const std::string&) { paper_args.seed_given = true; });
  paper->add_option("--out", paper_args.out_path,
                    "write the structured report here");

  std::string emit_name, emit_out;
  CLI::App* emit = app.add_subcommand(
      "emit-model", "write a built-in model description");
  emit->add_option("name", emit_name, "heisenberg | sol2 | sol3")->required();
  emit->add_option("--out", emit_out, "write the model file here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(validate_args);
    if (curvature->parsed()) {
      return cmd_curvature(curvature_args, curv_at, curv_u, curv_v);
    }
    if (flag->parsed()) {
      return cmd_flag_curvature(flag_args, flag_at, flag_y, flag_u,
                                flag_method);
    }
    if (berwald->parsed()) return cmd_check_berwald(berwald_args);
    if (douglas->parsed()) return cmd_check_douglas(douglas_args);
    if (paper->parsed()) return cmd_check_paper(paper_args);
    if (emit->parsed()) return cmd_emit_model(emit_name, emit_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
