#include "finsler/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "finsler/conformal.hpp"
#include "finsler/error.hpp"
#include "finsler/groups.hpp"
#include "finsler/instance.hpp"
#include "finsler/model_io.hpp"
#include "finsler/phi.hpp"
#include "finsler/sampling.hpp"

namespace finsler {
namespace {

const Tolerances kTol{};

// A Randers-shaped family with a wide validity radius, used where the
// example fields have norm ≥ 1.
PhiFamily wide_phi() {
  return PhiFamily::custom(
      ScalarExpr::parse("1 + s/4", make_coords({"w", "s"})), 4.0);
}

GeometryModel product_model() {
  GeometryModel m = GeometryModel::from_metric(
      "prod-line-hyperbolic", {"t", "x", "y"},
      {"1", "0", "0", "0", "1/y^2", "0", "0", "0", "1/y^2"});
  m.domain = {ScalarExpr::parse("y", m.coords)};
  m.box = {{-1.2, 1.2}, {-1.2, 1.2}, {0.4, 2.2}};
  return m;
}

double max_abs(const Mat& m) {
  double worst = 0.0;
  for (double v : m.a) worst = std::max(worst, std::abs(v));
  return worst;
}

// Draws a fiber direction and a flag edge whose g-plane is well conditioned.
void draw_flag(Sampler& rng, const Mat& g, int n, Vec& y, Vec& u) {
  for (int attempt = 0; attempt < 256; ++attempt) {
    y = rng.direction(n);
    u = rng.direction(n);
    const double gram = inner(g, y, y) * inner(g, u, u) -
                        inner(g, y, u) * inner(g, y, u);
    if (gram > 0.05 * inner(g, y, y) * inner(g, u, u)) return;
  }
  throw Error("failed to draw a nondegenerate flag");
}

struct FlagSample {
  Vec x;
  Vec y;
  Vec u;
};

std::vector<FlagSample> draw_flags(const GeometryModel& geo,
                                   std::uint64_t seed, int count,
                                   const std::string& label) {
  const auto points = sample_points(geo, mix_seed(seed, label), count);
  Sampler rng(mix_seed(seed, label + "/directions"));
  std::vector<FlagSample> out;
  out.reserve(count);
  for (const auto& x : points) {
    const Mat g = metric_at(geo, x);
    FlagSample s;
    s.x = x;
    draw_flag(rng, g, geo.dim(), s.y, s.u);
    out.push_back(std::move(s));
  }
  return out;
}

void orthonormalize_flag(const Mat& g, Vec& y, Vec& u) {
  const int n = static_cast<int>(y.size());
  const double ny = std::sqrt(inner(g, y, y));
  for (int i = 0; i < n; ++i) y[i] /= ny;
  const double proj = inner(g, y, u);
  for (int i = 0; i < n; ++i) u[i] -= proj * y[i];
  const double nu = std::sqrt(inner(g, u, u));
  for (int i = 0; i < n; ++i) u[i] /= nu;
}

// ---------------------------------------------------------------- C1 ------

void run_c1(CheckReport& rep, std::uint64_t seed) {
  struct Setup {
    std::string name;
    GeometryModel geo;
    VectorFieldExpr field;
  };
  std::vector<Setup> setups;
  for (const std::string name : {"heisenberg", "sol2", "sol3"}) {
    LieModel lm = builtin_model(name);
    Vec coeffs = {0.25, 0.15, 0.1};
    coeffs.resize(lm.dim());
    setups.push_back(
        {name, lm.geometry, chart_field_from_frame(lm.geometry, coeffs)});
  }
  {
    GeometryModel geo = GeometryModel::euclidean(2);
    const Vec comps = {0.25, 0.15};
    setups.push_back({"euclidean2", geo,
                      VectorFieldExpr::constant(geo.coords, comps)});
  }

  struct Family {
    std::string name;
    PhiFamily phi;
  };
  const std::vector<Family> families = {
      {"randers", PhiFamily::randers()},
      {"kropina", PhiFamily::kropina()},
      {"matsumoto", PhiFamily::matsumoto()},
  };

  for (const auto& setup : setups) {
    const int n = setup.geo.dim();
    const auto points = sample_points(
        setup.geo, mix_seed(seed, "c1/" + setup.name), 200);
    for (const auto& family : families) {
      FinslerInstance inst(setup.geo, setup.field, family.phi);
      Sampler rng(mix_seed(seed, "c1/" + setup.name + "/" + family.name));
      double worst = 0.0;
      int used = 0;
      for (const auto& x : points) {
        Vec y = rng.direction(n);
        if (family.phi.is_kropina()) {
          const double beta = inst.beta(x, y);
          if (beta < 0.0) {
            for (double& c : y) c = -c;
          }
          const double s = inst.beta(x, y) / inst.alpha(x, y);
          const double b = std::sqrt(inst.b_squared(x));
          if (s < 0.05 * b) continue;
        }
        const Mat direct = inst.fundamental_tensor_hessian(x, y);
        const Mat formula = inst.fundamental_tensor_formula(x, y);
        double scale = 1.0;
        for (double v : direct.a) scale = std::max(scale, std::abs(v));
        for (int i = 0; i < n * n; ++i) {
          worst = std::max(worst, std::abs(direct.a[i] - formula.a[i]) / scale);
        }
        ++used;
      }
      rep.add("C1/fundamental-tensor/" + family.name + "/" + setup.name,
              worst, kTol.oracle, seed, used);
    }
  }
}

// ---------------------------------------------------------------- C2 ------

void run_c2(CheckReport& rep, std::uint64_t seed) {
  struct Setup {
    std::string name;
    GeometryModel geo;
  };
  std::vector<Setup> setups;
  for (const std::string name : {"heisenberg", "sol2", "sol3"}) {
    setups.push_back({name, builtin_model(name).geometry});
  }
  setups.push_back({"euclidean2", GeometryModel::euclidean(2)});

  for (const auto& setup : setups) {
    const int n = setup.geo.dim();
    FinslerInstance inst(setup.geo, VectorFieldExpr::zero(setup.geo.coords),
                         PhiFamily::riemannian());
    const auto flags = draw_flags(setup.geo, seed, 50, "c2/" + setup.name);
    double metric_dev = 0.0;
    double spray_dev = 0.0;
    double flag_dev = 0.0;
    for (const auto& s : flags) {
      const Mat g = metric_at(setup.geo, s.x);
      const Mat gf = inst.fundamental_tensor_hessian(s.x, s.y);
      for (int i = 0; i < n * n; ++i) {
        metric_dev = std::max(metric_dev, std::abs(g.a[i] - gf.a[i]));
      }
      const Vec gspray = spray_alpha(setup.geo, s.x, s.y);
      const Vec fspray = inst.spray_values(s.x, s.y);
      for (int i = 0; i < n; ++i) {
        spray_dev = std::max(spray_dev, std::abs(gspray[i] - fspray[i]));
      }
      const double kf = inst.flag_curvature(s.x, s.y, s.u);
      const double kg = sectional_curvature(setup.geo, s.x, s.u, s.y);
      flag_dev = std::max(flag_dev, std::abs(kf - kg));
    }
    rep.add("C2/metric-reduction/" + setup.name, metric_dev, kTol.algebraic,
            seed, 50);
    rep.add("C2/spray-reduction/" + setup.name, spray_dev, kTol.algebraic,
            seed, 50);
    rep.add("C2/flag-reduction/" + setup.name, flag_dev, kTol.oracle, seed,
            50);
  }
}

// ---------------------------------------------------------------- C3 ------

void run_c3(CheckReport& rep, std::uint64_t seed) {
  const GeometryModel geo = product_model();
  const VectorFieldExpr field = VectorFieldExpr::constant(
      geo.coords, std::vector<double>{0.3, 0.0, 0.0});

  const auto points = sample_points(geo, mix_seed(seed, "c3/parallel"), 50);
  rep.add("C3/parallel/prod-line-hyperbolic",
          parallel_residual(geo, field, points), kTol.parallel, seed, 50);

  struct Family {
    std::string name;
    PhiFamily phi;
  };
  const std::vector<Family> families = {
      {"randers", PhiFamily::randers()},
      {"matsumoto", PhiFamily::matsumoto()},
  };
  for (const auto& family : families) {
    FinslerInstance inst(geo, field, family.phi);
    const auto flags = draw_flags(geo, seed, 50, "c3/" + family.name);
    double route_dev = 0.0;
    double ortho_dev = 0.0;
    for (const auto& s : flags) {
      const double spray_route = inst.flag_curvature(s.x, s.y, s.u);
      const ClosedFormFlag closed =
          inst.flag_curvature_closed_form(s.x, s.y, s.u);
      route_dev = std::max(route_dev, std::abs(spray_route - closed.value));

      Vec y = s.y;
      Vec u = s.u;
      orthonormalize_flag(metric_at(geo, s.x), y, u);
      const ClosedFormFlag on = inst.flag_curvature_closed_form(s.x, y, u);
      if (!on.orthonormal_value) {
        throw Error("orthonormalized flag was not detected as orthonormal");
      }
      ortho_dev =
          std::max(ortho_dev, std::abs(*on.orthonormal_value - on.value));
    }
    rep.add("C3/route-agreement/" + family.name, route_dev, kTol.pipeline,
            seed, 50);
    rep.add("C3/orthonormal-reduction/" + family.name, ortho_dev, 1e-10, seed,
            50);
  }
}

// ---------------------------------------------------------------- C4 ------

void run_c4(CheckReport& rep, std::uint64_t seed) {
  struct Case {
    std::string name;
    std::string model;
    Vec coeffs;
    std::string f;
    double obstruction;  // expected criterion residual; 0 for Berwald cases
  };
  const std::vector<Case> cases = {
      {"sol2-lny-a1", "sol2", {1.0, 0.0}, "ln(y)", 0.0},
      {"sol2-lny-a-2", "sol2", {-2.0, 0.0}, "ln(y)", 0.0},
      {"sol3-lnz", "sol3", {0.0, 0.0, 1.0}, "ln(z)", 0.0},
      {"sol2-flat-a1", "sol2", {1.0, 0.0}, "0", 1.0},
      {"sol2-flat-a-2", "sol2", {-2.0, 0.0}, "0", 2.0},
      {"sol3-flat", "sol3", {0.0, 0.0, 1.0}, "0", 1.0},
  };

  for (const auto& c : cases) {
    const LieModel lm = builtin_model(c.model);
    const GeometryModel& geo = lm.geometry;
    const VectorFieldExpr field = chart_field_from_frame(geo, c.coeffs);
    const ScalarExpr f = ScalarExpr::parse(c.f, geo.coords);
    const ConformalPair pair = conformal_transform(geo, field, f);

    const auto points = sample_points(geo, mix_seed(seed, "c4/" + c.name), 50);
    const double criterion = berwald_residual(pair, points);

    FinslerInstance inst(geo, field, wide_phi(), f);
    Sampler rng(mix_seed(seed, "c4/" + c.name + "/directions"));
    double witness = 0.0;
    for (int k = 0; k < 8; ++k) {
      const Vec& x = points[k % points.size()];
      for (int rep_draw = 0; rep_draw < 2; ++rep_draw) {
        const Vec y = rng.direction(geo.dim());
        witness = std::max(witness, inst.berwald_witness(x, y));
      }
    }

    const bool positive = c.obstruction == 0.0;
    if (positive) {
      rep.add("C4/criterion/" + c.name, criterion, kTol.berwald, seed, 50);
      rep.add("C4/witness/" + c.name, witness, kTol.pipeline, seed, 16);
    } else {
      rep.add("C4/negative-margin/" + c.name,
              std::max(0.0, (c.obstruction - 1e-9) - criterion), 0.0, seed,
              50);
      rep.add("C4/negative-witness/" + c.name,
              std::max(0.0, 1e-3 - witness), 0.0, seed, 16);
    }
    const bool agree = (criterion <= kTol.berwald) == (witness <= kTol.pipeline);
    rep.add("C4/biconditional/" + c.name, agree ? 0.0 : 1.0, 0.0, seed, 50);
  }
}

// ---------------------------------------------------------------- C5 ------

void run_c5(CheckReport& rep, std::uint64_t seed) {
  const LieModel lm = builtin_model("heisenberg");
  const GeometryModel& geo = lm.geometry;
  const auto points = sample_points(geo, mix_seed(seed, "c5"), 20);

  struct Case {
    std::string name;
    Vec coeffs;
    std::string f;
    bool positive;
  };
  const std::vector<Case> cases = {
      {"positive", {2.0, 1.0, 0.0}, "x + y/2", true},
      {"negative", {0.0, 0.0, 1.0}, "0", false},
  };

  for (const auto& c : cases) {
    const InvariantField field{c.coeffs};
    const ScalarExpr f = ScalarExpr::parse(c.f, geo.coords);
    double system_max = 0.0;
    double frame_max = 0.0;
    double chart_max = 0.0;
    for (const auto& x : points) {
      for (const auto& r : pde_residuals(lm, c.coeffs, f, x)) {
        system_max = std::max(system_max, std::abs(r.value));
      }
      const DouglasFrameResiduals d = left_invariant_douglas(lm, field, f, x);
      frame_max = std::max(frame_max, max_abs(d.frame));
      chart_max = std::max(chart_max, max_abs(d.chart));
    }
    if (c.positive) {
      rep.add("C5/system-positive", system_max, kTol.douglas, seed, 20);
      rep.add("C5/frame-positive", frame_max, kTol.douglas, seed, 20);
      rep.add("C5/chart-positive", chart_max, kTol.douglas, seed, 20);
    } else {
      rep.add("C5/system-negative", std::max(0.0, 0.99 - system_max), 0.0,
              seed, 20);
      rep.add("C5/frame-negative", std::max(0.0, 0.99 - frame_max), 0.0, seed,
              20);
      rep.add("C5/chart-negative", std::max(0.0, 0.99 - chart_max), 0.0, seed,
              20);
    }
  }
}

// ---------------------------------------------------------------- C6 ------

void run_c6(CheckReport& rep, std::uint64_t seed) {
  {
    const LieModel lm = builtin_model("sol2");
    const InvariantField field{{0.0, 1.0}};
    const ScalarExpr f = ScalarExpr::parse("ln(y) + x", lm.geometry.coords);
    const auto points =
        sample_points(lm.geometry, mix_seed(seed, "c6/sol2"), 20);
    double worst = 0.0;
    for (const auto& x : points) {
      const DouglasFrameResiduals d = left_invariant_douglas(lm, field, f, x);
      worst = std::max(worst, std::max(max_abs(d.frame), max_abs(d.chart)));
    }
    rep.add("C6/sol2-lny-plus-x", worst, kTol.douglas, seed, 20);
  }
  {
    const LieModel lm = builtin_model("sol3");
    const InvariantField field{{0.5, 0.0, 0.4}};
    const ScalarExpr f = ScalarExpr::parse("ln(z) + 0.7", lm.geometry.coords);
    const auto points =
        sample_points(lm.geometry, mix_seed(seed, "c6/sol3"), 20);
    double worst = 0.0;
    for (const auto& x : points) {
      const DouglasFrameResiduals d = left_invariant_douglas(lm, field, f, x);
      worst = std::max(worst, std::max(max_abs(d.frame), max_abs(d.chart)));
    }
    rep.add("C6/sol3-lnz-shift", worst, kTol.douglas, seed, 20);
  }
  {
    const GeometryModel geo = GeometryModel::euclidean(2);
    const VectorFieldExpr field = VectorFieldExpr::constant(
        geo.coords, std::vector<double>{1.0, 0.0});
    const ScalarExpr f = ScalarExpr::parse("y", geo.coords);
    const ConformalPair pair = conformal_transform(geo, field, f);
    const auto points = sample_points(geo, mix_seed(seed, "c6/plane"), 20);
    const double res = gradient_proportionality(pair, points);
    rep.add("C6/proportionality-detects", std::abs(res - 1.0), 1e-12, seed,
            20);
  }
}

// ---------------------------------------------------------------- C7 ------

void run_c7(CheckReport& rep, std::uint64_t seed) {
  {
    const LieModel lm = builtin_model("sol2");
    const auto flags = draw_flags(lm.geometry, seed, 50, "c7/sol2");
    double worst = 0.0;
    for (const auto& s : flags) {
      const double k = sectional_curvature(lm.geometry, s.x, s.u, s.y);
      worst = std::max(worst, std::abs(k - (-1.0)));
    }
    rep.add("C7/sol2-constant-curvature", worst, kTol.curvature, seed, 50);
  }
  {
    const LieModel lm = builtin_model("heisenberg");
    const auto points =
        sample_points(lm.geometry, mix_seed(seed, "c7/heisenberg"), 50);
    const struct {
      const char* name;
      int i;
      int j;
      double target;
    } planes[] = {
        {"C7/heisenberg-K12", 0, 1, -0.75},
        {"C7/heisenberg-K13", 0, 2, 0.25},
        {"C7/heisenberg-K23", 1, 2, 0.25},
    };
    for (const auto& plane : planes) {
      double worst = 0.0;
      for (const auto& x : points) {
        const Mat frame = frame_matrix_at(lm.geometry, x);
        Vec u(lm.dim()), v(lm.dim());
        for (int c = 0; c < lm.dim(); ++c) {
          u[c] = frame(plane.i, c);
          v[c] = frame(plane.j, c);
        }
        const double k = sectional_curvature(lm.geometry, x, u, v);
        worst = std::max(worst, std::abs(k - plane.target));
      }
      rep.add(plane.name, worst, kTol.curvature, seed, 50);
    }
  }
  for (const std::string name : {"heisenberg", "sol2", "sol3"}) {
    const LieModel lm = builtin_model(name);
    rep.add("C7/" + name + "-left-invariance",
            left_invariance_residual(lm, mix_seed(seed, "c7/invariance"), 50),
            kTol.invariance, seed, 50);
  }
}

// ---------------------------------------------------------------- C8 ------

void run_c8(CheckReport& rep, std::uint64_t seed) {
  struct Case {
    std::string name;
    std::string model;
    Vec coeffs;
    std::string f;
  };
  const std::vector<Case> cases = {
      {"sol2-lny", "sol2", {1.0, 0.0}, "ln(y)"},
      {"sol3-lnz", "sol3", {0.0, 0.0, 1.0}, "ln(z)"},
      {"heisenberg-xy", "heisenberg", {2.0, 1.0, 0.0}, "x + y/2"},
  };

  for (const auto& c : cases) {
    const LieModel lm = builtin_model(c.model);
    const GeometryModel& geo = lm.geometry;
    const int n = geo.dim();
    const VectorFieldExpr field = chart_field_from_frame(geo, c.coeffs);
    const ScalarExpr f = ScalarExpr::parse(c.f, geo.coords);
    const ConformalPair pair = conformal_transform(geo, field, f);

    FinslerInstance base(geo, field, wide_phi());
    FinslerInstance scaled(geo, field, wide_phi(), f);

    const auto points = sample_points(geo, mix_seed(seed, "c8/" + c.name), 100);
    Sampler rng(mix_seed(seed, "c8/" + c.name + "/directions"));

    double norm_dev = 0.0;
    double rescale_dev = 0.0;
    double connection_dev = 0.0;
    for (const auto& x : points) {
      const double b_base = std::sqrt(base.b_squared(x));
      const double b_scaled = std::sqrt(scaled.b_squared(x));
      norm_dev = std::max(norm_dev, std::abs(b_base - b_scaled));

      const Vec y = rng.direction(n);
      const double ef = std::exp(f(x));
      const double lhs = scaled.eval(x, y);
      const double rhs = ef * base.eval(x, y);
      rescale_dev =
          std::max(rescale_dev, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));

      for (int i = 0; i < n; ++i) {
        const VectorFieldExpr yi = VectorFieldExpr::axis(geo.coords, i);
        for (int jv = 0; jv < n; ++jv) {
          const VectorFieldExpr wj = VectorFieldExpr::axis(geo.coords, jv);
          const Vec via_base = conformal_connection(pair, yi, wj, x);
          const Vec via_scaled =
              covariant_derivative(pair.transformed, yi, wj, x);
          for (int m = 0; m < n; ++m) {
            connection_dev =
                std::max(connection_dev, std::abs(via_base[m] - via_scaled[m]));
          }
        }
      }
    }
    rep.add("C8/norm-invariance/" + c.name, norm_dev, kTol.conformal, seed,
            100);
    rep.add("C8/rescaling/" + c.name, rescale_dev, kTol.conformal, seed, 100);
    rep.add("C8/connection/" + c.name, connection_dev, kTol.oracle, seed, 100);
  }
}

// ---------------------------------------------------------------- C9 ------

void run_c9(CheckReport& rep, std::uint64_t seed) {
  for (double b : {0.1, 0.5, 0.9}) {
    const AdmissibilityReport r = phi_admissible(PhiFamily::randers(), b, 3);
    rep.add("C9/randers-b" + format_number(b), r.admissible ? 0.0 : 1.0, 0.0,
            seed, r.grid);
  }
  {
    const AdmissibilityReport r =
        phi_admissible(PhiFamily::matsumoto(), 0.4, 3);
    rep.add("C9/matsumoto-b0.4", r.admissible ? 0.0 : 1.0, 0.0, seed, r.grid);
  }
  {
    const AdmissibilityReport r =
        phi_admissible(PhiFamily::matsumoto(), 0.6, 3);
    const bool rejected = !r.admissible && r.min_margin_rank < 0.0;
    rep.add("C9/matsumoto-b0.6-rejected", rejected ? 0.0 : 1.0, 0.0, seed,
            r.grid);
  }
}

CheckReport run_once(const CriteriaOptions& opts) {
  CheckReport rep;
  rep.tool = "finslerlab";
  rep.model_digest = digest_hex("builtin-verification-corpus");
  run_c1(rep, opts.seed);
  run_c2(rep, opts.seed);
  run_c3(rep, opts.seed);
  run_c4(rep, opts.seed);
  run_c5(rep, opts.seed);
  run_c6(rep, opts.seed);
  run_c7(rep, opts.seed);
  run_c8(rep, opts.seed);
  run_c9(rep, opts.seed);
  return rep;
}

}  // namespace

CheckReport run_criteria(const CriteriaOptions& opts) {
  CheckReport first = run_once(opts);
  const CheckReport second = run_once(opts);
  const bool identical = report_json(first) == report_json(second);
  first.add("C10/determinism", identical ? 0.0 : 1.0, 0.0, opts.seed, 2);
  return first;
}

std::vector<CriterionSummary> summarize_criteria(const CheckReport& report) {
  std::vector<CriterionSummary> out;
  for (int k = 1; k <= 10; ++k) {
    CriterionSummary s;
    s.id = "C" + std::to_string(k);
    const std::string prefix = s.id + "/";
    for (const auto& rec : report.records) {
      if (rec.name.rfind(prefix, 0) == 0) {
        ++s.checks;
        if (!rec.pass) ++s.failed;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace finsler
