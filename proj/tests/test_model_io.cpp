#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "finsler/error.hpp"
#include "finsler/model_io.hpp"
#include "finsler/report.hpp"

using namespace finsler;

namespace {

const char* kCustomModel = R"({
  "name": "twisted-plane",
  "coords": ["x", "y"],
  "metric": ["1 + x^2", "x*y/4", "x*y/4", "2"],
  "box": [[-1.0, 1.0], [-1.0, 1.0]],
  "X": {"chart": ["y", "-x"]},
  "phi": {"family": "randers"},
  "f": "x/2",
  "seed": 7,
  "sample_count": 12
})";

}  // namespace

TEST_CASE("built-in specs load with their group structure") {
  const ModelFile mf = load_model("builtin:heisenberg");
  CHECK(mf.model.geometry.name == "heisenberg");
  CHECK(mf.dim() == 3);
  CHECK(mf.model.builtin.has_value());
  CHECK(mf.model.geometry.has_frame());
  CHECK(mf.model.geometry.has_multiplication());
  CHECK(mf.model.brackets.size() == 3);
  CHECK(mf.seed == 42);
  CHECK(mf.sample_count == 50);
  CHECK_FALSE(mf.field.has_value());
  CHECK(mf.digest.size() == 16);

  CHECK_THROWS_AS(load_model("builtin:nope"), Error);
  CHECK_THROWS_AS(load_model("/no/such/file.json"), Error);
}

TEST_CASE("emit text loads back to an identical serialization") {
  for (const std::string name : {"heisenberg", "sol2", "sol3"}) {
    const std::string text = builtin_model_text(name);
    const ModelFile direct = load_model("builtin:" + name);
    CHECK(serialize_model(direct) == text);

    const ModelFile reparsed = parse_model_text(text, "memory");
    CHECK(serialize_model(reparsed) == text);
    CHECK(reparsed.model.builtin.has_value());
    CHECK(reparsed.digest == direct.digest);
  }
}

TEST_CASE("custom model files parse their fields") {
  const ModelFile mf = parse_model_text(kCustomModel, "inline");
  CHECK(mf.model.geometry.name == "twisted-plane");
  CHECK(mf.dim() == 2);
  CHECK_FALSE(mf.model.builtin.has_value());
  CHECK_FALSE(mf.model.geometry.has_frame());
  REQUIRE(mf.field.has_value());
  const std::vector<double> p{0.3, 0.8};
  const Vec xv = (*mf.field)(p);
  CHECK(xv[0] == doctest::Approx(0.8));
  CHECK(xv[1] == doctest::Approx(-0.3));
  REQUIRE(mf.factor.has_value());
  CHECK((*mf.factor)(p) == doctest::Approx(0.15));
  CHECK(mf.seed == 7);
  CHECK(mf.sample_count == 12);
  CHECK(mf.phi.kind() == PhiKind::kRanders);

  const Mat g = metric_at(mf.model.geometry, p);
  CHECK(g(0, 0) == doctest::Approx(1.09));
  CHECK(g(0, 1) == doctest::Approx(0.06));
  CHECK(g(1, 1) == doctest::Approx(2.0));

  // Round trip through the canonical writer.
  const std::string text = serialize_model(mf);
  const ModelFile back = parse_model_text(text, "inline2");
  CHECK(serialize_model(back) == text);
}

TEST_CASE("tolerance overrides apply only to the named entries") {
  const std::string text = R"({
    "name": "flat",
    "coords": ["x", "y"],
    "metric": ["1", "0", "0", "1"],
    "tolerances": {"berwald": 1e-6, "curvature": 1e-5}
  })";
  const ModelFile mf = parse_model_text(text, "inline");
  CHECK(mf.tolerances.berwald == doctest::Approx(1e-6));
  CHECK(mf.tolerances.curvature == doctest::Approx(1e-5));
  CHECK(mf.tolerances.algebraic == doctest::Approx(1e-10));
  CHECK(mf.tolerances.douglas == doctest::Approx(1e-9));
}

TEST_CASE("malformed model files are rejected with clear errors") {
  const auto parse = [](const std::string& text) {
    return parse_model_text(text, "inline");
  };

  CHECK_THROWS_AS(parse("{"), Error);
  CHECK_THROWS_AS(parse(R"({"name": "m"})"), Error);

  // Metric entry count must be dim².
  CHECK_THROWS_AS(parse(R"({
    "name": "m", "coords": ["x", "y"],
    "metric": ["1", "0", "1"]
  })"),
                  Error);

  // Either a metric or a frame, not both.
  CHECK_THROWS_AS(parse(R"({
    "name": "m", "coords": ["x", "y"],
    "metric": ["1", "0", "0", "1"],
    "frame": {"orthonormal": true, "fields": [["1", "0"], ["0", "1"]]}
  })"),
                  Error);

  // Frames must be declared orthonormal.
  CHECK_THROWS_AS(parse(R"({
    "name": "m", "coords": ["x", "y"],
    "frame": {"orthonormal": false, "fields": [["1", "0"], ["0", "1"]]}
  })"),
                  Error);

  // The field must be given exactly one way.
  CHECK_THROWS_AS(parse(R"({
    "name": "m", "coords": ["x", "y"],
    "metric": ["1", "0", "0", "1"],
    "X": {"chart": ["1", "0"], "frame": [1, 0]}
  })"),
                  Error);

  // Unknown phi family.
  CHECK_THROWS_AS(parse(R"({
    "name": "m", "coords": ["x", "y"],
    "metric": ["1", "0", "0", "1"],
    "phi": {"family": "mystery"}
  })"),
                  Error);

  // Frame coefficients need a declared frame.
  CHECK_THROWS_AS(parse(R"({
    "name": "m", "coords": ["x", "y"],
    "metric": ["1", "0", "0", "1"],
    "X": {"frame": [1, 0]}
  })"),
                  Error);

  // Bad box ordering.
  CHECK_THROWS_AS(parse(R"({
    "name": "m", "coords": ["x", "y"],
    "metric": ["1", "0", "0", "1"],
    "box": [[1.0, -1.0], [-1.0, 1.0]]
  })"),
                  Error);

  // sample_count must be positive.
  CHECK_THROWS_AS(parse(R"({
    "name": "m", "coords": ["x", "y"],
    "metric": ["1", "0", "0", "1"],
    "sample_count": 0
  })"),
                  Error);
}

TEST_CASE("frame-described models derive their metric") {
  const std::string text = R"({
    "name": "scaled-plane",
    "coords": ["x", "y"],
    "frame": {"orthonormal": true, "fields": [["2", "0"], ["0", "1 + x^2"]]},
    "box": [[-1.0, 1.0], [-1.0, 1.0]]
  })";
  const ModelFile mf = parse_model_text(text, "inline");
  REQUIRE(mf.model.geometry.has_frame());
  const std::vector<double> p{0.5, 0.0};
  const Mat g = metric_at(mf.model.geometry, p);
  // e₁ = 2∂x, e₂ = (1+x²)∂y orthonormal means g = diag(1/4, 1/(1+x²)²).
  CHECK(g(0, 0) == doctest::Approx(0.25));
  CHECK(g(0, 1) == doctest::Approx(0.0));
  CHECK(g(1, 1) == doctest::Approx(1.0 / (1.25 * 1.25)));
}

TEST_CASE("digest depends on the text") {
  const ModelFile a = parse_model_text(kCustomModel, "inline");
  std::string other = kCustomModel;
  const auto pos = other.find("\"seed\": 7");
  REQUIRE(pos != std::string::npos);
  other.replace(pos, 9, "\"seed\": 8");
  const ModelFile b = parse_model_text(other, "inline");
  CHECK(a.digest != b.digest);
  CHECK(a.digest.size() == 16);
}

TEST_CASE("number formatting is deterministic and round-trips") {
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(-0.0) == "-0");
  const std::string pi = format_number(3.141592653589793);
  CHECK(std::stod(pi) == doctest::Approx(3.141592653589793).epsilon(1e-16));
  CHECK(format_number(std::nan("")) == "\"nan\"");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "\"inf\"");
}

TEST_CASE("reports serialize deterministically and track verdicts") {
  CheckReport rep;
  rep.tool = "finsler";
  rep.model_digest = "00ff00ff00ff00ff";
  rep.add("alpha", 1e-12, 1e-10, 42u, 10);
  rep.add("beta", 2e-3, 1e-6, 42u, 10);
  CHECK(rep.records[0].pass);
  CHECK_FALSE(rep.records[1].pass);
  CHECK_FALSE(rep.all_pass());
  REQUIRE(rep.find("beta") != nullptr);
  CHECK(rep.find("beta")->residual == doctest::Approx(2e-3));
  CHECK(rep.find("missing") == nullptr);

  const std::string a = report_json(rep);
  const std::string b = report_json(rep);
  CHECK(a == b);
  CHECK(a.find("\"alpha\"") != std::string::npos);
  CHECK(a.find("wall") == std::string::npos);
}
