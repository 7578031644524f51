#include "finsler/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "finsler/error.hpp"
#include "finsler/report.hpp"

namespace finsler {
namespace {

using nlohmann::json;

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

void append_string_array(std::ostringstream& os,
                         const std::vector<std::string>& items) {
  os << "[";
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) os << ", ";
    os << quote(items[i]);
  }
  os << "]";
}

std::vector<std::string> expr_strings(const std::vector<ScalarExpr>& exprs) {
  std::vector<std::string> out;
  out.reserve(exprs.size());
  for (const auto& e : exprs) out.push_back(e.str());
  return out;
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error("model file '" + source + "' is not valid JSON: " + e.what());
  }
}

std::vector<std::string> string_list(const json& j, const char* field) {
  if (!j.is_array()) {
    throw Error(std::string("model field '") + field +
                "' must be an array of strings");
  }
  std::vector<std::string> out;
  for (const auto& item : j) {
    if (!item.is_string()) {
      throw Error(std::string("model field '") + field +
                  "' must be an array of strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::vector<double> number_list(const json& j, const char* field) {
  if (!j.is_array()) {
    throw Error(std::string("model field '") + field +
                "' must be an array of numbers");
  }
  std::vector<double> out;
  for (const auto& item : j) {
    if (!item.is_number()) {
      throw Error(std::string("model field '") + field +
                  "' must be an array of numbers");
    }
    out.push_back(item.get<double>());
  }
  return out;
}

PhiFamily parse_phi(const json& j) {
  if (!j.is_object() || !j.contains("family")) {
    throw Error("model field 'phi' must be an object with a 'family'");
  }
  const std::string family = j.at("family").get<std::string>();
  if (family == "randers") return PhiFamily::randers();
  if (family == "kropina") return PhiFamily::kropina();
  if (family == "matsumoto") return PhiFamily::matsumoto();
  if (family == "riemannian") return PhiFamily::riemannian();
  if (family == "custom" || family == "custom-general") {
    if (!j.contains("expression")) {
      throw Error("custom phi families need an 'expression'");
    }
    const std::string expr_text = j.at("expression").get<std::string>();
    const double b0 = j.value("b0", 1.0);
    const ScalarExpr expr =
        ScalarExpr::parse(expr_text, make_coords({"w", "s"}));
    return family == "custom" ? PhiFamily::custom(expr, b0)
                              : PhiFamily::custom_general(expr, b0);
  }
  throw Error("unknown phi family '" + family + "'");
}

void serialize_phi(std::ostringstream& os, const PhiFamily& phi) {
  switch (phi.kind()) {
    case PhiKind::kRanders:
      os << "{\"family\": \"randers\"}";
      return;
    case PhiKind::kKropina:
      os << "{\"family\": \"kropina\"}";
      return;
    case PhiKind::kMatsumoto:
      os << "{\"family\": \"matsumoto\"}";
      return;
    case PhiKind::kCustomClassic:
    case PhiKind::kCustomGeneral:
      break;
  }
  if (phi.is_riemannian()) {
    os << "{\"family\": \"riemannian\"}";
    return;
  }
  os << "{\"family\": "
     << (phi.kind() == PhiKind::kCustomGeneral ? "\"custom-general\""
                                               : "\"custom\"")
     << ", \"expression\": " << quote(phi.expression()->str())
     << ", \"b0\": " << format_number(phi.b0()) << "}";
}

std::optional<BuiltinGroup> builtin_by_name(const std::string& name) {
  if (name == "heisenberg") return BuiltinGroup::kHeisenberg;
  if (name == "sol2") return BuiltinGroup::kSol2;
  if (name == "sol3") return BuiltinGroup::kSol3;
  return std::nullopt;
}

}  // namespace

ModelFile parse_model_text(const std::string& text, const std::string& source) {
  const json j = parse_json(text, source);
  if (!j.is_object()) throw Error("model file must be a JSON object");

  ModelFile mf;
  mf.source = source;
  mf.digest = digest_hex(text);

  GeometryModel& geo = mf.model.geometry;
  geo.name = j.value("name", std::string("model"));

  if (!j.contains("coords")) throw Error("model file needs 'coords'");
  const std::vector<std::string> coord_names =
      string_list(j.at("coords"), "coords");
  geo.coords = make_coords(coord_names);
  const int n = geo.dim();

  if (j.contains("dim") && j.at("dim").get<int>() != n) {
    throw Error("model 'dim' does not match the number of coordinates");
  }

  const bool has_metric = j.contains("metric");
  const bool has_frame = j.contains("frame");
  if (has_metric == has_frame) {
    throw Error("model file must declare exactly one of 'metric' or 'frame'");
  }

  if (has_metric) {
    const json& rows = j.at("metric");
    if (!rows.is_array() || static_cast<int>(rows.size()) != n) {
      throw Error("'metric' must be an n-by-n matrix of expression strings");
    }
    for (const auto& row : rows) {
      const std::vector<std::string> entries = string_list(row, "metric");
      if (static_cast<int>(entries.size()) != n) {
        throw Error("'metric' must be an n-by-n matrix of expression strings");
      }
      for (const auto& entry : entries) {
        geo.metric.push_back(ScalarExpr::parse(entry, geo.coords));
      }
    }
  } else {
    const json& frame = j.at("frame");
    if (!frame.is_object() || !frame.contains("fields")) {
      throw Error("'frame' must be an object with 'fields'");
    }
    if (!frame.value("orthonormal", false)) {
      throw Error("declared frames must carry \"orthonormal\": true");
    }
    const json& fields = frame.at("fields");
    if (!fields.is_array() || static_cast<int>(fields.size()) != n) {
      throw Error("'frame.fields' must list dim vector fields");
    }
    for (const auto& row : fields) {
      VectorFieldExpr e;
      for (const auto& comp : string_list(row, "frame.fields")) {
        e.components.push_back(ScalarExpr::parse(comp, geo.coords));
      }
      if (e.dim() != n) {
        throw Error("each frame field needs dim components");
      }
      geo.frame.push_back(std::move(e));
    }
    geo.frame_orthonormal = true;
    geo.metric = metric_from_orthonormal_frame(geo.frame);
  }

  if (j.contains("multiplication")) {
    std::vector<std::string> primed;
    for (const auto& c : coord_names) primed.push_back(c + "'");
    for (const auto& c : coord_names) primed.push_back(c);
    geo.product_coords = make_coords(primed);
    const std::vector<std::string> comps =
        string_list(j.at("multiplication"), "multiplication");
    if (static_cast<int>(comps.size()) != n) {
      throw Error("'multiplication' needs dim components");
    }
    for (const auto& comp : comps) {
      geo.multiplication.push_back(ScalarExpr::parse(comp, geo.product_coords));
    }
    if (j.contains("identity")) {
      mf.model.identity = number_list(j.at("identity"), "identity");
      if (static_cast<int>(mf.model.identity.size()) != n) {
        throw Error("'identity' needs dim components");
      }
    }
  }

  if (j.contains("domain")) {
    for (const auto& ineq : string_list(j.at("domain"), "domain")) {
      geo.domain.push_back(ScalarExpr::parse(ineq, geo.coords));
    }
  }

  if (j.contains("box")) {
    const json& box = j.at("box");
    if (!box.is_array() || static_cast<int>(box.size()) != n) {
      throw Error("'box' needs one [lo, hi] pair per coordinate");
    }
    for (const auto& pair : box) {
      const std::vector<double> lohi = number_list(pair, "box");
      if (lohi.size() != 2 || !(lohi[0] < lohi[1])) {
        throw Error("'box' entries must be [lo, hi] with lo < hi");
      }
      geo.box.emplace_back(lohi[0], lohi[1]);
    }
  } else {
    for (int i = 0; i < n; ++i) geo.box.emplace_back(-1.25, 1.25);
  }

  if (j.contains("brackets")) {
    if (!geo.has_frame()) {
      throw Error("'brackets' need a declared frame");
    }
    for (const auto& item : j.at("brackets")) {
      if (!item.is_object() || !item.contains("pair") ||
          !item.contains("coeffs")) {
        throw Error("each bracket needs 'pair' and 'coeffs'");
      }
      const std::vector<double> pair = number_list(item.at("pair"), "pair");
      LieModel::Bracket br;
      if (pair.size() != 2) throw Error("'pair' must hold two frame indices");
      br.i = static_cast<int>(pair[0]) - 1;
      br.j = static_cast<int>(pair[1]) - 1;
      if (br.i < 0 || br.j < 0 || br.i >= n || br.j >= n || br.i >= br.j) {
        throw Error("bracket pairs are 1-based with i < j");
      }
      br.coeffs = number_list(item.at("coeffs"), "coeffs");
      if (static_cast<int>(br.coeffs.size()) != n) {
        throw Error("bracket 'coeffs' need dim entries");
      }
      mf.model.brackets.push_back(std::move(br));
    }
  }

  if (geo.has_frame()) {
    for (int i = 0; i < n; ++i) {
      mf.model.frame_names.push_back("e" + std::to_string(i + 1));
    }
  }
  mf.model.builtin = builtin_by_name(geo.name);

  if (j.contains("X")) {
    const json& x = j.at("X");
    const bool chart = x.is_object() && x.contains("chart");
    const bool frame_coeffs = x.is_object() && x.contains("frame");
    if (chart == frame_coeffs) {
      throw Error("'X' must hold exactly one of 'chart' or 'frame'");
    }
    if (chart) {
      VectorFieldExpr field;
      for (const auto& comp : string_list(x.at("chart"), "X.chart")) {
        field.components.push_back(ScalarExpr::parse(comp, geo.coords));
      }
      if (field.dim() != n) throw Error("'X.chart' needs dim components");
      mf.field = std::move(field);
    } else {
      if (!geo.has_frame()) {
        throw Error("'X.frame' coefficients need a frame-bearing model");
      }
      const std::vector<double> coeffs = number_list(x.at("frame"), "X.frame");
      if (static_cast<int>(coeffs.size()) != n) {
        throw Error("'X.frame' needs dim coefficients");
      }
      mf.frame_coefficients = coeffs;
      mf.field = chart_field_from_frame(geo, coeffs);
    }
  }

  if (j.contains("phi")) mf.phi = parse_phi(j.at("phi"));
  if (j.contains("f")) {
    mf.factor = ScalarExpr::parse(j.at("f").get<std::string>(), geo.coords);
  }
  mf.seed = j.value("seed", std::uint64_t{42});
  mf.sample_count = j.value("sample_count", 50);
  if (mf.sample_count < 1) throw Error("'sample_count' must be at least 1");

  if (j.contains("tolerances")) {
    const json& tj = j.at("tolerances");
    Tolerances& t = mf.tolerances;
    t.algebraic = tj.value("algebraic", t.algebraic);
    t.oracle = tj.value("oracle", t.oracle);
    t.pipeline = tj.value("pipeline", t.pipeline);
    t.berwald = tj.value("berwald", t.berwald);
    t.douglas = tj.value("douglas", t.douglas);
    t.parallel = tj.value("parallel", t.parallel);
    t.conformal = tj.value("conformal", t.conformal);
    t.curvature = tj.value("curvature", t.curvature);
    t.invariance = tj.value("invariance", t.invariance);
  }
  return mf;
}

std::string serialize_model(const ModelFile& mf) {
  const GeometryModel& geo = mf.model.geometry;
  const int n = geo.dim();
  std::ostringstream os;
  os << "{\n";
  os << "  \"name\": " << quote(geo.name) << ",\n";
  os << "  \"dim\": " << n << ",\n";
  os << "  \"coords\": ";
  append_string_array(os, *geo.coords);
  os << ",\n";

  if (geo.has_frame()) {
    os << "  \"frame\": {\"orthonormal\": true, \"fields\": [";
    for (int i = 0; i < n; ++i) {
      if (i) os << ", ";
      append_string_array(os, expr_strings(geo.frame[i].components));
    }
    os << "]},\n";
  } else {
    os << "  \"metric\": [";
    for (int i = 0; i < n; ++i) {
      if (i) os << ", ";
      std::vector<std::string> row;
      for (int k = 0; k < n; ++k) row.push_back(geo.metric_entry(i, k).str());
      append_string_array(os, row);
    }
    os << "],\n";
  }

  if (geo.has_multiplication()) {
    os << "  \"multiplication\": ";
    append_string_array(os, expr_strings(geo.multiplication));
    os << ",\n";
    if (!mf.model.identity.empty()) {
      os << "  \"identity\": [";
      for (size_t i = 0; i < mf.model.identity.size(); ++i) {
        if (i) os << ", ";
        os << format_number(mf.model.identity[i]);
      }
      os << "],\n";
    }
  }

  if (!geo.domain.empty()) {
    os << "  \"domain\": ";
    append_string_array(os, expr_strings(geo.domain));
    os << ",\n";
  }

  os << "  \"box\": [";
  for (int i = 0; i < n; ++i) {
    if (i) os << ", ";
    os << "[" << format_number(geo.box[i].first) << ", "
       << format_number(geo.box[i].second) << "]";
  }
  os << "],\n";

  if (!mf.model.brackets.empty()) {
    os << "  \"brackets\": [";
    for (size_t k = 0; k < mf.model.brackets.size(); ++k) {
      const auto& br = mf.model.brackets[k];
      if (k) os << ", ";
      os << "{\"pair\": [" << br.i + 1 << ", " << br.j + 1
         << "], \"coeffs\": [";
      for (size_t c = 0; c < br.coeffs.size(); ++c) {
        if (c) os << ", ";
        os << format_number(br.coeffs[c]);
      }
      os << "]}";
    }
    os << "],\n";
  }

  if (mf.frame_coefficients) {
    os << "  \"X\": {\"frame\": [";
    for (size_t i = 0; i < mf.frame_coefficients->size(); ++i) {
      if (i) os << ", ";
      os << format_number((*mf.frame_coefficients)[i]);
    }
    os << "]},\n";
  } else if (mf.field) {
    os << "  \"X\": {\"chart\": ";
    append_string_array(os, expr_strings(mf.field->components));
    os << "},\n";
  }

  os << "  \"phi\": ";
  serialize_phi(os, mf.phi);
  os << ",\n";

  if (mf.factor) {
    os << "  \"f\": " << quote(mf.factor->str()) << ",\n";
  }

  os << "  \"seed\": " << mf.seed << ",\n";
  os << "  \"sample_count\": " << mf.sample_count << ",\n";

  const Tolerances& t = mf.tolerances;
  os << "  \"tolerances\": {";
  os << "\"algebraic\": " << format_number(t.algebraic);
  os << ", \"oracle\": " << format_number(t.oracle);
  os << ", \"pipeline\": " << format_number(t.pipeline);
  os << ", \"berwald\": " << format_number(t.berwald);
  os << ", \"douglas\": " << format_number(t.douglas);
  os << ", \"parallel\": " << format_number(t.parallel);
  os << ", \"conformal\": " << format_number(t.conformal);
  os << ", \"curvature\": " << format_number(t.curvature);
  os << ", \"invariance\": " << format_number(t.invariance);
  os << "}\n";
  os << "}\n";
  return os.str();
}

std::string builtin_model_text(const std::string& name) {
  ModelFile mf;
  mf.model = builtin_model(name);
  mf.source = "builtin:" + name;
  return serialize_model(mf);
}

ModelFile load_model(const std::string& spec) {
  const std::string prefix = "builtin:";
  if (spec.rfind(prefix, 0) == 0) {
    const std::string name = spec.substr(prefix.size());
    ModelFile mf = parse_model_text(builtin_model_text(name), spec);
    return mf;
  }
  std::ifstream in(spec);
  if (!in) throw Error("cannot read model file '" + spec + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_model_text(buffer.str(), spec);
}

}  // namespace finsler
