#include "finsler/report.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace finsler {
namespace {

std::string escape_json(std::string_view text) {
  std::string out;
  out.reserve(text.size() + 2);
  for (char c : text) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

}  // namespace

void CheckReport::add(std::string name, double residual, double tolerance,
                      std::uint64_t seed, int samples) {
  CheckRecord rec;
  rec.name = std::move(name);
  rec.residual = residual;
  rec.tolerance = tolerance;
  rec.pass = residual <= tolerance;
  rec.seed = seed;
  rec.samples = samples;
  records.push_back(std::move(rec));
}

bool CheckReport::all_pass() const {
  for (const auto& rec : records) {
    if (!rec.pass) return false;
  }
  return true;
}

const CheckRecord* CheckReport::find(std::string_view name) const {
  for (const auto& rec : records) {
    if (rec.name == name) return &rec;
  }
  return nullptr;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string report_json(const CheckReport& report) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"tool\": \"" << escape_json(report.tool) << "\",\n";
  os << "  \"model_digest\": \"" << escape_json(report.model_digest)
     << "\",\n";
  os << "  \"records\": [";
  for (size_t k = 0; k < report.records.size(); ++k) {
    const CheckRecord& rec = report.records[k];
    os << (k == 0 ? "\n" : ",\n");
    os << "    {\"name\": \"" << escape_json(rec.name) << "\", "
       << "\"residual\": " << format_number(rec.residual) << ", "
       << "\"tolerance\": " << format_number(rec.tolerance) << ", "
       << "\"verdict\": \"" << (rec.pass ? "pass" : "fail") << "\", "
       << "\"seed\": " << rec.seed << ", "
       << "\"samples\": " << rec.samples << "}";
  }
  os << "\n  ]\n";
  os << "}\n";
  return os.str();
}

void print_report_table(std::ostream& os, const CheckReport& report) {
  size_t width = 4;
  for (const auto& rec : report.records) {
    width = std::max(width, rec.name.size());
  }
  os << std::left << std::setw(static_cast<int>(width)) << "name"
     << "  residual      tolerance     verdict\n";
  for (const auto& rec : report.records) {
    std::ostringstream res;
    res << std::scientific << std::setprecision(4) << rec.residual;
    std::ostringstream tol;
    tol << std::scientific << std::setprecision(4) << rec.tolerance;
    os << std::left << std::setw(static_cast<int>(width)) << rec.name << "  "
       << std::setw(12) << res.str() << "  " << std::setw(12) << tol.str()
       << "  " << (rec.pass ? "pass" : "FAIL") << "\n";
  }
  os << (report.all_pass() ? "all checks passed" : "some checks FAILED");
  if (report.wall_ms > 0.0) {
    os << "  (" << std::fixed << std::setprecision(1) << report.wall_ms
       << " ms)";
  }
  os << "\n";
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string digest_hex(std::string_view text) {
  const std::uint64_t h = fnv1a(text);
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace finsler
