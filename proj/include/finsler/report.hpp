#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace finsler {

struct CheckRecord {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
  int samples = 0;
};

// A collection of named residual checks with deterministic serialization:
// the JSON form never includes wall-clock data, so identical runs produce
// identical bytes.
struct CheckReport {
  std::string tool;
  std::string model_digest;
  std::vector<CheckRecord> records;
  double wall_ms = 0.0;  // shown in the table, excluded from the JSON

  void add(std::string name, double residual, double tolerance,
           std::uint64_t seed, int samples);
  bool all_pass() const;
  const CheckRecord* find(std::string_view name) const;
};

// Fixed-precision decimal form used everywhere a double is serialized;
// round-trips exactly through strtod.
std::string format_number(double v);

std::string report_json(const CheckReport& report);
void print_report_table(std::ostream& os, const CheckReport& report);

std::uint64_t fnv1a(std::string_view text);
std::string digest_hex(std::string_view text);

}  // namespace finsler
