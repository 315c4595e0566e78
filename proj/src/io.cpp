#include "wfexact/io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "wfexact/error.hpp"

namespace wfexact {

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  std::string s(buf, res.ptr);
  // Prefer the shortest representation that round-trips.
  const auto shortest = std::to_chars(buf, buf + sizeof buf, v);
  std::string t(buf, shortest.ptr);
  return t.size() <= s.size() ? t : s;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), width_(header.size()) {
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  detail::require(fields.size() == width_, "CSV row width does not match the header");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_escape(fields[i]);
  }
  out_ << "\r\n";
}

namespace {

nlohmann::json diagnostics_json(const PathDiagnostics& d, std::size_t paths) {
  const double n = paths ? static_cast<double>(paths) : 1.0;
  return {{"schema_version", kSchemaVersion},
          {"record", "diagnostics"},
          {"paths", paths},
          {"attempts", static_cast<double>(d.attempts) / n},
          {"poisson_points", static_cast<double>(d.poisson_points) / n},
          {"coefficients", static_cast<double>(d.coefficients) / n},
          {"rng_draws", static_cast<double>(d.rng_draws) / n},
          {"approx_fallbacks", static_cast<double>(d.approx_fallbacks) / n},
          {"wall_time_s", d.wall_time}};
}

}  // namespace

void write_path_jsonl(std::ostream& out, const SkeletonPath& path, std::size_t path_index) {
  for (const Knot& k : path.knots) {
    nlohmann::json rec = {{"schema_version", kSchemaVersion}, {"path", path_index}, {"t", k.time}, {"x", k.value}};
    if (k.approximate) rec["approximate"] = true;
    out << rec.dump() << '\n';
  }
}

void write_diagnostics_jsonl(std::ostream& out, const PathDiagnostics& totals, std::size_t paths) {
  out << diagnostics_json(totals, paths).dump() << '\n';
}

std::string diagnostics_summary(const PathDiagnostics& totals, std::size_t paths) {
  const double n = paths ? static_cast<double>(paths) : 1.0;
  std::ostringstream s;
  s << "paths=" << paths << " attempts=" << format_real(static_cast<double>(totals.attempts) / n)
    << " poisson_points=" << format_real(static_cast<double>(totals.poisson_points) / n)
    << " coefficients=" << format_real(static_cast<double>(totals.coefficients) / n)
    << " rng_draws=" << format_real(static_cast<double>(totals.rng_draws) / n)
    << " approx_fallbacks=" << format_real(static_cast<double>(totals.approx_fallbacks) / n)
    << " wall_time_s=" << format_real(totals.wall_time);
  return s.str();
}

}  // namespace wfexact
