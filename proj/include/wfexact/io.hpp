#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "wfexact/exact_rejection.hpp"

namespace wfexact {

inline constexpr int kSchemaVersion = 1;

/// Shortest round-trip text for a real, at most 17 significant digits.
std::string format_real(double v);

/// RFC 4180 quoting when the field needs it.
std::string csv_escape(const std::string& field);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
  std::size_t width_;
};

/// One JSON object per knot, {"schema_version":1,"path":i,"t":...,"x":...}.
void write_path_jsonl(std::ostream& out, const SkeletonPath& path, std::size_t path_index);
/// Trailing {"schema_version":1,"record":"diagnostics",...} line.
void write_diagnostics_jsonl(std::ostream& out, const PathDiagnostics& totals, std::size_t paths);
std::string diagnostics_summary(const PathDiagnostics& totals, std::size_t paths);

}  // namespace wfexact
