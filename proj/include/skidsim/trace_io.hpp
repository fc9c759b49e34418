#pragma once

// Trace files: trace.csv (columns in kTraceColumns order, shortest
// round-trip decimal), meta.json sidecar, metrics.json report.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "skidsim/engine.hpp"
#include "skidsim/metrics.hpp"
#include "skidsim/sweep.hpp"

namespace skidsim {

// Unreadable or malformed trace file; the message lists the expected columns
// when the header is wrong.
class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string trace_csv_header();
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& records);
std::vector<TraceRecord> read_trace_csv(std::istream& in);
std::vector<TraceRecord> read_trace_csv(const std::filesystem::path& path);

nlohmann::json meta_to_json(const TraceMeta& meta);
TraceMeta meta_from_json(const nlohmann::json& j);

nlohmann::json step_metrics_to_json(const StepMetrics& m);
nlohmann::json envelope_to_json(const ExpEnvelope& e);
nlohmann::json run_summary_to_json(const RunSummary& s);
nlohmann::json aggregate_to_json(const TerrainAggregate& a);

// Accepts a trace.csv path or a directory holding trace.csv; meta.json next
// to it is read when present.
SimTrace load_trace(const std::filesystem::path& path);

// Writes text to path via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace skidsim
