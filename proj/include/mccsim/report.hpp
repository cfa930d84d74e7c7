#pragma once

// Scenario documents in, metric reports and stacked-bar chart data out.

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mccsim/central_log.hpp"
#include "mccsim/engine.hpp"
#include "mccsim/model.hpp"

namespace mccsim {

/// Parses and validates a scenario JSON document. Throws ScenarioError
/// carrying every problem found (syntax, types, unknown keys, references).
Scenario parse_scenario(std::string_view document);

/// Canonical JSON form; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& scenario);

/// Reads a file and parses it. Throws IoError when the file cannot be read.
Scenario load_scenario(const std::filesystem::path& path);

struct ReportRow {
  std::string label;
  double space_shared_capacity = 0.0;
  double finish_time_ms = 0.0;
  double time_shared_capacity = 0.0;

  bool operator==(const ReportRow&) const = default;
};

inline constexpr std::array<std::string_view, 4> kReportColumns = {
    "Distributed Cloud details(VMs)",
    "Capacity(Dynamically varying) using space shared",
    "Estimated finish time(in milisec)",
    "Total processing capacity of Cloud host",
};

enum class ReportFormat { Csv, Json };

std::string_view extension(ReportFormat format) noexcept;

ReportRow make_report_row(const RunResult& result);

/// One row per result, in the given order. Throws SimError on empty input.
std::string write_report(std::span<const ReportRow> rows, ReportFormat format);
std::vector<ReportRow> parse_report(std::string_view document, ReportFormat format);

/// {categories[], series[{name, values[]}]} with one series per metric column.
std::string write_chart_data(std::span<const ReportRow> rows);

std::string serialize_log(std::span<const LogEntry> entries);
std::vector<LogEntry> parse_log(std::string_view document);

std::string serialize_run_results(std::span<const RunResult> results);
std::vector<RunResult> parse_run_results(std::string_view document);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

}  // namespace mccsim
