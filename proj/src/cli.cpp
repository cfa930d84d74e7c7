#include "mccsim/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "mccsim/engine.hpp"
#include "mccsim/report.hpp"

namespace mccsim {

namespace fs = std::filesystem;

namespace {

void print_errors(const ScenarioError& e, const std::string& source) {
  for (const auto& err : e.errors()) {
    std::cerr << source << ": " << (err.path.empty() ? "<document>" : err.path) << ": " << err.message << "\n";
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("short write to " + path.string());
}

ReportFormat parse_format(const std::string& s) { return s == "json" ? ReportFormat::Json : ReportFormat::Csv; }

void write_outputs(const fs::path& dir, std::span<const RunResult> results, ReportFormat format) {
  std::vector<ReportRow> rows;
  for (const auto& r : results) rows.push_back(make_report_row(r));
  write_file(dir / ("report." + std::string(extension(format))), write_report(rows, format));
  write_file(dir / "chart.json", write_chart_data(rows));
  write_file(dir / "runresult.json", serialize_run_results(results));
  if (results.size() == 1) {
    write_file(dir / "log.json", serialize_log(results.front().log));
  } else {
    for (const auto& r : results) write_file(dir / "logs" / (r.scenario_name + ".json"), serialize_log(r.log));
  }
}

std::vector<fs::path> scenario_files(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".scenario" || ext == ".json")) files.push_back(entry.path());
  }
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return files;
}

int cmd_validate(const std::string& file) {
  try {
    load_scenario(file);
  } catch (const ScenarioError& e) {
    print_errors(e, file);
    return kExitInvalid;
  }
  return kExitOk;
}

struct RunFlags {
  std::string scenario;
  std::string batch;
  std::string out;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  bool lose_progress = false;
};

int cmd_run(const RunFlags& flags) {
  EngineOptions options;
  options.lose_progress_since_log = flags.lose_progress;
  options.seed_override = flags.seed;
  const auto format = parse_format(flags.format);

  std::vector<fs::path> files;
  fs::path out;
  if (!flags.batch.empty()) {
    files = scenario_files(flags.batch);
    if (files.empty()) {
      std::cerr << "no scenario files in " << flags.batch << "\n";
      return kExitInvalid;
    }
    out = flags.out.empty() ? fs::path("out") / fs::path(flags.batch).lexically_normal().filename() : fs::path(flags.out);
  } else {
    if (flags.scenario.empty()) {
      std::cerr << "run: a scenario file or --batch DIR is required\n";
      return kExitInvalid;
    }
    files.push_back(flags.scenario);
  }

  std::vector<Scenario> scenarios;
  bool invalid = false;
  for (const auto& f : files) {
    try {
      scenarios.push_back(load_scenario(f));
    } catch (const ScenarioError& e) {
      print_errors(e, f.string());
      invalid = true;
    }
  }
  if (invalid) return kExitInvalid;
  if (flags.batch.empty()) {
    out = flags.out.empty() ? fs::path("out") / scenarios.front().name : fs::path(flags.out);
  }

  // One engine per scenario; results are collected in file-name order.
  std::vector<std::future<RunResult>> futures;
  for (const auto& s : scenarios) {
    futures.push_back(std::async(std::launch::async, [&s, options] { return run(s, options); }));
  }
  std::vector<RunResult> results;
  for (auto& f : futures) results.push_back(f.get());

  write_outputs(out, results, format);
  const bool degraded = std::any_of(results.begin(), results.end(),
                                    [](const RunResult& r) { return r.status == RunStatus::Degraded; });
  if (degraded) {
    for (const auto& r : results) {
      if (r.status == RunStatus::Degraded) std::cerr << r.scenario_name << ": degraded, unfinished work remains\n";
    }
    return kExitDegraded;
  }
  return kExitOk;
}

int cmd_report(const std::string& from, const std::string& out_flag, const std::string& format_flag, bool chart) {
  std::vector<RunResult> results;
  try {
    results = parse_run_results(read_file(from));
  } catch (const IoError&) {
    throw;
  } catch (const SimError& e) {
    std::cerr << from << ": " << e.what() << "\n";
    return kExitInvalid;
  }
  if (results.empty()) {
    std::cerr << from << ": no run results\n";
    return kExitInvalid;
  }
  const auto format = parse_format(format_flag);
  const fs::path out = out_flag.empty() ? fs::path(from).parent_path() : fs::path(out_flag);
  std::vector<ReportRow> rows;
  for (const auto& r : results) rows.push_back(make_report_row(r));
  write_file(out / ("report." + std::string(extension(format))), write_report(rows, format));
  if (chart) write_file(out / "chart.json", write_chart_data(rows));
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Discrete-event simulator for distributed mobile-cloud allocation", "mccsim"};
  app.require_subcommand(1);

  std::string validate_file;
  auto* validate = app.add_subcommand("validate", "Check a scenario document");
  validate->add_option("scenario", validate_file, "Scenario file")->required();

  RunFlags flags;
  std::uint64_t seed = 0;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario or a directory of scenarios");
  run_cmd->add_option("scenario", flags.scenario, "Scenario file");
  auto* batch_opt = run_cmd->add_option("--batch", flags.batch, "Run every scenario in a directory");
  run_cmd->add_option("--out", flags.out, "Output directory (default ./out/<name>)");
  run_cmd->add_option("--format", flags.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_flag("--lose-progress-since-log", flags.lose_progress,
                    "On node failure, resume from the last logged progress");
  batch_opt->excludes(run_cmd->get_option("scenario"));

  std::string from, report_out, report_format = "csv";
  bool chart = false;
  auto* report = app.add_subcommand("report", "Re-derive report and chart data from a saved run result");
  report->add_option("--from", from, "runresult.json written by `run`")->required();
  report->add_flag("--chart", chart, "Also write chart data");
  report->add_option("--format", report_format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  report->add_option("--out", report_out, "Output directory (default: next to the run result)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cerr << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return kExitInvalid;
  }

  try {
    if (*validate) return cmd_validate(validate_file);
    if (*run_cmd) {
      if (*seed_opt) flags.seed = seed;
      return cmd_run(flags);
    }
    if (*report) return cmd_report(from, report_out, report_format, chart);
  } catch (const IoError& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  } catch (const ScenarioError& e) {
    print_errors(e, "scenario");
    return kExitInvalid;
  } catch (const SimError& e) {
    std::cerr << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace mccsim
