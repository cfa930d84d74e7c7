#include <filesystem>

#include "doctest.h"
#include "json.hpp"
#include "mccsim/engine.hpp"
#include "mccsim/report.hpp"

using namespace mccsim;

namespace {

const char* kMinimal = R"({
  "name": "mini",
  "nodes": [{"id": "n1", "hosts": [{"id": "h1", "pes": [250, 250]}]}],
  "access_points": [{"id": "ap-1", "preferred_node": "n1", "latency_ms": 5}],
  "devices": [{"id": "d1", "ap": "ap-1"}],
  "applications": [{
    "id": "a1", "device": "d1", "class": "public",
    "vms": [{"id": "vm-1", "cores": 1, "mips_per_core": 250}],
    "cloudlets": [{"id": "c1", "vm": "vm-1", "length_mi": 500, "cores": 1}]
  }]
})";

std::vector<ReportRow> sample_rows() {
  return {{"12 tasks in 3 VMs", 933.3333333333334, 242.00000000000003, 640},
          {"23 tasks in 8 VMs", 940, 746.8888888888889, 666.6666666666666},
          {"a \"quoted\", label", 0.1, 1e-7, 3}};
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("bundled row 1 parses with 12 cloudlets in 3 VMs") {
    const auto s = load_scenario(MCCSIM_SCENARIO_DIR "/table2_row1.scenario");
    CHECK(s.cloudlet_count() == 12);
    CHECK(s.vm_count() == 3);
  }

  TEST_CASE("a minimal document parses with defaults") {
    const auto s = parse_scenario(kMinimal);
    CHECK(s.name == "mini");
    CHECK(s.dynamic);
    CHECK(s.events.empty());
    CHECK(s.applications[0].submit_time_s == 0.0);
    CHECK(s.access_points[0].latency_ms == 5.0);
  }

  TEST_CASE("missing nodes is reported at its path") {
    auto doc = nlohmann::json::parse(kMinimal);
    doc.erase("nodes");
    try {
      parse_scenario(doc.dump());
      FAIL("expected a scenario error");
    } catch (const ScenarioError& e) {
      REQUIRE_FALSE(e.errors().empty());
      CHECK(e.errors()[0].path == "nodes");
    }
  }

  TEST_CASE("unknown keys are rejected") {
    auto doc = nlohmann::json::parse(kMinimal);
    doc["applications"][0]["vms"][0]["ram"] = 512;
    doc["colour"] = "blue";
    try {
      parse_scenario(doc.dump());
      FAIL("expected a scenario error");
    } catch (const ScenarioError& e) {
      std::vector<std::string> paths;
      for (const auto& err : e.errors()) paths.push_back(err.path);
      CHECK(paths == std::vector<std::string>{"colour", "applications[0].vms[0].ram"});
    }
  }

  TEST_CASE("malformed JSON and wrong types are scenario errors") {
    CHECK_THROWS_AS(parse_scenario("{ not json"), ScenarioError);
    auto doc = nlohmann::json::parse(kMinimal);
    doc["applications"][0]["vms"][0]["cores"] = "two";
    CHECK_THROWS_AS(parse_scenario(doc.dump()), ScenarioError);
  }

  TEST_CASE("unreadable files are I/O errors") {
    CHECK_THROWS_AS(load_scenario("/nonexistent/x.scenario"), IoError);
  }

  TEST_CASE("every bundled scenario round-trips through its canonical form") {
    for (const auto& entry : std::filesystem::directory_iterator(MCCSIM_SCENARIO_DIR)) {
      CAPTURE(entry.path());
      const auto s = load_scenario(entry.path());
      const auto text = serialize_scenario(s);
      const auto again = parse_scenario(text);
      CHECK(again == s);
      CHECK(serialize_scenario(again) == text);
    }
  }

  TEST_CASE("csv header and labels") {
    const auto rows = sample_rows();
    const auto csv = write_report(rows, ReportFormat::Csv);
    const auto first_line = csv.substr(0, csv.find('\n'));
    CHECK(first_line ==
          "Distributed Cloud details(VMs),Capacity(Dynamically varying) using space shared,"
          "Estimated finish time(in milisec),Total processing capacity of Cloud host");
    CHECK(csv.find("\n12 tasks in 3 VMs,933.3333333333334,242.00000000000003,640\n") != std::string::npos);
  }

  TEST_CASE("reports round-trip in both formats") {
    const auto rows = sample_rows();
    for (auto format : {ReportFormat::Csv, ReportFormat::Json}) {
      CHECK(parse_report(write_report(rows, format), format) == rows);
    }
    CHECK_THROWS_AS(parse_report("a,b,c,d\n", ReportFormat::Csv), SimError);
  }

  TEST_CASE("json report carries metric definitions") {
    const auto doc = nlohmann::json::parse(write_report(sample_rows(), ReportFormat::Json));
    CHECK(doc.at("columns").size() == 4);
    CHECK(doc.at("definitions").size() == 3);
  }

  TEST_CASE("empty reports are refused") {
    CHECK_THROWS_AS(write_report({}, ReportFormat::Csv), SimError);
    CHECK_THROWS_AS(write_chart_data({}), SimError);
  }

  TEST_CASE("chart data has one series per metric column") {
    const auto rows = sample_rows();
    const auto doc = nlohmann::json::parse(write_chart_data(rows));
    REQUIRE(doc.at("categories").size() == rows.size());
    REQUIRE(doc.at("series").size() == 3);
    for (std::size_t s = 0; s < 3; ++s) {
      CHECK(doc["series"][s]["name"] == std::string(kReportColumns[s + 1]));
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(doc["categories"][i] == rows[i].label);
      double stacked = 0;
      for (const auto& series : doc["series"]) stacked += series["values"][i].get<double>();
      CHECK(stacked == doctest::Approx(rows[i].space_shared_capacity + rows[i].finish_time_ms +
                                       rows[i].time_shared_capacity));
    }
  }

  TEST_CASE("run results and logs round-trip") {
    const auto r = run(load_scenario(MCCSIM_SCENARIO_DIR "/mobility_handoff.scenario"));
    const std::vector<RunResult> results{r};
    const auto parsed = parse_run_results(serialize_run_results(results));
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0] == r);
    CHECK(parse_log(serialize_log(r.log)) == r.log);
    CHECK_THROWS_AS(parse_log("[{\"kind\": 3}]"), SimError);
  }

  TEST_CASE("numbers use the shortest round-trip form") {
    CHECK(format_number(250.0) == "250");
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(4000.0) == "4000");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  }
}
