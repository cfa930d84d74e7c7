#include "mccsim/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mccsim {

using nlohmann::json;

namespace {

// Walks a JSON document collecting every schema problem instead of stopping
// at the first one.
class SchemaReader {
 public:
  std::vector<ValidationError> errors;

  void error(const std::string& path, std::string message) { errors.push_back({path, std::move(message)}); }

  bool object(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) {
      error(path, "expected an object");
      return false;
    }
    for (const auto& [key, value] : j.items()) {
      bool known = false;
      for (auto a : allowed) known = known || a == key;
      if (!known) error(path.empty() ? key : path + "." + key, "unknown key '" + key + "'");
    }
    return true;
  }

  const json* field(const json& j, const std::string& path, const char* key, bool required) {
    auto it = j.find(key);
    if (it == j.end()) {
      if (required) error(join(path, key), std::string("missing required field '") + key + "'");
      return nullptr;
    }
    return &*it;
  }

  std::string string(const json& j, const std::string& path, const char* key, bool required = true) {
    const json* v = field(j, path, key, required);
    if (!v) return {};
    if (!v->is_string()) {
      error(join(path, key), "expected a string");
      return {};
    }
    return v->get<std::string>();
  }

  double number(const json& j, const std::string& path, const char* key, bool required, double fallback = 0.0) {
    const json* v = field(j, path, key, required);
    if (!v) return fallback;
    if (!v->is_number()) {
      error(join(path, key), "expected a number");
      return fallback;
    }
    return v->get<double>();
  }

  int integer(const json& j, const std::string& path, const char* key, bool required, int fallback = 0) {
    const json* v = field(j, path, key, required);
    if (!v) return fallback;
    if (!v->is_number_integer()) {
      error(join(path, key), "expected an integer");
      return fallback;
    }
    return v->get<int>();
  }

  const json* array(const json& j, const std::string& path, const char* key, bool required) {
    const json* v = field(j, path, key, required);
    if (!v) return nullptr;
    if (!v->is_array()) {
      error(join(path, key), "expected an array");
      return nullptr;
    }
    return v;
  }

  static std::string join(const std::string& path, const char* key) {
    return path.empty() ? std::string(key) : path + "." + key;
  }
  static std::string at(const std::string& path, const char* key, std::size_t i) {
    return join(path, key) + "[" + std::to_string(i) + "]";
  }
};

Scenario read_scenario(const json& doc, SchemaReader& r) {
  Scenario s;
  if (!r.object(doc, "", {"name", "seed", "dynamic", "nodes", "access_points", "devices", "applications", "events"})) {
    return s;
  }
  // Top-level paths are bare field names.
  s.name = r.string(doc, "", "name");
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (it->is_number_unsigned() || (it->is_number_integer() && it->get<long long>() >= 0)) {
      s.seed = it->get<std::uint64_t>();
    } else {
      r.error("seed", "expected a non-negative integer");
    }
  }
  if (auto it = doc.find("dynamic"); it != doc.end()) {
    if (it->is_boolean()) {
      s.dynamic = it->get<bool>();
    } else {
      r.error("dynamic", "expected a boolean");
    }
  }

  if (const json* nodes = r.array(doc, "", "nodes", true)) {
    for (std::size_t n = 0; n < nodes->size(); ++n) {
      const auto& jn = (*nodes)[n];
      const auto np = SchemaReader::at("", "nodes", n);
      if (!r.object(jn, np, {"id", "hosts"})) continue;
      CloudNode node;
      node.id = r.string(jn, np, "id");
      if (const json* hosts = r.array(jn, np, "hosts", true)) {
        for (std::size_t h = 0; h < hosts->size(); ++h) {
          const auto& jh = (*hosts)[h];
          const auto hp = SchemaReader::at(np, "hosts", h);
          if (!r.object(jh, hp, {"id", "pes"})) continue;
          Host host;
          host.id = r.string(jh, hp, "id");
          if (const json* pes = r.array(jh, hp, "pes", true)) {
            for (std::size_t p = 0; p < pes->size(); ++p) {
              if ((*pes)[p].is_number()) {
                host.pes.push_back({(*pes)[p].get<double>()});
              } else {
                r.error(SchemaReader::at(hp, "pes", p), "expected a MIPS number");
              }
            }
          }
          node.hosts.push_back(std::move(host));
        }
      }
      s.nodes.push_back(std::move(node));
    }
  }

  if (const json* aps = r.array(doc, "", "access_points", true)) {
    for (std::size_t i = 0; i < aps->size(); ++i) {
      const auto& j = (*aps)[i];
      const auto p = SchemaReader::at("", "access_points", i);
      if (!r.object(j, p, {"id", "preferred_node", "latency_ms"})) continue;
      s.access_points.push_back({r.string(j, p, "id"), r.string(j, p, "preferred_node"),
                                 r.number(j, p, "latency_ms", false)});
    }
  }

  if (const json* devices = r.array(doc, "", "devices", true)) {
    for (std::size_t i = 0; i < devices->size(); ++i) {
      const auto& j = (*devices)[i];
      const auto p = SchemaReader::at("", "devices", i);
      if (!r.object(j, p, {"id", "ap"})) continue;
      s.devices.push_back({r.string(j, p, "id"), r.string(j, p, "ap")});
    }
  }

  if (const json* apps = r.array(doc, "", "applications", true)) {
    for (std::size_t a = 0; a < apps->size(); ++a) {
      const auto& j = (*apps)[a];
      const auto p = SchemaReader::at("", "applications", a);
      if (!r.object(j, p, {"id", "device", "class", "owned_nodes", "submit_time_s", "vms", "cloudlets"})) continue;
      Application app;
      app.id = r.string(j, p, "id");
      app.device_id = r.string(j, p, "device");
      const auto cls = r.string(j, p, "class");
      if (auto parsed = parse_application_class(cls)) {
        app.app_class = *parsed;
      } else if (j.contains("class") && j["class"].is_string()) {
        r.error(p + ".class", "class must be one of private, public, hybrid");
      }
      if (const json* owned = r.array(j, p, "owned_nodes", false)) {
        for (std::size_t o = 0; o < owned->size(); ++o) {
          if ((*owned)[o].is_string()) {
            app.owned_nodes.push_back((*owned)[o].get<std::string>());
          } else {
            r.error(SchemaReader::at(p, "owned_nodes", o), "expected a node id");
          }
        }
      }
      app.submit_time_s = r.number(j, p, "submit_time_s", false);
      if (const json* vms = r.array(j, p, "vms", true)) {
        for (std::size_t v = 0; v < vms->size(); ++v) {
          const auto& jv = (*vms)[v];
          const auto vp = SchemaReader::at(p, "vms", v);
          if (!r.object(jv, vp, {"id", "cores", "mips_per_core"})) continue;
          Vm vm;
          vm.id = r.string(jv, vp, "id");
          vm.cores = r.integer(jv, vp, "cores", true, 1);
          vm.mips_per_core = r.number(jv, vp, "mips_per_core", true);
          app.vms.push_back(std::move(vm));
        }
      }
      if (const json* cls_ = r.array(j, p, "cloudlets", true)) {
        for (std::size_t c = 0; c < cls_->size(); ++c) {
          const auto& jc = (*cls_)[c];
          const auto cp = SchemaReader::at(p, "cloudlets", c);
          if (!r.object(jc, cp, {"id", "vm", "length_mi", "cores", "submit_delay_s"})) continue;
          app.cloudlets.push_back(make_cloudlet(r.string(jc, cp, "id"), r.number(jc, cp, "length_mi", true),
                                                r.integer(jc, cp, "cores", true, 1), r.string(jc, cp, "vm"),
                                                r.number(jc, cp, "submit_delay_s", false)));
        }
      }
      s.applications.push_back(std::move(app));
    }
  }

  if (const json* events = r.array(doc, "", "events", false)) {
    for (std::size_t i = 0; i < events->size(); ++i) {
      const auto& j = (*events)[i];
      const auto p = SchemaReader::at("", "events", i);
      if (!r.object(j, p, {"time_s", "kind", "node", "device", "ap"})) continue;
      InjectedEvent e;
      e.time_s = r.number(j, p, "time_s", true);
      const auto kind = r.string(j, p, "kind");
      if (auto parsed = parse_injected_event_kind(kind)) {
        e.kind = *parsed;
        if (e.kind == InjectedEventKind::ApHandoff) {
          e.device_id = r.string(j, p, "device");
          e.ap_id = r.string(j, p, "ap");
          if (j.contains("node")) r.error(p + ".node", "unexpected field for ap_handoff");
        } else {
          e.node_id = r.string(j, p, "node");
          if (j.contains("device")) r.error(p + ".device", "unexpected field for node events");
          if (j.contains("ap")) r.error(p + ".ap", "unexpected field for node events");
        }
      } else if (!kind.empty()) {
        r.error(p + ".kind", "kind must be one of node_fail, node_recover, ap_handoff");
      }
      s.events.push_back(std::move(e));
    }
  }
  return s;
}

std::string csv_field(std::string_view f) {
  if (f.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(f);
  std::string out = "\"";
  for (char c : f) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view doc) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false, in_record = false;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const char c = doc[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < doc.size() && doc[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    in_record = true;
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < doc.size() && doc[i + 1] == '\n') ++i;
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
      in_record = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw SimError("unterminated quoted CSV field");
  if (in_record) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw SimError("not a number: '" + s + "'");
  return v;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
std::optional<double> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json log_to_json(const LogEntry& e) {
  json j{{"time", e.time}, {"kind", to_string(e.kind)}};
  if (!e.app_id.empty()) j["app"] = e.app_id;
  if (!e.vm_id.empty()) j["vm"] = e.vm_id;
  if (!e.cloudlet_id.empty()) j["cloudlet"] = e.cloudlet_id;
  if (e.kind == LogKind::Progress || e.kind == LogKind::Finished) j["remaining_mi"] = e.remaining_mi;
  if (!e.node_id.empty()) j["node"] = e.node_id;
  if (!e.host_id.empty()) j["host"] = e.host_id;
  if (!e.pe_indices.empty()) j["pes"] = e.pe_indices;
  return j;
}

LogEntry log_from_json(const json& j) {
  LogEntry e;
  e.time = j.at("time").get<double>();
  auto kind = parse_log_kind(j.at("kind").get<std::string>());
  if (!kind) throw SimError("unknown log entry kind " + j.at("kind").get<std::string>());
  e.kind = *kind;
  e.app_id = j.value("app", "");
  e.vm_id = j.value("vm", "");
  e.cloudlet_id = j.value("cloudlet", "");
  e.remaining_mi = j.value("remaining_mi", 0.0);
  e.node_id = j.value("node", "");
  e.host_id = j.value("host", "");
  if (j.contains("pes")) e.pe_indices = j["pes"].get<std::vector<std::size_t>>();
  return e;
}

json run_to_json(const RunResult& r) {
  json apps = json::array();
  for (const auto& a : r.apps) {
    apps.push_back({{"id", a.id}, {"submit_time_s", a.submit_time_s}, {"arrival_time_s", opt(a.arrival_time_s)},
                    {"finish_time_s", opt(a.finish_time_s)}});
  }
  json cloudlets = json::array();
  for (const auto& c : r.cloudlets) {
    cloudlets.push_back({{"id", c.id}, {"app", c.app_id}, {"vm", c.vm_id}, {"length_mi", c.length_mi},
                         {"remaining_mi", c.remaining_mi}, {"finish_time_s", opt(c.finish_time_s)}});
  }
  json log = json::array();
  for (const auto& e : r.log) log.push_back(log_to_json(e));
  return {
      {"scenario", r.scenario_name},
      {"seed", r.seed},
      {"status", to_string(r.status)},
      {"label", r.label()},
      {"task_count", r.task_count},
      {"vm_count", r.vm_count},
      {"makespan_s", r.makespan_s},
      {"space_shared_capacity", r.space_shared_capacity},
      {"time_shared_capacity", r.time_shared_capacity},
      {"executed_mi", r.executed_mi},
      {"total_mi", r.total_mi},
      {"stats",
       {{"events_processed", r.stats.events_processed},
        {"finish_events_acted", r.stats.finish_events_acted},
        {"finish_events_stale", r.stats.finish_events_stale},
        {"cloudlets_completed", r.stats.cloudlets_completed}}},
      {"apps", apps},
      {"cloudlets", cloudlets},
      {"log", log},
  };
}

RunResult run_from_json(const json& j) {
  RunResult r;
  r.scenario_name = j.at("scenario").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.status = j.at("status").get<std::string>() == "complete" ? RunStatus::Complete : RunStatus::Degraded;
  r.task_count = j.at("task_count").get<std::size_t>();
  r.vm_count = j.at("vm_count").get<std::size_t>();
  r.makespan_s = j.at("makespan_s").get<double>();
  r.space_shared_capacity = j.at("space_shared_capacity").get<double>();
  r.time_shared_capacity = j.at("time_shared_capacity").get<double>();
  r.executed_mi = j.at("executed_mi").get<double>();
  r.total_mi = j.at("total_mi").get<double>();
  const auto& st = j.at("stats");
  r.stats = {st.at("events_processed").get<std::uint64_t>(), st.at("finish_events_acted").get<std::uint64_t>(),
             st.at("finish_events_stale").get<std::uint64_t>(), st.at("cloudlets_completed").get<std::uint64_t>()};
  for (const auto& a : j.at("apps")) {
    r.apps.push_back({a.at("id").get<std::string>(), a.at("submit_time_s").get<double>(),
                      opt_from(a.at("arrival_time_s")), opt_from(a.at("finish_time_s"))});
  }
  for (const auto& c : j.at("cloudlets")) {
    r.cloudlets.push_back({c.at("id").get<std::string>(), c.at("app").get<std::string>(),
                           c.at("vm").get<std::string>(), c.at("length_mi").get<double>(),
                           c.at("remaining_mi").get<double>(), opt_from(c.at("finish_time_s"))});
  }
  for (const auto& e : j.at("log")) r.log.push_back(log_from_json(e));
  return r;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

Scenario parse_scenario(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ScenarioError("", std::string("malformed document: ") + e.what());
  }
  SchemaReader reader;
  Scenario s = read_scenario(doc, reader);
  if (!reader.errors.empty()) throw ScenarioError(std::move(reader.errors));
  if (auto errors = validate_scenario(s); !errors.empty()) throw ScenarioError(std::move(errors));
  return s;
}

std::string serialize_scenario(const Scenario& s) {
  json nodes = json::array();
  for (const auto& n : s.nodes) {
    json hosts = json::array();
    for (const auto& h : n.hosts) {
      json pes = json::array();
      for (const auto& pe : h.pes) pes.push_back(pe.mips);
      hosts.push_back({{"id", h.id}, {"pes", pes}});
    }
    nodes.push_back({{"id", n.id}, {"hosts", hosts}});
  }
  json aps = json::array();
  for (const auto& ap : s.access_points) {
    aps.push_back({{"id", ap.id}, {"preferred_node", ap.preferred_node}, {"latency_ms", ap.latency_ms}});
  }
  json devices = json::array();
  for (const auto& d : s.devices) devices.push_back({{"id", d.id}, {"ap", d.ap_id}});
  json apps = json::array();
  for (const auto& a : s.applications) {
    json vms = json::array();
    for (const auto& v : a.vms) vms.push_back({{"id", v.id}, {"cores", v.cores}, {"mips_per_core", v.mips_per_core}});
    json cloudlets = json::array();
    for (const auto& c : a.cloudlets) {
      json jc{{"id", c.id}, {"vm", c.vm_id}, {"length_mi", c.length_mi}, {"cores", c.cores}};
      if (c.submit_delay_s != 0.0) jc["submit_delay_s"] = c.submit_delay_s;
      cloudlets.push_back(std::move(jc));
    }
    apps.push_back({{"id", a.id},
                    {"device", a.device_id},
                    {"class", to_string(a.app_class)},
                    {"owned_nodes", a.owned_nodes},
                    {"submit_time_s", a.submit_time_s},
                    {"vms", vms},
                    {"cloudlets", cloudlets}});
  }
  json events = json::array();
  for (const auto& e : s.events) {
    json je{{"time_s", e.time_s}, {"kind", to_string(e.kind)}};
    if (e.kind == InjectedEventKind::ApHandoff) {
      je["device"] = e.device_id;
      je["ap"] = e.ap_id;
    } else {
      je["node"] = e.node_id;
    }
    events.push_back(std::move(je));
  }
  json doc{{"name", s.name},      {"seed", s.seed},           {"dynamic", s.dynamic},
           {"nodes", nodes},      {"access_points", aps},     {"devices", devices},
           {"applications", apps}, {"events", events}};
  return dump(doc);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string_view extension(ReportFormat format) noexcept {
  return format == ReportFormat::Csv ? "csv" : "json";
}

ReportRow make_report_row(const RunResult& result) {
  return {result.label(), result.space_shared_capacity, result.makespan_s * 1000.0, result.time_shared_capacity};
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw SimError("cannot format number");
  return std::string(buf, ptr);
}

std::string write_report(std::span<const ReportRow> rows, ReportFormat format) {
  if (rows.empty()) throw SimError("report needs at least one row");
  if (format == ReportFormat::Csv) {
    std::string out;
    for (std::size_t i = 0; i < kReportColumns.size(); ++i) {
      if (i) out += ',';
      out += csv_field(kReportColumns[i]);
    }
    out += '\n';
    for (const auto& r : rows) {
      out += csv_field(r.label) + ',' + format_number(r.space_shared_capacity) + ',' +
             format_number(r.finish_time_ms) + ',' + format_number(r.time_shared_capacity) + '\n';
    }
    return out;
  }
  json jrows = json::array();
  for (const auto& r : rows) {
    jrows.push_back(json::array({r.label, r.space_shared_capacity, r.finish_time_ms, r.time_shared_capacity}));
  }
  json doc{
      {"columns", kReportColumns},
      {"rows", jrows},
      {"definitions",
       {{std::string(kReportColumns[1]), "mean per-PE host capacity over hosts that held a VM during the run (MIPS)"},
        {std::string(kReportColumns[2]), "makespan from first submission to last cloudlet completion (ms)"},
        {std::string(kReportColumns[3]),
         "time-shared per-PE capacity of the most loaded host at its peak concurrent core demand (MIPS)"}}},
  };
  return dump(doc);
}

std::vector<ReportRow> parse_report(std::string_view document, ReportFormat format) {
  std::vector<ReportRow> rows;
  if (format == ReportFormat::Csv) {
    auto records = parse_csv(document);
    if (records.empty()) throw SimError("empty report");
    const auto& header = records.front();
    if (header.size() != kReportColumns.size() ||
        !std::equal(header.begin(), header.end(), kReportColumns.begin())) {
      throw SimError("unexpected report header");
    }
    for (std::size_t i = 1; i < records.size(); ++i) {
      const auto& rec = records[i];
      if (rec.size() != 4) throw SimError("report row " + std::to_string(i) + " has wrong arity");
      rows.push_back({rec[0], parse_double(rec[1]), parse_double(rec[2]), parse_double(rec[3])});
    }
    return rows;
  }
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw SimError(std::string("malformed report: ") + e.what());
  }
  if (doc.at("columns").get<std::vector<std::string>>() !=
      std::vector<std::string>(kReportColumns.begin(), kReportColumns.end())) {
    throw SimError("unexpected report header");
  }
  for (const auto& r : doc.at("rows")) {
    rows.push_back({r.at(0).get<std::string>(), r.at(1).get<double>(), r.at(2).get<double>(), r.at(3).get<double>()});
  }
  return rows;
}

std::string write_chart_data(std::span<const ReportRow> rows) {
  if (rows.empty()) throw SimError("chart needs at least one row");
  json categories = json::array();
  json space = json::array(), finish = json::array(), time_shared = json::array();
  for (const auto& r : rows) {
    categories.push_back(r.label);
    space.push_back(r.space_shared_capacity);
    finish.push_back(r.finish_time_ms);
    time_shared.push_back(r.time_shared_capacity);
  }
  json doc{{"categories", categories},
           {"series",
            json::array({{{"name", kReportColumns[1]}, {"values", space}},
                         {{"name", kReportColumns[2]}, {"values", finish}},
                         {{"name", kReportColumns[3]}, {"values", time_shared}}})}};
  return dump(doc);
}

std::string serialize_log(std::span<const LogEntry> entries) {
  json j = json::array();
  for (const auto& e : entries) j.push_back(log_to_json(e));
  return dump(j);
}

std::vector<LogEntry> parse_log(std::string_view document) {
  std::vector<LogEntry> out;
  try {
    for (const auto& e : json::parse(document)) out.push_back(log_from_json(e));
  } catch (const json::exception& e) {
    throw SimError(std::string("malformed log: ") + e.what());
  }
  return out;
}

std::string serialize_run_results(std::span<const RunResult> results) {
  json j = json::array();
  for (const auto& r : results) j.push_back(run_to_json(r));
  return dump(j);
}

std::vector<RunResult> parse_run_results(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw SimError(std::string("malformed run result: ") + e.what());
  }
  std::vector<RunResult> out;
  try {
    if (doc.is_array()) {
      for (const auto& r : doc) out.push_back(run_from_json(r));
    } else {
      out.push_back(run_from_json(doc));
    }
  } catch (const json::exception& e) {
    throw SimError(std::string("malformed run result: ") + e.what());
  }
  return out;
}

}  // namespace mccsim
