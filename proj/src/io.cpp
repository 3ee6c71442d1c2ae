#include "signalopt/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace signalopt {

using nlohmann::json;

namespace {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view text, std::string_view what, std::size_t line) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end)
    throw InputError(std::string(what) + ": line " + std::to_string(line) + ": bad number '" +
                     std::string(text) + "'");
  return v;
}

std::size_t parse_index(std::string_view text, std::string_view what, std::size_t line) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end)
    throw InputError(std::string(what) + ": line " + std::to_string(line) + ": bad integer '" +
                     std::string(text) + "'");
  return v;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

void gene_columns(std::ostream& os, std::size_t n) {
  for (std::size_t g = 1; g <= n; ++g) os << ",gene_" << g;
  os << '\n';
}

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

std::string config_hash(std::string_view canonical) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(canonical.data(), canonical.size(), digest, &len, EVP_sha256(), nullptr))
    throw Error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < 8 && i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string format_number(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, p);
}

std::string csv_provenance(const Provenance& p) {
  return "# signalopt " + p.version + " config=" + p.config_hash +
         " seed=" + std::to_string(p.seed) + "\n";
}

json provenance_json(const Provenance& p) {
  return {{"tool", "signalopt"}, {"version", p.version}, {"config_hash", p.config_hash},
          {"seed", p.seed}};
}

std::vector<TraceSegment> trace_layout(const ChromosomeLayout& layout, const Network& net) {
  std::vector<TraceSegment> out;
  for (const auto& s : layout.segments()) out.push_back({net.node(s.junction).id, s.phase_count});
  return out;
}

void write_trace_header(std::ostream& os, const ChromosomeLayout& layout, const Network& net,
                        const Provenance& p) {
  os << csv_provenance(p) << "# layout";
  for (const auto& s : trace_layout(layout, net)) os << ' ' << s.junction << ':' << s.phase_count;
  os << "\ngeneration,individual_index,fitness";
  gene_columns(os, layout.gene_count());
}

void write_trace_rows(std::ostream& os, const GenerationRecord& record) {
  for (std::size_t i = 0; i < record.population.size(); ++i) {
    os << record.generation << ',' << i << ',' << format_number(record.fitness[i]);
    for (double g : record.population[i]) os << ',' << format_number(g);
    os << '\n';
  }
}

void write_best_header(std::ostream& os, const ChromosomeLayout& layout, const Provenance& p) {
  os << csv_provenance(p) << "generation,best_fitness";
  gene_columns(os, layout.gene_count());
}

void write_best_row(std::ostream& os, const GenerationRecord& record) {
  os << record.generation << ',' << format_number(record.best_so_far);
  for (double g : record.best_genes) os << ',' << format_number(g);
  os << '\n';
}

std::size_t TraceData::generation_count() const {
  std::size_t n = 0;
  for (const auto& r : rows) n = std::max(n, r.generation + 1);
  return n;
}

TraceData read_trace_csv(std::istream& is) {
  TraceData data;
  std::string line;
  std::size_t lineno = 0, columns = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# layout", 0) == 0) {
        std::istringstream ss(line.substr(8));
        std::string tok;
        while (ss >> tok) {
          const auto colon = tok.rfind(':');
          if (colon == std::string::npos || colon == 0)
            throw InputError("malformed trace: line " + std::to_string(lineno) +
                             ": bad layout entry '" + tok + "'");
          data.layout.push_back(
              {tok.substr(0, colon), parse_index(std::string_view(tok).substr(colon + 1),
                                                 "malformed trace", lineno)});
        }
      }
      continue;
    }
    const auto cells = split(line, ',');
    if (!header) {
      if (cells.size() < 3 || cells[0] != "generation" || cells[1] != "individual_index" ||
          cells[2] != "fitness")
        throw InputError("malformed trace: expected header 'generation,individual_index,fitness,...'");
      columns = cells.size();
      header = true;
      continue;
    }
    if (cells.size() != columns)
      throw InputError("malformed trace: line " + std::to_string(lineno) + " has " +
                       std::to_string(cells.size()) + " fields, expected " +
                       std::to_string(columns));
    TraceRow row;
    row.generation = parse_index(cells[0], "malformed trace", lineno);
    row.individual = parse_index(cells[1], "malformed trace", lineno);
    row.fitness = parse_double(cells[2], "malformed trace", lineno);
    for (std::size_t c = 3; c < cells.size(); ++c)
      row.genes.push_back(parse_double(cells[c], "malformed trace", lineno));
    data.rows.push_back(std::move(row));
  }
  if (!header) throw InputError("malformed trace: no header line");
  std::size_t total = 0;
  for (const auto& s : data.layout) total += s.phase_count;
  if (!data.layout.empty() && total != columns - 3)
    throw InputError("malformed trace: layout covers " + std::to_string(total) +
                     " genes but the file has " + std::to_string(columns - 3));
  return data;
}

void write_flows_csv(std::ostream& os, const Network& net, std::span<const double> flows,
                     std::span<const double> lambdas, std::span<const double> travel_times,
                     const Provenance& p) {
  const auto n = net.links().size();
  if (flows.size() != n || lambdas.size() != n || travel_times.size() != n)
    throw InputError("flows CSV needs one value per link");
  os << csv_provenance(p) << "link_id,flow_vph,lambda,travel_time_s\n";
  for (std::size_t a = 0; a < n; ++a)
    os << net.link(a).id << ',' << format_number(flows[a]) << ',' << format_number(lambdas[a])
       << ',' << format_number(travel_times[a]) << '\n';
}

std::vector<FlowRow> read_flows_csv(std::istream& is) {
  std::vector<FlowRow> rows;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line, ',');
    if (!header) {
      if (cells.size() != 4 || cells[0] != "link_id" || cells[1] != "flow_vph")
        throw InputError("malformed flows CSV: expected header 'link_id,flow_vph,lambda,travel_time_s'");
      header = true;
      continue;
    }
    if (cells.size() != 4)
      throw InputError("malformed flows CSV: line " + std::to_string(lineno) +
                       " needs 4 fields");
    rows.push_back({cells[0], parse_double(cells[1], "malformed flows CSV", lineno),
                    parse_double(cells[2], "malformed flows CSV", lineno),
                    parse_double(cells[3], "malformed flows CSV", lineno)});
  }
  if (!header) throw InputError("malformed flows CSV: no header line");
  return rows;
}

json plans_json(const Network& net, std::span<const SignalPlan> plans) {
  json out = json::array();
  for (const auto& p : plans)
    out.push_back({{"junction", net.node(p.junction).id},
                   {"cycle_s", p.cycle},
                   {"durations_s", p.durations()}});
  return out;
}

std::vector<SignalPlan> parse_plans(const Network& net, const json& doc) {
  const json* list = &doc;
  if (doc.is_object()) {
    auto it = doc.find("plan");
    if (it == doc.end()) throw InputError("plan document has no 'plan' field");
    list = &*it;
  }
  if (!list->is_array()) throw InputError("plan must be an array of junction plans");

  const auto layout = ChromosomeLayout::from_network(net, 0.0);
  std::vector<double> genes(layout.gene_count());
  std::vector<char> seen(layout.segments().size(), 0);
  for (const auto& entry : *list) {
    if (!entry.is_object() || !entry.contains("junction") || !entry.contains("durations_s"))
      throw InputError("plan entries need 'junction' and 'durations_s'");
    const auto& j = entry["junction"];
    const auto id = j.is_string() ? j.get<std::string>() : j.dump();
    const auto node = net.node_index(id);
    std::size_t k = 0;
    while (k < layout.segments().size() && layout.segments()[k].junction != node) ++k;
    if (k == layout.segments().size())
      throw InputError("plan names junction '" + id + "' which has no signal control");
    if (seen[k]) throw InputError("plan lists junction '" + id + "' twice");
    seen[k] = 1;
    std::vector<double> d;
    try {
      d = entry["durations_s"].get<std::vector<double>>();
    } catch (const json::exception&) {
      throw InputError("plan for junction '" + id + "': durations_s must be numbers");
    }
    const auto& seg = layout.segments()[k];
    if (d.size() != seg.phase_count)
      throw InputError("plan for junction '" + id + "' has " + std::to_string(d.size()) +
                       " phases, expected " + std::to_string(seg.phase_count));
    if (auto c = entry.find("cycle_s"); c != entry.end() && c->is_number() &&
                                        std::abs(c->get<double>() - seg.cycle) > kCycleTolerance)
      throw InputError("plan for junction '" + id + "' has cycle " + c->dump() +
                       ", the network says " + format_number(seg.cycle));
    std::copy(d.begin(), d.end(), genes.begin() + static_cast<std::ptrdiff_t>(seg.offset));
  }
  for (std::size_t k = 0; k < seen.size(); ++k)
    if (!seen[k])
      throw InputError("plan is missing junction '" + net.node(layout.segments()[k].junction).id +
                       "'");
  auto plans = decode_chromosome(genes, layout, net);
  for (const auto& p : plans) phase_splits(p);  // positive durations, exact cycle
  return plans;
}

json assignment_report_json(const Network& net, const AssignmentResult& r,
                            std::span<const double> lambdas, const Provenance& p) {
  json links = json::array();
  for (std::size_t a = 0; a < net.links().size(); ++a)
    links.push_back({{"link_id", net.link(a).id},
                     {"flow_vph", r.link_flows[a]},
                     {"lambda", lambdas[a]}});
  return {{"provenance", provenance_json(p)},
          {"ttt_veh_h", r.total_travel_time},
          {"relative_gap", r.relative_gap},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"beckmann_veh_s_per_h", r.beckmann_value},
          {"links", std::move(links)}};
}

json scenario_report_json(const Network& net, const ScenarioReport& r, const Provenance& p) {
  json routes = json::array();
  for (std::size_t i = 0; i < r.routes.size(); ++i) {
    json ids = json::array();
    for (auto a : r.routes[i].links) ids.push_back(net.link(a).id);
    routes.push_back({{"route", i + 1},
                      {"links", std::move(ids)},
                      {"flow_vph", r.routes[i].flow},
                      {"free_flow_time_s", r.routes[i].free_flow_time},
                      {"travel_time_s", r.routes[i].travel_time}});
  }
  json out = {{"provenance", provenance_json(p)},
              {"scenario", static_cast<int>(r.kind)},
              {"kind", std::string(to_string(r.kind))},
              {"ttt_veh_h", r.ttt},
              {"plan", plans_json(net, r.plan)},
              {"deltas",
               {{"vs_scenario1_pct", optional_number(r.vs_scenario1_pct)},
                {"vs_scenario2_pct", optional_number(r.vs_scenario2_pct)}}},
              {"route_flows", std::move(routes)},
              {"relative_gap", r.relative_gap},
              {"iterations", r.iterations},
              {"converged", r.converged}};
  if (r.ga)
    out["ga"] = {{"best_fitness", r.ga->best_fitness},
                 {"generations", r.ga->trace.size()},
                 {"evaluations", r.ga->evaluations},
                 {"cache_hits", r.ga->cache_hits},
                 {"unconverged", r.ga->unconverged}};
  return out;
}

json scenario_summary_json(const ScenarioReport* s1, const ScenarioReport* s2,
                           const ScenarioReport* s3, const Provenance& p) {
  json ttt = json::object();
  if (s1) ttt["scenario1"] = s1->ttt;
  if (s2) ttt["scenario2"] = s2->ttt;
  if (s3) ttt["scenario3"] = s3->ttt;
  json cmp = json::object();
  if (s1 && s2) cmp["s2_vs_s1_increase_pct"] = optional_number(compare(*s2, *s1).percent_increase);
  if (s1 && s3) cmp["s3_vs_s1_increase_pct"] = optional_number(compare(*s3, *s1).percent_increase);
  if (s2 && s3) cmp["s3_vs_s2_saving_pct"] = optional_number(compare(*s3, *s2).percent_saving);
  return {{"provenance", provenance_json(p)}, {"ttt_veh_h", std::move(ttt)},
          {"comparisons", std::move(cmp)}};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << content;
  if (!out) throw InputError("write failed for '" + path + "'");
}

}  // namespace signalopt
