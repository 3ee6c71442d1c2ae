#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "signalopt/assignment.hpp"
#include "signalopt/ga.hpp"
#include "signalopt/scenarios.hpp"
#include "signalopt/signals.hpp"

namespace signalopt {

inline constexpr std::string_view kVersion = "0.1.0";

// Stamped on every output file so a result can be traced back to the
// configuration that produced it.
struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version{kVersion};
};

// First 16 hex digits of the SHA-256 of `canonical`.
std::string config_hash(std::string_view canonical);

// Shortest text that reads back to the same double.
std::string format_number(double v);

std::string csv_provenance(const Provenance& p);  // one "# ..." line
nlohmann::json provenance_json(const Provenance& p);

// Convergence trace: generation,individual_index,fitness,gene_1..gene_N.
// A "# layout" comment records junction ids and phase counts for plotting.
void write_trace_header(std::ostream& os, const ChromosomeLayout& layout, const Network& net,
                        const Provenance& p);
void write_trace_rows(std::ostream& os, const GenerationRecord& record);

// Best-so-far summary: generation,best_fitness,gene_1..gene_N.
void write_best_header(std::ostream& os, const ChromosomeLayout& layout, const Provenance& p);
void write_best_row(std::ostream& os, const GenerationRecord& record);

struct TraceSegment {
  std::string junction;
  std::size_t phase_count = 0;
};

struct TraceRow {
  std::size_t generation = 0;
  std::size_t individual = 0;
  double fitness = 0.0;
  std::vector<double> genes;
};

struct TraceData {
  std::vector<TraceSegment> layout;  // empty if the file carries no layout line
  std::vector<TraceRow> rows;

  std::size_t generation_count() const;
};

TraceData read_trace_csv(std::istream& is);
std::vector<TraceSegment> trace_layout(const ChromosomeLayout& layout, const Network& net);

// link_id,flow_vph,lambda,travel_time_s
void write_flows_csv(std::ostream& os, const Network& net, std::span<const double> flows,
                     std::span<const double> lambdas, std::span<const double> travel_times,
                     const Provenance& p);

struct FlowRow {
  std::string link;
  double flow = 0.0;
  double lambda = 1.0;
  double travel_time = 0.0;
};

std::vector<FlowRow> read_flows_csv(std::istream& is);

// [{junction, cycle_s, durations_s}]
nlohmann::json plans_json(const Network& net, std::span<const SignalPlan> plans);

// Accepts the array above or any object carrying it under "plan" (a
// scenario report, a best-plan file). Every signal control of `net` must
// appear exactly once.
std::vector<SignalPlan> parse_plans(const Network& net, const nlohmann::json& doc);

nlohmann::json assignment_report_json(const Network& net, const AssignmentResult& r,
                                      std::span<const double> lambdas, const Provenance& p);

nlohmann::json scenario_report_json(const Network& net, const ScenarioReport& r,
                                    const Provenance& p);

// Percent changes between the scenario TTTs that are present.
nlohmann::json scenario_summary_json(const ScenarioReport* s1, const ScenarioReport* s2,
                                     const ScenarioReport* s3, const Provenance& p);

std::string read_file(const std::string& path);  // InputError naming the path
void write_file(const std::string& path, std::string_view content);

}  // namespace signalopt
