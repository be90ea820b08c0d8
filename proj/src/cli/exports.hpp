#pragma once

// Delimited-text and JSON artifacts written by the command-line tool, each
// with a reader so every export can be loaded back.
//
//   solution.csv        customer_id,from_phase,to_phase   (changed customers only)
//   history.csv         generation,best_fitness,imbalance_pct,voltage_drop_pct,changes
//   voltage profile     snapshot,bus_id,distance_m,phase,voltage_v   (trunk buses)
//   series.csv          snapshot,timestamp,imbalance_pct,voltage_drop_pct
//   report.json         fitness reports and the run configuration

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "phasebal/ga.hpp"
#include "phasebal/load_flow.hpp"
#include "phasebal/metrics.hpp"
#include "phasebal/network.hpp"

namespace phasebal::cli {

struct SolutionRow {
  std::string customer_id;
  PhaseId from{1};
  PhaseId to{1};

  friend bool operator==(const SolutionRow&, const SolutionRow&) = default;
};

std::vector<SolutionRow> solution_rows(const Network& network, const PhaseAssignment& proposed);
void write_solution(std::ostream& out, const std::vector<SolutionRow>& rows);
std::vector<SolutionRow> read_solution(std::istream& in, const std::string& source = "<solution>");

// Initial assignment with the listed moves applied. Throws Error when a row
// names an unknown or locked customer or its from_phase is not the initial one.
PhaseAssignment apply_solution(const Network& network, const std::vector<SolutionRow>& rows);

void write_history(std::ostream& out, const std::vector<ga::GenerationRecord>& history);
std::vector<ga::GenerationRecord> read_history(std::istream& in, const std::string& source = "<history>");

struct VoltagePoint {
  std::size_t snapshot = 0;
  BusId bus = 0;
  double distance = 0.0;
  int phase = 1;
  double voltage = 0.0;

  friend bool operator==(const VoltagePoint&, const VoltagePoint&) = default;
};

std::vector<VoltagePoint> voltage_profile(const Network& network, const PowerFlowResult& result, std::size_t snapshot);
void write_voltage_profile(std::ostream& out, const std::vector<VoltagePoint>& points);
std::vector<VoltagePoint> read_voltage_profile(std::istream& in, const std::string& source = "<voltage profile>");

struct SeriesPoint {
  std::size_t snapshot = 0;
  std::string timestamp;
  double imbalance = 0.0;
  double voltage_drop = 0.0;

  friend bool operator==(const SeriesPoint&, const SeriesPoint&) = default;
};

std::vector<SeriesPoint> series(const LoadProfile& profile, const FitnessReport& report);
void write_series(std::ostream& out, const std::vector<SeriesPoint>& points);
std::vector<SeriesPoint> read_series(std::istream& in, const std::string& source = "<series>");

nlohmann::json to_json(const FitnessReport& report);
FitnessReport fitness_report_from_json(const nlohmann::json& j);

}  // namespace phasebal::cli
