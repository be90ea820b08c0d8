#include "cli/exports.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "phasebal/csv.hpp"
#include "phasebal/error.hpp"

namespace phasebal::cli {

namespace {

using csv::format_double;

// Reads a CSV with a fixed header and hands every row to fn(fields, line).
template <typename Fn>
void read_rows(std::istream& in, const std::string& source, const std::string& header, Fn&& fn) {
  csv::LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw ParseError(source, 0, "file is empty");
  if (csv::split(line) != csv::split(header)) throw ParseError(source, reader.line_number(), "expected header '" + header + "'");
  const std::size_t width = csv::split(header).size();
  while (reader.next(line)) {
    auto fields = csv::split(line);
    if (fields.size() != width)
      throw ParseError(source, reader.line_number(),
                       "expected " + std::to_string(width) + " fields, got " + std::to_string(fields.size()));
    fn(fields, reader.line_number());
  }
}

double number(const std::string& s, const std::string& source, std::size_t line) {
  const auto v = csv::parse_double(s);
  if (!v) throw ParseError(source, line, "invalid number '" + s + "'");
  return *v;
}

long long integer(const std::string& s, const std::string& source, std::size_t line) {
  const auto v = csv::parse_int(s);
  if (!v) throw ParseError(source, line, "invalid integer '" + s + "'");
  return *v;
}

PhaseId phase(const std::string& s, const std::string& source, std::size_t line) {
  const auto p = PhaseId::parse(static_cast<int>(integer(s, source, line)));
  if (!p) throw ParseError(source, line, "phase must be 1, 2 or 3, got '" + s + "'");
  return *p;
}

constexpr const char* kSolutionHeader = "customer_id,from_phase,to_phase";
constexpr const char* kHistoryHeader = "generation,best_fitness,imbalance_pct,voltage_drop_pct,changes";
constexpr const char* kVoltageHeader = "snapshot,bus_id,distance_m,phase,voltage_v";
constexpr const char* kSeriesHeader = "snapshot,timestamp,imbalance_pct,voltage_drop_pct";

}  // namespace

std::vector<SolutionRow> solution_rows(const Network& network, const PhaseAssignment& proposed) {
  const auto phases = customer_phases(network, proposed);
  std::vector<SolutionRow> rows;
  for (std::size_t i = 0; i < network.customers.size(); ++i)
    if (phases[i] != network.customers[i].initial_phase)
      rows.push_back({network.customers[i].id, network.customers[i].initial_phase, phases[i]});
  return rows;
}

void write_solution(std::ostream& out, const std::vector<SolutionRow>& rows) {
  out << kSolutionHeader << '\n';
  for (const auto& r : rows) out << r.customer_id << ',' << r.from.value() << ',' << r.to.value() << '\n';
}

std::vector<SolutionRow> read_solution(std::istream& in, const std::string& source) {
  std::vector<SolutionRow> rows;
  read_rows(in, source, kSolutionHeader, [&](const std::vector<std::string>& f, std::size_t line) {
    if (f[0].empty()) throw ParseError(source, line, "empty customer id");
    rows.push_back({f[0], phase(f[1], source, line), phase(f[2], source, line)});
  });
  return rows;
}

PhaseAssignment apply_solution(const Network& network, const std::vector<SolutionRow>& rows) {
  PhaseAssignment a = initial_assignment(network);
  const auto& layout = *a.layout();
  for (const auto& row : rows) {
    const auto it = std::find(layout.customer_ids.begin(), layout.customer_ids.end(), row.customer_id);
    if (it == layout.customer_ids.end()) {
      if (network.customer_index(row.customer_id))
        throw Error("solution moves customer '" + row.customer_id + "', which is not movable");
      throw Error("solution names unknown customer '" + row.customer_id + "'");
    }
    const auto gene = static_cast<std::size_t>(it - layout.customer_ids.begin());
    if (a[gene] != row.from)
      throw Error("solution expects customer '" + row.customer_id + "' on phase " + std::to_string(row.from.value()) +
                  ", network has phase " + std::to_string(a[gene].value()));
    a.set(gene, row.to);
  }
  return a;
}

void write_history(std::ostream& out, const std::vector<ga::GenerationRecord>& history) {
  out << kHistoryHeader << '\n';
  for (const auto& h : history)
    out << h.generation << ',' << format_double(h.best_fitness) << ',' << format_double(h.imbalance_b) << ','
        << format_double(h.voltage_drop) << ',' << h.changes << '\n';
}

std::vector<ga::GenerationRecord> read_history(std::istream& in, const std::string& source) {
  std::vector<ga::GenerationRecord> out;
  read_rows(in, source, kHistoryHeader, [&](const std::vector<std::string>& f, std::size_t line) {
    out.push_back({static_cast<std::size_t>(integer(f[0], source, line)), number(f[1], source, line),
                   number(f[2], source, line), number(f[3], source, line),
                   static_cast<std::size_t>(integer(f[4], source, line))});
  });
  return out;
}

std::vector<VoltagePoint> voltage_profile(const Network& network, const PowerFlowResult& result, std::size_t snapshot) {
  std::vector<VoltagePoint> out;
  for (int p : PhaseId::all()) {
    for (BusId id : trunk_buses(network)) {
      const std::size_t idx = *network.bus_index(id);
      out.push_back({snapshot, id, network.buses[idx].distance_from_transformer, p, result.voltage(idx, PhaseId(p))});
    }
  }
  return out;
}

void write_voltage_profile(std::ostream& out, const std::vector<VoltagePoint>& points) {
  out << kVoltageHeader << '\n';
  for (const auto& v : points)
    out << v.snapshot << ',' << v.bus << ',' << format_double(v.distance) << ',' << v.phase << ','
        << format_double(v.voltage) << '\n';
}

std::vector<VoltagePoint> read_voltage_profile(std::istream& in, const std::string& source) {
  std::vector<VoltagePoint> out;
  read_rows(in, source, kVoltageHeader, [&](const std::vector<std::string>& f, std::size_t line) {
    out.push_back({static_cast<std::size_t>(integer(f[0], source, line)), static_cast<BusId>(integer(f[1], source, line)),
                   number(f[2], source, line), phase(f[3], source, line).value(), number(f[4], source, line)});
  });
  return out;
}

std::vector<SeriesPoint> series(const LoadProfile& profile, const FitnessReport& report) {
  std::vector<SeriesPoint> out;
  for (std::size_t k = 0; k < report.per_snapshot_b.size(); ++k)
    out.push_back({k, k < profile.size() ? profile.snapshots[k].timestamp : std::to_string(k), report.per_snapshot_b[k],
                   report.per_snapshot_dv[k]});
  return out;
}

void write_series(std::ostream& out, const std::vector<SeriesPoint>& points) {
  out << kSeriesHeader << '\n';
  for (const auto& s : points)
    out << s.snapshot << ',' << s.timestamp << ',' << format_double(s.imbalance) << ','
        << format_double(s.voltage_drop) << '\n';
}

std::vector<SeriesPoint> read_series(std::istream& in, const std::string& source) {
  std::vector<SeriesPoint> out;
  read_rows(in, source, kSeriesHeader, [&](const std::vector<std::string>& f, std::size_t line) {
    out.push_back({static_cast<std::size_t>(integer(f[0], source, line)), f[1], number(f[2], source, line),
                   number(f[3], source, line)});
  });
  return out;
}

nlohmann::json to_json(const FitnessReport& r) {
  return {{"imbalance_b_pct", r.imbalance_b},
          {"voltage_drop_pct", r.voltage_drop},
          {"changes", r.changes},
          {"fitness", r.fitness},
          {"per_snapshot_b_pct", r.per_snapshot_b},
          {"per_snapshot_dv_pct", r.per_snapshot_dv},
          {"nonconverged_snapshots", r.nonconverged}};
}

FitnessReport fitness_report_from_json(const nlohmann::json& j) {
  try {
    FitnessReport r;
    r.imbalance_b = j.at("imbalance_b_pct").get<double>();
    r.voltage_drop = j.at("voltage_drop_pct").get<double>();
    r.changes = j.at("changes").get<std::size_t>();
    r.fitness = j.at("fitness").get<double>();
    r.per_snapshot_b = j.at("per_snapshot_b_pct").get<std::vector<double>>();
    r.per_snapshot_dv = j.at("per_snapshot_dv_pct").get<std::vector<double>>();
    r.nonconverged = j.at("nonconverged_snapshots").get<std::size_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid fitness report: ") + e.what());
  }
}

}  // namespace phasebal::cli
