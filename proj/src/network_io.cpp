#include "phasebal/network_io.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "phasebal/csv.hpp"
#include "phasebal/error.hpp"

namespace phasebal {

namespace {

std::size_t line_of(const YAML::Node& node) { return static_cast<std::size_t>(node.Mark().line + 1); }

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const {
    throw ParseError(source_, node.IsDefined() ? line_of(node) : 0, message);
  }

  void only_keys(const YAML::Node& map, std::initializer_list<const char*> keys, const char* what) const {
    if (!map.IsMap()) fail(map, std::string(what) + " must be a mapping");
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      bool known = false;
      for (const char* k : keys) known = known || key == k;
      if (!known) fail(kv.first, "unknown key '" + key + "' in " + what);
    }
  }

  template <typename T>
  T get(const YAML::Node& map, const char* key, const char* what) const {
    const YAML::Node node = map[key];
    if (!node) fail(map, std::string(what) + " is missing '" + key + "'");
    return convert<T>(node, key);
  }

  template <typename T>
  T get_or(const YAML::Node& map, const char* key, T fallback) const {
    const YAML::Node node = map[key];
    if (!node) return fallback;
    return convert<T>(node, key);
  }

 private:
  template <typename T>
  T convert(const YAML::Node& node, const char* key) const {
    if (!node.IsScalar()) fail(node, std::string("'") + key + "' must be a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, std::string("'") + key + "' has an invalid value '" + node.Scalar() + "'");
    }
  }

  std::string source_;
};

Conductor read_conductor(const Reader& rd, const YAML::Node& node, Conductor fallback, const char* what) {
  if (!node) return fallback;
  rd.only_keys(node, {"r_ohm_per_m", "x_ohm_per_m"}, what);
  return {rd.get_or(node, "r_ohm_per_m", fallback.resistance_per_m),
          rd.get_or(node, "x_ohm_per_m", fallback.reactance_per_m)};
}

YAML::Node sequence(const Reader& rd, const YAML::Node& root, const char* key) {
  const YAML::Node node = root[key];
  if (!node) rd.fail(root, std::string("missing '") + key + "' section");
  if (!node.IsSequence()) rd.fail(node, std::string("'") + key + "' must be a list");
  return node;
}

}  // namespace

std::size_t NetworkDocument::line_of(const Violation& v) const {
  auto pick = [&](const std::vector<std::size_t>& lines) { return v.index < lines.size() ? lines[v.index] : network_line; };
  switch (v.entity) {
    case Entity::bus: return pick(bus_lines);
    case Entity::segment: return pick(segment_lines);
    case Entity::customer: return pick(customer_lines);
    case Entity::network: break;
  }
  return network_line;
}

std::string NetworkDocument::located(const Violation& v) const {
  return source + ":" + std::to_string(line_of(v)) + ": " + describe(v);
}

NetworkDocument parse_network(std::istream& in, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(in);
  } catch (const YAML::ParserException& e) {
    throw ParseError(source, static_cast<std::size_t>(e.mark.line + 1), e.msg);
  }
  const Reader rd(source);
  if (!root.IsMap()) throw ParseError(source, 1, "network document must be a mapping");
  rd.only_keys(root, {"source", "conductors", "buses", "segments", "customers"}, "network");

  NetworkDocument doc;
  doc.source = source;
  Network& net = doc.network;

  if (const YAML::Node src = root["source"]) {
    rd.only_keys(src, {"phase_voltage_v", "transformer_kva"}, "source");
    net.source_phase_voltage = rd.get_or(src, "phase_voltage_v", kDefaultSourcePhaseVoltage);
    net.transformer_rating = rd.get_or(src, "transformer_kva", 0.0);
    doc.network_line = line_of(src);
  }
  if (const YAML::Node cond = root["conductors"]) {
    rd.only_keys(cond, {"trunk", "service_drop"}, "conductors");
    net.trunk_conductor = read_conductor(rd, cond["trunk"], kDefaultTrunkConductor, "trunk conductor");
    net.drop_conductor = read_conductor(rd, cond["service_drop"], kDefaultDropConductor, "service_drop conductor");
  }

  for (const auto& node : sequence(rd, root, "buses")) {
    rd.only_keys(node, {"id", "distance_m"}, "bus");
    net.buses.push_back({rd.get<int>(node, "id", "bus"), rd.get<double>(node, "distance_m", "bus")});
    doc.bus_lines.push_back(line_of(node));
  }

  for (const auto& node : sequence(rd, root, "segments")) {
    rd.only_keys(node, {"from", "to", "length_m", "kind", "r_ohm_per_m", "x_ohm_per_m"}, "segment");
    LineSegment s;
    s.from_bus = rd.get<int>(node, "from", "segment");
    s.to_bus = rd.get<int>(node, "to", "segment");
    s.length = rd.get<double>(node, "length_m", "segment");
    const auto kind = rd.get_or<std::string>(node, "kind", "trunk");
    if (kind == "trunk") s.kind = SegmentKind::trunk;
    else if (kind == "service_drop") s.kind = SegmentKind::service_drop;
    else rd.fail(node["kind"], "segment kind must be trunk or service_drop, got '" + kind + "'");
    const Conductor& base = s.kind == SegmentKind::trunk ? net.trunk_conductor : net.drop_conductor;
    s.resistance_per_m = rd.get_or(node, "r_ohm_per_m", base.resistance_per_m);
    s.reactance_per_m = rd.get_or(node, "x_ohm_per_m", base.reactance_per_m);
    net.segments.push_back(s);
    doc.segment_lines.push_back(line_of(node));
  }

  for (const auto& node : sequence(rd, root, "customers")) {
    rd.only_keys(node, {"id", "bus", "phase", "movable", "drop_length_m", "drop_r_ohm_per_m", "drop_x_ohm_per_m"},
                 "customer");
    Customer c;
    c.id = rd.get<std::string>(node, "id", "customer");
    c.bus = rd.get<int>(node, "bus", "customer");
    const int phase = rd.get<int>(node, "phase", "customer");
    const auto parsed = PhaseId::parse(phase);
    if (!parsed) rd.fail(node["phase"], "phase must be 1, 2 or 3, got " + std::to_string(phase));
    c.initial_phase = *parsed;
    c.movable = rd.get_or(node, "movable", true);
    c.drop.length = rd.get_or(node, "drop_length_m", 0.0);
    c.drop.conductor = {rd.get_or(node, "drop_r_ohm_per_m", net.drop_conductor.resistance_per_m),
                        rd.get_or(node, "drop_x_ohm_per_m", net.drop_conductor.reactance_per_m)};
    net.customers.push_back(std::move(c));
    doc.customer_lines.push_back(line_of(node));
  }
  return doc;
}

Network read_network(std::istream& in, const std::string& source) {
  NetworkDocument doc = parse_network(in, source);
  const auto problems = validate(doc.network);
  if (!problems.empty()) {
    std::string msg = describe(problems.front());
    if (problems.size() > 1) msg += " (and " + std::to_string(problems.size() - 1) + " more)";
    throw ParseError(source, doc.line_of(problems.front()), msg);
  }
  return std::move(doc.network);
}

Network read_network_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return read_network(in, path.string());
}

void write_network(std::ostream& out, const Network& net) {
  YAML::Emitter e;
  const auto num = [](double v) { return csv::format_double(v); };
  auto conductor = [&e, &num](const Conductor& c) {
    e << YAML::Flow << YAML::BeginMap << YAML::Key << "r_ohm_per_m" << YAML::Value << num(c.resistance_per_m)
      << YAML::Key << "x_ohm_per_m" << YAML::Value << num(c.reactance_per_m) << YAML::EndMap;
  };
  e << YAML::BeginMap;
  e << YAML::Key << "source" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "phase_voltage_v"
    << YAML::Value << num(net.source_phase_voltage) << YAML::Key << "transformer_kva" << YAML::Value
    << num(net.transformer_rating) << YAML::EndMap;
  e << YAML::Key << "conductors" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "trunk" << YAML::Value;
  conductor(net.trunk_conductor);
  e << YAML::Key << "service_drop" << YAML::Value;
  conductor(net.drop_conductor);
  e << YAML::EndMap;

  e << YAML::Key << "buses" << YAML::Value << YAML::BeginSeq;
  for (const auto& b : net.buses)
    e << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << b.id << YAML::Key << "distance_m"
      << YAML::Value << num(b.distance_from_transformer) << YAML::EndMap;
  e << YAML::EndSeq;

  e << YAML::Key << "segments" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : net.segments)
    e << YAML::Flow << YAML::BeginMap << YAML::Key << "from" << YAML::Value << s.from_bus << YAML::Key << "to"
      << YAML::Value << s.to_bus << YAML::Key << "length_m" << YAML::Value << num(s.length) << YAML::Key << "kind"
      << YAML::Value << (s.kind == SegmentKind::trunk ? "trunk" : "service_drop") << YAML::Key << "r_ohm_per_m"
      << YAML::Value << num(s.resistance_per_m) << YAML::Key << "x_ohm_per_m" << YAML::Value << num(s.reactance_per_m)
      << YAML::EndMap;
  e << YAML::EndSeq;

  e << YAML::Key << "customers" << YAML::Value << YAML::BeginSeq;
  for (const auto& c : net.customers)
    e << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << YAML::DoubleQuoted << c.id
      << YAML::Key << "bus" << YAML::Value << c.bus << YAML::Key << "phase" << YAML::Value
      << c.initial_phase.value() << YAML::Key << "movable" << YAML::Value << c.movable << YAML::Key
      << "drop_length_m" << YAML::Value << num(c.drop.length) << YAML::Key << "drop_r_ohm_per_m" << YAML::Value
      << num(c.drop.conductor.resistance_per_m) << YAML::Key << "drop_x_ohm_per_m" << YAML::Value
      << num(c.drop.conductor.reactance_per_m) << YAML::EndMap;
  e << YAML::EndSeq;
  e << YAML::EndMap;
  out << e.c_str() << '\n';
}

void write_network_file(const std::filesystem::path& path, const Network& network) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_network(out, network);
}

namespace {

constexpr const char* kProfileHeader = "timestamp,customer_id,active_power_w,reactive_power_var";

// Numeric when both parse as numbers, else lexical.
bool ascends(const std::string& a, const std::string& b) {
  const auto x = csv::parse_double(a);
  const auto y = csv::parse_double(b);
  if (x && y) return *x < *y;
  return a < b;
}

}  // namespace

LoadProfile read_profile(std::istream& in, const std::string& source) {
  csv::LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw ParseError(source, 0, "profile is empty");
  const auto header = csv::split(line);
  if (header != csv::split(kProfileHeader))
    throw ParseError(source, reader.line_number(), std::string("expected header '") + kProfileHeader + "'");

  LoadProfile profile;
  std::unordered_map<std::string, std::size_t> column;
  std::vector<bool> seen;
  std::size_t group_line = 0;

  auto close_group = [&](std::size_t line_no) {
    if (profile.snapshots.size() == 1) {
      seen.assign(profile.customer_ids.size(), true);
      return;
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
      if (!seen[i])
        throw ParseError(source, line_no,
                         "timestamp '" + profile.snapshots.back().timestamp + "' is missing customer '" +
                             profile.customer_ids[i] + "'");
  };

  while (reader.next(line)) {
    const std::size_t at = reader.line_number();
    const auto f = csv::split(line);
    if (f.size() != 4) throw ParseError(source, at, "expected 4 fields, got " + std::to_string(f.size()));
    const auto p = csv::parse_double(f[2]);
    const auto q = csv::parse_double(f[3]);
    if (!p || !std::isfinite(*p)) throw ParseError(source, at, "invalid active power '" + f[2] + "'");
    if (!q || !std::isfinite(*q)) throw ParseError(source, at, "invalid reactive power '" + f[3] + "'");
    if (*p < 0.0) throw ParseError(source, at, "active power must be non-negative");
    if (f[0].empty()) throw ParseError(source, at, "empty timestamp");
    if (f[1].empty()) throw ParseError(source, at, "empty customer id");

    if (profile.snapshots.empty() || profile.snapshots.back().timestamp != f[0]) {
      if (!profile.snapshots.empty()) {
        close_group(group_line);
        if (!ascends(profile.snapshots.back().timestamp, f[0]))
          throw ParseError(source, at, "timestamp '" + f[0] + "' does not ascend");
      }
      LoadSnapshot snap{f[0], {}};
      if (!profile.snapshots.empty()) snap.demand.resize(profile.customer_ids.size());
      profile.snapshots.push_back(std::move(snap));
      std::fill(seen.begin(), seen.end(), false);
    }
    group_line = at;
    LoadSnapshot& snap = profile.snapshots.back();
    const Demand d{*p, *q};
    if (profile.snapshots.size() == 1) {
      if (!column.emplace(f[1], profile.customer_ids.size()).second)
        throw ParseError(source, at, "customer '" + f[1] + "' repeated within timestamp '" + f[0] + "'");
      profile.customer_ids.push_back(f[1]);
      snap.demand.push_back(d);
      continue;
    }
    const auto it = column.find(f[1]);
    if (it == column.end())
      throw ParseError(source, at, "customer '" + f[1] + "' does not appear in the first timestamp");
    if (seen[it->second])
      throw ParseError(source, at, "customer '" + f[1] + "' repeated within timestamp '" + f[0] + "'");
    seen[it->second] = true;
    snap.demand[it->second] = d;
  }
  if (profile.snapshots.empty()) throw ParseError(source, reader.line_number(), "profile has no rows");
  close_group(group_line);
  return profile;
}

LoadProfile read_profile_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return read_profile(in, path.string());
}

void write_profile(std::ostream& out, const LoadProfile& profile) {
  out << kProfileHeader << '\n';
  for (const auto& snap : profile.snapshots)
    for (std::size_t i = 0; i < snap.demand.size(); ++i)
      out << snap.timestamp << ',' << profile.customer_ids[i] << ',' << csv::format_double(snap.demand[i].active_power)
          << ',' << csv::format_double(snap.demand[i].reactive_power) << '\n';
}

void write_profile_file(const std::filesystem::path& path, const LoadProfile& profile) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_profile(out, profile);
}

}  // namespace phasebal
