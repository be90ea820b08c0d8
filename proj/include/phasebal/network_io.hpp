#pragma once

// File formats.
//
// Network: YAML document
//
//   source:     {phase_voltage_v: 230.9, transformer_kva: 250}
//   conductors:
//     trunk:        {r_ohm_per_m: 0.00191, x_ohm_per_m: 0.0001}
//     service_drop: {r_ohm_per_m: 0.00115, x_ohm_per_m: 0.00008}
//   buses:      [{id: 0, distance_m: 0}, ...]
//   segments:   [{from: 0, to: 1, length_m: 20, kind: trunk}, ...]
//   customers:  [{id: C001, bus: 1, phase: 1, movable: true, drop_length_m: 0}, ...]
//
// source and conductors are optional. Segments may override r_ohm_per_m and
// x_ohm_per_m (default: conductor of their kind); customers may override
// drop_r_ohm_per_m and drop_x_ohm_per_m. kind is trunk or service_drop,
// movable defaults to true, drop_length_m to 0.
//
// Load profile: CSV with header
//
//   timestamp,customer_id,active_power_w,reactive_power_var
//
// Rows of one timestamp are contiguous, timestamps ascend (numerically when
// numeric, else lexically) and every timestamp lists the same customers.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "phasebal/network.hpp"

namespace phasebal {

// A parsed network plus the source line of every entity.
struct NetworkDocument {
  Network network;
  std::string source;
  std::size_t network_line = 1;
  std::vector<std::size_t> bus_lines, segment_lines, customer_lines;

  std::size_t line_of(const Violation& v) const;
  std::string located(const Violation& v) const;
};

// Syntax and schema only; throws ParseError.
NetworkDocument parse_network(std::istream& in, const std::string& source = "<network>");

// parse_network followed by validate(); the first violation becomes a ParseError.
Network read_network(std::istream& in, const std::string& source = "<network>");
Network read_network_file(const std::filesystem::path& path);

void write_network(std::ostream& out, const Network& network);
void write_network_file(const std::filesystem::path& path, const Network& network);

// Throws ParseError.
LoadProfile read_profile(std::istream& in, const std::string& source = "<profile>");
LoadProfile read_profile_file(const std::filesystem::path& path);

void write_profile(std::ostream& out, const LoadProfile& profile);
void write_profile_file(const std::filesystem::path& path, const LoadProfile& profile);

}  // namespace phasebal
