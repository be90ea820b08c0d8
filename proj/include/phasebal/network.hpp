#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace phasebal {

// One of the three transformer phases, 1 = A, 2 = B, 3 = C.
class PhaseId {
 public:
  static constexpr int kCount = 3;

  // Throws std::invalid_argument for anything outside {1, 2, 3}.
  explicit PhaseId(int value);

  static std::optional<PhaseId> parse(int value) noexcept;
  static constexpr std::array<int, 3> all() { return {1, 2, 3}; }

  int value() const noexcept { return value_; }
  std::size_t index() const noexcept { return static_cast<std::size_t>(value_ - 1); }
  char letter() const noexcept { return static_cast<char>('A' + value_ - 1); }

  friend bool operator==(PhaseId, PhaseId) = default;

 private:
  int value_;
};

using BusId = int;

struct Bus {
  BusId id = 0;
  double distance_from_transformer = 0.0;  // m
};

enum class SegmentKind { trunk, service_drop };

struct LineSegment {
  BusId from_bus = 0;
  BusId to_bus = 0;
  double length = 0.0;            // m
  double resistance_per_m = 0.0;  // ohm/m
  double reactance_per_m = 0.0;   // ohm/m
  SegmentKind kind = SegmentKind::trunk;
};

struct Conductor {
  double resistance_per_m = 0.0;
  double reactance_per_m = 0.0;
};

// Aluminium 15 mm2 trunk and copper 15 mm2 service drop.
inline constexpr Conductor kDefaultTrunkConductor{1.91e-3, 0.10e-3};
inline constexpr Conductor kDefaultDropConductor{1.15e-3, 0.08e-3};
inline constexpr double kDefaultSourcePhaseVoltage = 230.9;

// Dedicated conductor between a customer's meter and its bus.
struct ServiceDrop {
  double length = 0.0;  // m
  Conductor conductor = kDefaultDropConductor;
};

struct Customer {
  std::string id;
  BusId bus = 0;
  PhaseId initial_phase{1};
  bool movable = true;
  ServiceDrop drop;
};

struct Network {
  std::vector<Bus> buses;
  std::vector<LineSegment> segments;
  std::vector<Customer> customers;
  double source_phase_voltage = kDefaultSourcePhaseVoltage;  // V
  double transformer_rating = 0.0;                           // kVA, descriptive
  Conductor trunk_conductor = kDefaultTrunkConductor;
  Conductor drop_conductor = kDefaultDropConductor;

  std::optional<std::size_t> bus_index(BusId id) const;
  std::optional<std::size_t> customer_index(const std::string& id) const;
  std::size_t movable_count() const;
};

enum class Entity { network, bus, segment, customer };

struct Violation {
  Entity entity = Entity::network;
  std::size_t index = 0;  // position in the corresponding list
  std::string message;
};

std::string describe(const Violation& v);

// Empty iff the network satisfies every structural invariant.
std::vector<Violation> validate(const Network& network);

// Buses reached from bus 0 through trunk segments only (bus 0 included).
std::vector<BusId> trunk_buses(const Network& network);

// Farthest trunk bus; ties go to the highest id.
BusId end_of_line_bus(const Network& network);

struct Demand {
  double active_power = 0.0;    // W
  double reactive_power = 0.0;  // var
};

struct LoadSnapshot {
  std::string timestamp;
  std::vector<Demand> demand;  // aligned with LoadProfile::customer_ids
};

struct LoadProfile {
  std::vector<std::string> customer_ids;
  std::vector<LoadSnapshot> snapshots;

  std::size_t size() const noexcept { return snapshots.size(); }
};

// Violations of the profile invariants relative to the network.
std::vector<std::string> validate_profile(const Network& network, const LoadProfile& profile);

// Reorders the profile's columns to the network customer order. Throws Error
// when the customer sets differ.
LoadProfile align_profile(const Network& network, const LoadProfile& profile);

}  // namespace phasebal
