#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "phasebal/assignment.hpp"
#include "phasebal/network.hpp"

namespace phasebal::scenarios {

// Initial connection schemes of the reference feeder:
//   s112233  contiguous thirds by distance on phases 1, 2, 3
//   s123123  phases 1, 2, 3 alternating along the line
//   s111     everybody on phase 1
enum class Scheme { s112233, s123123, s111 };

std::string_view name(Scheme scheme) noexcept;
std::optional<Scheme> parse_scheme(std::string_view text) noexcept;

inline constexpr double kFirstSpan = 20.0;   // m, transformer to first customer
inline constexpr double kCustomerSpacing = 10.0;  // m
inline constexpr double kTransformerRating = 250.0;  // kVA

// Single aluminium trunk, one customer per pole, zero-length copper drops,
// all customers movable and initially on phase 1.
Network build_test_feeder(std::size_t customer_count = 60);

// Phases prescribed by the scheme for the movable customers, ordered by
// distance. For s112233 with a count not divisible by 3 the remainder joins
// the phase-3 block.
PhaseAssignment apply_scheme(const Network& network, Scheme scheme);

// build_test_feeder with the scheme as initial phases.
Network build_scenario(Scheme scheme, std::size_t customer_count = 60);

// Every customer draws (p_watts, p_watts * q_fraction) in each of n snapshots.
LoadProfile constant_profile(const Network& network, double p_watts = 200.0, double q_fraction = 0.10,
                             std::size_t n = 1);

}  // namespace phasebal::scenarios
