#pragma once

#include <cstdint>

#include "gdl/graph.hpp"

namespace gdl {

struct GeneratorOptions {
  /// Impedance subcircuits placed in addition to the mandatory ground
  /// connection; 1..3.
  int max_subcircuits = 3;
  std::uint64_t seed = 1;
  /// Keep a seeded random subset of this many graphs; 0 keeps all.
  std::size_t limit = 0;
};

/// Enumerates RC circuit graphs built from impedance subcircuits
/// {R, C, R||C, R-C, C-R} placed between junctions I, O, G and internal
/// nodes N. A graph has between 2 and max_subcircuits + 1 subcircuits, at
/// least one of them touching G; O is reachable from I without passing
/// through G; internal junctions carry two or more
/// subcircuits and nothing is placed directly across I and G (it would only
/// load the ideal source). Graphs are deduplicated by canonical form and
/// returned in enumeration order.
GraphDataset generate_desk_dataset(const GeneratorOptions& opts);

}  // namespace gdl
