#pragma once

#include <string>
#include <vector>

#include "qplace/fpga.hpp"

namespace qplace {

struct PlacedBlock {
  std::string id;
  int row = 0;
  int col = 0;
};

// Deterministic SVG: cell grid colored by type, net edges between placed
// endpoints, placed blocks marked. When a netlist is given, every net
// member must appear in the placement. Identical inputs give identical
// bytes.
std::string render_svg(const FpgaArchitecture& arch, const std::vector<PlacedBlock>& placement,
                       const Netlist* netlist = nullptr);

}  // namespace qplace
