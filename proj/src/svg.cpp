#include "qplace/svg.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

namespace qplace {

namespace {

constexpr int kCell = 20;
constexpr int kMargin = 10;

const char* type_color(const std::string& type, std::size_t type_index) {
  if (type == kTypeIo) return "#8da0cb";
  if (type == kTypeBram) return "#fc8d62";
  if (type == kTypeLut) return "#66c2a5";
  static const char* palette[] = {"#e78ac3", "#a6d854", "#ffd92f", "#e5c494", "#b3b3b3"};
  return palette[type_index % (sizeof palette / sizeof palette[0])];
}

int center_x(int col) { return kMargin + col * kCell + kCell / 2; }
int center_y(int row) { return kMargin + row * kCell + kCell / 2; }

}  // namespace

std::string render_svg(const FpgaArchitecture& arch, const std::vector<PlacedBlock>& placement,
                       const Netlist* netlist) {
  std::map<std::string, const PlacedBlock*> by_id;
  for (const auto& b : placement) {
    if (!arch.in_grid(b.row, b.col))
      throw std::invalid_argument("render_svg: block '" + b.id + "' placed outside the grid");
    by_id[b.id] = &b;
  }
  if (netlist) {
    for (const auto& net : netlist->nets)
      for (int member : net)
        if (!by_id.count(netlist->blocks[member].id))
          throw std::invalid_argument("render_svg: net references unplaced block '" +
                                      netlist->blocks[member].id + "'");
  }

  const int w = 2 * kMargin + arch.width() * kCell;
  const int h = 2 * kMargin + arch.height() * kCell;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  svg << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"#ffffff\"/>\n";

  for (int r = 0; r < arch.height(); ++r)
    for (int c = 0; c < arch.width(); ++c) {
      const int loc = arch.location(r, c);
      svg << "<rect x=\"" << kMargin + c * kCell << "\" y=\"" << kMargin + r * kCell
          << "\" width=\"" << kCell << "\" height=\"" << kCell << "\" fill=\""
          << type_color(arch.type_at(loc), arch.type_id_at(loc))
          << "\" stroke=\"#555555\" stroke-width=\"0.5\"/>\n";
    }

  if (netlist) {
    for (const auto& net : netlist->nets)
      for (std::size_t i = 0; i < net.size(); ++i)
        for (std::size_t j = i + 1; j < net.size(); ++j) {
          const PlacedBlock* a = by_id.at(netlist->blocks[net[i]].id);
          const PlacedBlock* b = by_id.at(netlist->blocks[net[j]].id);
          svg << "<line x1=\"" << center_x(a->col) << "\" y1=\"" << center_y(a->row) << "\" x2=\""
              << center_x(b->col) << "\" y2=\"" << center_y(b->row)
              << "\" stroke=\"#222222\" stroke-width=\"1\" stroke-opacity=\"0.55\"/>\n";
        }
  }

  for (const auto& [id, b] : by_id) {
    svg << "<circle cx=\"" << center_x(b->col) << "\" cy=\"" << center_y(b->row) << "\" r=\""
        << kCell / 4 << "\" fill=\"#111111\"><title>" << id << "</title></circle>\n";
  }

  svg << "</svg>\n";
  return svg.str();
}

}  // namespace qplace
