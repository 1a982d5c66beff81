#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qplace/qap.hpp"
#include "qplace/random.hpp"

namespace qplace {

class parse_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kTypeIo = "IO";
inline constexpr const char* kTypeBram = "BRAM";
inline constexpr const char* kTypeLut = "LUT";

// Rectangular grid of typed cells; location index = row * width + col.
// Cell types are interned strings so custom architectures can introduce
// their own type names.
class FpgaArchitecture {
 public:
  FpgaArchitecture(int width, int height, std::vector<std::string> cell_types_row_major);

  int width() const { return width_; }
  int height() const { return height_; }
  int location_count() const { return width_ * height_; }

  int location(int row, int col) const { return row * width_ + col; }
  int row_of(int loc) const { return loc / width_; }
  int col_of(int loc) const { return loc % width_; }
  bool in_grid(int row, int col) const {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }

  const std::string& type_at(int loc) const { return type_names_[cells_[loc]]; }
  std::uint8_t type_id_at(int loc) const { return cells_[loc]; }
  std::optional<std::uint8_t> type_id(const std::string& name) const;
  const std::vector<std::string>& type_names() const { return type_names_; }

  // cells of each type, indexed like type_names()
  std::vector<int> type_counts() const;

 private:
  int width_;
  int height_;
  std::vector<std::string> type_names_;
  std::vector<std::uint8_t> cells_;
};

// IO cells on the border, BRAM cells at the lattice points
// bram_axis x bram_axis, LUT cells everywhere else.
FpgaArchitecture bordered_grid_arch(int width, int height, std::span<const int> bram_axis);

// The 21x21 benchmark architecture: 80 border IO cells, 16 BRAM cells on
// the regular interior lattice {4,8,12,16}^2, 345 LUT cells.
FpgaArchitecture fictional_arch();

// Single cell type everywhere; handy for unconstrained experiments.
FpgaArchitecture uniform_arch(int width, int height, const std::string& type = kTypeLut);

struct NetlistBlock {
  std::string id;
  std::string type;

  bool operator==(const NetlistBlock&) const = default;
};

struct PinLocation {
  int row = 0;
  int col = 0;

  bool operator==(const PinLocation&) const = default;
};

// Functional blocks plus their connectivity. Nets reference blocks by
// index; the JSON form uses block ids. Facility index i corresponds to
// blocks[i] throughout the toolkit.
struct Netlist {
  std::vector<NetlistBlock> blocks;
  std::vector<std::vector<int>> nets;
  std::map<int, PinLocation> pins;

  int block_count() const { return static_cast<int>(blocks.size()); }
  int index_of(const std::string& id) const;  // -1 when missing

  bool operator==(const Netlist&) const = default;
};

Netlist load_netlist(std::istream& in);
Netlist load_netlist_file(const std::string& path);
void save_netlist(const Netlist& netlist, std::ostream& out);
void save_netlist_file(const Netlist& netlist, const std::string& path);

FpgaArchitecture load_architecture(std::istream& in);
FpgaArchitecture load_architecture_file(const std::string& path);
void save_architecture(const FpgaArchitecture& arch, std::ostream& out);
void save_architecture_file(const FpgaArchitecture& arch, const std::string& path);

// D[a][b] = |row_a - row_b| + |col_a - col_b|
DistanceMatrix build_distance_matrix(const FpgaArchitecture& arch);

// F[i][j] = 1 when blocks i and j share at least one net (clique expansion
// of multi-pin nets), else 0.
FlowMatrix build_flow_matrix(const Netlist& netlist);

// Block fits a cell when the type names match; a pinned block is legal only
// at its pin. Validates pin coordinates and pin type compatibility.
LegalityOracle make_legality_oracle(const FpgaArchitecture& arch, const Netlist& netlist);

// Facility indices carrying a pin, ascending.
std::vector<int> pinned_facilities(const Netlist& netlist);

// Random benchmark instance: two IO blocks plus m-2 blocks with types drawn
// proportionally to the architecture's non-IO cell counts; connectivity is
// a uniform spanning tree plus random extra 2-pin nets up to the mean
// degree target.
Netlist generate_instance(const FpgaArchitecture& arch, int m, Rng& rng, double mean_degree = 3.0);

}  // namespace qplace
