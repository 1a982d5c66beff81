#include "qplace/fpga.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace qplace {

FpgaArchitecture::FpgaArchitecture(int width, int height,
                                   std::vector<std::string> cell_types_row_major)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) throw std::invalid_argument("FpgaArchitecture: empty grid");
  if (static_cast<int>(cell_types_row_major.size()) != width * height)
    throw std::invalid_argument("FpgaArchitecture: cell list does not match grid size");
  cells_.reserve(cell_types_row_major.size());
  for (auto& name : cell_types_row_major) {
    if (name.empty()) throw std::invalid_argument("FpgaArchitecture: empty cell type name");
    auto it = std::find(type_names_.begin(), type_names_.end(), name);
    if (it == type_names_.end()) {
      if (type_names_.size() >= 255) throw std::invalid_argument("FpgaArchitecture: too many cell types");
      type_names_.push_back(name);
      it = std::prev(type_names_.end());
    }
    cells_.push_back(static_cast<std::uint8_t>(it - type_names_.begin()));
  }
}

std::optional<std::uint8_t> FpgaArchitecture::type_id(const std::string& name) const {
  const auto it = std::find(type_names_.begin(), type_names_.end(), name);
  if (it == type_names_.end()) return std::nullopt;
  return static_cast<std::uint8_t>(it - type_names_.begin());
}

std::vector<int> FpgaArchitecture::type_counts() const {
  std::vector<int> counts(type_names_.size(), 0);
  for (auto id : cells_) ++counts[id];
  return counts;
}

FpgaArchitecture bordered_grid_arch(int width, int height, std::span<const int> bram_axis) {
  if (width < 3 || height < 3)
    throw std::invalid_argument("bordered_grid_arch: grid too small for an IO border");
  std::vector<std::string> cells(static_cast<std::size_t>(width) * height, kTypeLut);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      if (r == 0 || r == height - 1 || c == 0 || c == width - 1)
        cells[static_cast<std::size_t>(r) * width + c] = kTypeIo;
  for (int r : bram_axis)
    for (int c : bram_axis) {
      if (r <= 0 || r >= height - 1 || c <= 0 || c >= width - 1)
        throw std::invalid_argument("bordered_grid_arch: BRAM coordinate on or outside the border");
      cells[static_cast<std::size_t>(r) * width + c] = kTypeBram;
    }
  return FpgaArchitecture(width, height, std::move(cells));
}

FpgaArchitecture fictional_arch() {
  static const int axis[] = {4, 8, 12, 16};
  return bordered_grid_arch(21, 21, axis);
}

FpgaArchitecture uniform_arch(int width, int height, const std::string& type) {
  return FpgaArchitecture(width, height,
                          std::vector<std::string>(static_cast<std::size_t>(width) * height, type));
}

int Netlist::index_of(const std::string& id) const {
  for (int i = 0; i < block_count(); ++i)
    if (blocks[i].id == id) return i;
  return -1;
}

namespace {

bool is_register_type(const std::string& type) {
  std::string up;
  up.reserve(type.size());
  for (char c : type) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return up == "REG" || up == "REGISTER";
}

nlohmann::json parse_document(std::istream& in, const char* what) {
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string(what) + ": " + e.what());
  }
}

}  // namespace

Netlist load_netlist(std::istream& in) {
  const nlohmann::json doc = parse_document(in, "netlist");
  if (!doc.is_object() || !doc.contains("blocks") || !doc["blocks"].is_array())
    throw parse_error("netlist: missing 'blocks' array");

  Netlist nl;
  std::unordered_map<std::string, int> index;
  for (const auto& b : doc["blocks"]) {
    if (!b.is_object() || !b.contains("id") || !b.contains("type") || !b["id"].is_string() ||
        !b["type"].is_string())
      throw parse_error("netlist: each block needs string fields 'id' and 'type'");
    NetlistBlock block{b["id"].get<std::string>(), b["type"].get<std::string>()};
    if (block.id.empty()) throw parse_error("netlist: empty block id");
    if (is_register_type(block.type))
      throw parse_error("netlist: block '" + block.id +
                        "' has register type '" + block.type +
                        "'; registers are not placed separately, merge them into their LUTs");
    if (!index.emplace(block.id, nl.block_count()).second)
      throw parse_error("netlist: duplicate block id '" + block.id + "'");
    nl.blocks.push_back(std::move(block));
  }

  if (doc.contains("nets")) {
    if (!doc["nets"].is_array()) throw parse_error("netlist: 'nets' must be an array");
    for (std::size_t ni = 0; ni < doc["nets"].size(); ++ni) {
      const auto& net = doc["nets"][ni];
      if (!net.is_array() || net.size() < 2)
        throw parse_error("netlist: net #" + std::to_string(ni) + " needs at least two members");
      std::vector<int> members;
      std::set<int> seen;
      for (const auto& id : net) {
        if (!id.is_string()) throw parse_error("netlist: net members must be block ids");
        const auto it = index.find(id.get<std::string>());
        if (it == index.end())
          throw parse_error("netlist: net #" + std::to_string(ni) + " references unknown block '" +
                            id.get<std::string>() + "'");
        if (!seen.insert(it->second).second)
          throw parse_error("netlist: net #" + std::to_string(ni) + " lists block '" +
                            id.get<std::string>() + "' twice");
        members.push_back(it->second);
      }
      nl.nets.push_back(std::move(members));
    }
  }

  if (doc.contains("pins")) {
    if (!doc["pins"].is_object()) throw parse_error("netlist: 'pins' must be an object");
    for (const auto& [id, loc] : doc["pins"].items()) {
      const auto it = index.find(id);
      if (it == index.end()) throw parse_error("netlist: pin for unknown block '" + id + "'");
      if (!loc.is_object() || !loc.contains("row") || !loc.contains("col"))
        throw parse_error("netlist: pin for '" + id + "' needs integer fields 'row' and 'col'");
      const int row = loc["row"].get<int>();
      const int col = loc["col"].get<int>();
      if (row < 0 || col < 0)
        throw parse_error("netlist: pin for '" + id + "' has negative coordinates");
      nl.pins[it->second] = PinLocation{row, col};
    }
  }
  return nl;
}

Netlist load_netlist_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("netlist: cannot open '" + path + "'");
  return load_netlist(in);
}

void save_netlist(const Netlist& netlist, std::ostream& out) {
  nlohmann::json doc;
  doc["blocks"] = nlohmann::json::array();
  for (const auto& b : netlist.blocks) doc["blocks"].push_back({{"id", b.id}, {"type", b.type}});
  doc["nets"] = nlohmann::json::array();
  for (const auto& net : netlist.nets) {
    nlohmann::json members = nlohmann::json::array();
    for (int idx : net) members.push_back(netlist.blocks[idx].id);
    doc["nets"].push_back(std::move(members));
  }
  doc["pins"] = nlohmann::json::object();
  for (const auto& [idx, pin] : netlist.pins)
    doc["pins"][netlist.blocks[idx].id] = {{"row", pin.row}, {"col", pin.col}};
  out << doc.dump(2) << '\n';
}

void save_netlist_file(const Netlist& netlist, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw parse_error("netlist: cannot write '" + path + "'");
  save_netlist(netlist, out);
}

FpgaArchitecture load_architecture(std::istream& in) {
  const nlohmann::json doc = parse_document(in, "architecture");
  if (!doc.is_object() || !doc.contains("width") || !doc.contains("height") ||
      !doc.contains("cells"))
    throw parse_error("architecture: needs fields 'width', 'height' and 'cells'");
  const int width = doc["width"].get<int>();
  const int height = doc["height"].get<int>();
  if (width < 1 || height < 1) throw parse_error("architecture: degenerate grid");
  if (!doc["cells"].is_array() || static_cast<int>(doc["cells"].size()) != height)
    throw parse_error("architecture: 'cells' must hold one row per grid row");
  std::vector<std::string> cells;
  cells.reserve(static_cast<std::size_t>(width) * height);
  for (const auto& row : doc["cells"]) {
    if (!row.is_array() || static_cast<int>(row.size()) != width)
      throw parse_error("architecture: every row needs 'width' cell types");
    for (const auto& cell : row) {
      if (!cell.is_string()) throw parse_error("architecture: cell types must be strings");
      cells.push_back(cell.get<std::string>());
    }
  }
  return FpgaArchitecture(width, height, std::move(cells));
}

FpgaArchitecture load_architecture_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("architecture: cannot open '" + path + "'");
  return load_architecture(in);
}

void save_architecture(const FpgaArchitecture& arch, std::ostream& out) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < arch.height(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < arch.width(); ++c) row.push_back(arch.type_at(arch.location(r, c)));
    rows.push_back(std::move(row));
  }
  nlohmann::json doc;
  doc["width"] = arch.width();
  doc["height"] = arch.height();
  doc["cells"] = std::move(rows);
  out << doc.dump(2) << '\n';
}

void save_architecture_file(const FpgaArchitecture& arch, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw parse_error("architecture: cannot write '" + path + "'");
  save_architecture(arch, out);
}

DistanceMatrix build_distance_matrix(const FpgaArchitecture& arch) {
  const int n = arch.location_count();
  Matrix d(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      d(a, b) = std::abs(arch.row_of(a) - arch.row_of(b)) +
                std::abs(arch.col_of(a) - arch.col_of(b));
  return DistanceMatrix(std::move(d));
}

FlowMatrix build_flow_matrix(const Netlist& netlist) {
  const int m = netlist.block_count();
  Matrix f(m, m);
  for (const auto& net : netlist.nets)
    for (std::size_t i = 0; i < net.size(); ++i)
      for (std::size_t j = i + 1; j < net.size(); ++j) {
        if (net[i] < 0 || net[i] >= m || net[j] < 0 || net[j] >= m)
          throw std::invalid_argument("build_flow_matrix: net references a missing block");
        f(net[i], net[j]) = 1.0;
        f(net[j], net[i]) = 1.0;
      }
  return FlowMatrix(std::move(f));
}

LegalityOracle make_legality_oracle(const FpgaArchitecture& arch, const Netlist& netlist) {
  const int m = netlist.block_count();
  std::vector<std::uint8_t> block_type(m);
  for (int i = 0; i < m; ++i) {
    const auto id = arch.type_id(netlist.blocks[i].type);
    if (!id)
      throw std::invalid_argument("legality: block '" + netlist.blocks[i].id + "' has type '" +
                                  netlist.blocks[i].type + "' which the architecture lacks");
    block_type[i] = *id;
  }
  std::vector<int> pin_loc(m, -1);
  for (const auto& [idx, pin] : netlist.pins) {
    if (!arch.in_grid(pin.row, pin.col))
      throw std::invalid_argument("legality: pin for block '" + netlist.blocks[idx].id +
                                  "' lies outside the grid");
    const int loc = arch.location(pin.row, pin.col);
    if (arch.type_id_at(loc) != block_type[idx])
      throw std::invalid_argument("legality: pin for block '" + netlist.blocks[idx].id +
                                  "' sits on an incompatible cell type");
    pin_loc[idx] = loc;
  }
  std::vector<std::uint8_t> cell_type(arch.location_count());
  for (int loc = 0; loc < arch.location_count(); ++loc) cell_type[loc] = arch.type_id_at(loc);

  return [block_type = std::move(block_type), pin_loc = std::move(pin_loc),
          cell_type = std::move(cell_type)](int facility, int location) {
    if (facility < 0 || facility >= static_cast<int>(block_type.size())) return false;
    if (location < 0 || location >= static_cast<int>(cell_type.size())) return false;
    if (pin_loc[facility] >= 0) return location == pin_loc[facility];
    return cell_type[location] == block_type[facility];
  };
}

std::vector<int> pinned_facilities(const Netlist& netlist) {
  std::vector<int> out;
  out.reserve(netlist.pins.size());
  for (const auto& [idx, pin] : netlist.pins) out.push_back(idx);
  return out;
}

namespace {

// Prufer decode; the sequence being uniform makes the tree uniform.
std::vector<std::pair<int, int>> decode_prufer(const std::vector<int>& seq, int m) {
  std::vector<int> degree(m, 1);
  for (int v : seq) ++degree[v];
  std::vector<std::pair<int, int>> edges;
  edges.reserve(m - 1);
  std::set<int> leaves;
  for (int v = 0; v < m; ++v)
    if (degree[v] == 1) leaves.insert(v);
  for (int v : seq) {
    const int leaf = *leaves.begin();
    leaves.erase(leaves.begin());
    edges.emplace_back(std::min(leaf, v), std::max(leaf, v));
    if (--degree[v] == 1) leaves.insert(v);
  }
  const int a = *leaves.begin();
  const int b = *std::next(leaves.begin());
  edges.emplace_back(std::min(a, b), std::max(a, b));
  return edges;
}

}  // namespace

Netlist generate_instance(const FpgaArchitecture& arch, int m, Rng& rng, double mean_degree) {
  if (m < 3) throw std::invalid_argument("generate_instance: need at least 3 blocks");
  if (m > arch.location_count())
    throw std::invalid_argument("generate_instance: more blocks than locations");

  const auto io_id = arch.type_id(kTypeIo);
  if (!io_id) throw std::invalid_argument("generate_instance: architecture has no IO cells");
  const auto counts = arch.type_counts();
  if (counts[*io_id] < 2)
    throw std::invalid_argument("generate_instance: architecture has fewer than two IO cells");

  // Non-IO types, weighted by cell count and capped by availability.
  std::vector<std::uint8_t> candidate_types;
  for (std::size_t t = 0; t < counts.size(); ++t)
    if (t != *io_id && counts[t] > 0) candidate_types.push_back(static_cast<std::uint8_t>(t));
  std::vector<int> used(counts.size(), 0);

  Netlist nl;
  nl.blocks.push_back({"io_in", kTypeIo});
  nl.blocks.push_back({"io_out", kTypeIo});
  for (int i = 2; i < m; ++i) {
    double total_weight = 0.0;
    for (auto t : candidate_types)
      if (used[t] < counts[t]) total_weight += counts[t];
    if (total_weight == 0.0)
      throw std::invalid_argument("generate_instance: block count exceeds compatible cell capacity");
    double r = rng.uniform01() * total_weight;
    std::uint8_t chosen = candidate_types.back();
    for (auto t : candidate_types) {
      if (used[t] >= counts[t]) continue;
      r -= counts[t];
      if (r <= 0.0) {
        chosen = t;
        break;
      }
    }
    ++used[chosen];
    nl.blocks.push_back({"b" + std::to_string(i), arch.type_names()[chosen]});
  }

  // Connectivity: uniform spanning tree, then extra random edges up to the
  // mean-degree target.
  std::vector<int> prufer(m - 2);
  for (auto& v : prufer) v = static_cast<int>(rng.below(m));
  auto edges = decode_prufer(prufer, m);
  std::set<std::pair<int, int>> edge_set(edges.begin(), edges.end());

  const auto target = static_cast<std::size_t>(std::llround(mean_degree * m / 2.0));
  std::size_t attempts = 0;
  const std::size_t max_attempts = 50 * (target + 1);
  while (edge_set.size() < target && attempts++ < max_attempts) {
    const int u = static_cast<int>(rng.below(m));
    const int v = static_cast<int>(rng.below(m));
    if (u == v) continue;
    const auto e = std::minmax(u, v);
    if (edge_set.insert({e.first, e.second}).second) edges.push_back({e.first, e.second});
  }

  for (const auto& [u, v] : edges) nl.nets.push_back({u, v});
  return nl;
}

}  // namespace qplace
