#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "qplace/subprocess.hpp"

namespace fs = std::filesystem;

#ifndef QPLACE_BIN
#define QPLACE_BIN "./qplace"
#endif

namespace {

struct CmdResult {
  int exit_code;
  std::string out;
  std::string err;
};

CmdResult cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = (env.empty() ? "" : env + " ") + std::string(QPLACE_BIN) + " " + args;
  const auto r = qplace::run_subprocess(cmd, "", std::nullopt);
  return {r.exit_code, r.out, r.err};
}

fs::path work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "qplace_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

int count_occurrences(const std::string& hay, const std::string& needle) {
  int n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

TEST_CASE("generate writes deterministic instances and honors QPLACE_SEED") {
  const auto dir = work_dir();
  const auto a = cli("generate --m 20 --seed 9 -o " + (dir / "a.json").string());
  REQUIRE(a.exit_code == 0);
  CHECK(a.out.find("blocks: 20") != std::string::npos);

  cli("generate --m 20 --seed 9 -o " + (dir / "b.json").string());
  CHECK(read_file(dir / "a.json") == read_file(dir / "b.json"));

  cli("generate --m 20 -o " + (dir / "c.json").string(), "QPLACE_SEED=9");
  CHECK(read_file(dir / "c.json") == read_file(dir / "a.json"));

  CHECK(cli("generate --m 2 --seed 1 -o " + (dir / "tiny.json").string()).exit_code == 1);
}

TEST_CASE("place produces a monotone log that eval confirms, and manifests replay") {
  const auto dir = work_dir();
  const auto inst = (dir / "inst.json").string();
  REQUIRE(cli("generate --m 14 --seed 3 -o " + inst).exit_code == 0);

  const auto out = (dir / "run1").string();
  const auto placed = cli("place --instance " + inst + " --arch fictional --k 10 --ku 5 " +
                          "--iters 6 --solver exhaustive --seed 11 -o " + out);
  REQUIRE(placed.exit_code == 0);
  CHECK(placed.out.find("seed 11") != std::string::npos);

  const auto csv = parse_csv(read_file(fs::path(out) / "convergence.csv"));
  REQUIRE(csv.size() >= 3);
  CHECK(csv[0] == std::vector<std::string>{"iter", "cost", "inner_rounds", "qubo_dim", "ms"});
  double prev = 1e300;
  for (std::size_t i = 1; i < csv.size(); ++i) {
    const double cost = std::stod(csv[i][1]);
    CHECK(cost <= prev);
    prev = cost;
    CHECK(csv[i][4] == "0");  // timing off by default keeps the log reproducible
  }

  const auto eval = cli("eval --instance " + inst + " --arch fictional --placement " +
                        (fs::path(out) / "placement.json").string());
  REQUIRE(eval.exit_code == 0);
  CHECK(eval.out.find("cost " + csv.back()[1] + "\n") != std::string::npos);
  CHECK(eval.out.find("legal: yes") != std::string::npos);

  // byte-for-byte manifest replay
  const auto placement_before = read_file(fs::path(out) / "placement.json");
  const auto csv_before = read_file(fs::path(out) / "convergence.csv");
  const auto manifest_before = read_file(fs::path(out) / "manifest.json");
  const auto replay = cli("place --manifest " + (fs::path(out) / "manifest.json").string());
  REQUIRE(replay.exit_code == 0);
  CHECK(read_file(fs::path(out) / "placement.json") == placement_before);
  CHECK(read_file(fs::path(out) / "convergence.csv") == csv_before);
  CHECK(read_file(fs::path(out) / "manifest.json") == manifest_before);
}

TEST_CASE("eval rejects corrupted placements with named violations") {
  const auto dir = work_dir();
  const auto inst = (dir / "eval_inst.json").string();
  write_text(inst, R"({
    "blocks": [{"id": "x", "type": "LUT"}, {"id": "y", "type": "LUT"}],
    "nets": [["x", "y"]]
  })");

  write_text(dir / "dup.json", R"({"x": {"row": 1, "col": 1}, "y": {"row": 1, "col": 1}})");
  const auto dup = cli("eval --instance " + inst + " --arch fictional --placement " +
                       (dir / "dup.json").string());
  CHECK(dup.exit_code == 1);
  CHECK(dup.err.find("'x'") != std::string::npos);
  CHECK(dup.err.find("'y'") != std::string::npos);

  write_text(dir / "io.json", R"({"x": {"row": 0, "col": 0}, "y": {"row": 1, "col": 1}})");
  const auto io = cli("eval --instance " + inst + " --arch fictional --placement " +
                      (dir / "io.json").string());
  CHECK(io.exit_code == 1);
  CHECK(io.err.find("illegal") != std::string::npos);
  CHECK(io.err.find("IO") != std::string::npos);

  write_text(dir / "missing.json", R"({"x": {"row": 1, "col": 1}})");
  CHECK(cli("eval --instance " + inst + " --arch fictional --placement " +
            (dir / "missing.json").string())
            .exit_code == 1);
}

TEST_CASE("render: grid-only, single edge, deterministic bytes, unplaced reference") {
  const auto dir = work_dir();

  write_text(dir / "empty_placement.json", "{}");
  const auto empty_svg = (dir / "empty.svg").string();
  REQUIRE(cli("render --placement " + (dir / "empty_placement.json").string() +
              " --arch fictional -o " + empty_svg)
              .exit_code == 0);
  const auto grid_only = read_file(empty_svg);
  CHECK(count_occurrences(grid_only, "<line") == 0);
  CHECK(count_occurrences(grid_only, "<circle") == 0);
  CHECK(count_occurrences(grid_only, "<rect") == 441 + 1);  // cells plus background

  write_text(dir / "pair_inst.json", R"({
    "blocks": [{"id": "u", "type": "LUT"}, {"id": "v", "type": "LUT"}],
    "nets": [["u", "v"]]
  })");
  write_text(dir / "pair_placement.json", R"({"u": {"row": 1, "col": 1}, "v": {"row": 5, "col": 7}})");
  const auto pair_svg = (dir / "pair.svg").string();
  REQUIRE(cli("render --placement " + (dir / "pair_placement.json").string() +
              " --arch fictional --instance " + (dir / "pair_inst.json").string() + " -o " +
              pair_svg)
              .exit_code == 0);
  const auto pair = read_file(pair_svg);
  CHECK(count_occurrences(pair, "<line") == 1);
  CHECK(count_occurrences(pair, "<circle") == 2);

  REQUIRE(cli("render --placement " + (dir / "pair_placement.json").string() +
              " --arch fictional --instance " + (dir / "pair_inst.json").string() + " -o " +
              (dir / "pair2.svg").string())
              .exit_code == 0);
  CHECK(read_file(dir / "pair2.svg") == pair);

  write_text(dir / "partial_placement.json", R"({"u": {"row": 1, "col": 1}})");
  const auto partial = cli("render --placement " + (dir / "partial_placement.json").string() +
                           " --arch fictional --instance " + (dir / "pair_inst.json").string() +
                           " -o " + (dir / "bad.svg").string());
  CHECK(partial.exit_code == 1);
  CHECK(partial.err.find("unplaced block 'v'") != std::string::npos);
}

TEST_CASE("solve-qubo bridges the exchange format on stdin") {
  const auto r = qplace::run_subprocess(
      std::string(QPLACE_BIN) + " solve-qubo --backend exhaustive",
      R"({"dim": 2, "offset": 1.0, "terms": [[0, 0, -2.0], [0, 1, 3.0], [1, 1, -0.5]]})",
      std::nullopt);
  REQUIRE(r.exit_code == 0);
  // optimum: x = [1, 0] with objective -1
  CHECK(r.out.find("\"x\":[1,0]") != std::string::npos);
  CHECK(r.out.find("\"objective\":-1.0") != std::string::npos);
}

TEST_CASE("place through the external bridge, including failure exit codes") {
  const auto dir = work_dir();
  const auto inst = (dir / "ext_inst.json").string();
  REQUIRE(cli("generate --m 10 --seed 4 -o " + inst).exit_code == 0);

  const std::string loopback = std::string(QPLACE_BIN) + " solve-qubo --backend exhaustive";
  const auto ok = cli("place --instance " + inst + " --arch fictional --k 6 --ku 3 --iters 3 " +
                      "--solver external --external-cmd '" + loopback + "' --seed 2 -o " +
                      (dir / "ext_run").string());
  CHECK(ok.exit_code == 0);

  const auto broken = cli("place --instance " + inst +
                          " --arch fictional --k 6 --ku 3 --iters 2 " +
                          "--solver external --external-cmd false --seed 2 -o " +
                          (dir / "ext_fail").string());
  CHECK(broken.exit_code == 2);
}

TEST_CASE("multi-seed sweeps write per-seed directories, optionally in parallel") {
  const auto dir = work_dir();
  const auto inst = (dir / "sweep_inst.json").string();
  REQUIRE(cli("generate --m 12 --seed 8 -o " + inst).exit_code == 0);

  const auto out = dir / "sweep";
  const auto r = cli("place --instance " + inst + " --arch fictional --k 8 --ku 4 --iters 3 " +
                     "--solver exhaustive --seed 1,2,3 --jobs 3 -o " + out.string());
  REQUIRE(r.exit_code == 0);
  for (int seed : {1, 2, 3}) {
    CHECK(fs::exists(out / ("seed_" + std::to_string(seed)) / "placement.json"));
    CHECK(fs::exists(out / ("seed_" + std::to_string(seed)) / "convergence.csv"));
  }

  // the same sweep run serially is byte-identical per seed
  const auto serial = dir / "sweep_serial";
  REQUIRE(cli("place --instance " + inst + " --arch fictional --k 8 --ku 4 --iters 3 " +
              "--solver exhaustive --seed 1,2,3 -o " + serial.string())
              .exit_code == 0);
  for (int seed : {1, 2, 3}) {
    const auto name = "seed_" + std::to_string(seed);
    CHECK(read_file(out / name / "placement.json") == read_file(serial / name / "placement.json"));
    CHECK(read_file(out / name / "convergence.csv") ==
          read_file(serial / name / "convergence.csv"));
  }
}

TEST_CASE("place with the worst-index strategy also yields a comparison log") {
  const auto dir = work_dir();
  const auto inst = (dir / "cmp_inst.json").string();
  REQUIRE(cli("generate --m 14 --seed 6 -o " + inst).exit_code == 0);

  for (const std::string strategy : {"random", "worst"}) {
    const auto out = (dir / ("cmp_" + strategy)).string();
    REQUIRE(cli("place --instance " + inst + " --arch fictional --k 8 --ku 4 --iters 4 " +
                "--solver exhaustive --index-strategy " + strategy + " --seed 5 -o " + out)
                .exit_code == 0);
    const auto csv = parse_csv(read_file(fs::path(out) / "convergence.csv"));
    CHECK(csv.size() >= 3);
  }
}

TEST_CASE("debug JSONL stream captures per-round events") {
  const auto dir = work_dir();
  const auto inst = (dir / "dbg_inst.json").string();
  REQUIRE(cli("generate --m 10 --seed 5 -o " + inst).exit_code == 0);
  const auto out = (dir / "dbg_run").string();
  const auto dbg = (dir / "debug.jsonl").string();
  REQUIRE(cli("place --instance " + inst + " --arch fictional --k 6 --ku 3 --iters 2 " +
              "--solver exhaustive --seed 1 -o " + out + " --debug-jsonl " + dbg)
              .exit_code == 0);
  const auto text = read_file(dbg);
  CHECK(count_occurrences(text, "\"iter\"") >= 2);
  CHECK(count_occurrences(text, "\"dim\"") >= 2);
}
