// qplace: generate placement instances, run the placement engine, evaluate
// and render results, and bridge QUBO problems to external solvers.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "qplace/expansion.hpp"
#include "qplace/fpga.hpp"
#include "qplace/qubo.hpp"
#include "qplace/solvers.hpp"
#include "qplace/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qplace;

namespace {

// Exit contract: 0 success, 1 validation/legality failure, 2
// solver/infrastructure failure.
constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitSolver = 2;

class validation_failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_double(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

FpgaArchitecture load_arch_arg(const std::string& arch) {
  if (arch == "fictional") return fictional_arch();
  return load_architecture_file(arch);
}

std::uint64_t env_default_seed() {
  if (const char* env = std::getenv("QPLACE_SEED")) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(env, env + std::string(env).size(), v);
    if (ec == std::errc() && *p == '\0') return v;
    throw validation_failure("QPLACE_SEED is not an unsigned integer");
  }
  return 0;
}

std::map<std::string, PinLocation> load_placement_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_failure("placement: cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw validation_failure(std::string("placement: ") + e.what());
  }
  if (!doc.is_object()) throw validation_failure("placement: document must map ids to cells");
  std::map<std::string, PinLocation> out;
  for (const auto& [id, cell] : doc.items()) {
    if (!cell.is_object() || !cell.contains("row") || !cell.contains("col"))
      throw validation_failure("placement: block '" + id + "' needs 'row' and 'col'");
    out[id] = PinLocation{cell["row"].get<int>(), cell["col"].get<int>()};
  }
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_failure("cannot write '" + path.string() + "'");
  out << content;
}

std::string block_type_summary(const Netlist& nl) {
  std::map<std::string, int> counts;
  for (const auto& b : nl.blocks) ++counts[b.type];
  std::string out;
  for (const auto& [type, count] : counts)
    out += (out.empty() ? "" : " ") + type + "=" + std::to_string(count);
  return out;
}

// ---------------------------------------------------------------- generate

struct GenerateSpec {
  int m = 0;
  std::uint64_t seed = 0;
  std::string arch = "fictional";
  std::string out;
  double mean_degree = 3.0;
};

int cmd_generate(const GenerateSpec& spec) {
  const auto arch = load_arch_arg(spec.arch);
  Rng rng(spec.seed);
  const auto nl = generate_instance(arch, spec.m, rng, spec.mean_degree);
  save_netlist_file(nl, spec.out);
  std::cout << "instance: " << spec.out << "\n"
            << "blocks: " << nl.block_count() << " (" << block_type_summary(nl) << ")\n"
            << "nets: " << nl.nets.size() << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------- place

struct PlaceSpec {
  std::string instance;
  std::string arch = "fictional";
  std::string out;
  int k = 1;
  int ku = 0;
  int iters = 50;
  double eps = 0.0;
  std::string index_strategy = "random";
  std::string backend = "sa";
  int reads = 100;
  int sweeps = 1000;
  std::optional<std::pair<double, double>> beta_range;
  std::optional<std::string> external_cmd;
  std::optional<int> time_limit_ms;
  std::optional<int> fixed_rounds;
  std::vector<std::uint64_t> seeds{0};
  bool timing = false;
  bool render = false;
  std::optional<std::string> debug_jsonl;
  int jobs = 1;
};

json place_spec_to_json(const PlaceSpec& s) {
  json solver;
  solver["backend"] = s.backend;
  solver["reads"] = s.reads;
  solver["sweeps"] = s.sweeps;
  solver["beta_low"] = s.beta_range ? json(s.beta_range->first) : json(nullptr);
  solver["beta_high"] = s.beta_range ? json(s.beta_range->second) : json(nullptr);
  solver["external_cmd"] = s.external_cmd ? json(*s.external_cmd) : json(nullptr);
  solver["time_limit_ms"] = s.time_limit_ms ? json(*s.time_limit_ms) : json(nullptr);

  json doc;
  doc["instance"] = s.instance;
  doc["arch"] = s.arch;
  doc["out"] = s.out;
  doc["k"] = s.k;
  doc["ku"] = s.ku;
  doc["iters"] = s.iters;
  doc["eps"] = s.eps;
  doc["index_strategy"] = s.index_strategy;
  doc["solver"] = solver;
  doc["seeds"] = s.seeds;
  doc["fixed_rounds"] = s.fixed_rounds ? json(*s.fixed_rounds) : json(nullptr);
  doc["timing"] = s.timing;
  doc["render"] = s.render;
  doc["debug_jsonl"] = s.debug_jsonl ? json(*s.debug_jsonl) : json(nullptr);
  doc["jobs"] = s.jobs;
  return doc;
}

PlaceSpec place_spec_from_json(const json& doc) {
  PlaceSpec s;
  s.instance = doc.at("instance").get<std::string>();
  s.arch = doc.at("arch").get<std::string>();
  s.out = doc.at("out").get<std::string>();
  s.k = doc.at("k").get<int>();
  s.ku = doc.at("ku").get<int>();
  s.iters = doc.at("iters").get<int>();
  s.eps = doc.at("eps").get<double>();
  s.index_strategy = doc.at("index_strategy").get<std::string>();
  const auto& solver = doc.at("solver");
  s.backend = solver.at("backend").get<std::string>();
  s.reads = solver.at("reads").get<int>();
  s.sweeps = solver.at("sweeps").get<int>();
  if (!solver.at("beta_low").is_null())
    s.beta_range = {solver["beta_low"].get<double>(), solver["beta_high"].get<double>()};
  if (!solver.at("external_cmd").is_null())
    s.external_cmd = solver["external_cmd"].get<std::string>();
  if (!solver.at("time_limit_ms").is_null()) s.time_limit_ms = solver["time_limit_ms"].get<int>();
  s.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
  if (!doc.at("fixed_rounds").is_null()) s.fixed_rounds = doc["fixed_rounds"].get<int>();
  s.timing = doc.at("timing").get<bool>();
  s.render = doc.at("render").get<bool>();
  if (!doc.at("debug_jsonl").is_null()) s.debug_jsonl = doc["debug_jsonl"].get<std::string>();
  s.jobs = doc.value("jobs", 1);
  return s;
}

SolverConfig solver_config_of(const PlaceSpec& s) {
  SolverConfig cfg;
  if (s.backend == "sa")
    cfg.backend = SolverBackend::simulated_annealing;
  else if (s.backend == "exhaustive")
    cfg.backend = SolverBackend::exhaustive;
  else if (s.backend == "external")
    cfg.backend = SolverBackend::external;
  else
    throw validation_failure("unknown solver backend '" + s.backend + "'");
  cfg.num_reads = s.reads;
  cfg.sa_sweeps = s.sweeps;
  cfg.sa_beta_range = s.beta_range;
  cfg.external_cmd = s.external_cmd;
  cfg.time_limit_ms = s.time_limit_ms;
  return cfg;
}

std::string convergence_csv(const std::vector<IterationRecord>& records, bool timing) {
  std::string csv = "iter,cost,inner_rounds,qubo_dim,ms\n";
  for (const auto& r : records) {
    csv += std::to_string(r.outer_iter) + "," + format_double(r.cost) + "," +
           std::to_string(r.inner_rounds) + "," + std::to_string(r.qubo_dim) + "," +
           std::to_string(timing ? r.wall_time_ms : 0) + "\n";
  }
  return csv;
}

std::string placement_json(const Netlist& nl, const FpgaArchitecture& arch,
                           const SubPermutation& p) {
  json doc = json::object();
  for (int i = 0; i < nl.block_count(); ++i) {
    const int loc = p.location_of(i);
    doc[nl.blocks[i].id] = {{"row", arch.row_of(loc)}, {"col", arch.col_of(loc)}};
  }
  return doc.dump(2) + "\n";
}

int cmd_place(const PlaceSpec& spec) {
  const auto arch = load_arch_arg(spec.arch);
  const auto nl = load_netlist_file(spec.instance);
  const auto flow = build_flow_matrix(nl);
  const auto dist = build_distance_matrix(arch);
  const auto legal = make_legality_oracle(arch, nl);

  ExpansionConfig cfg;
  cfg.k = spec.k;
  cfg.k_u = spec.ku;
  cfg.max_outer_iters = spec.iters;
  cfg.rel_improvement_eps = spec.eps;
  cfg.solver = solver_config_of(spec);
  cfg.pinned_facilities = pinned_facilities(nl);
  cfg.fixed_inner_rounds = spec.fixed_rounds;
  if (spec.index_strategy == "random")
    cfg.index_strategy = IndexStrategy::random;
  else if (spec.index_strategy == "worst")
    cfg.index_strategy = IndexStrategy::worst;
  else
    throw validation_failure("unknown index strategy '" + spec.index_strategy + "'");

  const fs::path out_dir(spec.out);
  fs::create_directories(out_dir);
  write_file(out_dir / "manifest.json", place_spec_to_json(spec).dump(2) + "\n");

  const bool multi = spec.seeds.size() > 1;
  std::mutex print_mutex;
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto run_seed = [&](std::uint64_t seed) {
    const fs::path seed_dir = multi ? out_dir / ("seed_" + std::to_string(seed)) : out_dir;
    fs::create_directories(seed_dir);

    std::ofstream debug_stream;
    InnerObserver observer;
    if (spec.debug_jsonl) {
      const fs::path debug_path =
          multi ? seed_dir / fs::path(*spec.debug_jsonl).filename() : fs::path(*spec.debug_jsonl);
      debug_stream.open(debug_path);
      observer = [&debug_stream](const InnerEvent& e) {
        json line;
        line["iter"] = e.outer_iter;
        line["round"] = e.round;
        line["dim"] = e.qubo_dim;
        line["before"] = e.objective_before;
        line["after"] = e.objective_after;
        debug_stream << line.dump() << "\n";
      };
    }

    ExpansionConfig run_cfg = cfg;
    run_cfg.seed = seed;
    const auto result = run(flow, dist, legal, std::nullopt, run_cfg, observer);

    write_file(seed_dir / "placement.json", placement_json(nl, arch, result.placement));
    write_file(seed_dir / "convergence.csv", convergence_csv(result.records, spec.timing));
    if (spec.render) {
      std::vector<PlacedBlock> placed;
      for (int i = 0; i < nl.block_count(); ++i) {
        const int loc = result.placement.location_of(i);
        placed.push_back({nl.blocks[i].id, arch.row_of(loc), arch.col_of(loc)});
      }
      write_file(seed_dir / "placement.svg", render_svg(arch, placed, &nl));
    }

    std::lock_guard<std::mutex> lock(print_mutex);
    std::cout << "seed " << seed << ": cost " << format_double(result.records.front().cost)
              << " -> " << format_double(result.records.back().cost) << " over "
              << result.records.back().outer_iter << " iterations\n";
  };

  if (spec.jobs <= 1 || spec.seeds.size() == 1) {
    for (auto seed : spec.seeds) run_seed(seed);
  } else {
    std::vector<std::thread> workers;
    std::size_t next = 0;
    std::mutex next_mutex;
    const int thread_count = std::min<std::size_t>(spec.jobs, spec.seeds.size());
    for (int t = 0; t < thread_count; ++t)
      workers.emplace_back([&] {
        for (;;) {
          std::size_t idx;
          {
            std::lock_guard<std::mutex> lock(next_mutex);
            if (next >= spec.seeds.size()) return;
            idx = next++;
          }
          try {
            run_seed(spec.seeds[idx]);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
  }
  return kExitOk;
}

// -------------------------------------------------------------------- eval

struct EvalSpec {
  std::string instance;
  std::string arch = "fictional";
  std::string placement;
};

int cmd_eval(const EvalSpec& spec) {
  const auto arch = load_arch_arg(spec.arch);
  const auto nl = load_netlist_file(spec.instance);
  const auto placement = load_placement_file(spec.placement);
  const auto legal = make_legality_oracle(arch, nl);

  for (const auto& [id, cell] : placement)
    if (nl.index_of(id) < 0)
      throw validation_failure("violation: placement references unknown block '" + id + "'");

  std::vector<int> assign(nl.block_count(), -1);
  std::vector<std::string> occupant(arch.location_count());
  std::map<std::string, int> type_counts;
  for (int i = 0; i < nl.block_count(); ++i) {
    const auto it = placement.find(nl.blocks[i].id);
    if (it == placement.end())
      throw validation_failure("violation: block '" + nl.blocks[i].id + "' has no placement");
    const auto& cell = it->second;
    if (!arch.in_grid(cell.row, cell.col))
      throw validation_failure("violation: block '" + nl.blocks[i].id + "' lies outside the grid");
    const int loc = arch.location(cell.row, cell.col);
    if (!occupant[loc].empty())
      throw validation_failure("violation: blocks '" + occupant[loc] + "' and '" +
                               nl.blocks[i].id + "' share cell (" + std::to_string(cell.row) +
                               ", " + std::to_string(cell.col) + ")");
    occupant[loc] = nl.blocks[i].id;
    if (!legal(i, loc))
      throw validation_failure("violation: block '" + nl.blocks[i].id + "' of type " +
                               nl.blocks[i].type + " is illegal on the " + arch.type_at(loc) +
                               " cell (" + std::to_string(cell.row) + ", " +
                               std::to_string(cell.col) + ")");
    assign[i] = loc;
    ++type_counts[nl.blocks[i].type];
  }

  const SubPermutation p(nl.block_count(), arch.location_count(), assign);
  const double cost = qap_cost(build_flow_matrix(nl), build_distance_matrix(arch), p);
  std::cout << "cost " << format_double(cost) << "\n";
  std::string counts;
  for (const auto& [type, count] : type_counts)
    counts += (counts.empty() ? "" : " ") + type + "=" + std::to_string(count);
  std::cout << "blocks: " << counts << "\n";
  std::cout << "legal: yes\n";
  return kExitOk;
}

// ------------------------------------------------------------------ render

struct RenderSpec {
  std::string placement;
  std::string arch = "fictional";
  std::optional<std::string> instance;
  std::string out;
};

int cmd_render(const RenderSpec& spec) {
  const auto arch = load_arch_arg(spec.arch);
  const auto placement = load_placement_file(spec.placement);
  std::vector<PlacedBlock> placed;
  for (const auto& [id, cell] : placement) placed.push_back({id, cell.row, cell.col});

  std::optional<Netlist> nl;
  if (spec.instance) nl = load_netlist_file(*spec.instance);
  try {
    write_file(spec.out, render_svg(arch, placed, nl ? &*nl : nullptr));
  } catch (const std::invalid_argument& e) {
    throw validation_failure(e.what());
  }
  std::cout << "wrote " << spec.out << "\n";
  return kExitOk;
}

// -------------------------------------------------------------- solve-qubo

struct SolveQuboSpec {
  std::string backend = "exhaustive";
  int reads = 100;
  int sweeps = 1000;
  std::uint64_t seed = 0;
};

int cmd_solve_qubo(const SolveQuboSpec& spec) {
  std::stringstream buffer;
  buffer << std::cin.rdbuf();
  const auto problem = qubo_from_json(buffer.str());

  SolverConfig cfg;
  cfg.num_reads = spec.reads;
  cfg.sa_sweeps = spec.sweeps;
  cfg.seed = spec.seed;
  if (spec.backend == "exhaustive")
    cfg.backend = SolverBackend::exhaustive;
  else if (spec.backend == "sa")
    cfg.backend = SolverBackend::simulated_annealing;
  else
    throw validation_failure("solve-qubo backend must be 'exhaustive' or 'sa'");

  const auto result = solve(problem, cfg);
  json doc;
  doc["x"] = json::array();
  for (auto bit : result.best_x) doc["x"].push_back(static_cast<int>(bit));
  doc["objective"] = result.best_objective;
  std::cout << doc.dump() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FPGA placement as a quadratic assignment problem, solved through small QUBOs"};
  app.require_subcommand(1);

  GenerateSpec gen;
  auto* generate = app.add_subcommand("generate", "Generate a random benchmark instance");
  generate->add_option("--m", gen.m, "number of functional blocks")->required();
  auto* gen_seed = generate->add_option("--seed", gen.seed, "random seed");
  generate->add_option("--arch", gen.arch, "architecture JSON path or 'fictional'");
  generate->add_option("-o,--out", gen.out, "output instance path")->required();
  generate->add_option("--mean-degree", gen.mean_degree, "target mean block degree");

  PlaceSpec place;
  std::string seeds_arg;
  std::string manifest_arg;
  double beta_low = 0.0, beta_high = 0.0;
  auto* place_cmd = app.add_subcommand("place", "Run the placement engine");
  place_cmd->add_option("--manifest", manifest_arg, "re-run a recorded manifest");
  place_cmd->add_option("--instance", place.instance, "instance JSON");
  place_cmd->add_option("--arch", place.arch, "architecture JSON path or 'fictional'");
  place_cmd->add_option("-o,--out", place.out, "output directory");
  place_cmd->add_option("--k", place.k, "sub-problem facility count");
  place_cmd->add_option("--ku", place.ku, "unbound locations per iteration");
  place_cmd->add_option("--iters", place.iters, "outer iteration budget");
  place_cmd->add_option("--eps", place.eps, "relative improvement stop threshold");
  place_cmd->add_option("--index-strategy", place.index_strategy, "random or worst");
  place_cmd->add_option("--solver", place.backend, "sa, exhaustive or external");
  place_cmd->add_option("--reads", place.reads, "solver reads per QUBO");
  place_cmd->add_option("--sweeps", place.sweeps, "annealing sweeps per read");
  auto* opt_beta_low = place_cmd->add_option("--beta-low", beta_low, "inverse temperature start");
  auto* opt_beta_high = place_cmd->add_option("--beta-high", beta_high, "inverse temperature end");
  std::string external_cmd;
  auto* opt_external = place_cmd->add_option("--external-cmd", external_cmd, "external solver command");
  int time_limit_ms = 0;
  auto* opt_time_limit = place_cmd->add_option("--time-limit-ms", time_limit_ms, "external solver time limit");
  int fixed_rounds = 0;
  auto* opt_fixed = place_cmd->add_option("--fixed-rounds", fixed_rounds, "fixed inner rounds per iteration");
  auto* place_seed = place_cmd->add_option("--seed", seeds_arg, "seed, or comma-separated seeds");
  place_cmd->add_flag("--timing", place.timing, "record wall times in the convergence log");
  place_cmd->add_flag("--render", place.render, "also write placement.svg");
  std::string debug_jsonl;
  auto* opt_debug = place_cmd->add_option("--debug-jsonl", debug_jsonl, "per-round debug stream");
  place_cmd->add_option("--jobs", place.jobs, "parallel runs for multi-seed sweeps");

  EvalSpec eval;
  auto* eval_cmd = app.add_subcommand("eval", "Check a placement and report its cost");
  eval_cmd->add_option("--instance", eval.instance, "instance JSON")->required();
  eval_cmd->add_option("--arch", eval.arch, "architecture JSON path or 'fictional'");
  eval_cmd->add_option("--placement", eval.placement, "placement JSON")->required();

  RenderSpec render;
  std::string render_instance;
  auto* render_cmd = app.add_subcommand("render", "Render a placement as SVG");
  render_cmd->add_option("--placement", render.placement, "placement JSON")->required();
  render_cmd->add_option("--arch", render.arch, "architecture JSON path or 'fictional'");
  auto* opt_render_instance =
      render_cmd->add_option("--instance", render_instance, "instance JSON for net edges");
  render_cmd->add_option("-o,--out", render.out, "output SVG path")->required();

  SolveQuboSpec solveq;
  auto* solveq_cmd =
      app.add_subcommand("solve-qubo", "Solve an exchange-format QUBO from stdin");
  solveq_cmd->add_option("--backend", solveq.backend, "exhaustive or sa");
  solveq_cmd->add_option("--reads", solveq.reads, "reads");
  solveq_cmd->add_option("--sweeps", solveq.sweeps, "sweeps");
  solveq_cmd->add_option("--seed", solveq.seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (generate->parsed()) {
      if (!*gen_seed) gen.seed = env_default_seed();
      return cmd_generate(gen);
    }
    if (place_cmd->parsed()) {
      if (!manifest_arg.empty()) {
        if (!place.instance.empty())
          throw validation_failure("--manifest replaces all other place options");
        std::ifstream in(manifest_arg);
        if (!in) throw validation_failure("cannot open manifest '" + manifest_arg + "'");
        return cmd_place(place_spec_from_json(json::parse(in)));
      }
      if (place.instance.empty() || place.out.empty())
        throw validation_failure("place needs --instance and --out (or --manifest)");
      if (opt_beta_low->count() != opt_beta_high->count())
        throw validation_failure("--beta-low and --beta-high must be given together");
      if (opt_beta_low->count()) place.beta_range = {beta_low, beta_high};
      if (*opt_external) place.external_cmd = external_cmd;
      if (*opt_time_limit) place.time_limit_ms = time_limit_ms;
      if (*opt_fixed) place.fixed_rounds = fixed_rounds;
      if (*opt_debug) place.debug_jsonl = debug_jsonl;
      if (*place_seed) {
        place.seeds.clear();
        std::stringstream ss(seeds_arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          if (tok.empty()) continue;
          place.seeds.push_back(std::stoull(tok));
        }
        if (place.seeds.empty()) throw validation_failure("--seed needs at least one value");
      } else {
        place.seeds = {env_default_seed()};
      }
      return cmd_place(place);
    }
    if (eval_cmd->parsed()) return cmd_eval(eval);
    if (render_cmd->parsed()) {
      if (*opt_render_instance) render.instance = render_instance;
      return cmd_render(render);
    }
    if (solveq_cmd->parsed()) return cmd_solve_qubo(solveq);
    return kExitValidation;
  } catch (const validation_failure& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  } catch (const parse_error& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    // solver, sampling and infrastructure failures
    std::cerr << e.what() << "\n";
    return kExitSolver;
  }
}
