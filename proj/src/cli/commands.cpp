#include "cli/commands.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "cli/exports.hpp"
#include "phasebal/error.hpp"
#include "phasebal/ga.hpp"
#include "phasebal/metrics.hpp"
#include "phasebal/network_io.hpp"
#include "phasebal/scenarios.hpp"
#include "phasebal/simd/kernels.hpp"

namespace phasebal::cli {

namespace {

namespace fs = std::filesystem;

struct InputOptions {
  std::string scenario = "112233";
  std::size_t customers = 60;
  std::string network_file;
  std::string profile_file;
  double p_watts = 200.0;
  double q_fraction = 0.10;
  std::size_t snapshots = 1;
  double tolerance = SolverOptions{}.tolerance;
  int max_iterations = SolverOptions{}.max_iterations;
  ObjectiveWeights weights;
  std::string isa;
};

struct Inputs {
  Network network;
  LoadProfile profile;
  std::string label;
};

void add_input_options(CLI::App& cmd, InputOptions& o) {
  auto* net = cmd.add_option("--network", o.network_file, "Network file (YAML)")->check(CLI::ExistingFile);
  cmd.add_option("--scenario", o.scenario, "Built-in reference feeder scheme: 112233, 123123 or 111")
      ->check(CLI::IsMember({"112233", "123123", "111"}))
      ->excludes(net);
  cmd.add_option("--customers", o.customers, "Customers on the built-in feeder")->check(CLI::PositiveNumber);
  auto* prof = cmd.add_option("--profile", o.profile_file, "Load profile file (CSV)")->check(CLI::ExistingFile);
  cmd.add_option("--p-watts", o.p_watts, "Constant active power per customer [W]")->excludes(prof);
  cmd.add_option("--q-fraction", o.q_fraction, "Reactive power as a fraction of active power")->excludes(prof);
  cmd.add_option("--snapshots", o.snapshots, "Snapshots of the constant profile")
      ->check(CLI::PositiveNumber)
      ->excludes(prof);
  cmd.add_option("--tolerance", o.tolerance, "Load-flow tolerance relative to the source voltage")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--max-iterations", o.max_iterations, "Load-flow iteration limit")->check(CLI::PositiveNumber);
  cmd.add_option("--alpha", o.weights.alpha, "Imbalance weight")->check(CLI::NonNegativeNumber);
  cmd.add_option("--beta", o.weights.beta, "Voltage-drop weight")->check(CLI::NonNegativeNumber);
  cmd.add_option("--gamma", o.weights.gamma, "Change-count weight")->check(CLI::NonNegativeNumber);
  cmd.add_option("--b-max", o.weights.b_max, "Imbalance normalizer [%]")->check(CLI::PositiveNumber);
  cmd.add_option("--dv-max", o.weights.dv_max, "Voltage-drop normalizer [%]")->check(CLI::PositiveNumber);
  cmd.add_option("--n-max", o.weights.n_max, "Change-count normalizer")->check(CLI::PositiveNumber);
  cmd.add_option("--isa", o.isa, "Kernel instruction set (scalar, avx2); default: best available")
      ->check(CLI::IsMember({"scalar", "avx2"}));
}

Inputs load_inputs(const InputOptions& o) {
  if (!o.isa.empty()) {
    const auto isa = *simd::parse_isa(o.isa);
    if (!simd::supported(isa)) throw ConfigError("instruction set " + o.isa + " is not supported by this CPU");
    simd::force(isa);
  }
  Inputs in;
  if (!o.network_file.empty()) {
    in.network = read_network_file(o.network_file);
    in.label = o.network_file;
  } else {
    const auto scheme = scenarios::parse_scheme(o.scenario);
    if (!scheme) throw ConfigError("unknown scenario '" + o.scenario + "'");
    in.network = scenarios::build_scenario(*scheme, o.customers);
    in.label = "scenario " + o.scenario;
  }
  if (!o.profile_file.empty()) {
    const auto problems = validate_profile(in.network, read_profile_file(o.profile_file));
    if (!problems.empty()) throw ConfigError(o.profile_file + ": " + problems.front());
    in.profile = align_profile(in.network, read_profile_file(o.profile_file));
  } else {
    in.profile = scenarios::constant_profile(in.network, o.p_watts, o.q_fraction, o.snapshots);
  }
  return in;
}

SolverOptions solver_options(const InputOptions& o) { return {o.tolerance, o.max_iterations}; }

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::size_t worst_snapshot(const FitnessReport& r) {
  std::size_t worst = 0;
  for (std::size_t k = 1; k < r.per_snapshot_dv.size(); ++k)
    if (r.per_snapshot_dv[k] > r.per_snapshot_dv[worst]) worst = k;
  return worst;
}

struct Column {
  std::string title;
  PhaseTable table;
  FitnessReport report;
  bool show_changes = true;
};

void print_columns(std::ostream& out, const std::vector<Column>& cols) {
  fmt::print(out, "{:<28}", "");
  for (const auto& c : cols) fmt::print(out, "  {:<22}", c.title);
  fmt::print(out, "\n{:<28}", "Phase");
  for (std::size_t i = 0; i < cols.size(); ++i) fmt::print(out, "  {:>6} {:>7} {:>7}", "A", "B", "C");
  out << '\n';

  auto row = [&](const char* label, auto&& cell) {
    fmt::print(out, "{:<28}", label);
    for (const auto& c : cols) {
      out << "  ";
      for (std::size_t p = 0; p < 3; ++p) fmt::print(out, p == 0 ? "{:>6}" : " {:>7}", cell(c, p));
    }
    out << '\n';
  };
  row("End-of-line voltage [V]", [](const Column& c, std::size_t p) { return fmt::format("{:.1f}", c.table.end_voltage[p]); });
  row("Voltage drop [%]", [](const Column& c, std::size_t p) { return fmt::format("{:.2f}", c.table.voltage_drop[p]); });
  row("Phase current [A]", [](const Column& c, std::size_t p) { return fmt::format("{:.1f}", c.table.current[p]); });
  row("Customers", [](const Column& c, std::size_t p) { return fmt::format("{}", c.table.customers[p]); });

  auto scalar = [&](const char* label, auto&& cell) {
    fmt::print(out, "{:<28}", label);
    for (const auto& c : cols) fmt::print(out, "  {:<22}", cell(c));
    out << '\n';
  };
  scalar("Load imbalance B [%]", [](const Column& c) { return fmt::format("{:.2f}", c.report.imbalance_b); });
  scalar("Voltage drop dV [%]", [](const Column& c) { return fmt::format("{:.2f}", c.report.voltage_drop); });
  scalar("Changes N", [](const Column& c) { return c.show_changes ? fmt::format("{}", c.report.changes) : std::string("-"); });
  scalar("Fitness", [](const Column& c) { return fmt::format("{:.5f}", c.report.fitness); });
}

Column column(const std::string& title, const Evaluator& ev, const PhaseAssignment& a,
              std::vector<PowerFlowResult>* keep = nullptr) {
  auto results = ev.solve(a);
  Column c{title, {}, ev.score(a, results)};
  c.table = phase_table(ev.network(), a, results[worst_snapshot(c.report)]);
  if (keep) *keep = std::move(results);
  return c;
}

void write_voltages(const fs::path& path, const Network& net, const std::vector<PowerFlowResult>& results) {
  std::vector<VoltagePoint> points;
  for (std::size_t k = 0; k < results.size(); ++k) {
    auto v = voltage_profile(net, results[k], k);
    points.insert(points.end(), v.begin(), v.end());
  }
  auto out = open_output(path);
  write_voltage_profile(out, points);
}

std::string builtin_description(const Inputs& in) {
  const BusId end = end_of_line_bus(in.network);
  return fmt::format("{} | {} customers ({} movable) | {} snapshot(s) | end-of-line bus {} ({:.1f} m)", in.label,
                     in.network.customers.size(), in.network.movable_count(), in.profile.size(), end,
                     in.network.buses[*in.network.bus_index(end)].distance_from_transformer);
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  InputOptions in;
  std::string solution_file;
  std::string voltage_file;
  std::string series_file;
  std::string json_file;
};

int simulate(const SimulateOptions& o, std::ostream& out) {
  const Inputs in = load_inputs(o.in);
  const Evaluator ev(in.network, in.profile, o.in.weights, solver_options(o.in));

  PhaseAssignment a = initial_assignment(in.network);
  std::string title = "Initial";
  if (!o.solution_file.empty()) {
    std::ifstream f(o.solution_file);
    if (!f) throw ParseError(o.solution_file, 0, "cannot open file");
    a = apply_solution(in.network, read_solution(f, o.solution_file));
    title = "Proposed";
  }

  std::vector<PowerFlowResult> results;
  const Column c = column(title, ev, a, &results);
  out << builtin_description(in) << '\n';
  if (in.profile.size() > 1)
    fmt::print(out, "Phase rows show the snapshot with the largest drop: {} ({})\n", worst_snapshot(c.report),
               in.profile.snapshots[worst_snapshot(c.report)].timestamp);
  print_columns(out, {c});

  if (!o.voltage_file.empty()) write_voltages(o.voltage_file, in.network, results);
  if (!o.series_file.empty()) {
    auto f = open_output(o.series_file);
    write_series(f, series(in.profile, c.report));
  }
  if (!o.json_file.empty()) {
    auto f = open_output(o.json_file);
    f << nlohmann::json{{"source", in.label}, {"report", to_json(c.report)}}.dump(2) << '\n';
  }

  if (c.report.nonconverged > 0) {
    fmt::print(out, "Load flow did not converge in {} of {} snapshot(s)\n", c.report.nonconverged, in.profile.size());
    return kNonConvergence;
  }
  return kSuccess;
}

// ---------------------------------------------------------------- optimize

struct OptimizeOptions {
  InputOptions in;
  ga::GaConfig ga;
  std::optional<std::size_t> mutated_individuals;
  std::string out_dir = ".";
};

int optimize(const OptimizeOptions& o, std::ostream& out) {
  const Inputs in = load_inputs(o.in);
  ga::GaConfig config = o.ga;
  config.weights = o.in.weights;
  config.solver = solver_options(o.in);
  config.mutated_individuals = o.mutated_individuals;
  config.check();

  const ga::GaRunResult result = ga::run(in.network, in.profile, config);
  const Evaluator ev(in.network, in.profile, config.weights, config.solver);

  std::vector<PowerFlowResult> before_flow, after_flow;
  Column before = column("Initial", ev, initial_assignment(in.network), &before_flow);
  before.show_changes = false;
  const Column after = column("Proposed", ev, result.best, &after_flow);

  out << builtin_description(in) << '\n';
  fmt::print(out, "weights alpha={} beta={} gamma={} | seed {} | population {} | {} generations | {} evaluations\n",
             config.weights.alpha, config.weights.beta, config.weights.gamma, config.rng_seed, config.population_size,
             result.generations_run, result.evaluations);
  print_columns(out, {before, after});

  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  const auto rows = solution_rows(in.network, result.best);
  {
    auto f = open_output(dir / "solution.csv");
    write_solution(f, rows);
  }
  {
    auto f = open_output(dir / "history.csv");
    write_history(f, result.history);
  }
  write_voltages(dir / "voltage_initial.csv", in.network, before_flow);
  write_voltages(dir / "voltage_proposed.csv", in.network, after_flow);
  {
    auto f = open_output(dir / "series.csv");
    write_series(f, series(in.profile, after.report));
  }
  {
    nlohmann::json j{{"source", in.label},
                     {"config",
                      {{"alpha", config.weights.alpha},
                       {"beta", config.weights.beta},
                       {"gamma", config.weights.gamma},
                       {"b_max", config.weights.b_max},
                       {"dv_max", config.weights.dv_max},
                       {"n_max", config.weights.n_max},
                       {"seed", config.rng_seed},
                       {"population", config.population_size},
                       {"stall", config.stall_generations},
                       {"max_generations", config.max_generations},
                       {"mutation", config.mutation_probability},
                       {"tolerance", config.solver.tolerance},
                       {"max_iterations", config.solver.max_iterations}}},
                     {"generations_run", result.generations_run},
                     {"initial", to_json(before.report)},
                     {"proposed", to_json(after.report)}};
    auto f = open_output(dir / "report.json");
    f << j.dump(2) << '\n';
  }
  fmt::print(out, "{} changes written to {}\n", rows.size(), (dir / "solution.csv").string());
  if (after.report.nonconverged > 0)
    fmt::print(out, "warning: load flow did not converge in {} snapshot(s) of the proposed assignment\n",
               after.report.nonconverged);
  return kSuccess;
}

// ---------------------------------------------------------------- validate

int validate_files(const std::string& network_file, const std::string& profile_file, std::ostream& out) {
  std::ifstream f(network_file);
  if (!f) throw ParseError(network_file, 0, "cannot open file");
  const NetworkDocument doc = parse_network(f, network_file);
  const auto problems = validate(doc.network);
  for (const auto& v : problems) out << doc.located(v) << '\n';

  std::size_t profile_problems = 0;
  if (!profile_file.empty()) {
    const LoadProfile profile = read_profile_file(profile_file);
    for (const auto& p : validate_profile(doc.network, profile)) {
      out << profile_file << ": " << p << '\n';
      ++profile_problems;
    }
  }
  if (problems.empty() && profile_problems == 0) {
    fmt::print(out, "{}: ok ({} buses, {} segments, {} customers)\n", network_file, doc.network.buses.size(),
               doc.network.segments.size(), doc.network.customers.size());
    return kSuccess;
  }
  return kValidationError;
}

// ---------------------------------------------------------------- export-scenario

int export_scenario(const InputOptions& o, const std::string& out_dir, std::ostream& out) {
  const Inputs in = load_inputs(o);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  write_network_file(dir / "network.yaml", in.network);
  write_profile_file(dir / "profile.csv", in.profile);
  fmt::print(out, "wrote {} and {}\n", (dir / "network.yaml").string(), (dir / "profile.csv").string());
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phase balancing of low-voltage feeders with a deterministic crowding genetic algorithm", "phasebal"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "TOML config file; command-line flags override its values");
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Solve the load flow of an assignment and report per-phase values");
  add_input_options(*sim_cmd, sim.in);
  sim_cmd->add_option("--solution", sim.solution_file, "Apply a solution file (customer_id,from_phase,to_phase)")
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("--voltage-profile", sim.voltage_file, "Write trunk voltages per snapshot and phase (CSV)");
  sim_cmd->add_option("--series", sim.series_file, "Write per-snapshot imbalance and drop (CSV)");
  sim_cmd->add_option("--json", sim.json_file, "Write the fitness report (JSON)");

  OptimizeOptions opt;
  auto* opt_cmd = app.add_subcommand("optimize", "Search phase reassignments with deterministic crowding");
  add_input_options(*opt_cmd, opt.in);
  opt_cmd->add_option("--seed", opt.ga.rng_seed, "Random seed");
  opt_cmd->add_option("--population", opt.ga.population_size, "Population size (even, >= 4)");
  opt_cmd->add_option("--stall", opt.ga.stall_generations, "Stop after this many generations without improvement");
  opt_cmd->add_option("--max-generations", opt.ga.max_generations, "Hard generation limit");
  opt_cmd->add_option("--mutation", opt.ga.mutation_probability, "Per-gene mutation probability")
      ->check(CLI::Range(0.0, 1.0));
  opt_cmd->add_option("--threads", opt.ga.threads, "Fitness evaluation threads")->check(CLI::PositiveNumber);
  opt_cmd->add_option("--mutated-individuals", opt.mutated_individuals,
                      "Not used by deterministic crowding; rejected when given");
  opt_cmd->add_option("--out-dir", opt.out_dir, "Directory for solution, history, voltage and report files");

  std::string val_network, val_profile;
  auto* val_cmd = app.add_subcommand("validate", "Check network and profile files");
  val_cmd->add_option("--network", val_network, "Network file (YAML)")->required()->check(CLI::ExistingFile);
  val_cmd->add_option("--profile", val_profile, "Load profile file (CSV)")->check(CLI::ExistingFile);

  InputOptions exp;
  std::string exp_dir = ".";
  auto* exp_cmd = app.add_subcommand("export-scenario", "Write a built-in scenario as network and profile files");
  add_input_options(*exp_cmd, exp);
  exp_cmd->add_option("--out-dir", exp_dir, "Output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    // Subcommand help requests arrive here too.
    if (e.get_exit_code() == 0) {
      for (CLI::App* sub : app.get_subcommands()) out << sub->help();
      return kSuccess;
    }
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }

  try {
    if (*sim_cmd) return simulate(sim, out);
    if (*opt_cmd) return optimize(opt, out);
    if (*val_cmd) return validate_files(val_network, val_profile, out);
    if (*exp_cmd) return export_scenario(exp, exp_dir, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace phasebal::cli
