// contend2: evaluate, construct, rediscover and simulate two-device
// contention-resolution protocols.
//
// Exit status: 0 success, 1 validation error, 2 numerical failure
// (NotConverged, HorizonExhausted, degenerate policy).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "contend2/contend2.hpp"

using nlohmann::ordered_json;
using namespace contend2;

namespace {

enum class Format { Json, Csv, Text };

// 12 significant digits.
ordered_json num(double x) {
  if (!std::isfinite(x)) return nullptr;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::stod(buf);
}

ordered_json nums(std::span<const double> xs) {
  ordered_json arr = ordered_json::array();
  for (double x : xs) arr.push_back(num(x));
  return arr;
}

std::string cell(const ordered_json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + cell(v[i]);
    return out;
  }
  return v.dump();
}

struct Output {
  std::string command;
  ordered_json params = ordered_json::object();
  ordered_json result = ordered_json::object();
  std::string table_key;  // result member holding row objects, if any

  void print(Format fmt, std::ostream& out) const {
    if (fmt == Format::Json) {
      ordered_json doc;
      doc["command"] = command;
      doc["params"] = params;
      doc["result"] = result;
      out << doc.dump(2) << '\n';
      return;
    }
    const bool csv = fmt == Format::Csv;
    const char* lead = csv ? "# " : "";
    out << lead << "command=" << command << '\n';
    for (const auto& [k, v] : params.items()) out << lead << k << '=' << cell(v) << '\n';
    const ordered_json* rows = nullptr;
    for (const auto& [k, v] : result.items()) {
      if (k == table_key) {
        rows = &v;
        continue;
      }
      if (csv) {
        out << k << ',' << cell(v) << '\n';
      } else {
        out << k << ": " << cell(v) << '\n';
      }
    }
    if (rows && !rows->empty()) {
      const char* sep = csv ? "," : "\t";
      bool first = true;
      for (const auto& [k, v] : rows->front().items()) {
        out << (first ? "" : sep) << k;
        first = false;
      }
      out << '\n';
      for (const auto& row : *rows) {
        first = true;
        for (const auto& [k, v] : row.items()) {
          out << (first ? "" : sep) << cell(v);
          first = false;
        }
        out << '\n';
      }
    }
  }
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_all(std::istream& in) {
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// --policy accepts an inline JSON array/object, "-" for stdin, or a file path.
// The envelope printed by `contend2 protocol` is unwrapped.
PolicySpec resolve_policy(const std::string& arg) {
  std::string text;
  const auto first = arg.find_first_not_of(" \t\n");
  if (arg == "-") {
    text = read_all(std::cin);
  } else if (first != std::string::npos && (arg[first] == '[' || arg[first] == '{')) {
    text = arg;
  } else {
    std::ifstream in(arg);
    if (!in) throw ValidationError("--policy: cannot open file '" + arg + "'");
    text = read_all(in);
  }
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.is_object() && j.contains("result")) return policy_from_json(j.at("result"));
    return policy_from_json(j);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("--policy: invalid JSON: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ValidationError(std::string("--policy: ") + e.what());
  }
}

PolicySpec policy_from_flags(const std::string& policy, double constant) {
  if (!policy.empty() && constant > 0.0) throw ValidationError("give either --policy or --constant, not both");
  if (constant > 0.0) {
    if (constant > 1.0) throw ValidationError("--constant must be in (0,1]");
    return ConstantPolicy{constant};
  }
  if (policy.empty()) throw ValidationError("one of --policy or --constant is required");
  return resolve_policy(policy);
}

ordered_json policy_json(const PolicySpec& spec) {
  ordered_json j;
  if (const auto* p = std::get_if<ProbSequence>(&spec)) {
    j["schedule"] = "recurrent";
    j["probs"] = nums(p->values());
  } else {
    j["schedule"] = "constant";
    j["probs"] = nums(std::vector<double>{std::get<ConstantPolicy>(spec).probability});
  }
  return j;
}

Objective objective_flag(const std::string& s, const char* flag = "--objective") {
  try {
    return parse_objective(s);
  } catch (const InvalidArgument& e) {
    throw ValidationError(std::string(flag) + ": " + e.what());
  }
}

std::vector<double> split_numbers(const std::string& s, std::size_t expected, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ValidationError(std::string(flag) + ": '" + tok + "' is not a number");
    }
  }
  if (out.size() != expected) {
    throw ValidationError(std::string(flag) + ": expected " + std::to_string(expected) + " comma-separated numbers");
  }
  return out;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string policy;
  double constant = 0.0;
  std::string objective = "all";
};

Output run_evaluate(const EvaluateArgs& a) {
  const PolicySpec spec = policy_from_flags(a.policy, a.constant);
  std::vector<Objective> objectives;
  if (a.objective == "all") {
    objectives = {Objective::Avg, Objective::Min, Objective::Max};
  } else {
    objectives = {objective_flag(a.objective)};
  }
  Output o;
  o.command = "evaluate";
  o.params["policy"] = policy_json(spec);
  o.params["objective"] = a.objective;
  try {
    for (auto obj : objectives) {
      ordered_json r;
      if (const auto* p = std::get_if<ProbSequence>(&spec)) {
        r["closed_form"] = num(expected_cost(probs_to_masses(*p), obj));
        r["oracle"] = num(markov_oracle(*p, obj));
      } else {
        r["closed_form"] = nullptr;
        r["oracle"] = num(markov_oracle(std::get<ConstantPolicy>(spec), obj));
      }
      o.result[std::string(to_string(obj))] = r;
    }
  } catch (const DegenerateDenominator& e) {
    throw NumericalFailure(e.what());
  } catch (const NonAbsorbing& e) {
    throw NumericalFailure(e.what());
  } catch (const InvalidArgument& e) {
    throw ValidationError(std::string("--policy: ") + e.what());
  }
  return o;
}

Output run_protocol(const std::string& objective) {
  const Objective obj = objective_flag(objective);
  Output o;
  o.command = "protocol";
  o.params["objective"] = objective;
  switch (obj) {
    case Objective::Avg: {
      const auto pr = optimal_avg_protocol();
      o.result["schedule"] = "recurrent";
      o.result["probs"] = nums(pr.probs.values());
      o.result["masses"] = nums(pr.masses.values());
      o.result["cost"] = num(pr.cost);
      break;
    }
    case Objective::Min: {
      const auto pr = optimal_min_protocol();
      o.result["schedule"] = "constant";
      o.result["probs"] = nums(std::vector<double>{pr.probability});
      o.result["cost"] = num(pr.cost);
      break;
    }
    case Objective::Max: {
      const auto pr = optimal_max_protocol();
      o.result["schedule"] = "recurrent";
      o.result["probs"] = nums(pr.probs.values());
      o.result["masses"] = nums(pr.masses.values());
      o.result["cost"] = num(pr.cost);
      o.result["gamma"] = num(pr.gamma);
      o.result["n0_alternative_cost"] = num(pr.n0_alternative_cost);
      break;
    }
  }
  return o;
}

struct OptimizeArgs {
  std::string objective = "avg";
  int length = 0;
  int l_min = 0;
  int l_max = 0;
  double tolerance = OptimizeConfig{}.tolerance;
  int max_iterations = OptimizeConfig{}.max_iterations;
  int restarts = OptimizeConfig{}.restarts;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;
};

Output run_optimize(const OptimizeArgs& a) {
  OptimizeConfig base;
  base.objective = objective_flag(a.objective);
  base.tolerance = a.tolerance;
  base.max_iterations = a.max_iterations;
  base.restarts = a.restarts;
  base.seed = a.seed;
  base.threads = resolve_threads(a.threads);
  int lo = a.l_min, hi = a.l_max;
  if (a.length > 0) {
    if (lo || hi) throw ValidationError("give either --length or --l-min/--l-max");
    lo = hi = a.length;
  }
  if (lo == 0 && hi == 0) lo = hi = 3;
  if (lo < 1 || hi < lo) throw ValidationError("--l-min/--l-max: need 1 <= l-min <= l-max");

  std::vector<SweepRow> rows;
  try {
    base.validate();
    rows = sweep_lengths(base.objective, lo, hi, base);
  } catch (const InvalidArgument& e) {
    throw ValidationError(e.what());
  }

  Output o;
  o.command = "optimize";
  o.params["objective"] = a.objective;
  o.params["l_min"] = lo;
  o.params["l_max"] = hi;
  o.params["tolerance"] = a.tolerance;
  o.params["max_iterations"] = a.max_iterations;
  o.params["restarts"] = a.restarts;
  o.params["seed"] = a.seed;
  o.params["threads"] = base.threads;
  o.table_key = "rows";
  ordered_json arr = ordered_json::array();
  bool all_converged = true;
  for (const auto& r : rows) {
    ordered_json row;
    row["L"] = r.length;
    row["cost"] = num(r.result.cost);
    row["masses"] = nums(r.result.masses.values());
    row["residual_max"] = num(r.result.residual_max);
    row["converged"] = r.result.converged;
    row["at_boundary"] = r.result.at_boundary;
    arr.push_back(row);
    all_converged = all_converged && r.result.converged;
  }
  o.result["best_L"] = best_length(rows).length;
  o.result["best_cost"] = num(best_length(rows).result.cost);
  o.result["rows"] = arr;
  if (!all_converged) {
    o.print(Format::Json, std::cout);
    throw NumericalFailure("optimize: NotConverged for at least one length (best found reported)");
  }
  return o;
}

struct SimulateArgs {
  std::string policy;
  double constant = 0.0;
  std::size_t n = 2;
  std::string objective = "avg";
  std::uint64_t trials = 100000;
  std::uint64_t seed = kDefaultSeed;
  std::size_t horizon = kDefaultHorizon;
  unsigned threads = 0;
  std::string board;
  std::string dump_board;
  std::string dump_trace;
  std::size_t dump_slots = 16;
};

void write_file(const std::string& path, const std::string& data, const char* flag) {
  std::ofstream out(path);
  if (!out) throw ValidationError(std::string(flag) + ": cannot write '" + path + "'");
  out << data;
}

Output run_simulate(const SimulateArgs& a) {
  const PolicySpec spec = policy_from_flags(a.policy, a.constant);
  const HistoryPolicy policy = to_history_policy(spec);
  const Objective obj = objective_flag(a.objective);
  Output o;
  o.command = "simulate";
  o.params["policy"] = policy_json(spec);
  o.params["objective"] = a.objective;

  if (!a.board.empty()) {
    std::ifstream in(a.board);
    if (!in) throw ValidationError("--board: cannot open '" + a.board + "'");
    RandomBoard board = [&] {
      try {
        return read_board_csv(in);
      } catch (const InvalidArgument& e) {
        throw ValidationError(std::string("--board: ") + e.what());
      }
    }();
    o.params["board"] = a.board;
    const Deduction d = deduce(board, policy);
    ordered_json lat = ordered_json::array();
    for (const auto& x : d.latencies) lat.push_back(x ? ordered_json(*x) : ordered_json(nullptr));
    o.result["n"] = d.n;
    o.result["horizon"] = d.horizon;
    o.result["latencies"] = lat;
    o.result["finished"] = d.finished();
    if (!a.dump_trace.empty()) {
      std::ostringstream ss;
      write_trace_csv(ss, d);
      write_file(a.dump_trace, ss.str(), "--dump-trace");
    }
    return o;
  }

  MonteCarloConfig cfg;
  cfg.n = a.n;
  cfg.objective = obj;
  cfg.trials = a.trials;
  cfg.seed = a.seed;
  cfg.horizon = a.horizon;
  cfg.threads = resolve_threads(a.threads);
  o.params["n"] = cfg.n;
  o.params["trials"] = cfg.trials;
  o.params["seed"] = cfg.seed;
  o.params["horizon"] = cfg.horizon;
  o.params["threads"] = cfg.threads;

  MonteCarloResult r;
  try {
    r = monte_carlo(policy, cfg);
  } catch (const InvalidArgument& e) {
    throw ValidationError(e.what());
  }
  o.result["mean"] = num(r.mean);
  o.result["ci_halfwidth"] = num(r.ci_halfwidth);
  o.result["trials"] = r.trials;
  o.result["unfinished_count"] = r.unfinished_count;

  if (!a.dump_board.empty() || !a.dump_trace.empty()) {
    const std::size_t slots = std::min(a.dump_slots, a.horizon);
    const RandomBoard board = RandomBoard::generate(a.n, slots, a.seed, 0);
    if (!a.dump_board.empty()) {
      std::ostringstream ss;
      write_board_csv(ss, board);
      write_file(a.dump_board, ss.str(), "--dump-board");
    }
    if (!a.dump_trace.empty()) {
      std::ostringstream ss;
      write_trace_csv(ss, deduce(board, policy));
      write_file(a.dump_trace, ss.str(), "--dump-trace");
    }
  }
  if (!r.trusted()) {
    o.print(Format::Json, std::cout);
    throw NumericalFailure("simulate: HorizonExhausted in " + std::to_string(r.unfinished_count) + " trials");
  }
  return o;
}

Output run_solve(const std::string& cubic, const std::string& bracket, double tol) {
  const auto c = split_numbers(cubic, 4, "--cubic");
  const auto b = split_numbers(bracket, 2, "--bracket");
  const CubicSpec spec{{c[0], c[1], c[2], c[3]}, b[0], b[1]};
  Output o;
  o.command = "solve";
  o.params["cubic"] = nums(c);
  o.params["bracket"] = nums(b);
  o.params["tol"] = tol;
  double root = 0.0;
  try {
    root = solve_cubic_in_bracket(spec, tol);
  } catch (const NoSignChange& e) {
    throw ValidationError(std::string("--bracket: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ValidationError(std::string("--tol: ") + e.what());
  } catch (const Error& e) {
    throw NumericalFailure(e.what());
  }
  o.result["root"] = num(root);
  o.result["residual"] = spec(root);
  return o;
}

Output run_table(const std::string& objective, int n_max) {
  if (objective_flag(objective) != Objective::Avg) {
    throw ValidationError("--objective: table is only defined for avg");
  }
  if (n_max < 1) throw ValidationError("--n-max must be >= 1");
  Output o;
  o.command = "table";
  o.params["objective"] = objective;
  o.params["n_max"] = n_max;
  o.table_key = "rows";
  ordered_json arr = ordered_json::array();
  for (const auto& r : avg_table(n_max)) {
    ordered_json row;
    row["N"] = r.N;
    row["a2"] = num(r.a2);
    row["cost"] = num(r.cost);
    row["at_endpoint"] = r.at_endpoint;
    arr.push_back(row);
  }
  o.result["rows"] = arr;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contend2: optimal two-device contention resolution"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string format = "json";
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"json", "csv", "text"}))
      ->capture_default_str();

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Closed-form and oracle cost of a policy");
  evaluate->add_option("--policy", ev.policy, "JSON array, protocol JSON, file path, or - for stdin");
  evaluate->add_option("--constant", ev.constant, "Constant transmit probability instead of --policy");
  evaluate->add_option("--objective", ev.objective, "avg, min, max or all")->capture_default_str();

  std::string protocol_objective;
  auto* protocol = app.add_subcommand("protocol", "Print the optimal protocol for an objective");
  protocol->add_option("--objective", protocol_objective, "avg, min or max")->required();

  OptimizeArgs op;
  auto* optimize = app.add_subcommand("optimize", "Numerically minimize over mass sequences");
  optimize->add_option("--objective", op.objective, "avg, min or max")->capture_default_str();
  optimize->add_option("--length", op.length, "Single sequence length L");
  optimize->add_option("--l-min", op.l_min, "Smallest L of a sweep");
  optimize->add_option("--l-max", op.l_max, "Largest L of a sweep");
  optimize->add_option("--tolerance", op.tolerance)->capture_default_str();
  optimize->add_option("--max-iterations", op.max_iterations)->capture_default_str();
  optimize->add_option("--restarts", op.restarts)->capture_default_str();
  optimize->add_option("--seed", op.seed)->capture_default_str();
  optimize->add_option("--threads", op.threads, "0 = all cores (CONTEND2_THREADS caps)");

  SimulateArgs sm;
  auto* simulate = app.add_subcommand("simulate", "Random-board Monte Carlo or single-board deduction");
  simulate->add_option("--policy", sm.policy, "JSON array, protocol JSON, file path, or - for stdin");
  simulate->add_option("--constant", sm.constant, "Constant transmit probability instead of --policy");
  simulate->add_option("--n", sm.n, "Number of devices")->capture_default_str();
  simulate->add_option("--objective", sm.objective, "avg, min or max")->capture_default_str();
  simulate->add_option("--trials", sm.trials)->capture_default_str();
  simulate->add_option("--seed", sm.seed)->capture_default_str();
  simulate->add_option("--horizon", sm.horizon)->capture_default_str();
  simulate->add_option("--threads", sm.threads, "0 = all cores (CONTEND2_THREADS caps)");
  simulate->add_option("--board", sm.board, "Deduce on this board CSV instead of sampling");
  simulate->add_option("--dump-board", sm.dump_board, "Write trial 0's board as CSV");
  simulate->add_option("--dump-trace", sm.dump_trace, "Write the deduction trace as CSV");
  simulate->add_option("--dump-slots", sm.dump_slots, "Columns written by --dump-*")->capture_default_str();

  std::string cubic, bracket;
  double tol = 1e-12;
  auto* solve = app.add_subcommand("solve", "Root of a cubic inside a bracket");
  solve->add_option("--cubic", cubic, "c3,c2,c1,c0")->required();
  solve->add_option("--bracket", bracket, "lo,hi")->required();
  solve->add_option("--tol", tol)->capture_default_str();

  std::string table_objective = "avg";
  int n_max = 4;
  auto* table = app.add_subcommand("table", "Best a2 and cost of the quadratic AVG family per N");
  table->add_option("--objective", table_objective)->capture_default_str();
  table->add_option("--n-max", n_max)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const Format fmt = format == "csv" ? Format::Csv : format == "text" ? Format::Text : Format::Json;
  try {
    Output out;
    if (*evaluate) out = run_evaluate(ev);
    else if (*protocol) out = run_protocol(protocol_objective);
    else if (*optimize) out = run_optimize(op);
    else if (*simulate) out = run_simulate(sm);
    else if (*solve) out = run_solve(cubic, bracket, tol);
    else if (*table) out = run_table(table_objective, n_max);
    out.params["format"] = format;
    out.print(fmt, std::cout);
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
