// Command-line front end: closed-form bound evaluation, Monte Carlo
// verification runs against clique-block ensembles, pattern-count
// experiments, and graph coloring reports.
//
// Exit codes: 0 success, 2 usage/validation error, 3 verification
// violation (a report row exceeded its bound by more than 3 sigma).

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "depbound/depbound.hpp"

namespace {

using namespace depbound;

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> grid;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    grid.push_back(std::stod(item));
  }
  if (grid.empty()) throw std::invalid_argument("a-grid must contain at least one value");
  return grid;
}

std::vector<std::size_t> parse_sizes(const std::string& csv) {
  std::vector<std::size_t> sizes;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    sizes.push_back(std::stoull(item));
  }
  return sizes;
}

std::string join_numbers(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += format_number(xs[i]);
  }
  return out;
}

void print_bound(const std::string& prefix, const BoundResult& b) {
  std::cout << prefix << "value=" << format_number(b.value) << '\n';
  std::cout << prefix << "log_value=" << format_number(b.log_value) << '\n';
  std::cout << prefix << "clamped=" << format_number(b.clamped) << '\n';
  std::cout << prefix << "vacuous=" << (b.vacuous ? 1 : 0) << '\n';
}

struct BoundArgs {
  std::size_t n = 0;
  int t = 2;
  double a = 0.0;
  std::size_t chi = 0;
  std::size_t d = 0;
  double p = -1.0;
  bool optimize = false;
  int t_max = 8;
  std::string classes;
  bool has_chi = false;
  bool has_d = false;
  bool has_p = false;
};

int run_bound(const BoundArgs& args) {
  const bool corollary_mode = args.has_d || args.has_p;
  if (corollary_mode && args.has_chi)
    throw std::invalid_argument("give either --chi (theorem) or --d/--p (corollary), not both");
  if (corollary_mode && !(args.has_d && args.has_p))
    throw std::invalid_argument("corollary mode needs both --d and --p");
  if (!corollary_mode && !args.has_chi)
    throw std::invalid_argument("either --chi or --d/--p is required");

  if (corollary_mode) {
    const BernoulliQuery q{args.n, args.d, args.t, args.p, args.a};
    print_bound("", bernoulli_tail_bound(q, TailSide::upper));
  } else {
    print_bound("", combined_tail_bound(TailQuery{args.n, args.t, args.a, args.chi}));
    if (args.optimize) {
      const OptimalOrder best = optimize_t(args.n, args.chi, args.a, args.t_max);
      std::cout << "t_best=" << best.t_best << '\n';
      print_bound("best_", best.bound);
    }
  }
  if (!args.classes.empty()) {
    ColorClassSizes classes{parse_sizes(args.classes)};
    const BoundResult moment = refined_moment_bound(classes, args.t);
    std::cout << "refined_moment=" << format_number(moment.value) << '\n';
    print_bound("refined_", markov_tail_from_moment(moment, args.t, args.a));
  }
  return 0;
}

struct VerifyArgs {
  std::size_t blocks = 1;
  std::size_t block_size = 1;
  int t = 2;
  std::uint64_t prime = 0;
  std::optional<std::uint64_t> p_num;
  double p = -1.0;
  bool has_p = false;
  std::string flips = "none";
  std::uint64_t trials = 0;
  std::string a_grid;
  std::uint64_t seed = 0;
  std::string out;
  unsigned threads = 1;
};

int run_verify(const VerifyArgs& args) {
  if (args.trials < 1) throw std::invalid_argument("trials must be >= 1");
  CliqueEnsembleSpec spec;
  spec.blocks = args.blocks;
  spec.block_size = args.block_size;
  spec.t = args.t;
  spec.prime = args.prime;
  spec.flips = flip_pattern_from_string(args.flips);
  spec.master_seed = args.seed;
  if (args.p_num && args.has_p)
    throw std::invalid_argument("give either --p-num or --p, not both");
  spec.p_num = args.p_num;

  // Resolve the realized prime before rounding a real-valued --p.
  FamilyParams params = spec.prime == 0 ? FamilyParams::choose(spec.blocks, spec.t)
                                        : FamilyParams{spec.blocks, spec.t, spec.prime};
  params.validate();
  spec.prime = params.prime;
  if (args.has_p) spec.p_num = closest_bernoulli_numerator(args.p, params.prime);

  const DependentEnsemble ensemble = make_clique_ensemble(spec);
  std::vector<double> grid = parse_grid(args.a_grid);
  ExperimentReport report = estimate_tail(ensemble, grid, args.trials, args.seed, args.threads);

  report.config = {
      {"command", "verify"},
      {"blocks", std::to_string(spec.blocks)},
      {"block_size", std::to_string(spec.block_size)},
      {"t", std::to_string(spec.t)},
      {"prime", std::to_string(spec.prime)},
      {"p_num", spec.p_num ? std::to_string(*spec.p_num) : "none"},
      {"p_realized", spec.p_num ? format_number(static_cast<double>(*spec.p_num) /
                                                static_cast<double>(spec.prime))
                                : "uniform"},
      {"flips", to_string(spec.flips)},
      {"trials", std::to_string(args.trials)},
      {"a_grid", join_numbers(grid)},
      {"seed", std::to_string(args.seed)},
  };

  std::ofstream out(args.out);
  if (!out) throw std::invalid_argument("cannot open output file: " + args.out);
  write_csv(out, report);

  const std::size_t violations = report.violation_count();
  std::cout << "rows=" << report.rows.size() << " violations=" << violations << '\n';
  return violations == 0 ? 0 : 3;
}

struct PatternArgs {
  std::string mode;
  std::string word;
  std::size_t alphabet = 2;
  std::size_t n = 0;
  int t = 2;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::string a_grid;
  std::string str;
  std::string out;
  std::string counts_out;
  unsigned threads = 1;
};

int run_pattern(const PatternArgs& args) {
  if (args.mode != "window" && args.mode != "subsequence")
    throw std::invalid_argument("mode must be 'window' or 'subsequence'");
  const PatternMode mode =
      args.mode == "window" ? PatternMode::window : PatternMode::subsequence;

  if (!args.str.empty()) {
    for (char c : args.str)
      if (c < 'a' || static_cast<std::size_t>(c - 'a') >= args.alphabet)
        throw std::invalid_argument("string letter outside alphabet");
    for (char c : args.word)
      if (c < 'a' || static_cast<std::size_t>(c - 'a') >= args.alphabet)
        throw std::invalid_argument("word letter outside alphabet");
    const std::uint64_t count = mode == PatternMode::window
                                    ? count_window_occurrences(args.str, args.word)
                                    : count_subsequence_occurrences(args.str, args.word);
    std::cout << "count=" << count << '\n';
    return 0;
  }

  if (args.trials < 1) throw std::invalid_argument("trials must be >= 1 (or give --string)");
  PatternInstance instance;
  instance.alphabet_size = args.alphabet;
  instance.word = args.word;
  instance.n = args.n;
  if (mode == PatternMode::window) plan_window_bound(instance, args.t);  // validate order early
  instance.validate();

  const std::vector<std::uint64_t> counts =
      sample_pattern_counts(instance, mode, args.t, args.trials, args.seed, args.threads);

  std::vector<std::pair<std::string, std::string>> config = {
      {"command", "pattern"},
      {"mode", args.mode},
      {"word", args.word},
      {"alphabet", std::to_string(args.alphabet)},
      {"n", std::to_string(args.n)},
      {"t", std::to_string(args.t)},
      {"trials", std::to_string(args.trials)},
      {"seed", std::to_string(args.seed)},
  };

  if (!args.counts_out.empty()) {
    std::ofstream out(args.counts_out);
    if (!out) throw std::invalid_argument("cannot open output file: " + args.counts_out);
    for (const auto& [key, value] : config) out << "# " << key << '=' << value << '\n';
    out << "trial,count\n";
    for (std::size_t i = 0; i < counts.size(); ++i) out << i << ',' << counts[i] << '\n';
  }

  std::size_t violations = 0;
  if (mode == PatternMode::window) {
    if (args.a_grid.empty() || args.out.empty())
      throw std::invalid_argument("window mode needs --a-grid and --out");
    std::vector<double> grid = parse_grid(args.a_grid);
    ExperimentReport report = window_tail_report(instance, args.t, grid, counts);
    report.config = config;
    report.config.emplace_back("a_grid", join_numbers(grid));
    std::ofstream out(args.out);
    if (!out) throw std::invalid_argument("cannot open output file: " + args.out);
    write_csv(out, report);
    violations = report.violation_count();
    std::cout << "rows=" << report.rows.size() << " violations=" << violations << '\n';
  } else {
    double mean = 0.0;
    for (std::uint64_t c : counts) mean += static_cast<double>(c);
    mean /= static_cast<double>(counts.size());
    std::cout << "trials=" << counts.size() << " mean_count=" << format_number(mean) << '\n';
  }
  return violations == 0 ? 0 : 3;
}

struct ColorArgs {
  std::string graph_file;
  std::string order = "natural";
  bool exact = false;
  std::size_t limit = 20;
};

int run_color(const ColorArgs& args) {
  std::ifstream in(args.graph_file);
  if (!in) throw std::invalid_argument("cannot open graph file: " + args.graph_file);
  const DependencyGraph g = read_graph(in);
  const ColorOrder order = args.order == "degree" ? ColorOrder::degree_descending
                           : args.order == "natural"
                               ? ColorOrder::natural
                               : throw std::invalid_argument("order must be 'natural' or 'degree'");
  const Coloring coloring = greedy_coloring(g, order);
  std::cout << "n=" << g.vertex_count() << '\n';
  std::cout << "m=" << g.edge_count() << '\n';
  std::cout << "max_degree=" << g.max_degree() << '\n';
  std::cout << "greedy_k=" << coloring.k << '\n';
  std::cout << "class_sizes=";
  const ColorClassSizes sizes = coloring.class_sizes();
  for (std::size_t i = 0; i < sizes.sizes.size(); ++i)
    std::cout << (i ? "," : "") << sizes.sizes[i];
  std::cout << '\n';
  if (args.exact) std::cout << "chi=" << exact_chromatic_number(g, args.limit) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tail bounds for sums of t-wise independent variables with graph dependencies"};
  app.require_subcommand(1);

  BoundArgs bound_args;
  auto* bound_cmd = app.add_subcommand("bound", "evaluate closed-form tail bounds");
  bound_cmd->add_option("--n", bound_args.n, "number of variables")->required();
  bound_cmd->add_option("--t", bound_args.t, "independence order (even)")->required();
  bound_cmd->add_option("--a", bound_args.a, "deviation (absolute, or relative with --p)")
      ->required();
  auto* chi_opt = bound_cmd->add_option("--chi", bound_args.chi, "chromatic number upper bound");
  auto* d_opt = bound_cmd->add_option("--d", bound_args.d, "maximum degree (corollary mode)");
  auto* p_opt = bound_cmd->add_option("--p", bound_args.p, "Bernoulli bias (corollary mode)");
  bound_cmd->add_flag("--optimize-t", bound_args.optimize, "scan even t up to --t-max");
  bound_cmd->add_option("--t-max", bound_args.t_max, "largest order for --optimize-t");
  bound_cmd->add_option("--classes", bound_args.classes, "color class sizes, e.g. 3,3,4");

  VerifyArgs verify_args;
  std::uint64_t p_num_raw = 0;
  auto* verify_cmd = app.add_subcommand("verify", "Monte Carlo bound-domination run");
  verify_cmd->add_option("--blocks", verify_args.blocks, "number of clique blocks")->required();
  verify_cmd->add_option("--block-size", verify_args.block_size, "vertices per block")->required();
  verify_cmd->add_option("--t", verify_args.t, "independence order (even)")->required();
  auto* p_num_opt = verify_cmd->add_option("--p-num", p_num_raw, "Bernoulli numerator over prime");
  auto* p_real_opt =
      verify_cmd->add_option("--p", verify_args.p, "Bernoulli bias (rounded to p_num/prime)");
  verify_cmd->add_option("--prime", verify_args.prime, "field modulus (0 = smallest admissible)");
  verify_cmd->add_option("--flips", verify_args.flips, "none|alternating");
  verify_cmd->add_option("--trials", verify_args.trials, "Monte Carlo trials")->required();
  verify_cmd->add_option("--a-grid", verify_args.a_grid, "comma-separated deviations")->required();
  verify_cmd->add_option("--seed", verify_args.seed, "master seed")->required();
  verify_cmd->add_option("--out", verify_args.out, "output CSV path")->required();
  verify_cmd->add_option("--threads", verify_args.threads, "worker threads (no output effect)");

  PatternArgs pattern_args;
  auto* pattern_cmd = app.add_subcommand("pattern", "pattern-occurrence experiments");
  pattern_cmd->add_option("--mode", pattern_args.mode, "window|subsequence")->required();
  pattern_cmd->add_option("--word", pattern_args.word, "pattern word over a,b,...")->required();
  pattern_cmd->add_option("--alphabet", pattern_args.alphabet, "alphabet size");
  pattern_cmd->add_option("--n", pattern_args.n, "random string length");
  pattern_cmd->add_option("--t", pattern_args.t, "letter independence order");
  pattern_cmd->add_option("--trials", pattern_args.trials, "Monte Carlo trials");
  pattern_cmd->add_option("--seed", pattern_args.seed, "master seed");
  pattern_cmd->add_option("--a-grid", pattern_args.a_grid, "deviations for window mode");
  pattern_cmd->add_option("--string", pattern_args.str, "count occurrences in this string");
  pattern_cmd->add_option("--out", pattern_args.out, "bound-table CSV (window mode)");
  pattern_cmd->add_option("--counts-out", pattern_args.counts_out, "per-trial counts CSV");
  pattern_cmd->add_option("--threads", pattern_args.threads, "worker threads (no output effect)");

  ColorArgs color_args;
  auto* color_cmd = app.add_subcommand("color", "coloring report for a graph file");
  color_cmd->add_option("--graph", color_args.graph_file, "graph file (\"n m\" + edge lines)")
      ->required();
  color_cmd->add_option("--order", color_args.order, "natural|degree");
  color_cmd->add_flag("--exact", color_args.exact, "also compute the exact chromatic number");
  color_cmd->add_option("--limit", color_args.limit, "vertex limit for --exact");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    bound_args.has_chi = chi_opt->count() > 0;
    bound_args.has_d = d_opt->count() > 0;
    bound_args.has_p = p_opt->count() > 0;
    verify_args.has_p = p_real_opt->count() > 0;
    if (p_num_opt->count() > 0) verify_args.p_num = p_num_raw;
    if (bound_cmd->parsed()) return run_bound(bound_args);
    if (verify_cmd->parsed()) return run_verify(verify_args);
    if (pattern_cmd->parsed()) return run_pattern(pattern_args);
    if (color_cmd->parsed()) return run_color(color_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
