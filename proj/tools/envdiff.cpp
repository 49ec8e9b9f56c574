// envdiff command-line driver: run-eca, evaluate, analyze, curves, render.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "envdiff/analysis.hpp"
#include "envdiff/apl.hpp"
#include "envdiff/curves.hpp"
#include "envdiff/eca.hpp"
#include "envdiff/experiment.hpp"
#include "envdiff/io.hpp"
#include "envdiff/render.hpp"
#include "envdiff/saeca.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace envdiff;

namespace {

const char* kConfigHelp = R"(Config files are flat "key = value" text, one pair per line, '#' comments.
Keys: rule (required), strategy (required unless --strategy is given), seed, p0,
steps, n_policies, random_walk_frac, len_min, len_max, prefix_len, rng_seed,
reps, grid, threads, n_estimator. Unknown keys are rejected.
Strategies: fresh, random-walk, chained, levin.)";

template <typename Fn>
std::string capture(Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  return ss.str();
}

experiment::Records load_records(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open records " + path.string());
  return experiment::read_records_csv(in);
}

struct RunEcaArgs {
  int rule = -1;
  std::string seed = experiment::kPaperSeed;
  int steps = 200;
  std::string out;
  std::string program;
  bool random_walk = false;
  int p0 = 11;
  std::uint64_t rng_seed = 20130111;
};

void cmd_run_eca(const RunEcaArgs& a) {
  const auto rule = eca::rule_from_number(a.rule);
  const auto cfg = eca::Configuration::parse(a.seed);
  if (a.steps < 0) throw std::invalid_argument("--steps must be >= 0");
  io::Manifest manifest("run-eca", {{"rule", std::to_string(a.rule)},
                                    {"seed", a.seed},
                                    {"steps", std::to_string(a.steps)}});
  const fs::path out(a.out);
  const auto rows = eca::evolve(cfg, rule, a.steps);
  manifest.emit(out, "spacetime.pbm", capture([&](std::ostream& s) { eca::write_pbm(s, rows); }));
  manifest.emit(out, "spacetime.csv", capture([&](std::ostream& s) { eca::write_csv(s, rows); }));

  if (!a.program.empty() || a.random_walk) {
    if (!a.program.empty() && a.random_walk) throw std::invalid_argument("--program and --random-walk are exclusive");
    saeca::EnvParams params{rule, cfg, a.p0};
    saeca::PolicyFn policy;
    if (a.random_walk) {
      policy = apl::RandomWalkAgent(stream_rng(a.rng_seed, "random-walk"));
    } else {
      policy = apl::ProgramAgent(apl::decode(a.program));
    }
    const auto trace = saeca::run_episode(params, policy, a.steps, {.record_configs = true});
    std::string pbm, positions;
    {
      std::ostringstream p, q;
      saeca::write_agent_diagram(p, q, trace);
      pbm = p.str();
      positions = q.str();
    }
    manifest.emit(out, "trace.csv", capture([&](std::ostream& s) { saeca::write_trace_csv(s, trace); }));
    manifest.emit(out, "agent.pbm", pbm);
    manifest.emit(out, "positions.csv", positions);
    manifest.set_extra("aggregated_reward", trace.aggregated.to_string());
    std::cout << "R = " << trace.aggregated.to_string() << " (" << trace.aggregated.to_double() << ")\n";
  }
  manifest.write(out);
}

struct Overrides {
  std::optional<std::string> strategy;
  std::optional<std::uint64_t> rng_seed;
  std::optional<int> threads;
  std::optional<int> reps;
  std::optional<int> grid;
  std::optional<std::string> n_estimator;
};

void apply(io::RunConfig& cfg, const Overrides& o) {
  if (o.strategy) cfg.experiment.strategy = experiment::parse_strategy(*o.strategy);
  if (o.rng_seed) cfg.experiment.rng_seed = *o.rng_seed;
  if (o.threads) cfg.experiment.threads = *o.threads;
  if (o.reps) cfg.reps = *o.reps;
  if (o.grid) cfg.grid = *o.grid;
  if (o.n_estimator) cfg.n_estimator = curves::parse_n_estimator(*o.n_estimator);
}

void cmd_evaluate(const std::string& config_path, const std::string& out_dir, const Overrides& o) {
  auto cfg = io::load_config(config_path, !o.strategy.has_value());
  apply(cfg, o);
  cfg.experiment.validate();
  const auto population = experiment::generate_population(cfg.experiment);
  const auto records = experiment::evaluate(population, cfg.experiment);
  // Thread count does not affect any output, so it is left out of the echo.
  auto settings = io::config_to_map(cfg);
  settings.erase("threads");
  io::Manifest manifest("evaluate", settings);
  const fs::path out(out_dir);
  manifest.emit(out, "records.csv", capture([&](std::ostream& s) { experiment::write_records_csv(s, records); }));
  manifest.emit(out, "records.jsonl", capture([&](std::ostream& s) { experiment::write_records_jsonl(s, records); }));
  manifest.emit(out, "config.txt", io::format_config(cfg));
  manifest.write(out);
  std::cout << "evaluated " << records.size() << " policies (" << experiment::to_string(cfg.experiment.strategy)
            << ", rule " << cfg.experiment.env.rule.rule_number << ") -> " << (out / "records.csv").string() << "\n";
}

void cmd_analyze(const std::string& records_path, const std::string& out_dir, int bins, bool svg) {
  const auto records = load_records(records_path);
  const auto ind = analysis::indicators(records);
  const auto set = analysis::slice(records);
  const auto acc = analysis::accumulate(set);
  const auto hist = analysis::histogram(records, bins);
  io::Manifest manifest("analyze", {{"records", records_path}, {"bins", std::to_string(bins)}});
  const fs::path out(out_dir);
  manifest.emit(out, "indicators.json", capture([&](std::ostream& s) { analysis::write_indicators_json(s, ind); }));
  manifest.emit(out, "slices.csv",
                capture([&](std::ostream& s) { analysis::write_summary_csv(s, analysis::summarize_slices(set)); }));
  manifest.emit(out, "slices_accumulated.csv", capture([&](std::ostream& s) {
                  analysis::write_summary_csv(s, analysis::summarize_accumulated(acc));
                }));
  manifest.emit(out, "histogram.csv", capture([&](std::ostream& s) { analysis::write_histogram_csv(s, hist); }));
  manifest.emit(out, "envelopes.csv", capture([&](std::ostream& s) {
                  s << "k,max,mean,min\n";
                  char buf[128];
                  for (const auto& e : analysis::envelopes(acc)) {
                    std::snprintf(buf, sizeof buf, "%d,%.10f,%.10f,%.10f\n", e.k, e.max.to_double(),
                                  e.mean.to_double(), e.min.to_double());
                    s << buf;
                  }
                }));
  if (svg) {
    manifest.emit(out, "distribution.svg", render::distribution_svg(records));
    manifest.emit(out, "histogram.svg", render::histogram_svg(hist));
  }
  manifest.write(out);
  std::printf("Rmax=%.4f Rmean=%.4f Rmin=%.4f Hpolicy=%d -> %s\n", ind.rmax.to_double(), ind.rmean.to_double(),
              ind.rmin.to_double(), ind.hpolicy, (out / "indicators.json").string().c_str());
}

void cmd_curves(const std::string& records_path, const std::string& out_dir, const std::string& config_path,
                const Overrides& o) {
  const auto records = load_records(records_path);
  io::RunConfig cfg;
  if (!config_path.empty()) cfg = io::load_config(config_path, false);
  else if (!records.empty()) cfg.experiment.rng_seed = records.front().rng_seed;
  apply(cfg, o);
  const auto pop = curves::weights(records);
  const auto est = curves::estimate_curve(pop, cfg.grid, cfg.reps, cfg.experiment.rng_seed, cfg.experiment.threads,
                                          cfg.n_estimator);
  const auto response = curves::response_curve(est);

  io::Manifest manifest("curves", {{"records", records_path},
                                   {"reps", std::to_string(cfg.reps)},
                                   {"grid", std::to_string(cfg.grid)},
                                   {"rng_seed", std::to_string(cfg.experiment.rng_seed)},
                                   {"n_estimator", std::string(curves::to_string(cfg.n_estimator))}});
  const fs::path out(out_dir);
  manifest.emit(out, "curve.csv", capture([&](std::ostream& s) { curves::write_curve_csv(s, est); }));
  manifest.emit(out, "response.csv", capture([&](std::ostream& s) { curves::write_response_csv(s, response); }));
  nlohmann::ordered_json meta;
  meta["Rmax"] = est.anchors.rmax.to_double();
  meta["Rmean"] = est.anchors.rmean.to_double();
  meta["Rmin"] = est.anchors.rmin.to_double();
  meta["reps"] = est.reps;
  meta["grid"] = est.gammas.size();
  meta["rng_seed"] = est.rng_seed;
  meta["n_estimator"] = curves::to_string(est.estimator);
  meta["population"] = pop.size();
  meta["raw_N_pos_at_gamma_1"] = est.raw_n_pos_at_one;
  meta["raw_N_neg_at_gamma_1"] = est.raw_n_neg_at_one;
  meta["isotonic_adjustments"] = {{"pos", response.pos_isotonic_adjustments},
                                  {"neg", response.neg_isotonic_adjustments}};
  meta["flat_points"] = {{"pos", response.pos_flat_points}, {"neg", response.neg_flat_points}};
  manifest.emit(out, "curve_meta.json", meta.dump(2) + "\n");
  manifest.write(out);
  std::printf("D_pos(0)=%.3f D_neg(0)=%.3f -> %s\n", est.d_pos.front(), est.d_neg.front(),
              (out / "curve.csv").string().c_str());
}

void cmd_render(const std::string& records_path, const std::string& response_path, const std::string& out_dir,
                int bins) {
  if (records_path.empty() && response_path.empty()) throw std::invalid_argument("render needs --records or --response");
  io::Manifest manifest("render", {{"records", records_path}, {"response", response_path}});
  const fs::path out(out_dir);
  if (!records_path.empty()) {
    const auto records = load_records(records_path);
    manifest.emit(out, "distribution.svg", render::distribution_svg(records));
    manifest.emit(out, "histogram.svg", render::histogram_svg(analysis::histogram(records, bins)));
  }
  if (!response_path.empty()) {
    std::ifstream in(response_path);
    if (!in) throw std::runtime_error("cannot open response " + response_path);
    manifest.emit(out, "response.svg", render::response_svg(render::read_response_csv(in)));
  }
  manifest.write(out);
}

void add_overrides(CLI::App* cmd, Overrides& o, bool evaluation, bool curve) {
  if (evaluation) cmd->add_option("--strategy", o.strategy, "fresh, random-walk, chained or levin");
  cmd->add_option("--rng-seed", o.rng_seed, "Master seed for all derived random streams");
  cmd->add_option("--threads", o.threads, "Worker threads (outputs do not depend on this)");
  if (curve) {
    cmd->add_option("--reps", o.reps, "Repetitions per tolerance value");
    cmd->add_option("--grid", o.grid, "Number of tolerance values in [0, 1]");
    cmd->add_option("--n-estimator", o.n_estimator, "median (default) or mean");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Environment difficulty estimation for single-agent elementary cellular automata"};
  app.footer(kConfigHelp);
  app.require_subcommand(1);
  app.set_version_flag("--version", io::kToolVersion);

  RunEcaArgs eca_args;
  auto* run_eca = app.add_subcommand("run-eca", "Evolve a cellular automaton, optionally with an agent");
  run_eca->add_option("--rule", eca_args.rule, "Wolfram rule number 0..255")->required();
  run_eca->add_option("--seed", eca_args.seed, "Initial configuration over {0,1}")->capture_default_str();
  run_eca->add_option("--steps", eca_args.steps, "Number of steps")->capture_default_str();
  run_eca->add_option("--out", eca_args.out, "Output directory")->required();
  run_eca->add_option("--program", eca_args.program, "Agent program as a digit string");
  run_eca->add_flag("--random-walk", eca_args.random_walk, "Use a random-walk agent");
  run_eca->add_option("--p0", eca_args.p0, "Agent start cell (1-based)")->capture_default_str();
  run_eca->add_option("--rng-seed", eca_args.rng_seed, "Seed for the random-walk agent")->capture_default_str();

  std::string config, out, records, response;
  int bins = 20;
  bool svg = false;
  Overrides eval_over, curve_over;

  auto* evaluate = app.add_subcommand("evaluate", "Generate a policy population and evaluate it");
  evaluate->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--out", out, "Output directory")->required();
  add_overrides(evaluate, eval_over, true, false);

  auto* analyze = app.add_subcommand("analyze", "Slices, envelopes, indicators and histograms");
  analyze->add_option("--records", records, "records.csv from evaluate")->required()->check(CLI::ExistingFile);
  analyze->add_option("--out", out, "Output directory")->required();
  analyze->add_option("--bins", bins, "Histogram bins over [0, 1]")->capture_default_str();
  analyze->add_flag("--svg", svg, "Also write SVG figures");

  auto* curves_cmd = app.add_subcommand("curves", "Difficulty tables and environment response curve");
  curves_cmd->add_option("--records", records, "records.csv from evaluate")->required()->check(CLI::ExistingFile);
  curves_cmd->add_option("--out", out, "Output directory")->required();
  curves_cmd->add_option("--config", config, "Config file supplying reps, grid, rng_seed")->check(CLI::ExistingFile);
  add_overrides(curves_cmd, curve_over, false, true);

  auto* render_cmd = app.add_subcommand("render", "SVG figures from records and response CSVs");
  render_cmd->add_option("--records", records, "records.csv")->check(CLI::ExistingFile);
  render_cmd->add_option("--response", response, "response.csv")->check(CLI::ExistingFile);
  render_cmd->add_option("--out", out, "Output directory")->required();
  render_cmd->add_option("--bins", bins, "Histogram bins")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run_eca) cmd_run_eca(eca_args);
    else if (*evaluate) cmd_evaluate(config, out, eval_over);
    else if (*analyze) cmd_analyze(records, out, bins, svg);
    else if (*curves_cmd) cmd_curves(records, out, config, curve_over);
    else if (*render_cmd) cmd_render(records, response, out, bins);
  } catch (const std::exception& e) {
    std::cerr << "envdiff: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
