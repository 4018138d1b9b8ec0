#include "spdesign/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "spdesign/energy.hpp"
#include "spdesign/harness.hpp"
#include "spdesign/metrics.hpp"
#include "spdesign/parallel.hpp"
#include "spdesign/sampling.hpp"
#include "spdesign/testfns.hpp"

namespace spd {

namespace {

/// Semantically invalid arguments (exit code 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string config;
};

struct SeedInfo {
  std::uint64_t seed = 0;
  std::string source;
};

SeedInfo resolve_seed(const Common& c, std::ostream& err) {
  if (c.seed) return {*c.seed, "flag"};
  const std::uint64_t s = entropy_seed();
  err << "seed: " << s << " (entropy)\n";
  return {s, "entropy"};
}

void add_common(CLI::App& sub, Common& c, bool with_config) {
  sub.add_option("--seed", c.seed, "Random seed (default: system entropy, recorded in the output)");
  sub.add_option("--threads", c.threads, "Worker threads (default: available cores)")->check(CLI::NonNegativeNumber);
  if (with_config) sub.add_option("--config", c.config, "JSON option tree")->check(CLI::ExistingFile);
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw UsageError("malformed JSON in " + path + ": " + e.what());
  }
}

/// Writes to the file, or to out when the path is empty.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << text;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateArgs {
  Common common;
  std::string method;
  std::optional<Eigen::Index> n, p;
  std::string init;
  std::string prior = "pod";
  std::string out, trace;
  std::optional<Eigen::Index> batch_size;
  std::optional<int> max_sweeps;
  std::string step = "guarded-gradient";
};

void setup_generate(CLI::App& app, GenerateArgs& a) {
  auto* sub = app.add_subcommand("generate", "Compute support points or projected support points");
  sub->add_option("--method", a.method, "sp or psp")->required()->check(CLI::IsMember({"sp", "psp"}));
  sub->add_option("--n", a.n, "Number of points")->check(CLI::PositiveNumber);
  sub->add_option("--p", a.p, "Dimension")->check(CLI::PositiveNumber);
  sub->add_option("--init", a.init, "sobol, random, maximin-lhd or a CSV design (default: sobol for sp, maximin-lhd for psp)");
  sub->add_option("--prior", a.prior, "pod or exp:LAMBDA (psp only)");
  sub->add_option("--batch-size", a.batch_size, "Samples per sweep (sp) or per visit (psp)")->check(CLI::PositiveNumber);
  sub->add_option("--max-sweeps", a.max_sweeps, "Sweep limit")->check(CLI::NonNegativeNumber);
  sub->add_option("--step", a.step, "psp inner step")->check(CLI::IsMember({"guarded-gradient", "closed-form-mm"}));
  sub->add_option("--out", a.out, "Output CSV (default: standard output)");
  sub->add_option("--trace", a.trace, "Optimization trace JSON");
  add_common(*sub, a.common, true);
}

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  const SeedInfo seed = resolve_seed(a.common, err);
  const RngConfig rng{seed.seed, 0};
  const std::string init_kind = !a.init.empty() ? a.init : a.method == "sp" ? "sobol" : "maximin-lhd";

  std::optional<Design> init;
  if (init_kind == "sobol" || init_kind == "random" || init_kind == "maximin-lhd") {
    if (!a.n || !a.p) throw UsageError("--n and --p are required unless --init is a CSV file");
    init = baseline_design(parse_baseline_kind(init_kind), *a.n, *a.p, rng.derive(1));
  } else {
    if (!std::filesystem::exists(init_kind)) throw UsageError("--init: no such file or design kind: " + init_kind);
    init = load_design(init_kind);
    if ((a.n && *a.n != init->n()) || (a.p && *a.p != init->p())) {
      throw UsageError("--n/--p disagree with the shape of the --init design");
    }
  }

  Json cfg_tree = a.common.config.empty() ? Json::object() : read_json_file(a.common.config);
  std::pair<Design, OptTrace> result{*init, {}};
  Json cfg_json;
  if (a.method == "sp") {
    SpConfig cfg;
    if (cfg_tree.contains("sp")) apply_config(cfg, cfg_tree["sp"]);
    if (a.batch_size) cfg.batch_size = *a.batch_size;
    if (a.max_sweeps) cfg.max_sweeps = *a.max_sweeps;
    cfg.rng = rng.derive(2);
    err << "sp: n=" << init->n() << " p=" << init->p() << " batch=" << cfg.resolved_batch_size(init->n()) << '\n';
    result = sp_optimize(*init, cfg);
    cfg_json = to_json(cfg);
  } else {
    PspConfig cfg;
    if (cfg_tree.contains("psp")) apply_config(cfg, cfg_tree["psp"]);
    if (a.prior == "pod") {
      cfg.prior = PriorKind::pod;
    } else if (a.prior.rfind("exp:", 0) == 0) {
      cfg.prior = PriorKind::exponential;
      std::size_t used = 0;
      const std::string rate = a.prior.substr(4);
      try {
        cfg.lambda = std::stod(rate, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != rate.size() || used == 0 || !(cfg.lambda > 0.0)) throw UsageError("--prior exp:LAMBDA needs LAMBDA > 0");
    } else {
      throw UsageError("--prior must be pod or exp:LAMBDA");
    }
    cfg.step = a.step == "closed-form-mm" ? PspStep::closed_form_mm : PspStep::guarded_gradient;
    if (a.batch_size) cfg.batch_size = *a.batch_size;
    if (a.max_sweeps) cfg.max_sweeps = *a.max_sweeps;
    cfg.rng = rng.derive(3);
    err << "psp: n=" << init->n() << " p=" << init->p() << " batch=" << cfg.resolved_batch_size(init->n())
        << " draws=" << cfg.prior_draws << '\n';
    result = psp_optimize(*init, cfg);
    cfg_json = to_json(cfg);
  }
  const auto& [design, trace] = result;
  err << "done: " << trace.sweeps << " sweeps, " << (trace.converged ? "converged" : "not converged")
      << (trace.reverted ? ", reverted to start" : "") << ", " << trace.seconds << " s\n";

  emit(format_design_csv(design), a.out, out);
  if (!a.trace.empty()) {
    Json j = {{"seed", seed.seed}, {"seed_source", seed.source}, {"method", a.method},
              {"init", init_kind},  {"config", cfg_json},        {"trace", Json::parse(trace.to_json())}};
    emit(j.dump(2) + "\n", a.trace, out);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
  Common common;
  std::string design;
  std::string metrics;
  std::vector<int> ls;
  std::string out;
  Eigen::Index energy_batch = 1 << 16;
  Eigen::Index candidates = 1 << 16;
};

void setup_eval(CLI::App& app, EvalArgs& a) {
  auto* sub = app.add_subcommand("eval", "Evaluate design criteria");
  sub->add_option("--design", a.design, "Design CSV")->required()->check(CLI::ExistingFile);
  sub->add_option("--metrics", a.metrics,
                  "Comma-separated: energy, qenergy:Q, cl2, maximin, minimax, mml[:L], mmL[:L], maxpro:LAMBDA")
      ->required();
  sub->add_option("--l", a.ls, "Subspace dimensions for mml / mmL given without :L (default 1..p)");
  sub->add_option("--energy-batch", a.energy_batch, "Sobol batch for energy terms")->check(CLI::PositiveNumber);
  sub->add_option("--candidates", a.candidates, "Sobol candidates for minimax")->check(CLI::PositiveNumber);
  sub->add_option("--out", a.out, "Output JSON (default: standard output)");
  add_common(*sub, a.common, false);
}

std::vector<std::string> expand_metrics(const std::string& list, const std::vector<int>& ls, Eigen::Index p) {
  std::vector<std::string> names;
  std::stringstream ss(list);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name.empty()) continue;
    if (name == "mml" || name == "mmL" || name == "mM" || name == "Mm") {
      std::vector<int> levels = ls;
      if (levels.empty()) {
        for (int l = 1; l <= p; ++l) levels.push_back(l);
      }
      for (int l : levels) names.push_back(name + ":" + std::to_string(l));
      continue;
    }
    names.push_back(name);
  }
  if (names.empty()) throw UsageError("--metrics is empty");
  for (const auto& m : names) {
    try {
      validate_metric_name(m);
    } catch (const InputError& e) {
      throw UsageError(e.what());
    }
  }
  return names;
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const Design d = load_design(a.design);
  const auto names = expand_metrics(a.metrics, a.ls, d.p());
  for (const auto& m : names) {
    // Level bounds depend on the design, so check them here as usage errors.
    const auto colon = m.find(':');
    if (colon == std::string::npos) continue;
    const std::string head = m.substr(0, colon);
    if (head == "mml" || head == "mmL" || head == "mM" || head == "Mm") {
      const int l = std::stoi(m.substr(colon + 1));
      if (l < 1 || l > d.p()) throw UsageError("subspace dimension out of range in " + m);
    }
  }
  const SeedInfo seed = resolve_seed(a.common, err);
  MetricOptions opts;
  opts.energy_batch = a.energy_batch;
  opts.minimax_candidates = a.candidates;
  const auto entries = evaluate_metrics(d, names, RngConfig{seed.seed, 0}, opts);

  Json values = Json::object();
  Json list = Json::array();
  for (const auto& e : entries) {
    const Json v = std::isfinite(e.value) ? Json(e.value) : Json(nullptr);
    values[e.metric] = v;
    Json meta = Json::object();
    for (const auto& [k, mv] : e.meta) meta[k] = mv;
    list.push_back({{"metric", e.metric}, {"value", v}, {"meta", std::move(meta)}});
  }
  const Json report = {{"values", std::move(values)},
                       {"metrics", std::move(list)},
                       {"meta", {{"seed", seed.seed}, {"seed_source", seed.source}, {"design", a.design},
                                 {"n", d.n()}, {"p", d.p()}}}};
  emit(report.dump(2) + "\n", a.out, out);
  return 0;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchArgs {
  Common common;
  std::string study;
  std::string out;
  int replicates = 1;
  std::optional<Eigen::Index> n, p;
  std::optional<double> theta;
  std::vector<double> theta_max;
  std::vector<double> active;
  std::vector<std::string> functions;
  std::vector<Eigen::Index> sizes;
};

void setup_bench(CLI::App& app, BenchArgs& a) {
  auto* sub = app.add_subcommand("bench", "Run a benchmark study");
  sub->add_option("--study", a.study, "fig3, fig4, fig5, table2, table3 or theorems")
      ->required()
      ->check(CLI::IsMember({"fig3", "fig4", "fig5", "table2", "table3", "theorems"}));
  sub->add_option("--out", a.out, "Output directory")->required();
  sub->add_option("--replicates", a.replicates, "Independent seeds (table2, table3, fig4)")->check(CLI::PositiveNumber);
  sub->add_option("--n", a.n, "Design size (fig3, fig4, fig5, table2)")->check(CLI::PositiveNumber);
  sub->add_option("--p", a.p, "Dimension (fig3, fig5, table2)")->check(CLI::PositiveNumber);
  sub->add_option("--theta", a.theta, "Correlation scale (fig4)")->check(CLI::PositiveNumber);
  sub->add_option("--theta-max", a.theta_max, "Upper scale limits of the table2 cells");
  sub->add_option("--active", a.active, "Active input fractions of the table2 cells");
  sub->add_option("--function", a.functions, "Benchmark functions (table3)");
  sub->add_option("--sizes", a.sizes, "Design sizes (table3)");
  add_common(*sub, a.common, true);
}

Json section(const Json& tree, const char* key) { return tree.contains(key) ? tree[key] : Json::object(); }

int cmd_bench(const BenchArgs& a, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  const SeedInfo seed = resolve_seed(a.common, err);
  const RngConfig root{seed.seed, 0};
  const Json tree = a.common.config.empty() ? Json::object() : read_json_file(a.common.config);
  for (const auto& [k, v] : tree.items()) {
    if (k != "pool" && k != "fig4" && k != "table2" && k != "table3" && k != "theorems") {
      throw UsageError("unknown config section '" + k + "'");
    }
  }
  const std::filesystem::path dir(a.out);
  std::filesystem::create_directories(dir);

  Manifest m;
  m.study = a.study;
  m.seed = seed.seed;
  m.seed_source = seed.source;
  m.threads = thread_count();
  const auto record = [&](const std::string& f) { m.files.push_back(f); };

  PoolOptions pool = bench_pool_options();
  apply_config(pool, section(tree, "pool"));

  if (a.study == "fig4") {
    Fig4Options o;
    apply_config(o, section(tree, "fig4"));
    if (a.n) o.n = *a.n;
    if (a.theta) o.theta = *a.theta;
    Json reps = Json::array();
    int step_wins = 0, runge_within = 0;
    for (int r = 0; r < a.replicates; ++r) {
      err << "fig4: replicate " << r + 1 << "/" << a.replicates << '\n';
      const Fig4Report rep = run_fig4_study(o, root.derive(static_cast<std::uint64_t>(r)));
      if (r == 0) {
        write_fig4(rep, dir);
        record("fig4.csv");
        record("fig4_curves.csv");
      }
      step_wins += rep.mspe("sp", "step") < rep.mspe("chebyshev", "step") ? 1 : 0;
      runge_within += rep.mspe("sp", "runge") <= 3.0 * rep.mspe("chebyshev", "runge") ? 1 : 0;
      reps.push_back(to_json(rep));
    }
    write_json({{"replicates", reps}, {"sp_better_step", step_wins}, {"sp_runge_within_3x", runge_within}},
               dir / "report.json");
    m.config = to_json(o);
  } else if (a.study == "table2") {
    EfficiencyOptions base;
    apply_config(base, section(tree, "table2"));
    const Eigen::Index p = a.p.value_or(5), n = a.n.value_or(30);
    const std::vector<double> tmax = a.theta_max.empty() ? std::vector<double>{5.0, 20.0} : a.theta_max;
    const std::vector<double> act = a.active.empty() ? std::vector<double>{1.0, 0.4} : a.active;
    std::vector<EfficiencyOptions> cells;
    for (double t : tmax) {
      for (double f : act) {
        EfficiencyOptions c = base;
        c.theta_max = t;
        c.active_fraction = f;
        cells.push_back(c);
      }
    }
    Json reps = Json::array();
    std::vector<std::map<std::string, int>> wins(cells.size());
    std::vector<EfficiencyTable> mean_tables;
    for (int r = 0; r < a.replicates; ++r) {
      err << "table2: replicate " << r + 1 << "/" << a.replicates << " building pool\n";
      const RngConfig rr = root.derive(static_cast<std::uint64_t>(r));
      const auto members = build_pool(n, p, pool, rr.derive(1));
      Json tables = Json::array();
      for (std::size_t c = 0; c < cells.size(); ++c) {
        EfficiencyTable t = run_efficiency_table(members, cells[c], rr.derive(2 + c));
        ++wins[c][t.best()];
        tables.push_back(to_json(t));
        if (r == 0) {
          mean_tables.push_back(t);
        } else {
          mean_tables[c].eff += t.eff;
        }
      }
      reps.push_back(std::move(tables));
    }
    for (auto& t : mean_tables) t.eff /= a.replicates;
    write_efficiency_csv(mean_tables, dir / "table2.csv");
    Json w = Json::array();
    for (std::size_t c = 0; c < cells.size(); ++c) {
      w.push_back({{"theta_max", cells[c].theta_max}, {"active_fraction", cells[c].active_fraction}, {"wins", wins[c]}});
    }
    write_json({{"p", p}, {"n", n}, {"replicates", reps}, {"wins", w}}, dir / "report.json");
    record("table2.csv");
    m.config = {{"cell", to_json(base)}, {"p", p}, {"n", n}, {"theta_max", tmax}, {"active", act},
                {"pool", to_json(pool)}};
  } else if (a.study == "table3") {
    EmulationOptions base;
    base.pool = pool;
    apply_config(base, section(tree, "table3"));
    const std::vector<std::string> fns =
        a.functions.empty() ? std::vector<std::string>{base.function} : a.functions;
    Json out = Json::array();
    for (const auto& f : fns) {
      EmulationOptions o = base;
      o.function = f;
      o.sizes = !a.sizes.empty() ? a.sizes : (section(tree, "table3").contains("sizes") ? base.sizes : default_sizes(f));
      std::map<std::string, int> wins;
      Json reps = Json::array();
      for (int r = 0; r < a.replicates; ++r) {
        err << "table3: " << f << " replicate " << r + 1 << "/" << a.replicates << '\n';
        const EmulationTable t = run_emulation_table(o, root.derive(static_cast<std::uint64_t>(r)).derive(std::hash<std::string>{}(f)));
        ++wins[t.best()];
        if (r == 0) {
          write_emulation_csv(t, dir / ("table3_" + f + ".csv"));
          record("table3_" + f + ".csv");
        }
        reps.push_back(to_json(t));
      }
      out.push_back({{"function", f}, {"wins", wins}, {"replicates", reps}, {"config", to_json(o)}});
    }
    write_json(out, dir / "report.json");
    m.config = {{"table3", to_json(base)}, {"functions", fns}};
  } else if (a.study == "theorems") {
    TheoremOptions o;
    apply_config(o, section(tree, "theorems"));
    err << "theorems: running 4 checks\n";
    const auto checks = run_theorem_suite(o, root);
    Json list = Json::array();
    bool all = true;
    for (const auto& c : checks) {
      err << "  " << c.name << ": " << (c.passed ? "pass" : "FAIL") << '\n';
      all = all && c.passed;
      list.push_back(to_json(c));
    }
    write_json({{"checks", list}, {"all_passed", all}}, dir / "report.json");
    m.config = to_json(o);
  } else {
    // fig3: SP and PSP designs with 1-d projections; fig5: criterion curves.
    const Eigen::Index n = a.n.value_or(a.study == "fig3" ? 25 : 50);
    const Eigen::Index p = a.p.value_or(a.study == "fig3" ? 2 : 10);
    err << a.study << ": building pool n=" << n << " p=" << p << '\n';
    const auto members = build_pool(n, p, pool, root.derive(1));
    Json designs = Json::object();
    for (const auto& mem : members) {
      save_design(mem.design, dir / (mem.name + ".csv"));
      record(mem.name + ".csv");
      const Vector proj = projected_energy_1d(mem.design);
      designs[mem.name] = {{"projected_energy_1d", std::vector<double>(proj.data(), proj.data() + proj.size())}};
    }
    if (a.study == "fig5") {
      const auto rows = run_projection_curves(members, root.derive(2));
      write_curves_csv(rows, dir / "fig5.csv");
      record("fig5.csv");
    }
    write_json({{"n", n}, {"p", p}, {"designs", designs}}, dir / "report.json");
    m.config = {{"n", n}, {"p", p}, {"pool", to_json(pool)}};
  }
  record("report.json");
  record("manifest.json");
  m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_json(to_json(m), dir / "manifest.json");
  err << "wrote " << dir.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// functions
// ---------------------------------------------------------------------------

int cmd_functions(std::ostream& out) {
  for (const auto& f : test_functions()) out << f.name << '\t' << f.p << '\t' << f.source << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Support point and projected support point designs"};
  app.name("spdesign");
  app.require_subcommand(1);
  GenerateArgs gen;
  EvalArgs ev;
  BenchArgs bench;
  setup_generate(app, gen);
  setup_eval(app, ev);
  setup_bench(app, bench);
  app.add_subcommand("functions", "List the benchmark functions");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    const Common& common = name == "generate" ? gen.common : name == "eval" ? ev.common : bench.common;
    set_thread_count(common.threads);
    if (name == "generate") return cmd_generate(gen, out, err);
    if (name == "eval") return cmd_eval(ev, out, err);
    if (name == "bench") return cmd_bench(bench, err);
    return cmd_functions(out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return 2;
  } catch (const Json::exception& e) {
    err << "error: bad configuration: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace spd
