#include "spdesign/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

#include "spdesign/energy.hpp"
#include "spdesign/metrics.hpp"
#include "spdesign/sampling.hpp"
#include "spdesign/testfns.hpp"

namespace spd {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Design init_design(const std::string& kind, Eigen::Index n, Eigen::Index p, const RngConfig& rng) {
  return baseline_design(parse_baseline_kind(kind), n, p, rng);
}

std::string argmax_name(const std::vector<std::string>& names, const Vector& v) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < v.size(); ++k) {
    if (v[k] > v[best]) best = k;
  }
  return names.at(static_cast<std::size_t>(best));
}

Vector evaluate_on(const std::function<double(double)>& f, const Vector& x) {
  Vector y(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) y[k] = f(x[k]);
  return y;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Json design_json(const Design& d) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    Json row = Json::array();
    for (Eigen::Index l = 0; l < d.p(); ++l) row.push_back(d.points()(i, l));
    rows.push_back(std::move(row));
  }
  return {{"label", d.label()}, {"points", std::move(rows)}};
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

[[noreturn]] void unknown_key(const std::string& key, const char* where) {
  throw InputError("unknown config key '" + key + "' in " + where);
}

const Json& require_object(const Json& j, const char* where) {
  if (!j.is_object()) throw InputError(std::string("config section ") + where + " must be an object");
  return j;
}

BatchSource parse_source(const std::string& s) {
  if (s == "monte-carlo") return BatchSource::monte_carlo;
  if (s == "randomized-sobol") return BatchSource::randomized_sobol;
  if (s == "quadrature") return BatchSource::quadrature;
  throw InputError("unknown batch source '" + s + "'");
}

const char* prior_name(PriorKind k) {
  switch (k) {
    case PriorKind::pod: return "pod";
    case PriorKind::exponential: return "exp";
    case PriorKind::fixed: return "fixed";
  }
  return "?";
}

PriorKind parse_prior(const std::string& s) {
  if (s == "pod") return PriorKind::pod;
  if (s == "exp") return PriorKind::exponential;
  throw InputError("unknown prior '" + s + "'");
}

const char* step_name(PspStep s) {
  return s == PspStep::guarded_gradient ? "guarded-gradient" : "closed-form-mm";
}

PspStep parse_step(const std::string& s) {
  if (s == "guarded-gradient") return PspStep::guarded_gradient;
  if (s == "closed-form-mm") return PspStep::closed_form_mm;
  throw InputError("unknown step policy '" + s + "'");
}

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Pools
// ---------------------------------------------------------------------------

PoolOptions bench_pool_options() {
  PoolOptions o;
  o.sp.max_sweeps = 200;
  o.sp.max_polish_sweeps = 600;
  o.psp.batch_size = 512;
  o.psp.prior_draws = 32;
  o.psp.max_sweeps = 40;
  return o;
}

std::vector<PoolMember> build_pool(Eigen::Index n, Eigen::Index p, const PoolOptions& opts, const RngConfig& rng) {
  std::vector<PoolMember> pool;
  const Design sobol = baseline_design(BaselineKind::sobol, n, p, rng.derive(1));
  const Design random = baseline_design(BaselineKind::random, n, p, rng.derive(2));
  const Design lhd = baseline_design(BaselineKind::maximin_lhd, n, p, rng.derive(3));

  SpConfig sp = opts.sp;
  sp.rng = rng.derive(4);
  pool.push_back({"sp", sp_optimize(sobol, sp).first});

  PspConfig psp = opts.psp;
  psp.rng = rng.derive(5);
  const Design psp_init = opts.psp_init == "maximin-lhd" ? lhd
                          : opts.psp_init == "sobol"     ? sobol
                                                         : init_design(opts.psp_init, n, p, rng.derive(6));
  pool.push_back({"psp", psp_optimize(psp_init, psp).first});

  pool.push_back({"random", random});
  pool.push_back({"sobol", sobol});
  pool.push_back({"maximin-lhd", lhd});
  for (std::size_t k = 0; k < opts.extra.size(); ++k) {
    const Design& d = opts.extra[k];
    if (d.n() != n || d.p() != p) throw InputError("extra pool design " + std::to_string(k + 1) + " has wrong shape");
    pool.push_back({"csv" + std::to_string(k + 1), d});
  }
  return pool;
}

// ---------------------------------------------------------------------------
// 1-d robustness
// ---------------------------------------------------------------------------

double Fig4Report::mspe(const std::string& design, const std::string& function) const {
  for (const auto& r : rows) {
    if (r.design == design && r.function == function) return r.mspe;
  }
  throw InputError("no row for " + design + "/" + function);
}

Fig4Report run_fig4_study(const Fig4Options& opts, const RngConfig& rng) {
  if (opts.grid < 2) throw InputError("grid needs at least 2 points");
  const Design init = baseline_design(BaselineKind::sobol, opts.n, 1, rng.derive(1));
  SpConfig sp = opts.sp;
  sp.rng = rng.derive(2);

  Fig4Report r{Vector::LinSpaced(opts.grid, 0.0, 1.0), {}, {}, sp_optimize(init, sp).first,
               chebyshev_nodes(opts.n), {}};
  r.truth_runge = evaluate_on(eval_runge, r.grid);
  r.truth_step = evaluate_on(eval_step, r.grid);
  const Matrix grid_pts = r.grid;

  const Vector theta = Vector::Constant(1, opts.theta);
  for (const auto& [dname, design] : {std::pair<std::string, const Design*>{"sp", &r.sp}, {"chebyshev", &r.chebyshev}}) {
    for (const auto& [fname, f, truth] :
         {std::tuple<std::string, double (*)(double), const Vector*>{"runge", eval_runge, &r.truth_runge},
          {"step", eval_step, &r.truth_step}}) {
      Vector y(design->n());
      for (Eigen::Index i = 0; i < design->n(); ++i) y[i] = f(design->points()(i, 0));
      const GpModel m = gp_fit(*design, y, theta);
      Vector pred = gp_predict(m, grid_pts).first;
      const double mspe = (pred - *truth).squaredNorm() / static_cast<double>(opts.grid);
      r.rows.push_back({dname, fname, mspe, std::move(pred)});
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// IRMSE efficiency
// ---------------------------------------------------------------------------

std::string EfficiencyTable::best() const { return argmax_name(names, eff); }

std::vector<Vector> sample_theta_grid(Eigen::Index p, const EfficiencyOptions& opts, const RngConfig& rng) {
  if (!(opts.theta_max > 0.0)) throw InputError("theta_max must be positive");
  if (!(opts.active_fraction > 0.0) || opts.active_fraction > 1.0) throw InputError("active fraction must be in (0, 1]");
  if (opts.draws < 1 || opts.isotropic_draws < 0 || opts.isotropic_draws > opts.draws) {
    throw InputError("need 0 <= isotropic draws <= draws, draws >= 1");
  }
  const auto k = std::clamp<Eigen::Index>(std::lround(opts.active_fraction * static_cast<double>(p)), 1, p);
  Rng gen(rng.derive(1));
  const int aniso = opts.draws - opts.isotropic_draws;
  const Matrix u = aniso > 0 ? sample_sobol(aniso, k, rng.derive(2)).points() : Matrix();

  std::vector<Eigen::Index> coords(static_cast<std::size_t>(p));
  std::vector<Vector> out;
  for (int d = 0; d < opts.draws; ++d) {
    std::iota(coords.begin(), coords.end(), Eigen::Index{0});
    std::shuffle(coords.begin(), coords.end(), gen);
    Vector theta = Vector::Zero(p);
    if (d < opts.isotropic_draws) {
      const double level = opts.theta_max * (d + 1.0 - gen.uniform()) / opts.isotropic_draws;
      for (Eigen::Index a = 0; a < k; ++a) theta[coords[static_cast<std::size_t>(a)]] = level;
    } else {
      const Eigen::Index row = d - opts.isotropic_draws;
      for (Eigen::Index a = 0; a < k; ++a) {
        theta[coords[static_cast<std::size_t>(a)]] = opts.theta_max * (1.0 - u(row, a));
      }
    }
    out.push_back(std::move(theta));
  }
  return out;
}

EfficiencyTable run_efficiency_table(const std::vector<PoolMember>& pool, const EfficiencyOptions& opts,
                                     const RngConfig& rng) {
  if (pool.empty()) throw InputError("empty design pool");
  const Eigen::Index p = pool.front().design.p();
  EfficiencyTable t;
  t.theta_max = opts.theta_max;
  t.active_fraction = opts.active_fraction;
  std::vector<Design> designs;
  for (const auto& m : pool) {
    t.names.push_back(m.name);
    designs.push_back(m.design);
  }
  t.thetas = sample_theta_grid(p, opts, rng.derive(2));
  const SampleBatch nodes = sample_sobol(opts.nodes, p, rng.derive(1));
  t.irmse = irmse_table(designs, t.thetas, nodes);
  t.eff = efficiency_from_irmse(t.irmse);
  return t;
}

// ---------------------------------------------------------------------------
// Emulation
// ---------------------------------------------------------------------------

std::string EmulationTable::best() const { return argmax_name(names, average); }

std::vector<Eigen::Index> default_sizes(const std::string& function) {
  if (function == "exponential") return {30, 50, 70, 90};
  if (function == "friedman" || function == "friedman10") return {50, 70, 90, 110};
  if (function == "eightdim") return {80, 100, 120, 140};
  if (function == "wingweight") return {100, 110, 120, 130};
  throw InputError("no default sizes for '" + function + "'");
}

EmulationTable run_emulation_table(const EmulationOptions& opts, const RngConfig& rng) {
  const TestFunction& fn = find_test_function(opts.function);
  if (opts.sizes.empty()) throw InputError("no design sizes");
  const Eigen::Index p = fn.p;
  const SampleBatch nodes = sample_sobol(opts.nodes, p, rng.derive(1));

  EmulationTable t;
  t.function = fn.name;
  t.sizes = opts.sizes;
  const auto S = static_cast<Eigen::Index>(opts.sizes.size());
  for (Eigen::Index s = 0; s < S; ++s) {
    const auto pool = build_pool(opts.sizes[static_cast<std::size_t>(s)], p, opts.pool,
                                 rng.derive(100 + static_cast<std::uint64_t>(s)));
    if (s == 0) {
      for (const auto& m : pool) t.names.push_back(m.name);
      t.error.resize(static_cast<Eigen::Index>(pool.size()), S);
      t.eff.resize(static_cast<Eigen::Index>(pool.size()), S);
    }
    MleOptions mle = opts.mle;
    mle.rng = rng.derive(200 + static_cast<std::uint64_t>(s));
    for (std::size_t k = 0; k < pool.size(); ++k) {
      t.error(static_cast<Eigen::Index>(k), s) = prediction_error(pool[k].design, fn.eval, nodes, true, {}, mle);
    }
    t.eff.col(s) = eff_tilde_from_errors(t.error.col(s));
  }
  t.average = t.eff.rowwise().mean();
  return t;
}

// ---------------------------------------------------------------------------
// Projected criterion curves
// ---------------------------------------------------------------------------

std::vector<CurveRow> run_projection_curves(const std::vector<PoolMember>& pool, const RngConfig& rng,
                                            Eigen::Index candidates) {
  std::vector<CurveRow> rows;
  ProjectionOptions po;
  po.candidates = candidates;
  for (const auto& m : pool) {
    for (int l = 1; l <= m.design.p(); ++l) {
      const RngConfig r = rng.derive(static_cast<std::uint64_t>(l));
      rows.push_back({m.name, l, projected_minimax_index(m.design, l, r, po).value,
                      projected_maximin_index(m.design, l, r, po.subset_cap).value});
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Identity checks
// ---------------------------------------------------------------------------

CheckResult check_projected_kernel(const TheoremOptions& opts, const RngConfig& rng) {
  const auto t0 = Clock::now();
  const Design d(sample_uniform(10, 2, rng.derive(1)).points(), "uniform n=10 p=2");
  const auto energy = energy_distance(d, sample_sobol(opts.kernel_batch, 2, rng.derive(2)));
  const double sum = projected_kernel_sum(d, sample_sobol(opts.kernel_batch, 2, rng.derive(3)));
  const double nn = static_cast<double>(d.n() * d.n());
  const double ratio = sum / (0.5 * nn * energy.value);

  CheckResult c{"projected_kernel_identity", ratio >= 0.98 && ratio <= 1.02, 0.98, 1.02,
                {{"ratio", ratio}, {"kernel_sum", sum}, {"energy", energy.value}, {"energy_se", energy.std_error}},
                "sum of projected distance kernel / (n^2/2 energy distance), independent batches", 0.0};
  c.seconds = seconds_since(t0);
  return c;
}

CheckResult check_fbm_integration(const TheoremOptions& opts, const RngConfig& rng) {
  const auto t0 = Clock::now();
  SpConfig sp;
  sp.rng = rng.derive(2);
  const Design d = sp_optimize(baseline_design(BaselineKind::sobol, 5, 1, rng.derive(1)), sp).first;
  FbmSpec spec;
  spec.grid.resize(opts.fbm_grid, 1);
  for (Eigen::Index k = 0; k < opts.fbm_grid; ++k) spec.grid(k, 0) = (static_cast<double>(k) + 0.5) / opts.fbm_grid;

  CheckResult c{"fbm_integration_error", true, 0.9, 1.1, {}, "E[I^2] / ((sigma^2/2) q-energy), 5 support points in 1-d", 0.0};
  const double qs[] = {0.5, 1.0, 1.5};
  for (int k = 0; k < 3; ++k) {
    spec.q = qs[k];
    const auto m = fbm_integration_error_moment(d, spec, opts.fbm_paths, rng.derive(10 + static_cast<std::uint64_t>(k)));
    const double ratio = m.ratio();
    std::ostringstream key;
    key << "ratio_q" << qs[k];
    c.values.emplace_back(key.str(), ratio);
    c.passed = c.passed && ratio >= c.lower && ratio <= c.upper;
  }
  c.seconds = seconds_since(t0);
  return c;
}

CheckResult check_maxpro_closed_form(const TheoremOptions& opts, const RngConfig& rng) {
  const auto t0 = Clock::now();
  const double lambda = 1.0;
  const Design d(sample_uniform(5, 2, rng.derive(1)).points(), "uniform n=5 p=2");
  const auto priors = sample_exp_prior(lambda, 2, opts.exp_draws, rng.derive(2));
  const double mc = psp_objective(d, sample_sobol(opts.exp_batch, 2, rng.derive(3)), priors);
  const double nn = static_cast<double>(d.n() * d.n());
  const double closed = psp_closed_form(d, lambda);
  const double scaled = 2.0 * std::pow(lambda, 2.0) / nn * closed;
  const double rel = std::abs(mc - scaled) / std::abs(scaled);

  CheckResult c{"maxpro_closed_form", rel < 0.02, 0.0, 0.02,
                {{"relative_error", rel}, {"monte_carlo", mc}, {"closed_form", closed}, {"scaled_closed_form", scaled}},
                "Exp(1)-prior kernel criterion vs 2 lambda^p / n^2 times the closed form", 0.0};
  c.seconds = seconds_since(t0);
  return c;
}

CheckResult check_minimax_maximin_tradeoff(const TheoremOptions& opts, const RngConfig& rng) {
  const auto t0 = Clock::now();
  const double q = opts.small_q;
  const SampleBatch batch = sample_sobol(opts.tradeoff_batch, 2, rng.derive(1));
  const SampleBatch cand = sample_sobol(opts.tradeoff_candidates, 2, rng.derive(2));
  const auto powq = [q](double v) { return std::pow(v, q); };

  struct Base {
    Design d;
    double energy, fill, sep;
  };
  const auto make_base = [&](std::uint64_t k) {
    Design d(sample_uniform(10, 2, rng.derive(3).derive(k)).points());
    const double e = q_energy_distance(d, batch, q).value;
    const double f = powq(minimax_fill(d, cand, true));
    const double s = powq(maximin(d));
    return Base{std::move(d), e, f, s};
  };

  // A few base designs, each perturbed repeatedly; the base terms are reused.
  constexpr int kPerBase = 10;
  int decisive = 0, agree = 0, attempts = 0, undecided = 0;
  std::uint64_t base_id = 0;
  Base base = make_base(base_id);
  Rng gen(rng.derive(4));
  const int max_attempts = 20 * opts.perturbations;
  while (decisive < opts.perturbations && attempts < max_attempts) {
    if (attempts > 0 && attempts % kPerBase == 0) base = make_base(++base_id);
    ++attempts;
    Matrix x = base.d.points();
    const auto i = static_cast<Eigen::Index>(gen() % 10);
    for (Eigen::Index l = 0; l < 2; ++l) {
      x(i, l) = std::clamp(x(i, l) + opts.perturb_scale * (2.0 * gen.uniform() - 1.0), 0.0, 1.0);
    }
    Design e(std::move(x));
    const double surrogate = 2.0 * (powq(minimax_fill(e, cand, true)) - base.fill) - (powq(maximin(e)) - base.sep);
    if (surrogate == 0.0) {
      ++undecided;
      continue;
    }
    const double delta = q_energy_distance(e, batch, q).value - base.energy;
    ++decisive;
    if ((surrogate > 0.0) == (delta > 0.0)) ++agree;
  }
  const double rate = decisive > 0 ? static_cast<double>(agree) / decisive : 0.0;
  CheckResult c{"minimax_maximin_tradeoff", decisive == opts.perturbations && rate >= 0.8, 0.8, 1.0,
                {{"agreement", rate},
                 {"decisive", decisive},
                 {"agree", agree},
                 {"undecided", undecided},
                 {"q", q}},
                "sign of q-energy change vs sign of 2 d[mM^q] - d[Mm^q], single-point perturbations", 0.0};
  c.seconds = seconds_since(t0);
  return c;
}

std::vector<CheckResult> run_theorem_suite(const TheoremOptions& opts, const RngConfig& rng) {
  std::vector<CheckResult> out;
  const auto guarded = [&](const char* name, auto&& fn, std::uint64_t tag) {
    try {
      out.push_back(fn(opts, rng.derive(tag)));
    } catch (const std::exception& e) {
      CheckResult c;
      c.name = name;
      c.detail = std::string("error: ") + e.what();
      out.push_back(std::move(c));
    }
  };
  guarded("projected_kernel_identity", check_projected_kernel, 1);
  guarded("fbm_integration_error", check_fbm_integration, 2);
  guarded("maxpro_closed_form", check_maxpro_closed_form, 3);
  guarded("minimax_maximin_tradeoff", check_minimax_maximin_tradeoff, 4);
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

Json to_json(const Fig4Report& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) rows.push_back({{"design", row.design}, {"function", row.function}, {"mspe", row.mspe}});
  return {{"mspe", std::move(rows)}, {"sp", design_json(r.sp)}, {"chebyshev", design_json(r.chebyshev)},
          {"grid_points", r.grid.size()}};
}

Json to_json(const EfficiencyTable& t) {
  Json thetas = Json::array();
  for (const auto& th : t.thetas) thetas.push_back(to_std(th));
  Json irmse = Json::object();
  Json eff = Json::object();
  for (std::size_t k = 0; k < t.names.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    irmse[t.names[k]] = to_std(t.irmse.row(r).transpose());
    eff[t.names[k]] = t.eff[r];
  }
  return {{"theta_max", t.theta_max}, {"active_fraction", t.active_fraction}, {"eff", std::move(eff)},
          {"best", t.best()},         {"thetas", std::move(thetas)},          {"irmse", std::move(irmse)}};
}

Json to_json(const EmulationTable& t) {
  Json eff = Json::object();
  Json err = Json::object();
  Json avg = Json::object();
  for (std::size_t k = 0; k < t.names.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    eff[t.names[k]] = to_std(t.eff.row(r).transpose());
    err[t.names[k]] = to_std(t.error.row(r).transpose());
    avg[t.names[k]] = t.average[r];
  }
  return {{"function", t.function}, {"sizes", t.sizes}, {"eff", std::move(eff)},
          {"error", std::move(err)}, {"average", std::move(avg)}, {"best", t.best()}};
}

Json to_json(const CheckResult& c) {
  Json values = Json::object();
  for (const auto& [k, v] : c.values) values[k] = finite_or_null(v);
  return {{"name", c.name},   {"passed", c.passed}, {"lower", c.lower},   {"upper", c.upper},
          {"values", values}, {"detail", c.detail}, {"seconds", c.seconds}};
}

Json to_json(const SpConfig& c) {
  return {{"batch_size", c.batch_size}, {"source", to_string(c.source)}, {"max_sweeps", c.max_sweeps},
          {"max_polish_sweeps", c.max_polish_sweeps}, {"tol", c.tol}, {"eps", c.eps}};
}

Json to_json(const PspConfig& c) {
  return {{"batch_size", c.batch_size}, {"prior_draws", c.prior_draws},  {"prior", prior_name(c.prior)},
          {"lambda", c.lambda},         {"max_order", c.max_order},      {"source", to_string(c.source)},
          {"max_sweeps", c.max_sweeps}, {"tol", c.tol},                  {"eps", c.eps},
          {"step", step_name(c.step)},  {"eval_batch_size", c.eval_batch_size}, {"eval_prior_draws", c.eval_prior_draws}};
}

Json to_json(const PoolOptions& o) {
  return {{"sp", to_json(o.sp)}, {"psp", to_json(o.psp)}, {"psp_init", o.psp_init}, {"extra", o.extra.size()}};
}

Json to_json(const Fig4Options& o) {
  return {{"n", o.n}, {"theta", o.theta}, {"grid", o.grid}, {"sp", to_json(o.sp)}};
}

Json to_json(const EfficiencyOptions& o) {
  return {{"theta_max", o.theta_max}, {"active_fraction", o.active_fraction}, {"draws", o.draws},
          {"isotropic_draws", o.isotropic_draws}, {"nodes", o.nodes}};
}

Json to_json(const EmulationOptions& o) {
  return {{"function", o.function},
          {"sizes", o.sizes},
          {"nodes", o.nodes},
          {"mle", {{"theta_min", o.mle.theta_min}, {"theta_max", o.mle.theta_max}, {"starts", o.mle.starts},
                   {"max_iterations", o.mle.max_iterations}, {"nugget", o.mle.nugget}}},
          {"pool", to_json(o.pool)}};
}

Json to_json(const TheoremOptions& o) {
  return {{"kernel_batch", o.kernel_batch},   {"fbm_paths", o.fbm_paths},
          {"fbm_grid", o.fbm_grid},           {"exp_draws", o.exp_draws},
          {"exp_batch", o.exp_batch},         {"perturbations", o.perturbations},
          {"perturb_scale", o.perturb_scale}, {"small_q", o.small_q},
          {"tradeoff_batch", o.tradeoff_batch}, {"tradeoff_candidates", o.tradeoff_candidates}};
}

void apply_config(SpConfig& c, const Json& j) {
  for (const auto& [k, v] : require_object(j, "sp").items()) {
    if (k == "batch_size") c.batch_size = v.get<Eigen::Index>();
    else if (k == "source") c.source = parse_source(v.get<std::string>());
    else if (k == "max_sweeps") c.max_sweeps = v.get<int>();
    else if (k == "max_polish_sweeps") c.max_polish_sweeps = v.get<int>();
    else if (k == "tol") c.tol = v.get<double>();
    else if (k == "eps") c.eps = v.get<double>();
    else unknown_key(k, "sp");
  }
}

void apply_config(PspConfig& c, const Json& j) {
  for (const auto& [k, v] : require_object(j, "psp").items()) {
    if (k == "batch_size") c.batch_size = v.get<Eigen::Index>();
    else if (k == "prior_draws") c.prior_draws = v.get<Eigen::Index>();
    else if (k == "prior") c.prior = parse_prior(v.get<std::string>());
    else if (k == "lambda") c.lambda = v.get<double>();
    else if (k == "max_order") c.max_order = v.get<int>();
    else if (k == "source") c.source = parse_source(v.get<std::string>());
    else if (k == "max_sweeps") c.max_sweeps = v.get<int>();
    else if (k == "tol") c.tol = v.get<double>();
    else if (k == "eps") c.eps = v.get<double>();
    else if (k == "step") c.step = parse_step(v.get<std::string>());
    else if (k == "eval_batch_size") c.eval_batch_size = v.get<Eigen::Index>();
    else if (k == "eval_prior_draws") c.eval_prior_draws = v.get<Eigen::Index>();
    else unknown_key(k, "psp");
  }
}

void apply_config(PoolOptions& o, const Json& j) {
  for (const auto& [k, v] : require_object(j, "pool").items()) {
    if (k == "sp") apply_config(o.sp, v);
    else if (k == "psp") apply_config(o.psp, v);
    else if (k == "psp_init") o.psp_init = v.get<std::string>();
    else if (k == "extra") {
      for (const auto& f : v) o.extra.push_back(load_design(f.get<std::string>()));
    } else unknown_key(k, "pool");
  }
  if (o.psp_init != "maximin-lhd" && o.psp_init != "sobol" && o.psp_init != "random") {
    throw InputError("psp_init must be maximin-lhd, sobol or random");
  }
}

void apply_config(Fig4Options& o, const Json& j) {
  for (const auto& [k, v] : require_object(j, "fig4").items()) {
    if (k == "n") o.n = v.get<Eigen::Index>();
    else if (k == "theta") o.theta = v.get<double>();
    else if (k == "grid") o.grid = v.get<Eigen::Index>();
    else if (k == "sp") apply_config(o.sp, v);
    else unknown_key(k, "fig4");
  }
}

void apply_config(EfficiencyOptions& o, const Json& j) {
  for (const auto& [k, v] : require_object(j, "table2").items()) {
    if (k == "theta_max") o.theta_max = v.get<double>();
    else if (k == "active_fraction") o.active_fraction = v.get<double>();
    else if (k == "draws") o.draws = v.get<int>();
    else if (k == "isotropic_draws") o.isotropic_draws = v.get<int>();
    else if (k == "nodes") o.nodes = v.get<Eigen::Index>();
    else unknown_key(k, "table2");
  }
}

void apply_config(EmulationOptions& o, const Json& j) {
  for (const auto& [k, v] : require_object(j, "table3").items()) {
    if (k == "function") o.function = v.get<std::string>();
    else if (k == "sizes") o.sizes = v.get<std::vector<Eigen::Index>>();
    else if (k == "nodes") o.nodes = v.get<Eigen::Index>();
    else if (k == "pool") apply_config(o.pool, v);
    else if (k == "mle") {
      for (const auto& [mk, mv] : require_object(v, "mle").items()) {
        if (mk == "theta_min") o.mle.theta_min = mv.get<double>();
        else if (mk == "theta_max") o.mle.theta_max = mv.get<double>();
        else if (mk == "starts") o.mle.starts = mv.get<int>();
        else if (mk == "max_iterations") o.mle.max_iterations = mv.get<int>();
        else if (mk == "nugget") o.mle.nugget = mv.get<double>();
        else unknown_key(mk, "mle");
      }
    } else unknown_key(k, "table3");
  }
}

void apply_config(TheoremOptions& o, const Json& j) {
  for (const auto& [k, v] : require_object(j, "theorems").items()) {
    if (k == "kernel_batch") o.kernel_batch = v.get<Eigen::Index>();
    else if (k == "fbm_paths") o.fbm_paths = v.get<Eigen::Index>();
    else if (k == "fbm_grid") o.fbm_grid = v.get<Eigen::Index>();
    else if (k == "exp_draws") o.exp_draws = v.get<Eigen::Index>();
    else if (k == "exp_batch") o.exp_batch = v.get<Eigen::Index>();
    else if (k == "perturbations") o.perturbations = v.get<int>();
    else if (k == "perturb_scale") o.perturb_scale = v.get<double>();
    else if (k == "small_q") o.small_q = v.get<double>();
    else if (k == "tradeoff_batch") o.tradeoff_batch = v.get<Eigen::Index>();
    else if (k == "tradeoff_candidates") o.tradeoff_candidates = v.get<Eigen::Index>();
    else unknown_key(k, "theorems");
  }
}

void write_fig4(const Fig4Report& r, const std::filesystem::path& dir) {
  {
    auto out = open_out(dir / "fig4.csv");
    out << "design,function,mspe\n";
    for (const auto& row : r.rows) out << row.design << ',' << row.function << ',' << format_double(row.mspe) << '\n';
  }
  auto out = open_out(dir / "fig4_curves.csv");
  out << "x,runge,step";
  for (const auto& row : r.rows) out << ',' << row.design << '_' << row.function;
  out << '\n';
  for (Eigen::Index k = 0; k < r.grid.size(); ++k) {
    out << format_double(r.grid[k]) << ',' << format_double(r.truth_runge[k]) << ',' << format_double(r.truth_step[k]);
    for (const auto& row : r.rows) out << ',' << format_double(row.prediction[k]);
    out << '\n';
  }
}

void write_efficiency_csv(const std::vector<EfficiencyTable>& tables, const std::filesystem::path& file) {
  auto out = open_out(file);
  out << "design";
  for (const auto& t : tables) out << ",theta_max=" << format_double(t.theta_max) << " active=" << format_double(t.active_fraction);
  out << '\n';
  if (tables.empty()) return;
  for (std::size_t k = 0; k < tables.front().names.size(); ++k) {
    out << tables.front().names[k];
    for (const auto& t : tables) out << ',' << format_double(t.eff[static_cast<Eigen::Index>(k)]);
    out << '\n';
  }
}

void write_emulation_csv(const EmulationTable& t, const std::filesystem::path& file) {
  auto out = open_out(file);
  out << "design";
  for (auto n : t.sizes) out << ",n=" << n;
  out << ",average\n";
  for (std::size_t k = 0; k < t.names.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    out << t.names[k];
    for (Eigen::Index s = 0; s < t.eff.cols(); ++s) out << ',' << format_double(t.eff(r, s));
    out << ',' << format_double(t.average[r]) << '\n';
  }
}

void write_curves_csv(const std::vector<CurveRow>& rows, const std::filesystem::path& file) {
  auto out = open_out(file);
  out << "design,l,minimax_index,maximin_index\n";
  for (const auto& r : rows) {
    out << r.design << ',' << r.l << ',' << format_double(r.minimax_index) << ',' << format_double(r.maximin_index) << '\n';
  }
}

void write_json(const Json& j, const std::filesystem::path& file) {
  auto out = open_out(file);
  out << j.dump(2) << '\n';
}

Json to_json(const Manifest& m) {
  return {{"study", m.study},   {"seed", m.seed},       {"seed_source", m.seed_source}, {"config", m.config},
          {"files", m.files},   {"threads", m.threads}, {"seconds", m.seconds}};
}

}  // namespace spd
