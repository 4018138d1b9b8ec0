#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spdesign/core.hpp"
#include "spdesign/gp.hpp"
#include "spdesign/psp_opt.hpp"
#include "spdesign/sp_opt.hpp"

namespace spd {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Design pools
// ---------------------------------------------------------------------------

struct PoolMember {
  std::string name;
  Design design;
};

struct PoolOptions {
  SpConfig sp{};
  PspConfig psp{};
  /// Warm start of the projected points: "maximin-lhd", "sobol" or "random".
  std::string psp_init = "maximin-lhd";
  /// Appended verbatim (names "csv1", "csv2", ...); must match (n, p).
  std::vector<Design> extra;
};

/// Reduced optimizer budgets used by the benchmark studies.
PoolOptions bench_pool_options();

/// {sp, psp, random, sobol, maximin-lhd} plus extras. The SP points start
/// from the Sobol member. Seeds of the optimizers are taken from rng.
std::vector<PoolMember> build_pool(Eigen::Index n, Eigen::Index p, const PoolOptions& opts, const RngConfig& rng);

// ---------------------------------------------------------------------------
// 1-d robustness study: SP vs Chebyshev nodes on Runge and step
// ---------------------------------------------------------------------------

struct Fig4Options {
  Eigen::Index n = 7;
  double theta = 10.0;
  Eigen::Index grid = 1001;
  SpConfig sp{};
};

struct Fig4Row {
  std::string design;
  std::string function;
  double mspe = 0.0;
  Vector prediction;  // on the grid
};

struct Fig4Report {
  Vector grid;
  Vector truth_runge;
  Vector truth_step;
  Design sp;
  Design chebyshev;
  std::vector<Fig4Row> rows;  // (sp, chebyshev) x (runge, step)
  [[nodiscard]] double mspe(const std::string& design, const std::string& function) const;
};

Fig4Report run_fig4_study(const Fig4Options& opts, const RngConfig& rng);

// ---------------------------------------------------------------------------
// IRMSE efficiency over a sampled scale grid
// ---------------------------------------------------------------------------

struct EfficiencyOptions {
  double theta_max = 5.0;
  /// Share of active inputs; inactive inputs get scale 0 in every draw.
  double active_fraction = 1.0;
  int draws = 20;
  /// Leading draws that are isotropic on the active inputs.
  int isotropic_draws = 5;
  Eigen::Index nodes = 1 << 12;
};

struct EfficiencyTable {
  double theta_max = 0.0;
  double active_fraction = 1.0;
  std::vector<std::string> names;
  std::vector<Vector> thetas;
  Matrix irmse;  // design x draw
  Vector eff;
  [[nodiscard]] std::string best() const;
};

/// Scale draws: isotropic ones at stratified levels in (0, theta_max], the
/// rest from a randomized Sobol set in (0, theta_max]^k on a random subset of
/// k = round(active_fraction p) active inputs (redrawn per draw).
std::vector<Vector> sample_theta_grid(Eigen::Index p, const EfficiencyOptions& opts, const RngConfig& rng);

EfficiencyTable run_efficiency_table(const std::vector<PoolMember>& pool, const EfficiencyOptions& opts,
                                     const RngConfig& rng);

// ---------------------------------------------------------------------------
// Emulation of benchmark functions
// ---------------------------------------------------------------------------

struct EmulationOptions {
  std::string function = "exponential";
  std::vector<Eigen::Index> sizes{30, 50, 70, 90};
  Eigen::Index nodes = 1 << 12;
  MleOptions mle{};
  PoolOptions pool = bench_pool_options();
};

/// Design sizes used for each benchmark function.
std::vector<Eigen::Index> default_sizes(const std::string& function);

struct EmulationTable {
  std::string function;
  std::vector<Eigen::Index> sizes;
  std::vector<std::string> names;
  Matrix error;  // mean absolute prediction error, design x size
  Matrix eff;    // design x size
  Vector average;
  [[nodiscard]] std::string best() const;
};

EmulationTable run_emulation_table(const EmulationOptions& opts, const RngConfig& rng);

// ---------------------------------------------------------------------------
// Projected criterion curves
// ---------------------------------------------------------------------------

struct CurveRow {
  std::string design;
  int l = 0;
  double minimax_index = 0.0;
  double maximin_index = 0.0;
};

/// mM_l and Mm_l for l = 1..p for every pool member.
std::vector<CurveRow> run_projection_curves(const std::vector<PoolMember>& pool, const RngConfig& rng,
                                            Eigen::Index candidates = 1 << 12);

// ---------------------------------------------------------------------------
// Identity checks
// ---------------------------------------------------------------------------

struct CheckResult {
  std::string name;
  bool passed = false;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<std::pair<std::string, double>> values;
  std::string detail;
  double seconds = 0.0;
};

struct TheoremOptions {
  Eigen::Index kernel_batch = 1000000;
  Eigen::Index fbm_paths = 2000;
  Eigen::Index fbm_grid = 512;
  Eigen::Index exp_draws = 100000;
  Eigen::Index exp_batch = 1024;
  int perturbations = 200;
  double perturb_scale = 0.1;
  double small_q = 0.1;
  Eigen::Index tradeoff_batch = 1 << 14;
  Eigen::Index tradeoff_candidates = 1 << 14;
};

/// Projected-kernel sum vs (n^2/2) energy distance on independent batches
/// (n=10, p=2); accepted ratio range [0.98, 1.02].
CheckResult check_projected_kernel(const TheoremOptions& opts, const RngConfig& rng);
/// fBm integration error of 5 support points in 1-d vs (1/2) q-energy for
/// q in {0.5, 1, 1.5}; each ratio in [0.9, 1.1].
CheckResult check_fbm_integration(const TheoremOptions& opts, const RngConfig& rng);
/// Exp(1)-prior kernel criterion by Monte Carlo vs the MaxPro closed form;
/// relative error below 2%.
CheckResult check_maxpro_closed_form(const TheoremOptions& opts, const RngConfig& rng);
/// Sign of the q-energy change vs sign of 2 d[mM^q] - d[Mm^q] under single
/// point perturbations (n=10, p=2); agreement at least 80%. Perturbations that
/// leave both mM and Mm unchanged have no sign and are redrawn.
CheckResult check_minimax_maximin_tradeoff(const TheoremOptions& opts, const RngConfig& rng);

std::vector<CheckResult> run_theorem_suite(const TheoremOptions& opts, const RngConfig& rng);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

Json to_json(const Fig4Report& r);
Json to_json(const EfficiencyTable& t);
Json to_json(const EmulationTable& t);
Json to_json(const CheckResult& c);
Json to_json(const SpConfig& c);
Json to_json(const PspConfig& c);
Json to_json(const PoolOptions& o);
Json to_json(const Fig4Options& o);
Json to_json(const EfficiencyOptions& o);
Json to_json(const EmulationOptions& o);
Json to_json(const TheoremOptions& o);

/// Overrides the fields named in j; unknown keys throw InputError.
void apply_config(SpConfig& c, const Json& j);
void apply_config(PspConfig& c, const Json& j);
void apply_config(PoolOptions& o, const Json& j);
void apply_config(Fig4Options& o, const Json& j);
void apply_config(EfficiencyOptions& o, const Json& j);
void apply_config(EmulationOptions& o, const Json& j);
void apply_config(TheoremOptions& o, const Json& j);

/// fig4.csv (one MSPE row per design and function) and fig4_curves.csv.
void write_fig4(const Fig4Report& r, const std::filesystem::path& dir);
/// CSV with one row per design and one Eff column per table.
void write_efficiency_csv(const std::vector<EfficiencyTable>& tables, const std::filesystem::path& file);
/// CSV with one row per design, one Eff~ column per size and the average.
void write_emulation_csv(const EmulationTable& t, const std::filesystem::path& file);
void write_curves_csv(const std::vector<CurveRow>& rows, const std::filesystem::path& file);
void write_json(const Json& j, const std::filesystem::path& file);

struct Manifest {
  std::string study;
  std::uint64_t seed = 0;
  std::string seed_source;  // "flag" or "entropy"
  Json config;
  std::vector<std::string> files;
  unsigned threads = 0;
  double seconds = 0.0;
};

Json to_json(const Manifest& m);

}  // namespace spd
