#include <cmath>
#include <set>

#include <doctest.h>

#include "spdesign/harness.hpp"
#include "spdesign/sampling.hpp"

using namespace spd;

namespace {

PoolOptions quick_pool() {
  PoolOptions o = bench_pool_options();
  o.sp.max_sweeps = 20;
  o.sp.max_polish_sweeps = 40;
  o.psp.max_sweeps = 5;
  o.psp.batch_size = 128;
  o.psp.prior_draws = 8;
  return o;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("fig4 report shape") {
  Fig4Options o;
  o.sp.max_sweeps = 30;
  o.sp.max_polish_sweeps = 60;
  const Fig4Report r = run_fig4_study(o, RngConfig{1});
  CHECK(r.rows.size() == 4);
  CHECK(r.grid.size() == 1001);
  CHECK(r.truth_runge.size() == 1001);
  CHECK(r.sp.n() == 7);
  CHECK(r.chebyshev.n() == 7);
  for (const auto& row : r.rows) {
    CHECK(row.prediction.size() == 1001);
    CHECK(row.mspe >= 0.0);
    CHECK(std::isfinite(row.mspe));
  }
  CHECK(r.mspe("sp", "runge") == r.rows[0].mspe);
  CHECK_THROWS_AS(static_cast<void>(r.mspe("sp", "nope")), InputError);
  CHECK(to_json(r)["mspe"].size() == 4);
}

TEST_CASE("scale grid") {
  EfficiencyOptions o;
  o.theta_max = 5.0;
  o.active_fraction = 0.4;
  const auto grid = sample_theta_grid(5, o, RngConfig{3});
  REQUIRE(grid.size() == 20);
  std::set<double> levels;
  for (std::size_t d = 0; d < grid.size(); ++d) {
    const auto& t = grid[d];
    CHECK(t.size() == 5);
    CHECK((t.array() >= 0.0).all());
    CHECK((t.array() <= 5.0).all());
    CHECK((t.array() > 0.0).count() == 2);
    if (d < 5) {
      // Isotropic draws: equal scales on the active inputs, one per stratum.
      const double level = t.maxCoeff();
      CHECK(level > 5.0 * static_cast<double>(d) / 5.0);
      CHECK(level <= 5.0 * static_cast<double>(d + 1) / 5.0);
      for (Eigen::Index l = 0; l < 5; ++l) CHECK((t[l] == 0.0 || t[l] == level));
    }
  }
  o.active_fraction = 1.0;
  for (const auto& t : sample_theta_grid(5, o, RngConfig{3})) CHECK((t.array() > 0.0).all());
  o.active_fraction = 0.0;
  CHECK_THROWS_AS(sample_theta_grid(5, o, RngConfig{3}), InputError);
}

TEST_CASE("efficiency table") {
  const auto pool = build_pool(8, 2, quick_pool(), RngConfig{5});
  REQUIRE(pool.size() == 5);
  CHECK(pool[0].name == "sp");
  CHECK(pool[1].name == "psp");
  EfficiencyOptions o;
  o.nodes = 1024;
  o.draws = 6;
  o.isotropic_draws = 2;
  const EfficiencyTable t = run_efficiency_table(pool, o, RngConfig{6});
  CHECK(t.irmse.rows() == 5);
  CHECK(t.irmse.cols() == 6);
  CHECK((t.eff.array() > 0.0).all());
  CHECK((t.eff.array() <= 1.0).all());
  // Every draw has a design attaining the minimum.
  for (Eigen::Index c = 0; c < t.irmse.cols(); ++c) {
    const double best = t.irmse.col(c).minCoeff();
    int ones = 0;
    for (Eigen::Index k = 0; k < t.irmse.rows(); ++k) ones += best / t.irmse(k, c) == 1.0 ? 1 : 0;
    CHECK(ones >= 1);
  }
  CHECK(t.eff.maxCoeff() <= 1.0);
  CHECK(!t.best().empty());
}

TEST_CASE("emulation table") {
  EmulationOptions o;
  o.function = "exponential";
  o.sizes = {10, 14};
  o.nodes = 512;
  o.mle.starts = 2;
  o.pool = quick_pool();
  const EmulationTable t = run_emulation_table(o, RngConfig{7});
  CHECK(t.names.size() == 5);
  CHECK(t.error.rows() == 5);
  CHECK(t.error.cols() == 2);
  CHECK((t.error.array() >= 0.0).all());
  for (Eigen::Index s = 0; s < 2; ++s) CHECK(t.eff.col(s).maxCoeff() == 1.0);
  CHECK(t.average.size() == 5);
  CHECK(default_sizes("wingweight") == std::vector<Eigen::Index>{100, 110, 120, 130});
  CHECK_THROWS_AS(default_sizes("runge"), InputError);
}

TEST_CASE("configuration overrides") {
  SpConfig sp;
  apply_config(sp, Json{{"max_sweeps", 7}, {"tol", 1e-3}});
  CHECK(sp.max_sweeps == 7);
  CHECK(sp.tol == 1e-3);
  CHECK_THROWS_AS(apply_config(sp, Json{{"max_sweep", 7}}), InputError);
  Fig4Options f;
  apply_config(f, Json{{"n", 9}, {"sp", {{"max_sweeps", 3}}}});
  CHECK(f.n == 9);
  CHECK(f.sp.max_sweeps == 3);
  TheoremOptions th;
  CHECK_THROWS_AS(apply_config(th, Json{{"bogus", 1}}), InputError);
  CHECK(to_json(th).contains("kernel_batch"));
}

}  // TEST_SUITE
