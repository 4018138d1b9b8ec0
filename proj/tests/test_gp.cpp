#include <cmath>
#include <vector>

#include <doctest.h>

#include "spdesign/energy.hpp"
#include "spdesign/gp.hpp"
#include "spdesign/sampling.hpp"

using namespace spd;

namespace {

Design random_design(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  return Design(sample_uniform(n, p, RngConfig{seed}).points());
}

Vector responses_of(const Design& d, double (*f)(const double*, Eigen::Index)) {
  Vector y(d.n());
  for (Eigen::Index i = 0; i < d.n(); ++i) y[i] = f(d.points().row(i).data(), d.p());
  return y;
}

double smooth(const double* x, Eigen::Index p) {
  double s = 0.0;
  for (Eigen::Index l = 0; l < p; ++l) s += std::sin(3.0 * x[l] + static_cast<double>(l));
  return s;
}

}  // namespace

TEST_SUITE("gp") {

TEST_CASE("two-point model matches hand algebra") {
  Matrix x(2, 1);
  x << 0.3, 0.7;
  Vector y(2);
  y << 1.0, 3.0;
  const GpModel m = gp_fit(Design(x), y, Vector::Constant(1, 10.0));
  const double rho = std::exp(-1.6);
  CHECK(m.mu() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(m.sigma2() == doctest::Approx(1.0 / (1.0 - rho)).epsilon(1e-12));
  CHECK(m.log_likelihood() ==
        doctest::Approx(-std::log(1.0 / (1.0 - rho)) - 0.5 * std::log(1.0 - rho * rho)).epsilon(1e-12));

  const std::vector<double> mid{0.5};
  const auto pm = gp_predict(m, mid);
  CHECK(pm.mean == doctest::Approx(2.0).epsilon(1e-12));
  const double rad = 1.0 - 2.0 * std::exp(-0.8) / (1.0 + rho);
  CHECK(pm.rmse == doctest::Approx(std::sqrt(rad / (1.0 - rho))).epsilon(1e-10));

  const std::vector<double> far{0.9};
  CHECK(gp_predict(m, far).mean ==
        doctest::Approx(2.0 + (std::exp(-0.4) - std::exp(-3.6)) / (1.0 - rho)).epsilon(1e-12));
}

TEST_CASE("single point: constant predictor with zero variance") {
  const Design d(Matrix::Constant(1, 1, 0.3));
  const GpModel m = gp_fit(d, Vector::Constant(1, 4.0), Vector::Constant(1, 10.0));
  const std::vector<double> x{0.7};
  CHECK(m.mu() == 4.0);
  CHECK(gp_predict(m, x).mean == 4.0);
  CHECK(gp_predict(m, x).rmse == 0.0);
}

TEST_CASE("interpolation and rmse range") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Design d = random_design(12, 2, 100 + s);
    const Vector y = responses_of(d, smooth);
    const GpModel m = gp_fit(d, y, Vector::Constant(2, 5.0));
    const auto [mean, rmse] = gp_predict(m, d.points());
    for (Eigen::Index i = 0; i < d.n(); ++i) {
      CHECK(mean[i] == doctest::Approx(y[i]).epsilon(1e-8));
      CHECK(rmse[i] < 1e-4 * std::sqrt(m.sigma2()));
    }
    const auto probe = sample_uniform(500, 2, RngConfig{200 + s});
    const auto [pm, pr] = gp_predict(m, probe.points());
    CHECK((pr.array() >= 0.0).all());
    CHECK((pr.array() <= std::sqrt(m.sigma2()) * (1.0 + 1e-12)).all());
  }
}

TEST_CASE("constant responses") {
  const Design d = random_design(8, 3, 7);
  const GpModel m = gp_fit(d, Vector::Constant(8, 2.5), Vector::Constant(3, 4.0));
  CHECK(m.mu() == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(m.sigma2() == doctest::Approx(0.0).epsilon(1e-20));
}

TEST_CASE("input validation") {
  const Design d = random_design(4, 2, 1);
  CHECK_THROWS_AS(gp_fit(d, Vector::Zero(3), Vector::Ones(2)), InputError);
  CHECK_THROWS_AS(gp_fit(d, Vector::Zero(4), Vector::Ones(3)), InputError);
  CHECK_THROWS_AS(gp_fit(d, Vector::Zero(4), Vector::Zero(2)), InputError);
  const GpModel m = gp_fit(d, Vector::Zero(4), Vector::Ones(2));
  const std::vector<double> bad{0.5};
  CHECK_THROWS_AS(gp_predict(m, bad), InputError);
}

TEST_CASE("irmse") {
  // Adding a point never increases the predictive variance.
  int checked = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng gen(RngConfig{300 + s});
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(gen.uniform() * 6);
    const Design small = random_design(n, 2, 400 + s);
    Matrix grown(n + 1, 2);
    grown.topRows(n) = small.points();
    grown.row(n) = sample_uniform(1, 2, RngConfig{500 + s}).points();
    const Vector theta = Vector::Constant(2, 1.0 + 19.0 * gen.uniform());
    const auto nodes = sample_sobol(1024, 2, RngConfig{600 + s});
    double u1 = 0.0, u2 = 0.0;
    const double a = irmse(small, theta, nodes, 0.0, &u1);
    const double b = irmse(Design(grown), theta, nodes, 0.0, &u2);
    if (u1 != 0.0 || u2 != 0.0) continue;
    ++checked;
    CHECK(b <= a + 1e-9);
  }
  CHECK(checked >= 90);

  const Design centre(Matrix::Constant(1, 2, 0.5));
  const auto nodes = sample_sobol(1 << 12, 2, RngConfig{1});
  CHECK(irmse(centre, Vector::Constant(2, 1e4), nodes) > 0.99);
  CHECK(irmse(centre, Vector::Constant(2, 1e4), nodes) <= 1.0);

  const Design d = random_design(10, 2, 3);
  const Vector theta = Vector::Constant(2, 8.0);
  const double coarse = irmse(d, theta, sample_sobol(1 << 12, 2, RngConfig{5}));
  const double fine = irmse(d, theta, sample_sobol(1 << 14, 2, RngConfig{5}));
  CHECK(std::abs(coarse - fine) <= 5e-3 * fine);

  // Inert inputs with zero scale reduce to the active projection.
  Matrix flat(10, 3);
  flat.leftCols(2) = d.points();
  flat.col(2) = sample_uniform(10, 1, RngConfig{9}).points().col(0);
  Vector theta3(3);
  theta3 << 8.0, 8.0, 0.0;
  const auto nodes3 = sample_sobol(1 << 12, 3, RngConfig{6});
  const SampleBatch nodes2(Matrix(nodes3.points().leftCols(2)), BatchSource::quadrature);
  CHECK(irmse(Design(flat), theta3, nodes3) == doctest::Approx(irmse(d, theta, nodes2)).epsilon(1e-10));
}

TEST_CASE("likelihood gradient against finite differences") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Design d = random_design(15, 3, 700 + s);
    const Vector y = responses_of(d, smooth);
    Vector theta(3);
    theta << 1.5, 4.0, 0.7;
    Vector g;
    profile_log_likelihood(d, y, theta, 0.0, &g);
    for (Eigen::Index l = 0; l < 3; ++l) {
      const double h = 1e-6 * theta[l];
      Vector tp = theta, tm = theta;
      tp[l] += h;
      tm[l] -= h;
      const double fd = (profile_log_likelihood(d, y, tp, 0.0) - profile_log_likelihood(d, y, tm, 0.0)) / (2.0 * h);
      CHECK(std::abs(fd - g[l]) < 1e-4 * std::max(1.0, std::abs(g[l])));
    }
  }
}

TEST_CASE("maximum likelihood scales") {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const Design d = random_design(20, 2, 800 + s);
    const Vector y = responses_of(d, smooth);
    MleOptions opts;
    opts.rng = RngConfig{900 + s};
    const GpModel m = gp_fit_mle(d, y, opts);
    const double best = profile_log_likelihood(d, y, m.theta(), opts.nugget);
    CHECK(best == doctest::Approx(m.log_likelihood()).epsilon(1e-10));

    const auto starts = sample_sobol(opts.starts, 2, opts.rng);
    const double lo = std::log(opts.theta_min), hi = std::log(opts.theta_max);
    for (Eigen::Index k = 0; k < starts.size(); ++k) {
      const Vector t = (lo + (hi - lo) * starts.points().row(k).array()).exp().matrix().transpose();
      CHECK(best >= profile_log_likelihood(d, y, t, opts.nugget) - 1e-9);
    }
    for (Eigen::Index l = 0; l < 2; ++l) {
      for (double f : {0.95, 1.05}) {
        Vector t = m.theta();
        t[l] = std::clamp(t[l] * f, opts.theta_min, opts.theta_max);
        CHECK(best >= profile_log_likelihood(d, y, t, opts.nugget) - 1e-6);
      }
    }
  }
}

TEST_CASE("efficiency") {
  const Design d = random_design(6, 2, 1);
  const std::vector<Vector> thetas{Vector::Constant(2, 2.0), Vector::Constant(2, 10.0)};
  const auto nodes = sample_sobol(1024, 2, RngConfig{2});
  CHECK(efficiency(d, {d}, thetas, nodes) == 1.0);

  Matrix table(3, 2);
  table << 0.5, 0.4, 0.6, 0.3, 0.5, 0.3;
  const Vector eff = efficiency_from_irmse(table);
  CHECK(eff[0] == doctest::Approx(0.75));
  CHECK(eff[1] == doctest::Approx(5.0 / 6.0));
  CHECK(eff[2] == doctest::Approx(1.0));

  std::vector<Design> pool;
  for (std::uint64_t s = 0; s < 4; ++s) pool.push_back(random_design(6, 2, 10 + s));
  const Vector e = efficiency_from_irmse(irmse_table(pool, thetas, nodes));
  CHECK((e.array() <= 1.0).all());
  CHECK((e.array() > 0.0).all());

  const Vector et = eff_tilde_from_errors(Vector::Zero(2));
  CHECK(et[0] == 1.0);
  CHECK(et[1] == 1.0);
  Vector errs(3);
  errs << 0.2, 0.1, 0.4;
  const Vector e3 = eff_tilde_from_errors(errs);
  CHECK(e3[0] == doctest::Approx(0.5));
  CHECK(e3[1] == 1.0);
  CHECK(e3[2] == doctest::Approx(0.25));
}

TEST_CASE("nugget ladder") {
  double nugget = 0.0;
  const Matrix L = factor_correlation(Matrix::Ones(3, 3), nugget);
  CHECK(nugget > 0.0);
  CHECK(nugget <= 1e-4);
  CHECK((L * L.transpose() - Matrix::Ones(3, 3) - nugget * Matrix::Identity(3, 3)).norm() < 1e-12);

  double untouched = 0.0;
  factor_correlation(Matrix::Identity(3, 3), untouched);
  CHECK(untouched == 0.0);

  Matrix indefinite = Matrix::Identity(2, 2);
  indefinite(0, 1) = indefinite(1, 0) = 2.0;
  double n2 = 0.0;
  CHECK_THROWS_AS(factor_correlation(indefinite, n2), Error);
}

}  // TEST_SUITE

TEST_SUITE("fbm") {

TEST_CASE("marginal variance and anchoring") {
  FbmSpec spec;
  spec.q = 1.0;
  spec.grid.resize(5, 1);
  spec.grid << 0.0, 0.25, 0.5, 0.75, 1.0;
  const Matrix z = fbm_simulate(spec, 4000, RngConfig{1});
  CHECK((z.col(0).array() == 0.0).all());
  const double var = z.col(4).squaredNorm() / 4000.0;
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));

  // Brownian increments over disjoint intervals are uncorrelated.
  const Vector a = z.col(2) - z.col(1), b = z.col(4) - z.col(3);
  const double corr = a.dot(b) / (a.norm() * b.norm());
  CHECK(std::abs(corr) < 0.05);

  CHECK_THROWS_AS(fbm_simulate(FbmSpec{2.0, 1.0, spec.grid}, 10, RngConfig{}), InputError);
  CHECK_THROWS_AS(fbm_simulate(FbmSpec{1.0, 0.0, spec.grid}, 10, RngConfig{}), InputError);
}

TEST_CASE("integration error moment") {
  FbmSpec spec;
  spec.q = 1.0;
  spec.grid.resize(64, 1);
  for (Eigen::Index k = 0; k < 64; ++k) spec.grid(k, 0) = (k + 0.5) / 64.0;
  const Design same(spec.grid);
  CHECK(fbm_integration_error_moment(same, spec, 200, RngConfig{1}).mean_sq_error == doctest::Approx(0.0).epsilon(1e-20));

  Matrix x(3, 1);
  x << 0.1, 0.45, 0.9;
  const Design d(x);
  const auto one = fbm_integration_error_moment(d, spec, 500, RngConfig{2});
  FbmSpec twice = spec;
  twice.sigma2 = 2.0;
  const auto two = fbm_integration_error_moment(d, twice, 500, RngConfig{2});
  CHECK(two.reference == doctest::Approx(2.0 * one.reference).epsilon(1e-12));
  CHECK(two.mean_sq_error == doctest::Approx(2.0 * one.mean_sq_error).epsilon(1e-9));
  const SampleBatch quad(spec.grid, BatchSource::quadrature);
  CHECK(one.reference == doctest::Approx(0.5 * q_energy_distance(d, quad, 1.0).value).epsilon(1e-14));
}

}  // TEST_SUITE
