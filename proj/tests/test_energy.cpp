#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "spdesign/energy.hpp"
#include "spdesign/sampling.hpp"

using namespace spd;

namespace {

Design design1d(std::vector<double> x) {
  Matrix m(static_cast<Eigen::Index>(x.size()), 1);
  for (std::size_t i = 0; i < x.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = x[i];
  return Design(m);
}

SampleBatch midpoint_grid(Eigen::Index G) {
  Matrix y(G, 1);
  for (Eigen::Index k = 0; k < G; ++k) y(k, 0) = (static_cast<double>(k) + 0.5) / static_cast<double>(G);
  return SampleBatch(y, BatchSource::quadrature);
}

Design random_design(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  return Design(sample_uniform(n, p, RngConfig{seed, 0xd0}).points());
}

Matrix permute_rows(const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) y.row(i) = x.row(x.rows() - 1 - i);
  return y;
}

// 1-d factor of the centered-L2 kernel.
double cl2_factor(double x, double y) {
  return 1.0 + 0.5 * std::abs(x - 0.5) + 0.5 * std::abs(y - 0.5) - 0.5 * std::abs(x - y);
}

// Squared CL2 discrepancy by quadrature of the product kernel against
// d(F - F_n) x d(F - F_n).
double cl2_quadrature(const Design& d) {
  const Eigen::Index n = d.n(), p = d.p();
  const double both = oracle::integrate_pieces(
      [](double y) { return oracle::integrate_pieces([y](double x) { return cl2_factor(x, y); }, {y, 0.5}); }, {0.5});
  const auto single = [&](double c) {
    const auto f = [&](double x) { return cl2_factor(x, c); };
    return oracle::integrate_pieces(f, {c, 0.5});
  };
  double mixed = 0.0, pair = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double prod = 1.0;
    for (Eigen::Index l = 0; l < p; ++l) prod *= single(d.points()(i, l));
    mixed += prod;
    for (Eigen::Index j = 0; j < n; ++j) {
      double k = 1.0;
      for (Eigen::Index l = 0; l < p; ++l) k *= cl2_factor(d.points()(i, l), d.points()(j, l));
      pair += k;
    }
  }
  const double nd = static_cast<double>(n);
  return std::pow(both, static_cast<double>(p)) - 2.0 * mixed / nd + pair / (nd * nd);
}

}  // namespace

TEST_SUITE("energy") {

TEST_CASE("exact 1-d path agrees with quadrature") {
  CHECK(energy_distance_1d(std::vector<double>{0.5}) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(energy_distance_1d(std::vector<double>{0.25, 0.75}) == doctest::Approx(1.0 / 24.0).epsilon(1e-14));
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Design d = random_design(6, 1, s);
    const std::vector<double> x(d.points().data(), d.points().data() + 6);
    CHECK(energy_distance_1d(x) == doctest::Approx(oracle::q_energy_1d(x, 1.0)).epsilon(1e-10));
    for (double q : {0.3, 0.5, 1.5, 1.9}) {
      CHECK(q_energy_distance_1d(x, q) == doctest::Approx(oracle::q_energy_1d(x, q)).epsilon(1e-9));
    }
  }
}

TEST_CASE("batch estimates match the exact 1-d values") {
  const auto batch = sample_sobol(100000, 1, RngConfig{1});
  const auto one = energy_distance(design1d({0.5}), batch);
  CHECK(std::abs(one.value - 1.0 / 6.0) < 0.003);
  CHECK(one.N == 100000);
  const auto two = energy_distance(design1d({0.25, 0.75}), batch);
  CHECK(std::abs(two.value - 1.0 / 24.0) < 0.003);

  const auto mc = sample_uniform(20000, 1, RngConfig{2});
  const auto est = q_energy_distance(design1d({0.25, 0.75}), mc, 0.5);
  const double truth = oracle::q_energy_1d({0.25, 0.75}, 0.5);
  CHECK(est.std_error > 0.0);
  CHECK(std::abs(est.value - truth) < 3.0 * est.std_error);
}

TEST_CASE("energy of a quadrature batch against itself is zero") {
  const auto grid = midpoint_grid(300);
  const Design d(grid.points());
  CHECK(std::abs(energy_distance(d, grid).value) < 1e-12);
  CHECK(std::abs(q_energy_distance(d, grid, 0.5).value) < 1e-12);
  CHECK(std::abs(projected_kernel_sum(d, grid)) < 1e-8);
}

TEST_CASE("q = 1 reproduces the energy distance bit for bit") {
  const Design d = random_design(12, 3, 4);
  const auto batch = sample_sobol(4096, 3, RngConfig{5});
  CHECK(q_energy_distance(d, batch, 1.0).value == energy_distance(d, batch).value);
  CHECK_THROWS_AS(q_energy_distance(d, batch, 0.0), InputError);
  CHECK_THROWS_AS(q_energy_distance(d, batch, 2.5), InputError);
}

TEST_CASE("q = 2 degenerates to twice the squared mean difference") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Design d = random_design(1 + s, 1, s);
    const std::vector<double> x(d.points().data(), d.points().data() + d.n());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    CHECK(std::abs(q_energy_distance_1d(x, 2.0) - 2.0 * (mean - 0.5) * (mean - 0.5)) < 1e-12);

    const auto grid = midpoint_grid(257);
    const double gmean = grid.points().mean();
    CHECK(std::abs(q_energy_distance(d, grid, 2.0).value - 2.0 * (gmean - mean) * (gmean - mean)) < 1e-12);
  }
}

TEST_CASE("projected kernel sum on a shared batch equals n^2/2 times the energy") {
  const Design d = random_design(10, 2, 6);
  const auto grid = sample_sobol(2048, 2, RngConfig{7});
  const SampleBatch quad(grid.points(), BatchSource::quadrature);
  const double e = energy_distance(d, quad).value;
  CHECK(projected_kernel_sum(d, quad) == doctest::Approx(50.0 * e).epsilon(1e-10));
  CHECK(projected_kernel_sum(d, quad, 2.0) == doctest::Approx(2.0 * projected_kernel_sum(d, quad)).epsilon(1e-12));
}

TEST_CASE("energy criteria are non-negative and symmetric") {
  const auto batch = sample_sobol(8192, 3, RngConfig{8});
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Design d = random_design(8, 3, 100 + s);
    const double e = energy_distance(d, batch).value;
    CHECK(e >= -1e-9);
    CHECK(q_energy_distance(d, batch, 0.5).value >= -1e-9);
    CHECK(energy_distance(Design(permute_rows(d.points())), batch).value == doctest::Approx(e).epsilon(1e-12));
    Matrix swapped = d.points();
    swapped.col(0).swap(swapped.col(2));
    const Design ds(swapped);
    CHECK(cl2_discrepancy(ds) == doctest::Approx(cl2_discrepancy(d)).epsilon(1e-12));
    const Vector proj = projected_energy_1d(d);
    for (Eigen::Index l = 0; l < 3; ++l) {
      std::vector<double> col;
      for (Eigen::Index i = 0; i < d.n(); ++i) col.push_back(d.points()(i, l));
      CHECK(proj[l] == energy_distance_1d(col));
    }
  }
}

TEST_CASE("CL2 discrepancy against quadrature") {
  CHECK(cl2_discrepancy(design1d({0.5})) == doctest::Approx(cl2_quadrature(design1d({0.5}))).epsilon(1e-10));
  CHECK(std::abs(cl2_discrepancy(design1d({0.5})) - cl2_quadrature(design1d({0.5}))) < 1e-6);
  for (std::uint64_t s = 0; s < 3; ++s) {
    const Design d = random_design(5, 3, 200 + s);
    CHECK(cl2_discrepancy(d) == doctest::Approx(cl2_quadrature(d)).epsilon(1e-9));
  }
  for (std::uint64_t s = 0; s < 200; ++s) {
    const Design d = random_design(1 + s % 13, 1 + s % 5, 300 + s);
    const double v = cl2_discrepancy(d);
    CHECK(v >= -1e-9);
    const Design r(1.0 - d.points().array());
    CHECK(cl2_discrepancy(r) == doctest::Approx(v).epsilon(1e-10));
  }
}

TEST_CASE("mean Gaussian kernel: value and gradients") {
  const auto pts = sample_uniform(200, 3, RngConfig{9}).points();
  const auto w = sample_exp_prior(1.0, 3, 7, RngConfig{10}).exponent_weights();
  const std::vector<double> x{0.3, 0.6, 0.9};
  double brute = 0.0;
  for (Eigen::Index m = 0; m < pts.rows(); ++m) {
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      double t = 0.0;
      for (int l = 0; l < 3; ++l) t += w(r, l) * (x[l] - pts(m, l)) * (x[l] - pts(m, l));
      brute += std::exp(-t);
    }
  }
  brute /= static_cast<double>(pts.rows() * w.rows());
  std::vector<double> grad(3), weighted(3);
  CHECK(mean_gaussian_kernel(x, pts, w, grad, weighted) == doctest::Approx(brute).epsilon(1e-13));
  const double h = 1e-6;
  for (int l = 0; l < 3; ++l) {
    auto up = x, dn = x;
    up[l] += h;
    dn[l] -= h;
    const double fd = (mean_gaussian_kernel(up, pts, w) - mean_gaussian_kernel(dn, pts, w)) / (2 * h);
    CHECK(grad[l] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("PSP objective against a direct double sum") {
  const Design d = random_design(6, 2, 11);
  const auto batch = sample_sobol(512, 2, RngConfig{12});
  const auto pod = sample_pod_prior(KernelSpec::pod_prior(2), 16, RngConfig{13});
  const Matrix& w = pod.exponent_weights();
  const auto gamma = [&](auto a, auto b, Eigen::Index r) {
    return std::exp(-(w.row(r).array() * (a - b).array().square()).sum());
  };
  double attract = 0.0, repel = 0.0;
  for (Eigen::Index i = 0; i < 6; ++i) {
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index m = 0; m < batch.size(); ++m) attract += gamma(d.row(i), batch.points().row(m), r);
      for (Eigen::Index j = 0; j < 6; ++j) repel += gamma(d.row(i), d.row(j), r);
    }
  }
  const double R = static_cast<double>(w.rows());
  const double expected = -2.0 * attract / (6.0 * 512.0 * R) + repel / (36.0 * R);
  CHECK(psp_objective(d, batch, pod) == doctest::Approx(expected).epsilon(1e-12));

  const auto flat = PriorDrawBatch::fixed(Matrix::Zero(4, 2));
  CHECK(psp_objective(d, batch, flat) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("PSP objective under Exp(1): single centred point") {
  // E_{Y, theta} exp(-theta (x - Y)^2) for x = 0.5, by quadrature in (y, theta).
  const double inner = oracle::integrate(
      [](double y) {
        return oracle::integrate(
            [y](double t) { return std::exp(-t * (1.0 + (0.5 - y) * (0.5 - y))); }, 0.0, 60.0);
      },
      0.0, 1.0);
  const double expected = -2.0 * inner + 1.0;
  CHECK(expected == doctest::Approx(-2.0 * 2.0 * std::atan(0.5) + 1.0).epsilon(1e-10));
  const double value = psp_objective_exp(design1d({0.5}), midpoint_grid(20000), 1.0);
  CHECK(value == doctest::Approx(expected).epsilon(1e-8));
  CHECK(value == doctest::Approx(-0.85459).epsilon(1e-5));
}

}  // TEST_SUITE
