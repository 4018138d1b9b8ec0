#include <cmath>
#include <vector>

#include "spdesign/energy.hpp"
#include "spdesign/gp.hpp"

namespace spd {

namespace {

Matrix fbm_covariance(const Matrix& pts, double q, double sigma2) {
  const Eigen::Index m = pts.rows();
  const Vector norms = pts.rowwise().norm();
  Matrix C(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      const double v = 0.5 * sigma2 *
                       (std::pow(norms[i], q) + std::pow(norms[j], q) - std::pow((pts.row(i) - pts.row(j)).norm(), q));
      C(i, j) = C(j, i) = v;
    }
  }
  return C;
}

/// Lower factor of C + jitter I, the jitter escalating from 0 through
/// 1e-12 ... 1e-4 times the mean diagonal.
Matrix factor_with_jitter(const Matrix& C) {
  const double scale = C.diagonal().mean();
  Eigen::LLT<Matrix> llt(C);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  for (double rel = 1e-12; rel <= 1e-4 * (1 + 1e-12); rel *= 10.0) {
    Matrix A = C;
    A.diagonal().array() += rel * scale;
    llt.compute(A);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw Error("fBm covariance not positive definite after jitter");
}

}  // namespace

Matrix fbm_simulate(const FbmSpec& spec, Eigen::Index paths, const RngConfig& rng) {
  if (!(spec.q > 0.0) || !(spec.q < 2.0)) throw InputError("fBm exponent q must lie in (0, 2)");
  if (!(spec.sigma2 > 0.0)) throw InputError("fBm variance scale must be positive");
  if (spec.grid.rows() < 1) throw InputError("fBm grid is empty");
  if (paths < 1) throw InputError("need at least one path");

  const Eigen::Index m = spec.grid.rows();
  std::vector<Eigen::Index> active;
  for (Eigen::Index k = 0; k < m; ++k) {
    if (spec.grid.row(k).squaredNorm() > 0.0) active.push_back(k);
  }
  Matrix out = Matrix::Zero(paths, m);
  if (active.empty()) return out;

  Matrix pts(static_cast<Eigen::Index>(active.size()), spec.grid.cols());
  for (std::size_t k = 0; k < active.size(); ++k) pts.row(static_cast<Eigen::Index>(k)) = spec.grid.row(active[k]);
  const Matrix L = factor_with_jitter(fbm_covariance(pts, spec.q, spec.sigma2));

  Rng gen(rng);
  Matrix z(pts.rows(), paths);
  for (Eigen::Index c = 0; c < paths; ++c) {
    for (Eigen::Index r = 0; r < pts.rows(); ++r) z(r, c) = gen.normal();
  }
  const Matrix values = L.triangularView<Eigen::Lower>() * z;  // active x paths
  for (std::size_t k = 0; k < active.size(); ++k) out.col(active[k]) = values.row(static_cast<Eigen::Index>(k)).transpose();
  return out;
}

IntegrationMoment fbm_integration_error_moment(const Design& d, const FbmSpec& spec, Eigen::Index paths,
                                               const RngConfig& rng) {
  if (spec.grid.cols() != d.p()) throw InputError("dimension mismatch between design and grid");
  const Eigen::Index G = spec.grid.rows();

  // Simulate on grid U design; design points that coincide with grid points
  // reuse the grid column.
  FbmSpec joint = spec;
  std::vector<Eigen::Index> design_col(static_cast<std::size_t>(d.n()));
  std::vector<Eigen::Index> extra;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    Eigen::Index found = -1;
    for (Eigen::Index k = 0; k < G && found < 0; ++k) {
      if (spec.grid.row(k) == d.points().row(i)) found = k;
    }
    if (found < 0) {
      found = G + static_cast<Eigen::Index>(extra.size());
      extra.push_back(i);
    }
    design_col[static_cast<std::size_t>(i)] = found;
  }
  joint.grid.resize(G + static_cast<Eigen::Index>(extra.size()), d.p());
  joint.grid.topRows(G) = spec.grid;
  for (std::size_t k = 0; k < extra.size(); ++k) joint.grid.row(G + static_cast<Eigen::Index>(k)) = d.points().row(extra[k]);

  const Matrix z = fbm_simulate(joint, paths, rng);
  Vector sq(paths);
  for (Eigen::Index r = 0; r < paths; ++r) {
    const double grid_mean = z.row(r).head(G).mean();
    double design_mean = 0.0;
    for (auto c : design_col) design_mean += z(r, c);
    design_mean /= static_cast<double>(d.n());
    const double err = grid_mean - design_mean;
    sq[r] = err * err;
  }

  IntegrationMoment out;
  out.mean_sq_error = sq.mean();
  out.std_error = paths > 1 ? std::sqrt((sq.array() - out.mean_sq_error).square().sum() / static_cast<double>(paths - 1) /
                                        static_cast<double>(paths))
                            : 0.0;
  const SampleBatch quad(spec.grid, BatchSource::quadrature);
  out.reference = 0.5 * spec.sigma2 * q_energy_distance(d, quad, spec.q).value;
  return out;
}

}  // namespace spd
