#include "spdesign/energy.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "spdesign/parallel.hpp"

namespace spd {

namespace {

constexpr std::uint64_t kMaxPairs = 1'000'000;
constexpr Eigen::Index kInfluenceRefs = 128;

void check_dims(const Design& d, Eigen::Index p) {
  if (d.p() != p) {
    throw InputError("dimension mismatch: design has p=" + std::to_string(d.p()) + ", batch has p=" +
                     std::to_string(p));
  }
}

/// |a - b|^q computed from the squared distance.
struct PowerDistance {
  double q;
  double operator()(double d2) const {
    if (q == 1.0) return std::sqrt(d2);
    if (q == 2.0) return d2;
    return std::pow(d2, q / 2.0);
  }
};

double sq_dist(const double* a, const double* b, Eigen::Index p) {
  double s = 0.0;
  for (Eigen::Index l = 0; l < p; ++l) {
    const double t = a[l] - b[l];
    s += t * t;
  }
  return s;
}

/// E|Y - Y'|^q over the batch.
double batch_pair_mean(const SampleBatch& batch, PowerDistance dist) {
  const Matrix& y = batch.points();
  const Eigen::Index N = y.rows();
  const Eigen::Index p = y.cols();
  const auto row = [&](Eigen::Index m) { return y.data() + m * p; };

  if (batch.source() == BatchSource::quadrature) {
    const double s = chunked_sum(static_cast<std::size_t>(N), 16, [&](std::size_t b, std::size_t e) {
      double acc = 0.0;
      for (auto m = static_cast<Eigen::Index>(b); m < static_cast<Eigen::Index>(e); ++m) {
        for (Eigen::Index k = 0; k < N; ++k) acc += dist(sq_dist(row(m), row(k), p));
      }
      return acc;
    });
    return s / (static_cast<double>(N) * static_cast<double>(N));
  }

  if (N < 2) throw InputError("batch needs at least 2 points for the pair term");
  const auto pairs = static_cast<std::uint64_t>(N) * static_cast<std::uint64_t>(N - 1) / 2;
  if (pairs <= kMaxPairs) {
    const double s = chunked_sum(static_cast<std::size_t>(N), 16, [&](std::size_t b, std::size_t e) {
      double acc = 0.0;
      for (auto m = static_cast<Eigen::Index>(b); m < static_cast<Eigen::Index>(e); ++m) {
        for (Eigen::Index k = m + 1; k < N; ++k) acc += dist(sq_dist(row(m), row(k), p));
      }
      return acc;
    });
    return s / static_cast<double>(pairs);
  }

  // Random subsample of distinct-index pairs, fixed by the batch seed.
  const std::size_t chunk = 1 << 14;
  const double s = chunked_sum(kMaxPairs, chunk, [&](std::size_t b, std::size_t e) {
    Rng gen(RngConfig{batch.seed(), 0x9a1f}.derive(b / chunk));
    std::uniform_int_distribution<Eigen::Index> pick(0, N - 1);
    double acc = 0.0;
    for (std::size_t k = b; k < e; ++k) {
      const Eigen::Index m = pick(gen);
      Eigen::Index j = pick(gen);
      while (j == m) j = pick(gen);
      acc += dist(sq_dist(row(m), row(j), p));
    }
    return acc;
  });
  return s / static_cast<double>(kMaxPairs);
}

/// (1/n^2) sum_{i,j} |x_i - x_j|^q.
double design_pair_mean(const Design& d, PowerDistance dist) {
  const Matrix& x = d.points();
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) s += dist(sq_dist(x.data() + i * p, x.data() + j * p, p));
  }
  return 2.0 * s / (static_cast<double>(n) * static_cast<double>(n));
}

struct CrossTerms {
  Vector g;  // g_m = (1/n) sum_i |x_i - y_m|^q
  double mean = 0.0;
};

CrossTerms cross_terms(const Design& d, const SampleBatch& batch, PowerDistance dist) {
  const Matrix& x = d.points();
  const Matrix& y = batch.points();
  const Eigen::Index n = x.rows();
  const Eigen::Index N = y.rows();
  const Eigen::Index p = x.cols();
  CrossTerms out;
  out.g.resize(N);
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
    for (auto m = static_cast<Eigen::Index>(b); m < static_cast<Eigen::Index>(e); ++m) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) acc += dist(sq_dist(x.data() + i * p, y.data() + m * p, p));
      out.g[m] = acc / static_cast<double>(n);
    }
  });
  out.mean = chunked_sum(static_cast<std::size_t>(N), 4096, [&](std::size_t b, std::size_t e) {
    return out.g.segment(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(e - b)).sum();
  }) / static_cast<double>(N);
  return out;
}

/// Linearized standard error: the estimator's first-order influence of y_m is
/// 2 g(y_m) - 2 h(y_m), h(y) = E|y - Y'|^q (estimated from a few batch rows).
double influence_std_error(const SampleBatch& batch, const Vector& g, PowerDistance dist) {
  const Matrix& y = batch.points();
  const Eigen::Index N = y.rows();
  const Eigen::Index p = y.cols();
  if (N < 3) return 0.0;
  const Eigen::Index refs = std::min(kInfluenceRefs, N);
  Vector a(N);
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
    for (auto m = static_cast<Eigen::Index>(b); m < static_cast<Eigen::Index>(e); ++m) {
      double h = 0.0;
      Eigen::Index used = 0;
      for (Eigen::Index k = 0; k < refs; ++k) {
        if (k == m) continue;
        h += dist(sq_dist(y.data() + m * p, y.data() + k * p, p));
        ++used;
      }
      a[m] = 2.0 * g[m] - 2.0 * h / static_cast<double>(used);
    }
  });
  const double mean = a.mean();
  const double var = (a.array() - mean).square().sum() / static_cast<double>(N - 1);
  return std::sqrt(var / static_cast<double>(N));
}

EnergyEstimate energy_impl(const Design& d, const SampleBatch& batch, double q) {
  check_dims(d, batch.p());
  const PowerDistance dist{q};
  const CrossTerms cross = cross_terms(d, batch, dist);
  const double yy = batch_pair_mean(batch, dist);
  const double xx = design_pair_mean(d, dist);
  EnergyEstimate est;
  est.value = 2.0 * cross.mean - yy - xx;
  est.N = batch.size();
  if (batch.source() != BatchSource::quadrature) est.std_error = influence_std_error(batch, cross.g, dist);
  return est;
}

}  // namespace

EnergyEstimate energy_distance(const Design& d, const SampleBatch& batch) { return energy_impl(d, batch, 1.0); }

EnergyEstimate q_energy_distance(const Design& d, const SampleBatch& batch, double q) {
  if (!(q > 0.0) || q > 2.0) throw InputError("q must lie in (0, 2]");
  return energy_impl(d, batch, q);
}

double q_energy_distance_1d(std::span<const double> x, double q) {
  if (!(q > 0.0) || q > 2.0) throw InputError("q must lie in (0, 2]");
  if (x.empty()) throw InputError("empty point set");
  const auto n = static_cast<double>(x.size());
  const PowerDistance dist{q};
  double cross = 0.0;
  for (double v : x) cross += (std::pow(v, q + 1.0) + std::pow(1.0 - v, q + 1.0)) / (q + 1.0);
  double xx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) xx += dist((x[i] - x[j]) * (x[i] - x[j]));
  }
  return 2.0 * cross / n - 2.0 / ((q + 1.0) * (q + 2.0)) - 2.0 * xx / (n * n);
}

double energy_distance_1d(std::span<const double> x) {
  if (x.empty()) throw InputError("empty point set");
  const auto n = static_cast<double>(x.size());
  double cross = 0.0;
  for (double v : x) cross += v * v - v + 0.5;
  double xx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) xx += std::abs(x[i] - x[j]);
  }
  return 2.0 * cross / n - 1.0 / 3.0 - 2.0 * xx / (n * n);
}

Vector projected_energy_1d(const Design& d) {
  Vector out(d.p());
  std::vector<double> col(static_cast<std::size_t>(d.n()));
  for (Eigen::Index l = 0; l < d.p(); ++l) {
    for (Eigen::Index i = 0; i < d.n(); ++i) col[static_cast<std::size_t>(i)] = d.points()(i, l);
    out[l] = energy_distance_1d(col);
  }
  return out;
}

double projected_kernel_sum(const Design& d, const SampleBatch& batch, double sigma2) {
  check_dims(d, batch.p());
  const PowerDistance dist{1.0};
  const Matrix& x = d.points();
  const Eigen::Index n = d.n();
  const auto nd = static_cast<double>(n);

  const double mean_norm_y = batch.points().rowwise().norm().mean();
  const double yy = batch_pair_mean(batch, dist);
  const Vector norm_x = x.rowwise().norm();

  // E r(x_i, Y) needs the per-point mean distance to the batch.
  Vector e_xy(n);
  const Matrix& y = batch.points();
  for (Eigen::Index i = 0; i < n; ++i) e_xy[i] = (y.rowwise() - x.row(i)).rowwise().norm().mean();

  const double half = sigma2 / 2.0;
  double kernel_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) kernel_sum += half * (norm_x[i] + norm_x[j] - (x.row(i) - x.row(j)).norm());
  }
  double row_means = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) row_means += half * (norm_x[i] + mean_norm_y - e_xy[i]);
  const double both_means = half * (2.0 * mean_norm_y - yy);

  return kernel_sum - 2.0 * nd * row_means + nd * nd * both_means;
}

double cl2_discrepancy(const Design& d) {
  const Matrix& x = d.points();
  const Eigen::Index n = d.n();
  const Eigen::Index p = d.p();
  const auto nd = static_cast<double>(n);

  double single = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double prod = 1.0;
    for (Eigen::Index l = 0; l < p; ++l) {
      const double a = std::abs(x(i, l) - 0.5);
      prod *= 1.0 + 0.5 * a - 0.5 * a * a;
    }
    single += prod;
  }
  double pair = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double prod = 1.0;
      for (Eigen::Index l = 0; l < p; ++l) {
        prod *= 1.0 + 0.5 * std::abs(x(i, l) - 0.5) + 0.5 * std::abs(x(j, l) - 0.5) - 0.5 * std::abs(x(i, l) - x(j, l));
      }
      pair += prod;
    }
  }
  return std::pow(13.0 / 12.0, static_cast<double>(p)) - 2.0 * single / nd + pair / (nd * nd);
}

// ---------------------------------------------------------------------------

double mean_gaussian_kernel(std::span<const double> x, const Matrix& pts, const Matrix& weights,
                            std::span<double> grad, std::span<double> weighted) {
  const Eigen::Index M = pts.rows();
  const Eigen::Index R = weights.rows();
  const Eigen::Index p = pts.cols();
  if (static_cast<Eigen::Index>(x.size()) != p || weights.cols() != p) throw InputError("dimension mismatch");
  const bool want_grad = !grad.empty();
  const bool want_weighted = !weighted.empty();
  if (want_grad && static_cast<Eigen::Index>(grad.size()) != p) throw InputError("gradient buffer has wrong size");
  if (want_weighted && static_cast<Eigen::Index>(weighted.size()) != p) throw InputError("weight buffer has wrong size");

  const Eigen::Map<const Eigen::RowVectorXd> xv(x.data(), p);
  constexpr Eigen::Index kBlock = 64;
  const Eigen::Index blocks = (M + kBlock - 1) / kBlock;
  std::vector<double> value(static_cast<std::size_t>(blocks));
  Matrix grads = want_grad ? Matrix::Zero(blocks, p) : Matrix();
  Matrix wsums = want_weighted ? Matrix::Zero(blocks, p) : Matrix();

  parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b, std::size_t e) {
    Matrix diff, kern, gw;
    for (auto blk = static_cast<Eigen::Index>(b); blk < static_cast<Eigen::Index>(e); ++blk) {
      const Eigen::Index m0 = blk * kBlock;
      const Eigen::Index rows = std::min(kBlock, M - m0);
      diff = (-pts.middleRows(m0, rows)).rowwise() + xv;
      kern.noalias() = diff.array().square().matrix() * weights.transpose();
      kern = (-kern.array()).exp().matrix();
      value[static_cast<std::size_t>(blk)] = kern.sum();
      if (want_grad || want_weighted) {
        gw.noalias() = kern * weights;
        if (want_grad) grads.row(blk) = -2.0 * (diff.array() * gw.array()).colwise().sum();
        if (want_weighted) wsums.row(blk) = gw.colwise().sum();
      }
    }
  });

  const double scale = 1.0 / (static_cast<double>(M) * static_cast<double>(R));
  double total = 0.0;
  for (double v : value) total += v;
  if (want_grad) {
    for (Eigen::Index l = 0; l < p; ++l) {
      double g = 0.0;
      for (Eigen::Index blk = 0; blk < blocks; ++blk) g += grads(blk, l);
      grad[static_cast<std::size_t>(l)] = g * scale;
    }
  }
  if (want_weighted) {
    for (Eigen::Index l = 0; l < p; ++l) {
      double g = 0.0;
      for (Eigen::Index blk = 0; blk < blocks; ++blk) g += wsums(blk, l);
      weighted[static_cast<std::size_t>(l)] = g * scale;
    }
  }
  return total * scale;
}

double psp_objective(const Design& d, const SampleBatch& batch, const PriorDrawBatch& priors) {
  check_dims(d, batch.p());
  if (priors.p() != d.p()) throw InputError("dimension mismatch between design and prior draws");
  const Matrix& x = d.points();
  const Matrix& w = priors.exponent_weights();
  const Eigen::Index n = d.n();
  const Eigen::Index p = d.p();
  const auto nd = static_cast<double>(n);

  double attraction = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    attraction += mean_gaussian_kernel({x.data() + i * p, static_cast<std::size_t>(p)}, batch.points(), w);
  }
  double repulsion = nd;  // gamma(x, x) = 1
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Eigen::RowVectorXd d2 = (x.row(i) - x.row(j)).array().square().matrix();
      repulsion += 2.0 * (-(w * d2.transpose()).array()).exp().mean();
    }
  }
  return -2.0 * attraction / nd + repulsion / (nd * nd);
}

double psp_objective_exp(const Design& d, const SampleBatch& batch, double lambda) {
  check_dims(d, batch.p());
  if (!(lambda > 0.0)) throw InputError("lambda must be positive");
  const Matrix& x = d.points();
  const Matrix& y = batch.points();
  const Eigen::Index n = d.n();
  const Eigen::Index N = y.rows();
  const Eigen::Index p = d.p();
  const auto nd = static_cast<double>(n);

  const auto kernel = [&](const double* a, const double* b) {
    double prod = 1.0;
    for (Eigen::Index l = 0; l < p; ++l) prod *= lambda / (lambda + (a[l] - b[l]) * (a[l] - b[l]));
    return prod;
  };
  const double attraction = chunked_sum(static_cast<std::size_t>(N), 1024, [&](std::size_t b, std::size_t e) {
    double acc = 0.0;
    for (auto m = static_cast<Eigen::Index>(b); m < static_cast<Eigen::Index>(e); ++m) {
      for (Eigen::Index i = 0; i < n; ++i) acc += kernel(x.data() + i * p, y.data() + m * p);
    }
    return acc;
  }) / static_cast<double>(N);
  double repulsion = nd;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) repulsion += 2.0 * kernel(x.data() + i * p, x.data() + j * p);
  }
  return -2.0 * attraction / nd + repulsion / (nd * nd);
}

}  // namespace spd
