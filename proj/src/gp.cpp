#include "spdesign/gp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "spdesign/parallel.hpp"
#include "spdesign/sampling.hpp"

namespace spd {

namespace {

constexpr double kRadicandSlack = 1e-10;
constexpr double kMinPivot = 1e-14;
constexpr double kMaxNugget = 1e-4;

bool try_factor(const Matrix& A, Matrix& L) {
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) return false;
  L = llt.matrixL();
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    if (!(L(i, i) * L(i, i) > kMinPivot * A(i, i))) return false;
  }
  return true;
}

Vector chol_solve(const Matrix& L, const Vector& b) {
  Vector y = L.triangularView<Eigen::Lower>().solve(b);
  return L.transpose().triangularView<Eigen::Upper>().solve(y);
}

}  // namespace

Matrix gaussian_correlation(const Matrix& a, const Matrix& b, const Vector& theta) {
  if (a.cols() != theta.size() || b.cols() != theta.size()) throw InputError("correlation scale has wrong length");
  Matrix R(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (Eigen::Index l = 0; l < theta.size(); ++l) {
        const double t = a(i, l) - b(j, l);
        s += theta[l] * t * t;
      }
      R(i, j) = std::exp(-s);
    }
  }
  return R;
}

Matrix factor_correlation(const Matrix& R, double& nugget) {
  if (nugget < 0.0) throw InputError("nugget must be >= 0");
  Matrix L;
  Matrix A = R;
  A.diagonal().array() += nugget;
  if (try_factor(A, L)) return L;
  for (double v = std::max(1e-8, nugget * 10.0); v <= kMaxNugget * (1 + 1e-12); v *= 10.0) {
    if (v <= nugget) continue;
    A = R;
    A.diagonal().array() += v;
    if (try_factor(A, L)) {
      nugget = v;
      return L;
    }
  }
  throw Error("correlation matrix not factorable with nugget up to 1e-4");
}

GpModel::GpModel(Design design, Vector responses, Vector theta, double nugget, std::optional<double> mu,
                 std::optional<double> sigma2)
    : design_(std::move(design)), responses_(std::move(responses)), theta_(std::move(theta)), nugget_(nugget) {
  const Eigen::Index n = design_.n();
  if (responses_.size() != n) throw InputError("need one response per design point");
  if (!responses_.allFinite()) throw InputError("responses must be finite");
  if (theta_.size() != design_.p()) throw InputError("correlation scale has wrong length");
  if ((theta_.array() < 0.0).any() || !theta_.allFinite()) throw InputError("correlation scales must be >= 0");

  const Matrix R = gaussian_correlation(design_.points(), design_.points(), theta_);
  chol_ = factor_correlation(R, nugget_);

  const Vector ones = Vector::Ones(n);
  if (mu) {
    mu_ = *mu;
  } else {
    const Vector r1 = chol_solve(chol_, ones);
    mu_ = r1.dot(responses_) / r1.sum();
  }
  const Vector resid = responses_ - mu_ * ones;
  alpha_ = chol_solve(chol_, resid);
  sigma2_ = sigma2 ? *sigma2 : std::max(0.0, resid.dot(alpha_) / static_cast<double>(n));

  const double logdet = 2.0 * chol_.diagonal().array().log().sum();
  const double s2 = std::max(sigma2_, std::numeric_limits<double>::min());
  loglik_ = -0.5 * static_cast<double>(n) * std::log(s2) - 0.5 * logdet;
}

GpModel gp_fit(const Design& d, const Vector& responses, const Vector& theta, double nugget) {
  if ((theta.array() <= 0.0).any()) throw InputError("correlation scales must be positive");
  return GpModel(d, responses, theta, nugget);
}

double profile_log_likelihood(const Design& d, const Vector& responses, const Vector& theta, double nugget,
                              Vector* grad) {
  const Eigen::Index n = d.n();
  const Eigen::Index p = d.p();
  const Matrix R = gaussian_correlation(d.points(), d.points(), theta);
  Matrix L;
  try {
    L = factor_correlation(R, nugget);
  } catch (const Error&) {
    return -std::numeric_limits<double>::infinity();
  }
  const Vector ones = Vector::Ones(n);
  const Vector r1 = chol_solve(L, ones);
  const double mu = r1.dot(responses) / r1.sum();
  const Vector resid = responses - mu * ones;
  const Vector alpha = chol_solve(L, resid);
  const double sigma2 = std::max(resid.dot(alpha) / static_cast<double>(n), std::numeric_limits<double>::min());
  const double ll = -0.5 * static_cast<double>(n) * std::log(sigma2) - L.diagonal().array().log().sum();

  if (grad) {
    const Matrix Rinv =
        L.transpose().triangularView<Eigen::Upper>().solve(L.triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n)));
    grad->resize(p);
    for (Eigen::Index l = 0; l < p; ++l) {
      double quad = 0.0, trace = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          const double t = d.points()(i, l) - d.points()(j, l);
          const double dR = -t * t * R(i, j);
          quad += alpha[i] * dR * alpha[j];
          trace += Rinv(i, j) * dR;
        }
      }
      (*grad)[l] = quad / (2.0 * sigma2) - 0.5 * trace;
    }
  }
  return ll;
}

GpModel gp_fit_mle(const Design& d, const Vector& responses, const MleOptions& opts) {
  const Eigen::Index p = d.p();
  if (!(opts.theta_min > 0.0) || !(opts.theta_max > opts.theta_min)) throw InputError("bad scale bounds");
  if (opts.starts < 1) throw InputError("need at least one start");
  const double lo = std::log(opts.theta_min), hi = std::log(opts.theta_max);
  const SampleBatch starts = sample_sobol(opts.starts, p, opts.rng);

  const auto eval = [&](const Vector& z, Vector* gz) {
    const Vector theta = z.array().exp();
    Vector g;
    const double ll = profile_log_likelihood(d, responses, theta, opts.nugget, gz ? &g : nullptr);
    if (gz) *gz = (g.array() * theta.array()).matrix();
    return ll;
  };
  const auto project = [&](Vector z) { return Vector(z.cwiseMax(lo).cwiseMin(hi)); };

  Vector best_z;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (Eigen::Index s = 0; s < starts.size(); ++s) {
    Vector z = (lo + (hi - lo) * starts.points().row(s).array()).matrix().transpose();
    Vector g;
    double ll = eval(z, &g);
    if (!std::isfinite(ll)) {
      // Very small scales make R numerically singular; move the start up.
      z = project(z.array() + 0.5 * (hi - z.array()));
      ll = eval(z, &g);
      if (!std::isfinite(ll)) continue;
    }
    double step = 1.0 / std::max(1.0, g.lpNorm<Eigen::Infinity>());
    for (int it = 0; it < opts.max_iterations; ++it) {
      Vector z_new, g_new;
      double ll_new = -std::numeric_limits<double>::infinity();
      bool accepted = false;
      for (int h = 0; h < 30; ++h, step *= 0.5) {
        z_new = project(z + step * g);
        if ((z_new - z).lpNorm<Eigen::Infinity>() < 1e-10) break;
        ll_new = eval(z_new, &g_new);
        if (std::isfinite(ll_new) && ll_new >= ll + 1e-4 * g.dot(z_new - z)) {
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      const Vector sz = z_new - z;
      const Vector yz = g - g_new;  // ascent: curvature along -g
      const double converged_move = sz.lpNorm<Eigen::Infinity>();
      const double gain = ll_new - ll;
      const double sy = sz.dot(yz);
      step = sy > 0.0 ? std::clamp(sz.squaredNorm() / sy, 1e-6, 1e3) : std::min(1e3, step * 4.0);
      z = z_new;
      g = g_new;
      ll = ll_new;
      if (converged_move < 1e-6 || gain < 1e-10 * (1.0 + std::abs(ll))) break;
    }
    if (ll > best_ll) {
      best_ll = ll;
      best_z = z;
    }
  }
  if (best_z.size() == 0) throw Error("likelihood could not be evaluated at any start");
  return GpModel(d, responses, best_z.array().exp(), opts.nugget);
}

Prediction gp_predict(const GpModel& m, std::span<const double> x) {
  const Eigen::Index p = m.design().p();
  if (static_cast<Eigen::Index>(x.size()) != p) throw InputError("prediction point has wrong dimension");
  Matrix xm(1, p);
  for (Eigen::Index l = 0; l < p; ++l) xm(0, l) = x[static_cast<std::size_t>(l)];
  const auto [mean, rmse] = gp_predict(m, xm);
  return {mean[0], rmse[0]};
}

std::pair<Vector, Vector> gp_predict(const GpModel& m, const Matrix& x) {
  const Matrix r = gaussian_correlation(x, m.design().points(), m.theta());  // M x n
  Vector mean = (r * m.alpha()).array() + m.mu();
  const Matrix v = m.chol().triangularView<Eigen::Lower>().solve(r.transpose());  // n x M
  Vector rmse(x.rows());
  for (Eigen::Index k = 0; k < x.rows(); ++k) {
    double rad = 1.0 - v.col(k).squaredNorm();
    if (rad < -kRadicandSlack) throw Error("negative predictive variance: ill-conditioned model");
    rad = std::max(rad, 0.0);
    rmse[k] = std::sqrt(m.sigma2() * rad);
  }
  return {std::move(mean), std::move(rmse)};
}

double irmse(const Design& d, const Vector& theta, const SampleBatch& nodes, double nugget, double* nugget_used) {
  if (theta.size() != d.p() || nodes.p() != d.p()) throw InputError("dimension mismatch");
  const Matrix R = gaussian_correlation(d.points(), d.points(), theta);
  const Eigen::Index M = nodes.size();
  constexpr std::size_t kChunk = 512;
  // A radicand below the slack means cancellation in an ill-conditioned R;
  // such scales are retried one nugget rung higher.
  for (;;) {
    const Matrix L = factor_correlation(R, nugget);
    std::atomic<bool> bad{false};
    const double total = chunked_sum(static_cast<std::size_t>(M), kChunk, [&](std::size_t b, std::size_t e) {
      const auto rows = static_cast<Eigen::Index>(e - b);
      const Matrix r =
          gaussian_correlation(nodes.points().middleRows(static_cast<Eigen::Index>(b), rows), d.points(), theta);
      const Matrix v = L.triangularView<Eigen::Lower>().solve(r.transpose());
      double acc = 0.0;
      for (Eigen::Index k = 0; k < rows; ++k) {
        const double rad = 1.0 - v.col(k).squaredNorm();
        if (rad < -kRadicandSlack) bad = true;
        acc += std::sqrt(std::max(rad, 0.0));
      }
      return acc;
    });
    if (!bad) {
      if (nugget_used) *nugget_used = nugget;
      return total / static_cast<double>(M);
    }
    if (nugget >= kMaxNugget) throw Error("negative predictive variance: ill-conditioned model");
    nugget = std::max(1e-8, nugget * 10.0);
  }
}

Matrix irmse_table(const std::vector<Design>& pool, const std::vector<Vector>& thetas, const SampleBatch& nodes) {
  if (pool.empty()) throw InputError("empty design pool");
  if (thetas.empty()) throw InputError("empty scale grid");
  Matrix out(static_cast<Eigen::Index>(pool.size()), static_cast<Eigen::Index>(thetas.size()));
  std::vector<double> used(pool.size());
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    const auto c = static_cast<Eigen::Index>(t);
    for (std::size_t k = 0; k < pool.size(); ++k) out(static_cast<Eigen::Index>(k), c) = irmse(pool[k], thetas[t], nodes, 0.0, &used[k]);
    // One nugget for the whole column so the ratios compare like with like.
    const double common = *std::max_element(used.begin(), used.end());
    for (std::size_t k = 0; k < pool.size(); ++k) {
      if (used[k] < common) out(static_cast<Eigen::Index>(k), c) = irmse(pool[k], thetas[t], nodes, common);
    }
  }
  return out;
}

Vector efficiency_from_irmse(const Matrix& table) {
  if (table.rows() == 0 || table.cols() == 0) throw InputError("empty IRMSE table");
  const Eigen::RowVectorXd best = table.colwise().minCoeff();
  Vector eff(table.rows());
  for (Eigen::Index k = 0; k < table.rows(); ++k) {
    double worst = 1.0;
    for (Eigen::Index t = 0; t < table.cols(); ++t) {
      const double ratio = table(k, t) > 0.0 ? best[t] / table(k, t) : 1.0;
      worst = std::min(worst, ratio);
    }
    eff[k] = worst;
  }
  return eff;
}

double efficiency(const Design& d, const std::vector<Design>& pool, const std::vector<Vector>& thetas,
                  const SampleBatch& nodes) {
  std::vector<Design> all{d};
  for (const auto& c : pool) {
    if (c.points() != d.points()) all.push_back(c);
  }
  return efficiency_from_irmse(irmse_table(all, thetas, nodes))[0];
}

double prediction_error(const Design& d, const ResponseFunction& f, const SampleBatch& nodes, bool mle,
                        const Vector& theta, const MleOptions& opts) {
  Vector y(d.n());
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    y[i] = f({d.points().data() + i * d.p(), static_cast<std::size_t>(d.p())});
  }
  const GpModel m = mle ? gp_fit_mle(d, y, opts) : gp_fit(d, y, theta, opts.nugget);
  const auto [mean, rmse] = gp_predict(m, nodes.points());
  double err = 0.0;
  for (Eigen::Index k = 0; k < nodes.size(); ++k) {
    err += std::abs(f({nodes.points().data() + k * nodes.p(), static_cast<std::size_t>(nodes.p())}) - mean[k]);
  }
  return err / static_cast<double>(nodes.size());
}

Vector eff_tilde_from_errors(const Vector& errors) {
  if (errors.size() == 0) throw InputError("empty design pool");
  const double best = errors.minCoeff();
  Vector out(errors.size());
  for (Eigen::Index k = 0; k < errors.size(); ++k) out[k] = errors[k] == 0.0 ? 1.0 : best / errors[k];
  return out;
}

double eff_tilde(const Design& d, const std::vector<Design>& pool, const ResponseFunction& f, bool mle,
                 const SampleBatch& nodes, const MleOptions& opts) {
  std::vector<double> errs{prediction_error(d, f, nodes, mle, {}, opts)};
  for (const auto& c : pool) {
    if (c.points() != d.points()) errs.push_back(prediction_error(c, f, nodes, mle, {}, opts));
  }
  return eff_tilde_from_errors(Eigen::Map<const Vector>(errs.data(), static_cast<Eigen::Index>(errs.size())))[0];
}

}  // namespace spd
