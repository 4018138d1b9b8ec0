#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "spdesign/core.hpp"

namespace spd {

/// exp(-sum_l theta_l (x_l - y_l)^2) between the rows of a and b.
Matrix gaussian_correlation(const Matrix& a, const Matrix& b, const Vector& theta);

/// Lower Cholesky factor of R + nugget I. The nugget starts at the requested
/// value and, on failure, walks the ladder 1e-8, 1e-7, ..., 1e-4; the nugget
/// actually used is written back. Throws Error when the ladder is exhausted.
Matrix factor_correlation(const Matrix& R, double& nugget);

class GpModel {
 public:
  GpModel(Design design, Vector responses, Vector theta, double nugget, std::optional<double> mu = std::nullopt,
          std::optional<double> sigma2 = std::nullopt);

  [[nodiscard]] const Design& design() const { return design_; }
  [[nodiscard]] const Vector& responses() const { return responses_; }
  [[nodiscard]] const Vector& theta() const { return theta_; }
  [[nodiscard]] double mu() const { return mu_; }
  [[nodiscard]] double sigma2() const { return sigma2_; }
  [[nodiscard]] double nugget() const { return nugget_; }
  [[nodiscard]] const Matrix& chol() const { return chol_; }
  /// (R + nugget I)^{-1} (f - mu 1)
  [[nodiscard]] const Vector& alpha() const { return alpha_; }
  /// Profile log-likelihood -(n/2) log sigma2 - (1/2) log|R|.
  [[nodiscard]] double log_likelihood() const { return loglik_; }

 private:
  Design design_;
  Vector responses_;
  Vector theta_;
  double mu_ = 0.0;
  double sigma2_ = 0.0;
  double nugget_ = 0.0;
  Matrix chol_;
  Vector alpha_;
  double loglik_ = 0.0;
};

struct MleOptions {
  double theta_min = 1e-2;
  double theta_max = 1e2;
  int starts = 5;
  int max_iterations = 100;
  double nugget = 1e-8;
  RngConfig rng{};
};

/// GP with the given correlation scales; mu by generalized least squares and
/// sigma2 = (f - mu 1)' R^{-1} (f - mu 1) / n unless supplied.
GpModel gp_fit(const Design& d, const Vector& responses, const Vector& theta, double nugget = 0.0);

/// Scales by maximum profile likelihood over [theta_min, theta_max]^p:
/// projected gradient ascent in log theta from Sobol starting points.
GpModel gp_fit_mle(const Design& d, const Vector& responses, const MleOptions& opts = {});

/// Profile log-likelihood at theta and, when grad is non-null, its gradient
/// with respect to theta. Returns -inf when the correlation matrix cannot be
/// factored.
double profile_log_likelihood(const Design& d, const Vector& responses, const Vector& theta, double nugget,
                              Vector* grad = nullptr);

struct Prediction {
  double mean = 0.0;
  double rmse = 0.0;
};

/// mu + r' R^{-1} (f - mu 1) and sigma sqrt(1 - r' R^{-1} r); the radicand is
/// clamped at 0 when it is above -1e-10, otherwise Error is thrown.
Prediction gp_predict(const GpModel& m, std::span<const double> x);
std::pair<Vector, Vector> gp_predict(const GpModel& m, const Matrix& x);

/// Mean over the nodes of sqrt(1 - r' R^{-1} r) (sigma = 1). Scales may be 0
/// for inert inputs. When rounding drives a radicand below -1e-10 the
/// nugget moves up the ladder and the integral is recomputed.
double irmse(const Design& d, const Vector& theta, const SampleBatch& nodes, double nugget = 0.0,
             double* nugget_used = nullptr);

/// IRMSE of each design (rows) at each theta (columns). Within a column all
/// designs use the largest nugget any of them needed.
Matrix irmse_table(const std::vector<Design>& pool, const std::vector<Vector>& thetas, const SampleBatch& nodes);

/// min over theta of (pool minimum IRMSE) / IRMSE(pool[k]) for every k.
Vector efficiency_from_irmse(const Matrix& irmse);

/// Eff of d against a pool that must contain it.
double efficiency(const Design& d, const std::vector<Design>& pool, const std::vector<Vector>& thetas,
                  const SampleBatch& nodes);

using ResponseFunction = std::function<double(std::span<const double>)>;

/// Mean absolute prediction error over the nodes of a GP fitted to f at the
/// design points (profile-likelihood scales when mle, else theta).
double prediction_error(const Design& d, const ResponseFunction& f, const SampleBatch& nodes, bool mle,
                        const Vector& theta = {}, const MleOptions& opts = {});

/// (pool minimum error) / error(pool[k]); 0/0 counts as 1.
Vector eff_tilde_from_errors(const Vector& errors);

double eff_tilde(const Design& d, const std::vector<Design>& pool, const ResponseFunction& f, bool mle,
                 const SampleBatch& nodes, const MleOptions& opts = {});

// ---------------------------------------------------------------------------
// Fractional Brownian motion
// ---------------------------------------------------------------------------

struct FbmSpec {
  double q = 1.0;
  double sigma2 = 1.0;
  Matrix grid;
};

/// Paths (rows) of the zero-mean Gaussian field with covariance
/// (sigma2/2)(|x|^q + |y|^q - |x - y|^q) at the grid points (columns); rows of
/// the grid at the origin are exactly 0 on every path.
Matrix fbm_simulate(const FbmSpec& spec, Eigen::Index paths, const RngConfig& rng);

struct IntegrationMoment {
  double mean_sq_error = 0.0;  // E[I^2] estimate
  double std_error = 0.0;
  double reference = 0.0;      // (sigma2/2) q-energy(grid measure, design)
  [[nodiscard]] double ratio() const { return mean_sq_error / reference; }
};

/// Simulates paths on grid U design, takes I = grid mean - design mean for
/// each path and compares E[I^2] with (sigma2/2) times the q-energy distance
/// between the grid measure and the design.
IntegrationMoment fbm_integration_error_moment(const Design& d, const FbmSpec& spec, Eigen::Index paths,
                                               const RngConfig& rng);

}  // namespace spd
