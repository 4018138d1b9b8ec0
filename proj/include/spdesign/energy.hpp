#pragma once

#include <span>

#include "spdesign/core.hpp"
#include "spdesign/sampling.hpp"

namespace spd {

struct EnergyEstimate {
  double value = 0.0;
  /// Delta-method standard error of the batch estimate; 0 on analytic paths
  /// and for quadrature batches.
  double std_error = 0.0;
  /// Batch size behind the E|x - Y| terms (0 on analytic paths).
  Eigen::Index N = 0;
};

/// Energy distance between U[0,1]^p (represented by the batch) and the
/// empirical distribution of the design. All three terms are included; the
/// E|Y - Y'| term is a U-statistic over batch pairs (random subsample of 10^6
/// pairs for large batches), or a V-statistic for quadrature batches.
EnergyEstimate energy_distance(const Design& d, const SampleBatch& batch);

/// Same with |.|^q in place of |.|, 0 < q <= 2.
EnergyEstimate q_energy_distance(const Design& d, const SampleBatch& batch, double q);

/// Exact energy distance between U[0,1] and the empirical distribution of
/// the points, using E|x - Y|^q = (x^{q+1} + (1-x)^{q+1})/(q+1) and
/// E|Y - Y'|^q = 2/((q+1)(q+2)). Duplicated points are allowed.
double energy_distance_1d(std::span<const double> x);
double q_energy_distance_1d(std::span<const double> x, double q);

/// Exact 1-d energy distance of every coordinate projection.
Vector projected_energy_1d(const Design& d);

/// Sum over all design pairs of the projected kernel
///   r_G(x,y) = r(x,y) - E r(x,Y) - E r(Y,y) + E r(Y,Y'),
///   r(x,y) = (sigma2/2)(|x| + |y| - |x - y|),
/// with the expectations taken over the batch.
double projected_kernel_sum(const Design& d, const SampleBatch& batch, double sigma2 = 1.0);

/// Centered L2 discrepancy (squared), exact closed form.
double cl2_discrepancy(const Design& d);

// ---------------------------------------------------------------------------
// Prior-averaged Gaussian kernel criterion
// ---------------------------------------------------------------------------

/// (1/(M R)) sum_m sum_r exp(-sum_l w_rl (x_l - y_ml)^2) over the rows y_m of
/// pts and the rows w_r of weights. A non-empty grad receives the gradient
/// with respect to x; a non-empty weighted receives
/// (1/(M R)) sum_{m,r} gamma_mr w_rl for each l.
double mean_gaussian_kernel(std::span<const double> x, const Matrix& pts, const Matrix& weights,
                            std::span<double> grad = {}, std::span<double> weighted = {});

/// -(2/n) sum_i E_{Y,theta} gamma(x_i, Y) + (1/n^2) sum_{i,j} E_theta gamma(x_i, x_j)
/// with the expectations replaced by averages over batch x priors.
double psp_objective(const Design& d, const SampleBatch& batch, const PriorDrawBatch& priors);

/// The same criterion under theta_l ~ i.i.d. Exp(lambda), first-order subsets
/// only, with the theta expectation done analytically:
/// E exp(-theta t) = lambda / (lambda + t). Y is still averaged over the batch.
double psp_objective_exp(const Design& d, const SampleBatch& batch, double lambda);

}  // namespace spd
