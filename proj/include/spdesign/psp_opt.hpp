#pragma once

#include "spdesign/core.hpp"
#include "spdesign/opt_trace.hpp"
#include "spdesign/sampling.hpp"

namespace spd {

enum class PspStep { guarded_gradient, closed_form_mm };

struct PspConfig {
  /// Batch size per visit; 0 selects max(2048, 25 n).
  Eigen::Index batch_size = 0;
  Eigen::Index prior_draws = 128;
  PriorKind prior = PriorKind::pod;
  /// Rate of the exponential prior.
  double lambda = 1.0;
  /// POD interaction-order cap (clipped to p).
  int max_order = 2;
  BatchSource source = BatchSource::randomized_sobol;
  int max_sweeps = 300;
  /// Movement tolerance; 0 selects 1e-6 sqrt(p).
  double tol = 0.0;
  double eps = 1e-10;
  PspStep step = PspStep::guarded_gradient;
  /// Samples behind the final never-worse-than-init guard.
  Eigen::Index eval_batch_size = 2048;
  Eigen::Index eval_prior_draws = 128;
  RngConfig rng{};

  [[nodiscard]] Eigen::Index resolved_batch_size(Eigen::Index n) const;
  [[nodiscard]] double resolved_tol(Eigen::Index p) const;
};

/// Prior draws for the configured prior.
PriorDrawBatch draw_psp_priors(const PspConfig& cfg, Eigen::Index p, Eigen::Index R, const RngConfig& rng);

/// g_i(x) = -(2/(N R)) sum_{m,r} gamma_r(x, y_m)
///          + (1/(n R)) sum_r [1 + 2 sum_{j != i} gamma_r(x, x_j)].
/// A non-empty grad receives the gradient.
double psp_point_objective(std::span<const double> x, Eigen::Index i, const Design& current,
                           const SampleBatch& batch, const PriorDrawBatch& priors, std::span<double> grad = {});

struct PspPointUpdate {
  Vector point;
  bool flagged = false;
  double before = 0.0;
  double after = 0.0;
};

/// One descent step on g_i from the current x_i (other points, batch and
/// priors held fixed), clamped to [0,1]^p. Never increases g_i; when no
/// acceptable step is found x_i is returned unchanged and flagged.
PspPointUpdate psp_update_point(Eigen::Index i, const Design& current, const SampleBatch& batch,
                                const PriorDrawBatch& priors, const PspConfig& cfg);

/// Gauss-Seidel sweeps i = 1..n, fresh batch and prior draws per visit.
/// Returns init instead when the result is worse on fixed evaluation samples.
std::pair<Design, OptTrace> psp_optimize(const Design& init, const PspConfig& cfg);

}  // namespace spd
