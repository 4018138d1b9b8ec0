#pragma once

#include "spdesign/core.hpp"
#include "spdesign/opt_trace.hpp"

namespace spd {

struct SpConfig {
  /// Batch size per sweep; 0 selects max(4096, 50 n).
  Eigen::Index batch_size = 0;
  BatchSource source = BatchSource::randomized_sobol;
  int max_sweeps = 500;
  /// Fixed-batch sweeps allowed after the resampling phase.
  int max_polish_sweeps = 2000;
  /// Movement tolerance; 0 selects 1e-6 sqrt(p).
  double tol = 0.0;
  double eps = 1e-10;
  RngConfig rng{};

  [[nodiscard]] Eigen::Index resolved_batch_size(Eigen::Index n) const;
  [[nodiscard]] double resolved_tol(Eigen::Index p) const;
};

struct PointUpdate {
  Vector point;
  bool flagged = false;
};

/// One majorization step for point i, all distances taken at the snapshot:
///   x+ = [sum_m y_m/d_im + (N/n) sum_{j != i} (x_i - x_j)/|x_i - x_j|] / sum_m 1/d_im,
/// terms with distance below eps dropped, result clamped to [0,1]^p.
PointUpdate sp_update_point(Eigen::Index i, const Design& snapshot, const SampleBatch& batch, double eps);

/// (2/n) sum_i mean_m |x_i - y_m| - (1/n^2) sum_{i,j} |x_i - x_j|: the
/// design-dependent part of the sampled energy distance.
double sp_sampled_objective(const Design& d, const SampleBatch& batch);

/// Jacobi sweeps with a fresh batch per sweep, then sweeps on one fixed batch
/// until the largest movement drops below tol. The result is never worse than
/// init on the fixed batch (otherwise init is returned and trace.reverted set).
/// An init that is already a fixed point of the polish sweep is returned as is.
std::pair<Design, OptTrace> sp_optimize(const Design& init, const SpConfig& cfg);

}  // namespace spd
