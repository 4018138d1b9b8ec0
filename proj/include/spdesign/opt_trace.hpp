#pragma once

#include <string>
#include <vector>

namespace spd {

/// Per-sweep record of an optimizer run.
struct OptTrace {
  std::string method;
  /// SP: sampled objective at the start of each sweep, on that sweep's batch.
  /// PSP: mean over visits of the point objective before the step, each on
  /// its own visit samples.
  std::vector<double> objective;
  /// Largest coordinate-wise point movement (Euclidean) in each sweep.
  std::vector<double> movement;
  /// Number of point updates flagged in each sweep (empty denominator,
  /// exhausted backtracking).
  std::vector<int> flagged;
  /// Index of the first sweep run on a fixed batch (SP polish), or -1.
  int polish_start = -1;
  int sweeps = 0;
  bool converged = false;
  /// True when the final guard rejected the iterate and returned the start.
  bool reverted = false;
  /// Criterion on the fixed evaluation samples, before and after.
  double eval_initial = 0.0;
  double eval_final = 0.0;
  double seconds = 0.0;

  [[nodiscard]] std::string to_json() const;
};

}  // namespace spd
