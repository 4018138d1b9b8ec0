#pragma once

#include <string>
#include <utility>
#include <vector>

#include "spdesign/core.hpp"

namespace spd {

/// Smallest pairwise distance (n >= 2).
double maximin(const Design& d);

/// Largest distance from a candidate to its nearest design point. With
/// refine, a simplex walk starting at the best candidate may raise the value.
double minimax_fill(const Design& d, const SampleBatch& candidates, bool refine = false);

struct ProjectedIndex {
  double value = 0.0;
  /// Some evaluated projection had coincident points (value forced to 0).
  bool degenerate = false;
  long long subsets_total = 0;  // C(p, l), saturating
  long long subsets_evaluated = 0;
  long long candidates = 0;     // per subset, mM_l only
};

struct ProjectionOptions {
  Eigen::Index candidates = 1 << 14;
  long long subset_cap = 10000;
  bool refine = true;
};

/// mM_l: max over size-l coordinate subsets u of
///   sup_x {(1/n) sum_i |x - P_u x_i|^{-2l}}^{-1/(2l)},
/// the sup taken over Sobol candidates in [0,1]^l plus a simplex refinement.
ProjectedIndex projected_minimax_index(const Design& d, int l, const RngConfig& rng, const ProjectionOptions& opts = {});

/// Mm_l: min over size-l subsets u of
///   {(1/C(n,2)) sum_{i<j} |P_u x_i - P_u x_j|^{-2l}}^{-1/(2l)}.
ProjectedIndex projected_maximin_index(const Design& d, int l, const RngConfig& rng, long long subset_cap = 10000);

/// sum_{i<j} 1 / prod_l ((x_il - x_jl)^2 + lambda). Infinite when lambda = 0
/// and some pair ties in a coordinate.
double maxpro_criterion(const Design& d, double lambda);

/// atan(x / sqrt(lambda)) + atan((1 - x) / sqrt(lambda)).
double phi_correction(double x, double lambda);

/// MaxPro(D; lambda) - (n / lambda^{p/2}) sum_i prod_l phi(x_il; lambda) + n / (2 lambda^p).
/// Times 2 lambda^p / n^2 this equals the prior-averaged kernel criterion
/// under theta_l ~ Exp(lambda) with first-order subsets.
double psp_closed_form(const Design& d, double lambda);

/// The size-l coordinate subsets visited by the projected indices: all of
/// them in lexicographic order when C(p, l) <= cap, else cap uniform draws.
std::vector<std::vector<Eigen::Index>> coordinate_subsets(Eigen::Index p, int l, long long cap, const RngConfig& rng);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct MetricEntry {
  std::string metric;
  double value = 0.0;
  std::vector<std::pair<std::string, double>> meta;
};

struct MetricOptions {
  /// Sobol evaluation batch for energy / q-energy.
  Eigen::Index energy_batch = 1 << 16;
  /// Sobol candidates for minimax.
  Eigen::Index minimax_candidates = 1 << 16;
  ProjectionOptions projection{};
};

/// Evaluates metric names of the forms energy, qenergy:Q, cl2, maximin,
/// minimax, mml:L (projected minimax index, alias mM:L), mmL:L (projected
/// maximin index, alias Mm:L), maxpro:LAMBDA. Unknown names throw InputError.
std::vector<MetricEntry> evaluate_metrics(const Design& d, const std::vector<std::string>& names,
                                          const RngConfig& rng, const MetricOptions& opts = {});

/// Checks a metric name without evaluating it.
void validate_metric_name(const std::string& name);

}  // namespace spd
