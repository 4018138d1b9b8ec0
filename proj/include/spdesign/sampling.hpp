#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "spdesign/core.hpp"

namespace spd {

/// Sobol' points from the Joe-Kuo direction numbers, 32-bit resolution,
/// generated in Gray-code order (the first 2^k points coincide with the
/// first 2^k points in natural order).
class SobolGenerator {
 public:
  static constexpr int kBits = 32;

  explicit SobolGenerator(Eigen::Index p);

  static Eigen::Index max_dimension();

  [[nodiscard]] Eigen::Index p() const { return p_; }

  /// Integer digits of the first n points, row-major n x p.
  [[nodiscard]] std::vector<std::uint32_t> integers(Eigen::Index n) const;

 private:
  Eigen::Index p_;
  std::vector<std::uint32_t> directions_;  // p x kBits
};

/// I.i.d. U[0,1]^p draws.
SampleBatch sample_uniform(Eigen::Index n, Eigen::Index p, const RngConfig& rng);

/// First n points of a Sobol' sequence with a random digital shift. The shift
/// covers all binary digits (the 32 generator digits are XOR-ed with random
/// bits and the digits below 2^-32 are filled with random bits), so every
/// dyadic stratum of the unshifted sequence is preserved.
SampleBatch sample_sobol(Eigen::Index n, Eigen::Index p, const RngConfig& rng);

SampleBatch sample_batch(BatchSource source, Eigen::Index n, Eigen::Index p, const RngConfig& rng);

// ---------------------------------------------------------------------------
// Kernel-scale prior draws
// ---------------------------------------------------------------------------

enum class PriorKind { pod, exponential, fixed };

/// R draws of product weights theta in R_+^p, together with the per-dimension
/// exponent weights w such that
///     sum_{u, |u| <= K} theta_u |x_u - y_u|^2 = sum_l w_l (x_l - y_l)^2.
/// Under POD, theta_u = Gamma_|u| prod_{l in u} theta_l and
///     w_l = theta_l sum_{k=1}^{K} Gamma_k e_{k-1}(theta_{-l})
/// with e_j the elementary symmetric polynomial. Under the exponential
/// prior only singleton subsets are active, so w = theta.
class PriorDrawBatch {
 public:
  /// Draws used verbatim as exponent weights (entries must be >= 0).
  static PriorDrawBatch fixed(Matrix exponent_weights);

  PriorDrawBatch(PriorKind kind, Matrix product_weights, const KernelSpec& spec);

  [[nodiscard]] PriorKind kind() const { return kind_; }
  [[nodiscard]] Eigen::Index size() const { return product_.rows(); }
  [[nodiscard]] Eigen::Index p() const { return product_.cols(); }
  [[nodiscard]] const Matrix& product_weights() const { return product_; }
  [[nodiscard]] const Matrix& exponent_weights() const { return exponent_; }
  [[nodiscard]] int max_order() const { return max_order_; }

  /// theta_u for draw r; zero when |u| exceeds the interaction cap.
  [[nodiscard]] double subset_weight(Eigen::Index r, std::span<const Eigen::Index> subset) const;

 private:
  PriorDrawBatch() = default;

  PriorKind kind_ = PriorKind::fixed;
  Matrix product_;
  Matrix exponent_;
  int max_order_ = 1;
  std::vector<double> order_weights_;  // Gamma_1 .. Gamma_K
};

/// theta_l ~ i.i.d. Gamma(spec.pod_shape, spec.pod_scale).
PriorDrawBatch sample_pod_prior(const KernelSpec& spec, Eigen::Index R, const RngConfig& rng);

/// theta_l ~ i.i.d. Exp(lambda) (rate lambda).
PriorDrawBatch sample_exp_prior(double lambda, Eigen::Index p, Eigen::Index R, const RngConfig& rng);

// ---------------------------------------------------------------------------
// Baseline designs
// ---------------------------------------------------------------------------

enum class BaselineKind { random, sobol, maximin_lhd, chebyshev_1d };

const char* to_string(BaselineKind k);
BaselineKind parse_baseline_kind(std::string_view name);

struct LhdAnnealing {
  int proposals = 10000;
  int cooling_interval = 100;
  double cooling_factor = 0.95;
  double initial_temperature = 0.1;
  /// Exponent of the Morris-Mitchell surrogate driving the walk.
  double phi_power = 15.0;
};

/// Latin hypercube with each column a random permutation of the midpoints
/// (2i-1)/(2n).
Design random_lhd(Eigen::Index n, Eigen::Index p, const RngConfig& rng);

/// Improves an LHD by annealed within-column swaps. The walk follows the
/// Morris-Mitchell phi_p surrogate; the returned incumbent is the best visited
/// design under the exact maximin distance, so Mm(result) >= Mm(start).
Design maximin_lhd(const Design& start, const RngConfig& rng, const LhdAnnealing& opts = {});

/// Zeros of the degree-n Chebyshev polynomial mapped to [0,1], ascending.
Design chebyshev_nodes(Eigen::Index n);

Design baseline_design(BaselineKind kind, Eigen::Index n, Eigen::Index p, const RngConfig& rng);

}  // namespace spd
