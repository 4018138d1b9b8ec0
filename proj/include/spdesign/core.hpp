#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace spd {

/// Row-major so that each design point / sample is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Runtime failure (I/O, numerical breakdown).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments or malformed input data.
class InputError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Random number streams
// ---------------------------------------------------------------------------

/// Identifies one reproducible random stream. Identical (seed, stream) pairs
/// always produce identical draw sequences.
struct RngConfig {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  /// Child stream for a sub-task (sweep, visit, worker, ...). Children of
  /// distinct tags are independent of each other and of the parent.
  [[nodiscard]] RngConfig derive(std::uint64_t tag) const;

  friend bool operator==(const RngConfig&, const RngConfig&) = default;
};

/// Counter-based generator: the k-th output is a fixed bijective hash of
/// (key, k), where key is derived from the RngConfig. Satisfies
/// UniformRandomBitGenerator so it can drive <random> distributions.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(const RngConfig& cfg);

  result_type operator()() { return draw(counter_++); }
  [[nodiscard]] result_type draw(std::uint64_t counter) const;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double normal();

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Draws a fresh 64-bit seed from system entropy.
std::uint64_t entropy_seed();

// ---------------------------------------------------------------------------
// Designs and sample batches
// ---------------------------------------------------------------------------

/// An n x p point set in [0,1]^p with free-text provenance.
///
/// Invariants (checked on construction): n >= 1, p >= 1, every coordinate is
/// finite and in [0,1], and no two rows are exactly equal.
class Design {
 public:
  explicit Design(Matrix points, std::string label = {});

  [[nodiscard]] Eigen::Index n() const { return points_.rows(); }
  [[nodiscard]] Eigen::Index p() const { return points_.cols(); }
  [[nodiscard]] const Matrix& points() const { return points_; }
  [[nodiscard]] auto row(Eigen::Index i) const { return points_.row(i); }
  [[nodiscard]] const std::string& label() const { return label_; }

  [[nodiscard]] Design with_label(std::string label) const { return Design(*this, std::move(label)); }

 private:
  Design(const Design& other, std::string label) : points_(other.points_), label_(std::move(label)) {}

  Matrix points_;
  std::string label_;
};

enum class BatchSource {
  monte_carlo,
  randomized_sobol,
  /// Deterministic quadrature nodes standing in for the target measure
  /// exactly (equal weights); pair terms use the V-statistic.
  quadrature,
};

const char* to_string(BatchSource s);

/// N x p sample approximating F = U[0,1]^p.
class SampleBatch {
 public:
  SampleBatch(Matrix points, BatchSource source, std::uint64_t seed = 0);

  [[nodiscard]] Eigen::Index size() const { return points_.rows(); }
  [[nodiscard]] Eigen::Index p() const { return points_.cols(); }
  [[nodiscard]] const Matrix& points() const { return points_; }
  [[nodiscard]] BatchSource source() const { return source_; }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }

 private:
  Matrix points_;
  BatchSource source_;
  std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Kernel specification
// ---------------------------------------------------------------------------

enum class KernelVariant {
  /// r(x,y) proportional to |x| + |y| - |x-y|
  distance,
  /// exp(-sum_l theta_l (x_l - y_l)^2)
  gaussian_aniso,
  /// generalized Gaussian kernel with product-and-order subset weights
  pod,
};

struct KernelSpec {
  KernelVariant variant = KernelVariant::pod;
  Eigen::Index p = 1;
  /// Per-dimension scales for gaussian_aniso.
  Vector theta;
  /// Largest subset size |u| carried in the POD subset sum.
  int max_order = 2;
  /// Gamma(shape, scale) prior on the POD product weights.
  double pod_shape = 0.1;
  double pod_scale = 1.0;

  static KernelSpec distance(Eigen::Index p);
  static KernelSpec gaussian(Vector theta);
  static KernelSpec pod_prior(Eigen::Index p, int max_order = 2);

  /// Order weight p^{-1/4} (k!)^{-1/2}.
  [[nodiscard]] double order_weight(int k) const;

  /// Throws InputError when an invariant is violated.
  void validate() const;
};

// ---------------------------------------------------------------------------
// CSV design I/O
// ---------------------------------------------------------------------------

/// Reads one point per row, p numeric columns, optional header row.
Design load_design(const std::filesystem::path& path);
Design parse_design_csv(const std::string& text, std::string label = {});

/// Writes header "x1,...,xp" and 17-significant-digit coordinates.
void save_design(const Design& d, const std::filesystem::path& path);
std::string format_design_csv(const Design& d);

/// Shortest round-trip decimal text for a double, at most 17 significant digits.
std::string format_double(double v);

}  // namespace spd
