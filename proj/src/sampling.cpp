#include "spdesign/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace spd {

SampleBatch sample_uniform(Eigen::Index n, Eigen::Index p, const RngConfig& rng) {
  if (n < 1 || p < 1) throw InputError("sample_uniform requires n, p >= 1");
  Rng gen(rng);
  Matrix pts(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index l = 0; l < p; ++l) pts(i, l) = gen.uniform();
  }
  return SampleBatch(std::move(pts), BatchSource::monte_carlo, rng.seed);
}

SampleBatch sample_sobol(Eigen::Index n, Eigen::Index p, const RngConfig& rng) {
  if (n < 1 || p < 1) throw InputError("sample_sobol requires n, p >= 1");
  const SobolGenerator sobol(p);
  const auto digits = sobol.integers(n);
  Rng gen(rng);
  std::vector<std::uint32_t> shift(static_cast<std::size_t>(p));
  for (auto& s : shift) s = static_cast<std::uint32_t>(gen() >> 32);

  Matrix pts(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index l = 0; l < p; ++l) {
      const std::uint32_t high = digits[static_cast<std::size_t>(i * p + l)] ^ shift[static_cast<std::size_t>(l)];
      // Random digits below 2^-32 complete the shift; the sum stays inside the
      // same 2^-32 cell, hence inside every coarser dyadic stratum.
      pts(i, l) = (static_cast<double>(high) + gen.uniform()) * 0x1.0p-32;
    }
  }
  return SampleBatch(std::move(pts), BatchSource::randomized_sobol, rng.seed);
}

SampleBatch sample_batch(BatchSource source, Eigen::Index n, Eigen::Index p, const RngConfig& rng) {
  switch (source) {
    case BatchSource::monte_carlo: return sample_uniform(n, p, rng);
    case BatchSource::randomized_sobol: return sample_sobol(n, p, rng);
    case BatchSource::quadrature: break;
  }
  throw InputError("quadrature batches are not sampled");
}

// ---------------------------------------------------------------------------

PriorDrawBatch PriorDrawBatch::fixed(Matrix exponent_weights) {
  if ((exponent_weights.array() < 0.0).any() || !exponent_weights.allFinite()) {
    throw InputError("fixed prior weights must be finite and non-negative");
  }
  PriorDrawBatch b;
  b.kind_ = PriorKind::fixed;
  b.product_ = exponent_weights;
  b.exponent_ = std::move(exponent_weights);
  b.max_order_ = 1;
  b.order_weights_ = {1.0};
  return b;
}

PriorDrawBatch::PriorDrawBatch(PriorKind kind, Matrix product_weights, const KernelSpec& spec)
    : kind_(kind), product_(std::move(product_weights)) {
  const Eigen::Index R = product_.rows();
  const Eigen::Index p = product_.cols();
  if ((product_.array() <= 0.0).any()) throw InputError("prior draws must be strictly positive");

  if (kind_ != PriorKind::pod) {
    max_order_ = 1;
    order_weights_ = {1.0};
    exponent_ = product_;
    return;
  }

  max_order_ = spec.max_order;
  for (int k = 1; k <= max_order_; ++k) order_weights_.push_back(spec.order_weight(k));

  exponent_.resize(R, p);
  std::vector<double> e(static_cast<std::size_t>(max_order_));
  for (Eigen::Index r = 0; r < R; ++r) {
    for (Eigen::Index l = 0; l < p; ++l) {
      // e[j] = e_j(theta_{-l}) for j < K, built incrementally.
      std::fill(e.begin(), e.end(), 0.0);
      e[0] = 1.0;
      for (Eigen::Index m = 0; m < p; ++m) {
        if (m == l) continue;
        for (int j = max_order_ - 1; j >= 1; --j) e[static_cast<std::size_t>(j)] += product_(r, m) * e[static_cast<std::size_t>(j - 1)];
      }
      double acc = 0.0;
      for (int k = 1; k <= max_order_; ++k) acc += order_weights_[static_cast<std::size_t>(k - 1)] * e[static_cast<std::size_t>(k - 1)];
      exponent_(r, l) = product_(r, l) * acc;
    }
  }
}

double PriorDrawBatch::subset_weight(Eigen::Index r, std::span<const Eigen::Index> subset) const {
  const auto k = static_cast<int>(subset.size());
  if (k == 0 || k > max_order_) return 0.0;
  double w = order_weights_[static_cast<std::size_t>(k - 1)];
  for (auto l : subset) w *= product_(r, l);
  return w;
}

PriorDrawBatch sample_pod_prior(const KernelSpec& spec, Eigen::Index R, const RngConfig& rng) {
  if (spec.variant != KernelVariant::pod) throw InputError("sample_pod_prior requires a POD kernel spec");
  spec.validate();
  if (R < 1) throw InputError("prior batch size must be >= 1");
  Rng gen(rng);
  std::gamma_distribution<double> gamma(spec.pod_shape, spec.pod_scale);
  Matrix theta(R, spec.p);
  for (Eigen::Index r = 0; r < R; ++r) {
    for (Eigen::Index l = 0; l < spec.p; ++l) {
      double v = 0.0;
      while (!(v > 0.0)) v = gamma(gen);
      theta(r, l) = v;
    }
  }
  return PriorDrawBatch(PriorKind::pod, std::move(theta), spec);
}

PriorDrawBatch sample_exp_prior(double lambda, Eigen::Index p, Eigen::Index R, const RngConfig& rng) {
  if (!(lambda > 0.0)) throw InputError("exponential prior rate must be positive");
  if (R < 1 || p < 1) throw InputError("prior batch size and dimension must be >= 1");
  Rng gen(rng);
  std::exponential_distribution<double> expo(lambda);
  Matrix theta(R, p);
  for (Eigen::Index r = 0; r < R; ++r) {
    for (Eigen::Index l = 0; l < p; ++l) {
      double v = 0.0;
      while (!(v > 0.0)) v = expo(gen);
      theta(r, l) = v;
    }
  }
  return PriorDrawBatch(PriorKind::exponential, std::move(theta), KernelSpec::distance(p));
}

// ---------------------------------------------------------------------------

const char* to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::random: return "random";
    case BaselineKind::sobol: return "sobol";
    case BaselineKind::maximin_lhd: return "maximin-lhd";
    case BaselineKind::chebyshev_1d: return "chebyshev-1d";
  }
  return "?";
}

BaselineKind parse_baseline_kind(std::string_view name) {
  if (name == "random") return BaselineKind::random;
  if (name == "sobol") return BaselineKind::sobol;
  if (name == "maximin-lhd") return BaselineKind::maximin_lhd;
  if (name == "chebyshev-1d") return BaselineKind::chebyshev_1d;
  throw InputError("unknown baseline design kind: " + std::string(name));
}

Design random_lhd(Eigen::Index n, Eigen::Index p, const RngConfig& rng) {
  if (n < 1 || p < 1) throw InputError("LHD requires n, p >= 1");
  Rng gen(rng);
  Matrix pts(n, p);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (Eigen::Index l = 0; l < p; ++l) {
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::shuffle(perm.begin(), perm.end(), gen);
    for (Eigen::Index i = 0; i < n; ++i) {
      pts(i, l) = (static_cast<double>(perm[static_cast<std::size_t>(i)]) + 0.5) / static_cast<double>(n);
    }
  }
  return Design(std::move(pts), "random-lhd");
}

namespace {

double min_offdiag(const Matrix& d2) {
  double m = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < d2.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < d2.cols(); ++j) m = std::min(m, d2(i, j));
  }
  return m;
}

}  // namespace

Design maximin_lhd(const Design& start, const RngConfig& rng, const LhdAnnealing& opts) {
  const Eigen::Index n = start.n();
  const Eigen::Index p = start.p();
  if (n < 2) return start.with_label("maximin-lhd");

  Matrix x = start.points();
  Matrix d2(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d2(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) d2(i, j) = d2(j, i) = (x.row(i) - x.row(j)).squaredNorm();
  }
  const double half_power = opts.phi_power / 2.0;
  const auto phi_sum = [&] {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) s += std::pow(d2(i, j), -half_power);
    }
    return s;
  };

  double sum = phi_sum();
  double best_mm = min_offdiag(d2);
  double best_sum = sum;
  Matrix best = x;

  Rng gen(rng);
  std::uniform_int_distribution<Eigen::Index> pick_row(0, n - 1);
  std::uniform_int_distribution<Eigen::Index> pick_col(0, p - 1);
  double temperature = opts.initial_temperature;
  std::vector<double> new_a(static_cast<std::size_t>(n)), new_b(static_cast<std::size_t>(n));

  for (int t = 1; t <= opts.proposals; ++t) {
    const Eigen::Index a = pick_row(gen);
    Eigen::Index b = pick_row(gen);
    while (b == a) b = pick_row(gen);
    const Eigen::Index l = pick_col(gen);
    const double xa = x(a, l), xb = x(b, l);

    double delta = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == a || k == b) continue;
      const double xk = x(k, l);
      const auto ka = static_cast<std::size_t>(k);
      new_a[ka] = d2(a, k) + (xb - xk) * (xb - xk) - (xa - xk) * (xa - xk);
      new_b[ka] = d2(b, k) + (xa - xk) * (xa - xk) - (xb - xk) * (xb - xk);
      delta += std::pow(new_a[ka], -half_power) - std::pow(d2(a, k), -half_power);
      delta += std::pow(new_b[ka], -half_power) - std::pow(d2(b, k), -half_power);
    }
    const double phi_cur = std::pow(sum, 1.0 / opts.phi_power);
    const double phi_new = std::pow(std::max(sum + delta, 0.0), 1.0 / opts.phi_power);
    const bool accept = phi_new <= phi_cur ||
                        gen.uniform() < std::exp(-(phi_new - phi_cur) / (temperature * phi_cur));
    if (accept) {
      x(a, l) = xb;
      x(b, l) = xa;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (k == a || k == b) continue;
        const auto ka = static_cast<std::size_t>(k);
        d2(a, k) = d2(k, a) = new_a[ka];
        d2(b, k) = d2(k, b) = new_b[ka];
      }
      sum += delta;
      const double mm = min_offdiag(d2);
      if (mm > best_mm || (mm == best_mm && sum < best_sum)) {
        best_mm = mm;
        best_sum = sum;
        best = x;
      }
    }
    if (t % opts.cooling_interval == 0) {
      temperature *= opts.cooling_factor;
      sum = phi_sum();  // limit drift of the running sum
    }
  }
  return Design(std::move(best), "maximin-lhd");
}

Design chebyshev_nodes(Eigen::Index n) {
  if (n < 1) throw InputError("Chebyshev nodes require n >= 1");
  Matrix pts(n, 1);
  for (Eigen::Index i = 1; i <= n; ++i) {
    const double angle = (2.0 * static_cast<double>(i) - 1.0) * std::numbers::pi / (2.0 * static_cast<double>(n));
    pts(n - i, 0) = std::clamp((1.0 + std::cos(angle)) / 2.0, 0.0, 1.0);
  }
  return Design(std::move(pts), "chebyshev-1d");
}

Design baseline_design(BaselineKind kind, Eigen::Index n, Eigen::Index p, const RngConfig& rng) {
  switch (kind) {
    case BaselineKind::random:
      return Design(sample_uniform(n, p, rng).points(), "random seed=" + std::to_string(rng.seed));
    case BaselineKind::sobol:
      return Design(sample_sobol(n, p, rng).points(), "sobol seed=" + std::to_string(rng.seed));
    case BaselineKind::maximin_lhd:
      return maximin_lhd(random_lhd(n, p, rng.derive(0)), rng.derive(1))
          .with_label("maximin-lhd seed=" + std::to_string(rng.seed));
    case BaselineKind::chebyshev_1d:
      if (p != 1) throw InputError("chebyshev-1d requires p = 1");
      return chebyshev_nodes(n);
  }
  throw InputError("unknown baseline kind");
}

}  // namespace spd
