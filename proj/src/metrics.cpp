#include "spdesign/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include "spdesign/energy.hpp"
#include "spdesign/parallel.hpp"
#include "spdesign/sampling.hpp"

namespace spd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kRefineStarts = 8;

/// Maximizes f over [0,1]^k by a Nelder-Mead walk with box clamping.
double simplex_maximize(const std::function<double(const Vector&)>& f, const Vector& start, double step,
                        int iterations) {
  const Eigen::Index k = start.size();
  const auto clamp = [](Vector v) { return Vector(v.cwiseMax(0.0).cwiseMin(1.0)); };
  std::vector<Vector> simplex{start};
  for (Eigen::Index j = 0; j < k; ++j) {
    Vector v = start;
    v[j] += (v[j] + step <= 1.0) ? step : -step;
    simplex.push_back(clamp(v));
  }
  std::vector<double> val(simplex.size());
  for (std::size_t j = 0; j < simplex.size(); ++j) val[j] = f(simplex[j]);

  std::vector<std::size_t> order(simplex.size());
  for (int it = 0; it < iterations; ++it) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val[a] > val[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
    Vector centroid = Vector::Zero(k);
    for (std::size_t j = 0; j + 1 < order.size(); ++j) centroid += simplex[order[j]];
    centroid /= static_cast<double>(k);

    const Vector refl = clamp(centroid + (centroid - simplex[worst]));
    const double fr = f(refl);
    if (fr > val[best]) {
      const Vector expd = clamp(centroid + 2.0 * (centroid - simplex[worst]));
      const double fe = f(expd);
      if (fe > fr) {
        simplex[worst] = expd;
        val[worst] = fe;
      } else {
        simplex[worst] = refl;
        val[worst] = fr;
      }
    } else if (fr > val[second]) {
      simplex[worst] = refl;
      val[worst] = fr;
    } else {
      const Vector contr = clamp(centroid + 0.5 * (simplex[worst] - centroid));
      const double fc = f(contr);
      if (fc > val[worst]) {
        simplex[worst] = contr;
        val[worst] = fc;
      } else {
        for (std::size_t j = 0; j < simplex.size(); ++j) {
          if (j == best) continue;
          simplex[j] = simplex[best] + 0.5 * (simplex[j] - simplex[best]);
          val[j] = f(simplex[j]);
        }
      }
    }
  }
  return *std::max_element(val.begin(), val.end());
}

long long binomial_saturating(long long p, long long l) {
  long double c = 1.0L;
  for (long long k = 1; k <= l; ++k) {
    c = c * static_cast<long double>(p - l + k) / static_cast<long double>(k);
    if (c > 9e18L) return std::numeric_limits<long long>::max();
  }
  return std::llround(c);
}

/// {(1/K) sum_k dist_k^{-2l}}^{-1/(2l)} from squared distances, scaled by the
/// smallest distance to stay finite. Zero when some distance vanishes.
double soft_min(const double* d2, std::size_t count, int l) {
  double lo = kInf;
  for (std::size_t k = 0; k < count; ++k) lo = std::min(lo, d2[k]);
  if (lo <= 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < count; ++k) s += std::pow(lo / d2[k], l);
  return std::sqrt(lo) * std::pow(s / static_cast<double>(count), -1.0 / (2.0 * l));
}

}  // namespace

double maximin(const Design& d) {
  if (d.n() < 2) throw InputError("maximin requires n >= 2");
  const Matrix& x = d.points();
  double best = kInf;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    for (Eigen::Index j = i + 1; j < d.n(); ++j) best = std::min(best, (x.row(i) - x.row(j)).squaredNorm());
  }
  return std::sqrt(best);
}

double minimax_fill(const Design& d, const SampleBatch& candidates, bool refine) {
  if (d.p() != candidates.p()) throw InputError("dimension mismatch between design and candidates");
  const Matrix& x = d.points();
  const Matrix& c = candidates.points();
  const auto nearest = [&](const auto& pt) { return (x.rowwise() - pt).rowwise().squaredNorm().minCoeff(); };

  const Eigen::Index M = c.rows();
  std::vector<double> best_d(static_cast<std::size_t>(M));
  parallel_for(static_cast<std::size_t>(M), [&](std::size_t b, std::size_t e) {
    for (std::size_t m = b; m < e; ++m) best_d[m] = nearest(c.row(static_cast<Eigen::Index>(m)));
  });
  const auto it = std::max_element(best_d.begin(), best_d.end());
  double value = std::sqrt(*it);
  if (refine) {
    const Vector start = c.row(it - best_d.begin()).transpose();
    const double step = 0.5 * std::pow(static_cast<double>(M), -1.0 / static_cast<double>(d.p()));
    const auto f = [&](const Vector& v) { return std::sqrt(nearest(v.transpose())); };
    value = std::max(value, simplex_maximize(f, start, step, 100 * static_cast<int>(d.p())));
  }
  return value;
}

std::vector<std::vector<Eigen::Index>> coordinate_subsets(Eigen::Index p, int l, long long cap, const RngConfig& rng) {
  if (l < 1 || l > p) throw InputError("subspace dimension l must lie in [1, p]");
  if (cap < 1) throw InputError("subset cap must be >= 1");
  std::vector<std::vector<Eigen::Index>> out;
  const long long total = binomial_saturating(p, l);
  if (total <= cap) {
    std::vector<Eigen::Index> u(static_cast<std::size_t>(l));
    std::iota(u.begin(), u.end(), Eigen::Index{0});
    for (;;) {
      out.push_back(u);
      int k = l - 1;
      while (k >= 0 && u[static_cast<std::size_t>(k)] == p - l + k) --k;
      if (k < 0) break;
      ++u[static_cast<std::size_t>(k)];
      for (int j = k + 1; j < l; ++j) u[static_cast<std::size_t>(j)] = u[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
  }
  Rng gen(rng);
  std::vector<Eigen::Index> all(static_cast<std::size_t>(p));
  for (long long s = 0; s < cap; ++s) {
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    for (int k = 0; k < l; ++k) {
      std::uniform_int_distribution<Eigen::Index> pick(k, p - 1);
      std::swap(all[static_cast<std::size_t>(k)], all[static_cast<std::size_t>(pick(gen))]);
    }
    std::vector<Eigen::Index> u(all.begin(), all.begin() + l);
    std::sort(u.begin(), u.end());
    out.push_back(std::move(u));
  }
  return out;
}

ProjectedIndex projected_minimax_index(const Design& d, int l, const RngConfig& rng, const ProjectionOptions& opts) {
  const auto subsets = coordinate_subsets(d.p(), l, opts.subset_cap, rng.derive(1));
  const SampleBatch cand = sample_sobol(opts.candidates, l, rng.derive(2));
  const Eigen::Index n = d.n();
  const Eigen::Index M = cand.size();

  ProjectedIndex out;
  out.subsets_total = binomial_saturating(d.p(), l);
  out.subsets_evaluated = static_cast<long long>(subsets.size());
  out.candidates = M;
  out.value = 0.0;

  Matrix proj(n, l);
  for (const auto& u : subsets) {
    for (int k = 0; k < l; ++k) proj.col(k) = d.points().col(u[static_cast<std::size_t>(k)]);
    const auto expression = [&](const Eigen::RowVectorXd& pt, std::vector<double>& d2) {
      for (Eigen::Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = (proj.row(i) - pt).squaredNorm();
      return soft_min(d2.data(), d2.size(), l);
    };
    std::vector<double> vals(static_cast<std::size_t>(M));
    parallel_for(static_cast<std::size_t>(M), [&](std::size_t b, std::size_t e) {
      std::vector<double> d2(static_cast<std::size_t>(n));
      for (std::size_t m = b; m < e; ++m) vals[m] = expression(cand.points().row(static_cast<Eigen::Index>(m)), d2);
    });
    // Simplex walks from the best few candidates.
    std::vector<std::size_t> top(vals.size());
    std::iota(top.begin(), top.end(), std::size_t{0});
    const auto k = std::min<std::size_t>(kRefineStarts, top.size());
    std::partial_sort(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(k), top.end(),
                      [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });
    top.resize(k);
    double sup = vals[top.front()];
    if (opts.refine) {
      std::vector<double> d2(static_cast<std::size_t>(n));
      const double step = 0.5 * std::pow(static_cast<double>(M), -1.0 / l);
      const auto f = [&](const Vector& v) { return expression(v.transpose(), d2); };
      for (std::size_t t : top) {
        const Vector start = cand.points().row(static_cast<Eigen::Index>(t)).transpose();
        sup = std::max(sup, simplex_maximize(f, start, step, 60 * l));
      }
    }
    out.value = std::max(out.value, sup);
  }
  return out;
}

ProjectedIndex projected_maximin_index(const Design& d, int l, const RngConfig& rng, long long subset_cap) {
  if (d.n() < 2) throw InputError("projected maximin index requires n >= 2");
  const auto subsets = coordinate_subsets(d.p(), l, subset_cap, rng.derive(1));
  const Eigen::Index n = d.n();
  const Matrix& x = d.points();

  ProjectedIndex out;
  out.subsets_total = binomial_saturating(d.p(), l);
  out.subsets_evaluated = static_cast<long long>(subsets.size());
  out.value = kInf;

  std::vector<double> d2(static_cast<std::size_t>(n * (n - 1) / 2));
  for (const auto& u : subsets) {
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        double s = 0.0;
        for (auto c : u) s += (x(i, c) - x(j, c)) * (x(i, c) - x(j, c));
        d2[k++] = s;
      }
    }
    const double v = soft_min(d2.data(), d2.size(), l);
    if (v == 0.0) out.degenerate = true;
    out.value = std::min(out.value, v);
  }
  return out;
}

double maxpro_criterion(const Design& d, double lambda) {
  if (!(lambda >= 0.0)) throw InputError("MaxPro offset must be >= 0");
  const Matrix& x = d.points();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    for (Eigen::Index j = i + 1; j < d.n(); ++j) {
      double prod = 1.0;
      for (Eigen::Index l = 0; l < d.p(); ++l) prod *= (x(i, l) - x(j, l)) * (x(i, l) - x(j, l)) + lambda;
      if (prod == 0.0) return kInf;
      sum += 1.0 / prod;
    }
  }
  return sum;
}

double phi_correction(double x, double lambda) {
  if (!(lambda > 0.0)) throw InputError("lambda must be positive");
  const double s = std::sqrt(lambda);
  return std::atan(x / s) + std::atan((1.0 - x) / s);
}

double psp_closed_form(const Design& d, double lambda) {
  if (!(lambda > 0.0)) throw InputError("lambda must be positive");
  const auto n = static_cast<double>(d.n());
  const auto p = static_cast<double>(d.p());
  double phi_sum = 0.0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    double prod = 1.0;
    for (Eigen::Index l = 0; l < d.p(); ++l) prod *= phi_correction(d.points()(i, l), lambda);
    phi_sum += prod;
  }
  return maxpro_criterion(d, lambda) - n / std::pow(lambda, p / 2.0) * phi_sum + n / (2.0 * std::pow(lambda, p));
}

// ---------------------------------------------------------------------------

namespace {

struct ParsedMetric {
  std::string kind;
  double arg = 0.0;
  bool has_arg = false;
};

ParsedMetric parse_metric(const std::string& name) {
  ParsedMetric out;
  const auto colon = name.find(':');
  out.kind = name.substr(0, colon);
  if (colon != std::string::npos) {
    const std::string text = name.substr(colon + 1);
    const auto res = std::from_chars(text.data(), text.data() + text.size(), out.arg);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
      throw InputError("bad metric argument in '" + name + "'");
    }
    out.has_arg = true;
  }
  if (out.kind == "mM") out.kind = "mml";
  if (out.kind == "Mm") out.kind = "mmL";

  const bool needs_arg = out.kind == "qenergy" || out.kind == "mml" || out.kind == "mmL" || out.kind == "maxpro";
  const bool known = needs_arg || out.kind == "energy" || out.kind == "cl2" || out.kind == "maximin" ||
                     out.kind == "minimax";
  if (!known) throw InputError("unknown metric '" + name + "'");
  if (needs_arg != out.has_arg) throw InputError("metric '" + out.kind + (needs_arg ? "' needs an argument" : "' takes no argument"));
  if ((out.kind == "mml" || out.kind == "mmL") && (out.arg < 1 || out.arg != std::floor(out.arg))) {
    throw InputError("subspace dimension must be a positive integer in '" + name + "'");
  }
  return out;
}

}  // namespace

void validate_metric_name(const std::string& name) { (void)parse_metric(name); }

std::vector<MetricEntry> evaluate_metrics(const Design& d, const std::vector<std::string>& names,
                                          const RngConfig& rng, const MetricOptions& opts) {
  std::vector<ParsedMetric> parsed;
  for (const auto& name : names) parsed.push_back(parse_metric(name));

  std::vector<MetricEntry> out;
  std::uint64_t tag = 0;
  for (std::size_t k = 0; k < parsed.size(); ++k) {
    const auto& m = parsed[k];
    const RngConfig sub = rng.derive(++tag);
    MetricEntry e;
    e.metric = names[k];
    if (m.kind == "energy" || m.kind == "qenergy") {
      const SampleBatch batch = sample_sobol(opts.energy_batch, d.p(), sub);
      const EnergyEstimate est = m.kind == "energy" ? energy_distance(d, batch) : q_energy_distance(d, batch, m.arg);
      e.value = est.value;
      e.meta = {{"std_error", est.std_error}, {"N", static_cast<double>(est.N)}};
    } else if (m.kind == "cl2") {
      e.value = cl2_discrepancy(d);
    } else if (m.kind == "maximin") {
      e.value = maximin(d);
    } else if (m.kind == "minimax") {
      const SampleBatch cand = sample_sobol(opts.minimax_candidates, d.p(), sub);
      e.value = minimax_fill(d, cand, true);
      e.meta = {{"candidates", static_cast<double>(cand.size())}};
    } else if (m.kind == "mml" || m.kind == "mmL") {
      const int l = static_cast<int>(m.arg);
      if (l > d.p()) throw InputError("subspace dimension exceeds p in '" + names[k] + "'");
      const ProjectedIndex r = m.kind == "mml" ? projected_minimax_index(d, l, sub, opts.projection)
                                               : projected_maximin_index(d, l, sub, opts.projection.subset_cap);
      e.value = r.value;
      e.meta = {{"subsets_total", static_cast<double>(r.subsets_total)},
                {"subsets_evaluated", static_cast<double>(r.subsets_evaluated)},
                {"degenerate", r.degenerate ? 1.0 : 0.0}};
      if (m.kind == "mml") e.meta.emplace_back("candidates", static_cast<double>(r.candidates));
    } else if (m.kind == "maxpro") {
      e.value = maxpro_criterion(d, m.arg);
      e.meta = {{"infinite", std::isinf(e.value) ? 1.0 : 0.0}};
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace spd
