#include "spdesign/psp_opt.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "spdesign/energy.hpp"

namespace spd {

namespace {

constexpr std::uint64_t kEvalStream = 0xe7a1'0000;
constexpr int kMaxHalvings = 30;
constexpr double kArmijoSlope = 1e-4;

Matrix others(const Matrix& x, Eigen::Index i) {
  Matrix out(x.rows() - 1, x.cols());
  for (Eigen::Index j = 0, k = 0; j < x.rows(); ++j) {
    if (j != i) out.row(k++) = x.row(j);
  }
  return out;
}

/// Point objective split into its attraction and repulsion parts, so the
/// steps can treat them differently.
struct PointProblem {
  const Matrix& batch;
  const Matrix& weights;
  Matrix rest;  // the other n-1 points
  double n;

  double value(std::span<const double> x, std::span<double> grad = {}, std::span<double> grad_rep = {},
               std::span<double> weighted = {}) const {
    const auto p = x.size();
    std::vector<double> ga(grad.empty() ? 0 : p);
    const double attract = mean_gaussian_kernel(x, batch, weights, ga, weighted);
    double g = -2.0 * attract + 1.0 / n;
    std::vector<double> gr(p, 0.0);
    if (rest.rows() > 0) {
      const double repel = mean_gaussian_kernel(x, rest, weights, grad.empty() ? std::span<double>{} : std::span<double>(gr));
      const double factor = 2.0 * static_cast<double>(rest.rows()) / n;
      g += factor * repel;
      for (auto& v : gr) v *= factor;
    }
    if (!grad.empty()) {
      for (std::size_t l = 0; l < p; ++l) grad[l] = -2.0 * ga[l] + gr[l];
    }
    if (!grad_rep.empty()) std::copy(gr.begin(), gr.end(), grad_rep.begin());
    return g;
  }
};

PspPointUpdate update_impl(const Matrix& x, Eigen::Index i, const Matrix& batch, const PriorDrawBatch& priors,
                           const PspConfig& cfg) {
  const Eigen::Index p = x.cols();
  const auto pz = static_cast<std::size_t>(p);
  const PointProblem prob{batch, priors.exponent_weights(), others(x, i), static_cast<double>(x.rows())};

  std::vector<double> x0(pz), grad(pz), grad_rep(pz), weighted(pz);
  for (std::size_t l = 0; l < pz; ++l) x0[l] = x(i, static_cast<Eigen::Index>(l));
  PspPointUpdate out;
  out.before = prob.value(x0, grad, grad_rep, weighted);
  out.after = out.before;
  out.point = Eigen::Map<const Vector>(x0.data(), p);

  // Curvature of the tangent-line majorizer of the attraction part.
  std::vector<double> curv(pz);
  for (std::size_t l = 0; l < pz; ++l) curv[l] = 4.0 * weighted[l];

  std::vector<double> cand(pz);
  if (cfg.step == PspStep::closed_form_mm) {
    // Repulsion: Hessian of each kernel term is bounded by 4 max_l w_l / e.
    const Matrix& w = priors.exponent_weights();
    const double mean_max_w = w.rowwise().maxCoeff().mean();
    const double L = 2.0 * static_cast<double>(prob.rest.rows()) / prob.n * 4.0 * mean_max_w / std::numbers::e;
    const std::vector<double> ga = [&] {
      std::vector<double> v(pz);
      for (std::size_t l = 0; l < pz; ++l) v[l] = grad[l] - grad_rep[l];
      return v;
    }();
    for (std::size_t l = 0; l < pz; ++l) {
      if (curv[l] + L <= 0.0) {
        cand[l] = x0[l];
        continue;
      }
      // Attraction majorizer: (curv/2)(x - b)^2 with b = x0 - ga/curv.
      const double b = curv[l] > 0.0 ? x0[l] - ga[l] / curv[l] : x0[l];
      cand[l] = std::clamp((curv[l] * b + L * x0[l] - grad_rep[l]) / (curv[l] + L), 0.0, 1.0);
    }
    const double g = prob.value(cand);
    if (g <= out.before) {
      out.after = g;
      out.point = Eigen::Map<const Vector>(cand.data(), p);
    } else {
      out.flagged = true;
    }
    return out;
  }

  std::vector<double> dir(pz);
  for (std::size_t l = 0; l < pz; ++l) dir[l] = curv[l] > cfg.eps ? -grad[l] / curv[l] : -grad[l];

  double alpha = 1.0;
  for (int h = 0; h <= kMaxHalvings; ++h, alpha *= 0.5) {
    double slope = 0.0;
    bool moved = false;
    for (std::size_t l = 0; l < pz; ++l) {
      cand[l] = std::clamp(x0[l] + alpha * dir[l], 0.0, 1.0);
      slope += grad[l] * (cand[l] - x0[l]);
      moved = moved || cand[l] != x0[l];
    }
    if (!moved) return out;  // stationary on the box
    const double g = prob.value(cand);
    if (g <= out.before + kArmijoSlope * slope) {
      out.after = g;
      out.point = Eigen::Map<const Vector>(cand.data(), p);
      return out;
    }
  }
  out.flagged = true;
  return out;
}

}  // namespace

Eigen::Index PspConfig::resolved_batch_size(Eigen::Index n) const {
  return batch_size > 0 ? batch_size : std::max<Eigen::Index>(2048, 25 * n);
}

double PspConfig::resolved_tol(Eigen::Index p) const {
  return tol > 0.0 ? tol : 1e-6 * std::sqrt(static_cast<double>(p));
}

PriorDrawBatch draw_psp_priors(const PspConfig& cfg, Eigen::Index p, Eigen::Index R, const RngConfig& rng) {
  switch (cfg.prior) {
    case PriorKind::pod:
      return sample_pod_prior(KernelSpec::pod_prior(p, std::min<int>(cfg.max_order, static_cast<int>(p))), R, rng);
    case PriorKind::exponential:
      return sample_exp_prior(cfg.lambda, p, R, rng);
    case PriorKind::fixed:
      break;
  }
  throw InputError("PSP prior must be pod or exponential");
}

double psp_point_objective(std::span<const double> x, Eigen::Index i, const Design& current,
                           const SampleBatch& batch, const PriorDrawBatch& priors, std::span<double> grad) {
  if (current.p() != batch.p() || current.p() != priors.p()) throw InputError("dimension mismatch");
  if (i < 0 || i >= current.n()) throw InputError("point index out of range");
  const PointProblem prob{batch.points(), priors.exponent_weights(), others(current.points(), i),
                          static_cast<double>(current.n())};
  return prob.value(x, grad);
}

PspPointUpdate psp_update_point(Eigen::Index i, const Design& current, const SampleBatch& batch,
                                const PriorDrawBatch& priors, const PspConfig& cfg) {
  if (current.p() != batch.p() || current.p() != priors.p()) throw InputError("dimension mismatch");
  if (i < 0 || i >= current.n()) throw InputError("point index out of range");
  return update_impl(current.points(), i, batch.points(), priors, cfg);
}

std::pair<Design, OptTrace> psp_optimize(const Design& init, const PspConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index n = init.n();
  const Eigen::Index p = init.p();
  const Eigen::Index N = cfg.resolved_batch_size(n);
  const double tol = cfg.resolved_tol(p);
  if (N < 1 || cfg.prior_draws < 1) throw InputError("PSP batch sizes must be >= 1");
  if (!(cfg.eps > 0.0)) throw InputError("distance guard must be positive");

  OptTrace trace;
  trace.method = "psp";
  const SampleBatch eval_batch = sample_sobol(cfg.eval_batch_size, p, cfg.rng.derive(kEvalStream));
  const PriorDrawBatch eval_priors = draw_psp_priors(cfg, p, cfg.eval_prior_draws, cfg.rng.derive(kEvalStream + 1));
  trace.eval_initial = psp_objective(init, eval_batch, eval_priors);

  Matrix x = init.points();
  for (int k = 0; k < cfg.max_sweeps; ++k) {
    const RngConfig sweep_rng = cfg.rng.derive(static_cast<std::uint64_t>(k));
    double movement = 0.0, objective = 0.0;
    int flagged = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto visit = static_cast<std::uint64_t>(i);
      const SampleBatch batch = sample_batch(cfg.source, N, p, sweep_rng.derive(2 * visit));
      const PriorDrawBatch priors = draw_psp_priors(cfg, p, cfg.prior_draws, sweep_rng.derive(2 * visit + 1));
      const PspPointUpdate u = update_impl(x, i, batch.points(), priors, cfg);
      movement = std::max(movement, (u.point.transpose() - x.row(i)).norm());
      objective += u.before;
      flagged += u.flagged ? 1 : 0;
      x.row(i) = u.point.transpose();
    }
    trace.objective.push_back(objective / static_cast<double>(n));
    trace.movement.push_back(movement);
    trace.flagged.push_back(flagged);
    ++trace.sweeps;
    if (movement < tol) {
      trace.converged = true;
      break;
    }
  }

  const std::string label = "psp seed=" + std::to_string(cfg.rng.seed) + " init=" + init.label();
  const auto finish = [&](Matrix pts) {
    trace.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return std::make_pair(Design(std::move(pts), label), trace);
  };
  try {
    trace.eval_final = psp_objective(Design(x), eval_batch, eval_priors);
  } catch (const InputError&) {
    trace.eval_final = std::numeric_limits<double>::infinity();
  }
  if (!(trace.eval_final <= trace.eval_initial + 1e-9)) {
    trace.reverted = true;
    trace.eval_final = trace.eval_initial;
    return finish(init.points());
  }
  return finish(std::move(x));
}

}  // namespace spd
