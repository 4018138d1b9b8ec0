#include "spdesign/sp_opt.hpp"

#include <chrono>
#include <cmath>

#include "spdesign/parallel.hpp"
#include "spdesign/sampling.hpp"

namespace spd {

namespace {

constexpr std::uint64_t kPolishStream = 0x9011'5a11;

struct SweepResult {
  Matrix points;
  double movement = 0.0;
  int flagged = 0;
  double objective = 0.0;
};

struct Accumulated {
  Vector point;
  bool flagged = false;
  double attraction = 0.0;  // sum_m d_im
  double repulsion = 0.0;   // sum_j |x_i - x_j|
};

Accumulated update_impl(Eigen::Index i, const Matrix& x, const Matrix& y, double eps) {
  const Eigen::Index n = x.rows();
  const Eigen::Index N = y.rows();
  const Eigen::Index p = x.cols();
  const auto xi = x.row(i);

  Accumulated acc;
  Vector num = Vector::Zero(p);
  double denom = 0.0;
  for (Eigen::Index m = 0; m < N; ++m) {
    const double d = (y.row(m) - xi).norm();
    acc.attraction += d;
    if (d < eps) continue;
    num += y.row(m).transpose() / d;
    denom += 1.0 / d;
  }
  Vector push = Vector::Zero(p);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == i) continue;
    const double d = (xi - x.row(j)).norm();
    acc.repulsion += d;
    if (d < eps) continue;
    push += (xi - x.row(j)).transpose() / d;
  }
  if (denom == 0.0) {
    acc.point = xi.transpose();
    acc.flagged = true;
    return acc;
  }
  num += (static_cast<double>(N) / static_cast<double>(n)) * push;
  acc.point = (num / denom).cwiseMax(0.0).cwiseMin(1.0);
  return acc;
}

SweepResult sweep(const Matrix& x, const SampleBatch& batch, double eps) {
  const Eigen::Index n = x.rows();
  const auto N = static_cast<double>(batch.size());
  std::vector<Accumulated> updates(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) updates[i] = update_impl(static_cast<Eigen::Index>(i), x, batch.points(), eps);
  });

  SweepResult out;
  out.points.resize(n, x.cols());
  double attraction = 0.0, repulsion = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& u = updates[static_cast<std::size_t>(i)];
    out.points.row(i) = u.point.transpose();
    out.movement = std::max(out.movement, (u.point.transpose() - x.row(i)).norm());
    out.flagged += u.flagged ? 1 : 0;
    attraction += u.attraction;
    repulsion += u.repulsion;
  }
  const auto nd = static_cast<double>(n);
  out.objective = 2.0 * attraction / (nd * N) - repulsion / (nd * nd);
  return out;
}

}  // namespace

Eigen::Index SpConfig::resolved_batch_size(Eigen::Index n) const {
  return batch_size > 0 ? batch_size : std::max<Eigen::Index>(4096, 50 * n);
}

double SpConfig::resolved_tol(Eigen::Index p) const {
  return tol > 0.0 ? tol : 1e-6 * std::sqrt(static_cast<double>(p));
}

PointUpdate sp_update_point(Eigen::Index i, const Design& snapshot, const SampleBatch& batch, double eps) {
  if (snapshot.p() != batch.p()) throw InputError("dimension mismatch between design and batch");
  if (i < 0 || i >= snapshot.n()) throw InputError("point index out of range");
  auto acc = update_impl(i, snapshot.points(), batch.points(), eps);
  return {std::move(acc.point), acc.flagged};
}

double sp_sampled_objective(const Design& d, const SampleBatch& batch) {
  if (d.p() != batch.p()) throw InputError("dimension mismatch between design and batch");
  const Matrix& x = d.points();
  const Matrix& y = batch.points();
  const Eigen::Index n = d.n();
  const auto nd = static_cast<double>(n);
  const double attraction = chunked_sum(static_cast<std::size_t>(n), 1, [&](std::size_t b, std::size_t) {
    return (y.rowwise() - x.row(static_cast<Eigen::Index>(b))).rowwise().norm().sum();
  });
  double repulsion = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) repulsion += (x.row(i) - x.row(j)).norm();
  }
  return 2.0 * attraction / (nd * static_cast<double>(batch.size())) - 2.0 * repulsion / (nd * nd);
}

std::pair<Design, OptTrace> sp_optimize(const Design& init, const SpConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index n = init.n();
  const Eigen::Index p = init.p();
  const Eigen::Index N = cfg.resolved_batch_size(n);
  const double tol = cfg.resolved_tol(p);
  if (N < n) throw InputError("SP batch size must be >= n");
  if (!(cfg.eps > 0.0)) throw InputError("distance guard must be positive");
  if (cfg.max_sweeps < 0 || cfg.max_polish_sweeps < 0) throw InputError("sweep limits must be non-negative");

  OptTrace trace;
  trace.method = "sp";
  const SampleBatch fixed = sample_sobol(N, p, cfg.rng.derive(kPolishStream));
  const auto record = [&](const SweepResult& s) {
    trace.objective.push_back(s.objective);
    trace.movement.push_back(s.movement);
    trace.flagged.push_back(s.flagged);
    ++trace.sweeps;
  };
  const auto finish = [&](Matrix pts, const std::string& label) {
    trace.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return std::make_pair(Design(std::move(pts), label), trace);
  };
  const std::string label = "sp seed=" + std::to_string(cfg.rng.seed) + " init=" + init.label();

  trace.eval_initial = sp_sampled_objective(init, fixed);

  // A start that the polish sweep no longer moves is already converged.
  {
    const SweepResult check = sweep(init.points(), fixed, cfg.eps);
    if (check.movement < tol) {
      record(check);
      trace.polish_start = 0;
      trace.converged = true;
      trace.eval_final = trace.eval_initial;
      return finish(init.points(), label);
    }
  }

  Matrix x = init.points();
  for (int k = 0; k < cfg.max_sweeps; ++k) {
    const SampleBatch batch = sample_batch(cfg.source, N, p, cfg.rng.derive(static_cast<std::uint64_t>(k)));
    SweepResult s = sweep(x, batch, cfg.eps);
    record(s);
    x = std::move(s.points);
    if (s.movement < tol) break;
  }

  // Fixed-batch phase, accelerated by squared extrapolation of the sweep map
  // (SQUAREM). The extrapolated point is kept only if its objective does not
  // exceed that after two plain sweeps, so the sequence stays monotone.
  trace.polish_start = trace.sweeps;
  int used = 0;
  while (used < cfg.max_polish_sweeps) {
    SweepResult s1 = sweep(x, fixed, cfg.eps);
    record(s1);
    ++used;
    if (s1.movement < tol) {
      trace.converged = true;
      x = std::move(s1.points);
      break;
    }
    SweepResult s2 = sweep(s1.points, fixed, cfg.eps);
    record(s2);
    ++used;
    const Matrix r = s1.points - x;
    const Matrix v = s2.points - s1.points - r;
    const double vn = v.norm();
    if (vn == 0.0 || used + 1 > cfg.max_polish_sweeps) {
      x = std::move(s2.points);
      continue;
    }
    const double alpha = std::min(-1.0, -r.norm() / vn);
    const Matrix jump = (x - 2.0 * alpha * r + alpha * alpha * v).cwiseMax(0.0).cwiseMin(1.0);
    SweepResult s3 = sweep(jump, fixed, cfg.eps);
    record(s3);
    ++used;
    x = s3.objective <= s2.objective ? std::move(s3.points) : std::move(s2.points);
  }

  // Clamping can merge points in principle; fall back to the start then.
  try {
    const Design out(x);
    trace.eval_final = sp_sampled_objective(out, fixed);
  } catch (const InputError&) {
    trace.eval_final = std::numeric_limits<double>::infinity();
  }
  if (!(trace.eval_final <= trace.eval_initial + 1e-12 * std::abs(trace.eval_initial))) {
    trace.reverted = true;
    trace.eval_final = trace.eval_initial;
    return finish(init.points(), label);
  }
  return finish(std::move(x), label);
}

}  // namespace spd
