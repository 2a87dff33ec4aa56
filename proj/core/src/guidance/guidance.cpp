#include "mgs/guidance/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mgs/rng.hpp"

namespace mgs::guidance {

TargetProvenance provenance_from_string(std::string_view s) {
  if (s == "reference-batch") return TargetProvenance::reference_batch;
  if (s == "balanced-reference") return TargetProvenance::balanced_reference;
  throw ConfigError("unknown target provenance '" + std::string(s) + "' (expected reference-batch|balanced-reference)");
}

GuideOn guide_on_from_string(std::string_view s) {
  if (s == "x0hat") return GuideOn::x0hat;
  if (s == "xt") return GuideOn::xt;
  throw ConfigError("unknown guide_on '" + std::string(s) + "' (expected x0hat|xt)");
}

TargetMode target_mode_from_string(std::string_view s) {
  if (s == "fixed") return TargetMode::fixed;
  if (s == "per-step") return TargetMode::per_step;
  throw ConfigError("unknown target mode '" + std::string(s) + "' (expected fixed|per-step)");
}

std::string_view to_string(TargetProvenance p) {
  return p == TargetProvenance::reference_batch ? "reference-batch" : "balanced-reference";
}
std::string_view to_string(GuideOn g) { return g == GuideOn::x0hat ? "x0hat" : "xt"; }
std::string_view to_string(TargetMode m) { return m == TargetMode::fixed ? "fixed" : "per-step"; }

std::vector<int> infer_clusters(const manifold::ManifoldModel& h, const Matrix& pool, int max_clusters,
                                double same_threshold) {
  const Eigen::Index n = pool.rows();
  require(n > 0 && max_clusters > 0, "infer_clusters: empty pool");
  Matrix z = h.embedder.embed(pool);
  Matrix rel = h.relation.relations(z);

  // Start from the point farthest from the feature centroid.
  Eigen::RowVectorXd centre = z.colwise().mean();
  Eigen::Index first = 0;
  (z.rowwise() - centre).rowwise().squaredNorm().maxCoeff(&first);
  std::vector<Eigen::Index> seeds{first};
  Vector min_dist = (z.rowwise() - z.row(first)).rowwise().squaredNorm();
  while (static_cast<int>(seeds.size()) < max_clusters) {
    Eigen::Index cand = 0;
    if (!(min_dist.maxCoeff(&cand) > 0.0)) break;
    bool novel = true;
    for (auto s : seeds) novel = novel && rel(cand, s) < same_threshold;
    if (!novel) break;
    seeds.push_back(cand);
    min_dist = min_dist.cwiseMin((z.rowwise() - z.row(cand)).rowwise().squaredNorm());
  }

  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = -1.0;
    for (std::size_t c = 0; c < seeds.size(); ++c) {
      if (rel(i, seeds[c]) > best) {
        best = rel(i, seeds[c]);
        labels[i] = static_cast<int>(c);
      }
    }
  }
  return labels;
}

std::vector<Eigen::Index> stratified_quota(const std::vector<Eigen::Index>& cluster_sizes, Eigen::Index n) {
  Eigen::Index available = std::accumulate(cluster_sizes.begin(), cluster_sizes.end(), Eigen::Index{0});
  require(n <= available, "stratified_quota: not enough samples");
  std::vector<Eigen::Index> quota(cluster_sizes.size(), 0);
  // Order clusters by size (descending, ties by index) so leftovers land on the largest.
  std::vector<std::size_t> order(cluster_sizes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cluster_sizes[a] > cluster_sizes[b]; });
  Eigen::Index remaining = n;
  while (remaining > 0) {
    std::vector<std::size_t> open;
    for (auto c : order)
      if (quota[c] < cluster_sizes[c]) open.push_back(c);
    auto share = remaining / static_cast<Eigen::Index>(open.size());
    if (share == 0) {
      for (std::size_t i = 0; i < open.size() && remaining > 0; ++i, --remaining) ++quota[open[i]];
      break;
    }
    for (auto c : open) {
      Eigen::Index take = std::min(share, cluster_sizes[c] - quota[c]);
      quota[c] += take;
      remaining -= take;
    }
  }
  return quota;
}

namespace {

std::vector<Eigen::Index> draw_without_replacement(Eigen::Index n, Eigen::Index k, Pcg32& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < k; ++i) {
    auto j = i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint32_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

Matrix gather(const Matrix& m, const std::vector<Eigen::Index>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(idx[i]);
  return out;
}

}  // namespace

ManifoldTarget estimate_manifold_target(const manifold::ManifoldModel& h, const Matrix& reference,
                                        const GuidanceConfig& cfg, std::uint64_t seed, Eigen::Index pool_size) {
  const Eigen::Index n = cfg.batch_size;
  require(n >= 1, "estimate_manifold_target: batch size must be positive");
  if (reference.rows() < n)
    throw ContractError("estimate_manifold_target: need at least " + std::to_string(n) + " reference samples, got " +
                        std::to_string(reference.rows()));
  Pcg32 rng = derive_rng(seed, 53);
  ManifoldTarget target;
  target.provenance = cfg.provenance;

  if (cfg.provenance == TargetProvenance::reference_batch) {
    target.reference_rows = draw_without_replacement(reference.rows(), n, rng);
  } else {
    auto pool_rows = draw_without_replacement(reference.rows(), std::max(n, std::min(pool_size, reference.rows())), rng);
    Matrix pool = gather(reference, pool_rows);
    auto labels = infer_clusters(h, pool, static_cast<int>(n));
    int k = *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(pool_rows[i]);
    std::vector<Eigen::Index> sizes;
    for (const auto& m : members) sizes.push_back(static_cast<Eigen::Index>(m.size()));
    auto quota = stratified_quota(sizes, n);
    for (int c = 0; c < k; ++c) {
      // Members are already in random pool order.
      for (Eigen::Index i = 0; i < quota[c]; ++i) target.reference_rows.push_back(members[c][i]);
    }
    // Interleave clusters randomly so batch position carries no cluster order.
    for (std::size_t i = target.reference_rows.size(); i > 1; --i)
      std::swap(target.reference_rows[i - 1], target.reference_rows[rng.below(static_cast<std::uint32_t>(i))]);
  }
  target.relations = manifold::RelationMatrix(h.relations(gather(reference, target.reference_rows)));
  return target;
}

GuidanceGradient guidance_gradient(const Matrix& xt, int t, const diffusion::NoisePredictor& eps_model,
                                   const manifold::ManifoldModel& h, const Matrix& target,
                                   const diffusion::NoiseSchedule& schedule, const GuidanceConfig& cfg) {
  schedule.check_timestep(t);
  require(cfg.lambda >= 0.0, "guidance_gradient: lambda must be non-negative");
  require(target.rows() == xt.rows() && target.cols() == xt.rows(), "guidance_gradient: target must be n x n");
  GuidanceGradient out;
  if (cfg.lambda == 0.0) {
    out.gradient = Matrix::Zero(xt.rows(), xt.cols());
    return out;
  }
  Matrix dx;
  if (cfg.guide_on == GuideOn::xt) {
    auto mis = h.relation_mismatch(xt, target);
    out.objective = mis.value;
    dx = std::move(mis.input_grad);
  } else {
    const double ab = schedule.alpha_bar[t];
    Matrix eps = eps_model.predict(xt, t);
    Matrix x0 = diffusion::tweedie_x0(xt, eps, t, schedule);
    auto mis = h.relation_mismatch(x0, target);
    out.objective = mis.value;
    dx = mis.input_grad / std::sqrt(ab);
    if (!cfg.skip_eps_jacobian)
      dx -= (std::sqrt(1.0 - ab) / std::sqrt(ab)) * eps_model.input_vjp(xt, t, mis.input_grad);
  }
  out.gradient = cfg.lambda * dx;
  if (!out.gradient.allFinite())
    throw NumericError("guidance_gradient: non-finite gradient at timestep " + std::to_string(t));
  return out;
}

void clip_rows(Matrix& m, double max_norm) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double norm = m.row(i).norm();
    if (norm > max_norm) m.row(i) *= max_norm / norm;
  }
}

Matrix guided_sample(const diffusion::NoisePredictor& eps_model, const manifold::ManifoldModel& h,
                     const ManifoldTarget& target, const diffusion::NoiseSchedule& schedule,
                     const diffusion::SamplerConfig& sampler_cfg, const GuidanceConfig& guidance_cfg,
                     std::vector<TraceRow>* trace) {
  const Eigen::Index n = target.relations.size();
  require(guidance_cfg.guidance_steps <= sampler_cfg.sample_steps,
          "guided_sample: guidance steps exceed sampler steps");
  if (!guidance_cfg.active()) return diffusion::sample(eps_model, schedule, sampler_cfg, n);
  require(n >= 2, "guided_sample: guidance needs a batch of at least 2");

  diffusion::GuidanceHook hook = [&](const Matrix& xt, int t, int, int step, Matrix& next) {
    if (step >= guidance_cfg.guidance_steps) return;
    Matrix m = target.relations.values();
    if (guidance_cfg.target == TargetMode::per_step) {
      Matrix x0 = diffusion::tweedie_x0(xt, eps_model.predict(xt, t), t, schedule);
      m = h.relations(x0);
    }
    auto g = guidance_gradient(xt, t, eps_model, h, m, schedule, guidance_cfg);
    if (guidance_cfg.max_step > 0.0) clip_rows(g.gradient, guidance_cfg.max_step);
    next -= g.gradient;
    if (trace) trace->push_back({step, t, g.objective, g.gradient.norm()});
  };
  return diffusion::sample(eps_model, schedule, sampler_cfg, n, hook);
}

Matrix unguided_sample_many(const diffusion::NoisePredictor& eps_model, const diffusion::NoiseSchedule& schedule,
                            const diffusion::SamplerConfig& sampler_cfg, Eigen::Index batch_size, Eigen::Index total) {
  require(batch_size >= 1, "unguided_sample_many: batch size must be positive");
  Matrix out(total, eps_model.data_dim());
  Eigen::Index filled = 0;
  for (std::uint64_t b = 0; filled < total; ++b) {
    diffusion::SamplerConfig cfg = sampler_cfg;
    cfg.seed = derive_rng(sampler_cfg.seed, 1000 + b).next_u64();
    Matrix batch = diffusion::sample(eps_model, schedule, cfg, batch_size);
    Eigen::Index take = std::min(batch_size, total - filled);
    out.middleRows(filled, take) = batch.topRows(take);
    filled += take;
  }
  return out;
}

Matrix guided_sample_many(const diffusion::NoisePredictor& eps_model, const manifold::ManifoldModel& h,
                          const ManifoldTarget& target, const diffusion::NoiseSchedule& schedule,
                          const diffusion::SamplerConfig& sampler_cfg, const GuidanceConfig& guidance_cfg,
                          Eigen::Index total, std::vector<TraceRow>* trace) {
  const Eigen::Index n = target.relations.size();
  require(n == guidance_cfg.batch_size, "guided_sample_many: target size must equal batch size");
  Matrix out(total, eps_model.data_dim());
  Eigen::Index filled = 0;
  for (std::uint64_t b = 0; filled < total; ++b) {
    diffusion::SamplerConfig cfg = sampler_cfg;
    cfg.seed = derive_rng(sampler_cfg.seed, 1000 + b).next_u64();
    Matrix batch = guided_sample(eps_model, h, target, schedule, cfg, guidance_cfg, trace);
    Eigen::Index take = std::min(n, total - filled);
    out.middleRows(filled, take) = batch.topRows(take);
    filled += take;
  }
  return out;
}

}  // namespace mgs::guidance
