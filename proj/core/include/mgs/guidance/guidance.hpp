#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "mgs/common.hpp"
#include "mgs/diffusion/eps_model.hpp"
#include "mgs/diffusion/sampler.hpp"
#include "mgs/manifold/model.hpp"
#include "mgs/manifold/relations.hpp"

namespace mgs::guidance {

enum class TargetProvenance { reference_batch, balanced_reference };
/// Where H is evaluated: on the Tweedie estimate x0_hat(x_t) or on x_t itself.
enum class GuideOn { x0hat, xt };
/// fixed: M computed once before sampling; per_step: M = H(x0_hat) of the live
/// batch, detached, recomputed at every guided step.
enum class TargetMode { fixed, per_step };

TargetProvenance provenance_from_string(std::string_view s);
GuideOn guide_on_from_string(std::string_view s);
TargetMode target_mode_from_string(std::string_view s);
std::string_view to_string(TargetProvenance p);
std::string_view to_string(GuideOn g);
std::string_view to_string(TargetMode m);

struct GuidanceConfig {
  double lambda = 0.0;
  /// Guidance is applied during the first `guidance_steps` denoising steps.
  int guidance_steps = 0;
  int batch_size = 32;
  bool skip_eps_jacobian = false;
  TargetProvenance provenance = TargetProvenance::balanced_reference;
  GuideOn guide_on = GuideOn::x0hat;
  TargetMode target = TargetMode::fixed;
  /// Per-sample cap on the norm of one guidance displacement; <= 0 disables.
  double max_step = 0.0;

  bool active() const { return lambda > 0.0 && guidance_steps > 0; }
};

/// Constant relation target; no gradient flows into it.
struct ManifoldTarget {
  manifold::RelationMatrix relations;
  TargetProvenance provenance = TargetProvenance::reference_batch;
  /// Rows of the reference data that produced the target, in batch order.
  std::vector<Eigen::Index> reference_rows;
};

/// Groups the reference pool by g's relations: cluster seeds are picked by
/// greedy farthest-point search in F-space, a new seed being accepted only
/// while its relation to every existing seed stays below `same_threshold`.
/// Each point joins the seed it relates to most strongly.
std::vector<int> infer_clusters(const manifold::ManifoldModel& h, const Matrix& pool, int max_clusters,
                                double same_threshold = 0.5);

/// Splits `n` picks across clusters of the given sizes as evenly as possible,
/// never exceeding a cluster's size; leftover picks go to the largest clusters.
std::vector<Eigen::Index> stratified_quota(const std::vector<Eigen::Index>& cluster_sizes, Eigen::Index n);

/// Builds M = H(X_ref) from a size-n reference batch drawn from `reference`.
/// Balanced mode stratifies the batch over the clusters of `infer_clusters`.
ManifoldTarget estimate_manifold_target(const manifold::ManifoldModel& h, const Matrix& reference,
                                        const GuidanceConfig& cfg, std::uint64_t seed,
                                        Eigen::Index pool_size = 1024);

struct GuidanceGradient {
  Matrix gradient;
  double objective = 0.0;  // ||M - H(.)||_F^2 before scaling
};

/// lambda * d/dx_t ||M - H(x0_hat(x_t))||_F^2, chaining through
/// d x0_hat / d x_t = (I - sqrt(1 - ab_t) d eps / d x_t) / sqrt(ab_t); the eps
/// Jacobian is dropped when `skip_eps_jacobian` is set.
GuidanceGradient guidance_gradient(const Matrix& xt, int t, const diffusion::NoisePredictor& eps_model,
                                   const manifold::ManifoldModel& h, const Matrix& target,
                                   const diffusion::NoiseSchedule& schedule, const GuidanceConfig& cfg);

/// Rescales every row whose norm exceeds `max_norm` down to that norm.
void clip_rows(Matrix& m, double max_norm);

struct TraceRow {
  int step_index = 0;
  int timestep = 0;
  double objective = 0.0;
  double gradient_norm = 0.0;
};

/// One jointly evolved batch of `target.relations.size()` samples. The first
/// `guidance_steps` denoising steps subtract the guidance gradient from
/// x_{t-1}; the remaining steps are plain. Inactive guidance leaves the
/// sampler untouched, so output equals diffusion::sample bit for bit.
Matrix guided_sample(const diffusion::NoisePredictor& eps_model, const manifold::ManifoldModel& h,
                     const ManifoldTarget& target, const diffusion::NoiseSchedule& schedule,
                     const diffusion::SamplerConfig& sampler_cfg, const GuidanceConfig& guidance_cfg,
                     std::vector<TraceRow>* trace = nullptr);

/// Generates `total` samples in batches of `guidance_cfg.batch_size`, batch b
/// seeded from derive(seed, b). Inactive guidance gives the unguided samples
/// for the same seeds.
Matrix guided_sample_many(const diffusion::NoisePredictor& eps_model, const manifold::ManifoldModel& h,
                          const ManifoldTarget& target, const diffusion::NoiseSchedule& schedule,
                          const diffusion::SamplerConfig& sampler_cfg, const GuidanceConfig& guidance_cfg,
                          Eigen::Index total, std::vector<TraceRow>* trace = nullptr);

/// The unguided counterpart of guided_sample_many with identical batch seeding;
/// needs no manifold model.
Matrix unguided_sample_many(const diffusion::NoisePredictor& eps_model, const diffusion::NoiseSchedule& schedule,
                            const diffusion::SamplerConfig& sampler_cfg, Eigen::Index batch_size, Eigen::Index total);

}  // namespace mgs::guidance
