#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mgs/diffusion/eps_model.hpp"
#include "mgs/diffusion/sampler.hpp"
#include "mgs/eval/metrics.hpp"
#include "mgs/io/config.hpp"
#include "mgs/io/dataset.hpp"
#include "mgs/manifold/model.hpp"

namespace mgs::io {

// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitIo = 4;

/// Metrics of one generated set against the balanced reference set.
struct EvalResult {
  Eigen::Index generated = 0;
  eval::DistanceReport distance;
  std::optional<eval::BiasReport> bias;
  double base_radius = 0.0;
  std::vector<eval::NeighborHistogram> neighbours;  // one per radius multiplier
  std::vector<eval::UniformityStats> uniformity;
  std::vector<std::string> warnings;

  double cv(double multiplier) const;
};

EvalResult evaluate_samples(const Matrix& generated, const Matrix& real, const Dataset& train,
                            int projections, std::uint64_t seed);

/// One run directory, `<output_root>/<config hash>/`. Every stage loads its
/// artifact when it already exists and produces it otherwise, so commands can
/// be issued in any order and repeated runs are free.
class Run {
 public:
  explicit Run(RunConfig cfg, std::ostream* log = nullptr);

  const RunConfig& config() const { return cfg_; }
  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path checkpoints() const { return dir_ / "checkpoints"; }
  std::filesystem::path metrics() const { return dir_ / "metrics"; }
  std::filesystem::path plots() const { return dir_ / "plots"; }

  const Dataset& data();
  /// Balanced real set: same generator with uniform mode weights, seed + 1.
  /// For file-backed data, the first `eval.real` training rows.
  const Dataset& reference();
  const diffusion::EpsModel& eps_model();
  const manifold::ManifoldModel& manifold_model();

  /// Generates `eval.samples` samples and stores them in metrics/samples_<guided|unguided>.csv.
  Matrix sample(bool guided, bool trace = false);
  /// Samples from disk when present, generated otherwise.
  Matrix samples(bool guided);

  /// Writes eval_summary.csv, neighbour counts, histograms and mode proportions.
  std::map<std::string, EvalResult> evaluate(const std::optional<std::filesystem::path>& generated = std::nullopt,
                                             const std::optional<std::filesystem::path>& real = std::nullopt);

  /// Runs a sweep and returns the CSV paths written (one per sampler kind for
  /// the guidance_steps axis).
  std::vector<std::filesystem::path> ablate(const std::string& axis, const std::vector<std::string>& values,
                                            std::ostream& err);

  /// Renders every histogram / proportion report in metrics/ to plots/.
  std::vector<std::filesystem::path> plot();

  /// Writes manifest.json last; lists every artifact with size and hash.
  void write_manifest();

  void record_timing(const std::string& stage, double seconds);

 private:
  RunConfig cfg_;
  std::filesystem::path dir_;
  std::ostream* log_;
  std::optional<Dataset> data_;
  std::optional<Dataset> reference_;
  std::optional<diffusion::EpsModel> eps_;
  std::optional<manifold::ManifoldModel> manifold_;
  std::map<std::string, double> timings_;
  std::map<std::string, double> summary_;

  void say(const std::string& msg);
};

struct SweepRow {
  std::string value;
  bool ok = false;
  std::string error;
  double tv_uniform = 0.0;
  double sw = 0.0;
  double cv_k = 0.0;
};

/// Axes accepted by `sweep`.
const std::vector<std::string>& sweep_axes();

/// Applies one axis value to a config copy. Throws ConfigError on bad values.
RunConfig apply_axis(const RunConfig& base, const std::string& axis, const std::string& value);

/// One row per value; row i samples with seed base.seed + i. Trained models
/// come from `base` except for the relation_source axis, which retrains the
/// manifold model per row. Failed rows are reported, not thrown, unless every
/// row fails. `kind` overrides the sampler of every row.
std::vector<SweepRow> sweep(Run& base, const std::string& axis, const std::vector<std::string>& values,
                            std::ostream& err, std::optional<diffusion::SamplerKind> kind = std::nullopt);

void write_sweep_csv(const std::string& axis, const std::vector<SweepRow>& rows, const std::filesystem::path& path);

/// Options shared by all subcommands.
struct CommandOptions {
  std::filesystem::path config;  // empty: built-in defaults
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  bool guided = false;
  bool trace = false;
  std::string axis;
  std::string values;
  std::optional<std::filesystem::path> generated;
  std::optional<std::filesystem::path> real;
  std::vector<std::filesystem::path> reports;
};

/// Commands: make-data, train-diffusion, train-manifold, sample, evaluate,
/// ablate, plot. Returns the process exit code; failures print a single line
///   error: code=<n> kind=<config|numeric|io|contract|internal> message="<text>"
/// to `err`.
int run_command(const std::string& command, const CommandOptions& options, std::ostream& log, std::ostream& err);

/// Exit code and kind label for an in-flight exception.
std::pair<int, std::string> classify_exception(std::exception_ptr e, std::string* message);

}  // namespace mgs::io
