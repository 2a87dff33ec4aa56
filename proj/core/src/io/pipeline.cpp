#include "mgs/io/pipeline.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "mgs/diffusion/schedule.hpp"
#include "mgs/guidance/guidance.hpp"
#include "mgs/io/checkpoint.hpp"
#include "mgs/io/plot.hpp"

namespace mgs::io {
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string multiplier_tag(double m) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.1f", m);
  return buf;
}

std::vector<std::string> sample_header(Eigen::Index dim) {
  std::vector<std::string> h;
  for (Eigen::Index j = 0; j < dim; ++j) h.push_back("x" + std::to_string(j));
  return h;
}

std::string num(double v) { return std::isfinite(v) ? format_double(v) : "nan"; }

diffusion::NoiseSchedule schedule_of(const RunConfig& cfg) {
  return diffusion::make_linear_schedule(cfg.schedule_steps, cfg.beta_start, cfg.beta_end);
}

diffusion::SamplerConfig sampler_of(const RunConfig& cfg) {
  diffusion::SamplerConfig sc;
  sc.kind = cfg.sampler_kind;
  sc.sample_steps = cfg.sample_steps;
  sc.seed = cfg.seed;
  return sc;
}

Dataset load_dataset(const fs::path& path) {
  if (path.extension() == ".mgsd") return read_dataset_binary(path);
  return read_dataset_csv(path);
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read artifact '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return hex64(fnv1a64(ss.str()));
}

Vector training_proportions(const Dataset& train) {
  const auto k = train.mode_centers->rows();
  if (train.labels.empty()) return train.mode_weights ? *train.mode_weights : Vector::Constant(k, 1.0 / k);
  Vector p = Vector::Zero(k);
  for (int l : train.labels)
    if (l >= 0 && l < k) p(l) += 1.0;
  return p / p.sum();
}

const std::map<std::string, std::string>& axis_keys() {
  static const std::map<std::string, std::string> keys = {
      {"lambda", "guidance.lambda"},
      {"guidance_steps", "guidance.steps"},
      {"batch_size", "guidance.batch"},
      {"relation_source", "manifold.relation_source"},
      {"sampler_steps", "sampler.steps"},
  };
  return keys;
}

std::vector<std::string> split_values(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::string one_line(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

double EvalResult::cv(double multiplier) const {
  for (std::size_t i = 0; i < neighbours.size(); ++i)
    if (neighbours[i].multiplier == multiplier) return uniformity[i].cv;
  throw ContractError("EvalResult: no neighbour counts at multiplier " + format_double(multiplier));
}

EvalResult evaluate_samples(const Matrix& generated, const Matrix& real, const Dataset& train, int projections,
                            std::uint64_t seed) {
  require(generated.rows() > 0, "evaluate_samples: no generated samples");
  require(generated.cols() == real.cols(), "evaluate_samples: generated and real dimensions differ");
  EvalResult r;
  r.generated = generated.rows();
  r.distance = eval::distance_report(generated, real, projections, seed);
  if (train.mode_centers) r.bias = eval::mode_proportions(generated, *train.mode_centers, training_proportions(train));
  std::string warning;
  r.base_radius = eval::avg_nn_distance(real, &warning);
  if (!warning.empty()) r.warnings.push_back(warning);
  for (double m : eval::kRadiusMultipliers) {
    r.neighbours.push_back(eval::neighbor_counts(real, generated, r.base_radius, m));
    r.uniformity.push_back(eval::uniformity_stats(r.neighbours.back()));
  }
  return r;
}

Run::Run(RunConfig cfg, std::ostream* log) : cfg_(std::move(cfg)), log_(log) {
  cfg_.finalize();
  dir_ = cfg_.output_root / cfg_.hash();
  fs::create_directories(checkpoints());
  fs::create_directories(metrics());
  fs::create_directories(plots());
}

void Run::say(const std::string& msg) {
  if (log_) *log_ << msg << '\n';
}

void Run::record_timing(const std::string& stage, double seconds) { timings_[stage] = seconds; }

const Dataset& Run::data() {
  if (data_) return *data_;
  Dataset ds = cfg_.data_path.empty() ? make_data(cfg_.data_kind, cfg_.data, cfg_.seed) : load_dataset(cfg_.data_path);
  auto path = checkpoints() / "train_data.csv";
  if (!fs::exists(path)) {
    write_dataset_csv(ds, path);
    say("wrote " + path.string());
  }
  data_ = std::move(ds);
  return *data_;
}

const Dataset& Run::reference() {
  if (reference_) return *reference_;
  const Dataset& train = data();
  Dataset ref;
  if (!cfg_.data_path.empty()) {
    Eigen::Index n = std::min(cfg_.eval_real, train.size());
    ref.name = train.name + "-reference";
    ref.samples = train.samples.topRows(n);
    if (!train.labels.empty()) ref.labels.assign(train.labels.begin(), train.labels.begin() + n);
    ref.mode_centers = train.mode_centers;
  } else {
    DataParams p = cfg_.data;
    p.samples = cfg_.eval_real;
    if (train.mode_weights) p.weights.assign(static_cast<std::size_t>(train.mode_weights->size()),
                                             1.0 / static_cast<double>(train.mode_weights->size()));
    ref = make_data(cfg_.data_kind, p, cfg_.seed + 1);
  }
  reference_ = std::move(ref);
  return *reference_;
}

const diffusion::EpsModel& Run::eps_model() {
  if (eps_) return *eps_;
  auto path = checkpoints() / "eps_model.mgsn";
  if (fs::exists(path)) {
    eps_ = load_eps_model(path);
    return *eps_;
  }
  const Dataset& train = data();
  auto t0 = Clock::now();
  Pcg32 rng = derive_rng(cfg_.seed, 7);
  auto model = diffusion::EpsModel::make(train.dim(), cfg_.embed_dim, cfg_.hidden, cfg_.activation, rng);
  auto losses = diffusion::train_eps_model(model, train.samples, schedule_of(cfg_), cfg_.train);
  record_timing("train-diffusion", seconds_since(t0));
  Matrix table(static_cast<Eigen::Index>(losses.size()), 2);
  for (std::size_t i = 0; i < losses.size(); ++i) table.row(static_cast<Eigen::Index>(i)) << double(i), losses[i];
  write_matrix_csv(table, {"step", "loss"}, metrics() / "train_diffusion_loss.csv");
  save_eps_model(model, path);
  say("wrote " + path.string());
  eps_ = std::move(model);
  return *eps_;
}

const manifold::ManifoldModel& Run::manifold_model() {
  if (manifold_) return *manifold_;
  auto path = checkpoints() / "manifold_model.mgsn";
  if (fs::exists(path)) {
    manifold_ = load_manifold_model(path);
    return *manifold_;
  }
  auto t0 = Clock::now();
  auto result = manifold::train_manifold(data().samples, cfg_.manifold);
  record_timing("train-manifold", seconds_since(t0));
  for (const auto& w : result.log.warnings) say("warning: " + w);
  std::vector<std::array<double, 3>> rows;
  auto add = [&](int stage, const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) rows.push_back({double(stage), double(i), v[i]});
  };
  add(1, result.log.relation_stage);
  add(2, result.log.embed_stage);
  add(3, result.log.joint_objective);
  add(4, result.log.joint_relation);
  Matrix table(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i)
    table.row(static_cast<Eigen::Index>(i)) << rows[i][0], rows[i][1], rows[i][2];
  write_matrix_csv(table, {"stage", "step", "value"}, metrics() / "train_manifold_log.csv");
  save_manifold_model(result.model, path);
  say("wrote " + path.string());
  manifold_ = std::move(result.model);
  return *manifold_;
}

Matrix Run::sample(bool guided, bool trace) {
  const auto& eps = eps_model();
  auto schedule = schedule_of(cfg_);
  auto sc = sampler_of(cfg_);
  auto t0 = Clock::now();
  Matrix out;
  if (guided && cfg_.guidance.active()) {
    const auto& h = manifold_model();
    auto target = guidance::estimate_manifold_target(h, data().samples, cfg_.guidance, cfg_.seed);
    std::vector<guidance::TraceRow> rows;
    out = guidance::guided_sample_many(eps, h, target, schedule, sc, cfg_.guidance, cfg_.eval_samples,
                                       trace ? &rows : nullptr);
    if (trace) {
      Matrix table(static_cast<Eigen::Index>(rows.size()), 5);
      const auto per_batch = static_cast<std::size_t>(std::max(1, cfg_.guidance.guidance_steps));
      for (std::size_t i = 0; i < rows.size(); ++i)
        table.row(static_cast<Eigen::Index>(i)) << double(i / per_batch), double(rows[i].step_index),
            double(rows[i].timestep), rows[i].objective, rows[i].gradient_norm;
      auto path = metrics() / "guidance_trace.csv";
      write_matrix_csv(table, {"batch", "step_index", "timestep", "objective", "gradient_norm"}, path);
      say("wrote " + path.string());
    }
  } else {
    out = guidance::unguided_sample_many(eps, schedule, sc, cfg_.guidance.batch_size, cfg_.eval_samples);
  }
  std::string series = guided ? "guided" : "unguided";
  record_timing("sample-" + series, seconds_since(t0));
  auto path = metrics() / ("samples_" + series + ".csv");
  write_matrix_csv(out, sample_header(out.cols()), path);
  say("wrote " + path.string());
  return out;
}

Matrix Run::samples(bool guided) {
  auto path = metrics() / (std::string("samples_") + (guided ? "guided" : "unguided") + ".csv");
  if (fs::exists(path)) return read_matrix_csv(path);
  return sample(guided);
}

std::map<std::string, EvalResult> Run::evaluate(const std::optional<fs::path>& generated,
                                                const std::optional<fs::path>& real) {
  Matrix real_set = real ? load_dataset(*real).samples : reference().samples;
  std::vector<std::pair<std::string, Matrix>> series;
  if (generated) {
    series.emplace_back("generated", load_dataset(*generated).samples);
  } else {
    series.emplace_back("unguided", samples(false));
    series.emplace_back("guided", samples(true));
  }
  auto t0 = Clock::now();
  std::map<std::string, EvalResult> results;
  for (const auto& [name, gen] : series) {
    auto r = evaluate_samples(gen, real_set, data(), cfg_.eval_projections, cfg_.seed);
    for (const auto& w : r.warnings) say("warning: " + w);
    results.emplace(name, std::move(r));
  }
  record_timing("evaluate", seconds_since(t0));

  const std::string prefix = generated ? "custom_" : "";
  {
    auto path = metrics() / (prefix + "eval_summary.csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "series,n,sliced_wasserstein,energy,tv_uniform,tv_training,base_radius";
    for (double m : eval::kRadiusMultipliers) out << ",mean_k_" << multiplier_tag(m) << ",cv_" << multiplier_tag(m);
    out << '\n';
    for (const auto& [name, _] : series) {
      const auto& r = results.at(name);
      out << name << ',' << r.generated << ',' << num(r.distance.sliced_wasserstein) << ',' << num(r.distance.energy)
          << ',' << num(r.bias ? r.bias->tv_uniform : kNan) << ',' << num(r.bias ? r.bias->tv_training : kNan) << ','
          << num(r.base_radius);
      for (std::size_t i = 0; i < r.uniformity.size(); ++i)
        out << ',' << num(r.uniformity[i].mean) << ',' << num(r.uniformity[i].cv);
      out << '\n';
      summary_[prefix + name + ".sliced_wasserstein"] = r.distance.sliced_wasserstein;
      summary_[prefix + name + ".energy"] = r.distance.energy;
      if (r.bias) summary_[prefix + name + ".tv_uniform"] = r.bias->tv_uniform;
      summary_[prefix + name + ".cv_1.0"] = r.cv(1.0);
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
    say("wrote " + path.string());
  }

  for (const auto& [name, _] : series) {
    const auto& r = results.at(name);
    Matrix counts(static_cast<Eigen::Index>(r.neighbours[0].counts.size()), static_cast<Eigen::Index>(r.neighbours.size()));
    std::vector<std::string> header;
    for (std::size_t j = 0; j < r.neighbours.size(); ++j) {
      header.push_back("k_" + multiplier_tag(r.neighbours[j].multiplier));
      for (std::size_t i = 0; i < r.neighbours[j].counts.size(); ++i)
        counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r.neighbours[j].counts[i];
    }
    write_matrix_csv(counts, header, metrics() / (prefix + "neighbour_counts_" + name + ".csv"));
  }

  for (std::size_t j = 0; j < std::size(eval::kRadiusMultipliers); ++j) {
    std::size_t bins = 0;
    for (const auto& [name, _] : series) bins = std::max(bins, results.at(name).neighbours[j].histogram.size());
    Matrix hist = Matrix::Zero(static_cast<Eigen::Index>(bins), static_cast<Eigen::Index>(series.size() + 1));
    std::vector<std::string> header{"k"};
    for (std::size_t b = 0; b < bins; ++b) hist(static_cast<Eigen::Index>(b), 0) = double(b);
    for (std::size_t s = 0; s < series.size(); ++s) {
      header.push_back(series[s].first);
      const auto& h = results.at(series[s].first).neighbours[j].histogram;
      for (std::size_t b = 0; b < h.size(); ++b)
        hist(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(s + 1)) = h[b];
    }
    write_matrix_csv(hist, header,
                     metrics() / (prefix + "histogram_c" + multiplier_tag(eval::kRadiusMultipliers[j]) + ".csv"));
  }

  if (!generated && results.at("unguided").bias && results.at("guided").bias) {
    const auto& u = *results.at("unguided").bias;
    const auto& g = *results.at("guided").bias;
    Matrix table(u.generated.size(), 5);
    for (Eigen::Index m = 0; m < u.generated.size(); ++m)
      table.row(m) << double(m), u.training(m), u.uniform(m), u.generated(m), g.generated(m);
    write_matrix_csv(table, {"mode", "training", "uniform", "unguided", "guided"}, metrics() / "mode_proportions.csv");
  }
  return results;
}

std::vector<fs::path> Run::ablate(const std::string& axis, const std::vector<std::string>& values, std::ostream& err) {
  if (!axis_keys().count(axis)) {
    std::string known;
    for (const auto& a : sweep_axes()) known += (known.empty() ? "" : "|") + a;
    throw ConfigError("unknown ablation axis '" + axis + "' (expected " + known + ")");
  }
  std::vector<fs::path> written;
  auto t0 = Clock::now();
  auto emit = [&](const std::vector<SweepRow>& rows, const fs::path& path) {
    write_sweep_csv(axis, rows, path);
    say("wrote " + path.string());
    written.push_back(path);
  };
  if (axis == "guidance_steps") {
    for (auto kind : {diffusion::SamplerKind::deterministic, diffusion::SamplerKind::ancestral})
      emit(sweep(*this, axis, values, err, kind),
           metrics() / ("ablate_guidance_steps_" + std::string(diffusion::to_string(kind)) + ".csv"));
  } else {
    emit(sweep(*this, axis, values, err), metrics() / ("ablate_" + axis + ".csv"));
  }
  record_timing("ablate-" + axis, seconds_since(t0));
  return written;
}

std::vector<fs::path> Run::plot() {
  std::vector<fs::path> reports;
  for (double m : eval::kRadiusMultipliers) reports.push_back(metrics() / ("histogram_c" + multiplier_tag(m) + ".csv"));
  bool any = false;
  for (const auto& r : reports) any = any || fs::exists(r);
  if (!any) evaluate();
  if (data().mode_centers) reports.push_back(metrics() / "mode_proportions.csv");
  std::vector<fs::path> written;
  for (const auto& r : reports) {
    if (!fs::exists(r)) throw IoError("missing report '" + r.string() + "'; run evaluate first");
    auto svg = plots() / (r.stem().string() + ".svg");
    plot_report(r, svg);
    say("wrote " + svg.string());
    written.push_back(svg);
  }
  return written;
}

void Run::write_manifest() {
  auto path = dir_ / "manifest.json";
  json previous = json::object();
  if (fs::exists(path)) {
    std::ifstream in(path);
    try {
      previous = json::parse(in);
      if (!previous.is_object()) previous = json::object();
    } catch (const json::exception&) {
      previous = json::object();
    }
  }
  json metrics_obj = previous.value("metrics", json::object());
  for (const auto& [k, v] : summary_) metrics_obj[k] = v;
  json timings = previous.value("timings_seconds", json::object());
  for (const auto& [k, v] : timings_) timings[k] = v;

  std::vector<fs::path> files;
  for (const auto& sub : {checkpoints(), metrics(), plots()})
    for (const auto& e : fs::recursive_directory_iterator(sub))
      if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  json artifacts = json::array();
  for (const auto& f : files) {
    auto bytes = fs::file_size(f);
    if (bytes == 0) throw IoError("artifact '" + f.string() + "' is empty");
    artifacts.push_back({{"path", fs::relative(f, dir_).generic_string()}, {"bytes", bytes}, {"fnv1a64", file_digest(f)}});
  }
  json config = json::object();
  for (const auto& [k, v] : cfg_.entries()) config[k] = v;

  json manifest;
  manifest["format"] = "mgs-run-manifest/1";
  manifest["config_hash"] = cfg_.hash();
  manifest["seed"] = cfg_.seed;
  manifest["config"] = config;
  manifest["artifacts"] = artifacts;
  manifest["metrics"] = metrics_obj;
  // Timings are excluded from the content hash so repeated runs hash equal.
  manifest["content_hash"] = hex64(fnv1a64(config.dump() + artifacts.dump() + metrics_obj.dump()));
  manifest["timings_seconds"] = timings;

  auto tmp = dir_ / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << manifest.dump(2) << '\n';
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
  say("wrote " + path.string());
}

const std::vector<std::string>& sweep_axes() {
  static const std::vector<std::string> axes = {"lambda", "guidance_steps", "batch_size", "relation_source",
                                                "sampler_steps"};
  return axes;
}

RunConfig apply_axis(const RunConfig& base, const std::string& axis, const std::string& value) {
  auto it = axis_keys().find(axis);
  if (it == axis_keys().end()) throw ConfigError("unknown ablation axis '" + axis + "'");
  RunConfig cfg = base;
  cfg.set(it->second, value);
  return cfg;
}

std::vector<SweepRow> sweep(Run& base, const std::string& axis, const std::vector<std::string>& values,
                            std::ostream& err, std::optional<diffusion::SamplerKind> kind) {
  if (values.empty()) throw ConfigError("ablate: no values given");
  RunConfig base_cfg = base.config();
  if (kind) base_cfg.sampler_kind = *kind;
  const auto& eps = base.eps_model();
  auto schedule = schedule_of(base_cfg);
  std::vector<SweepRow> rows;
  std::exception_ptr first_failure;
  for (std::size_t i = 0; i < values.size(); ++i) {
    SweepRow row;
    row.value = values[i];
    try {
      RunConfig rc = apply_axis(base_cfg, axis, values[i]);
      rc.seed = base_cfg.seed + i;
      rc.finalize();
      std::optional<manifold::ManifoldModel> own;
      const manifold::ManifoldModel* h = nullptr;
      if (axis == "relation_source") {
        auto mc = rc.manifold;
        mc.seed = base_cfg.seed;
        own = manifold::train_manifold(base.data().samples, mc).model;
        h = &*own;
      } else {
        h = &base.manifold_model();
      }
      auto target = guidance::estimate_manifold_target(*h, base.data().samples, rc.guidance, rc.seed);
      Matrix gen = guidance::guided_sample_many(eps, *h, target, schedule, sampler_of(rc), rc.guidance, rc.eval_samples);
      auto r = evaluate_samples(gen, base.reference().samples, base.data(), rc.eval_projections, rc.seed);
      row.ok = true;
      row.tv_uniform = r.bias ? r.bias->tv_uniform : kNan;
      row.sw = r.distance.sliced_wasserstein;
      row.cv_k = r.cv(1.0);
    } catch (...) {
      std::string msg;
      auto [code, label] = classify_exception(std::current_exception(), &msg);
      if (!first_failure) first_failure = std::current_exception();
      row.error = msg;
      row.tv_uniform = row.sw = row.cv_k = kNan;
      err << "warning: ablate " << axis << '=' << values[i] << " failed: code=" << code << " kind=" << label
          << " message=\"" << one_line(msg) << "\"\n";
    }
    rows.push_back(std::move(row));
  }
  bool any_ok = std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.ok; });
  if (!any_ok) std::rethrow_exception(first_failure);
  return rows;
}

void write_sweep_csv(const std::string& axis, const std::vector<SweepRow>& rows, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << axis << ",TV_uniform,SW,CV_k\n";
  for (const auto& r : rows) out << r.value << ',' << num(r.tv_uniform) << ',' << num(r.sw) << ',' << num(r.cv_k) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::pair<int, std::string> classify_exception(std::exception_ptr e, std::string* message) {
  auto set = [&](const std::exception& x) {
    if (message) *message = x.what();
  };
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError& x) {
    set(x);
    return {kExitConfig, "config"};
  } catch (const ContractError& x) {
    set(x);
    return {kExitConfig, "contract"};
  } catch (const NumericError& x) {
    set(x);
    return {kExitNumeric, "numeric"};
  } catch (const IoError& x) {
    set(x);
    return {kExitIo, "io"};
  } catch (const fs::filesystem_error& x) {
    set(x);
    return {kExitIo, "io"};
  } catch (const json::exception& x) {
    set(x);
    return {kExitIo, "io"};
  } catch (const std::exception& x) {
    set(x);
    return {1, "internal"};
  } catch (...) {
    if (message) *message = "unknown failure";
    return {1, "internal"};
  }
}

int run_command(const std::string& command, const CommandOptions& options, std::ostream& log, std::ostream& err) {
  try {
    if (command == "plot" && !options.reports.empty()) {
      for (const auto& r : options.reports) {
        fs::path dir = options.out ? *options.out : r.parent_path();
        auto svg = dir / (r.stem().string() + ".svg");
        plot_report(r, svg);
        log << "wrote " << svg.string() << '\n';
      }
      return kExitOk;
    }

    RunConfig cfg = options.config.empty() ? RunConfig{} : load_config(options.config);
    if (options.seed) cfg.seed = *options.seed;
    if (options.out) cfg.output_root = *options.out;
    Run run(cfg, &log);
    log << "run directory " << run.dir().string() << '\n';

    if (command == "make-data") {
      run.data();
      run.reference();
    } else if (command == "train-diffusion") {
      run.eps_model();
    } else if (command == "train-manifold") {
      run.manifold_model();
    } else if (command == "sample") {
      run.sample(options.guided, options.trace);
    } else if (command == "evaluate") {
      run.evaluate(options.generated, options.real);
    } else if (command == "ablate") {
      if (options.axis.empty()) throw ConfigError("ablate needs --axis");
      run.ablate(options.axis, split_values(options.values), err);
    } else if (command == "plot") {
      run.plot();
    } else {
      throw ConfigError("unknown command '" + command + "'");
    }
    run.write_manifest();
    return kExitOk;
  } catch (...) {
    std::string msg;
    auto [code, label] = classify_exception(std::current_exception(), &msg);
    err << "error: code=" << code << " kind=" << label << " message=\"" << one_line(msg) << "\"\n";
    return code;
  }
}

}  // namespace mgs::io
