#include "mgs/io/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace mgs::io {
namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError("config key '" + key + "': expected an unsigned integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected true|false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<Eigen::Index> to_dims(const std::string& key, const std::string& v) {
  std::vector<Eigen::Index> out;
  for (const auto& s : split_list(v)) {
    auto d = to_int(key, s);
    if (d <= 0) throw ConfigError("config key '" + key + "': layer widths must be positive");
    out.push_back(static_cast<Eigen::Index>(d));
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': need at least one width");
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>)
      out += format_double(v[i]);
    else
      out += std::to_string(v[i]);
  }
  return out;
}

std::string num(double v) { return format_double(v); }
std::string num(long long v) { return std::to_string(v); }

int positive_int(const std::string& key, const std::string& v) {
  auto x = to_int(key, v);
  if (x <= 0) throw ConfigError("config key '" + key + "': must be positive");
  return static_cast<int>(x);
}

int non_negative_int(const std::string& key, const std::string& v) {
  auto x = to_int(key, v);
  if (x < 0) throw ConfigError("config key '" + key + "': must be non-negative");
  return static_cast<int>(x);
}

double positive(const std::string& key, const std::string& v) {
  double x = to_double(key, v);
  if (!(x > 0.0)) throw ConfigError("config key '" + key + "': must be positive");
  return x;
}

struct KeySpec {
  std::string name;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

using C = RunConfig;
using S = const std::string&;

const std::vector<KeySpec>& specs() {
  static const std::vector<KeySpec> table = {
      {"seed", [](C& c, S k, S v) { c.seed = to_u64(k, v); }, [](const C& c) { return std::to_string(c.seed); }},
      {"data.kind", [](C& c, S, S v) { c.data_kind = data_kind_from_string(v); },
       [](const C& c) { return std::string(to_string(c.data_kind)); }},
      {"data.path", [](C& c, S, S v) { c.data_path = v; }, [](const C& c) { return c.data_path; }},
      {"data.samples", [](C& c, S k, S v) { c.data.samples = positive_int(k, v); },
       [](const C& c) { return num(static_cast<long long>(c.data.samples)); }},
      {"data.modes", [](C& c, S k, S v) { c.data.modes = non_negative_int(k, v); },
       [](const C& c) { return num(static_cast<long long>(c.data.modes)); }},
      {"data.weights",
       [](C& c, S k, S v) {
         c.data.weights.clear();
         for (const auto& s : split_list(v)) c.data.weights.push_back(to_double(k, s));
       },
       [](const C& c) { return join(c.data.weights); }},
      {"data.noise", [](C& c, S k, S v) { c.data.noise = to_double(k, v); },
       [](const C& c) { return num(c.data.noise); }},
      {"data.radius", [](C& c, S k, S v) { c.data.radius = to_double(k, v); },
       [](const C& c) { return num(c.data.radius); }},
      {"data.ambient_dim", [](C& c, S k, S v) { c.data.ambient_dim = positive_int(k, v); },
       [](const C& c) { return num(static_cast<long long>(c.data.ambient_dim)); }},
      {"data.subspace_dim", [](C& c, S k, S v) { c.data.subspace_dim = positive_int(k, v); },
       [](const C& c) { return num(static_cast<long long>(c.data.subspace_dim)); }},
      {"schedule.steps", [](C& c, S k, S v) { c.schedule_steps = positive_int(k, v); },
       [](const C& c) { return num(static_cast<long long>(c.schedule_steps)); }},
      {"schedule.beta_start", [](C& c, S k, S v) { c.beta_start = positive(k, v); },
       [](const C& c) { return num(c.beta_start); }},
      {"schedule.beta_end", [](C& c, S k, S v) { c.beta_end = positive(k, v); },
       [](const C& c) { return num(c.beta_end); }},
      {"model.embed_dim", [](C& c, S k, S v) { c.embed_dim = positive_int(k, v); },
       [](const C& c) { return num(static_cast<long long>(c.embed_dim)); }},
      {"model.hidden", [](C& c, S k, S v) { c.hidden = to_dims(k, v); }, [](const C& c) { return join(c.hidden); }},
      {"model.activation",
       [](C& c, S k, S v) {
         try {
           c.activation = nn::activation_from_string(v);
         } catch (const ContractError&) {
           throw ConfigError("config key '" + k + "': unknown activation '" + v + "'");
         }
       },
       [](const C& c) { return std::string(nn::to_string(c.activation)); }},
      {"train.steps", [](C& c, S k, S v) { c.train.steps = non_negative_int(k, v); },
       [](const C& c) { return num(static_cast<long long>(c.train.steps)); }},
      {"train.batch", [](C& c, S k, S v) { c.train.batch_size = positive_int(k, v); },
       [](const C& c) { return num(static_cast<long long>(c.train.batch_size)); }},
      {"train.lr", [](C& c, S k, S v) { c.train.learning_rate = positive(k, v); },
       [](const C& c) { return num(c.train.learning_rate); }},
      {"train.loss_weighting", [](C& c, S, S v) { c.train.weighting = diffusion::loss_weighting_from_string(v); },
       [](const C& c) { return std::string(diffusion::to_string(c.train.weighting)); }},
      {"manifold.feature_dim", [](C& c, S k, S v) { c.manifold.feature_dim = positive_int(k, v); },
       [](const C& c) { return num(static_cast<long long>(c.manifold.feature_dim)); }},
      {"manifold.embed_hidden", [](C& c, S k, S v) { c.manifold.embed_hidden = to_dims(k, v); },
       [](const C& c) { return join(c.manifold.embed_hidden); }},
      {"manifold.relation_hidden", [](C& c, S k, S v) { c.manifold.relation_hidden = to_dims(k, v); },
       [](const C& c) { return join(c.manifold.relation_hidden); }},
      {"manifold.relation_dim", [](C& c, S k, S v) { c.manifold.relation_dim = positive_int(k, v); },
       [](const C& c) { return num(static_cast<long long>(c.manifold.relation_dim)); }},
      {"manifold.relation_tau", [](C& c, S k, S v) { c.manifold.relation_tau = positive(k, v); },
       [](const C& c) { return num(c.manifold.relation_tau); }},
      {"manifold.normalize", [](C& c, S k, S v) { c.manifold.normalize = to_bool(k, v); },
       [](const C& c) { return std::string(c.manifold.normalize ? "true" : "false"); }},
      {"manifold.prior_dim", [](C& c, S k, S v) { c.manifold.prior_dim = positive_int(k, v); },
       [](const C& c) { return num(static_cast<long long>(c.manifold.prior_dim)); }},
      {"manifold.prior_tau", [](C& c, S k, S v) { c.manifold.prior_tau = to_double(k, v); },
       [](const C& c) { return num(c.manifold.prior_tau); }},
      {"manifold.form", [](C& c, S, S v) { c.manifold.objective.form = manifold::objective_form_from_string(v); },
       [](const C& c) { return std::string(manifold::to_string(c.manifold.objective.form)); }},
      {"manifold.eps_sq", [](C& c, S k, S v) { c.manifold.objective.eps_sq = positive(k, v); },
       [](const C& c) { return num(c.manifold.objective.eps_sq); }},
      {"manifold.relation_source",
       [](C& c, S k, S v) {
         if (v == "learnable") {
           c.relation_source = v;
         } else if (v.rfind("kmeans-", 0) == 0) {
           positive_int(k, v.substr(7));
           c.relation_source = v;
         } else {
           throw ConfigError("config key '" + k + "': expected learnable|kmeans-<k>, got '" + v + "'");
         }
       },
       [](const C& c) { return c.relation_source; }},
      {"manifold.relation_steps", [](C& c, S k, S v) { c.manifold.relation_steps = non_negative_int(k, v); },
       [](const C& c) { return num(static_cast<long long>(c.manifold.relation_steps)); }},
      {"manifold.embed_steps", [](C& c, S k, S v) { c.manifold.embed_steps = non_negative_int(k, v); },
       [](const C& c) { return num(static_cast<long long>(c.manifold.embed_steps)); }},
      {"manifold.joint_steps", [](C& c, S k, S v) { c.manifold.joint_steps = non_negative_int(k, v); },
       [](const C& c) { return num(static_cast<long long>(c.manifold.joint_steps)); }},
      {"manifold.relation_lr", [](C& c, S k, S v) { c.manifold.relation_lr = positive(k, v); },
       [](const C& c) { return num(c.manifold.relation_lr); }},
      {"manifold.embed_lr", [](C& c, S k, S v) { c.manifold.embed_lr = positive(k, v); },
       [](const C& c) { return num(c.manifold.embed_lr); }},
      {"manifold.batch", [](C& c, S k, S v) { c.manifold.batch_size = positive_int(k, v); },
       [](const C& c) { return num(static_cast<long long>(c.manifold.batch_size)); }},
      {"sampler.kind", [](C& c, S, S v) { c.sampler_kind = diffusion::sampler_kind_from_string(v); },
       [](const C& c) { return std::string(diffusion::to_string(c.sampler_kind)); }},
      {"sampler.steps", [](C& c, S k, S v) { c.sample_steps = positive_int(k, v); },
       [](const C& c) { return num(static_cast<long long>(c.sample_steps)); }},
      {"guidance.lambda",
       [](C& c, S k, S v) {
         double x = to_double(k, v);
         if (x < 0.0) throw ConfigError("config key '" + k + "': must be non-negative");
         c.guidance.lambda = x;
       },
       [](const C& c) { return num(c.guidance.lambda); }},
      {"guidance.steps",
       [](C& c, S k, S v) {
         if (v == "auto") {
           c.guidance_steps_setting = -1;
           return;
         }
         c.guidance_steps_setting = non_negative_int(k, v);
       },
       [](const C& c) {
         return c.guidance_steps_setting < 0 ? std::string("auto") : num(static_cast<long long>(c.guidance_steps_setting));
       }},
      {"guidance.batch", [](C& c, S k, S v) { c.guidance.batch_size = positive_int(k, v); },
       [](const C& c) { return num(static_cast<long long>(c.guidance.batch_size)); }},
      {"guidance.skip_eps_jacobian", [](C& c, S k, S v) { c.guidance.skip_eps_jacobian = to_bool(k, v); },
       [](const C& c) { return std::string(c.guidance.skip_eps_jacobian ? "true" : "false"); }},
      {"guidance.max_step", [](C& c, S k, S v) { c.guidance.max_step = to_double(k, v); },
       [](const C& c) { return num(c.guidance.max_step); }},
      {"guidance.provenance", [](C& c, S, S v) { c.guidance.provenance = guidance::provenance_from_string(v); },
       [](const C& c) { return std::string(guidance::to_string(c.guidance.provenance)); }},
      {"guidance.guide_on", [](C& c, S, S v) { c.guidance.guide_on = guidance::guide_on_from_string(v); },
       [](const C& c) { return std::string(guidance::to_string(c.guidance.guide_on)); }},
      {"guidance.target", [](C& c, S, S v) { c.guidance.target = guidance::target_mode_from_string(v); },
       [](const C& c) { return std::string(guidance::to_string(c.guidance.target)); }},
      {"eval.samples", [](C& c, S k, S v) { c.eval_samples = positive_int(k, v); },
       [](const C& c) { return num(static_cast<long long>(c.eval_samples)); }},
      {"eval.real", [](C& c, S k, S v) { c.eval_real = positive_int(k, v); },
       [](const C& c) { return num(static_cast<long long>(c.eval_real)); }},
      {"eval.projections", [](C& c, S k, S v) { c.eval_projections = positive_int(k, v); },
       [](const C& c) { return num(static_cast<long long>(c.eval_projections)); }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& s : specs()) k.push_back(s.name);
    k.emplace_back("output.root");
    return k;
  }();
  return keys;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "output.root") {
    output_root = value;
    return;
  }
  for (const auto& s : specs()) {
    if (s.name == key) {
      s.set(*this, key, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::finalize() {
  train.seed = seed;
  manifold.seed = seed;
  manifold.relation_source =
      relation_source == "learnable" ? manifold::RelationSource::learnable : manifold::RelationSource::kmeans;
  if (manifold.relation_source == manifold::RelationSource::kmeans)
    manifold.kmeans_k = static_cast<int>(std::stol(relation_source.substr(7)));
  if (beta_start > beta_end || beta_end >= 1.0) throw ConfigError("schedule: need beta_start <= beta_end < 1");
  if (schedule_steps < 2) throw ConfigError("schedule.steps must be >= 2");
  if (embed_dim % 2 != 0) throw ConfigError("model.embed_dim must be even");
  if (sample_steps < 2 || sample_steps > schedule_steps)
    throw ConfigError("sampler.steps must lie in [2, schedule.steps]");
  guidance.guidance_steps = guidance_steps_setting >= 0
                                ? guidance_steps_setting
                                : (sampler_kind == diffusion::SamplerKind::deterministic ? 5 : 10);
  if (guidance.guidance_steps > sample_steps) throw ConfigError("guidance.steps must not exceed sampler.steps");
  if (guidance.lambda > 0.0 && guidance.batch_size < 2) throw ConfigError("guidance.batch must be >= 2 when lambda > 0");
  if (!data_path.empty() && !std::filesystem::exists(data_path))
    throw ConfigError("data.path '" + data_path + "' does not exist");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : specs()) out.emplace_back(s.name, s.get(*this));
  return out;
}

std::string RunConfig::canonical() const {
  std::string text;
  for (const auto& [k, v] : entries()) text += k + "=" + v + "\n";
  return text;
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t h) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string RunConfig::hash() const { return hex64(fnv1a64(canonical())); }

RunConfig parse_config(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    try {
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

}  // namespace mgs::io
