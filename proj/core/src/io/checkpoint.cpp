#include "mgs/io/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace mgs::io {
namespace {

struct Section {
  std::string tag;
  std::vector<double> scalars;
  nn::FeedforwardNet net;
};

template <typename T>
void put(std::ostream& out, T v) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw IoError(path.string() + ": truncated checkpoint");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

void write_sections(const std::vector<Section>& sections, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write("MGSN", 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(sections.size()));
  for (const auto& s : sections) {
    out.write(s.tag.data(), 4);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.scalars.size()));
    for (double v : s.scalars) put<double>(out, v);
    const auto& layers = s.net.layers();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(layers.size()));
    for (const auto& l : layers) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(l.in_dim()));
      put<std::uint32_t>(out, static_cast<std::uint32_t>(l.out_dim()));
      put<std::uint32_t>(out, static_cast<std::uint32_t>(l.activation));
    }
    for (const auto& l : layers) {
      for (Eigen::Index i = 0; i < l.weights.rows(); ++i)
        for (Eigen::Index j = 0; j < l.weights.cols(); ++j) put<double>(out, l.weights(i, j));
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) put<double>(out, l.bias(i));
    }
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::map<std::string, Section> read_sections(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "MGSN", 4) != 0)
    throw IoError(path.string() + ": bad magic (expected MGSN)");
  auto version = get<std::uint32_t>(in, path);
  if (version != kCheckpointVersion)
    throw IoError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  auto count = get<std::uint32_t>(in, path);
  std::map<std::string, Section> sections;
  for (std::uint32_t s = 0; s < count; ++s) {
    Section sec;
    char tag[4];
    if (!in.read(tag, 4)) throw IoError(path.string() + ": truncated checkpoint");
    sec.tag.assign(tag, 4);
    auto ns = get<std::uint32_t>(in, path);
    for (std::uint32_t i = 0; i < ns; ++i) sec.scalars.push_back(get<double>(in, path));
    auto nl = get<std::uint32_t>(in, path);
    if (nl == 0 || nl > 1024) throw IoError(path.string() + ": implausible layer count");
    std::vector<nn::DenseLayer> layers(nl);
    for (auto& l : layers) {
      auto din = get<std::uint32_t>(in, path);
      auto dout = get<std::uint32_t>(in, path);
      auto act = get<std::uint32_t>(in, path);
      if (din == 0 || dout == 0 || act > 3) throw IoError(path.string() + ": corrupt layer header");
      l.weights.resize(dout, din);
      l.bias.resize(dout);
      l.activation = static_cast<nn::Activation>(act);
    }
    for (auto& l : layers) {
      for (Eigen::Index i = 0; i < l.weights.rows(); ++i)
        for (Eigen::Index j = 0; j < l.weights.cols(); ++j) l.weights(i, j) = get<double>(in, path);
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = get<double>(in, path);
    }
    try {
      sec.net = nn::FeedforwardNet(std::move(layers));
    } catch (const ContractError& e) {
      throw IoError(path.string() + ": " + e.what());
    }
    sections[sec.tag] = std::move(sec);
  }
  return sections;
}

const Section& need(const std::map<std::string, Section>& sections, const std::string& tag,
                    const std::filesystem::path& path, std::size_t scalars) {
  auto it = sections.find(tag);
  if (it == sections.end()) throw IoError(path.string() + ": missing section " + tag);
  if (it->second.scalars.size() != scalars) throw IoError(path.string() + ": section " + tag + " has bad metadata");
  return it->second;
}

}  // namespace

void save_eps_model(const diffusion::EpsModel& model, const std::filesystem::path& path) {
  write_sections({{"EPSM", {static_cast<double>(model.embed_dim())}, model.net()}}, path);
}

diffusion::EpsModel load_eps_model(const std::filesystem::path& path) {
  auto sections = read_sections(path);
  const auto& s = need(sections, "EPSM", path, 1);
  try {
    return diffusion::EpsModel(s.net, static_cast<int>(s.scalars[0]));
  } catch (const ContractError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void save_manifold_model(const manifold::ManifoldModel& model, const std::filesystem::path& path) {
  write_sections({{"EMBF", {model.embedder.normalize ? 1.0 : 0.0}, model.embedder.net},
                  {"RELG", {model.relation.tau}, model.relation.phi}},
                 path);
}

manifold::ManifoldModel load_manifold_model(const std::filesystem::path& path) {
  auto sections = read_sections(path);
  const auto& f = need(sections, "EMBF", path, 1);
  const auto& g = need(sections, "RELG", path, 1);
  if (f.net.output_dim() != g.net.input_dim()) throw IoError(path.string() + ": F and g dims do not chain");
  manifold::ManifoldModel m;
  m.embedder.net = f.net;
  m.embedder.normalize = f.scalars[0] != 0.0;
  m.relation.phi = g.net;
  m.relation.tau = g.scalars[0];
  return m;
}

}  // namespace mgs::io
