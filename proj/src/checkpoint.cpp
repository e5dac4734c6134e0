#include "mxm/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mxm {

namespace {

constexpr const char *kMagic = "MXMNET-CHECKPOINT";
constexpr int kVersion = 1;

void put_le(std::ostream &out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int i = 0; i < 8; ++i)
    bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

double get_le(std::istream &in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char *>(bytes), 8))
    throw std::runtime_error("checkpoint: truncated tensor data");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i)
    bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

} // namespace

void save_checkpoint(std::ostream &out, const ModelConfig &cfg, const ParamStore &params) {
  out << kMagic << ' ' << kVersion << " hidden=" << cfg.hidden
      << " layers=" << cfg.layers << " residuals=" << cfg.residuals
      << " order=" << to_string(cfg.order) << " params=" << params.size() << '\n';
  for (const auto &[name, t] : params.entries()) {
    out << name << ' ' << t.rank();
    for (auto d : t.shape())
      out << ' ' << d;
    out << '\n';
    for (double v : t.data())
      put_le(out, v);
    out << '\n';
  }
  if (!out)
    throw std::runtime_error("checkpoint: write failed");
}

void save_checkpoint(const std::filesystem::path &path, const ModelConfig &cfg,
                     const ParamStore &params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot write checkpoint " + path.string());
  save_checkpoint(out, cfg, params);
}

Checkpoint load_checkpoint(std::istream &in) {
  std::string header;
  if (!std::getline(in, header))
    throw std::runtime_error("checkpoint: empty file");
  std::istringstream hs(header);
  std::string magic;
  int version = 0;
  hs >> magic >> version;
  if (magic != kMagic)
    throw std::runtime_error("checkpoint: bad magic '" + magic + "'");
  if (version != kVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  std::map<std::string, std::string> fields;
  std::string tok;
  while (hs >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("checkpoint: malformed header field '" + tok + "'");
    fields[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  auto field = [&](const char *key) {
    auto it = fields.find(key);
    if (it == fields.end())
      throw std::runtime_error(std::string("checkpoint: header lacks ") + key);
    return it->second;
  };

  Checkpoint ck;
  try {
    ck.config.hidden = std::stoul(field("hidden"));
    ck.config.layers = std::stoul(field("layers"));
    ck.config.residuals = std::stoul(field("residuals"));
    ck.config.order = parse_block_order(field("order"));
  } catch (const std::invalid_argument &e) {
    throw std::runtime_error(std::string("checkpoint: bad header: ") + e.what());
  }
  const std::size_t count = std::stoul(field("params"));

  for (std::size_t p = 0; p < count; ++p) {
    std::string line;
    if (!std::getline(in, line))
      throw std::runtime_error("checkpoint: expected " + std::to_string(count) +
                               " records, found " + std::to_string(p));
    std::istringstream ls(line);
    std::string name;
    std::size_t rank = 0;
    if (!(ls >> name >> rank) || rank == 0)
      throw std::runtime_error("checkpoint: malformed record header '" + line + "'");
    ad::Shape shape(rank);
    for (auto &d : shape)
      if (!(ls >> d))
        throw std::runtime_error("checkpoint: malformed shape in '" + line + "'");
    std::vector<double> values(ad::numel(shape));
    for (double &v : values)
      v = get_le(in);
    if (in.get() != '\n')
      throw std::runtime_error("checkpoint: missing record terminator after '" + name + "'");
    ck.params.add(name, ad::Tensor::from(std::move(shape), std::move(values), true));
  }
  return ck;
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open checkpoint " + path.string());
  return load_checkpoint(in);
}

} // namespace mxm
