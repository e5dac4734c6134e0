#include "mxm/model.hpp"

#include "mxm/basis.hpp"
#include "mxm/elements.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace mxm {

std::string to_string(BlockOrder order) {
  return order == BlockOrder::GlobalFirst ? "global_first" : "local_first";
}

BlockOrder parse_block_order(const std::string &text) {
  if (text == "global_first")
    return BlockOrder::GlobalFirst;
  if (text == "local_first")
    return BlockOrder::LocalFirst;
  throw std::invalid_argument("unknown block order '" + text +
                              "' (expected global_first or local_first)");
}

void ModelConfig::validate() const {
  if (hidden == 0)
    throw std::invalid_argument("hidden dimension must be positive");
  if (layers == 0)
    throw std::invalid_argument("number of layers must be positive");
}

// ---------------------------------------------------------------------------
// ParamStore

const ad::Tensor &ParamStore::add(std::string name, ad::Tensor value) {
  if (index_.count(name))
    throw std::invalid_argument("duplicate parameter name '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), std::move(value));
  return entries_.back().second;
}

const ad::Tensor &ParamStore::get(const std::string &name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw std::out_of_range("no parameter named '" + name + "'");
  return entries_[it->second].second;
}

bool ParamStore::contains(const std::string &name) const {
  return index_.count(name) > 0;
}

std::size_t ParamStore::value_count() const {
  std::size_t n = 0;
  for (const auto &[name, t] : entries_)
    n += t.size();
  return n;
}

ParamStore ParamStore::clone() const {
  ParamStore copy;
  for (const auto &[name, t] : entries_) {
    auto c = ad::Tensor::from(t.shape(), {t.data().begin(), t.data().end()},
                              t.requires_grad());
    copy.add(name, c);
  }
  return copy;
}

void ParamStore::zero_grad() {
  for (auto &[name, t] : entries_)
    t.zero_grad();
}

void ParamStore::copy_values_from(const ParamStore &other) {
  if (other.size() != size())
    throw std::invalid_argument("copy_values_from: parameter count differs");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto &[name, dst] = entries_[i];
    const auto &[oname, src] = other.entries_[i];
    if (name != oname || dst.shape() != src.shape())
      throw std::invalid_argument("copy_values_from: mismatch at '" + name + "'");
    std::copy(src.data().begin(), src.data().end(), dst.data().begin());
  }
}

// ---------------------------------------------------------------------------
// Construction

namespace {

/// Supplies the tensor for each named parameter, either freshly initialized
/// or looked up in an existing store.
class ParamSource {
public:
  virtual ~ParamSource() = default;
  virtual ad::Tensor make(const std::string &name, ad::Shape shape,
                          double bound) = 0;
};

class RandomSource : public ParamSource {
public:
  RandomSource(ParamStore &store, std::uint64_t seed) : store_(store), rng_(seed) {}

  ad::Tensor make(const std::string &name, ad::Shape shape, double bound) override {
    std::vector<double> values(ad::numel(shape));
    for (double &v : values) {
      // 53 random mantissa bits -> [0, 1)
      const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
      v = -bound + 2.0 * bound * u;
    }
    return store_.add(name, ad::Tensor::from(std::move(shape), std::move(values), true));
  }

private:
  ParamStore &store_;
  std::mt19937_64 rng_;
};

class BindSource : public ParamSource {
public:
  explicit BindSource(const ParamStore &store) : store_(store) {}

  ad::Tensor make(const std::string &name, ad::Shape shape, double) override {
    const ad::Tensor &t = store_.get(name);
    if (t.shape() != shape)
      throw std::invalid_argument("parameter '" + name + "' has shape " +
                                  ad::shape_str(t.shape()) + ", expected " +
                                  ad::shape_str(shape));
    ++used_;
    ad::Tensor bound = t;
    bound.set_requires_grad(true);
    return bound;
  }

  std::size_t used() const { return used_; }

private:
  const ParamStore &store_;
  std::size_t used_ = 0;
};

double fan_in_bound(std::size_t fan_in) {
  return 1.0 / std::sqrt(static_cast<double>(fan_in));
}

Dense make_dense(ParamSource &src, const std::string &prefix, std::size_t in,
                 std::size_t out, bool bias = true) {
  Dense d;
  d.weight = src.make(prefix + "/w", {in, out}, fan_in_bound(in));
  if (bias)
    d.bias = src.make(prefix + "/b", {out}, fan_in_bound(in));
  return d;
}

Mlp make_mlp(ParamSource &src, const std::string &prefix, std::size_t in,
             std::size_t hidden) {
  return {make_dense(src, prefix + "/l1", in, hidden),
          make_dense(src, prefix + "/l2", hidden, hidden)};
}

UpdateFn make_update(ParamSource &src, const std::string &prefix, std::size_t f,
                     std::size_t n) {
  UpdateFn u;
  for (std::size_t r = 0; r < n; ++r) {
    const auto p = prefix + "/res" + std::to_string(r);
    u.blocks.push_back({make_dense(src, p + "/l1", f, f), make_dense(src, p + "/l2", f, f)});
  }
  return u;
}

ad::Tensor make_edge_weight(ParamSource &src, const std::string &name, std::size_t f) {
  return src.make(name, {std::size_t{basis::kNumRadial}, f},
                  fan_in_bound(basis::kNumRadial));
}

void build(ParamSource &src, const ModelConfig &cfg, MxmNet &net) {
  const std::size_t f = cfg.hidden;
  const std::size_t edge_in = 2 * f + basis::kNumRadial;
  net.embedding = src.make("embedding", {std::size_t{kMaxAtomicNumber}, f}, std::sqrt(3.0));
  if (cfg.order == BlockOrder::LocalFirst)
    net.initial_to_local = make_mlp(src, "initial_to_local", f, f);

  for (std::size_t layer = 0; layer < cfg.layers; ++layer) {
    const auto p = "layer" + std::to_string(layer);
    MxmBlock b;
    auto make_pass = [&](const std::string &q) {
      return GlobalPass{make_mlp(src, q + "/mlp", edge_in, f),
                        make_edge_weight(src, q + "/edge_w", f)};
    };
    b.global.first = make_pass(p + "/global/pass1");
    b.global.update = make_update(src, p + "/global/update", f, cfg.residuals);
    b.global.second = make_pass(p + "/global/pass2");

    b.to_local = make_mlp(src, p + "/to_local", f, f);

    const auto q = p + "/local";
    b.local.edge_kj = make_mlp(src, q + "/mlp_kj", edge_in, f);
    b.local.w_e1 = make_edge_weight(src, q + "/w_e1", f);
    b.local.angle_two_hop = make_mlp(src, q + "/mlp_a1", basis::kSbfSize, f);
    b.local.edge_ji = make_mlp(src, q + "/mlp_ji", edge_in, f);
    b.local.message_j2i = make_mlp(src, q + "/mlp_j2i", f, f);
    b.local.w_e2 = make_edge_weight(src, q + "/w_e2", f);
    b.local.angle_one_hop = make_mlp(src, q + "/mlp_a2", basis::kSbfSize, f);
    b.local.edge_ji_prime = make_mlp(src, q + "/mlp_ji_prime", f, f);
    b.local.w_e3 = make_edge_weight(src, q + "/w_e3", f);
    b.local.update = make_update(src, q + "/update", f, cfg.residuals);

    b.output.first = make_dense(src, p + "/output/l1", f, f);
    b.output.second = make_dense(src, p + "/output/l2", f, f);
    b.output.final_weight = src.make(p + "/output/final_w", {f, 1}, fan_in_bound(f));

    b.to_global = make_mlp(src, p + "/to_global", f, f);
    net.blocks.push_back(std::move(b));
  }
}

} // namespace

MxmNet MxmNet::init(const ModelConfig &cfg, std::uint64_t seed) {
  cfg.validate();
  MxmNet net;
  net.cfg_ = cfg;
  RandomSource src(net.params_, seed);
  build(src, cfg, net);
  return net;
}

MxmNet MxmNet::bind(const ModelConfig &cfg, ParamStore params) {
  cfg.validate();
  MxmNet net;
  net.cfg_ = cfg;
  net.params_ = std::move(params);
  BindSource src(net.params_);
  build(src, cfg, net);
  if (src.used() != net.params_.size())
    throw std::invalid_argument("parameter store holds " +
                                std::to_string(net.params_.size()) +
                                " tensors but the model uses " +
                                std::to_string(src.used()));
  return net;
}

// ---------------------------------------------------------------------------
// Layers

ad::Tensor dense(ad::Tape &tape, const Dense &layer, const ad::Tensor &x) {
  auto y = ad::matmul(tape, x, layer.weight);
  if (layer.bias.defined())
    y = ad::add_bias(tape, y, layer.bias);
  return y;
}

ad::Tensor mlp(ad::Tape &tape, const Mlp &net, const ad::Tensor &x) {
  auto h = ad::swish(tape, dense(tape, net.first, x));
  return ad::swish(tape, dense(tape, net.second, h));
}

ad::Tensor residual_update(ad::Tape &tape, const UpdateFn &fn, const ad::Tensor &h) {
  ad::Tensor out = h;
  for (const auto &block : fn.blocks) {
    auto inner = ad::swish(tape, dense(tape, block.first, out));
    out = ad::add(tape, out, dense(tape, block.second, inner));
  }
  return out;
}

namespace {

ad::Tensor edge_inputs(ad::Tape &tape, const ad::Tensor &h, const ad::Index &src,
                       const ad::Index &dst, const ad::Tensor &rbf) {
  return ad::concat_cols(tape, {ad::gather_rows(tape, h, src),
                                ad::gather_rows(tape, h, dst), rbf});
}

void require_rows(const ad::Tensor &h, const Features &f, const char *op) {
  if (h.rank() != 2 || h.rows() != f.n_atoms)
    throw std::invalid_argument(std::string(op) + ": node states " +
                                ad::shape_str(h.shape()) + " do not match " +
                                std::to_string(f.n_atoms) + " atoms");
}

} // namespace

ad::Tensor global_pass(ad::Tape &tape, const GlobalPass &pass, const ad::Tensor &h,
                       const Features &f, MessageCounts *tally) {
  require_rows(h, f, "global_mp");
  auto x = edge_inputs(tape, h, f.global_src, f.global_dst, f.rbf_global);
  auto m = ad::mul(tape, mlp(tape, pass.message, x),
                   ad::matmul(tape, f.rbf_global, pass.edge_weight));
  if (tally)
    tally->global += m.rows();
  return ad::add(tape, h, ad::segment_sum(tape, m, f.global_dst, f.n_atoms));
}

ad::Tensor global_mp(ad::Tape &tape, const GlobalMp &mp, const ad::Tensor &h,
                     const Features &f, MessageCounts *tally) {
  auto out = global_pass(tape, mp.first, h, f, tally);
  out = residual_update(tape, mp.update, out);
  return global_pass(tape, mp.second, out, f, tally);
}

ad::Tensor local_mp(ad::Tape &tape, const LocalMp &mp, const ad::Tensor &h,
                    const Features &f, MessageCounts *tally) {
  require_rows(h, f, "local_mp");
  const std::size_t n_edges = f.local_src.size();
  if (f.rbf_local.rows() != n_edges || f.sbf_two_hop.rows() != f.two_hop_message.size() ||
      f.sbf_one_hop.rows() != f.one_hop_message.size())
    throw std::invalid_argument("local_mp: basis rows inconsistent with edges/triples");
  if (f.two_hop_target.size() != f.two_hop_message.size() ||
      f.one_hop_target.size() != f.one_hop_message.size())
    throw std::invalid_argument("local_mp: triple index vectors differ in length");
  // two-hop: k->j feeds j->i with k != i; one-hop: j'->i feeds j->i with j' != j
  for (std::size_t t = 0; t < f.two_hop_message.size(); ++t) {
    const auto msg = f.two_hop_message[t], tgt = f.two_hop_target[t];
    if (msg >= n_edges || tgt >= n_edges || f.local_dst[msg] != f.local_src[tgt] ||
        f.local_src[msg] == f.local_dst[tgt])
      throw std::invalid_argument("local_mp: two-hop triple " + std::to_string(t) +
                                  " is inconsistent with the local edges");
  }
  for (std::size_t t = 0; t < f.one_hop_message.size(); ++t) {
    const auto msg = f.one_hop_message[t], tgt = f.one_hop_target[t];
    if (msg >= n_edges || tgt >= n_edges || f.local_dst[msg] != f.local_dst[tgt] ||
        f.local_src[msg] == f.local_src[tgt])
      throw std::invalid_argument("local_mp: one-hop triple " + std::to_string(t) +
                                  " is inconsistent with the local edges");
  }

  auto x = edge_inputs(tape, h, f.local_src, f.local_dst, f.rbf_local);

  // Step 1: two-hop angles. Messages along k->j, gated by the angle k-j-i,
  // collected on edge j->i.
  auto m_kj = ad::mul(tape, mlp(tape, mp.edge_kj, x),
                      ad::matmul(tape, f.rbf_local, mp.w_e1));
  auto tri1 = ad::mul(tape, ad::gather_rows(tape, m_kj, f.two_hop_message),
                      mlp(tape, mp.angle_two_hop, f.sbf_two_hop));
  auto self1 = mlp(tape, mp.edge_ji, x);
  auto m = ad::add(tape, self1, ad::segment_sum(tape, tri1, f.two_hop_target, n_edges));

  // Step 2: one-hop angles. Messages along j'->i gated by the angle j'-i-j.
  auto m_j2i = ad::mul(tape, mlp(tape, mp.message_j2i, m),
                       ad::matmul(tape, f.rbf_local, mp.w_e2));
  auto tri2 = ad::mul(tape, ad::gather_rows(tape, m_j2i, f.one_hop_message),
                      mlp(tape, mp.angle_one_hop, f.sbf_one_hop));
  auto self2 = mlp(tape, mp.edge_ji_prime, m);
  auto m2 = ad::add(tape, self2, ad::segment_sum(tape, tri2, f.one_hop_target, n_edges));

  // Step 3: node aggregation.
  auto msg = ad::mul(tape, m2, ad::matmul(tape, f.rbf_local, mp.w_e3));
  auto agg = ad::segment_sum(tape, msg, f.local_dst, f.n_atoms);

  if (tally) {
    tally->local_step1 += tri1.rows() + self1.rows();
    tally->local_step2 += tri2.rows() + self2.rows();
    tally->local_step3 += msg.rows();
  }
  return residual_update(tape, mp.update, agg);
}

ad::Tensor cross_layer_map(ad::Tape &tape, const Mlp &map, const ad::Tensor &h,
                           std::size_t *tally) {
  auto out = mlp(tape, map, h);
  if (tally)
    *tally += out.rows();
  return out;
}

ad::Tensor output_head(ad::Tape &tape, const OutputHead &head, const ad::Tensor &h) {
  auto x = ad::swish(tape, dense(tape, head.first, h));
  x = ad::swish(tape, dense(tape, head.second, x));
  return ad::matmul(tape, x, head.final_weight);
}

ad::Tensor forward(ad::Tape &tape, const MxmNet &net, const Features &f,
                   MessageTally *tally) {
  if (tally)
    *tally = MessageTally{0, std::vector<MessageCounts>(net.blocks.size())};
  auto counts = [&](std::size_t b) { return tally ? &tally->blocks[b] : nullptr; };
  auto cross = [&](std::size_t b) { return tally ? &tally->blocks[b].cross : nullptr; };

  ad::Tensor h_g = ad::gather_rows(tape, net.embedding, f.species);
  ad::Tensor h_l;
  ad::Tensor y;
  auto accumulate = [&](const ad::Tensor &node_out) {
    auto s = ad::sum(tape, node_out);
    y = y.defined() ? ad::add(tape, y, s) : s;
  };

  if (net.config().order == BlockOrder::GlobalFirst) {
    for (std::size_t b = 0; b < net.blocks.size(); ++b) {
      const auto &blk = net.blocks[b];
      h_g = global_mp(tape, blk.global, h_g, f, counts(b));
      h_l = cross_layer_map(tape, blk.to_local, h_g, cross(b));
      h_l = local_mp(tape, blk.local, h_l, f, counts(b));
      accumulate(output_head(tape, blk.output, h_l));
      h_g = cross_layer_map(tape, blk.to_global, h_l, cross(b));
    }
  } else {
    h_l = cross_layer_map(tape, *net.initial_to_local, h_g,
                          tally ? &tally->initial_cross : nullptr);
    for (std::size_t b = 0; b < net.blocks.size(); ++b) {
      const auto &blk = net.blocks[b];
      h_l = local_mp(tape, blk.local, h_l, f, counts(b));
      accumulate(output_head(tape, blk.output, h_l));
      h_g = cross_layer_map(tape, blk.to_global, h_l, cross(b));
      h_g = global_mp(tape, blk.global, h_g, f, counts(b));
      h_l = cross_layer_map(tape, blk.to_local, h_g, cross(b));
    }
  }
  return y;
}

double predict(const MxmNet &net, const Features &f) {
  ad::Tape tape;
  return forward(tape, net, f).item();
}

} // namespace mxm
