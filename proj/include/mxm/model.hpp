#pragma once

#include "mxm/features.hpp"
#include "mxm/ops.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mxm {

/// Order of the sub-steps inside one MXM block.
///
///   GlobalFirst: global MP -> map g->l -> local MP -> output -> map l->g
///   LocalFirst:  local MP -> output -> map l->g -> global MP -> map g->l
///
/// LocalFirst needs an initial local embedding, produced by an extra cross
/// map from the atom embeddings.
enum class BlockOrder { GlobalFirst, LocalFirst };

std::string to_string(BlockOrder order);
BlockOrder parse_block_order(const std::string &text);

struct ModelConfig {
  std::size_t hidden = 128;
  std::size_t layers = 6;
  std::size_t residuals = 2; // residual blocks per update function
  BlockOrder order = BlockOrder::GlobalFirst;

  /// Throws std::invalid_argument if a dimension is zero.
  void validate() const;

  friend bool operator==(const ModelConfig &, const ModelConfig &) = default;
};

/// Named parameter tensors in registration order.
class ParamStore {
public:
  using Entry = std::pair<std::string, ad::Tensor>;

  /// Registers a tensor; throws on a duplicate name.
  const ad::Tensor &add(std::string name, ad::Tensor value);
  const ad::Tensor &get(const std::string &name) const;
  bool contains(const std::string &name) const;

  const std::vector<Entry> &entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t value_count() const;

  /// Deep copy: new storage, no gradients.
  ParamStore clone() const;
  void zero_grad();
  /// Copies values from `other`, which must have identical names and shapes.
  void copy_values_from(const ParamStore &other);

private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Affine map x W + b; `bias` is undefined for bias-free layers.
struct Dense {
  ad::Tensor weight; // [in x out]
  ad::Tensor bias;   // [out]
};

/// Two dense layers, each followed by swish.
struct Mlp {
  Dense first;
  Dense second;
};

/// h + second(swish(first(h)))
struct ResidualBlock {
  Dense first;
  Dense second;
};

struct UpdateFn {
  std::vector<ResidualBlock> blocks;
};

/// m_ji = MLP([h_j | h_i | e_ji]) * (e_ji W);  h_i += sum_j m_ji
struct GlobalPass {
  Mlp message;
  ad::Tensor edge_weight; // [16 x F]
};

struct GlobalMp {
  GlobalPass first;
  UpdateFn update;
  GlobalPass second;
};

struct LocalMp {
  Mlp edge_kj;       // MLP_kj on [h_k | h_j | e_kj]
  ad::Tensor w_e1;   // [16 x F]
  Mlp angle_two_hop; // MLP_a1 on the two-hop SBF
  Mlp edge_ji;       // MLP_ji on [h_j | h_i | e_ji]
  Mlp message_j2i;   // MLP_j'i on m
  ad::Tensor w_e2;
  Mlp angle_one_hop; // MLP_a2 on the one-hop SBF
  Mlp edge_ji_prime; // MLP'_ji on m
  ad::Tensor w_e3;
  UpdateFn update;
};

struct OutputHead {
  Dense first;
  Dense second;
  ad::Tensor final_weight; // [F x 1], no bias
};

struct MxmBlock {
  GlobalMp global;
  Mlp to_local;
  LocalMp local;
  OutputHead output;
  Mlp to_global;
};

/// Parameters bound into the layer structure. Every tensor shares storage
/// with an entry of params(), so optimizer updates on the store are visible
/// to the next forward pass.
class MxmNet {
public:
  /// Fresh parameters: the atom embedding table uniform in [-sqrt 3, sqrt 3],
  /// every other weight and bias uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static MxmNet init(const ModelConfig &cfg, std::uint64_t seed);

  /// Binds an existing store; throws if a name is missing or mis-shaped or
  /// the store holds extra tensors.
  static MxmNet bind(const ModelConfig &cfg, ParamStore params);

  const ModelConfig &config() const { return cfg_; }
  const ParamStore &params() const { return params_; }
  ParamStore &params() { return params_; }

  ad::Tensor embedding; // [54 x F]
  std::optional<Mlp> initial_to_local;
  std::vector<MxmBlock> blocks;

private:
  MxmNet() = default;
  ModelConfig cfg_;
  ParamStore params_;
};

/// Message counts observed while running forward().
struct MessageTally {
  std::size_t initial_cross = 0;
  std::vector<MessageCounts> blocks;
};

ad::Tensor dense(ad::Tape &tape, const Dense &layer, const ad::Tensor &x);
ad::Tensor mlp(ad::Tape &tape, const Mlp &net, const ad::Tensor &x);

ad::Tensor residual_update(ad::Tape &tape, const UpdateFn &fn, const ad::Tensor &h);

ad::Tensor global_mp(ad::Tape &tape, const GlobalMp &mp, const ad::Tensor &h,
                     const Features &f, MessageCounts *tally = nullptr);

/// One pass of the global message function without the update step.
ad::Tensor global_pass(ad::Tape &tape, const GlobalPass &pass, const ad::Tensor &h,
                       const Features &f, MessageCounts *tally = nullptr);

ad::Tensor local_mp(ad::Tape &tape, const LocalMp &mp, const ad::Tensor &h,
                    const Features &f, MessageCounts *tally = nullptr);

ad::Tensor cross_layer_map(ad::Tape &tape, const Mlp &map, const ad::Tensor &h,
                           std::size_t *tally = nullptr);

/// [N x F] -> [N x 1]
ad::Tensor output_head(ad::Tape &tape, const OutputHead &head, const ad::Tensor &h);

/// Scalar prediction: the sum of every block's output head over all nodes.
ad::Tensor forward(ad::Tape &tape, const MxmNet &net, const Features &f,
                   MessageTally *tally = nullptr);

/// Convenience: forward on a private tape, returning the value.
double predict(const MxmNet &net, const Features &f);

} // namespace mxm
