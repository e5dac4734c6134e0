#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mxm::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape &shape);
std::string shape_str(const Shape &shape);

/// Dense row-major array of doubles with an optional gradient buffer.
///
/// Tensor is a handle: copies share storage. Use clone() for a deep copy.
/// Zero extents are allowed so that empty edge and triple sets flow through
/// the same code path as non-empty ones.
class Tensor {
public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(impl_); }

  const Shape &shape() const;
  std::size_t dim(std::size_t axis) const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  std::size_t rows() const { return dim(0); }
  std::size_t cols() const { return rank() < 2 ? 1 : dim(1); }

  std::span<const double> data() const;
  std::span<double> data();
  double item() const;
  double at(std::size_t r, std::size_t c) const;
  double &at(std::size_t r, std::size_t c);

  bool requires_grad() const;
  void set_requires_grad(bool flag);

  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> grad();
  /// Allocates the gradient buffer if missing and fills it with zeros.
  void zero_grad();

  Tensor clone() const;

  bool same_storage(const Tensor &other) const { return impl_ == other.impl_; }

private:
  struct Impl {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
  };

  explicit Tensor(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
  Impl &impl() const;

  std::shared_ptr<Impl> impl_;

  friend class Tape;
};

/// Ordered record of the operations of one forward pass.
///
/// Each recorded operation keeps a forward kernel (so the tape can be
/// replayed after leaf values change) and a backward kernel that
/// accumulates into the gradient buffers of its inputs. Operations are
/// appended as they execute, so the tape is always in topological order.
class Tape {
public:
  using Kernel = std::function<void()>;

  Tape() = default;
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;
  Tape(Tape &&) = default;
  Tape &operator=(Tape &&) = default;

  /// Registers an op producing `output` from `inputs` and runs `forward`
  /// once. `backward` is only invoked when some input requires a gradient.
  void record(std::vector<Tensor> inputs, Tensor output, Kernel forward,
              Kernel backward);

  /// Gradient of the scalar `output` with respect to every tensor on this
  /// tape that requires one. Leaf gradients accumulate; intermediate
  /// gradients are reset at the start of each call.
  void backward(const Tensor &output);

  /// Re-executes every forward kernel in recording order.
  void replay();

  std::size_t size() const { return ops_.size(); }
  void clear() { ops_.clear(); }

private:
  struct Op {
    std::vector<Tensor> inputs;
    Tensor output;
    Kernel forward;
    Kernel backward;
  };
  std::vector<Op> ops_;
};

} // namespace mxm::ad
