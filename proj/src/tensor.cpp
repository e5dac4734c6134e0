#include "mxm/tensor.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mxm::ad {

std::size_t numel(const Shape &shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_str(const Shape &shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i)
      os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  if (shape.empty())
    throw std::invalid_argument("Tensor: shape must have at least one axis");
  auto impl = std::make_shared<Impl>();
  impl->value.assign(numel(shape), 0.0);
  impl->shape = std::move(shape);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::from(Shape shape, std::vector<double> values,
                    bool requires_grad) {
  if (shape.empty())
    throw std::invalid_argument("Tensor: shape must have at least one axis");
  if (numel(shape) != values.size())
    throw std::invalid_argument("Tensor: shape " + shape_str(shape) +
                                " does not match " +
                                std::to_string(values.size()) + " values");
  auto impl = std::make_shared<Impl>();
  impl->shape = std::move(shape);
  impl->value = std::move(values);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({1}, {value}, requires_grad);
}

Tensor::Impl &Tensor::impl() const {
  if (!impl_)
    throw std::logic_error("Tensor: use of undefined tensor");
  return *impl_;
}

const Shape &Tensor::shape() const { return impl().shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  const auto &s = shape();
  if (axis >= s.size())
    throw std::out_of_range("Tensor: axis " + std::to_string(axis) +
                            " out of range for shape " + shape_str(s));
  return s[axis];
}

std::size_t Tensor::size() const { return impl().value.size(); }

std::span<const double> Tensor::data() const { return impl().value; }
std::span<double> Tensor::data() { return impl().value; }

double Tensor::item() const {
  if (size() != 1)
    throw std::logic_error("Tensor::item on tensor of shape " +
                           shape_str(shape()));
  return impl().value[0];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return impl().value[r * cols() + c];
}

double &Tensor::at(std::size_t r, std::size_t c) {
  return impl().value[r * cols() + c];
}

bool Tensor::requires_grad() const { return impl().requires_grad; }
void Tensor::set_requires_grad(bool flag) { impl().requires_grad = flag; }

bool Tensor::has_grad() const { return !impl().grad.empty() || size() == 0; }

std::span<const double> Tensor::grad() const { return impl().grad; }
std::span<double> Tensor::grad() { return impl().grad; }

void Tensor::zero_grad() { impl().grad.assign(size(), 0.0); }

Tensor Tensor::clone() const {
  auto copy = std::make_shared<Impl>(impl());
  return Tensor(std::move(copy));
}

void Tape::record(std::vector<Tensor> inputs, Tensor output, Kernel forward,
                  Kernel backward) {
  bool needs_grad = false;
  for (const auto &in : inputs)
    needs_grad = needs_grad || in.requires_grad();
  output.set_requires_grad(needs_grad);
  forward();
  ops_.push_back(Op{std::move(inputs), std::move(output), std::move(forward),
                    std::move(backward)});
}

void Tape::backward(const Tensor &output) {
  if (output.size() != 1)
    throw std::invalid_argument("Tape::backward: output must be scalar, got " +
                                shape_str(output.shape()));
  if (!output.requires_grad())
    throw std::invalid_argument(
        "Tape::backward: output does not depend on any tensor requiring grad");

  for (auto &op : ops_) {
    if (!op.output.requires_grad())
      continue;
    op.output.zero_grad();
    for (auto &in : op.inputs)
      if (in.requires_grad() && in.grad().size() != in.size())
        in.zero_grad();
  }
  Tensor seed = output;
  if (seed.grad().size() != 1)
    seed.zero_grad();
  seed.grad()[0] = 1.0;

  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it)
    if (it->output.requires_grad())
      it->backward();
}

void Tape::replay() {
  for (auto &op : ops_)
    op.forward();
}

} // namespace mxm::ad
