#include "mxm/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mxm::ad {

namespace {

void require_rank2(const Tensor &t, const char *op) {
  if (t.rank() != 2)
    throw std::invalid_argument(std::string(op) + ": expected a matrix, got " +
                                shape_str(t.shape()));
}

void require_same(const Tensor &a, const Tensor &b, const char *op) {
  if (a.shape() != b.shape())
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                shape_str(a.shape()) + " vs " +
                                shape_str(b.shape()));
}

} // namespace

double sigmoid(double x) {
  if (x >= 0.0)
    return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double swish(double x) { return x * sigmoid(x); }

Tensor matmul(Tape &tape, const Tensor &a, const Tensor &b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  if (a.dim(1) != b.dim(0))
    throw std::invalid_argument("matmul: inner extents differ, " +
                                shape_str(a.shape()) + " x " +
                                shape_str(b.shape()));
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out = Tensor::zeros({m, n});
  auto forward = [a = Tensor(a), b = Tensor(b), out, m, k, n]() mutable {
    auto A = a.data();
    auto B = b.data();
    auto C = out.data();
    std::fill(C.begin(), C.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t p = 0; p < k; ++p) {
        const double aip = A[i * k + p];
        const double *brow = &B[p * n];
        double *crow = &C[i * n];
        for (std::size_t j = 0; j < n; ++j)
          crow[j] += aip * brow[j];
      }
  };
  auto backward = [a = Tensor(a), b = Tensor(b), out, m, k, n]() mutable {
    auto dC = out.grad();
    if (a.requires_grad()) {
      auto B = b.data();
      auto dA = a.grad();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double *brow = &B[p * n];
          const double *dcrow = &dC[i * n];
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j)
            acc += dcrow[j] * brow[j];
          dA[i * k + p] += acc;
        }
    }
    if (b.requires_grad()) {
      auto A = a.data();
      auto dB = b.grad();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = A[i * k + p];
          const double *dcrow = &dC[i * n];
          double *dbrow = &dB[p * n];
          for (std::size_t j = 0; j < n; ++j)
            dbrow[j] += aip * dcrow[j];
        }
    }
  };
  tape.record({a, b}, out, forward, backward);
  return out;
}

Tensor add(Tape &tape, const Tensor &a, const Tensor &b) {
  require_same(a, b, "add");
  Tensor out = Tensor::zeros(a.shape());
  auto forward = [a = Tensor(a), b = Tensor(b), out]() mutable {
    auto A = a.data();
    auto B = b.data();
    auto C = out.data();
    for (std::size_t i = 0; i < C.size(); ++i)
      C[i] = A[i] + B[i];
  };
  auto backward = [a = Tensor(a), b = Tensor(b), out]() mutable {
    auto dC = out.grad();
    if (a.requires_grad()) {
      auto dA = a.grad();
      for (std::size_t i = 0; i < dC.size(); ++i)
        dA[i] += dC[i];
    }
    if (b.requires_grad()) {
      auto dB = b.grad();
      for (std::size_t i = 0; i < dC.size(); ++i)
        dB[i] += dC[i];
    }
  };
  tape.record({a, b}, out, forward, backward);
  return out;
}

Tensor sub(Tape &tape, const Tensor &a, const Tensor &b) {
  require_same(a, b, "sub");
  Tensor out = Tensor::zeros(a.shape());
  auto forward = [a = Tensor(a), b = Tensor(b), out]() mutable {
    auto A = a.data();
    auto B = b.data();
    auto C = out.data();
    for (std::size_t i = 0; i < C.size(); ++i)
      C[i] = A[i] - B[i];
  };
  auto backward = [a = Tensor(a), b = Tensor(b), out]() mutable {
    auto dC = out.grad();
    if (a.requires_grad()) {
      auto dA = a.grad();
      for (std::size_t i = 0; i < dC.size(); ++i)
        dA[i] += dC[i];
    }
    if (b.requires_grad()) {
      auto dB = b.grad();
      for (std::size_t i = 0; i < dC.size(); ++i)
        dB[i] -= dC[i];
    }
  };
  tape.record({a, b}, out, forward, backward);
  return out;
}

Tensor mul(Tape &tape, const Tensor &a, const Tensor &b) {
  require_same(a, b, "mul");
  Tensor out = Tensor::zeros(a.shape());
  auto forward = [a = Tensor(a), b = Tensor(b), out]() mutable {
    auto A = a.data();
    auto B = b.data();
    auto C = out.data();
    for (std::size_t i = 0; i < C.size(); ++i)
      C[i] = A[i] * B[i];
  };
  auto backward = [a = Tensor(a), b = Tensor(b), out]() mutable {
    auto dC = out.grad();
    if (a.requires_grad()) {
      auto B = b.data();
      auto dA = a.grad();
      for (std::size_t i = 0; i < dC.size(); ++i)
        dA[i] += dC[i] * B[i];
    }
    if (b.requires_grad()) {
      auto A = a.data();
      auto dB = b.grad();
      for (std::size_t i = 0; i < dC.size(); ++i)
        dB[i] += dC[i] * A[i];
    }
  };
  tape.record({a, b}, out, forward, backward);
  return out;
}

Tensor scale(Tape &tape, const Tensor &a, double factor) {
  Tensor out = Tensor::zeros(a.shape());
  auto forward = [a = Tensor(a), out, factor]() mutable {
    auto A = a.data();
    auto C = out.data();
    for (std::size_t i = 0; i < C.size(); ++i)
      C[i] = factor * A[i];
  };
  auto backward = [a = Tensor(a), out, factor]() mutable {
    auto dC = out.grad();
    auto dA = a.grad();
    for (std::size_t i = 0; i < dC.size(); ++i)
      dA[i] += factor * dC[i];
  };
  tape.record({a}, out, forward, backward);
  return out;
}

Tensor add_bias(Tape &tape, const Tensor &a, const Tensor &bias) {
  require_rank2(a, "add_bias");
  const std::size_t m = a.dim(0), n = a.dim(1);
  if (bias.size() != n || (bias.rank() == 2 && bias.dim(0) != 1) ||
      bias.rank() > 2)
    throw std::invalid_argument("add_bias: bias " + shape_str(bias.shape()) +
                                " does not broadcast over " +
                                shape_str(a.shape()));
  Tensor out = Tensor::zeros(a.shape());
  auto forward = [a = Tensor(a), bias = Tensor(bias), out, m, n]() mutable {
    auto A = a.data();
    auto b = bias.data();
    auto C = out.data();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        C[i * n + j] = A[i * n + j] + b[j];
  };
  auto backward = [a = Tensor(a), bias = Tensor(bias), out, m, n]() mutable {
    auto dC = out.grad();
    if (a.requires_grad()) {
      auto dA = a.grad();
      for (std::size_t i = 0; i < dC.size(); ++i)
        dA[i] += dC[i];
    }
    if (bias.requires_grad()) {
      auto db = bias.grad();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
          db[j] += dC[i * n + j];
    }
  };
  tape.record({a, bias}, out, forward, backward);
  return out;
}

Tensor swish(Tape &tape, const Tensor &x) {
  Tensor out = Tensor::zeros(x.shape());
  auto forward = [x = Tensor(x), out]() mutable {
    auto X = x.data();
    auto Y = out.data();
    for (std::size_t i = 0; i < Y.size(); ++i)
      Y[i] = swish(X[i]);
  };
  auto backward = [x = Tensor(x), out]() mutable {
    auto X = x.data();
    auto dY = out.grad();
    auto dX = x.grad();
    for (std::size_t i = 0; i < dY.size(); ++i) {
      const double s = sigmoid(X[i]);
      dX[i] += dY[i] * s * (1.0 + X[i] * (1.0 - s));
    }
  };
  tape.record({x}, out, forward, backward);
  return out;
}

Tensor abs(Tape &tape, const Tensor &x) {
  Tensor out = Tensor::zeros(x.shape());
  auto forward = [x = Tensor(x), out]() mutable {
    auto X = x.data();
    auto Y = out.data();
    for (std::size_t i = 0; i < Y.size(); ++i)
      Y[i] = std::abs(X[i]);
  };
  auto backward = [x = Tensor(x), out]() mutable {
    auto X = x.data();
    auto dY = out.grad();
    auto dX = x.grad();
    for (std::size_t i = 0; i < dY.size(); ++i) {
      const double sign = X[i] > 0.0 ? 1.0 : (X[i] < 0.0 ? -1.0 : 0.0);
      dX[i] += dY[i] * sign;
    }
  };
  tape.record({x}, out, forward, backward);
  return out;
}

Tensor concat_cols(Tape &tape, const std::vector<Tensor> &parts) {
  if (parts.empty())
    throw std::invalid_argument("concat_cols: no inputs");
  const std::size_t m = parts.front().rank() == 2 ? parts.front().dim(0) : 0;
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto &p : parts) {
    require_rank2(p, "concat_cols");
    if (p.dim(0) != m)
      throw std::invalid_argument("concat_cols: row mismatch " +
                                  shape_str(parts.front().shape()) + " vs " +
                                  shape_str(p.shape()));
    widths.push_back(p.dim(1));
    total += p.dim(1);
  }
  Tensor out = Tensor::zeros({m, total});
  auto forward = [parts = std::vector<Tensor>(parts), widths, out, m, total]() mutable {
    auto C = out.data();
    std::size_t offset = 0;
    for (std::size_t t = 0; t < parts.size(); ++t) {
      auto P = parts[t].data();
      const std::size_t w = widths[t];
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < w; ++j)
          C[i * total + offset + j] = P[i * w + j];
      offset += w;
    }
  };
  auto backward = [parts = std::vector<Tensor>(parts), widths, out, m, total]() mutable {
    auto dC = out.grad();
    std::size_t offset = 0;
    for (std::size_t t = 0; t < parts.size(); ++t) {
      const std::size_t w = widths[t];
      if (parts[t].requires_grad()) {
        auto dP = parts[t].grad();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < w; ++j)
            dP[i * w + j] += dC[i * total + offset + j];
      }
      offset += w;
    }
  };
  tape.record(parts, out, forward, backward);
  return out;
}

Tensor gather_rows(Tape &tape, const Tensor &a,
                   std::span<const std::size_t> index) {
  require_rank2(a, "gather_rows");
  const std::size_t rows = a.dim(0), n = a.dim(1);
  for (auto r : index)
    if (r >= rows)
      throw std::invalid_argument("gather_rows: index " + std::to_string(r) +
                                  " out of range for " + shape_str(a.shape()));
  Index idx(index.begin(), index.end());
  Tensor out = Tensor::zeros({idx.size(), n});
  auto forward = [a = Tensor(a), idx, out, n]() mutable {
    auto A = a.data();
    auto C = out.data();
    for (std::size_t r = 0; r < idx.size(); ++r)
      std::copy_n(&A[idx[r] * n], n, &C[r * n]);
  };
  auto backward = [a = Tensor(a), idx, out, n]() mutable {
    auto dC = out.grad();
    auto dA = a.grad();
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t j = 0; j < n; ++j)
        dA[idx[r] * n + j] += dC[r * n + j];
  };
  tape.record({a}, out, forward, backward);
  return out;
}

Tensor segment_sum(Tape &tape, const Tensor &a,
                   std::span<const std::size_t> segment,
                   std::size_t n_segments) {
  require_rank2(a, "segment_sum");
  const std::size_t rows = a.dim(0), n = a.dim(1);
  if (segment.size() != rows)
    throw std::invalid_argument("segment_sum: " + std::to_string(segment.size()) +
                                " segment ids for " + shape_str(a.shape()));
  for (auto s : segment)
    if (s >= n_segments)
      throw std::invalid_argument("segment_sum: segment id " + std::to_string(s) +
                                  " >= " + std::to_string(n_segments));
  Index seg(segment.begin(), segment.end());
  Tensor out = Tensor::zeros({n_segments, n});
  auto forward = [a = Tensor(a), seg, out, n]() mutable {
    auto A = a.data();
    auto C = out.data();
    std::fill(C.begin(), C.end(), 0.0);
    for (std::size_t r = 0; r < seg.size(); ++r)
      for (std::size_t j = 0; j < n; ++j)
        C[seg[r] * n + j] += A[r * n + j];
  };
  auto backward = [a = Tensor(a), seg, out, n]() mutable {
    auto dC = out.grad();
    auto dA = a.grad();
    for (std::size_t r = 0; r < seg.size(); ++r)
      for (std::size_t j = 0; j < n; ++j)
        dA[r * n + j] += dC[seg[r] * n + j];
  };
  tape.record({a}, out, forward, backward);
  return out;
}

Tensor sum(Tape &tape, const Tensor &x) {
  Tensor out = Tensor::zeros({1});
  auto forward = [x = Tensor(x), out]() mutable {
    double acc = 0.0;
    for (double v : x.data())
      acc += v;
    out.data()[0] = acc;
  };
  auto backward = [x = Tensor(x), out]() mutable {
    const double g = out.grad()[0];
    for (double &d : x.grad())
      d += g;
  };
  tape.record({x}, out, forward, backward);
  return out;
}

Tensor mean(Tape &tape, const Tensor &x) {
  if (x.size() == 0)
    throw std::invalid_argument("mean: empty tensor " + shape_str(x.shape()));
  Tensor out = Tensor::zeros({1});
  const double inv = 1.0 / static_cast<double>(x.size());
  auto forward = [x = Tensor(x), out, inv]() mutable {
    double acc = 0.0;
    for (double v : x.data())
      acc += v;
    out.data()[0] = acc * inv;
  };
  auto backward = [x = Tensor(x), out, inv]() mutable {
    const double g = out.grad()[0] * inv;
    for (double &d : x.grad())
      d += g;
  };
  tape.record({x}, out, forward, backward);
  return out;
}

} // namespace mxm::ad
