#pragma once

#include "mxm/features.hpp"
#include "mxm/molecule.hpp"

#include <array>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace mxm::support {

inline std::filesystem::path data_dir() { return MXM_DATA_DIR; }
inline std::filesystem::path fixture(const std::string &name) {
  return data_dir() / "fixtures" / name;
}

/// The ten small molecules used by the invariance suites.
inline std::vector<std::string> invariance_fixtures() {
  return {"water.xyz",        "ammonia.xyz", "methane.xyz",  "acetylene.xyz",
          "hcn.xyz",          "formaldehyde.xyz", "ethylene.xyz", "methanol.xyz",
          "ethane.xyz",       "hydroxylamine.xyz"};
}

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Uniformly distributed rotation from a random unit quaternion.
inline Mat3 random_rotation(std::mt19937_64 &rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  double q[4];
  double norm = 0.0;
  for (double &v : q) {
    v = n(rng);
    norm += v * v;
  }
  norm = std::sqrt(norm);
  for (double &v : q)
    v /= norm;
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
           {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
           {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

inline Vec3 apply(const Mat3 &r, const Vec3 &t, const Vec3 &p) {
  Vec3 out{};
  for (int i = 0; i < 3; ++i)
    out[i] = r[i][0] * p[0] + r[i][1] * p[1] + r[i][2] * p[2] + t[i];
  return out;
}

inline Molecule rigid_transform(Molecule m, std::mt19937_64 &rng) {
  const Mat3 r = random_rotation(rng);
  std::uniform_real_distribution<double> shift(-10.0, 10.0);
  const Vec3 t{shift(rng), shift(rng), shift(rng)};
  for (auto &p : m.coords)
    p = apply(r, t, p);
  return m;
}

/// Relabels atoms: new atom k is old atom perm[k]. Explicit bonds follow.
inline Molecule permute_atoms(const Molecule &m, const std::vector<std::size_t> &perm) {
  Molecule out = m;
  std::vector<std::size_t> inverse(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) {
    out.atomic_numbers[k] = m.atomic_numbers[perm[k]];
    out.coords[k] = m.coords[perm[k]];
    inverse[perm[k]] = k;
  }
  if (m.bonds) {
    out.bonds->clear();
    for (const auto &b : *m.bonds)
      out.bonds->push_back(make_bond(inverse[b.first], inverse[b.second]));
  }
  return out;
}

/// N points uniform in a cube of side `box`.
inline std::vector<Vec3> random_points(std::size_t n, double box, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.0, box);
  std::vector<Vec3> pts(n);
  for (auto &p : pts)
    p = {u(rng), u(rng), u(rng)};
  return pts;
}

/// A carbon/hydrogen "molecule" on random points with no explicit bonds.
inline Molecule random_molecule(std::size_t n, double box, std::mt19937_64 &rng) {
  Molecule m;
  m.name = "random";
  m.coords = random_points(n, box, rng);
  std::bernoulli_distribution heavy(0.4);
  for (std::size_t i = 0; i < n; ++i)
    m.atomic_numbers.push_back(heavy(rng) ? 6 : 1);
  return m;
}

inline double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / scale;
}

} // namespace mxm::support

#include "mxm/model.hpp"

#include <algorithm>
#include <functional>

namespace mxm::support {

/// Sets every parameter whose name starts with `prefix` to `value`.
inline void fill_params(MxmNet &net, const std::string &prefix, double value) {
  for (const auto &[name, t] : net.params().entries())
    if (name.rfind(prefix, 0) == 0) {
      ad::Tensor handle = t;
      std::fill(handle.data().begin(), handle.data().end(), value);
    }
}

struct GradientReport {
  double worst_relative = 0.0;
  std::string worst_param;
  std::size_t checked = 0;
};

/// Central differences of forward() against one backward pass for every
/// entry of every parameter. Relative error uses max(|fd|, |ad|, floor).
inline GradientReport finite_difference_check(MxmNet &net, const Features &f,
                                              double step = 1e-4, double floor = 1e-6) {
  ad::Tape tape;
  auto y = forward(tape, net, f);
  net.params().zero_grad();
  tape.backward(y);

  GradientReport rep;
  for (const auto &[name, t] : net.params().entries()) {
    ad::Tensor p = t;
    auto value = p.data();
    const std::vector<double> grad(p.grad().begin(), p.grad().end());
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + step;
      tape.replay();
      const double up = y.item();
      value[i] = saved - step;
      tape.replay();
      const double down = y.item();
      value[i] = saved;
      const double fd = (up - down) / (2 * step);
      const double err =
          std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), floor});
      if (err > rep.worst_relative) {
        rep.worst_relative = err;
        rep.worst_param = name + "[" + std::to_string(i) + "]";
      }
      ++rep.checked;
    }
  }
  tape.replay();
  return rep;
}

/// Breadth-first hop distances over a directed edge list treated as
/// undirected.
inline std::vector<std::size_t> hop_distances(std::size_t n, const EdgeList &edges,
                                              std::size_t from) {
  const auto inf = static_cast<std::size_t>(-1);
  std::vector<std::size_t> dist(n, inf);
  std::vector<std::size_t> queue{from};
  dist[from] = 0;
  for (std::size_t q = 0; q < queue.size(); ++q) {
    const auto v = queue[q];
    for (const auto &e : edges) {
      std::size_t w = inf;
      if (e.src == v)
        w = e.dst;
      else if (e.dst == v)
        w = e.src;
      if (w != inf && dist[w] == inf) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

inline std::vector<Bond> random_simple_graph(std::size_t n, double p, std::mt19937_64 &rng) {
  std::bernoulli_distribution coin(p);
  std::vector<Bond> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng))
        out.push_back({i, j});
  return out;
}

} // namespace mxm::support
