#include "mxm/verify.hpp"

#include "mxm/basis.hpp"
#include "mxm/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace mxm {

namespace {

std::string fmt(const char *format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

CheckResult bounded(std::string name, double measured, double tol, std::string detail) {
  return {std::move(name), measured <= tol, measured, tol, std::move(detail)};
}

using Rotation = std::array<std::array<double, 3>, 3>;

Rotation random_rotation(std::mt19937_64 &rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  double q[4], norm = 0.0;
  for (double &v : q) {
    v = n(rng);
    norm += v * v;
  }
  norm = std::sqrt(norm);
  const double w = q[0] / norm, x = q[1] / norm, y = q[2] / norm, z = q[3] / norm;
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
           {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
           {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

Molecule moved(const Molecule &m, std::mt19937_64 &rng) {
  const auto r = random_rotation(rng);
  std::uniform_real_distribution<double> shift(-10.0, 10.0);
  const Vec3 t{shift(rng), shift(rng), shift(rng)};
  Molecule out = m;
  for (auto &p : out.coords) {
    const Vec3 q = p;
    for (int i = 0; i < 3; ++i)
      p[i] = r[i][0] * q[0] + r[i][1] * q[1] + r[i][2] * q[2] + t[i];
  }
  return out;
}

Molecule relabeled(const Molecule &m, const std::vector<std::size_t> &perm) {
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
    std::sort(out.bonds->begin(), out.bonds->end());
  }
  return out;
}

Molecule random_molecule(std::mt19937_64 &rng) {
  std::uniform_int_distribution<std::size_t> count(1, 24);
  std::uniform_real_distribution<double> box(1.0, 8.0);
  const std::size_t n = count(rng);
  const double side = box(rng);
  std::uniform_real_distribution<double> u(0.0, side);
  std::bernoulli_distribution heavy(0.4);
  Molecule m;
  m.name = "random";
  for (std::size_t i = 0; i < n; ++i) {
    m.coords.push_back({u(rng), u(rng), u(rng)});
    m.atomic_numbers.push_back(heavy(rng) ? 6 : 1);
  }
  return m;
}

void require_molecules(const std::vector<Molecule> &molecules) {
  if (molecules.empty())
    throw std::invalid_argument("verify: no molecules to check");
}

} // namespace

std::vector<EquivalentPair> read_equivalent_pairs(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open pair list " + path.string());
  std::vector<EquivalentPair> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ss(line);
    std::string a, b, extra;
    if (!(ss >> a))
      continue;
    if (!(ss >> b) || (ss >> extra))
      throw ParseError(lineno, "expected two file names", path.string());
    const auto dir = path.parent_path();
    out.emplace_back(read_extxyz(dir / a), read_extxyz(dir / b));
  }
  return out;
}

CheckResult check_gradients(const std::vector<Molecule> &molecules, const RunConfig &cfg) {
  require_molecules(molecules);
  // smallest molecule of at most 8 atoms, preferring ones with angles
  const Molecule *pick = nullptr;
  for (const auto &m : molecules)
    if (m.size() <= 8 && (!pick || (m.size() >= 3) > (pick->size() >= 3) ||
                          ((m.size() >= 3) == (pick->size() >= 3) && m.size() < pick->size())))
      pick = &m;
  if (!pick)
    return {"gradient_fd", false, 0.0, 1e-4, "no molecule with at most 8 atoms"};

  const ModelConfig small{8, 2, cfg.model.residuals, cfg.model.order};
  auto net = MxmNet::init(small, cfg.seed);
  const auto f = featurize(*pick, cfg.features());

  ad::Tape tape;
  auto y = forward(tape, net, f);
  net.params().zero_grad();
  tape.backward(y);

  const double step = 1e-4;
  double worst = 0.0;
  std::string where;
  std::size_t checked = 0;
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
          std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
      if (err > worst) {
        worst = err;
        where = name + "[" + std::to_string(i) + "]";
      }
      ++checked;
    }
  }
  return bounded("gradient_fd", worst, 1e-4,
                 "max relative error over " + std::to_string(checked) + " entries on '" +
                     pick->name + "' (F=8, layers=2, step 1e-4), worst at " + where);
}

CheckResult check_rigid_invariance(const std::vector<Molecule> &molecules,
                                   const RunConfig &cfg) {
  require_molecules(molecules);
  auto net = MxmNet::init(cfg.model, cfg.seed);
  const auto opt = cfg.features();
  std::vector<double> base(molecules.size());
  for (std::size_t i = 0; i < molecules.size(); ++i)
    base[i] = predict(net, featurize(molecules[i], opt));
  std::mt19937_64 rng(cfg.seed ^ 0x5e3ULL);
  double worst = 0.0;
  for (std::size_t t = 0; t < cfg.verify_rigid_trials; ++t) {
    const std::size_t i = t % molecules.size();
    const double y = predict(net, featurize(moved(molecules[i], rng), opt));
    worst = std::max(worst, std::abs(y - base[i]));
  }
  return bounded("rigid_invariance", worst, 1e-8,
                 "max |dy| over " + std::to_string(cfg.verify_rigid_trials) +
                     " random rotations+translations");
}

CheckResult check_permutation_invariance(const std::vector<Molecule> &molecules,
                                         const RunConfig &cfg) {
  require_molecules(molecules);
  auto net = MxmNet::init(cfg.model, cfg.seed);
  const auto opt = cfg.features();
  std::vector<double> base(molecules.size());
  for (std::size_t i = 0; i < molecules.size(); ++i)
    base[i] = predict(net, featurize(molecules[i], opt));
  std::mt19937_64 rng(cfg.seed ^ 0x9e7ULL);
  double worst = 0.0;
  for (std::size_t t = 0; t < cfg.verify_permutation_trials; ++t) {
    const std::size_t i = t % molecules.size();
    std::vector<std::size_t> perm(molecules[i].size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const double y = predict(net, featurize(relabeled(molecules[i], perm), opt));
    worst = std::max(worst, std::abs(y - base[i]));
  }
  return bounded("permutation_invariance", worst, 1e-10,
                 "max |dy| over " + std::to_string(cfg.verify_permutation_trials) +
                     " atom relabelings");
}

CheckResult check_angle_count(const RunConfig &cfg) {
  std::mt19937_64 rng(cfg.seed ^ 0xa91ULL);
  std::size_t mismatches = 0;
  const std::size_t trials = 200;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = 1 + rng() % 12;
    std::bernoulli_distribution coin(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
    std::vector<Bond> edges;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (coin(rng))
          edges.push_back({i, j});
    // every unordered pair of distinct edges that share an endpoint
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < edges.size(); ++a)
      for (std::size_t b = a + 1; b < edges.size(); ++b) {
        const auto &e = edges[a], &f = edges[b];
        pairs += e.first == f.first || e.first == f.second || e.second == f.first ||
                 e.second == f.second;
      }
    mismatches += count_angles(n, edges) != pairs;
  }
  return bounded("angle_count", static_cast<double>(mismatches), 0.0,
                 "graphs where the degree formula differs from exhaustive edge-pair "
                 "enumeration, out of " + std::to_string(trials) + " (N <= 12)");
}

CheckResult check_message_counts(const std::vector<Molecule> &molecules, const RunConfig &cfg) {
  std::mt19937_64 rng(cfg.seed ^ 0xc0ULL);
  const ModelConfig tiny{4, 2, 1, cfg.model.order};
  auto net = MxmNet::init(tiny, cfg.seed);
  std::size_t mismatches = 0, graphs = 0;
  auto run = [&](const Molecule &m, const FeatureOptions &opt) {
    const auto f = featurize(m, opt);
    ad::Tape tape;
    MessageTally tally;
    forward(tape, net, f, &tally);
    const auto expected = count_messages(f.graph);
    bool ok = tally.initial_cross == (tiny.order == BlockOrder::LocalFirst ? m.size() : 0);
    for (const auto &c : tally.blocks)
      ok = ok && c == expected;
    mismatches += !ok;
    ++graphs;
  };
  for (std::size_t t = 0; t < 100; ++t) {
    const auto m = random_molecule(rng);
    FeatureOptions opt;
    std::uniform_real_distribution<double> dl(0.8, 2.0);
    opt.graph.local = t % 2 ? LocalRule::bonds() : LocalRule::within(dl(rng));
    opt.graph.global_cutoff = std::uniform_real_distribution<double>(2.5, 6.0)(rng);
    run(m, opt);
  }
  for (const auto &m : molecules)
    run(m, cfg.features());
  return bounded("message_counts", static_cast<double>(mismatches), 0.0,
                 "graphs where the instrumented forward tally differs from the closed "
                 "form, out of " + std::to_string(graphs));
}

CheckResult check_basis() {
  using namespace basis;
  double worst_root = 0.0, worst_l0 = 0.0, worst_edge = 0.0;
  for (int l = 0; l < kNumSpherical; ++l)
    for (int n = 1; n <= kNumSphRadial; ++n)
      worst_root = std::max(worst_root, std::abs(sph_bessel(l, bessel_root(l, n))));

  const double c = 5.0, pi = std::numbers::pi;
  for (double d : {0.3, 1.1, 2.0, 3.7, 4.9})
    for (double a : {0.0, 0.9, 2.1, pi}) {
      const auto row = sbf(d, a, c);
      for (int n = 1; n <= kNumSphRadial; ++n) {
        const double z = n * pi;
        const double closed = envelope(d, c) * std::sqrt(2 / (c * c * c)) * z *
                              std::sin(z * d / c) / (z * d / c) / std::sqrt(4 * pi);
        worst_l0 = std::max(worst_l0, std::abs(row[n - 1] - closed));
      }
    }
  for (double a : {0.0, 1.0, pi}) {
    for (double v : sbf(c, a, c))
      worst_edge = std::max(worst_edge, std::abs(v));
  }
  for (double v : rbf(c, c))
    worst_edge = std::max(worst_edge, std::abs(v));

  const double worst = std::max({worst_root, worst_l0, worst_edge});
  return bounded("basis", worst, 1e-10,
                 "max |j_l(root)| " + fmt("%.2e", worst_root) + ", l=0 sbf vs sine form " +
                     fmt("%.2e", worst_l0) + ", value at cutoff " + fmt("%.2e", worst_edge));
}

CheckResult check_checkpoint(const std::vector<Molecule> &molecules, const RunConfig &cfg) {
  require_molecules(molecules);
  auto net = MxmNet::init(cfg.model, cfg.seed);
  std::stringstream buf;
  save_checkpoint(buf, cfg.model, net.params());
  const std::string bytes = buf.str();
  auto ck = load_checkpoint(buf);
  auto loaded = MxmNet::bind(ck.config, std::move(ck.params));
  std::stringstream again;
  save_checkpoint(again, ck.config, loaded.params());

  std::size_t mismatches = again.str() != bytes;
  for (const auto &m : molecules) {
    const auto f = featurize(m, cfg.features());
    mismatches += std::bit_cast<std::uint64_t>(predict(net, f)) !=
                  std::bit_cast<std::uint64_t>(predict(loaded, f));
  }
  return bounded("checkpoint_roundtrip", static_cast<double>(mismatches), 0.0,
                 "predictions or re-saved bytes that differ after save/load");
}

CheckResult check_equivalent_pairs(const std::vector<EquivalentPair> &pairs,
                                   const RunConfig &cfg) {
  auto net = MxmNet::init(cfg.model, cfg.seed);
  double worst = 0.0;
  std::string where;
  for (const auto &[a, b] : pairs) {
    const double d = std::abs(predict(net, featurize(a, cfg.features())) -
                              predict(net, featurize(b, cfg.features())));
    if (d > worst || where.empty()) {
      worst = std::max(worst, d);
      where = a.name + " vs " + b.name;
    }
  }
  return bounded("declared_rigid_pairs", worst, 1e-8,
                 "max |dy| over " + std::to_string(pairs.size()) +
                     " declared rigid-equivalent pairs, worst " + where);
}

std::vector<CheckResult> run_verify(const std::vector<Molecule> &molecules,
                                    const std::vector<EquivalentPair> &pairs,
                                    const RunConfig &cfg) {
  std::vector<CheckResult> out;
  out.push_back(check_gradients(molecules, cfg));
  out.push_back(check_rigid_invariance(molecules, cfg));
  out.push_back(check_permutation_invariance(molecules, cfg));
  out.push_back(check_angle_count(cfg));
  out.push_back(check_message_counts(molecules, cfg));
  out.push_back(check_basis());
  out.push_back(check_checkpoint(molecules, cfg));
  if (!pairs.empty())
    out.push_back(check_equivalent_pairs(pairs, cfg));
  return out;
}

void write_verify_report(std::ostream &out, const std::vector<CheckResult> &results) {
  char buf[128];
  for (const auto &r : results) {
    std::snprintf(buf, sizeof buf, "%s %-24s measured=%.3e tol=%.1e  ",
                  r.passed ? "PASS" : "FAIL", r.name.c_str(), r.measured, r.tolerance);
    out << buf << r.detail << '\n';
  }
}

} // namespace mxm
