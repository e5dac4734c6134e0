#include "mxm/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace mxm::basis {

namespace {

constexpr double kPi = std::numbers::pi;

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i)
    r *= x;
  return r;
}

// Power series about x = 0; used where upward recurrence loses accuracy.
double sph_bessel_series(int l, double x) {
  double prefactor = 1.0; // x^l / (2l+1)!!
  for (int m = 1; m <= l; ++m)
    prefactor *= x / (2.0 * m + 1.0);
  const double half_x2 = 0.5 * x * x;
  double term = 1.0, total = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= -half_x2 / (k * (2.0 * l + 2.0 * k + 1.0));
    total += term;
    if (std::abs(term) < 1e-18 * std::abs(total))
      break;
  }
  return prefactor * total;
}

struct RootTable {
  // roots[l][n-1]
  std::array<std::array<double, kNumSphRadial>, kNumSpherical> roots{};
  // j_{l+1}(z_ln)^2, the normalization denominator
  std::array<std::array<double, kNumSphRadial>, kNumSpherical> next_sq{};

  RootTable() {
    // Roots of j_l interlace with those of j_{l-1}: z_{l-1,n} < z_{l,n} <
    // z_{l-1,n+1}. Start from z_{0,n} = n pi with enough extra roots so
    // every level still brackets kNumSphRadial roots.
    const int extra = kNumSpherical - 1;
    std::vector<double> prev(kNumSphRadial + extra);
    for (std::size_t n = 0; n < prev.size(); ++n)
      prev[n] = (n + 1) * kPi;
    for (int n = 0; n < kNumSphRadial; ++n)
      roots[0][n] = prev[n];
    for (int l = 1; l < kNumSpherical; ++l) {
      std::vector<double> cur(prev.size() - 1);
      for (std::size_t n = 0; n < cur.size(); ++n)
        cur[n] = bisect(l, prev[n], prev[n + 1]);
      for (int n = 0; n < kNumSphRadial; ++n)
        roots[l][n] = cur[n];
      prev = std::move(cur);
    }
    for (int l = 0; l < kNumSpherical; ++l)
      for (int n = 0; n < kNumSphRadial; ++n) {
        const double j = sph_bessel(l + 1, roots[l][n]);
        next_sq[l][n] = j * j;
      }
  }

  static double bisect(int l, double lo, double hi) {
    double flo = sph_bessel(l, lo);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi)
        break;
      const double fmid = sph_bessel(l, mid);
      if (fmid == 0.0)
        return mid;
      if ((fmid < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fmid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }
};

const RootTable &root_table() {
  static const RootTable table;
  return table;
}

} // namespace

double distance(const Vec3 &a, const Vec3 &b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double angle(const Vec3 &a, const Vec3 &b, const Vec3 &c) {
  Vec3 u{}, v{};
  for (int k = 0; k < 3; ++k) {
    u[k] = a[k] - b[k];
    v[k] = c[k] - b[k];
  }
  const double nu = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
  const double nv = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (nu == 0.0 || nv == 0.0)
    throw std::invalid_argument("angle: endpoint coincides with the vertex");
  const double cosine = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]) / (nu * nv);
  return std::acos(std::clamp(cosine, -1.0, 1.0));
}

double envelope(double d, double cutoff, int p) {
  const double x = d / cutoff;
  if (x >= 1.0)
    return 0.0;
  const double a = (p + 1.0) * (p + 2.0) / 2.0;
  const double b = p * (p + 2.0);
  const double c = p * (p + 1.0) / 2.0;
  const double xp = ipow(x, p);
  return 1.0 - a * xp + b * xp * x - c * xp * x * x;
}

double sph_bessel(int l, double x) {
  if (l < 0)
    throw std::invalid_argument("sph_bessel: negative order");
  if (x == 0.0)
    return l == 0 ? 1.0 : 0.0;
  const double ax = std::abs(x);
  double value;
  if (l == 0) {
    value = std::sin(ax) / ax;
  } else if (ax <= static_cast<double>(l) + 0.5) {
    value = sph_bessel_series(l, ax);
  } else {
    double jm = std::sin(ax) / ax;
    double j = std::sin(ax) / (ax * ax) - std::cos(ax) / ax;
    for (int n = 1; n < l; ++n) {
      const double next = (2.0 * n + 1.0) / ax * j - jm;
      jm = j;
      j = next;
    }
    value = j;
  }
  // j_l(-x) = (-1)^l j_l(x)
  return (x < 0.0 && (l % 2 == 1)) ? -value : value;
}

double zonal_harmonic(int l, double theta) {
  if (l < 0)
    throw std::invalid_argument("zonal_harmonic: negative order");
  const double x = std::cos(theta);
  double p_prev = 1.0, p = x;
  if (l == 0)
    p = 1.0;
  for (int n = 1; n < l; ++n) {
    const double next = ((2.0 * n + 1.0) * x * p - n * p_prev) / (n + 1.0);
    p_prev = p;
    p = next;
  }
  return std::sqrt((2.0 * l + 1.0) / (4.0 * kPi)) * p;
}

double bessel_root(int l, int n) {
  if (l < 0 || l >= kNumSpherical || n < 1 || n > kNumSphRadial)
    throw std::out_of_range("bessel_root: (l=" + std::to_string(l) +
                            ", n=" + std::to_string(n) + ") outside the table");
  return root_table().roots[l][n - 1];
}

void rbf(double d, double cutoff, std::span<double> out) {
  if (!(d > 0.0))
    throw std::invalid_argument("rbf: distance must be positive");
  if (out.size() != static_cast<std::size_t>(kNumRadial))
    throw std::invalid_argument("rbf: output span must hold 16 values");
  const double u = envelope(d, cutoff);
  const double norm = std::sqrt(2.0 / cutoff);
  for (int n = 1; n <= kNumRadial; ++n)
    out[n - 1] = u == 0.0 ? 0.0 : u * norm * std::sin(n * kPi * d / cutoff) / d;
}

std::array<double, kNumRadial> rbf(double d, double cutoff) {
  std::array<double, kNumRadial> out{};
  rbf(d, cutoff, out);
  return out;
}

void sbf(double d, double alpha, double cutoff, std::span<double> out) {
  if (!(d > 0.0))
    throw std::invalid_argument("sbf: distance must be positive");
  if (!(alpha >= 0.0 && alpha <= kPi))
    throw std::invalid_argument("sbf: angle outside [0, pi]");
  if (out.size() != static_cast<std::size_t>(kSbfSize))
    throw std::invalid_argument("sbf: output span must hold 42 values");
  const double u = envelope(d, cutoff);
  if (u == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const auto &table = root_table();
  const double c3 = cutoff * cutoff * cutoff;
  for (int l = 0; l < kNumSpherical; ++l) {
    const double y = zonal_harmonic(l, alpha);
    for (int n = 1; n <= kNumSphRadial; ++n) {
      const double z = table.roots[l][n - 1];
      const double norm = std::sqrt(2.0 / (c3 * table.next_sq[l][n - 1]));
      out[l * kNumSphRadial + (n - 1)] = u * norm * sph_bessel(l, z * d / cutoff) * y;
    }
  }
}

std::array<double, kSbfSize> sbf(double d, double alpha, double cutoff) {
  std::array<double, kSbfSize> out{};
  sbf(d, alpha, cutoff, out);
  return out;
}

} // namespace mxm::basis
