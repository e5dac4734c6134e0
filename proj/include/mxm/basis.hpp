#pragma once

#include "mxm/molecule.hpp"

#include <array>
#include <span>
#include <vector>

namespace mxm::basis {

inline constexpr int kNumRadial = 16;   // RBF size
inline constexpr int kNumSpherical = 7; // orders l = 0..6
inline constexpr int kNumSphRadial = 6; // roots n = 1..6
inline constexpr int kSbfSize = kNumSpherical * kNumSphRadial;
inline constexpr int kEnvelopeExponent = 6;

double distance(const Vec3 &a, const Vec3 &b);

/// Angle at vertex b between rays b->a and b->c, in [0, pi]. Throws
/// std::invalid_argument when a or c coincides with b.
double angle(const Vec3 &a, const Vec3 &b, const Vec3 &c);

/// Polynomial cutoff u(d/c) with u(0) = 1 and u, u', u'' all zero at d = c.
/// Zero for d >= c.
double envelope(double d, double cutoff, int p = kEnvelopeExponent);

/// Spherical Bessel function of the first kind j_l(x).
double sph_bessel(int l, double x);

/// Zonal spherical harmonic Y_l^0 as a function of the polar angle.
double zonal_harmonic(int l, double theta);

/// n-th positive root (n >= 1) of j_l, for l < kNumSpherical and
/// n <= kNumSphRadial. Roots are computed by bisection on first use.
double bessel_root(int l, int n);

/// out[n-1] = u(d) sqrt(2/c) sin(n pi d / c) / d for n = 1..16.
/// Throws std::invalid_argument for d <= 0.
void rbf(double d, double cutoff, std::span<double> out);
std::array<double, kNumRadial> rbf(double d, double cutoff);

/// out[l * 6 + (n-1)] = u(d) N_ln j_l(z_ln d / c) Y_l^0(alpha) with
/// N_ln = sqrt(2 / (c^3 j_{l+1}(z_ln)^2)).
void sbf(double d, double alpha, double cutoff, std::span<double> out);
std::array<double, kSbfSize> sbf(double d, double alpha, double cutoff);

} // namespace mxm::basis
