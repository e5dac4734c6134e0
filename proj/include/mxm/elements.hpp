#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace mxm {

/// Largest atomic number covered by the element tables (H through Xe).
inline constexpr int kMaxAtomicNumber = 54;

/// Atomic number for a chemical symbol; case-insensitive ("CL" and "Cl" both
/// map to 17). Empty when the symbol is unknown or beyond Xe.
std::optional<int> atomic_number(std::string_view symbol);

/// Canonical symbol for Z in [1, kMaxAtomicNumber]; throws otherwise.
std::string element_symbol(int z);

/// Single-bond covalent radius in Angstrom. Throws std::out_of_range for Z
/// outside the table.
double covalent_radius(int z);

} // namespace mxm
