#include "mxm/elements.hpp"

#include <array>
#include <cctype>
#include <stdexcept>

namespace mxm {

namespace {

constexpr std::array<std::string_view, kMaxAtomicNumber> kSymbols = {
    "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na",
    "Mg", "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti",
    "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As",
    "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru",
    "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe"};

// Cordero et al., Dalton Trans. (2008); low-spin values for Mn, Fe, Co.
constexpr std::array<double, kMaxAtomicNumber> kCovalentRadius = {
    0.31, 0.28, 1.28, 0.96, 0.84, 0.76, 0.71, 0.66, 0.57, 0.58, 1.66,
    1.41, 1.21, 1.11, 1.07, 1.05, 1.02, 1.06, 2.03, 1.76, 1.70, 1.60,
    1.53, 1.39, 1.39, 1.32, 1.26, 1.24, 1.32, 1.22, 1.22, 1.20, 1.19,
    1.20, 1.20, 1.16, 2.20, 1.95, 1.90, 1.75, 1.64, 1.54, 1.47, 1.46,
    1.42, 1.39, 1.45, 1.44, 1.42, 1.39, 1.39, 1.38, 1.39, 1.40};

} // namespace

std::optional<int> atomic_number(std::string_view symbol) {
  if (symbol.empty() || symbol.size() > 2)
    return std::nullopt;
  std::string canon;
  canon += static_cast<char>(std::toupper(static_cast<unsigned char>(symbol[0])));
  if (symbol.size() == 2)
    canon += static_cast<char>(std::tolower(static_cast<unsigned char>(symbol[1])));
  for (std::size_t i = 0; i < kSymbols.size(); ++i)
    if (kSymbols[i] == canon)
      return static_cast<int>(i) + 1;
  return std::nullopt;
}

std::string element_symbol(int z) {
  if (z < 1 || z > kMaxAtomicNumber)
    throw std::out_of_range("no element symbol for Z=" + std::to_string(z));
  return std::string(kSymbols[z - 1]);
}

double covalent_radius(int z) {
  if (z < 1 || z > kMaxAtomicNumber)
    throw std::out_of_range("no covalent radius for Z=" + std::to_string(z));
  return kCovalentRadius[z - 1];
}

} // namespace mxm
