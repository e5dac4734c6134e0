#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mxm {

using Vec3 = std::array<double, 3>;

/// Unordered atom pair, stored with first < second.
struct Bond {
  std::size_t first = 0;
  std::size_t second = 0;

  friend bool operator==(const Bond &, const Bond &) = default;
  friend auto operator<=>(const Bond &, const Bond &) = default;
};

Bond make_bond(std::size_t a, std::size_t b);

struct Molecule {
  std::string name;
  std::vector<int> atomic_numbers;
  std::vector<Vec3> coords; // Angstrom
  std::optional<std::vector<Bond>> bonds;
  std::map<std::string, double> targets;

  std::size_t size() const { return atomic_numbers.size(); }

  /// Throws std::invalid_argument when an invariant is broken: atom count
  /// mismatch, empty molecule, Z outside the element table, bad bond indices,
  /// self bonds or duplicate bonds.
  void validate() const;

  double target(const std::string &prop) const;

  friend bool operator==(const Molecule &, const Molecule &) = default;
};

class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, std::string detail, std::string file = {});
  std::size_t line() const { return line_; }
  const std::string &detail() const { return detail_; }

private:
  std::size_t line_;
  std::string detail_;
};

/// Extended-XYZ reader.
///
///   line 1       atom count
///   line 2       whitespace-separated key=value pairs; numeric values are
///                read as targets, other tokens are ignored
///   N lines      "Symbol x y z" (extra columns ignored)
///   optional     a line "BONDS" followed by "i j" index pairs
///
/// LF and CRLF line endings are accepted.
Molecule parse_extxyz(std::istream &in, std::string name = {});
Molecule read_extxyz(const std::filesystem::path &path);

/// Inverse of parse_extxyz; floats are written with round-trip precision.
void write_extxyz(std::ostream &out, const Molecule &m);

} // namespace mxm
