#include "mxm/molecule.hpp"

#include "mxm/elements.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace mxm {

namespace {

std::vector<std::string> split_ws(const std::string &line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok)
    out.push_back(tok);
  return out;
}

std::optional<double> to_double(const std::string &s) {
  double v = 0.0;
  const char *first = s.data();
  const char *last = s.data() + s.size();
  if (!s.empty() && *first == '+')
    ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    return std::nullopt;
  return v;
}

std::optional<std::size_t> to_index(const std::string &s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    return std::nullopt;
  return v;
}

bool blank(const std::string &line) {
  return line.find_first_not_of(" \t") == std::string::npos;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

Bond make_bond(std::size_t a, std::size_t b) {
  return a < b ? Bond{a, b} : Bond{b, a};
}

ParseError::ParseError(std::size_t line, std::string detail, std::string file)
    : std::runtime_error((file.empty() ? "" : file + ": ") + "line " +
                         std::to_string(line) + ": " + detail),
      line_(line), detail_(std::move(detail)) {}

void Molecule::validate() const {
  if (atomic_numbers.empty())
    throw std::invalid_argument("molecule '" + name + "' has no atoms");
  if (atomic_numbers.size() != coords.size())
    throw std::invalid_argument("molecule '" + name + "': " +
                                std::to_string(atomic_numbers.size()) +
                                " atomic numbers but " +
                                std::to_string(coords.size()) + " coordinates");
  for (int z : atomic_numbers)
    if (z < 1 || z > kMaxAtomicNumber)
      throw std::invalid_argument("molecule '" + name + "': atomic number " +
                                  std::to_string(z) + " outside 1.." +
                                  std::to_string(kMaxAtomicNumber));
  if (bonds) {
    std::set<Bond> seen;
    for (const auto &b : *bonds) {
      if (b.first >= size() || b.second >= size())
        throw std::invalid_argument("molecule '" + name + "': bond index out of range");
      if (b.first == b.second)
        throw std::invalid_argument("molecule '" + name + "': self bond on atom " +
                                    std::to_string(b.first));
      if (!seen.insert(make_bond(b.first, b.second)).second)
        throw std::invalid_argument("molecule '" + name + "': duplicate bond " +
                                    std::to_string(b.first) + "-" +
                                    std::to_string(b.second));
    }
  }
}

double Molecule::target(const std::string &prop) const {
  auto it = targets.find(prop);
  if (it == targets.end())
    throw std::out_of_range("molecule '" + name + "' has no target '" + prop + "'");
  return it->second;
}

Molecule parse_extxyz(std::istream &in, std::string name) {
  Molecule m;
  m.name = std::move(name);

  std::size_t lineno = 0;
  std::string line;
  auto next = [&]() -> bool {
    if (!std::getline(in, line))
      return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    return true;
  };

  if (!next())
    throw ParseError(1, "missing atom count");
  auto count_tokens = split_ws(line);
  std::optional<std::size_t> count;
  if (count_tokens.size() == 1)
    count = to_index(count_tokens[0]);
  if (!count || *count == 0)
    throw ParseError(lineno, "expected a positive atom count, got '" + line + "'");

  if (!next())
    throw ParseError(lineno + 1, "missing property line");
  for (const auto &tok : split_ws(line)) {
    auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0)
      continue;
    if (auto v = to_double(tok.substr(eq + 1)))
      m.targets[tok.substr(0, eq)] = *v;
  }

  m.atomic_numbers.reserve(*count);
  m.coords.reserve(*count);
  for (std::size_t i = 0; i < *count; ++i) {
    if (!next())
      throw ParseError(lineno + 1, "expected " + std::to_string(*count) +
                                       " atoms, found " + std::to_string(i));
    auto tok = split_ws(line);
    if (tok.size() < 4)
      throw ParseError(lineno, "expected 'Symbol x y z', got '" + line + "'");
    auto z = atomic_number(tok[0]);
    if (!z)
      throw ParseError(lineno, "unknown element symbol '" + tok[0] + "'");
    Vec3 r{};
    for (int k = 0; k < 3; ++k) {
      auto v = to_double(tok[1 + k]);
      if (!v)
        throw ParseError(lineno, "malformed coordinate '" + tok[1 + k] + "'");
      r[k] = *v;
    }
    m.atomic_numbers.push_back(*z);
    m.coords.push_back(r);
  }

  bool in_bonds = false;
  while (next()) {
    if (blank(line))
      continue;
    auto tok = split_ws(line);
    if (!in_bonds) {
      if (tok.size() == 1 && tok[0] == "BONDS") {
        in_bonds = true;
        m.bonds.emplace();
        continue;
      }
      throw ParseError(lineno, "unexpected content after " +
                                   std::to_string(*count) + " atoms: '" + line + "'");
    }
    std::optional<std::size_t> a, b;
    if (tok.size() == 2) {
      a = to_index(tok[0]);
      b = to_index(tok[1]);
    }
    if (!a || !b)
      throw ParseError(lineno, "expected bond 'i j', got '" + line + "'");
    if (*a >= *count || *b >= *count)
      throw ParseError(lineno, "bond index out of range in '" + line + "'");
    if (*a == *b)
      throw ParseError(lineno, "self bond in '" + line + "'");
    auto bond = make_bond(*a, *b);
    for (const auto &existing : *m.bonds)
      if (existing == bond)
        throw ParseError(lineno, "duplicate bond '" + line + "'");
    m.bonds->push_back(bond);
  }
  return m;
}

Molecule read_extxyz(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open " + path.string());
  try {
    return parse_extxyz(in, path.stem().string());
  } catch (const ParseError &e) {
    throw ParseError(e.line(), e.detail(), path.string());
  }
}

void write_extxyz(std::ostream &out, const Molecule &m) {
  out << m.size() << '\n';
  bool first = true;
  for (const auto &[key, value] : m.targets) {
    if (!first)
      out << ' ';
    out << key << '=' << format_double(value);
    first = false;
  }
  out << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << element_symbol(m.atomic_numbers[i]);
    for (double c : m.coords[i])
      out << ' ' << format_double(c);
    out << '\n';
  }
  if (m.bonds) {
    out << "BONDS\n";
    for (const auto &b : *m.bonds)
      out << b.first << ' ' << b.second << '\n';
  }
}

} // namespace mxm
