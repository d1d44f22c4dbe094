#pragma once

// Quantum registers and the gate library. Basis indexing is big-endian:
// qubit 1 is the most significant bit of the amplitude index, so |b1...bn>
// sits at index b1*2^(n-1) + ... + bn. Wire and qubit indices are 1-based
// throughout.

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qlam/error.hpp"

namespace qlam {

using cx = std::complex<double>;

constexpr double kUnitaryTol = 1e-9;
constexpr double kNormTol = 1e-6;

struct Register {
  int qubits = 0;
  std::vector<cx> amps;  // size 2^qubits

  static Register unit() { return Register{0, {cx(1.0, 0.0)}}; }

  static Register basis(int n, std::uint64_t index) {
    Register r;
    r.qubits = n;
    r.amps.assign(std::uint64_t(1) << n, cx(0.0, 0.0));
    r.amps[index] = cx(1.0, 0.0);
    return r;
  }

  static Register basis_bits(const std::vector<int>& bits) {
    std::uint64_t idx = 0;
    for (int b : bits) idx = (idx << 1) | std::uint64_t(b);
    return basis(static_cast<int>(bits.size()), idx);
  }

  double norm() const {
    double s = 0.0;
    for (const cx& a : amps) s += std::norm(a);
    return std::sqrt(s);
  }
};

inline bool register_close(const Register& x, const Register& y, double tol) {
  if (x.qubits != y.qubits) return false;
  for (std::size_t i = 0; i < x.amps.size(); ++i)
    if (std::abs(x.amps[i] - y.amps[i]) > tol) return false;
  return true;
}

inline Register tensor(const Register& a, const Register& b) {
  Register r;
  r.qubits = a.qubits + b.qubits;
  r.amps.resize(a.amps.size() * b.amps.size());
  for (std::size_t i = 0; i < a.amps.size(); ++i)
    for (std::size_t j = 0; j < b.amps.size(); ++j)
      r.amps[i * b.amps.size() + j] = a.amps[i] * b.amps[j];
  return r;
}

// ---------------------------------------------------------------------------
// Gates

using Matrix = std::vector<std::vector<cx>>;

struct Gate {
  std::string name;
  int arity = 0;
  Matrix matrix;  // 2^arity x 2^arity, rows/columns in big-endian wire order
};

inline double unitarity_deviation(const Matrix& m) {
  std::size_t d = m.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      cx s(0.0, 0.0);
      for (std::size_t k = 0; k < d; ++k) s += std::conj(m[k][i]) * m[k][j];
      double want = i == j ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(s - cx(want, 0.0)));
    }
  }
  return worst;
}

class GateLibrary {
 public:
  static GateLibrary builtins() {
    GateLibrary lib;
    const double s = 1.0 / std::sqrt(2.0);
    const cx i(0.0, 1.0);
    lib.add_unchecked({"X", 1, {{0, 1}, {1, 0}}});
    lib.add_unchecked({"Y", 1, {{0, -i}, {i, 0}}});
    lib.add_unchecked({"Z", 1, {{1, 0}, {0, -1}}});
    lib.add_unchecked({"H", 1, {{s, s}, {s, -s}}});
    lib.add_unchecked({"S", 1, {{1, 0}, {0, i}}});
    lib.add_unchecked({"T", 1, {{1, 0}, {0, std::exp(i * (M_PI / 4.0))}}});
    lib.add_unchecked({"CNOT", 2, {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}}});
    lib.add_unchecked({"CZ", 2, {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, -1}}});
    lib.add_unchecked(
        {"SWAP", 2, {{1, 0, 0, 0}, {0, 0, 1, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}}});
    return lib;
  }

  void add(Gate g) {
    if (gates_.count(g.name))
      fail(Err::NameClash, "gate '" + g.name + "' already defined");
    std::size_t dim = std::size_t(1) << g.arity;
    if (g.matrix.size() != dim)
      fail(Err::BadDimension, "gate '" + g.name + "': expected " +
                                  std::to_string(dim) + " rows");
    for (const auto& row : g.matrix)
      if (row.size() != dim)
        fail(Err::BadDimension, "gate '" + g.name + "': expected " +
                                    std::to_string(dim) + " columns");
    double dev = unitarity_deviation(g.matrix);
    if (dev > kUnitaryTol)
      fail(Err::NonUnitaryMatrix, "gate '" + g.name + "' is not unitary (deviation " +
                                      std::to_string(dev) + ")");
    add_unchecked(std::move(g));
  }

  // Gate library files: { "gates": [ { "name", "arity", "matrix": [[[re,im],...],...] } ] }
  void merge_json(const std::string& text) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      fail(Err::BadDimension, std::string("bad gate library: ") + e.what());
    }
    if (!j.is_object() || !j.contains("gates") || !j["gates"].is_array())
      fail(Err::BadDimension, "bad gate library: expected { \"gates\": [...] }");
    for (const auto& item : j["gates"]) {
      Gate g;
      g.name = item.at("name").get<std::string>();
      g.arity = item.at("arity").get<int>();
      if (g.arity <= 0) fail(Err::BadDimension, "gate '" + g.name + "': bad arity");
      for (const auto& row : item.at("matrix")) {
        std::vector<cx> r;
        for (const auto& entry : row) {
          if (!entry.is_array() || entry.size() != 2)
            fail(Err::BadDimension, "gate '" + g.name + "': entries must be [re, im]");
          r.emplace_back(entry[0].get<double>(), entry[1].get<double>());
        }
        g.matrix.push_back(std::move(r));
      }
      add(std::move(g));
    }
  }

  void merge_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Err::BadDimension, "cannot open gate library '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    merge_json(ss.str());
  }

  const Gate* find(const std::string& name) const {
    auto it = gates_.find(name);
    return it == gates_.end() ? nullptr : &it->second;
  }

  const Gate& require(const std::string& name) const {
    const Gate* g = find(name);
    if (!g) fail(Err::UnknownGate, "unknown gate '" + name + "'");
    return *g;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : gates_) out.push_back(k);
    return out;
  }

 private:
  void add_unchecked(Gate g) { gates_.emplace(g.name, std::move(g)); }
  std::map<std::string, Gate> gates_;
};

inline const GateLibrary& builtin_gates() {
  static const GateLibrary lib = GateLibrary::builtins();
  return lib;
}

// ---------------------------------------------------------------------------
// Lifted application: act with g on the register qubits selected by `wires`
// (wire k of the gate acts on qubit wires[k-1]), identity elsewhere.

inline Register apply_lifted(const Gate& g, const std::vector<int>& wires,
                             const Register& r) {
  int n = r.qubits;
  int m = g.arity;
  if (static_cast<int>(wires.size()) != m)
    fail(Err::ArityMismatch, "gate '" + g.name + "' expects " + std::to_string(m) +
                                 " wires, got " + std::to_string(wires.size()));
  std::uint64_t wire_mask = 0;
  std::vector<int> shift(m);  // bit position of wire k (qubit j <-> bit n-j)
  for (int k = 0; k < m; ++k) {
    int w = wires[k];
    if (w < 1 || w > n)
      fail(Err::WireOutOfRange, "wire " + std::to_string(w) + " out of range 1.." +
                                    std::to_string(n));
    shift[k] = n - w;
    std::uint64_t bit = std::uint64_t(1) << shift[k];
    if (wire_mask & bit) fail(Err::DuplicateWire, "duplicate wire " + std::to_string(w));
    wire_mask |= bit;
  }

  Register out = r;
  std::uint64_t dim = r.amps.size();
  std::uint64_t sub = std::uint64_t(1) << m;
  std::vector<cx> block(sub), res(sub);
  for (std::uint64_t base = 0; base < dim; ++base) {
    if (base & wire_mask) continue;  // enumerate each block once
    for (std::uint64_t s = 0; s < sub; ++s) {
      std::uint64_t idx = base;
      for (int k = 0; k < m; ++k)
        if (s & (std::uint64_t(1) << (m - 1 - k))) idx |= std::uint64_t(1) << shift[k];
      block[s] = r.amps[idx];
    }
    for (std::uint64_t i = 0; i < sub; ++i) {
      cx acc(0.0, 0.0);
      for (std::uint64_t j = 0; j < sub; ++j) acc += g.matrix[i][j] * block[j];
      res[i] = acc;
    }
    for (std::uint64_t s = 0; s < sub; ++s) {
      std::uint64_t idx = base;
      for (int k = 0; k < m; ++k)
        if (s & (std::uint64_t(1) << (m - 1 - k))) idx |= std::uint64_t(1) << shift[k];
      out.amps[idx] = res[s];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Permutations of qubit positions. target(k) = j means output qubit k takes
// the value of input qubit j, i.e. |b1...bn> -> |b_t(1)...b_t(n)>.

struct Permutation {
  std::vector<int> target;  // 0-based storage of a map on {1..n}

  static Permutation identity(int n) {
    Permutation p;
    p.target.resize(n);
    std::iota(p.target.begin(), p.target.end(), 1);
    return p;
  }

  int size() const { return static_cast<int>(target.size()); }
  int operator()(int k) const { return target[k - 1]; }

  bool is_identity() const {
    for (int k = 1; k <= size(); ++k)
      if ((*this)(k) != k) return false;
    return true;
  }

  Permutation inverse() const {
    Permutation p;
    p.target.resize(target.size());
    for (int k = 1; k <= size(); ++k) p.target[(*this)(k)-1] = k;
    return p;
  }

  // (p ∘ q)(k) = p(q(k))
  Permutation compose(const Permutation& q) const {
    Permutation r;
    r.target.resize(target.size());
    for (int k = 1; k <= size(); ++k) r.target[k - 1] = (*this)(q(k));
    return r;
  }

  bool valid() const {
    std::vector<bool> seen(target.size(), false);
    for (int t : target) {
      if (t < 1 || t > size() || seen[t - 1]) return false;
      seen[t - 1] = true;
    }
    return true;
  }
};

inline Register apply_permutation(const Permutation& p, const Register& r) {
  if (p.size() != r.qubits)
    fail(Err::SizeMismatch, "permutation on " + std::to_string(p.size()) +
                                " elements applied to " + std::to_string(r.qubits) +
                                " qubits");
  int n = r.qubits;
  Register out;
  out.qubits = n;
  out.amps.assign(r.amps.size(), cx(0.0, 0.0));
  for (std::uint64_t i = 0; i < r.amps.size(); ++i) {
    std::uint64_t o = 0;
    for (int k = 1; k <= n; ++k) {
      std::uint64_t bit = (i >> (n - p(k))) & 1u;
      o |= bit << (n - k);
    }
    out.amps[o] = r.amps[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Register text grammar: term (('+'|'-') term)*, term = coeff? 'i'? '|' bits '>'
// with coeff one of: decimal, a/b, 1/sqrt(k). Whitespace is insignificant.

namespace detail {

struct RegParser {
  const std::string& src;
  std::size_t pos = 0;

  explicit RegParser(const std::string& s) : src(s) {}

  void skip() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }

  bool done() {
    skip();
    return pos >= src.size();
  }

  char peek() {
    skip();
    return pos < src.size() ? src[pos] : '\0';
  }

  bool accept(char c) {
    skip();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  double number() {
    skip();
    std::size_t start = pos;
    while (pos < src.size() &&
           (std::isdigit(static_cast<unsigned char>(src[pos])) || src[pos] == '.'))
      ++pos;
    if (pos == start) fail(Err::MalformedAmplitude, "expected number", pos);
    try {
      return std::stod(src.substr(start, pos - start));
    } catch (const std::exception&) {
      fail(Err::MalformedAmplitude, "bad number", start);
    }
  }

  // coeff ::= number | number '/' number | number '/' 'sqrt' '(' number ')'
  double coeff() {
    double num = number();
    if (accept('/')) {
      skip();
      if (src.compare(pos, 4, "sqrt") == 0) {
        pos += 4;
        if (!accept('(')) fail(Err::MalformedAmplitude, "expected '(' after sqrt", pos);
        double k = number();
        if (!accept(')')) fail(Err::MalformedAmplitude, "expected ')'", pos);
        if (k <= 0) fail(Err::MalformedAmplitude, "sqrt of non-positive number", pos);
        return num / std::sqrt(k);
      }
      double den = number();
      if (den == 0) fail(Err::MalformedAmplitude, "division by zero", pos);
      return num / den;
    }
    return num;
  }

  std::string bits() {
    if (!accept('|')) fail(Err::MalformedAmplitude, "expected '|'", pos);
    std::string bs;
    while (pos < src.size() && (src[pos] == '0' || src[pos] == '1')) bs += src[pos++];
    if (bs.empty()) fail(Err::MalformedAmplitude, "expected bit string", pos);
    if (!accept('>')) fail(Err::MalformedAmplitude, "expected '>'", pos);
    return bs;
  }
};

}  // namespace detail

inline Register parse_register(const std::string& text) {
  detail::RegParser p(text);
  std::map<std::string, cx> terms;
  int width = -1;
  bool first = true;
  while (!p.done()) {
    double sign = 1.0;
    if (first) {
      if (p.accept('-')) sign = -1.0;
      first = false;
    } else if (p.accept('+')) {
      sign = 1.0;
    } else if (p.accept('-')) {
      sign = -1.0;
    } else {
      fail(Err::MalformedAmplitude, "expected '+' or '-'", p.pos);
    }
    double mag = 1.0;
    char c = p.peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') mag = p.coeff();
    bool imag = false;
    if (p.peek() == 'i') {
      p.accept('i');
      imag = true;
    }
    std::string bs = p.bits();
    if (width == -1) width = static_cast<int>(bs.size());
    if (static_cast<int>(bs.size()) != width)
      fail(Err::InconsistentBitWidth, "bit strings of different widths");
    cx value = imag ? cx(0.0, sign * mag) : cx(sign * mag, 0.0);
    terms[bs] += value;
  }
  if (width == -1) fail(Err::MalformedAmplitude, "empty register");
  Register r;
  r.qubits = width;
  r.amps.assign(std::uint64_t(1) << width, cx(0.0, 0.0));
  for (const auto& [bs, v] : terms) {
    std::uint64_t idx = 0;
    for (char b : bs) idx = (idx << 1) | std::uint64_t(b - '0');
    r.amps[idx] = v;
  }
  double nrm = r.norm();
  if (std::abs(nrm - 1.0) > kNormTol)
    fail(Err::NotNormalized, "register norm is " + std::to_string(nrm));
  for (cx& a : r.amps) a /= nrm;
  return r;
}

namespace detail {

inline std::string format_magnitude(double v, int precision) {
  if (std::abs(v - 1.0) < 1e-9) return "";
  for (int k = 2; k <= 16; ++k) {
    int root = static_cast<int>(std::round(std::sqrt(double(k))));
    if (root * root == k) continue;  // prefer plain decimals for 1/2, 1/3, 1/4
    if (std::abs(v - 1.0 / std::sqrt(double(k))) < 1e-9)
      return "1/sqrt(" + std::to_string(k) + ")";
  }
  std::ostringstream os;
  os.precision(precision);
  os << std::fixed << v;
  std::string s = os.str();
  while (s.size() > 1 && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace detail

inline std::string format_register(const Register& r, int precision = 6) {
  const double tiny = 1e-9;
  std::string out;
  for (std::uint64_t idx = 0; idx < r.amps.size(); ++idx) {
    cx a = r.amps[idx];
    std::string bs;
    for (int k = r.qubits - 1; k >= 0; --k) bs += char('0' + ((idx >> k) & 1u));
    for (int part = 0; part < 2; ++part) {
      double v = part == 0 ? a.real() : a.imag();
      if (std::abs(v) < tiny) continue;
      bool neg = v < 0;
      std::string mag = detail::format_magnitude(std::abs(v), precision);
      if (out.empty()) {
        if (neg) out += "-";
      } else {
        out += neg ? " - " : " + ";
      }
      out += mag;
      if (part == 1) out += "i";
      out += "|" + bs + ">";
    }
  }
  if (out.empty()) out = "0";
  return out;
}

}  // namespace qlam
