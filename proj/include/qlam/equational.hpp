#pragma once

// Superposed type derivations and the oriented rewrite rules over them:
// beta, beta.pair, and the unitary axiom that sends a gate applied to a
// literal bit tuple to the weighted sum of its outcomes. Reducts are rebuilt
// through the type checker, which doubles as the substitution-correctness
// check.

#include <complex>
#include <cstdint>
#include <functional>
#include <sstream>
#include <map>
#include <optional>
#include <vector>

#include "qlam/error.hpp"
#include "qlam/quantum.hpp"
#include "qlam/syntax.hpp"
#include "qlam/typing.hpp"

namespace qlam {

constexpr double kCoeffPrune = 1e-12;

struct Summand {
  cx coeff;
  DerivPtr deriv;
};

struct Superposed {
  Env env;
  TypePtr type;
  std::vector<Summand> sum;
};

inline Superposed superpose(const DerivPtr& d) {
  return Superposed{d->env, d->type, {{cx(1.0, 0.0), d}}};
}

enum class Strategy { LeftmostInnermost, RightmostInnermost };

namespace detail {

// Gather the bit values of a literal tuple, left to right. Returns false if
// any leaf is not a bit constant.
inline bool literal_bits(const TermPtr& t, std::vector<int>& out) {
  if (t->kind == TermKind::Bit) {
    out.push_back(t->bit_value);
    return true;
  }
  if (t->kind == TermKind::Tensor)
    return literal_bits(t->a, out) && literal_bits(t->b, out);
  return false;
}

inline bool is_redex(const TermPtr& t, const GateLibrary& gates) {
  if (t->kind != TermKind::App) return false;
  if (t->a->kind == TermKind::LamVar) return true;
  if (t->a->kind == TermKind::LamPair) return t->b->kind == TermKind::Tensor;
  if (t->a->kind == TermKind::Gate) {
    std::vector<int> bits;
    if (!literal_bits(t->b, bits)) return false;
    const Gate* g = gates.find(t->a->name);
    return g && static_cast<int>(bits.size()) == g->arity;
  }
  return false;
}

// Innermost search: children first, then the node itself. The strategy picks
// the child order.
inline bool find_redex(const TermPtr& t, const GateLibrary& gates, Strategy strat,
                       std::vector<int>& path) {
  std::vector<std::pair<int, TermPtr>> kids;
  if (t->kind == TermKind::Tensor || t->kind == TermKind::App)
    kids = {{0, t->a}, {1, t->b}};
  else if (t->kind == TermKind::LamVar || t->kind == TermKind::LamPair)
    kids = {{0, t->a}};
  if (strat == Strategy::RightmostInnermost) std::reverse(kids.begin(), kids.end());
  for (auto& [idx, kid] : kids) {
    path.push_back(idx);
    if (find_redex(kid, gates, strat, path)) return true;
    path.pop_back();
  }
  return is_redex(t, gates);
}

inline TermPtr subterm_at(const TermPtr& t, const std::vector<int>& path, std::size_t i = 0) {
  if (i == path.size()) return t;
  return subterm_at(path[i] == 0 ? t->a : t->b, path, i + 1);
}

inline TermPtr replace_at(const TermPtr& t, const std::vector<int>& path,
                          const TermPtr& repl, std::size_t i = 0) {
  if (i == path.size()) return repl;
  switch (t->kind) {
    case TermKind::Tensor:
      return path[i] == 0 ? mk_tensor(replace_at(t->a, path, repl, i + 1), t->b)
                          : mk_tensor(t->a, replace_at(t->b, path, repl, i + 1));
    case TermKind::App:
      return path[i] == 0 ? mk_app(replace_at(t->a, path, repl, i + 1), t->b)
                          : mk_app(t->a, replace_at(t->b, path, repl, i + 1));
    case TermKind::LamVar:
      return mk_lam(t->name, replace_at(t->a, path, repl, i + 1));
    case TermKind::LamPair:
      return mk_lam_pair(t->name, t->name2, replace_at(t->a, path, repl, i + 1));
    default:
      throw std::logic_error("replace_at: bad path");
  }
}

inline TermPtr beta_pair_body(const TermPtr& lam, const TermPtr& left,
                              const TermPtr& right) {
  std::string x = lam->name, y = lam->name2;
  TermPtr body = lam->a;
  std::vector<std::string> avoid = free_vars(left);
  auto fr = free_vars(right);
  avoid.insert(avoid.end(), fr.begin(), fr.end());
  if (std::find(avoid.begin(), avoid.end(), x) != avoid.end()) {
    std::vector<std::string> all = avoid;
    auto bf = free_vars(body);
    all.insert(all.end(), bf.begin(), bf.end());
    all.push_back(y);
    std::string nx = fresh_name(x, all);
    body = rename_free(body, x, nx);
    x = nx;
  }
  if (std::find(avoid.begin(), avoid.end(), y) != avoid.end()) {
    std::vector<std::string> all = avoid;
    auto bf = free_vars(body);
    all.insert(all.end(), bf.begin(), bf.end());
    all.push_back(x);
    std::string ny = fresh_name(y, all);
    body = rename_free(body, y, ny);
    y = ny;
  }
  return substitute(substitute(body, x, left), y, right);
}

// Fire the redex at the root of `r`, returning weighted replacement terms.
inline std::vector<std::pair<cx, TermPtr>> fire(const TermPtr& r, int fresh_label_base,
                                                const GateLibrary& gates) {
  if (r->a->kind == TermKind::LamVar)
    return {{cx(1.0, 0.0), substitute(r->a->a, r->a->name, r->b)}};
  if (r->a->kind == TermKind::LamPair)
    return {{cx(1.0, 0.0), beta_pair_body(r->a, r->b->a, r->b->b)}};

  // gate on a literal tuple: read off the matrix column
  std::vector<int> bits;
  literal_bits(r->b, bits);
  const Gate& g = gates.require(r->a->name);
  int k = g.arity;
  std::uint64_t col = 0;
  for (int b : bits) col = (col << 1) | std::uint64_t(b);
  std::vector<std::pair<cx, TermPtr>> out;
  for (std::uint64_t row = 0; row < g.matrix.size(); ++row) {
    cx coef = g.matrix[row][col];
    if (std::abs(coef) <= kCoeffPrune) continue;
    // fresh labels above everything in the summand, assigned positionally
    TermPtr tuple = mk_bit((row >> 0) & 1u, fresh_label_base + k - 1);
    for (int q = 1; q < k; ++q)
      tuple = mk_tensor(mk_bit((row >> q) & 1u, fresh_label_base + k - 1 - q), tuple);
    out.emplace_back(coef, tuple);
  }
  return out;
}

inline bool env_same_set(const Env& a, const Env& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [name, type] : a) {
    auto it = std::find_if(b.begin(), b.end(),
                           [&](const auto& e) { return e.first == name; });
    if (it == b.end() || !type_eq(it->second, type)) return false;
  }
  return true;
}

}  // namespace detail

// One parallel rewrite round: each summand with a redex fires its innermost
// one (per the strategy); summands already normal pass through. Returns
// nothing once every summand is normal. Like summands are merged up to
// renaming of bound variables and bit labels.
inline std::optional<Superposed> reduce_once(const Superposed& s,
                                             const GateLibrary& gates = builtin_gates(),
                                             Strategy strat = Strategy::LeftmostInnermost) {
  bool any = false;
  std::vector<Summand> next;
  for (const Summand& m : s.sum) {
    std::vector<int> path;
    if (!detail::find_redex(m.deriv->term, gates, strat, path)) {
      next.push_back(m);
      continue;
    }
    any = true;
    TermPtr redex = detail::subterm_at(m.deriv->term, path);
    int base = max_bit_label(m.deriv->term) + 1;
    for (auto& [coef, repl] : detail::fire(redex, base, gates)) {
      TermPtr whole = detail::replace_at(m.deriv->term, path, repl);
      DerivPtr d;
      try {
        d = typecheck(m.deriv->env, whole, gates);
      } catch (const QlamError& e) {
        fail(Err::IllTypedRedex,
             std::string("reduct failed to type-check: ") + e.what());
      }
      if (!type_eq(d->type, s.type) || !detail::env_same_set(d->env, s.env))
        fail(Err::IllTypedRedex, "reduct changed the judgment");
      next.push_back({m.coeff * coef, d});
    }
  }
  if (!any) return std::nullopt;

  std::vector<Summand> merged;
  for (const Summand& m : next) {
    bool joined = false;
    for (Summand& o : merged) {
      if (alpha_label_eq(o.deriv->term, m.deriv->term)) {
        o.coeff += m.coeff;
        joined = true;
        break;
      }
    }
    if (!joined) merged.push_back(m);
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const Summand& m) {
                                return std::abs(m.coeff) < kCoeffPrune;
                              }),
               merged.end());
  Superposed out{s.env, s.type, std::move(merged)};
  return out;
}

inline Superposed normalize(Superposed s, const GateLibrary& gates = builtin_gates(),
                            int max_steps = 10000,
                            Strategy strat = Strategy::LeftmostInnermost) {
  for (int round = 0; round < max_steps; ++round) {
    auto next = reduce_once(s, gates, strat);
    if (!next) return s;
    s = std::move(*next);
  }
  fail(Err::StepLimitExceeded,
       "no normal form within " + std::to_string(max_steps) + " rounds");
}

// ---------------------------------------------------------------------------
// Ground normal forms as amplitude vectors, bit strings read positionally
// from the tensor structure (labels ignored).

struct AmplitudeVector {
  int width = 0;
  std::map<std::uint64_t, cx> coeffs;
};

inline AmplitudeVector to_amplitude_vector(const Superposed& s) {
  if (!s.env.empty())
    fail(Err::NotGroundNormalForm, "superposition has free variables");
  AmplitudeVector v;
  v.width = atom_count(s.type);
  bool ground_type = true;
  std::function<void(const TypePtr&)> scan = [&](const TypePtr& t) {
    if (t->kind == TypeKind::Lolli) ground_type = false;
    if (t->kind != TypeKind::Qubit) {
      scan(t->a);
      scan(t->b);
    }
  };
  scan(s.type);
  if (!ground_type)
    fail(Err::NotGroundNormalForm, "type is not a qubit tuple");
  for (const Summand& m : s.sum) {
    std::vector<int> bits;
    if (!detail::literal_bits(m.deriv->term, bits) ||
        static_cast<int>(bits.size()) != v.width)
      fail(Err::NotGroundNormalForm,
           "summand is not a bit tuple: " + print_term(m.deriv->term));
    std::uint64_t idx = 0;
    for (int b : bits) idx = (idx << 1) | std::uint64_t(b);
    v.coeffs[idx] += m.coeff;
  }
  return v;
}

inline Register to_register(const AmplitudeVector& v) {
  Register r;
  r.qubits = v.width;
  r.amps.assign(std::uint64_t(1) << v.width, cx(0.0, 0.0));
  for (const auto& [idx, c] : v.coeffs) r.amps[idx] = c;
  return r;
}

inline double total_weight(const Superposed& s) {
  double w = 0.0;
  for (const Summand& m : s.sum) w += std::norm(m.coeff);
  return w;
}

inline std::string show_superposed(const Superposed& s, int precision = 6) {
  std::ostringstream os;
  os.precision(precision);
  for (std::size_t i = 0; i < s.sum.size(); ++i) {
    const cx c = s.sum[i].coeff;
    if (i) os << " + ";
    os << "(" << c.real();
    if (c.imag() != 0.0) os << (c.imag() < 0 ? " - " : " + ") << std::abs(c.imag()) << "i";
    os << ") " << print_term(s.sum[i].deriv->term);
  }
  return os.str();
}

}  // namespace qlam
