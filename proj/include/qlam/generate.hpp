#pragma once

// Seeded random generation of closed well-typed terms, by type-directed
// synthesis: pick a goal type whose machine needs at most `max_qubits`
// tokens, then build a term of exactly that type, threading bound variables
// to the leaves. Every output type-checks by construction.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "qlam/error.hpp"
#include "qlam/quantum.hpp"
#include "qlam/syntax.hpp"
#include "qlam/typing.hpp"

namespace qlam {

namespace detail {

struct GenVar {
  std::string name;
  int width;  // 1 for qubit variables; >1 for a tuple variable (kept last)
};

struct Gen {
  std::mt19937_64 rng;
  const GateLibrary& gates;
  int var_counter = 0;
  const std::vector<std::string> unary{"X", "Y", "Z", "H", "S", "T"};
  const std::vector<std::string> binary{"CNOT", "CZ", "SWAP"};

  Gen(std::uint64_t seed, const GateLibrary& g) : rng(seed), gates(g) {}

  int pick(int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }
  bool chance(int num, int den) { return pick(den) < num; }
  std::string fresh() { return "v" + std::to_string(++var_counter); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i)
      std::swap(v[i], v[pick(i + 1)]);
  }

  // Right-associated tuple of the given width: bound variables at random
  // leaf positions, bits elsewhere, a tuple variable always rightmost.
  TermPtr base_tuple(int k, std::vector<GenVar> vars) {
    GenVar tail{"", 0};
    std::vector<GenVar> singles;
    for (const GenVar& v : vars) {
      if (v.width > 1)
        tail = v;
      else
        singles.push_back(v);
    }
    int leaves = tail.width ? k - tail.width + 1 : k;
    int single_slots = tail.width ? leaves - 1 : leaves;
    if (static_cast<int>(singles.size()) > single_slots)
      throw std::logic_error("generator: width budget exceeded");
    std::vector<int> slots(single_slots);
    for (int i = 0; i < single_slots; ++i) slots[i] = i;
    shuffle(slots);
    std::vector<TermPtr> leaf(leaves);
    for (std::size_t i = 0; i < singles.size(); ++i) leaf[slots[i]] = mk_var(singles[i].name);
    if (tail.width) leaf[leaves - 1] = mk_var(tail.name);
    for (TermPtr& l : leaf)
      if (!l) l = mk_bit(pick(2), 0);
    TermPtr t = leaf[leaves - 1];
    for (int i = leaves - 2; i >= 0; --i) t = mk_tensor(leaf[i], t);
    return t;
  }

  static int total_width(const std::vector<GenVar>& vars) {
    int w = 0;
    for (const GenVar& v : vars) w += v.width;
    return w;
  }

  // Split the qubit-width variables among two demands; the tuple variable
  // (if any) stays with the right-hand demand.
  void split(const std::vector<GenVar>& vars, int left_cap, std::vector<GenVar>& left,
             std::vector<GenVar>& right) {
    std::vector<GenVar> singles;
    for (const GenVar& v : vars)
      if (v.width > 1)
        right.push_back(v);
      else
        singles.push_back(v);
    shuffle(singles);
    int taken = 0;
    for (const GenVar& v : singles) {
      if (taken < left_cap && chance(1, 2)) {
        left.push_back(v);
        ++taken;
      } else {
        right.push_back(v);
      }
    }
  }

  // A term of type B^k (right-associated) whose free variables are exactly
  // `vars`, each used once.
  TermPtr ground(int k, std::vector<GenVar> vars, int depth) {
    bool has_tail = false;
    for (const GenVar& v : vars) has_tail |= v.width > 1;
    if (depth <= 0) return base_tuple(k, vars);

    switch (pick(8)) {
      case 0:
        return base_tuple(k, vars);
      case 1:
      case 6: {  // gate over the full width
        if (k > 2) break;
        const auto& pool = k == 1 ? unary : binary;
        return mk_app(mk_gate(pool[pick(static_cast<int>(pool.size()))]),
                      ground(k, vars, depth - 1));
      }
      case 2:
      case 7: {  // head qubit and tail
        if (k < 2) break;
        std::vector<GenVar> l, r;
        split(vars, 1, l, r);
        if (total_width(l) > 1 || total_width(r) > k - 1) break;
        return mk_tensor(ground(1, l, depth - 1), ground(k - 1, r, depth - 1));
      }
      case 3: {  // gate a pair, then rebuild the tuple through a pattern
        if (k < 2) break;
        std::vector<GenVar> a, b;
        split(vars, 2, a, b);
        if (total_width(a) > 2 || total_width(b) > k - 2) break;
        TermPtr pair = mk_app(mk_gate(binary[pick(3)]), ground(2, a, depth - 1));
        std::string x = fresh(), y = fresh();
        TermPtr body;
        if (k == 2) {
          body = mk_tensor(mk_var(x), mk_var(y));
        } else {
          body = mk_tensor(mk_var(x),
                           mk_tensor(mk_var(y), ground(k - 2, b, depth - 1)));
        }
        return mk_app(mk_lam_pair(x, y, body), pair);
      }
      case 4: {  // beta redex feeding one leaf
        if (total_width(vars) >= k) break;
        std::string x = fresh();
        std::vector<GenVar> inner = vars;
        inner.push_back({x, 1});
        TermPtr body = ground(k, inner, depth - 1);
        return mk_app(mk_lam(x, body), ground(1, {}, depth - 1));
      }
      case 5: {  // higher-order detour
        if (k != 1 || has_tail || total_width(vars) > 1) break;
        std::string f = fresh(), x = fresh();
        TermPtr fn = mk_lam(x, mk_app(mk_gate(unary[pick(6)]), mk_var(x)));
        return mk_app(mk_lam(f, mk_app(mk_var(f), ground(1, vars, depth - 1))), fn);
      }
    }
    return base_tuple(k, vars);
  }

  TermPtr top(int max_depth, int max_qubits, bool ground_only) {
    int k = 1 + pick(max_qubits);
    int depth = std::max(0, max_depth - 1);
    if (ground_only || chance(2, 3)) return ground(k, {}, depth);
    // function-typed conclusion: tokens enter through the argument atoms
    int shape = pick(k >= 3 ? 4 : (k >= 2 ? 3 : 1));
    switch (shape) {
      case 1: {
        std::string x = fresh(), y = fresh();
        return mk_lam_pair(x, y, ground(k, {{x, 1}, {y, 1}}, depth));
      }
      case 2: {
        std::string x = fresh(), y = fresh();
        return mk_lam(x, mk_lam(y, ground(k, {{x, 1}, {y, 1}}, depth)));
      }
      case 3: {
        std::string x = fresh(), y = fresh();
        return mk_lam_pair(x, y, ground(k, {{x, 1}, {y, 2}}, depth));
      }
      default: {
        std::string x = fresh();
        return mk_lam(x, ground(k, {{x, 1}}, depth));
      }
    }
  }
};

}  // namespace detail

// Number of machine tokens a closed derivation needs: argument atoms of the
// conclusion type plus one per bit constant.
inline int machine_qubits(const DerivPtr& d) {
  return static_cast<int>(noccs(d->type).size() + bit_leaves(d).size());
}

inline TermPtr generate_term_impl(std::uint64_t seed, int max_depth, int max_qubits,
                                  bool ground_only, const GateLibrary& gates) {
  if (max_depth < 1 || max_qubits < 1)
    fail(Err::GenerationExhausted, "generator needs max_depth >= 1 and max_qubits >= 1");
  detail::Gen gen(seed, gates);
  for (int attempt = 0; attempt < 64; ++attempt) {
    TermPtr t = auto_label(gen.top(max_depth, max_qubits, ground_only));
    DerivPtr d;
    try {
      d = typecheck(t, gates);
    } catch (const QlamError&) {
      continue;  // should not happen; resample defensively
    }
    if (machine_qubits(d) <= max_qubits) return t;
  }
  fail(Err::GenerationExhausted, "no term found within the retry budget");
}

inline TermPtr generate_term(std::uint64_t seed, int max_depth, int max_qubits,
                             const GateLibrary& gates = builtin_gates()) {
  return generate_term_impl(seed, max_depth, max_qubits, false, gates);
}

inline TermPtr generate_ground_term(std::uint64_t seed, int max_depth, int max_qubits,
                                    const GateLibrary& gates = builtin_gates()) {
  return generate_term_impl(seed, max_depth, max_qubits, true, gates);
}

}  // namespace qlam
