#pragma once

// Linear type checking with explicit derivation trees, plus the occurrence
// machinery the token machine runs over: qubit-atom addresses inside
// judgments, their polarities, and the bit-leaf bookkeeping.

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "qlam/error.hpp"
#include "qlam/quantum.hpp"
#include "qlam/syntax.hpp"

namespace qlam {

enum class Rule { AxVar, AxQ0, AxQ1, AxGate, LolliIntro1, LolliIntro2, LolliElim, TensorIntro };

inline const char* rule_name(Rule r) {
  switch (r) {
    case Rule::AxVar: return "a_v";
    case Rule::AxQ0: return "a_q0";
    case Rule::AxQ1: return "a_q1";
    case Rule::AxGate: return "a_U";
    case Rule::LolliIntro1: return "I_lolli1";
    case Rule::LolliIntro2: return "I_lolli2";
    case Rule::LolliElim: return "E_lolli";
    case Rule::TensorIntro: return "I_tensor";
  }
  return "?";
}

using Env = std::vector<std::pair<std::string, TypePtr>>;

struct Deriv;
using DerivPtr = std::shared_ptr<const Deriv>;

// Node ids are assigned by pre-order traversal, so the same term always
// yields the same addressing.
struct Deriv {
  int id = 0;
  Rule rule;
  Env env;  // hypotheses, ordered by first use in the subject term
  TermPtr term;
  TypePtr type;
  std::vector<DerivPtr> kids;
};

inline std::string show_env(const Env& env) {
  std::string s;
  for (std::size_t i = 0; i < env.size(); ++i) {
    if (i) s += ", ";
    s += env[i].first + ":" + show_type(env[i].second, 2);
  }
  return s;
}

inline std::string show_judgment(const Deriv& d) {
  std::string s = show_env(d.env);
  if (!s.empty()) s += " ";
  return s + "|- " + print_term(d.term) + " : " + show_type(d.type);
}

// ---------------------------------------------------------------------------
// Inference. Binder types are discovered by unification; type variables that
// remain unconstrained (e.g. the binder of \x. x) default to B.

namespace detail {

struct IType;
using ITypePtr = std::shared_ptr<IType>;

struct IType {
  enum K { Qubit, Lolli, Tensor, Var } k;
  int var = -1;
  ITypePtr a, b;
};

inline ITypePtr it_qubit() { return std::make_shared<IType>(IType{IType::Qubit, -1, nullptr, nullptr}); }
inline ITypePtr it_lolli(ITypePtr a, ITypePtr b) {
  return std::make_shared<IType>(IType{IType::Lolli, -1, std::move(a), std::move(b)});
}
inline ITypePtr it_tensor(ITypePtr a, ITypePtr b) {
  return std::make_shared<IType>(IType{IType::Tensor, -1, std::move(a), std::move(b)});
}

struct TypeSolver {
  std::vector<ITypePtr> binding;

  ITypePtr fresh() {
    auto v = std::make_shared<IType>(IType{IType::Var, static_cast<int>(binding.size()), nullptr, nullptr});
    binding.push_back(nullptr);
    return v;
  }

  ITypePtr shorten(ITypePtr t) {
    while (t->k == IType::Var && binding[t->var]) t = binding[t->var];
    return t;
  }

  bool occurs(int var, const ITypePtr& t0) {
    ITypePtr t = shorten(t0);
    if (t->k == IType::Var) return t->var == var;
    if (t->k == IType::Qubit) return false;
    return occurs(var, t->a) || occurs(var, t->b);
  }

  bool unify(ITypePtr x, ITypePtr y) {
    x = shorten(x);
    y = shorten(y);
    if (x->k == IType::Var && y->k == IType::Var && x->var == y->var) return true;
    if (x->k == IType::Var) {
      if (occurs(x->var, y)) return false;
      binding[x->var] = y;
      return true;
    }
    if (y->k == IType::Var) return unify(y, x);
    if (x->k != y->k) return false;
    if (x->k == IType::Qubit) return true;
    return unify(x->a, y->a) && unify(x->b, y->b);
  }

  TypePtr resolve(const ITypePtr& t0) {
    ITypePtr t = shorten(t0);
    switch (t->k) {
      case IType::Qubit: return qubit_type();
      case IType::Var: return qubit_type();  // unconstrained binder defaults to B
      case IType::Lolli: return lolli(resolve(t->a), resolve(t->b));
      case IType::Tensor: return tensor_type(resolve(t->a), resolve(t->b));
    }
    return qubit_type();
  }

  std::string show(const ITypePtr& t0) {
    ITypePtr t = shorten(t0);
    switch (t->k) {
      case IType::Qubit: return "B";
      case IType::Var: return "?" + std::to_string(t->var);
      case IType::Lolli: return "(" + show(t->a) + " -o " + show(t->b) + ")";
      case IType::Tensor: return "(" + show(t->a) + " * " + show(t->b) + ")";
    }
    return "?";
  }
};

struct ScopeEntry {
  std::string name;
  ITypePtr type;
  bool used = false;
};

struct Inferencer {
  const GateLibrary& gates;
  TypeSolver solver;
  std::vector<ScopeEntry> scope;
  std::unordered_map<const Term*, std::vector<ITypePtr>> binders;

  explicit Inferencer(const GateLibrary& g) : gates(g) {}

  ITypePtr gate_type(const std::string& name) {
    const Gate& g = gates.require(name);
    ITypePtr dom = it_qubit();
    for (int i = 1; i < g.arity; ++i) dom = it_tensor(it_qubit(), dom);
    ITypePtr cod = it_qubit();
    for (int i = 1; i < g.arity; ++i) cod = it_tensor(it_qubit(), cod);
    return it_lolli(dom, cod);
  }

  ITypePtr use_var(const std::string& name) {
    for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
      if (it->name == name) {
        if (it->used)
          fail(Err::VariableUsedTwice, "variable " + name + " used twice");
        it->used = true;
        return it->type;
      }
    }
    fail(Err::UnboundVariable, "unbound variable " + name);
  }

  void pop_binder(const std::string& name) {
    if (!scope.back().used)
      fail(Err::VariableUnused, "variable " + name + " bound but never used");
    scope.pop_back();
  }

  ITypePtr infer(const TermPtr& t) {
    switch (t->kind) {
      case TermKind::Var:
        return use_var(t->name);
      case TermKind::Bit:
        return it_qubit();
      case TermKind::Gate:
        return gate_type(t->name);
      case TermKind::Tensor:
        return it_tensor(infer(t->a), infer(t->b));
      case TermKind::App: {
        ITypePtr tf = infer(t->a);
        ITypePtr ta = infer(t->b);
        ITypePtr res = solver.fresh();
        ITypePtr want = it_lolli(ta, res);
        ITypePtr rf = solver.shorten(tf);
        if (rf->k == IType::Qubit || rf->k == IType::Tensor)
          fail(Err::NonFunctionApplied,
               "cannot apply a term of type " + solver.show(rf));
        if (!solver.unify(tf, want)) {
          ITypePtr ra = solver.shorten(ta);
          if (t->a->kind == TermKind::LamPair && ra->k == IType::Qubit)
            fail(Err::PairPatternOnNonTensor,
                 "pair pattern applied to a single qubit");
          std::string dom = rf->k == IType::Lolli ? solver.show(rf->a) : solver.show(rf);
          fail(Err::TypeMismatch, "expected argument of type " + dom + ", found " +
                                      solver.show(ta));
        }
        return res;
      }
      case TermKind::LamVar: {
        ITypePtr bt = solver.fresh();
        binders[t.get()] = {bt};
        scope.push_back({t->name, bt, false});
        ITypePtr body = infer(t->a);
        pop_binder(t->name);
        return it_lolli(bt, body);
      }
      case TermKind::LamPair: {
        ITypePtr xt = solver.fresh();
        ITypePtr yt = solver.fresh();
        binders[t.get()] = {xt, yt};
        scope.push_back({t->name, xt, false});
        scope.push_back({t->name2, yt, false});
        ITypePtr body = infer(t->a);
        pop_binder(t->name2);
        pop_binder(t->name);
        return it_lolli(it_tensor(xt, yt), body);
      }
    }
    fail(Err::TypeMismatch, "malformed term");
  }
};

struct DerivBuilder {
  const GateLibrary& gates;
  TypeSolver& solver;
  const std::unordered_map<const Term*, std::vector<ITypePtr>>& binders;
  std::vector<std::pair<std::string, TypePtr>> scope;

  TypePtr lookup(const std::string& name) const {
    for (auto it = scope.rbegin(); it != scope.rend(); ++it)
      if (it->first == name) return it->second;
    fail(Err::UnboundVariable, "unbound variable " + name);
  }

  Env env_of(const TermPtr& t) const {
    Env env;
    for (const std::string& v : free_vars(t)) env.emplace_back(v, lookup(v));
    return env;
  }

  std::shared_ptr<Deriv> build(const TermPtr& t, int id) {
    auto node = std::make_shared<Deriv>();
    node->id = id;
    node->term = t;
    node->env = env_of(t);
    switch (t->kind) {
      case TermKind::Var:
        node->rule = Rule::AxVar;
        node->type = lookup(t->name);
        break;
      case TermKind::Bit:
        node->rule = t->bit_value == 0 ? Rule::AxQ0 : Rule::AxQ1;
        node->type = qubit_type();
        break;
      case TermKind::Gate: {
        node->rule = Rule::AxGate;
        int n = gates.require(t->name).arity;
        node->type = lolli(qubits_type(n), qubits_type(n));
        break;
      }
      case TermKind::Tensor: {
        node->rule = Rule::TensorIntro;
        auto a = build(t->a, id + 1);
        auto b = build(t->b, id + 1 + term_size(t->a));
        node->type = tensor_type(a->type, b->type);
        node->kids = {a, b};
        break;
      }
      case TermKind::App: {
        node->rule = Rule::LolliElim;
        auto f = build(t->a, id + 1);
        auto x = build(t->b, id + 1 + term_size(t->a));
        node->type = f->type->b;
        node->kids = {f, x};
        break;
      }
      case TermKind::LamVar: {
        node->rule = Rule::LolliIntro1;
        TypePtr bt = solver.resolve(binders.at(t.get())[0]);
        scope.emplace_back(t->name, bt);
        auto body = build(t->a, id + 1);
        scope.pop_back();
        node->type = lolli(bt, body->type);
        node->kids = {body};
        break;
      }
      case TermKind::LamPair: {
        node->rule = Rule::LolliIntro2;
        TypePtr xt = solver.resolve(binders.at(t.get())[0]);
        TypePtr yt = solver.resolve(binders.at(t.get())[1]);
        scope.emplace_back(t->name, xt);
        scope.emplace_back(t->name2, yt);
        auto body = build(t->a, id + 1);
        scope.pop_back();
        scope.pop_back();
        node->type = lolli(tensor_type(xt, yt), body->type);
        node->kids = {body};
        break;
      }
    }
    return node;
  }
};

}  // namespace detail

// Type-check `t` under `env` and return its unique derivation. The
// environment split at binary rules is read off the term's free variables.
inline DerivPtr typecheck(const Env& env, const TermPtr& t,
                          const GateLibrary& gates = builtin_gates()) {
  detail::Inferencer inf(gates);
  for (const auto& [name, type] : env) {
    // seed declared hypotheses as concrete types
    std::function<detail::ITypePtr(const TypePtr&)> conv = [&](const TypePtr& ty) {
      switch (ty->kind) {
        case TypeKind::Qubit: return detail::it_qubit();
        case TypeKind::Lolli: return detail::it_lolli(conv(ty->a), conv(ty->b));
        case TypeKind::Tensor: return detail::it_tensor(conv(ty->a), conv(ty->b));
      }
      return detail::it_qubit();
    };
    inf.scope.push_back({name, conv(type), false});
  }
  inf.infer(t);
  for (const auto& entry : inf.scope)
    if (!entry.used)
      fail(Err::VariableUnused, "hypothesis " + entry.name + " never used");

  detail::DerivBuilder builder{gates, inf.solver, inf.binders, {}};
  for (const auto& [name, type] : env) builder.scope.emplace_back(name, type);
  return builder.build(t, 0);
}

inline DerivPtr typecheck(const TermPtr& t, const GateLibrary& gates = builtin_gates()) {
  return typecheck(Env{}, t, gates);
}

// ---------------------------------------------------------------------------
// Occurrences. A path addresses one B-atom inside a type: 'L'/'R' descend a
// lolli, 'l'/'r' a tensor. An occurrence addresses a B-atom inside one slot
// (hypothesis or conclusion) of one judgment of the derivation.

using Path = std::string;

enum class Polarity { Positive, Negative };

struct Occ {
  int node = 0;
  int hyp = -1;  // -1 = conclusion, otherwise index into the env
  Path path;

  bool operator==(const Occ& o) const {
    return node == o.node && hyp == o.hyp && path == o.path;
  }
};

struct OccHash {
  std::size_t operator()(const Occ& o) const {
    std::size_t h = std::hash<std::string>()(o.path);
    h ^= std::hash<int>()(o.node) + 0x9e3779b9 + (h << 6) + (h >> 2);
    h ^= std::hash<int>()(o.hyp) + 0x9e3779b9 + (h << 6) + (h >> 2);
    return h;
  }
};

// A hypothesis-side atom is flipped: it behaves like an atom of the negated
// formula.
inline Polarity polarity(const Occ& o) {
  int flips = static_cast<int>(std::count(o.path.begin(), o.path.end(), 'L'));
  if (o.hyp >= 0) ++flips;
  return flips % 2 == 0 ? Polarity::Positive : Polarity::Negative;
}

inline const TypePtr& type_at(const TypePtr& t, const Path& path, std::size_t from = 0) {
  if (from == path.size()) return t;
  char c = path[from];
  return type_at(c == 'L' || c == 'l' ? t->a : t->b, path, from + 1);
}

inline void all_paths_into(const TypePtr& t, const Path& prefix, std::vector<Path>& out) {
  switch (t->kind) {
    case TypeKind::Qubit:
      out.push_back(prefix);
      break;
    case TypeKind::Lolli:
      all_paths_into(t->a, prefix + 'L', out);
      all_paths_into(t->b, prefix + 'R', out);
      break;
    case TypeKind::Tensor:
      all_paths_into(t->a, prefix + 'l', out);
      all_paths_into(t->b, prefix + 'r', out);
      break;
  }
}

inline std::vector<Path> all_paths(const TypePtr& t) {
  std::vector<Path> out;
  all_paths_into(t, "", out);
  return out;
}

namespace detail {

inline void poccs_into(const TypePtr& t, bool positive, const Path& prefix,
                       std::vector<Path>& out) {
  switch (t->kind) {
    case TypeKind::Qubit:
      if (positive) out.push_back(prefix);
      break;
    case TypeKind::Tensor:
      poccs_into(t->a, positive, prefix + 'l', out);
      poccs_into(t->b, positive, prefix + 'r', out);
      break;
    case TypeKind::Lolli:
      poccs_into(t->a, !positive, prefix + 'L', out);
      poccs_into(t->b, positive, prefix + 'R', out);
      break;
  }
}

}  // namespace detail

inline std::vector<Path> poccs(const TypePtr& t) {
  std::vector<Path> out;
  detail::poccs_into(t, true, "", out);
  return out;
}

inline std::vector<Path> noccs(const TypePtr& t) {
  std::vector<Path> out;
  detail::poccs_into(t, false, "", out);
  return out;
}

// Flat view of a derivation indexed by node id.
inline void flatten_into(const DerivPtr& d, std::vector<const Deriv*>& out) {
  if (static_cast<int>(out.size()) <= d->id) out.resize(d->id + 1, nullptr);
  out[d->id] = d.get();
  for (const auto& k : d->kids) flatten_into(k, out);
}

inline std::vector<const Deriv*> flatten(const DerivPtr& d) {
  std::vector<const Deriv*> out;
  flatten_into(d, out);
  return out;
}

// Every B-atom of every judgment, hypotheses before conclusion, nodes in
// pre-order.
inline std::vector<Occ> enumerate_occurrences(const DerivPtr& d) {
  std::vector<Occ> out;
  for (const Deriv* node : flatten(d)) {
    for (std::size_t h = 0; h < node->env.size(); ++h)
      for (const Path& p : all_paths(node->env[h].second))
        out.push_back({node->id, static_cast<int>(h), p});
    for (const Path& p : all_paths(node->type))
      out.push_back({node->id, -1, p});
  }
  return out;
}

struct BitLeaf {
  int node = 0;
  int label = 0;
  int value = 0;
};

inline void bit_leaves_into(const DerivPtr& d, std::vector<BitLeaf>& out) {
  if (d->rule == Rule::AxQ0 || d->rule == Rule::AxQ1)
    out.push_back({d->id, d->term->bit_label, d->term->bit_value});
  for (const auto& k : d->kids) bit_leaves_into(k, out);
}

// Bit-leaf occurrences ordered by label. bitval is the matching basis state.
inline std::vector<BitLeaf> bit_leaves(const DerivPtr& d) {
  std::vector<BitLeaf> out;
  bit_leaves_into(d, out);
  std::sort(out.begin(), out.end(),
            [](const BitLeaf& a, const BitLeaf& b) { return a.label < b.label; });
  return out;
}

inline std::vector<Occ> bitocc(const DerivPtr& d) {
  std::vector<Occ> out;
  for (const BitLeaf& l : bit_leaves(d)) out.push_back({l.node, -1, ""});
  return out;
}

inline Register bitval(const DerivPtr& d) {
  std::vector<int> bits;
  for (const BitLeaf& l : bit_leaves(d)) bits.push_back(l.value);
  return Register::basis_bits(bits);
}

// ---------------------------------------------------------------------------
// Structural validity of a derivation, used as a test oracle: every node's
// conclusion must follow from its children by its rule, child environments
// must partition the parent's, and bit labels must be unique.

inline bool envs_concat(const Env& parent, const Env& left, const Env& right) {
  if (parent.size() != left.size() + right.size()) return false;
  for (std::size_t i = 0; i < left.size(); ++i)
    if (parent[i].first != left[i].first || !type_eq(parent[i].second, left[i].second))
      return false;
  for (std::size_t i = 0; i < right.size(); ++i)
    if (parent[left.size() + i].first != right[i].first ||
        !type_eq(parent[left.size() + i].second, right[i].second))
      return false;
  return true;
}

inline bool env_minus(const Env& inner, const std::vector<std::string>& names, Env& out) {
  out.clear();
  std::vector<bool> seen(names.size(), false);
  for (const auto& e : inner) {
    auto it = std::find(names.begin(), names.end(), e.first);
    if (it != names.end() && !seen[it - names.begin()]) {
      seen[it - names.begin()] = true;
      continue;
    }
    out.push_back(e);
  }
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

inline bool derivation_valid(const DerivPtr& d, const GateLibrary& gates,
                             std::string* why = nullptr) {
  auto bad = [&](const std::string& msg) {
    if (why) *why = "node " + std::to_string(d->id) + ": " + msg;
    return false;
  };
  for (const auto& k : d->kids)
    if (!derivation_valid(k, gates, why)) return false;

  switch (d->rule) {
    case Rule::AxVar:
      if (d->term->kind != TermKind::Var || d->env.size() != 1 ||
          d->env[0].first != d->term->name || !type_eq(d->env[0].second, d->type))
        return bad("bad variable axiom");
      break;
    case Rule::AxQ0:
    case Rule::AxQ1:
      if (d->term->kind != TermKind::Bit || !d->env.empty() ||
          d->type->kind != TypeKind::Qubit ||
          d->term->bit_value != (d->rule == Rule::AxQ1 ? 1 : 0))
        return bad("bad bit axiom");
      break;
    case Rule::AxGate: {
      if (d->term->kind != TermKind::Gate || !d->env.empty()) return bad("bad gate axiom");
      const Gate* g = gates.find(d->term->name);
      if (!g) return bad("unknown gate");
      if (!type_eq(d->type, lolli(qubits_type(g->arity), qubits_type(g->arity))))
        return bad("gate axiom type");
      break;
    }
    case Rule::LolliIntro1: {
      if (d->kids.size() != 1 || d->term->kind != TermKind::LamVar) return bad("I_lolli1 shape");
      const Deriv& kid = *d->kids[0];
      if (d->type->kind != TypeKind::Lolli || !type_eq(d->type->b, kid.type))
        return bad("I_lolli1 type");
      auto it = std::find_if(kid.env.begin(), kid.env.end(),
                             [&](const auto& e) { return e.first == d->term->name; });
      if (it == kid.env.end() || !type_eq(it->second, d->type->a))
        return bad("I_lolli1 binder");
      Env rest;
      if (!env_minus(kid.env, {d->term->name}, rest) || rest.size() != d->env.size())
        return bad("I_lolli1 env");
      for (std::size_t i = 0; i < rest.size(); ++i)
        if (rest[i].first != d->env[i].first || !type_eq(rest[i].second, d->env[i].second))
          return bad("I_lolli1 env order");
      break;
    }
    case Rule::LolliIntro2: {
      if (d->kids.size() != 1 || d->term->kind != TermKind::LamPair) return bad("I_lolli2 shape");
      const Deriv& kid = *d->kids[0];
      if (d->type->kind != TypeKind::Lolli || d->type->a->kind != TypeKind::Tensor ||
          !type_eq(d->type->b, kid.type))
        return bad("I_lolli2 type");
      auto find = [&](const std::string& n) {
        return std::find_if(kid.env.begin(), kid.env.end(),
                            [&](const auto& e) { return e.first == n; });
      };
      auto ix = find(d->term->name), iy = find(d->term->name2);
      if (ix == kid.env.end() || iy == kid.env.end() ||
          !type_eq(ix->second, d->type->a->a) || !type_eq(iy->second, d->type->a->b))
        return bad("I_lolli2 binders");
      Env rest;
      if (!env_minus(kid.env, {d->term->name, d->term->name2}, rest) ||
          rest.size() != d->env.size())
        return bad("I_lolli2 env");
      break;
    }
    case Rule::LolliElim: {
      if (d->kids.size() != 2 || d->term->kind != TermKind::App) return bad("E_lolli shape");
      const Deriv& f = *d->kids[0];
      const Deriv& x = *d->kids[1];
      if (f.type->kind != TypeKind::Lolli || !type_eq(f.type->a, x.type) ||
          !type_eq(f.type->b, d->type))
        return bad("E_lolli types");
      if (!envs_concat(d->env, f.env, x.env)) return bad("E_lolli env split");
      break;
    }
    case Rule::TensorIntro: {
      if (d->kids.size() != 2 || d->term->kind != TermKind::Tensor) return bad("I_tensor shape");
      const Deriv& a = *d->kids[0];
      const Deriv& b = *d->kids[1];
      if (d->type->kind != TypeKind::Tensor || !type_eq(d->type->a, a.type) ||
          !type_eq(d->type->b, b.type))
        return bad("I_tensor types");
      if (!envs_concat(d->env, a.env, b.env)) return bad("I_tensor env split");
      break;
    }
  }

  if (!d->kids.empty()) {
    // terms of children must be the structural children of the term
    const Deriv& k0 = *d->kids[0];
    if (d->term->kind == TermKind::App || d->term->kind == TermKind::Tensor) {
      if (!term_eq(k0.term, d->term->a) || !term_eq(d->kids[1]->term, d->term->b))
        return bad("child terms");
    } else if (!term_eq(k0.term, d->term->a)) {
      return bad("child term");
    }
  }

  // bit labels appear at exactly one leaf each
  std::vector<BitLeaf> leaves;
  bit_leaves_into(const_cast<DerivPtr&>(d), leaves);
  std::vector<int> labels;
  for (const auto& l : leaves) labels.push_back(l.label);
  std::sort(labels.begin(), labels.end());
  if (std::adjacent_find(labels.begin(), labels.end()) != labels.end())
    return bad("duplicate bit label");
  return true;
}

}  // namespace qlam
