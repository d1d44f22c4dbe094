#pragma once

// The multiplicative-logic oracle: one-sided sequent proofs with explicit
// context links, a single-token successor function over atom occurrences,
// and the canonical translation from type derivations. Used to cross-check
// machine runs: every machine move must map to a nonempty chain of oracle
// moves, and maximal oracle runs must visit each atom occurrence exactly
// once.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "qlam/error.hpp"
#include "qlam/machine.hpp"
#include "qlam/syntax.hpp"
#include "qlam/typing.hpp"

namespace qlam {

// ---------------------------------------------------------------------------
// Formulas

enum class MFK { Atom, NegAtom, Tens, Par };

struct MForm;
using MFormPtr = std::shared_ptr<const MForm>;

struct MForm {
  MFK k;
  int atom = 0;  // propositional atom index; the translation only uses 0
  MFormPtr a, b;
};

inline MFormPtr m_atom(int idx = 0) {
  return std::make_shared<MForm>(MForm{MFK::Atom, idx, nullptr, nullptr});
}
inline MFormPtr m_neg_atom(int idx = 0) {
  return std::make_shared<MForm>(MForm{MFK::NegAtom, idx, nullptr, nullptr});
}
inline MFormPtr m_tens(MFormPtr a, MFormPtr b) {
  return std::make_shared<MForm>(MForm{MFK::Tens, 0, std::move(a), std::move(b)});
}
inline MFormPtr m_par(MFormPtr a, MFormPtr b) {
  return std::make_shared<MForm>(MForm{MFK::Par, 0, std::move(a), std::move(b)});
}

inline MFormPtr m_neg(const MFormPtr& f) {
  switch (f->k) {
    case MFK::Atom: return m_neg_atom(f->atom);
    case MFK::NegAtom: return m_atom(f->atom);
    case MFK::Tens: return m_par(m_neg(f->a), m_neg(f->b));
    case MFK::Par: return m_tens(m_neg(f->a), m_neg(f->b));
  }
  return nullptr;
}

inline bool mform_eq(const MFormPtr& x, const MFormPtr& y) {
  if (x->k != y->k) return false;
  if (x->k == MFK::Atom || x->k == MFK::NegAtom) return x->atom == y->atom;
  return mform_eq(x->a, y->a) && mform_eq(x->b, y->b);
}

inline std::string show_mform(const MFormPtr& f, bool outer = true) {
  auto atom_name = [](int idx) {
    std::string base = idx == 0 ? "a" : (idx == 1 ? "b" : "p" + std::to_string(idx));
    return base;
  };
  switch (f->k) {
    case MFK::Atom: return atom_name(f->atom);
    case MFK::NegAtom: return atom_name(f->atom) + "^";
    case MFK::Tens: {
      std::string s = show_mform(f->a, false) + " x " + show_mform(f->b, false);
      return outer ? s : "(" + s + ")";
    }
    case MFK::Par: {
      std::string s = show_mform(f->a, false) + " # " + show_mform(f->b, false);
      return outer ? s : "(" + s + ")";
    }
  }
  return {};
}

inline int leaf_count(const MFormPtr& f) {
  if (f->k == MFK::Atom || f->k == MFK::NegAtom) return 1;
  return leaf_count(f->a) + leaf_count(f->b);
}

// ---------------------------------------------------------------------------
// Proofs. Every node stores its full conclusion sequent plus, for each
// conclusion formula, where it came from: a premise formula carried through
// (the link), or the principal formula of the rule. Exchange is implicit in
// the links and validated by the checker.

struct MOrigin {
  int premise = -1;  // -1 = principal formula of this node
  int index = -1;
  bool operator==(const MOrigin& o) const {
    return premise == o.premise && index == o.index;
  }
};

inline constexpr MOrigin kPrincipal{-1, -1};

enum class MRule { Ax, Cut, Tens, Par };

struct MNode;
using MNodePtr = std::shared_ptr<const MNode>;

struct MNode {
  MRule rule;
  std::vector<MFormPtr> concl;
  std::vector<MNodePtr> kids;
  std::vector<MOrigin> links;  // parallel to concl
  MOrigin op1, op2;            // consumed premise formulas (see rule cases)
  int principal = -1;          // conclusion index of the principal formula
};

inline MNodePtr mk_ax(const MFormPtr& f) {
  auto n = std::make_shared<MNode>();
  n->rule = MRule::Ax;
  n->concl = {f, m_neg(f)};
  n->links = {kPrincipal, kPrincipal};
  return n;
}

// layout entries: kPrincipal places the new formula, {0,i}/{1,i} carry a
// premise formula through.
inline MNodePtr mk_tens(MNodePtr left, int li, MNodePtr right, int ri,
                        const std::vector<MOrigin>& layout) {
  auto n = std::make_shared<MNode>();
  n->rule = MRule::Tens;
  n->op1 = {0, li};
  n->op2 = {1, ri};
  MFormPtr principal = m_tens(left->concl[li], right->concl[ri]);
  n->kids = {std::move(left), std::move(right)};
  for (const MOrigin& o : layout) {
    if (o == kPrincipal) {
      n->principal = static_cast<int>(n->concl.size());
      n->concl.push_back(principal);
    } else {
      n->concl.push_back(n->kids[o.premise]->concl[o.index]);
    }
    n->links.push_back(o);
  }
  return n;
}

inline MNodePtr mk_par(MNodePtr kid, int i, int j, const std::vector<MOrigin>& layout) {
  auto n = std::make_shared<MNode>();
  n->rule = MRule::Par;
  n->op1 = {0, i};
  n->op2 = {0, j};
  MFormPtr principal = m_par(kid->concl[i], kid->concl[j]);
  n->kids = {std::move(kid)};
  for (const MOrigin& o : layout) {
    if (o == kPrincipal) {
      n->principal = static_cast<int>(n->concl.size());
      n->concl.push_back(principal);
    } else {
      n->concl.push_back(n->kids[0]->concl[o.index]);
    }
    n->links.push_back(o);
  }
  return n;
}

inline MNodePtr mk_cut(MNodePtr left, int li, MNodePtr right, int ri,
                       const std::vector<MOrigin>& layout) {
  auto n = std::make_shared<MNode>();
  n->rule = MRule::Cut;
  n->op1 = {0, li};
  n->op2 = {1, ri};
  n->kids = {std::move(left), std::move(right)};
  for (const MOrigin& o : layout) {
    n->concl.push_back(n->kids[o.premise]->concl[o.index]);
    n->links.push_back(o);
  }
  return n;
}

// Indexed view with parent pointers, node ids in pre-order.
struct MllProof {
  MNodePtr root;
  std::vector<const MNode*> nodes;
  std::vector<int> parent;      // -1 for the root
  std::vector<int> child_slot;  // position among the parent's kids
  std::unordered_map<const MNode*, int> ids;

  int id_of(const MNode* n) const { return ids.at(n); }
};

inline void index_into(MllProof& p, const MNode* n, int par, int slot) {
  int id = static_cast<int>(p.nodes.size());
  p.nodes.push_back(n);
  p.parent.push_back(par);
  p.child_slot.push_back(slot);
  p.ids[n] = id;
  for (std::size_t k = 0; k < n->kids.size(); ++k)
    index_into(p, n->kids[k].get(), id, static_cast<int>(k));
}

inline MllProof index_proof(MNodePtr root) {
  MllProof p;
  p.root = std::move(root);
  index_into(p, p.root.get(), -1, -1);
  return p;
}

// ---------------------------------------------------------------------------
// Rule-by-rule proof checking, independent of the construction above.

inline bool check_node(const MNode& n, std::string* why) {
  auto bad = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  if (n.links.size() != n.concl.size()) return bad("links/conclusion size mismatch");
  auto check_carried = [&](auto&& consumed_of) {
    // every non-consumed premise formula must be carried through exactly once
    std::vector<std::vector<int>> used(n.kids.size());
    for (std::size_t k = 0; k < n.kids.size(); ++k)
      used[k].assign(n.kids[k]->concl.size(), 0);
    for (std::size_t i = 0; i < n.concl.size(); ++i) {
      const MOrigin& o = n.links[i];
      if (o == kPrincipal) {
        if (static_cast<int>(i) != n.principal) return bad("stray principal link");
        continue;
      }
      if (o.premise < 0 || o.premise >= static_cast<int>(n.kids.size()))
        return bad("link premise out of range");
      const auto& kid = *n.kids[o.premise];
      if (o.index < 0 || o.index >= static_cast<int>(kid.concl.size()))
        return bad("link index out of range");
      if (consumed_of(o)) return bad("link to a consumed formula");
      if (!mform_eq(n.concl[i], kid.concl[o.index])) return bad("carried formula changed");
      if (used[o.premise][o.index]++) return bad("premise formula carried twice");
    }
    for (std::size_t k = 0; k < n.kids.size(); ++k)
      for (std::size_t i = 0; i < used[k].size(); ++i)
        if (!used[k][i] && !consumed_of(MOrigin{static_cast<int>(k), static_cast<int>(i)}))
          return bad("premise formula dropped");
    return true;
  };

  switch (n.rule) {
    case MRule::Ax:
      if (!n.kids.empty()) return bad("axiom with premises");
      if (n.concl.size() != 2) return bad("axiom arity");
      if (!mform_eq(n.concl[1], m_neg(n.concl[0]))) return bad("axiom formulas not dual");
      return true;
    case MRule::Tens: {
      if (n.kids.size() != 2) return bad("tensor premises");
      if (n.principal < 0) return bad("tensor principal missing");
      const MFormPtr& f = n.concl[n.principal];
      if (f->k != MFK::Tens || !mform_eq(f->a, n.kids[0]->concl[n.op1.index]) ||
          !mform_eq(f->b, n.kids[1]->concl[n.op2.index]))
        return bad("tensor principal mismatch");
      return check_carried([&](const MOrigin& o) {
        return (o.premise == 0 && o.index == n.op1.index) ||
               (o.premise == 1 && o.index == n.op2.index);
      });
    }
    case MRule::Par: {
      if (n.kids.size() != 1) return bad("par premises");
      if (n.principal < 0) return bad("par principal missing");
      if (n.op1.index == n.op2.index) return bad("par operands equal");
      const MFormPtr& f = n.concl[n.principal];
      if (f->k != MFK::Par || !mform_eq(f->a, n.kids[0]->concl[n.op1.index]) ||
          !mform_eq(f->b, n.kids[0]->concl[n.op2.index]))
        return bad("par principal mismatch");
      return check_carried([&](const MOrigin& o) {
        return o.premise == 0 && (o.index == n.op1.index || o.index == n.op2.index);
      });
    }
    case MRule::Cut: {
      if (n.kids.size() != 2) return bad("cut premises");
      if (n.principal != -1) return bad("cut has a principal");
      if (!mform_eq(n.kids[1]->concl[n.op2.index],
                    m_neg(n.kids[0]->concl[n.op1.index])))
        return bad("cut formulas not dual");
      return check_carried([&](const MOrigin& o) {
        return (o.premise == 0 && o.index == n.op1.index) ||
               (o.premise == 1 && o.index == n.op2.index);
      });
    }
  }
  return bad("unknown rule");
}

inline bool check_proof(const MllProof& p, std::string* why = nullptr) {
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    std::string local;
    if (!check_node(*p.nodes[i], &local)) {
      if (why) *why = "node " + std::to_string(i) + ": " + local;
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Atom occurrences and the single-token successor function. Atoms descend
// toward the root, coatoms ascend; axioms bounce, cuts cross.

struct MOcc {
  int node = 0;
  int formula = 0;
  Path path;  // 'l'/'r' into the formula tree

  bool operator==(const MOcc& o) const {
    return node == o.node && formula == o.formula && path == o.path;
  }
};

struct MOccHash {
  std::size_t operator()(const MOcc& o) const {
    std::size_t h = std::hash<std::string>()(o.path);
    h ^= std::hash<int>()(o.node) + 0x9e3779b9 + (h << 6) + (h >> 2);
    h ^= std::hash<int>()(o.formula) + 0x9e3779b9 + (h << 6) + (h >> 2);
    return h;
  }
};

inline const MFormPtr& mform_at(const MFormPtr& f, const Path& p, std::size_t i = 0) {
  if (i == p.size()) return f;
  return mform_at(p[i] == 'l' ? f->a : f->b, p, i + 1);
}

inline bool is_coatom_occ(const MllProof& p, const MOcc& o) {
  return mform_at(p.nodes[o.node]->concl[o.formula], o.path)->k == MFK::NegAtom;
}

inline std::optional<MOcc> m_step(const MllProof& p, const MOcc& o) {
  const MNode& n = *p.nodes[o.node];
  if (is_coatom_occ(p, o)) {
    // ascend
    if (n.rule == MRule::Ax) return MOcc{o.node, 1 - o.formula, o.path};
    const MOrigin& org = n.links[o.formula];
    if (org == kPrincipal) {
      char c = o.path.at(0);
      Path rest = o.path.substr(1);
      if (n.rule == MRule::Tens) {
        return c == 'l' ? MOcc{p.id_of(n.kids[0].get()), n.op1.index, rest}
                        : MOcc{p.id_of(n.kids[1].get()), n.op2.index, rest};
      }
      // Par: both operands live in the single premise
      return c == 'l' ? MOcc{p.id_of(n.kids[0].get()), n.op1.index, rest}
                      : MOcc{p.id_of(n.kids[0].get()), n.op2.index, rest};
    }
    return MOcc{p.id_of(n.kids[org.premise].get()), org.index, o.path};
  }

  // atom: descend toward the root
  int par = p.parent[o.node];
  if (par < 0) return std::nullopt;  // final
  const MNode& pn = *p.nodes[par];
  int slot = p.child_slot[o.node];
  MOrigin self{slot, o.formula};
  if (pn.rule == MRule::Cut && (self == pn.op1 || self == pn.op2)) {
    const MOrigin& other = self == pn.op1 ? pn.op2 : pn.op1;
    return MOcc{p.id_of(pn.kids[other.premise].get()), other.index, o.path};
  }
  if (pn.rule == MRule::Tens && self == pn.op1)
    return MOcc{par, pn.principal, 'l' + o.path};
  if (pn.rule == MRule::Tens && self == pn.op2)
    return MOcc{par, pn.principal, 'r' + o.path};
  if (pn.rule == MRule::Par && self == pn.op1)
    return MOcc{par, pn.principal, 'l' + o.path};
  if (pn.rule == MRule::Par && self == pn.op2)
    return MOcc{par, pn.principal, 'r' + o.path};
  for (std::size_t i = 0; i < pn.links.size(); ++i)
    if (pn.links[i] == self) return MOcc{par, static_cast<int>(i), o.path};
  throw std::logic_error("mll: formula not carried into the parent");
}

inline std::vector<MOcc> initial_occurrences(const MllProof& p) {
  std::vector<MOcc> out;
  const MNode& root = *p.nodes[0];
  for (std::size_t f = 0; f < root.concl.size(); ++f)
    for (const Path& path : [&] {
           std::vector<Path> ps;
           std::function<void(const MFormPtr&, Path)> rec = [&](const MFormPtr& form,
                                                                Path prefix) {
             if (form->k == MFK::Atom) return;
             if (form->k == MFK::NegAtom) {
               ps.push_back(prefix);
               return;
             }
             rec(form->a, prefix + 'l');
             rec(form->b, prefix + 'r');
           };
           rec(root.concl[f], "");
           return ps;
         }())
      out.push_back(MOcc{0, static_cast<int>(f), path});
  return out;
}

inline int atom_occurrence_count(const MllProof& p) {
  int total = 0;
  for (const MNode* n : p.nodes)
    for (const MFormPtr& f : n->concl) total += leaf_count(f);
  return total;
}

struct VisitReport {
  bool ok = false;
  int atoms = 0;
  int visited = 0;
  std::string message;
};

// Follow every maximal run from the initial occurrences; each atom occurrence
// of the proof must be visited exactly once and no run may cycle.
inline VisitReport unique_visit_report(const MllProof& p) {
  VisitReport rep;
  rep.atoms = atom_occurrence_count(p);
  std::unordered_map<MOcc, int, MOccHash> seen;
  for (const MOcc& start : initial_occurrences(p)) {
    MOcc cur = start;
    int steps = 0;
    while (true) {
      if (++seen[cur] > 1) {
        rep.message = "occurrence visited twice";
        return rep;
      }
      ++rep.visited;
      auto next = m_step(p, cur);
      if (!next) break;
      cur = *next;
      if (++steps > rep.atoms + 1) {
        rep.message = "run exceeded the atom count (cycle)";
        return rep;
      }
    }
  }
  if (rep.visited != rep.atoms) {
    rep.message = "visited " + std::to_string(rep.visited) + " of " +
                  std::to_string(rep.atoms) + " occurrences";
    return rep;
  }
  rep.ok = true;
  return rep;
}

// ---------------------------------------------------------------------------
// Translation from the typed calculus. Formula layout of the sequent for a
// judgment: one coatom column per bit (label-ascending), then the negated
// hypothesis formulas in environment order, then the conclusion formula.

inline MFormPtr translate_type(const TypePtr& t) {
  switch (t->kind) {
    case TypeKind::Qubit: return m_atom(0);
    case TypeKind::Lolli: return m_par(m_neg(translate_type(t->a)), translate_type(t->b));
    case TypeKind::Tensor: return m_tens(translate_type(t->a), translate_type(t->b));
  }
  return nullptr;
}

struct Translation {
  MllProof proof;
  std::vector<int> proof_node;  // derivation node id -> proof node id
  std::vector<int> bit_count;   // derivation node id -> bit columns in its sequent
};

namespace detail {

struct TransPiece {
  MNodePtr proof;
  std::vector<int> labels;  // sorted bit labels of the subderivation
};

struct Translator {
  std::unordered_map<int, const MNode*> by_deriv;
  std::unordered_map<int, int> bits_of;

  void record(const Deriv& d, const TransPiece& piece) {
    by_deriv[d.id] = piece.proof.get();
    bits_of[d.id] = static_cast<int>(piece.labels.size());
  }

  static std::vector<MOrigin> carry_all(const MNodePtr& kid, int skip1 = -1,
                                        int skip2 = -1, int premise = 0) {
    std::vector<MOrigin> out;
    for (int i = 0; i < static_cast<int>(kid->concl.size()); ++i)
      if (i != skip1 && i != skip2) out.push_back({premise, i});
    return out;
  }

  TransPiece translate(const Deriv& d) {
    TransPiece piece = build(d);
    record(d, piece);
    return piece;
  }

  TransPiece build(const Deriv& d) {
    switch (d.rule) {
      case Rule::AxQ0:
      case Rule::AxQ1:
        return {mk_ax(m_neg_atom(0)), {d.term->bit_label}};
      case Rule::AxVar:
        return {mk_ax(m_neg(translate_type(d.type))), {}};
      case Rule::AxGate: {
        int m = atom_count(d.type->a);
        std::vector<MNodePtr> axs;
        for (int k = 0; k < m; ++k) axs.push_back(mk_ax(m_neg_atom(0)));
        // glue the atom sides into the right-associated tensor
        MNodePtr t = axs[m - 1];
        int built = 1;  // index of the built formula in t->concl
        for (int k = m - 2; k >= 0; --k) {
          std::vector<MOrigin> layout;
          layout.push_back({0, 0});  // this axiom's coatom
          for (int i = 0; i < built; ++i) layout.push_back({1, i});
          layout.push_back(kPrincipal);
          t = mk_tens(axs[k], 1, t, built, layout);
          built = static_cast<int>(t->concl.size()) - 1;
        }
        // fold the coatom columns right to left, then join with the tensor
        int coatoms = m;
        while (coatoms >= 2) {
          std::vector<MOrigin> layout;
          for (int i = 0; i < coatoms - 2; ++i) layout.push_back({0, i});
          layout.push_back(kPrincipal);
          layout.push_back({0, coatoms});  // the tensor formula, right after
          t = mk_par(t, coatoms - 2, coatoms - 1, layout);
          --coatoms;
        }
        t = mk_par(t, 0, 1, {kPrincipal});
        return {t, {}};
      }
      case Rule::LolliIntro1: {
        TransPiece kid = translate(*d.kids[0]);
        const Deriv& body = *d.kids[0];
        int nb = static_cast<int>(kid.labels.size());
        int px = -1;
        for (std::size_t i = 0; i < body.env.size(); ++i)
          if (body.env[i].first == d.term->name) px = nb + static_cast<int>(i);
        int last = static_cast<int>(kid.proof->concl.size()) - 1;
        std::vector<MOrigin> layout = carry_all(kid.proof, px, last);
        layout.push_back(kPrincipal);
        return {mk_par(kid.proof, px, last, layout), kid.labels};
      }
      case Rule::LolliIntro2: {
        TransPiece kid = translate(*d.kids[0]);
        const Deriv& body = *d.kids[0];
        int nb = static_cast<int>(kid.labels.size());
        int px = -1, py = -1;
        for (std::size_t i = 0; i < body.env.size(); ++i) {
          if (body.env[i].first == d.term->name) px = nb + static_cast<int>(i);
          if (body.env[i].first == d.term->name2) py = nb + static_cast<int>(i);
        }
        int last = static_cast<int>(kid.proof->concl.size()) - 1;
        // first join the two binder columns, keeping the conclusion last
        std::vector<MOrigin> layout1 = carry_all(kid.proof, px, py);
        layout1.pop_back();  // drop the conclusion from the carried block
        layout1.push_back(kPrincipal);
        layout1.push_back({0, last});
        MNodePtr inner = mk_par(kid.proof, px, py, layout1);
        int ip = static_cast<int>(inner->concl.size()) - 2;
        int il = ip + 1;
        std::vector<MOrigin> layout2 = carry_all(inner, ip, il);
        layout2.push_back(kPrincipal);
        return {mk_par(inner, ip, il, layout2), kid.labels};
      }
      case Rule::LolliElim: {
        TransPiece fun = translate(*d.kids[0]);
        TransPiece arg = translate(*d.kids[1]);
        MFormPtr b_form = translate_type(d.type);
        MNodePtr aux = mk_ax(m_neg(b_form));  // |- B^, B
        int arg_last = static_cast<int>(arg.proof->concl.size()) - 1;
        std::vector<MOrigin> tl = carry_all(arg.proof, arg_last);
        tl.push_back(kPrincipal);
        tl.push_back({1, 1});  // the surviving B
        MNodePtr tn = mk_tens(arg.proof, arg_last, aux, 0, tl);
        int tn_principal = static_cast<int>(tn->concl.size()) - 2;
        int tn_b = tn_principal + 1;

        int fun_last = static_cast<int>(fun.proof->concl.size()) - 1;
        // merged layout: bit columns by label, fun env, arg env, conclusion
        std::vector<MOrigin> layout;
        std::vector<int> labels;
        std::size_t fi = 0, ai = 0;
        while (fi < fun.labels.size() || ai < arg.labels.size()) {
          bool take_fun = ai >= arg.labels.size() ||
                          (fi < fun.labels.size() && fun.labels[fi] < arg.labels[ai]);
          if (take_fun) {
            layout.push_back({0, static_cast<int>(fi)});
            labels.push_back(fun.labels[fi++]);
          } else {
            layout.push_back({1, static_cast<int>(ai)});
            labels.push_back(arg.labels[ai++]);
          }
        }
        int fun_env = static_cast<int>(d.kids[0]->env.size());
        int arg_env = static_cast<int>(d.kids[1]->env.size());
        for (int i = 0; i < fun_env; ++i)
          layout.push_back({0, static_cast<int>(fun.labels.size()) + i});
        for (int i = 0; i < arg_env; ++i)
          layout.push_back({1, static_cast<int>(arg.labels.size()) + i});
        layout.push_back({1, tn_b});
        return {mk_cut(fun.proof, fun_last, tn, tn_principal, layout), labels};
      }
      case Rule::TensorIntro: {
        TransPiece left = translate(*d.kids[0]);
        TransPiece right = translate(*d.kids[1]);
        int l_last = static_cast<int>(left.proof->concl.size()) - 1;
        int r_last = static_cast<int>(right.proof->concl.size()) - 1;
        std::vector<MOrigin> layout;
        std::vector<int> labels;
        std::size_t li = 0, ri = 0;
        while (li < left.labels.size() || ri < right.labels.size()) {
          bool take_left = ri >= right.labels.size() ||
                           (li < left.labels.size() && left.labels[li] < right.labels[ri]);
          if (take_left) {
            layout.push_back({0, static_cast<int>(li)});
            labels.push_back(left.labels[li++]);
          } else {
            layout.push_back({1, static_cast<int>(ri)});
            labels.push_back(right.labels[ri++]);
          }
        }
        int l_env = static_cast<int>(d.kids[0]->env.size());
        int r_env = static_cast<int>(d.kids[1]->env.size());
        for (int i = 0; i < l_env; ++i)
          layout.push_back({0, static_cast<int>(left.labels.size()) + i});
        for (int i = 0; i < r_env; ++i)
          layout.push_back({1, static_cast<int>(right.labels.size()) + i});
        layout.push_back(kPrincipal);
        return {mk_tens(left.proof, l_last, right.proof, r_last, layout), labels};
      }
    }
    throw std::logic_error("translate: unknown rule");
  }
};

}  // namespace detail

inline Translation translate_derivation(const DerivPtr& d) {
  detail::Translator tr;
  detail::TransPiece top = tr.translate(*d);
  Translation t;
  t.proof = index_proof(top.proof);
  auto nodes = flatten(d);
  t.proof_node.resize(nodes.size());
  t.bit_count.resize(nodes.size());
  for (const Deriv* n : nodes) {
    t.proof_node[n->id] = t.proof.id_of(tr.by_deriv.at(n->id));
    t.bit_count[n->id] = tr.bits_of.at(n->id);
  }
  return t;
}

// Map a derivation occurrence to the matching atom occurrence: hypothesis i
// sits after the bit columns, the conclusion type is the last formula; inside
// formulas every step keeps its side.
inline MOcc to_mll_occ(const Translation& t, const Occ& o) {
  int node = t.proof_node[o.node];
  const MNode& n = *t.proof.nodes[node];
  int formula = o.hyp >= 0 ? t.bit_count[o.node] + o.hyp
                           : static_cast<int>(n.concl.size()) - 1;
  Path p;
  for (char c : o.path) p += (c == 'L' || c == 'l') ? 'l' : 'r';
  return MOcc{node, formula, p};
}

inline std::vector<MOcc> project_state(const Translation& t, const RoutingGraph& g,
                                       const MachineState& s) {
  std::vector<MOcc> out;
  for (const auto& slot : s.slots) out.push_back(to_mll_occ(t, g.occs[slot.occ]));
  return out;
}

// ---------------------------------------------------------------------------
// Correspondence between a machine run and the oracle

struct CorrespondenceReport {
  bool ok = false;
  int machine_moves = 0;
  int oracle_steps = 0;
  int atoms = 0;
  std::string message;
};

namespace detail {

inline bool chase(const MllProof& p, const MOcc& from, const MOcc& to, int limit,
                  int& steps) {
  MOcc cur = from;
  for (int i = 0; i < limit; ++i) {
    auto next = m_step(p, cur);
    if (!next) return false;
    ++steps;
    cur = *next;
    if (cur == to) return true;
  }
  return false;
}

}  // namespace detail

// Every machine move must project to at least one oracle step reaching the
// projected target, and the translated proof must satisfy the unique-visit
// property.
inline CorrespondenceReport check_correspondence(const Translation& t,
                                                 const RoutingGraph& g,
                                                 const std::vector<TraceEvent>& trace) {
  CorrespondenceReport rep;
  rep.atoms = atom_occurrence_count(t.proof);
  int limit = rep.atoms + 1;
  for (const TraceEvent& ev : trace) {
    if (ev.kind == TraceEvent::K::Move) {
      ++rep.machine_moves;
      MOcc from = to_mll_occ(t, g.occs[ev.from]);
      MOcc to = to_mll_occ(t, g.occs[ev.to]);
      if (!detail::chase(t.proof, from, to, limit, rep.oracle_steps)) {
        rep.message = "move does not correspond";
        return rep;
      }
    } else {
      const SyncNode& sn = g.syncs[ev.sync];
      for (std::size_t k = 0; k < sn.inputs.size(); ++k) {
        ++rep.machine_moves;
        MOcc from = to_mll_occ(t, g.occs[sn.inputs[k]]);
        MOcc to = to_mll_occ(t, g.occs[sn.outputs[k]]);
        if (!detail::chase(t.proof, from, to, limit, rep.oracle_steps)) {
          rep.message = "synchronization move does not correspond";
          return rep;
        }
      }
    }
  }
  VisitReport visits = unique_visit_report(t.proof);
  if (!visits.ok) {
    rep.message = visits.message;
    return rep;
  }
  rep.ok = true;
  return rep;
}

// Sequent pretty printing for the command line.
inline std::string show_sequent(const MNode& n) {
  std::string s = "|- ";
  for (std::size_t i = 0; i < n.concl.size(); ++i) {
    if (i) s += ", ";
    s += show_mform(n.concl[i]);
  }
  return s;
}

inline const char* mll_rule_name(MRule r) {
  switch (r) {
    case MRule::Ax: return "ax";
    case MRule::Cut: return "cut";
    case MRule::Tens: return "tensor";
    case MRule::Par: return "par";
  }
  return "?";
}

}  // namespace qlam
