#pragma once

// Terms and types of the linear qubit calculus, with a parser and printer.
//
// Concrete grammar (one term per .qlam file, `--` line comments):
//
//   term ::= '\' pat '.' term | tens
//   tens ::= app ('*' term)?            -- '*' is right-associative
//   app  ::= atom atom*                 -- application is left-associative
//   atom ::= var | gate | bit | '(' term ')'
//   pat  ::= var | '<' var ',' var '>'
//   bit  ::= ('|0>' | '|1>') ('_' nat)?
//
// Variables start with a lowercase letter, gate names with an uppercase one.
// Bit labels must be pairwise distinct within a term; unlabeled bits are
// assigned the smallest unused label, scanning left to right.

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "qlam/error.hpp"

namespace qlam {

// ---------------------------------------------------------------------------
// Types: A ::= B | A -o B | A * B

enum class TypeKind { Qubit, Lolli, Tensor };

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct Type {
  TypeKind kind;
  TypePtr a, b;
};

inline const TypePtr& qubit_type() {
  static const TypePtr t = std::make_shared<Type>(Type{TypeKind::Qubit, nullptr, nullptr});
  return t;
}

inline TypePtr lolli(TypePtr a, TypePtr b) {
  return std::make_shared<Type>(Type{TypeKind::Lolli, std::move(a), std::move(b)});
}

inline TypePtr tensor_type(TypePtr a, TypePtr b) {
  return std::make_shared<Type>(Type{TypeKind::Tensor, std::move(a), std::move(b)});
}

// B^n, associated to the right: B * (B * ... * B).
inline TypePtr qubits_type(int n) {
  TypePtr t = qubit_type();
  for (int i = 1; i < n; ++i) t = tensor_type(qubit_type(), t);
  return t;
}

inline bool type_eq(const TypePtr& x, const TypePtr& y) {
  if (x.get() == y.get()) return true;
  if (x->kind != y->kind) return false;
  if (x->kind == TypeKind::Qubit) return true;
  return type_eq(x->a, y->a) && type_eq(x->b, y->b);
}

inline int atom_count(const TypePtr& t) {
  if (t->kind == TypeKind::Qubit) return 1;
  return atom_count(t->a) + atom_count(t->b);
}

// Precedence: -o (lowest, right-assoc) < * (right-assoc) < atom.
inline std::string show_type(const TypePtr& t, int prec = 0) {
  switch (t->kind) {
    case TypeKind::Qubit:
      return "B";
    case TypeKind::Lolli: {
      std::string s = show_type(t->a, 1) + " -o " + show_type(t->b, 0);
      return prec > 0 ? "(" + s + ")" : s;
    }
    case TypeKind::Tensor: {
      std::string s = show_type(t->a, 2) + " * " + show_type(t->b, 1);
      return prec > 1 ? "(" + s + ")" : s;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Terms

enum class TermKind { Var, Bit, Gate, Tensor, App, LamVar, LamPair };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  TermKind kind;
  std::string name;   // Var/Gate name, or first binder of LamVar/LamPair
  std::string name2;  // second binder of LamPair
  int bit_value = 0;
  int bit_label = 0;
  TermPtr a, b;  // Tensor/App children; lambda body in `a`
};

inline TermPtr mk_var(std::string n) {
  return std::make_shared<Term>(Term{TermKind::Var, std::move(n), "", 0, 0, nullptr, nullptr});
}
inline TermPtr mk_bit(int value, int label) {
  return std::make_shared<Term>(Term{TermKind::Bit, "", "", value, label, nullptr, nullptr});
}
inline TermPtr mk_gate(std::string n) {
  return std::make_shared<Term>(Term{TermKind::Gate, std::move(n), "", 0, 0, nullptr, nullptr});
}
inline TermPtr mk_tensor(TermPtr l, TermPtr r) {
  return std::make_shared<Term>(
      Term{TermKind::Tensor, "", "", 0, 0, std::move(l), std::move(r)});
}
inline TermPtr mk_app(TermPtr f, TermPtr x) {
  return std::make_shared<Term>(Term{TermKind::App, "", "", 0, 0, std::move(f), std::move(x)});
}
inline TermPtr mk_lam(std::string x, TermPtr body) {
  return std::make_shared<Term>(
      Term{TermKind::LamVar, std::move(x), "", 0, 0, std::move(body), nullptr});
}
inline TermPtr mk_lam_pair(std::string x, std::string y, TermPtr body) {
  return std::make_shared<Term>(
      Term{TermKind::LamPair, std::move(x), std::move(y), 0, 0, std::move(body), nullptr});
}

inline bool term_eq(const TermPtr& x, const TermPtr& y) {
  if (x.get() == y.get()) return true;
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case TermKind::Var:
    case TermKind::Gate:
      return x->name == y->name;
    case TermKind::Bit:
      return x->bit_value == y->bit_value && x->bit_label == y->bit_label;
    case TermKind::Tensor:
    case TermKind::App:
      return term_eq(x->a, y->a) && term_eq(x->b, y->b);
    case TermKind::LamVar:
      return x->name == y->name && term_eq(x->a, y->a);
    case TermKind::LamPair:
      return x->name == y->name && x->name2 == y->name2 && term_eq(x->a, y->a);
  }
  return false;
}

// Equality up to renaming of bound variables and of bit labels.
inline bool alpha_label_eq(const TermPtr& x, const TermPtr& y,
                           std::map<std::string, std::string>& bx,
                           std::map<std::string, std::string>& by) {
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case TermKind::Var: {
      auto ix = bx.find(x->name);
      auto iy = by.find(y->name);
      if (ix == bx.end() && iy == by.end()) return x->name == y->name;
      if (ix == bx.end() || iy == by.end()) return false;
      return ix->second == y->name && iy->second == x->name;
    }
    case TermKind::Gate:
      return x->name == y->name;
    case TermKind::Bit:
      return x->bit_value == y->bit_value;
    case TermKind::Tensor:
    case TermKind::App:
      return alpha_label_eq(x->a, y->a, bx, by) && alpha_label_eq(x->b, y->b, bx, by);
    case TermKind::LamVar: {
      auto sx = bx, sy = by;
      sx[x->name] = y->name;
      sy[y->name] = x->name;
      return alpha_label_eq(x->a, y->a, sx, sy);
    }
    case TermKind::LamPair: {
      auto sx = bx, sy = by;
      sx[x->name] = y->name;
      sx[x->name2] = y->name2;
      sy[y->name] = x->name;
      sy[y->name2] = x->name2;
      return alpha_label_eq(x->a, y->a, sx, sy);
    }
  }
  return false;
}

inline bool alpha_label_eq(const TermPtr& x, const TermPtr& y) {
  std::map<std::string, std::string> bx, by;
  return alpha_label_eq(x, y, bx, by);
}

// Free variables, ordered by first occurrence.
inline void free_vars_into(const TermPtr& t, std::vector<std::string>& out,
                           std::vector<std::string>& bound) {
  switch (t->kind) {
    case TermKind::Var:
      if (std::find(bound.begin(), bound.end(), t->name) == bound.end() &&
          std::find(out.begin(), out.end(), t->name) == out.end())
        out.push_back(t->name);
      break;
    case TermKind::Bit:
    case TermKind::Gate:
      break;
    case TermKind::Tensor:
    case TermKind::App:
      free_vars_into(t->a, out, bound);
      free_vars_into(t->b, out, bound);
      break;
    case TermKind::LamVar:
      bound.push_back(t->name);
      free_vars_into(t->a, out, bound);
      bound.pop_back();
      break;
    case TermKind::LamPair:
      bound.push_back(t->name);
      bound.push_back(t->name2);
      free_vars_into(t->a, out, bound);
      bound.pop_back();
      bound.pop_back();
      break;
  }
}

inline std::vector<std::string> free_vars(const TermPtr& t) {
  std::vector<std::string> out, bound;
  free_vars_into(t, out, bound);
  return out;
}

inline int max_bit_label(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Bit:
      return t->bit_label;
    case TermKind::Tensor:
    case TermKind::App:
      return std::max(max_bit_label(t->a), max_bit_label(t->b));
    case TermKind::LamVar:
    case TermKind::LamPair:
      return max_bit_label(t->a);
    default:
      return 0;
  }
}

inline int term_size(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Tensor:
    case TermKind::App:
      return 1 + term_size(t->a) + term_size(t->b);
    case TermKind::LamVar:
    case TermKind::LamPair:
      return 1 + term_size(t->a);
    default:
      return 1;
  }
}

namespace detail {

inline void collect_bit_labels(const TermPtr& t, std::set<int>& used) {
  switch (t->kind) {
    case TermKind::Bit:
      if (t->bit_label != 0 && !used.insert(t->bit_label).second)
        fail(Err::DuplicateBitLabel, "duplicate bit label " + std::to_string(t->bit_label));
      break;
    case TermKind::Tensor:
    case TermKind::App:
      collect_bit_labels(t->a, used);
      collect_bit_labels(t->b, used);
      break;
    case TermKind::LamVar:
    case TermKind::LamPair:
      collect_bit_labels(t->a, used);
      break;
    default:
      break;
  }
}

inline TermPtr relabel_bits(const TermPtr& t, std::set<int>& used, int& next) {
  switch (t->kind) {
    case TermKind::Bit: {
      if (t->bit_label != 0) return t;
      while (used.count(next)) ++next;
      used.insert(next);
      return mk_bit(t->bit_value, next);
    }
    case TermKind::Tensor: {
      TermPtr a = relabel_bits(t->a, used, next);
      TermPtr b = relabel_bits(t->b, used, next);
      return mk_tensor(a, b);
    }
    case TermKind::App: {
      TermPtr a = relabel_bits(t->a, used, next);
      TermPtr b = relabel_bits(t->b, used, next);
      return mk_app(a, b);
    }
    case TermKind::LamVar:
      return mk_lam(t->name, relabel_bits(t->a, used, next));
    case TermKind::LamPair:
      return mk_lam_pair(t->name, t->name2, relabel_bits(t->a, used, next));
    default:
      return t;
  }
}

}  // namespace detail

// Explicit labels are checked for duplicates; bits labeled 0 then receive the
// smallest unused labels, in left-to-right order.
inline TermPtr auto_label(const TermPtr& t) {
  std::set<int> used;
  detail::collect_bit_labels(t, used);
  int next = 1;
  return detail::relabel_bits(t, used, next);
}

// Capture-avoiding substitution of `repl` for the free variable `name`.
inline TermPtr substitute(const TermPtr& t, const std::string& name, const TermPtr& repl);

inline std::string fresh_name(std::string base, const std::vector<std::string>& avoid) {
  while (std::find(avoid.begin(), avoid.end(), base) != avoid.end()) base += "'";
  return base;
}

inline TermPtr rename_free(const TermPtr& t, const std::string& from, const std::string& to) {
  return substitute(t, from, mk_var(to));
}

inline TermPtr substitute(const TermPtr& t, const std::string& name, const TermPtr& repl) {
  switch (t->kind) {
    case TermKind::Var:
      return t->name == name ? repl : t;
    case TermKind::Bit:
    case TermKind::Gate:
      return t;
    case TermKind::Tensor:
      return mk_tensor(substitute(t->a, name, repl), substitute(t->b, name, repl));
    case TermKind::App:
      return mk_app(substitute(t->a, name, repl), substitute(t->b, name, repl));
    case TermKind::LamVar: {
      if (t->name == name) return t;
      std::vector<std::string> fv = free_vars(repl);
      if (std::find(fv.begin(), fv.end(), t->name) != fv.end()) {
        std::vector<std::string> avoid = fv;
        auto bfv = free_vars(t->a);
        avoid.insert(avoid.end(), bfv.begin(), bfv.end());
        avoid.push_back(name);
        std::string nn = fresh_name(t->name, avoid);
        return mk_lam(nn, substitute(rename_free(t->a, t->name, nn), name, repl));
      }
      return mk_lam(t->name, substitute(t->a, name, repl));
    }
    case TermKind::LamPair: {
      if (t->name == name || t->name2 == name) return t;
      std::vector<std::string> fv = free_vars(repl);
      std::string n1 = t->name, n2 = t->name2;
      TermPtr body = t->a;
      std::vector<std::string> avoid = fv;
      auto bfv = free_vars(body);
      avoid.insert(avoid.end(), bfv.begin(), bfv.end());
      avoid.push_back(name);
      if (std::find(fv.begin(), fv.end(), n1) != fv.end()) {
        std::string nn = fresh_name(n1, avoid);
        body = rename_free(body, n1, nn);
        n1 = nn;
        avoid.push_back(nn);
      }
      if (std::find(fv.begin(), fv.end(), n2) != fv.end()) {
        std::string nn = fresh_name(n2, avoid);
        body = rename_free(body, n2, nn);
        n2 = nn;
      }
      return mk_lam_pair(n1, n2, substitute(body, name, repl));
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Parser

namespace detail {

struct Lexer {
  const std::string& src;
  std::size_t pos = 0;

  explicit Lexer(const std::string& s) : src(s) {}

  void skip_space() {
    while (pos < src.size()) {
      if (std::isspace(static_cast<unsigned char>(src[pos]))) {
        ++pos;
      } else if (src[pos] == '-' && pos + 1 < src.size() && src[pos + 1] == '-') {
        while (pos < src.size() && src[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  }

  bool eof() {
    skip_space();
    return pos >= src.size();
  }

  char peek() {
    skip_space();
    return pos < src.size() ? src[pos] : '\0';
  }

  bool accept(char c) {
    skip_space();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!accept(c))
      fail(Err::SyntaxError, std::string("expected '") + c + "' (" + what + ")", pos);
  }

  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  }

  std::string ident() {
    skip_space();
    std::size_t start = pos;
    if (pos >= src.size() || !std::isalpha(static_cast<unsigned char>(src[pos])))
      fail(Err::SyntaxError, "expected identifier", pos);
    while (pos < src.size() && ident_char(src[pos])) ++pos;
    return src.substr(start, pos - start);
  }

  int natural() {
    skip_space();
    std::size_t start = pos;
    while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
    if (pos == start) fail(Err::SyntaxError, "expected number", pos);
    return std::stoi(src.substr(start, pos - start));
  }
};

class Parser {
 public:
  explicit Parser(const std::string& src) : lex_(src) {}

  TermPtr parse_all();

 private:
  Lexer lex_;

  TermPtr term() {
    if (lex_.peek() == '\\') {
      lex_.accept('\\');
      if (lex_.accept('<')) {
        std::string x = variable();
        lex_.expect(',', "pair pattern");
        std::string y = variable();
        lex_.expect('>', "pair pattern");
        if (x == y) fail(Err::SyntaxError, "pattern variables must be distinct", lex_.pos);
        lex_.expect('.', "lambda");
        return mk_lam_pair(x, y, term());
      }
      std::string x = variable();
      lex_.expect('.', "lambda");
      return mk_lam(x, term());
    }
    return tensor_expr();
  }

  TermPtr tensor_expr() {
    TermPtr left = app_expr();
    if (lex_.peek() == '*') {
      lex_.accept('*');
      return mk_tensor(left, term());
    }
    return left;
  }

  TermPtr app_expr() {
    TermPtr t = atom();
    while (starts_atom(lex_.peek())) t = mk_app(t, atom());
    return t;
  }

  static bool starts_atom(char c) {
    return c == '(' || c == '|' || std::isalpha(static_cast<unsigned char>(c));
  }

  TermPtr atom() {
    char c = lex_.peek();
    if (c == '(') {
      lex_.accept('(');
      TermPtr t = term();
      lex_.expect(')', "parenthesized term");
      return t;
    }
    if (c == '|') return bit();
    if (std::isupper(static_cast<unsigned char>(c))) return mk_gate(lex_.ident());
    if (std::islower(static_cast<unsigned char>(c))) return mk_var(lex_.ident());
    fail(Err::SyntaxError, "expected term", lex_.pos);
  }

  std::string variable() {
    char c = lex_.peek();
    if (!std::islower(static_cast<unsigned char>(c)))
      fail(Err::SyntaxError, "expected variable (lowercase identifier)", lex_.pos);
    return lex_.ident();
  }

  TermPtr bit() {
    lex_.expect('|', "bit");
    char v = lex_.peek();
    if (v != '0' && v != '1') fail(Err::SyntaxError, "bit must be |0> or |1>", lex_.pos);
    lex_.accept(v);
    lex_.expect('>', "bit");
    int label = 0;  // 0 = unlabeled, resolved by assign_labels
    if (lex_.pos < lex_.src.size() && lex_.src[lex_.pos] == '_') {
      ++lex_.pos;
      label = lex_.natural();
      if (label <= 0) fail(Err::SyntaxError, "bit labels must be positive", lex_.pos);
    }
    return mk_bit(v - '0', label);
  }

};

inline TermPtr Parser::parse_all() {
  TermPtr t = term();
  if (!lex_.eof()) fail(Err::SyntaxError, "unexpected input after term", lex_.pos);
  return auto_label(t);
}

}  // namespace detail

inline TermPtr parse_term(const std::string& src) { return detail::Parser(src).parse_all(); }

// ---------------------------------------------------------------------------
// Printer. parse_term(print_term(t)) is structurally equal to t, labels
// included. Applications are parenthesized inside tensors for readability.

namespace detail {

enum PrintCtx { CtxTop, CtxTensor, CtxAppFun, CtxAppArg };

inline std::string print_rec(const TermPtr& t, PrintCtx ctx) {
  switch (t->kind) {
    case TermKind::Var:
    case TermKind::Gate:
      return t->name;
    case TermKind::Bit:
      return std::string("|") + char('0' + t->bit_value) + ">_" +
             std::to_string(t->bit_label);
    case TermKind::LamVar:
    case TermKind::LamPair: {
      std::string head = t->kind == TermKind::LamVar
                             ? "\\" + t->name + ". "
                             : "\\<" + t->name + "," + t->name2 + ">. ";
      std::string s = head + print_rec(t->a, CtxTop);
      return ctx == CtxTop ? s : "(" + s + ")";
    }
    case TermKind::Tensor: {
      std::string s =
          print_rec(t->a, CtxTensor) + " * " + print_rec(t->b, CtxTop);
      return (ctx == CtxTop) ? s : "(" + s + ")";
    }
    case TermKind::App: {
      std::string s = print_rec(t->a, CtxAppFun) + " " + print_rec(t->b, CtxAppArg);
      return (ctx == CtxTop || ctx == CtxAppFun) ? s : "(" + s + ")";
    }
  }
  return {};
}

}  // namespace detail

inline std::string print_term(const TermPtr& t) {
  return detail::print_rec(t, detail::CtxTop);
}

}  // namespace qlam
