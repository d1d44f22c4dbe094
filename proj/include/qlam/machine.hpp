#pragma once

// The multi-token machine over type derivations. Routing edges are wired per
// rule instance; gate axioms become synchronization nodes that hold arriving
// tokens until every argument atom is occupied, then apply the lifted unitary
// to the register and release the tokens on the result atoms.

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "qlam/error.hpp"
#include "qlam/quantum.hpp"
#include "qlam/syntax.hpp"
#include "qlam/typing.hpp"

namespace qlam {

// ---------------------------------------------------------------------------
// Routing graph

enum class SuccKind {
  Move,       // unique classical successor
  SyncInput,  // argument atom of a gate axiom; wait here
  Final,      // positive atom of the root conclusion
  Exit,       // hypothesis atom of an open root judgment (never run)
};

struct Succ {
  SuccKind kind = SuccKind::Exit;
  int target = -1;       // Move
  int sync = -1;         // SyncInput
  int input_index = -1;  // SyncInput
  int final_pos = -1;    // Final, 0-based position in poccs(root type)
};

struct SyncNode {
  int deriv_node = 0;
  std::string gate;
  std::vector<int> inputs;   // occ ids of the argument atoms, left to right
  std::vector<int> outputs;  // occ ids of the result atoms, same order
};

struct RoutingGraph {
  DerivPtr deriv;
  std::vector<const Deriv*> nodes;  // by node id
  std::vector<Occ> occs;            // by occ id
  std::unordered_map<Occ, int, OccHash> occ_index;
  std::vector<Succ> succ;
  std::vector<SyncNode> syncs;
  std::vector<int> root_poccs;  // occ ids, in poccs order

  int id_of(const Occ& o) const {
    auto it = occ_index.find(o);
    if (it == occ_index.end())
      throw std::logic_error("routing: unknown occurrence");
    return it->second;
  }
};

namespace detail {

inline bool path_positive(const Path& p) {
  return std::count(p.begin(), p.end(), 'L') % 2 == 0;
}

struct RoutingBuilder {
  RoutingGraph g;
  std::vector<bool> has_edge;

  void edge(const Occ& from, const Occ& to) {
    int f = g.id_of(from), t = g.id_of(to);
    if (has_edge[f]) throw std::logic_error("routing: duplicate successor");
    has_edge[f] = true;
    g.succ[f] = Succ{SuccKind::Move, t, -1, -1, -1};
  }

  int hyp_index(const Deriv& node, const std::string& name) {
    for (std::size_t i = 0; i < node.env.size(); ++i)
      if (node.env[i].first == name) return static_cast<int>(i);
    throw std::logic_error("routing: missing hypothesis " + name);
  }

  // Context hypotheses shared between a node and the child that carries
  // them: positives descend toward the conclusion, negatives ascend.
  void env_edges(const Deriv& node, const Deriv& kid, const std::string& skip1 = "",
                 const std::string& skip2 = "") {
    for (std::size_t i = 0; i < kid.env.size(); ++i) {
      const auto& [name, type] = kid.env[i];
      if (name == skip1 || name == skip2) continue;
      int parent_i = hyp_index(node, name);
      for (const Path& q : all_paths(type)) {
        Occ child{kid.id, static_cast<int>(i), q};
        Occ parent{node.id, parent_i, q};
        if (path_positive(q))
          edge(parent, child);
        else
          edge(child, parent);
      }
    }
  }

  void wire(const Deriv& node) {
    switch (node.rule) {
      case Rule::AxVar: {
        for (const Path& q : all_paths(node.type)) {
          Occ hyp{node.id, 0, q};
          Occ concl{node.id, -1, q};
          if (path_positive(q))
            edge(hyp, concl);
          else
            edge(concl, hyp);
        }
        break;
      }
      case Rule::AxQ0:
      case Rule::AxQ1:
        break;  // the conclusion atom is seeded as a token, not routed into
      case Rule::AxGate: {
        SyncNode sn;
        sn.deriv_node = node.id;
        sn.gate = node.term->name;
        for (const Path& q : poccs(node.type->a))
          sn.inputs.push_back(g.id_of(Occ{node.id, -1, 'L' + q}));
        for (const Path& q : poccs(node.type->b))
          sn.outputs.push_back(g.id_of(Occ{node.id, -1, 'R' + q}));
        g.syncs.push_back(std::move(sn));
        break;
      }
      case Rule::LolliIntro1: {
        const Deriv& kid = *node.kids[0];
        int hx = hyp_index(kid, node.term->name);
        const TypePtr& bind = node.type->a;
        for (const Path& q : all_paths(bind)) {
          Occ inner{kid.id, hx, q};
          Occ outer{node.id, -1, 'L' + q};
          if (path_positive(q))
            edge(outer, inner);
          else
            edge(inner, outer);
        }
        for (const Path& q : all_paths(kid.type)) {
          Occ inner{kid.id, -1, q};
          Occ outer{node.id, -1, 'R' + q};
          if (path_positive(q))
            edge(inner, outer);
          else
            edge(outer, inner);
        }
        env_edges(node, kid, node.term->name);
        break;
      }
      case Rule::LolliIntro2: {
        // Both components of the domain pair are wired exactly like the
        // plain lambda wires its domain: polarity decides the direction,
        // the codomain side is untouched.
        const Deriv& kid = *node.kids[0];
        int hx = hyp_index(kid, node.term->name);
        int hy = hyp_index(kid, node.term->name2);
        const TypePtr& xt = node.type->a->a;
        const TypePtr& yt = node.type->a->b;
        for (const Path& q : all_paths(xt)) {
          Occ inner{kid.id, hx, q};
          Occ outer{node.id, -1, "Ll" + q};
          if (path_positive(q))
            edge(outer, inner);
          else
            edge(inner, outer);
        }
        for (const Path& q : all_paths(yt)) {
          Occ inner{kid.id, hy, q};
          Occ outer{node.id, -1, "Lr" + q};
          if (path_positive(q))
            edge(outer, inner);
          else
            edge(inner, outer);
        }
        for (const Path& q : all_paths(kid.type)) {
          Occ inner{kid.id, -1, q};
          Occ outer{node.id, -1, 'R' + q};
          if (path_positive(q))
            edge(inner, outer);
          else
            edge(outer, inner);
        }
        env_edges(node, kid, node.term->name, node.term->name2);
        break;
      }
      case Rule::LolliElim: {
        const Deriv& fun = *node.kids[0];
        const Deriv& arg = *node.kids[1];
        for (const Path& q : all_paths(arg.type)) {
          Occ a{arg.id, -1, q};
          Occ fdom{fun.id, -1, 'L' + q};
          if (path_positive(q))
            edge(a, fdom);
          else
            edge(fdom, a);
        }
        for (const Path& q : all_paths(node.type)) {
          Occ fcod{fun.id, -1, 'R' + q};
          Occ concl{node.id, -1, q};
          if (path_positive(q))
            edge(fcod, concl);
          else
            edge(concl, fcod);
        }
        env_edges(node, fun);
        env_edges(node, arg);
        break;
      }
      case Rule::TensorIntro: {
        const Deriv& left = *node.kids[0];
        const Deriv& right = *node.kids[1];
        for (const Path& q : all_paths(left.type)) {
          Occ inner{left.id, -1, q};
          Occ outer{node.id, -1, 'l' + q};
          if (path_positive(q))
            edge(inner, outer);
          else
            edge(outer, inner);
        }
        for (const Path& q : all_paths(right.type)) {
          Occ inner{right.id, -1, q};
          Occ outer{node.id, -1, 'r' + q};
          if (path_positive(q))
            edge(inner, outer);
          else
            edge(outer, inner);
        }
        env_edges(node, left);
        env_edges(node, right);
        break;
      }
    }
    for (const auto& k : node.kids) wire(*k);
  }
};

}  // namespace detail

inline RoutingGraph build_routing(const DerivPtr& d) {
  detail::RoutingBuilder b;
  b.g.deriv = d;
  b.g.nodes = flatten(d);
  b.g.occs = enumerate_occurrences(d);
  for (std::size_t i = 0; i < b.g.occs.size(); ++i)
    b.g.occ_index.emplace(b.g.occs[i], static_cast<int>(i));
  b.g.succ.assign(b.g.occs.size(), Succ{});
  b.has_edge.assign(b.g.occs.size(), false);
  b.wire(*d);

  // reclassify sync inputs and root exits over the Move edges
  for (std::size_t s = 0; s < b.g.syncs.size(); ++s) {
    const SyncNode& sn = b.g.syncs[s];
    for (std::size_t k = 0; k < sn.inputs.size(); ++k) {
      Succ& entry = b.g.succ[sn.inputs[k]];
      if (b.has_edge[sn.inputs[k]])
        throw std::logic_error("routing: sync input has a classical successor");
      entry = Succ{SuccKind::SyncInput, -1, static_cast<int>(s), static_cast<int>(k), -1};
    }
  }
  auto root_pos = poccs(d->type);
  for (std::size_t j = 0; j < root_pos.size(); ++j) {
    int o = b.g.id_of(Occ{d->id, -1, root_pos[j]});
    if (b.has_edge[o]) throw std::logic_error("routing: final occurrence has a successor");
    b.g.succ[o] = Succ{SuccKind::Final, -1, -1, -1, static_cast<int>(j)};
    b.g.root_poccs.push_back(o);
  }
  return b.g;
}

// ---------------------------------------------------------------------------
// Machine states and stepping

struct MachineState {
  enum class K { Active, Waiting, Final };
  struct Slot {
    K kind;
    int occ;          // current occurrence (also kept while waiting/final)
    int sync = -1;    // Waiting
    int input = -1;   // Waiting
    int pos = -1;     // Final, 0-based poccs position
  };
  std::vector<Slot> slots;
  Register reg;
  int moves = 0;

  bool done() const {
    for (const auto& s : slots)
      if (s.kind != K::Final) return false;
    return true;
  }
};

struct TraceEvent {
  enum class K { Move, Fire };
  K kind;
  int slot = -1;  // Move, 0-based
  int from = -1, to = -1;
  int sync = -1;  // Fire
  std::string gate;
  std::vector<int> wires;  // 1-based slot indices
};

struct Scheduler {
  enum class K { Canonical, Random };
  K kind = K::Canonical;
  std::mt19937_64 rng;
  std::size_t cursor = 0;

  static Scheduler canonical() { return Scheduler{}; }
  static Scheduler random(std::uint64_t seed) {
    Scheduler s;
    s.kind = K::Random;
    s.rng.seed(seed);
    return s;
  }

  // choose the slot whose token moves next
  int pick(const MachineState& state) {
    if (kind == K::Random) {
      std::vector<int> active;
      for (std::size_t i = 0; i < state.slots.size(); ++i)
        if (state.slots[i].kind == MachineState::K::Active) active.push_back(i);
      return active[rng() % active.size()];
    }
    std::size_t n = state.slots.size();
    for (std::size_t d = 0; d < n; ++d) {
      std::size_t i = (cursor + d) % n;
      if (state.slots[i].kind == MachineState::K::Active) {
        cursor = i + 1;
        return static_cast<int>(i);
      }
    }
    throw std::logic_error("scheduler: no active slot");
  }
};

namespace detail {

inline MachineState::Slot place_token(const RoutingGraph& g, int occ) {
  const Succ& s = g.succ[occ];
  switch (s.kind) {
    case SuccKind::SyncInput:
      return {MachineState::K::Waiting, occ, s.sync, s.input_index, -1};
    case SuccKind::Final:
      return {MachineState::K::Final, occ, -1, -1, s.final_pos};
    case SuccKind::Move:
      return {MachineState::K::Active, occ, -1, -1, -1};
    case SuccKind::Exit:
      throw std::logic_error("token placed on an open-term exit");
  }
  throw std::logic_error("unreachable");
}

inline int complete_sync(const RoutingGraph& g, const MachineState& s) {
  std::vector<int> present(g.syncs.size(), 0);
  for (const auto& slot : s.slots)
    if (slot.kind == MachineState::K::Waiting) ++present[slot.sync];
  for (std::size_t i = 0; i < g.syncs.size(); ++i)
    if (present[i] == static_cast<int>(g.syncs[i].inputs.size())) return static_cast<int>(i);
  return -1;
}

}  // namespace detail

inline MachineState initial_state(const RoutingGraph& g, const Register& input) {
  const Deriv& root = *g.deriv;
  if (!root.env.empty()) fail(Err::OpenTerm, "machine runs need a closed derivation");
  auto inputs = noccs(root.type);
  if (static_cast<int>(inputs.size()) != input.qubits)
    fail(Err::InputArityMismatch,
         "term expects " + std::to_string(inputs.size()) + " input qubits, got " +
             std::to_string(input.qubits));
  MachineState s;
  for (const Path& p : inputs)
    s.slots.push_back(detail::place_token(g, g.id_of(Occ{root.id, -1, p})));
  for (const Occ& o : bitocc(g.deriv))
    s.slots.push_back(detail::place_token(g, g.id_of(o)));
  s.reg = tensor(input, bitval(g.deriv));
  return s;
}

// One transition: fire a ready synchronization node if any (eagerly), else
// advance one active token chosen by the scheduler. Returns false when every
// token is final.
inline bool step(const RoutingGraph& g, MachineState& s, Scheduler& sched,
                 const GateLibrary& gates, std::vector<TraceEvent>* trace = nullptr) {
  if (s.done()) return false;
  int budget = static_cast<int>(g.occs.size()) + 1;

  int ready = detail::complete_sync(g, s);
  if (ready >= 0) {
    const SyncNode& sn = g.syncs[ready];
    int m = static_cast<int>(sn.inputs.size());
    std::vector<int> wires(m, 0);
    for (std::size_t i = 0; i < s.slots.size(); ++i) {
      const auto& slot = s.slots[i];
      if (slot.kind == MachineState::K::Waiting && slot.sync == ready)
        wires[slot.input] = static_cast<int>(i) + 1;
    }
    if (s.reg.qubits > 0) s.reg = apply_lifted(gates.require(sn.gate), wires, s.reg);
    TraceEvent ev{TraceEvent::K::Fire, -1, -1, -1, ready, sn.gate, wires};
    for (int k = 0; k < m; ++k) {
      int slot_idx = wires[k] - 1;
      s.slots[slot_idx] = detail::place_token(g, sn.outputs[k]);
      s.moves++;
    }
    if (trace) trace->push_back(std::move(ev));
    if (s.moves > budget)
      fail(Err::StepBudgetExceeded,
           "token moves exceeded the occurrence count " + std::to_string(g.occs.size()));
    return true;
  }

  bool any_active = false;
  for (const auto& slot : s.slots)
    if (slot.kind == MachineState::K::Active) any_active = true;
  if (!any_active)
    fail(Err::MachineDeadlock, "tokens waiting with no ready synchronization");

  int i = sched.pick(s);
  int from = s.slots[i].occ;
  int to = g.succ[from].target;
  s.slots[i] = detail::place_token(g, to);
  s.moves++;
  if (trace) trace->push_back(TraceEvent{TraceEvent::K::Move, i, from, to, -1, "", {}});
  if (s.moves > budget)
    fail(Err::StepBudgetExceeded,
         "token moves exceeded the occurrence count " + std::to_string(g.occs.size()));
  return true;
}

// ---------------------------------------------------------------------------
// Whole runs and the extracted circuit

struct RunResult {
  Register output;       // reordered so qubit j matches poccs(A)[j]
  Permutation sigma;     // slot i ended at output position sigma(i)
  std::vector<TraceEvent> trace;
  int moves = 0;
  int occurrence_count = 0;
};

namespace detail {

inline Permutation slot_to_output(const MachineState& s) {
  Permutation sigma;
  sigma.target.resize(s.slots.size());
  for (std::size_t i = 0; i < s.slots.size(); ++i) sigma.target[i] = s.slots[i].pos + 1;
  return sigma;
}

}  // namespace detail

inline RunResult run(const RoutingGraph& g, const Register& input, Scheduler sched,
                     const GateLibrary& gates = builtin_gates(), bool want_trace = false) {
  MachineState s = initial_state(g, input);
  RunResult res;
  while (step(g, s, sched, gates, want_trace ? &res.trace : nullptr)) {
  }
  res.sigma = detail::slot_to_output(s);
  res.output = s.slots.empty() ? s.reg : apply_permutation(res.sigma.inverse(), s.reg);
  res.moves = s.moves;
  res.occurrence_count = static_cast<int>(g.occs.size());
  return res;
}

inline RunResult run(const DerivPtr& d, const Register& input, Scheduler sched,
                     const GateLibrary& gates = builtin_gates(), bool want_trace = false) {
  return run(build_routing(d), input, sched, gates, want_trace);
}

struct Circuit {
  struct Input {
    bool free = true;
    int bit = 0;
  };
  struct GateApp {
    std::string name;
    std::vector<int> wires;  // 1-based
  };
  int qubits = 0;
  std::vector<Input> inputs;
  std::vector<GateApp> gate_apps;
  Permutation sigma;  // slot -> output position, as in RunResult
};

// Run the machine symbolically (register untouched) and read off the circuit:
// input assignments, gates in firing order under the canonical scheduler, and
// the final reordering.
inline Circuit extract_circuit(const RoutingGraph& g) {
  int free_count = static_cast<int>(noccs(g.deriv->type).size());
  Circuit c;
  for (int i = 0; i < free_count; ++i) c.inputs.push_back({true, 0});
  for (const BitLeaf& l : bit_leaves(g.deriv)) c.inputs.push_back({false, l.value});
  c.qubits = static_cast<int>(c.inputs.size());

  MachineState s = initial_state(g, Register::basis(free_count, 0));
  Scheduler sched = Scheduler::canonical();
  s.reg = Register::unit();  // symbolic: ignore amplitudes entirely
  while (true) {
    if (s.done()) break;
    int ready = detail::complete_sync(g, s);
    if (ready >= 0) {
      const SyncNode& sn = g.syncs[ready];
      std::vector<int> wires(sn.inputs.size(), 0);
      for (std::size_t i = 0; i < s.slots.size(); ++i)
        if (s.slots[i].kind == MachineState::K::Waiting && s.slots[i].sync == ready)
          wires[s.slots[i].input] = static_cast<int>(i) + 1;
      c.gate_apps.push_back({sn.gate, wires});
      for (std::size_t k = 0; k < sn.inputs.size(); ++k)
        s.slots[wires[k] - 1] = detail::place_token(g, sn.outputs[k]);
      s.moves += static_cast<int>(sn.inputs.size());
      continue;
    }
    int i = sched.pick(s);
    s.slots[i] = detail::place_token(g, g.succ[s.slots[i].occ].target);
    s.moves++;
    if (s.moves > static_cast<int>(g.occs.size()) + 1)
      fail(Err::StepBudgetExceeded, "symbolic run exceeded the move budget");
  }
  c.sigma = detail::slot_to_output(s);
  return c;
}

inline Circuit extract_circuit(const DerivPtr& d) {
  return extract_circuit(build_routing(d));
}

inline Register eval_circuit(const Circuit& c, const Register& input,
                             const GateLibrary& gates = builtin_gates()) {
  int free_count = 0;
  std::vector<int> bits;
  for (const auto& in : c.inputs) {
    if (in.free) {
      if (!bits.empty()) throw std::logic_error("circuit: free inputs must come first");
      ++free_count;
    } else {
      bits.push_back(in.bit);
    }
  }
  if (input.qubits != free_count)
    fail(Err::InputArityMismatch, "circuit expects " + std::to_string(free_count) +
                                      " input qubits, got " + std::to_string(input.qubits));
  Register reg = tensor(input, Register::basis_bits(bits));
  for (const auto& app : c.gate_apps)
    reg = apply_lifted(gates.require(app.name), app.wires, reg);
  return reg.qubits == 0 ? reg : apply_permutation(c.sigma.inverse(), reg);
}

}  // namespace qlam
