#include <catch2/catch_amalgamated.hpp>

#include "qlam/machine.hpp"
#include "test_support.hpp"

using namespace qlam;

namespace {

const char* kEpr = "\\<x,y>. CNOT ((H x) * y)";
const char* kEprApplied = "(\\<x,y>. CNOT ((H x) * y)) (|0> * |1>)";

// 4x4 oracle for the entangler: CNOT on (1,2) after H on 1.
Register epr_oracle(const Register& q) {
  using namespace testsupport;
  Mat h = builtin_gates().require("H").matrix;
  Mat cnot = builtin_gates().require("CNOT").matrix;
  Mat full = matmul(cnot, kron(h, identity_mat(2)));
  Register out = q;
  out.amps = matvec(full, q.amps);
  return out;
}

std::vector<TraceEvent> fires_of(const RunResult& r) {
  std::vector<TraceEvent> out;
  for (const auto& ev : r.trace)
    if (ev.kind == TraceEvent::K::Fire) out.push_back(ev);
  return out;
}

}  // namespace

TEST_CASE("routing follows the published token path through the entangler") {
  DerivPtr d = typecheck(parse_term(kEpr));
  RoutingGraph g = build_routing(d);

  // pre-order node ids: 0 lambda, 1 outer app, 2 CNOT, 3 tensor,
  // 4 inner app, 5 H, 6 x axiom, 7 y axiom
  auto next = [&](Occ o) {
    const Succ& s = g.succ[g.id_of(o)];
    REQUIRE(s.kind == SuccKind::Move);
    return g.occs[s.target];
  };

  // first argument atom of the conclusion walks to the H input
  Occ o{0, -1, "Ll"};
  o = next(o);
  CHECK(o == Occ{1, 0, ""});
  o = next(o);
  CHECK(o == Occ{3, 0, ""});
  o = next(o);
  CHECK(o == Occ{4, 0, ""});
  o = next(o);
  CHECK(o == Occ{6, 0, ""});
  o = next(o);
  CHECK(o == Occ{6, -1, ""});
  o = next(o);
  CHECK(o == Occ{5, -1, "L"});
  CHECK(g.succ[g.id_of(o)].kind == SuccKind::SyncInput);

  // second argument atom waits at the CNOT
  Occ p{0, -1, "Lr"};
  p = next(p);  // y hypothesis of the application
  p = next(p);  // y hypothesis of the tensor
  p = next(p);  // y axiom hypothesis
  p = next(p);  // y axiom conclusion
  CHECK(p == Occ{7, -1, ""});
  p = next(p);
  CHECK(p == Occ{3, -1, "r"});
  p = next(p);
  CHECK(p == Occ{2, -1, "Lr"});
  CHECK(g.succ[g.id_of(p)].kind == SuccKind::SyncInput);

  // sync nodes map input k to output k
  REQUIRE(g.syncs.size() == 2);
  for (const SyncNode& sn : g.syncs) {
    REQUIRE(sn.inputs.size() == sn.outputs.size());
    for (std::size_t k = 0; k < sn.inputs.size(); ++k) {
      const Occ& in = g.occs[sn.inputs[k]];
      const Occ& out = g.occs[sn.outputs[k]];
      CHECK(in.path.substr(1) == out.path.substr(1));
    }
  }
}

TEST_CASE("axiom routing bounces positives down and negatives up") {
  Env env{{"f", lolli(qubit_type(), qubit_type())}};
  DerivPtr d = typecheck(env, parse_term("f"));
  RoutingGraph g = build_routing(d);
  // hypothesis codomain atom (positive) moves to the conclusion
  const Succ& down = g.succ[g.id_of(Occ{0, 0, "R"})];
  REQUIRE(down.kind == SuccKind::Move);
  CHECK(g.occs[down.target] == Occ{0, -1, "R"});
  // conclusion domain atom (negative in type) moves back to the hypothesis
  const Succ& up = g.succ[g.id_of(Occ{0, -1, "L"})];
  REQUIRE(up.kind == SuccKind::Move);
  CHECK(g.occs[up.target] == Occ{0, 0, "L"});
}

TEST_CASE("single bit derivation is immediately final") {
  DerivPtr d = typecheck(parse_term("|0>"));
  RoutingGraph g = build_routing(d);
  REQUIRE(g.occs.size() == 1);
  CHECK(g.succ[0].kind == SuccKind::Final);
  CHECK(g.succ[0].final_pos == 0);

  RunResult r = run(d, Register::unit(), Scheduler::canonical());
  CHECK(r.moves == 0);
  CHECK(register_close(r.output, parse_register("|0>"), 1e-12));
}

TEST_CASE("golden trace: H fires before CNOT and the register matches the oracle") {
  DerivPtr d = typecheck(parse_term(kEpr));
  RoutingGraph g = build_routing(d);
  const char* basis[] = {"|00>", "|01>", "|10>", "|11>"};
  for (const char* b : basis) {
    Register q = parse_register(b);
    RunResult r = run(g, q, Scheduler::canonical(), builtin_gates(), true);
    auto fires = fires_of(r);
    REQUIRE(fires.size() == 2);
    CHECK(fires[0].gate == "H");
    CHECK(fires[0].wires == std::vector<int>{1});
    CHECK(fires[1].gate == "CNOT");
    CHECK(fires[1].wires == std::vector<int>{1, 2});
    CHECK(r.sigma.is_identity());
    CHECK(register_close(r.output, epr_oracle(q), 1e-9));
  }
}

TEST_CASE("applied entangler reproduces the Bell-style state") {
  DerivPtr d = typecheck(parse_term(kEprApplied));
  RunResult r = run(d, Register::unit(), Scheduler::canonical());
  CHECK(register_close(r.output, parse_register("1/sqrt(2)|01> + 1/sqrt(2)|10>"), 1e-9));
}

TEST_CASE("entangler on |11> flips the sign") {
  DerivPtr d = typecheck(parse_term(kEpr));
  RunResult r = run(d, parse_register("|11>"), Scheduler::canonical());
  Register expect = epr_oracle(parse_register("|11>"));
  CHECK(register_close(r.output, expect, 1e-9));
  CHECK(register_close(r.output, parse_register("1/sqrt(2)|01> - 1/sqrt(2)|10>"), 1e-9));
}

TEST_CASE("initial state layout") {
  DerivPtr d = typecheck(parse_term(kEpr));
  RoutingGraph g = build_routing(d);
  Register q = parse_register("1/sqrt(2)|00> + 1/sqrt(2)|11>");
  MachineState s = initial_state(g, q);
  REQUIRE(s.slots.size() == 2);
  CHECK(g.occs[s.slots[0].occ] == Occ{0, -1, "Ll"});
  CHECK(g.occs[s.slots[1].occ] == Occ{0, -1, "Lr"});
  CHECK(register_close(s.reg, q, 1e-12));

  DerivPtr applied = typecheck(parse_term(kEprApplied));
  RoutingGraph ga = build_routing(applied);
  MachineState sa = initial_state(ga, Register::unit());
  REQUIRE(sa.slots.size() == 2);
  CHECK(register_close(sa.reg, parse_register("|01>"), 1e-12));

  CHECK_THROWS_AS(initial_state(ga, parse_register("|0>")), QlamError);
  Env env{{"x", qubit_type()}};
  DerivPtr open = typecheck(env, parse_term("H x"));
  try {
    initial_state(build_routing(open), parse_register("|0>"));
    FAIL("expected OpenTerm");
  } catch (const QlamError& e) {
    CHECK(e.code() == Err::OpenTerm);
  }
}

TEST_CASE("a bare gate constant computes the gate") {
  DerivPtr d = typecheck(parse_term("CNOT"));
  for (const char* b : {"|00>", "|01>", "|10>", "|11>"}) {
    Register in = parse_register(b);
    RunResult r = run(d, in, Scheduler::canonical());
    Register expect = apply_lifted(builtin_gates().require("CNOT"), {1, 2}, in);
    CHECK(register_close(r.output, expect, 1e-12));
  }
}

TEST_CASE("identity lambda routes its input through") {
  DerivPtr d = typecheck(parse_term("\\x. x"));
  Register in = parse_register("0.6|0> + 0.8|1>");
  RunResult r = run(d, in, Scheduler::canonical());
  CHECK(register_close(r.output, in, 1e-12));
  CHECK(r.moves <= r.occurrence_count);
}

TEST_CASE("pair swap ends with a non-identity output permutation") {
  DerivPtr d = typecheck(parse_term("\\<x,y>. y * x"));
  RunResult r = run(d, parse_register("|01>"), Scheduler::canonical());
  CHECK(register_close(r.output, parse_register("|10>"), 1e-12));
  CHECK_FALSE(r.sigma.is_identity());

  Register super = parse_register("0.6|01> + 0.8|10>");
  RunResult r2 = run(d, super, Scheduler::canonical());
  CHECK(register_close(r2.output, parse_register("0.6|10> + 0.8|01>"), 1e-12));
}

TEST_CASE("higher-order interfaces route through the binder atoms") {
  // \f. f |0> : (B -o B) -o B. The caller owns f's behavior: output
  // position 1 carries what the program sends to f (the bit), position 2
  // relays f's answer (the input qubit).
  DerivPtr d = typecheck(parse_term("\\f. f |0>"));
  CHECK(show_type(d->type) == "(B -o B) -o B");
  Register in = parse_register("0.6|0> + 0.8|1>");
  RunResult r = run(d, in, Scheduler::canonical());
  CHECK(register_close(r.output, tensor(parse_register("|0>"), in), 1e-12));

  Circuit c = extract_circuit(d);
  CHECK(register_close(eval_circuit(c, in), r.output, 1e-12));
}

TEST_CASE("three qubit cascade builds the fully correlated state") {
  const char* src = "(\\<x,y>. x * CNOT (y * |0>)) (CNOT ((H |0>) * |0>))";
  DerivPtr d = typecheck(parse_term(src));
  RunResult r = run(d, Register::unit(), Scheduler::canonical());
  CHECK(register_close(r.output, parse_register("1/sqrt(2)|000> + 1/sqrt(2)|111>"), 1e-9));
}

TEST_CASE("runs respect the move bound and visit occurrences at most once") {
  const char* sources[] = {
      kEpr, kEprApplied, "\\x. H x", "CNOT", "\\<x,y>. y * x",
      "(\\f. f |0>) (\\x. H x)", "(\\g. g ((H |0>) * |1>)) CNOT",
      "(\\<x,y>. x * CNOT (y * |0>)) (CNOT ((H |0>) * |0>))",
  };
  for (const char* src : sources) {
    DerivPtr d = typecheck(parse_term(src));
    RoutingGraph g = build_routing(d);
    int arity = static_cast<int>(noccs(d->type).size());
    RunResult r = run(g, Register::basis(arity, 0), Scheduler::canonical(), builtin_gates(),
                      true);
    INFO(src);
    CHECK(r.moves <= r.occurrence_count);
    CHECK(std::abs(r.output.norm() - 1.0) < 1e-9);
    std::vector<int> visits(g.occs.size(), 0);
    for (const auto& ev : r.trace) {
      if (ev.kind == TraceEvent::K::Move) {
        ++visits[ev.to];
      } else {
        const SyncNode& sn = g.syncs[ev.sync];
        for (int out : sn.outputs) ++visits[out];
      }
    }
    for (int v : visits) CHECK(v <= 1);
    // every sync fired exactly once
    std::vector<int> fired(g.syncs.size(), 0);
    for (const auto& ev : r.trace)
      if (ev.kind == TraceEvent::K::Fire) ++fired[ev.sync];
    for (int f : fired) CHECK(f == 1);
  }
}

TEST_CASE("randomized schedules agree with the canonical one") {
  const char* sources[] = {kEpr, kEprApplied,
                           "(\\<x,y>. x * CNOT (y * |0>)) (CNOT ((H |0>) * |0>))",
                           "\\<x,y>. (H x) * (H y)"};
  for (const char* src : sources) {
    DerivPtr d = typecheck(parse_term(src));
    RoutingGraph g = build_routing(d);
    int arity = static_cast<int>(noccs(d->type).size());
    Register in = Register::basis(arity, arity ? 1 : 0);
    RunResult base = run(g, in, Scheduler::canonical());
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      RunResult r = run(g, in, Scheduler::random(seed));
      INFO(src << " seed " << seed);
      REQUIRE(register_close(r.output, base.output, 1e-9));
      REQUIRE(r.sigma.target == base.sigma.target);
    }
  }
}

TEST_CASE("extracted circuits replay the machine") {
  DerivPtr d = typecheck(parse_term(kEpr));
  Circuit c = extract_circuit(d);
  CHECK(c.qubits == 2);
  REQUIRE(c.inputs.size() == 2);
  CHECK(c.inputs[0].free);
  CHECK(c.inputs[1].free);
  REQUIRE(c.gate_apps.size() == 2);
  CHECK(c.gate_apps[0].name == "H");
  CHECK(c.gate_apps[0].wires == std::vector<int>{1});
  CHECK(c.gate_apps[1].name == "CNOT");
  CHECK(c.gate_apps[1].wires == std::vector<int>{1, 2});
  CHECK(c.sigma.is_identity());

  Register q = parse_register("|01>");
  CHECK(register_close(eval_circuit(c, q), epr_oracle(q), 1e-9));
  CHECK(register_close(eval_circuit(c, parse_register("|11>")),
                       epr_oracle(parse_register("|11>")), 1e-9));

  Circuit bit = extract_circuit(typecheck(parse_term("|1>")));
  CHECK(bit.qubits == 1);
  REQUIRE(bit.inputs.size() == 1);
  CHECK_FALSE(bit.inputs[0].free);
  CHECK(bit.inputs[0].bit == 1);
  CHECK(bit.gate_apps.empty());
  CHECK(register_close(eval_circuit(bit, Register::unit()), parse_register("|1>"), 1e-12));

  Circuit ident = extract_circuit(typecheck(parse_term("\\x. x")));
  CHECK(ident.qubits == 1);
  CHECK(ident.inputs[0].free);
  CHECK(ident.gate_apps.empty());
  CHECK(ident.sigma.is_identity());

  CHECK_THROWS_AS(eval_circuit(c, parse_register("|0>")), QlamError);
}

TEST_CASE("circuit equivalence on assorted programs") {
  const char* sources[] = {
      kEpr, kEprApplied, "\\<x,y>. y * x", "CNOT", "\\x. H (X x)",
      "(\\g. g ((H |0>) * |1>)) CNOT",
      "(\\<x,y>. x * CNOT (y * |0>)) (CNOT ((H |0>) * |0>))",
      "(\\f. f (|0> * |1>)) (\\<x,y>. (T y) * (S x))",
  };
  std::mt19937_64 rng(4242);
  for (const char* src : sources) {
    DerivPtr d = typecheck(parse_term(src));
    RoutingGraph g = build_routing(d);
    Circuit c = extract_circuit(g);
    int arity = static_cast<int>(noccs(d->type).size());
    for (int trial = 0; trial < 4; ++trial) {
      Register in;
      in.qubits = arity;
      in.amps.resize(std::uint64_t(1) << arity);
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (cx& a : in.amps) a = cx(gauss(rng), gauss(rng));
      double n = in.norm();
      for (cx& a : in.amps) a /= n;
      RunResult r = run(g, in, Scheduler::canonical());
      INFO(src);
      REQUIRE(register_close(eval_circuit(c, in), r.output, 1e-9));
    }
  }
}
