// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Run directly or through ctest.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "qlam/equational.hpp"
#include "qlam/generate.hpp"
#include "qlam/machine.hpp"
#include "qlam/mll.hpp"
#include "test_support.hpp"

using namespace qlam;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int number, const std::string& what, bool ok, const std::string& detail) {
  std::printf("[%s] %d. %s%s%s\n", ok ? "PASS" : "FAIL", number, what.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Register random_register(int n, std::mt19937_64& rng) {
  Register r;
  r.qubits = n;
  r.amps.resize(std::uint64_t(1) << n);
  std::normal_distribution<double> g(0.0, 1.0);
  for (cx& a : r.amps) a = cx(g(rng), g(rng));
  double nrm = r.norm();
  for (cx& a : r.amps) a /= nrm;
  return r;
}

// --------------------------------------------------------------------------

void criterion_1_epr() {
  auto start = Clock::now();
  bool ok = true;
  std::string detail;
  try {
    DerivPtr d = typecheck(parse_term("(\\<x,y>. CNOT ((H x) * y)) (|0> * |1>)"));
    Register out = run(d, Register::unit(), Scheduler::canonical()).output;
    double s = 1.0 / std::sqrt(2.0);
    Register expect;
    expect.qubits = 2;
    expect.amps = {0, s, s, 0};
    ok = register_close(out, expect, 1e-9);
    double t = seconds_since(start);
    ok = ok && t < 1.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3fs", t);
    detail = std::string("amplitudes {01,10} = 1/sqrt(2), ") + buf;
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  report(1, "entangled-pair reproduction", ok, detail);
}

void criterion_2_golden_trace() {
  bool ok = true;
  std::string detail = "H@1 before CNOT@(1,2) on all 4 basis inputs";
  try {
    DerivPtr d = typecheck(parse_term("\\<x,y>. CNOT ((H x) * y)"));
    RoutingGraph g = build_routing(d);
    using namespace testsupport;
    Mat oracle = matmul(builtin_gates().require("CNOT").matrix,
                        kron(builtin_gates().require("H").matrix, identity_mat(2)));
    for (std::uint64_t b = 0; b < 4 && ok; ++b) {
      Register q = Register::basis(2, b);
      RunResult r = run(g, q, Scheduler::canonical(), builtin_gates(), true);
      std::vector<TraceEvent> fires;
      for (const auto& ev : r.trace)
        if (ev.kind == TraceEvent::K::Fire) fires.push_back(ev);
      ok = fires.size() == 2 && fires[0].gate == "H" &&
           fires[0].wires == std::vector<int>{1} && fires[1].gate == "CNOT" &&
           fires[1].wires == std::vector<int>{1, 2};
      Register expect = q;
      expect.amps = matvec(oracle, q.amps);
      ok = ok && register_close(r.output, expect, 1e-9) && r.sigma.is_identity();
      if (!ok) detail = "mismatch on basis state " + std::to_string(b);
    }
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  report(2, "golden machine trace", ok, detail);
}

struct SoundnessOutcome {
  bool sound_ok = true;
  bool halting_ok = true;
  std::string detail;
  int count = 0;
};

SoundnessOutcome run_soundness_corpus() {
  SoundnessOutcome res;
  auto start = Clock::now();
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    TermPtr t = generate_ground_term(seed, 8, 6);
    DerivPtr d = typecheck(t);
    RoutingGraph g = build_routing(d);
    RunResult r;
    try {
      r = run(g, Register::unit(), Scheduler::canonical());
    } catch (const std::exception& e) {
      res.halting_ok = false;
      res.detail = "run failed on seed " + std::to_string(seed) + ": " + e.what();
      break;
    }
    if (r.moves > r.occurrence_count) {
      res.halting_ok = false;
      res.detail = "move bound exceeded on seed " + std::to_string(seed);
      break;
    }
    Register rewr;
    try {
      rewr = to_register(to_amplitude_vector(normalize(superpose(d))));
    } catch (const std::exception& e) {
      res.sound_ok = false;
      res.detail = "normalize failed on seed " + std::to_string(seed) + ": " + e.what();
      break;
    }
    if (!register_close(r.output, rewr, 1e-6)) {
      res.sound_ok = false;
      res.detail = "amplitude mismatch on seed " + std::to_string(seed) + " (" +
                   print_term(t) + ")";
      break;
    }
    ++res.count;
  }
  double t = seconds_since(start);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d terms, %.1fs", res.count, t);
  if (res.detail.empty()) res.detail = buf;
  if (t >= 60.0) {
    res.sound_ok = false;
    res.detail += " (over the 60s limit)";
  }
  return res;
}

void criteria_3_4_soundness_termination() {
  SoundnessOutcome res = run_soundness_corpus();
  report(3, "rewrite/machine soundness on 1000 generated terms",
         res.sound_ok && res.halting_ok && res.count == 1000, res.detail);
  report(4, "termination and progress on the same corpus", res.halting_ok,
         res.halting_ok ? "all runs halted within the occurrence bound, all tokens final"
                        : res.detail);
}

std::vector<DerivPtr> confluence_corpus() {
  std::vector<DerivPtr> out;
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    out.push_back(typecheck(generate_term(seed, 8, 6)));
  return out;
}

void criterion_5_confluence(const std::vector<DerivPtr>& corpus) {
  bool ok = true;
  std::string detail;
  auto start = Clock::now();
  std::mt19937_64 rng(555);
  int runs = 0;
  for (std::size_t i = 0; i < corpus.size() && ok; ++i) {
    const DerivPtr& d = corpus[i];
    RoutingGraph g = build_routing(d);
    int arity = static_cast<int>(noccs(d->type).size());
    Register in = random_register(arity, rng);
    RunResult base = run(g, in, Scheduler::canonical());
    for (std::uint64_t s = 0; s < 100; ++s) {
      RunResult r = run(g, in, Scheduler::random(s * 7919 + i));
      ++runs;
      if (!register_close(r.output, base.output, 1e-9) ||
          r.sigma.target != base.sigma.target) {
        ok = false;
        detail = "schedule divergence on term " + std::to_string(i) + " seed " +
                 std::to_string(s);
        break;
      }
    }
  }
  if (detail.empty()) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d randomized runs, %.1fs", runs, seconds_since(start));
    detail = buf;
  }
  report(5, "scheduler independence (100 terms x 100 schedules)", ok, detail);
}

void criterion_6_mll(const std::vector<DerivPtr>& corpus) {
  bool ok = true;
  std::string detail;
  auto start = Clock::now();
  int moves = 0;
  for (std::size_t i = 0; i < corpus.size() && ok; ++i) {
    const DerivPtr& d = corpus[i];
    RoutingGraph g = build_routing(d);
    Translation t = translate_derivation(d);
    std::string why;
    if (!check_proof(t.proof, &why)) {
      ok = false;
      detail = "invalid proof on term " + std::to_string(i) + ": " + why;
      break;
    }
    int arity = static_cast<int>(noccs(d->type).size());
    RunResult r = run(g, Register::basis(arity, 0), Scheduler::canonical(),
                      builtin_gates(), true);
    CorrespondenceReport rep = check_correspondence(t, g, r.trace);
    if (!rep.ok) {
      ok = false;
      detail = "term " + std::to_string(i) + ": " + rep.message;
      break;
    }
    moves += rep.machine_moves;
  }
  if (detail.empty()) {
    char buf[112];
    std::snprintf(buf, sizeof buf,
                  "%d machine moves simulated, unique-visit on every proof, %.1fs",
                  moves, seconds_since(start));
    detail = buf;
  }
  report(6, "sequent-proof correspondence and unique visits", ok, detail);
}

int count_gate_constants(const TermPtr& t, std::map<std::string, int>& out) {
  switch (t->kind) {
    case TermKind::Gate:
      ++out[t->name];
      return 1;
    case TermKind::Tensor:
    case TermKind::App:
      return count_gate_constants(t->a, out) + count_gate_constants(t->b, out);
    case TermKind::LamVar:
    case TermKind::LamPair:
      return count_gate_constants(t->a, out);
    default:
      return 0;
  }
}

void criterion_7_circuits(const std::vector<DerivPtr>& corpus) {
  bool ok = true;
  std::string detail;
  std::mt19937_64 rng(777);
  for (std::size_t i = 0; i < corpus.size() && ok; ++i) {
    const DerivPtr& d = corpus[i];
    RoutingGraph g = build_routing(d);
    Circuit c = extract_circuit(g);
    std::map<std::string, int> in_term, in_circuit;
    count_gate_constants(d->term, in_term);
    for (const auto& app : c.gate_apps) ++in_circuit[app.name];
    if (in_term != in_circuit) {
      ok = false;
      detail = "gate multiset mismatch on term " + std::to_string(i);
      break;
    }
    int arity = static_cast<int>(noccs(d->type).size());
    for (int trial = 0; trial < 3; ++trial) {
      Register in = random_register(arity, rng);
      RunResult r = run(g, in, Scheduler::canonical());
      if (!register_close(eval_circuit(c, in), r.output, 1e-9)) {
        ok = false;
        detail = "circuit replay mismatch on term " + std::to_string(i);
        break;
      }
    }
  }
  if (detail.empty()) detail = "replay equal within 1e-9, gate multisets equal";
  report(7, "circuit extraction equivalence", ok, detail);
}

void criterion_8_lifting() {
  bool ok = true;
  std::string detail;
  std::mt19937_64 rng(888);
  int checked = 0;
  for (int n = 1; n <= 5 && ok; ++n) {
    for (const std::string& name : builtin_gates().names()) {
      const Gate& gate = builtin_gates().require(name);
      if (gate.arity > n) continue;
      // all ordered wire assignments
      std::vector<std::vector<int>> choices;
      if (gate.arity == 1) {
        for (int w = 1; w <= n; ++w) choices.push_back({w});
      } else {
        for (int a = 1; a <= n; ++a)
          for (int b = 1; b <= n; ++b)
            if (a != b) choices.push_back({a, b});
      }
      for (const auto& wires : choices) {
        for (int trial = 0; trial < 50; ++trial) {
          Register r = random_register(n, rng);
          Register fast = apply_lifted(gate, wires, r);
          Register slow = testsupport::apply_oracle(gate, wires, r);
          ++checked;
          if (!register_close(fast, slow, 1e-12)) {
            ok = false;
            detail = "deviation for " + name + " on n=" + std::to_string(n);
            break;
          }
        }
        if (!ok) break;
      }
      if (!ok) break;
    }
  }
  if (detail.empty())
    detail = std::to_string(checked) + " register comparisons within 1e-12";
  report(8, "lifted application vs dense matrices", ok, detail);
}

void criterion_9_linearity() {
  bool ok = true;
  std::string detail = "VariableUsedTwice / VariableUnused / UnboundVariable";
  auto expect = [&](const char* src, Err code) {
    try {
      typecheck(parse_term(src));
      ok = false;
      detail = std::string("accepted ") + src;
    } catch (const QlamError& e) {
      if (e.code() != code) {
        ok = false;
        detail = std::string(src) + " raised " + err_name(e.code());
      }
    }
  };
  expect("\\x. x * x", Err::VariableUsedTwice);
  expect("\\x. |0>", Err::VariableUnused);
  expect("x", Err::UnboundVariable);
  expect("\\x. y", Err::UnboundVariable);
  report(9, "linearity rejection", ok, detail);
}

}  // namespace

int main() {
  criterion_1_epr();
  criterion_2_golden_trace();
  criteria_3_4_soundness_termination();
  std::vector<DerivPtr> corpus = confluence_corpus();
  criterion_5_confluence(corpus);
  criterion_6_mll(corpus);
  criterion_7_circuits(corpus);
  criterion_8_lifting();
  criterion_9_linearity();
  if (failures) std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
