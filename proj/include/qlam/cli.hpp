#pragma once

// Command-line front end: check / run / circuit / eval / mll over .qlam
// files. Kept in a header so the test suite can invoke it in-process with
// captured streams. Exit codes: 0 ok, 1 user error, 2 broken invariant.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qlam/equational.hpp"
#include "qlam/generate.hpp"
#include "qlam/machine.hpp"
#include "qlam/mll.hpp"

namespace qlam::cli {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Err::SyntaxError, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline GateLibrary load_gates(const std::string& gates_path) {
  GateLibrary lib = GateLibrary::builtins();
  if (!gates_path.empty()) {
    lib.merge_json_file(gates_path);
  } else if (const char* env = std::getenv("QLAM_GATES")) {
    if (*env) lib.merge_json_file(env);
  }
  return lib;
}

inline std::string show_occ(const RoutingGraph& g, int occ_id) {
  const Occ& o = g.occs[occ_id];
  std::string slot = o.hyp < 0 ? "concl" : "hyp" + std::to_string(o.hyp);
  return std::to_string(o.node) + ":" + slot + (o.path.empty() ? "" : ":" + o.path);
}

// ---------------------------------------------------------------------------
// check

inline void print_derivation(std::ostream& out, const Deriv& d, int indent) {
  out << std::string(indent, ' ') << "(" << rule_name(d.rule) << ") "
      << show_judgment(d) << "\n";
  for (const auto& k : d.kids) print_derivation(out, *k, indent + 2);
}

inline nlohmann::json derivation_json(const Deriv& d) {
  nlohmann::json env = nlohmann::json::array();
  for (const auto& [name, type] : d.env)
    env.push_back({{"var", name}, {"type", show_type(type)}});
  nlohmann::json kids = nlohmann::json::array();
  for (const auto& k : d.kids) kids.push_back(derivation_json(*k));
  return {{"id", d.id},          {"rule", rule_name(d.rule)}, {"env", env},
          {"term", print_term(d.term)}, {"type", show_type(d.type)}, {"kids", kids}};
}

inline int cmd_check(const std::string& path, const std::string& gates_path, bool json,
                     std::ostream& out) {
  GateLibrary lib = load_gates(gates_path);
  DerivPtr d = typecheck(parse_term(read_file(path)), lib);
  if (json) {
    nlohmann::json j{{"type", show_type(d->type)}, {"derivation", derivation_json(*d)}};
    out << j.dump(2) << "\n";
  } else {
    out << "type: " << show_type(d->type) << "\n";
    print_derivation(out, *d, 0);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// run

inline nlohmann::json register_json(const Register& r, int precision) {
  nlohmann::json amps = nlohmann::json::array();
  for (const cx& a : r.amps) amps.push_back({a.real(), a.imag()});
  return {{"qubits", r.qubits}, {"amplitudes", amps},
          {"register", format_register(r, precision)}};
}

inline int cmd_run(const std::string& path, const std::string& gates_path,
                   const std::string& input_text, const std::string& schedule,
                   std::uint64_t seed, bool trace, bool json, int precision,
                   std::ostream& out) {
  GateLibrary lib = load_gates(gates_path);
  DerivPtr d = typecheck(parse_term(read_file(path)), lib);
  RoutingGraph g = build_routing(d);
  Register input = input_text.empty() ? Register::unit() : parse_register(input_text);
  Scheduler sched =
      schedule == "random" ? Scheduler::random(seed) : Scheduler::canonical();
  RunResult r = run(g, input, sched, lib, trace);
  if (json) {
    nlohmann::json j = register_json(r.output, precision);
    j["moves"] = r.moves;
    j["output_order"] = r.sigma.inverse().target;
    out << j.dump(2) << "\n";
    return 0;
  }
  if (trace) {
    for (const TraceEvent& ev : r.trace) {
      if (ev.kind == TraceEvent::K::Move) {
        out << "move slot " << ev.slot + 1 << ": " << show_occ(g, ev.from) << " -> "
            << show_occ(g, ev.to) << "\n";
      } else {
        out << "fire " << ev.gate;
        for (int w : ev.wires) out << " " << w;
        out << "\n";
      }
    }
  }
  out << format_register(r.output, precision) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// circuit

inline nlohmann::json circuit_json(const Circuit& c) {
  nlohmann::json inputs = nlohmann::json::array();
  for (std::size_t i = 0; i < c.inputs.size(); ++i) {
    nlohmann::json in{{"slot", static_cast<int>(i) + 1},
                      {"kind", c.inputs[i].free ? "free" : "bit"}};
    if (!c.inputs[i].free) in["value"] = c.inputs[i].bit;
    inputs.push_back(in);
  }
  nlohmann::json gates = nlohmann::json::array();
  for (const auto& app : c.gate_apps)
    gates.push_back({{"name", app.name}, {"wires", app.wires}});
  return {{"qubits", c.qubits},
          {"inputs", inputs},
          {"gates", gates},
          {"output_order", c.sigma.inverse().target}};
}

inline int cmd_circuit(const std::string& path, const std::string& gates_path,
                       const std::string& format, std::ostream& out) {
  GateLibrary lib = load_gates(gates_path);
  DerivPtr d = typecheck(parse_term(read_file(path)), lib);
  Circuit c = extract_circuit(d);
  if (format == "json") {
    out << circuit_json(c).dump(2) << "\n";
  } else {
    for (const auto& app : c.gate_apps) {
      out << app.name;
      for (int w : app.wires) out << " " << w;
      out << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval

inline int cmd_eval(const std::string& path, const std::string& gates_path,
                    int max_steps, bool show_steps, int precision, std::ostream& out) {
  GateLibrary lib = load_gates(gates_path);
  DerivPtr d = typecheck(parse_term(read_file(path)), lib);
  Superposed s = superpose(d);
  int rounds = 0;
  while (true) {
    if (show_steps) out << "step " << rounds << ": " << show_superposed(s) << "\n";
    auto next = reduce_once(s, lib);
    if (!next) break;
    s = std::move(*next);
    if (++rounds > max_steps)
      fail(Err::StepLimitExceeded,
           "no normal form within " + std::to_string(max_steps) + " rounds");
  }
  bool ground = s.env.empty();
  for (const Summand& m : s.sum) {
    std::vector<int> bits;
    ground = ground && detail::literal_bits(m.deriv->term, bits);
  }
  if (ground && !s.sum.empty()) {
    out << format_register(to_register(to_amplitude_vector(s)), precision) << "\n";
  } else {
    out << show_superposed(s, precision) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// mll

inline void print_mll(std::ostream& out, const MllProof& p, int node, int indent) {
  const MNode& n = *p.nodes[node];
  out << std::string(indent, ' ') << "(" << mll_rule_name(n.rule) << ") "
      << show_sequent(n) << "\n";
  for (const auto& kid : n.kids) print_mll(out, p, p.id_of(kid.get()), indent + 2);
}

inline int cmd_mll(const std::string& path, const std::string& gates_path, bool trace,
                   std::ostream& out) {
  GateLibrary lib = load_gates(gates_path);
  DerivPtr d = typecheck(parse_term(read_file(path)), lib);
  Translation t = translate_derivation(d);
  std::string why;
  if (!check_proof(t.proof, &why))
    fail(Err::CorrespondenceViolation, "translated proof is invalid: " + why);
  print_mll(out, t.proof, 0, 0);
  if (trace) {
    auto show = [&](const MOcc& o) {
      return std::to_string(o.node) + ":" + std::to_string(o.formula) +
             (o.path.empty() ? "" : ":" + o.path);
    };
    for (const MOcc& start : initial_occurrences(t.proof)) {
      out << "run " << show(start);
      MOcc cur = start;
      while (auto next = m_step(t.proof, cur)) {
        cur = *next;
        out << " -> " << show(cur);
      }
      out << " [exit]\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"linear qubit calculus toolkit"};
  app.require_subcommand(1);

  std::string file, gates_path, input_text, schedule = "canonical", format = "text";
  std::uint64_t seed = 0;
  bool trace = false, json = false, show_steps = false;
  int max_steps = 10000, precision = 6;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("file", file, "program file (.qlam)")->required();
    cmd->add_option("--gates", gates_path, "gate library JSON to merge");
  };

  CLI::App* check = app.add_subcommand("check", "type-check and print the derivation");
  add_common(check);
  check->add_flag("--json", json, "machine-readable output");

  CLI::App* runc = app.add_subcommand("run", "run the token machine");
  add_common(runc);
  runc->add_option("--input", input_text, "input register, e.g. \"1/sqrt(2)|01> + ...\"");
  runc->add_option("--schedule", schedule, "canonical|random")
      ->check(CLI::IsMember({"canonical", "random"}));
  runc->add_option("--seed", seed, "random schedule seed");
  runc->add_flag("--trace", trace, "print token moves and gate firings");
  runc->add_flag("--json", json, "machine-readable output");
  runc->add_option("--precision", precision, "digits for printed amplitudes");

  CLI::App* circ = app.add_subcommand("circuit", "extract the circuit");
  add_common(circ);
  circ->add_option("--format", format, "text|json")
      ->check(CLI::IsMember({"text", "json"}));

  CLI::App* eval = app.add_subcommand("eval", "normalize by the rewrite rules");
  add_common(eval);
  eval->add_option("--max-steps", max_steps, "rewrite round limit");
  eval->add_flag("--show-steps", show_steps, "print each round");
  eval->add_option("--precision", precision, "digits for printed amplitudes");

  CLI::App* mll = app.add_subcommand("mll", "print the canonical sequent proof");
  add_common(mll);
  mll->add_flag("--trace", trace, "print the single-token runs");

  std::vector<const char*> argv;
  argv.push_back("qlam");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and friends
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (check->parsed()) return cmd_check(file, gates_path, json, out);
    if (runc->parsed())
      return cmd_run(file, gates_path, input_text, schedule, seed, trace, json,
                     precision, out);
    if (circ->parsed()) return cmd_circuit(file, gates_path, format, out);
    if (eval->parsed())
      return cmd_eval(file, gates_path, max_steps, show_steps, precision, out);
    if (mll->parsed()) return cmd_mll(file, gates_path, trace, out);
  } catch (const QlamError& e) {
    err << "error: " << e.what() << "\n";
    return is_internal(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  }
  err << "error: no subcommand\n";
  return 1;
}

}  // namespace qlam::cli
