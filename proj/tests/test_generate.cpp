#include <catch2/catch_amalgamated.hpp>

#include "qlam/equational.hpp"
#include "qlam/generate.hpp"
#include "qlam/machine.hpp"

using namespace qlam;

TEST_CASE("generation is deterministic in the seed") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    TermPtr a = generate_term(seed, 6, 4);
    TermPtr b = generate_term(seed, 6, 4);
    CHECK(term_eq(a, b));
  }
  CHECK(term_eq(generate_ground_term(3, 5, 3), generate_ground_term(3, 5, 3)));
}

TEST_CASE("the smallest budget still yields a closed term") {
  TermPtr t = generate_term(0, 1, 1);
  DerivPtr d = typecheck(t);
  CHECK(machine_qubits(d) <= 1);
  CHECK(free_vars(t).empty());
  // the ground variant of the smallest budget has the bare qubit type
  DerivPtr ground = typecheck(generate_ground_term(0, 1, 1));
  CHECK(show_type(ground->type) == "B");
}

TEST_CASE("every generated term type-checks within the qubit budget") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    TermPtr t = generate_term(seed, 8, 6);
    INFO(print_term(t));
    DerivPtr d = typecheck(t);
    CHECK(free_vars(t).empty());
    CHECK(machine_qubits(d) <= 6);
    std::string why;
    CHECK(derivation_valid(d, builtin_gates(), &why));
  }
}

TEST_CASE("generated terms round-trip through the printer") {
  for (std::uint64_t seed = 100; seed < 250; ++seed) {
    TermPtr t = generate_term(seed, 7, 5);
    TermPtr back = parse_term(print_term(t));
    INFO(print_term(t));
    REQUIRE(term_eq(t, back));
  }
}

TEST_CASE("ground terms have tuple types and bits only") {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    TermPtr t = generate_ground_term(seed, 8, 6);
    DerivPtr d = typecheck(t);
    INFO(print_term(t));
    CHECK(noccs(d->type).empty());
    CHECK(!bit_leaves(d).empty());
  }
}

TEST_CASE("the corpus exercises every typing rule") {
  bool saw[8] = {false};
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    DerivPtr d = typecheck(generate_term(seed, 8, 6));
    for (const Deriv* n : flatten(d)) saw[static_cast<int>(n->rule)] = true;
  }
  for (int r = 0; r < 8; ++r) {
    INFO(rule_name(static_cast<Rule>(r)));
    CHECK(saw[r]);
  }
}

TEST_CASE("generated terms run and normalize to the same amplitudes") {
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    TermPtr t = generate_ground_term(seed, 6, 4);
    DerivPtr d = typecheck(t);
    Register machine = run(d, Register::unit(), Scheduler::canonical()).output;
    Register rewriting = to_register(to_amplitude_vector(normalize(superpose(d))));
    INFO(print_term(t));
    REQUIRE(register_close(machine, rewriting, 1e-6));
    ++compared;
  }
  CHECK(compared == 60);
}

TEST_CASE("bad budgets are rejected") {
  CHECK_THROWS_AS(generate_term(0, 0, 3), QlamError);
  CHECK_THROWS_AS(generate_term(0, 3, 0), QlamError);
}
