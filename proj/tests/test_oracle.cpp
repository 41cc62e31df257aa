#include <gtest/gtest.h>

#include <filesystem>

#include "support.hpp"

using namespace mctest;

TEST(Oracle, NaiveSolutionCheck) {
  Program p = load("running_example.kb");
  EXPECT_TRUE(naive_is_solution(p.kb, load_instance(test_path("golden/I_prime_closed.json"), p.kb)));
  EXPECT_TRUE(naive_is_solution(p.kb, load_instance(test_path("golden/I_prime_closed_no_e1.json"), p.kb)));
  EXPECT_FALSE(naive_is_solution(p.kb, load_instance(test_path("golden/I_prime.json"), p.kb)));
  EXPECT_FALSE(naive_is_solution(p.kb, base_instance(p.kb)));

  Program kp = load("kb_prime.kb");
  EXPECT_TRUE(naive_is_solution(kp.kb, load_instance(test_path("golden/kb_prime_I1.json"), kp.kb)));
  EXPECT_TRUE(naive_is_solution(kp.kb, load_instance(test_path("golden/kb_prime_I2.json"), kp.kb)));
}

TEST(Oracle, NaiveBound) {
  Program p = load("running_example.kb");
  Instance i = base_instance(p.kb);
  EXPECT_THROW(naive_assignments(p.kb.symbols, i, p.kb.tbox[0].body, 10), OracleBoundError);
}

TEST(Oracle, CorpusAndCertainAnswers) {
  Program p = load("running_example.kb");
  Instance extra = load_instance(test_path("golden/I_prime_closed_no_e1.json"), p.kb);
  auto corpus = solution_corpus(p.kb, 3, {extra});
  ASSERT_EQ(corpus.size(), 4u);
  const auto& q1 = *p.find_query("q1");
  auto cert = certain_answers(p.kb, q1);
  EXPECT_TRUE(check_certain_against_corpus(p.kb, q1, cert.tuples, corpus).ok);

  auto& sy = p.kb.symbols;
  Sym d1 = *sy.find_entity("Doe1"), d2 = *sy.find_entity("Doe2"), d3 = *sy.find_entity("Doe3");
  auto wrong = check_certain_against_corpus(p.kb, q1, {{Cell({d1, d2})}, {Cell({d3})}}, corpus);
  EXPECT_FALSE(wrong.ok);
  ASSERT_TRUE(wrong.counterexample);
  EXPECT_EQ(*wrong.counterexample, std::vector<Cell>{Cell({d3})});
  // Not maximal: {Doe1} can be enlarged to {Doe1, Doe2}.
  EXPECT_FALSE(check_certain_against_corpus(p.kb, q1, {{Cell({d1})}}, corpus).ok);

  Instance printed = load_instance(test_path("golden/I_prime.json"), p.kb);
  EXPECT_THROW(solution_corpus(p.kb, 1, {printed}), CorpusError);
  EXPECT_THROW(solution_corpus(load("diverging.kb").kb, 1, {}, 20), CorpusError);
}

TEST(Generator, DeterministicAndWellFormed) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    KbGeneratorConfig cfg;
    cfg.seed = seed;
    auto a = generate_kb(cfg);
    auto b = generate_kb(cfg);
    EXPECT_EQ(serialize(a.kb, a.queries), serialize(b.kb, b.queries));
    EXPECT_NO_THROW(check_kb(a.kb));
    for (const auto& q : a.queries) EXPECT_NO_THROW(check_query(a.kb.symbols, q));
    EXPECT_LE(a.kb.database.size(), cfg.max_facts);
    EXPECT_LE(a.kb.tbox.size(), cfg.max_rules);
  }
  KbGeneratorConfig x, y;
  y.seed = 1;
  EXPECT_NE(serialize(generate_kb(x).kb), serialize(generate_kb(y).kb));
}

TEST(Fuzz, DefaultPropertiesHold) {
  auto report = fuzz(0, 60, testing::TempDir());
  EXPECT_EQ(report.cases_run, 60u);
  EXPECT_FALSE(report.failing_seed) << report.message;
}

TEST(Fuzz, ShrinksAndWritesRepro) {
  // Fails whenever some rule is present.
  FuzzCheck check = [](const GeneratedKb& g) -> std::optional<std::string> {
    if (g.kb.tbox.empty()) return std::nullopt;
    return "has rules";
  };
  KbGeneratorConfig cfg;
  GeneratedKb g = generate_kb(cfg);
  while (g.kb.tbox.empty() && cfg.seed < 50) {
    ++cfg.seed;
    g = generate_kb(cfg);
  }
  ASSERT_FALSE(g.kb.tbox.empty());
  auto small = shrink_case(g, check);
  EXPECT_EQ(small.kb.tbox.size(), 1u);
  EXPECT_TRUE(small.kb.database.empty());
  EXPECT_TRUE(small.queries.empty());

  std::string dir = testing::TempDir();
  auto report = fuzz(0, 20, dir, {}, check);
  ASSERT_TRUE(report.failing_seed);
  EXPECT_EQ(report.message, "has rules");
  ASSERT_TRUE(std::filesystem::exists(report.repro_path));
  Program repro = parse_program(slurp(report.repro_path));
  EXPECT_EQ(repro.kb.tbox.size(), 1u);
}
