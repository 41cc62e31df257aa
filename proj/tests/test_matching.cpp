#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"

using namespace mctest;

namespace {

struct Fixture {
  Program p = load("running_example.kb");
  Instance printed = load_instance(test_path("golden/I_prime.json"), p.kb);
  Instance closed = load_instance(test_path("golden/I_prime_closed.json"), p.kb);

  SymbolTable& sy() { return p.kb.symbols; }
  CompiledRule rule(const char* id) { return compile_rule(sy(), *p.kb.find_rule(id)); }
  Cell values(std::initializer_list<const char*> xs) {
    std::vector<Sym> out;
    for (const char* x : xs) out.push_back(sy().intern_string(x));
    return Cell(out);
  }
};

}  // namespace

TEST(Tau, SetVariablesPerOccurrence) {
  Fixture fx;
  const auto& t = fx.rule("r6").body;
  ASSERT_EQ(t.set_vars.size(), 4u);
  EXPECT_EQ(t.set_vars_of.at("f"), (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(t.set_var_name(1), "S1^f");
  EXPECT_EQ(t.set_var_name(3), "S2^f");
  EXPECT_EQ(t.entity_vars, (std::vector<std::string>{"p1", "p2"}));
  EXPECT_EQ(fx.rule("r6").frontier, (std::vector<std::string>{"p1", "p2", "f"}));
}

TEST(Assignments, SameHouseBodyOnSolution) {
  Fixture fx;
  auto r6 = fx.rule("r6");
  auto all = enumerate_assignments(fx.printed, r6.body);
  ASSERT_EQ(all.size(), 4u);
  Cell both = fx.values({"358", "635"}), one = fx.values({"358"});
  auto mixed = std::find_if(all.begin(), all.end(), [&](const Assignment& mu) {
    return mu.set_vars[1] == both && mu.set_vars[3] == one;
  });
  ASSERT_NE(mixed, all.end());
  EXPECT_EQ(mixed->value_of(r6.body, "f"), one);

  auto ext = check_tgd_extension(fx.printed, r6, *mixed);
  ASSERT_TRUE(ext);
  EXPECT_EQ(ext->set_vars[0], one);
  EXPECT_FALSE(is_trigger(fx.printed, r6, *mixed));
}

TEST(Assignments, ConstantsAndBuiltins) {
  Fixture fx;
  Instance base = base_instance(fx.p.kb);
  auto r1 = fx.rule("r1");
  auto all = enumerate_assignments(base, r1.body);
  // Doe1/Doe2 both ways plus every CI fact paired with itself.
  EXPECT_EQ(all.size(), 5u);
  std::size_t triggers = 0;
  for (const auto& mu : all) triggers += is_trigger(base, r1, mu);
  EXPECT_EQ(triggers, 2u);
}

TEST(Assignments, SerialMatchesParallel) {
  Fixture fx;
  for (const auto& r : fx.p.kb.tbox) {
    auto c = compile_rule(fx.sy(), r);
    for (const Instance* i : {&fx.printed, &fx.closed}) {
      EXPECT_EQ(enumerate_assignments_serial(*i, c.body), enumerate_assignments_parallel(*i, c.body)) << r.id;
    }
  }
}

TEST(Assignments, EngineMatchesBruteForce) {
  Fixture fx;
  Instance base = base_instance(fx.p.kb);
  for (const auto& r : fx.p.kb.tbox) {
    for (const Instance* i : {&base, &fx.printed, &fx.closed}) {
      auto naive = naive_assignments(fx.sy(), *i, r.body);
      auto engine = enumerate_assignments(*i, tau(fx.sy(), r.body));
      EXPECT_EQ(naive.size(), engine.size()) << r.id;
    }
  }
}

TEST(Satisfaction, Solutions) {
  Fixture fx;
  for (const auto& r : fx.p.kb.tbox) {
    EXPECT_TRUE(satisfies_rule(fx.closed, fx.sy(), r).satisfied) << r.id;
  }
  EXPECT_TRUE(is_solution(fx.closed, fx.p.kb));
  EXPECT_TRUE(satisfies_database(fx.printed, fx.p.kb).satisfied);
  // The printed instance lacks the reflexive SameHouse facts.
  auto r6 = satisfies_rule(fx.printed, fx.sy(), *fx.p.kb.find_rule("r6"));
  EXPECT_FALSE(r6.satisfied);
  ASSERT_TRUE(r6.violation);
  EXPECT_EQ(r6.violation->image[0], r6.violation->image[1]);

  Instance base = base_instance(fx.p.kb);
  EXPECT_FALSE(satisfies_rule(base, fx.sy(), fx.p.kb.tbox[0]).satisfied);
  EXPECT_FALSE(is_solution(base, fx.p.kb));
  Instance empty;
  auto db = satisfies_database(empty, fx.p.kb);
  EXPECT_FALSE(db.satisfied);
  EXPECT_TRUE(db.missing);
}

TEST(Homomorphism, NullFreeVariant) {
  Fixture fx;
  Instance no_e1 = load_instance(test_path("golden/I_prime_closed_no_e1.json"), fx.p.kb);
  auto h = find_homomorphism(fx.closed, no_e1);
  ASSERT_TRUE(h);
  EXPECT_EQ(fx.sy().render((*h)(make_sym(SymKind::EntityNull, 1))), "IBM");
  EXPECT_TRUE(verify_homomorphism(fx.closed, no_e1, *h));
  auto back = find_homomorphism(no_e1, fx.closed);
  ASSERT_TRUE(back);
  Homomorphism round = compose(*back, *h);
  EXPECT_TRUE(verify_homomorphism(no_e1, no_e1, round));

  Homomorphism wrong;
  wrong.nulls[make_sym(SymKind::EntityNull, 1)] = *fx.sy().find_entity("Yahoo");
  wrong.nulls[make_sym(SymKind::EntityNull, 2)] = make_sym(SymKind::EntityNull, 2);
  EXPECT_FALSE(verify_homomorphism(fx.closed, no_e1, wrong));

  // Nothing maps the closed instance into one missing a fact.
  EXPECT_FALSE(find_homomorphism(fx.closed, fx.printed));
}
