#include <gtest/gtest.h>

#include "support.hpp"

using namespace mctest;

namespace {

int error_line(const std::string& text) {
  try {
    parse_program(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(Parser, RunningExample) {
  Program p = load("running_example.kb");
  ASSERT_EQ(p.kb.tbox.size(), 6u);
  EXPECT_EQ(p.kb.tbox[0].kind, RuleKind::EntityEgd);
  EXPECT_EQ(p.kb.tbox[1].kind, RuleKind::ValueEgd);
  EXPECT_EQ(p.kb.tbox[3].kind, RuleKind::Tgd);
  EXPECT_EQ(p.kb.tbox[3].existentials, (std::vector<std::string>{"c", "d"}));
  EXPECT_EQ(p.kb.database.size(), 6u);
  ASSERT_EQ(p.queries.size(), 2u);
  ASSERT_NE(p.find_query("q1"), nullptr);
  EXPECT_EQ(p.find_query("q")->existentials.size(), 2u);
  EXPECT_EQ(p.find_query("zz"), nullptr);
  EXPECT_EQ(p.kb.symbols.predicate(*p.kb.symbols.find_predicate("jacc_sim")).kind, PredKind::BuiltIn);
}

TEST(Parser, SerializeRoundTrip) {
  for (const char* name : {"running_example.kb", "diverging.kb", "kb_prime.kb"}) {
    Program p = load(name);
    std::string text = serialize(p.kb, p.queries);
    Program back = parse_program(text);
    EXPECT_TRUE(back.kb == p.kb) << name;
    EXPECT_EQ(back.queries.size(), p.queries.size());
    EXPECT_EQ(serialize(back.kb, back.queries), text) << name;
  }
}

TEST(Parser, EntityConstantsInRules) {
  Program p = parse_program(
      "pred P(e, v).\n"
      "eegd r: P(x, 1), P(@Acme, 1), P(y, 1) -> x = y.\n"
      "fact P(Acme, 1).\n");
  const Atom& a = p.kb.tbox[0].body[1];
  ASSERT_FALSE(a.args[0].is_var());
  EXPECT_EQ(p.kb.symbols.render(a.args[0].constant), "Acme");
  EXPECT_NE(serialize(p.kb).find("@Acme"), std::string::npos);
}

TEST(Parser, ErrorsCarryPositions) {
  EXPECT_EQ(error_line("pred P(e).\nfact P(\"x\")."), 2);
  EXPECT_EQ(error_line("pred P(e).\n\nfact Q(a)."), 3);
  EXPECT_EQ(error_line("pred P(e, e).\nfact P(a)."), 2);
  EXPECT_EQ(error_line("pred P(e).\ntgd t: P(x) -> P(@A)."), 2);
  EXPECT_EQ(error_line("pred P(v).\nbuiltin jacc_sim(v, v, v).\ntgd t: P(x) -> jacc_sim(x, x, x)."), 3);
  EXPECT_EQ(error_line("builtin nope(v)."), 1);
  EXPECT_EQ(error_line("builtin jacc_sim(v, v)."), 1);
  EXPECT_EQ(error_line("builtin eq(v, v)."), 1);
  EXPECT_EQ(error_line("pred P(e)\nfact P(a)."), 2);
  EXPECT_EQ(error_line("pred P(e).\nvegd r: P(x), P(y) -> x = y."), 2);
  EXPECT_EQ(error_line("pred P(e).\nquery q(z): P(x)."), 2);
  try {
    parse_program("pred P(e).\nfact P(\"unterminated).");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_GT(e.column(), 1);
    EXPECT_NE(std::string(e.what()).find("2:"), std::string::npos);
  }
}

TEST(Parser, FactText) {
  Program p = load("running_example.kb");
  auto& sy = p.kb.symbols;
  Fact f = parse_fact_text("CI([Doe2, Doe1], {\"John Doe\", \"J. Doe\"}, 358)", sy);
  EXPECT_EQ(render_fact(sy, f), "CI([Doe1, Doe2], {\"J. Doe\", \"John Doe\"}, {358})");
  Fact g = parse_fact_text("CEO(e⊥1, [e⊥2])", sy);
  EXPECT_EQ(render_fact(sy, g), "CEO([e⊥1], [e⊥2])");
  EXPECT_ANY_THROW(parse_fact_text("Nope(a)", sy));
  EXPECT_ANY_THROW(parse_fact_text("CEO([a], [b]", sy));
}

TEST(Parser, Scripts) {
  auto steps = parse_script(
      "# comment\n\n"
      "step r1 image CI([Doe1], {\"a, b\"}, {\"358\"}), #2\n"
      "step r2 image #1\n");
  ASSERT_EQ(steps.size(), 2u);
  EXPECT_EQ(steps[0].rule_id, "r1");
  EXPECT_EQ(steps[0].selectors, (std::vector<std::string>{"CI([Doe1], {\"a, b\"}, {\"358\"})", "#2"}));
  EXPECT_EQ(steps[0].line, 3);
  EXPECT_THROW(parse_script("apply r1 image #1"), ScriptError);
  EXPECT_THROW(parse_script("step r1 #1"), ScriptError);
  EXPECT_THROW(parse_script("step r1 image "), ScriptError);
}
