#include <gtest/gtest.h>

#include "support.hpp"

using namespace mctest;

TEST(Symbols, DecimalsInternByValue) {
  EXPECT_EQ(canonical_decimal("0.60"), "0.6");
  EXPECT_EQ(canonical_decimal("007"), "7");
  EXPECT_EQ(canonical_decimal("-0.0"), "0");
  EXPECT_FALSE(canonical_decimal("1e3"));
  EXPECT_FALSE(canonical_decimal(".5"));
  EXPECT_LT(compare_decimal("0.6", "0.625"), 0);
  EXPECT_GT(compare_decimal("10", "9.99"), 0);

  SymbolTable sy;
  EXPECT_EQ(sy.intern_number("0.60"), sy.intern_number("0.6"));
  EXPECT_NE(sy.intern_number("358"), sy.intern_string("358"));
  EXPECT_THROW(sy.intern_number("abc"), std::invalid_argument);
}

TEST(Symbols, TokensRoundTrip) {
  SymbolTable sy;
  Sym doe = sy.intern_entity("Doe1");
  Sym name = sy.intern_string("J. \"Doe\"");
  Sym n = sy.intern_number("0.6");
  Sym e3 = make_sym(SymKind::EntityNull, 3);
  Sym v2 = make_sym(SymKind::ValueNull, 2);
  for (Sym s : {doe, e3}) EXPECT_EQ(sy.parse_token(sy.render(s), ArgType::Entity), s);
  for (Sym s : {name, n, v2}) EXPECT_EQ(sy.parse_token(sy.render(s), ArgType::Value), s);
  EXPECT_EQ(sy.render(e3), "e⊥3");
  EXPECT_EQ(sy.render(v2), "v⊥2");
  EXPECT_EQ(sy.render(n), "0.6");
  EXPECT_THROW(sy.parse_token("e⊥x", ArgType::Entity), std::invalid_argument);
}

TEST(Symbols, OutputOrder) {
  SymbolTable sy;
  Sym b = sy.intern_entity("B");
  Sym a = sy.intern_entity("A");
  Sym null = make_sym(SymKind::EntityNull, 1);
  EXPECT_TRUE(sy.output_less(a, b));
  EXPECT_TRUE(sy.output_less(b, null));
  Sym s = sy.intern_string("z");
  Sym num = sy.intern_number("1");
  EXPECT_TRUE(sy.output_less(s, num));
}

TEST(Cells, SortedSetsAndDominance) {
  Cell c({5, 1, 5, 3});
  EXPECT_EQ(c.members, (std::vector<Sym>{1, 3, 5}));
  EXPECT_TRUE(Cell({1}).subset_of(c));
  EXPECT_TRUE(c.intersects(Cell({3, 9})));
  EXPECT_FALSE(c.intersects(Cell({2})));
  EXPECT_EQ(cell_intersection(c, Cell({3, 5, 7})).members, (std::vector<Sym>{3, 5}));
  EXPECT_EQ(cell_union(Cell({2}), Cell({1})).members, (std::vector<Sym>{1, 2}));

  Sym v1 = make_sym(SymKind::Value, 1), v2 = make_sym(SymKind::Value, 2);
  std::vector<Cell> small{Cell({v1})}, big{Cell({v1, v2})}, other{Cell({v2})};
  EXPECT_EQ(compare_tuples(small, big), Dominance::DominatedBy);
  EXPECT_EQ(compare_tuples(big, small), Dominance::Dominates);
  EXPECT_EQ(compare_tuples(small, small), Dominance::Equal);
  EXPECT_EQ(compare_tuples(small, other), Dominance::Incomparable);
  std::vector<Cell> two{Cell({v1}), Cell({v1})};
  EXPECT_THROW(compare_tuples(small, two), std::invalid_argument);
}

TEST(Instance, ClassesStayCoherent) {
  Program p = load("running_example.kb");
  auto& sy = p.kb.symbols;
  Instance i = instance_of(sy, {"Emp([Doe1, Doe2], [Yahoo])"});
  EXPECT_FALSE(i.insert(parse_fact_text("Emp([Doe1, Doe2], [Yahoo])", sy)));
  EXPECT_TRUE(i.insert(parse_fact_text("CEO([Yahoo], [Doe1, Doe2])", sy)));
  EXPECT_THROW(i.insert(parse_fact_text("CEO([Yahoo], [Doe1])", sy)), InvariantError);
  EXPECT_EQ(i.class_of(*sy.find_entity("Doe2")), Cell({*sy.find_entity("Doe1"), *sy.find_entity("Doe2")}));
  EXPECT_FALSE(i.class_of(*sy.find_entity("Doe3")));
}

TEST(Instance, MergeCollapsesDuplicates) {
  Program p = load("running_example.kb");
  auto& sy = p.kb.symbols;
  Instance i = instance_of(sy, {"Emp([Doe1], [Yahoo])", "Emp([Doe2], [Yahoo])", "Emp([Doe3], [IBM])"});
  auto delta = i.merge_entity_classes(*i.class_of(*sy.find_entity("Doe1")), *i.class_of(*sy.find_entity("Doe2")));
  EXPECT_EQ(delta.removed.size(), 2u);
  EXPECT_EQ(delta.added.size(), 1u);
  EXPECT_EQ(kb_facts(sy, i), (std::set<std::string>{"Emp([Doe1, Doe2], [Yahoo])", "Emp([Doe3], [IBM])"}));
  EXPECT_EQ(i.classes().size(), 4u);
}

TEST(Instance, DomainsOfTheSolutionInstance) {
  Program p = load("running_example.kb");
  Instance i = load_instance(test_path("golden/I_prime.json"), p.kb);
  auto& sy = p.kb.symbols;
  std::set<std::string> classes;
  for (const auto& c : active_domain(i).entity_classes) classes.insert(render_cell(sy, c));
  EXPECT_EQ(classes, (std::set<std::string>{"[Doe1, Doe2]", "[Doe3]", "[Yahoo]", "[IBM, e⊥1]", "[e⊥2]"}));
  std::set<std::string> under;
  for (Sym s : underlying_domain(i).entities) under.insert(sy.render(s));
  EXPECT_EQ(under, (std::set<std::string>{"Doe1", "Doe2", "Doe3", "Yahoo", "IBM", "e⊥1", "e⊥2"}));
  EXPECT_EQ(max_null_indices(i), std::make_pair(2u, 0u));
}

TEST(KnowledgeBase, BaseInstanceHasDatabaseAndBuiltins) {
  Program p = load("running_example.kb");
  Instance base = base_instance(p.kb);
  EXPECT_EQ(kb_facts(p.kb.symbols, base).size(), 6u);
  EXPECT_EQ(base.size(), 13u);
  for (const auto& c : base.classes()) EXPECT_EQ(c.size(), 1u);
}

TEST(KnowledgeBase, RuleChecks) {
  Program p = load("running_example.kb");
  auto& sy = p.kb.symbols;
  EXPECT_NO_THROW(check_kb(p.kb));
  PredId ci = *sy.find_predicate("CI");
  Rule bad{"b", RuleKind::EntityEgd, {Atom{ci, {Term::variable("p"), Term::variable("n"), Term::variable("f")}}},
           {}, {}, "p", "n"};
  EXPECT_THROW(check_rule(sy, bad), SchemaError);
  GroundAtom ill{ci, {sy.intern_string("x"), sy.intern_string("y"), sy.intern_string("z")}};
  EXPECT_THROW(check_ground_atom(sy, ill), SchemaError);
  EXPECT_EQ(variable_type(sy, p.kb.tbox[0].body, "n1"), ArgType::Value);
  EXPECT_THROW(variable_type(sy, p.kb.tbox[0].body, "nope"), SchemaError);
}

TEST(KnowledgeBase, TerminationGuarantee) {
  EXPECT_FALSE(full_tgd_guarantee(load("running_example.kb").kb));
  EXPECT_FALSE(full_tgd_guarantee(load("diverging.kb").kb));
  EXPECT_TRUE(full_tgd_guarantee(load("kb_prime.kb").kb));
}
