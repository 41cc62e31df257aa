#include <gtest/gtest.h>

#include "support.hpp"

using namespace mctest;

namespace {

std::string dumped(const Json& j) { return j.dump(2) + "\n"; }

std::string trace_text(const SymbolTable& sy, const ChaseSequence& seq) {
  std::ostringstream out;
  write_trace_jsonl(out, sy, seq);
  return out.str();
}

}  // namespace

TEST(Json, CellsAndFacts) {
  Program p = load("running_example.kb");
  auto& sy = p.kb.symbols;
  Fact f = parse_fact_text(R"(CI([Doe2, Doe1], {"J. Doe", "John Doe"}, {"358"}))", sy);
  Json j = fact_to_json(sy, f);
  EXPECT_EQ(j.dump(), R"({"pred":"CI","cells":[{"class":["Doe1","Doe2"]},{"values":["\"J. Doe\"","\"John Doe\""]},{"values":["\"358\""]}]})");
  EXPECT_EQ(fact_from_json(j, sy), f);
  EXPECT_THROW(fact_from_json(Json::parse(R"({"pred":"Nope","cells":[]})"), sy), FormatError);
  EXPECT_THROW(cell_from_json(Json::parse(R"({"class":[]})"), sy), FormatError);
  EXPECT_THROW(cell_from_json(Json::parse(R"([1])"), sy), FormatError);
}

TEST(Json, GoldenInstancesRoundTrip) {
  Program p = load("running_example.kb");
  for (const char* name : {"I_prime.json", "I_prime_closed.json", "I_prime_closed_no_e1.json"}) {
    std::string path = test_path(std::string("golden/") + name);
    Instance i = instance_from_json(read_json_file(path), p.kb.symbols);
    EXPECT_TRUE(dumped(instance_to_json(p.kb.symbols, i)) == slurp(path)) << name;
  }
  Program kp = load("kb_prime.kb");
  for (const char* name : {"kb_prime_I1.json", "kb_prime_I2.json"}) {
    std::string path = test_path(std::string("golden/") + name);
    Instance i = instance_from_json(read_json_file(path), kp.kb.symbols);
    EXPECT_TRUE(dumped(instance_to_json(kp.kb.symbols, i)) == slurp(path)) << name;
  }
}

TEST(Json, ClassListIsChecked) {
  SymbolTable sy;
  auto j = Json::parse(R"({"classes":[["A"]],"facts":[{"pred":"P","cells":[{"class":["A","B"]}]}]})");
  EXPECT_THROW(instance_from_json(j, sy, true), InvariantError);
  auto undeclared = Json::parse(R"({"classes":[["A"]],"facts":[{"pred":"P","cells":[{"class":["A"]}]}]})");
  SymbolTable fresh;
  EXPECT_THROW(instance_from_json(undeclared, fresh), FormatError);
  EXPECT_EQ(instance_from_json(undeclared, fresh, true).size(), 1u);
  EXPECT_THROW(read_json_file(test_path("data/diverging.kb")), FormatError);
}

TEST(Json, GoldenChasesReplay) {
  struct Case {
    const char* kb;
    const char* script;
    std::size_t budget;
    const char* trace;
  };
  for (const Case& c : {Case{"running_example.kb", "reference.script", kDefaultMaxSteps, "running_example_reference.jsonl"},
                        Case{"diverging.kb", "diverging.script", 7, "diverging_prefix.jsonl"},
                        Case{"diverging.kb", "diverging_r1r2.script", kDefaultMaxSteps, "diverging_r1r2.jsonl"}}) {
    Program p = load(c.kb);
    auto seq = run_chase(p.kb, Strategy::scripted(script(c.script)), c.budget);
    EXPECT_TRUE(trace_text(p.kb.symbols, seq) == slurp(test_path(std::string("golden/") + c.trace))) << c.trace;
  }
  Program p = load("running_example.kb");
  auto seq = run_chase(p.kb, Strategy::scripted(script("reference.script")));
  EXPECT_TRUE(dumped(instance_to_json(p.kb.symbols, seq.final)) == slurp(test_path("golden/running_example_final.json")));
  std::ostringstream pretty;
  write_trace_pretty(pretty, p.kb.symbols, seq);
  EXPECT_TRUE(pretty.str() == slurp(test_path("golden/running_example_reference.txt")));
}

TEST(Json, TraceRoundTrip) {
  Program p = load("running_example.kb");
  auto seq = run_chase(p.kb, Strategy::fair(5));
  std::string text = trace_text(p.kb.symbols, seq);
  SymbolTable fresh;
  std::istringstream in(text);
  auto back = read_trace_jsonl(in, fresh);
  EXPECT_EQ(back.steps(), seq.steps());
  EXPECT_EQ(back.status, seq.status);
  EXPECT_EQ(back.records[0].bindings.size(), seq.records[0].bindings.size());
  EXPECT_TRUE(trace_text(fresh, back) == text);
}

TEST(Json, TamperedTraceRejected) {
  std::istringstream in(slurp(test_path("golden/diverging_r1r2.jsonl")));
  std::string text = in.str();
  auto pos = text.find("\"final\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(text.find("\"1\"", pos), 3, "\"7\"");
  SymbolTable sy;
  std::istringstream bad(text);
  EXPECT_ANY_THROW(read_trace_jsonl(bad, sy));
  std::istringstream junk("{not json\n");
  EXPECT_THROW(read_trace_jsonl(junk, sy), FormatError);
}

TEST(Json, Answers) {
  Program p = load("running_example.kb");
  auto cert = certain_answers(p.kb, *p.find_query("q1"));
  Json j = answers_to_json(p.kb.symbols, cert);
  EXPECT_EQ(j.dump(), R"({"query":"q1","tuples":[[{"class":["Doe1","Doe2"]}]]})");
  auto back = answers_from_json(j, p.kb.symbols);
  EXPECT_EQ(back.query, "q1");
  EXPECT_EQ(back.tuples, cert.tuples);
}
