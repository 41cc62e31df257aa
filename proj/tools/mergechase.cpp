#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mergechase/json_io.hpp"
#include "mergechase/oracle.hpp"
#include "mergechase/parser.hpp"

using namespace mergechase;

namespace {

// Bad input files and flags; exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Program load_program(const std::string& path) {
  std::string text = slurp(path);
  try {
    return parse_program(text);
  } catch (const ParseError& e) {
    throw ParseError(path + ":" + std::string(e.what()), e.line(), e.column());
  }
}

void emit(const Json& j) { std::cout << j.dump(2) << "\n"; }

struct StrategyFlags {
  std::string strategy = "fair";
  std::uint64_t seed = 0;
  std::size_t max_steps = kDefaultMaxSteps;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--strategy", strategy, "fair or scripted=<script file>");
    cmd->add_option("--seed", seed, "fair-order seed (0 keeps declaration order)");
    cmd->add_option("--max-steps", max_steps, "step budget");
  }

  Strategy build() const {
    if (strategy == "fair") return Strategy::fair(seed);
    const std::string prefix = "scripted=";
    if (strategy.rfind(prefix, 0) == 0) {
      return Strategy::scripted(parse_script(slurp(strategy.substr(prefix.size()))));
    }
    throw UsageError("--strategy must be fair or scripted=<file>");
  }
};

void warn_termination(const KnowledgeBase& kb) {
  if (!full_tgd_guarantee(kb)) {
    std::cerr << "warning: some tgd has existential variables; the chase may not terminate\n";
  }
}

const ConjunctiveQuery& need_query(const Program& p, const std::string& name) {
  const ConjunctiveQuery* q = p.find_query(name);
  if (!q) throw UsageError("no query named " + name);
  return *q;
}

int cmd_chase(const std::string& file, const StrategyFlags& flags, const std::string& trace,
              const std::string& trace_format, const std::string& out) {
  Program p = load_program(file);
  warn_termination(p.kb);
  ChaseSequence seq = run_chase(p.kb, flags.build(), flags.max_steps);
  const auto& sy = p.kb.symbols;
  if (!trace.empty()) {
    std::ofstream t(trace, std::ios::binary);
    if (!t) throw UsageError("cannot write " + trace);
    if (trace_format == "pretty") {
      write_trace_pretty(t, sy, seq);
    } else {
      write_trace_jsonl(t, sy, seq);
    }
  }
  Json j;
  j["status"] = status_name(seq.status);
  j["steps"] = seq.steps();
  if (!out.empty()) {
    std::ofstream o(out, std::ios::binary);
    if (!o) throw UsageError("cannot write " + out);
    o << instance_to_json(sy, seq.final).dump(2) << "\n";
  } else {
    j["instance"] = instance_to_json(sy, seq.final);
  }
  emit(j);
  std::cerr << status_name(seq.status) << " after " << seq.steps() << " steps\n";
  return seq.status == ChaseStatus::Terminated ? 0 : 1;
}

int cmd_certain(const std::string& file, const std::string& query, const StrategyFlags& flags) {
  Program p = load_program(file);
  const auto& q = need_query(p, query);
  warn_termination(p.kb);
  AnswerSet a = certain_answers(p.kb, q, flags.build(), flags.max_steps);
  emit(answers_to_json(p.kb.symbols, a));
  return 0;
}

AnswerStage parse_stage(const std::string& s) {
  if (s == "raw") return AnswerStage::Raw;
  if (s == "null-free") return AnswerStage::NullFree;
  if (s == "reduced") return AnswerStage::Reduced;
  throw UsageError("--stage must be raw, null-free or reduced");
}

int cmd_eval(const std::string& file, const std::string& query, const std::string& instance,
             const std::string& stage) {
  Program p = load_program(file);
  const auto& q = need_query(p, query);
  AnswerStage want = parse_stage(stage);
  Instance i = load_instance(instance, p.kb);
  AnswerSet a = evaluate(q, p.kb.symbols, i);
  if (want != AnswerStage::Raw) a = drop_nulls(a);
  if (want == AnswerStage::Reduced) a = reduce(a);
  emit(answers_to_json(p.kb.symbols, a));
  return 0;
}

int cmd_check_hom(const std::string& a_path, const std::string& b_path, const std::string& kb_file) {
  // With a rule file both sides get its built-in facts.
  Program p;
  if (!kb_file.empty()) p = load_program(kb_file);
  SymbolTable& sy = p.kb.symbols;
  Instance a = kb_file.empty() ? instance_from_json(read_json_file(a_path), sy, true) : load_instance(a_path, p.kb);
  Instance b = kb_file.empty() ? instance_from_json(read_json_file(b_path), sy, true) : load_instance(b_path, p.kb);
  auto h = find_homomorphism(a, b);
  Json j;
  j["homomorphism"] = h.has_value();
  if (h) {
    Json m = Json::object();
    for (const auto& [from, to] : h->nulls) m[sy.render(from)] = sy.render(to);
    j["mapping"] = m;
  }
  emit(j);
  std::cerr << (h ? "homomorphism found\n" : "no homomorphism\n");
  return h ? 0 : 1;
}

int cmd_validate(const std::string& file, const std::string& instance) {
  Program p = load_program(file);
  Instance i = load_instance(instance, p.kb);
  bool ok = naive_is_solution(p.kb, i);
  Json j;
  j["solution"] = ok;
  if (!ok) {
    Json why = Json::array();
    if (!satisfies_database(i, p.kb).satisfied) why.push_back("database");
    for (const auto& r : p.kb.tbox) {
      if (!satisfies_rule(i, p.kb.symbols, r).satisfied) why.push_back(r.id);
    }
    j["violated"] = why;
  }
  emit(j);
  std::cerr << (ok ? "solution\n" : "not a solution\n");
  return ok ? 0 : 1;
}

int cmd_persistent(const std::string& trace, std::size_t from) {
  std::ifstream in(trace, std::ios::binary);
  if (!in) throw UsageError("cannot read " + trace);
  SymbolTable sy;
  ChaseSequence seq = read_trace_jsonl(in, sy);
  if (from > seq.steps()) {
    throw UsageError("--from " + std::to_string(from) + " exceeds the " + std::to_string(seq.steps()) +
                     " recorded steps");
  }
  Json facts = Json::array();
  for (const auto& f : persistent_facts(seq, from)) facts.push_back(fact_to_json(sy, f));
  Json j;
  j["from"] = from;
  j["facts"] = facts;
  emit(j);
  return 0;
}

int cmd_fuzz(std::uint64_t seed, std::size_t cases, const std::string& repro_dir) {
  FuzzReport r = fuzz(seed, cases, repro_dir);
  Json j;
  j["cases"] = r.cases_run;
  if (r.failing_seed) {
    j["failing_seed"] = *r.failing_seed;
    j["message"] = r.message;
    j["repro"] = r.repro_path;
  } else {
    j["failing_seed"] = nullptr;
  }
  emit(j);
  return r.failing_seed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entity-resolution chase over knowledge bases with merges"};
  app.require_subcommand(1);

  std::string file, query, instance, trace, trace_format = "jsonl", out, stage = "reduced";
  std::string a_path, b_path, repro_dir = ".";
  std::size_t from = 0, cases = 100;
  std::uint64_t fuzz_seed = 0;
  StrategyFlags flags;

  auto* chase = app.add_subcommand("chase", "run the chase and print the final instance");
  chase->add_option("file", file, "rule file")->required();
  flags.add_to(chase);
  chase->add_option("--trace", trace, "write the step trace here");
  chase->add_option("--trace-format", trace_format, "jsonl (alias json) or pretty")
      ->check(CLI::IsMember({"jsonl", "json", "pretty"}));
  chase->add_option("--out", out, "write the final instance here instead of stdout");

  auto* certain = app.add_subcommand("certain", "certain answers of a query");
  certain->add_option("file", file, "rule file")->required();
  certain->add_option("--query", query)->required();
  flags.add_to(certain);

  auto* eval = app.add_subcommand("eval", "evaluate a query on an instance");
  eval->add_option("file", file, "rule file")->required();
  eval->add_option("--query", query)->required();
  eval->add_option("--instance", instance)->required();
  eval->add_option("--stage", stage, "raw, null-free or reduced");

  auto* hom = app.add_subcommand("check-hom", "search for a homomorphism between two instances");
  hom->add_option("from", a_path)->required();
  hom->add_option("to", b_path)->required();
  hom->add_option("--kb", file, "rule file supplying predicates and built-ins");

  auto* validate = app.add_subcommand("validate", "check that an instance is a solution");
  validate->add_option("file", file, "rule file")->required();
  validate->add_option("--instance", instance)->required();

  auto* persistent = app.add_subcommand("persistent", "facts that persist in a recorded trace");
  persistent->add_option("trace", trace, "JSON lines trace")->required();
  persistent->add_option("--from", from);

  auto* fz = app.add_subcommand("fuzz", "differential checks on generated knowledge bases");
  fz->add_option("--seed", fuzz_seed);
  fz->add_option("--cases", cases);
  fz->add_option("--repro-dir", repro_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*chase) return cmd_chase(file, flags, trace, trace_format, out);
    if (*certain) return cmd_certain(file, query, flags);
    if (*eval) return cmd_eval(file, query, instance, stage);
    if (*hom) return cmd_check_hom(a_path, b_path, file);
    if (*validate) return cmd_validate(file, instance);
    if (*persistent) return cmd_persistent(trace, from);
    if (*fz) return cmd_fuzz(fuzz_seed, cases, repro_dir);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvariantError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
