#include "mergechase/json_io.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "mergechase/builtins.hpp"
#include "mergechase/parser.hpp"

namespace mergechase {

namespace {

std::string dump(const Json& j, int indent = -1) {
  return j.dump(indent, ' ', false, Json::error_handler_t::strict);
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  return j.at(key);
}

const char* kind_tag(RuleKind k) { return rule_kind_name(k); }

}  // namespace

Json cell_to_json(const SymbolTable& symbols, const Cell& cell) {
  Json members = Json::array();
  for (Sym s : output_sorted(symbols, cell)) members.push_back(symbols.render(s));
  Json out = Json::object();
  out[cell.is_entity() ? "class" : "values"] = std::move(members);
  return out;
}

Cell cell_from_json(const Json& j, SymbolTable& symbols) {
  if (!j.is_object() || j.size() != 1) throw FormatError("a cell is {\"class\": [...]} or {\"values\": [...]}");
  ArgType type;
  const Json* members;
  if (j.contains("class")) {
    type = ArgType::Entity;
    members = &j.at("class");
  } else if (j.contains("values")) {
    type = ArgType::Value;
    members = &j.at("values");
  } else {
    throw FormatError("a cell is {\"class\": [...]} or {\"values\": [...]}");
  }
  if (!members->is_array() || members->empty()) throw FormatError("cell members must be a non-empty array");
  std::vector<Sym> ms;
  for (const auto& m : *members) {
    if (!m.is_string()) throw FormatError("cell members are strings");
    try {
      ms.push_back(symbols.parse_token(m.get<std::string>(), type));
    } catch (const std::invalid_argument& e) {
      throw FormatError(e.what());
    }
  }
  Cell c{std::move(ms)};
  if (c.size() != members->size()) throw FormatError("duplicate member in cell " + dump(j));
  return c;
}

Json fact_to_json(const SymbolTable& symbols, const Fact& fact) {
  Json cells = Json::array();
  for (const auto& c : fact.cells) cells.push_back(cell_to_json(symbols, c));
  Json out = Json::object();
  out["pred"] = symbols.predicate(fact.pred).name;
  out["cells"] = std::move(cells);
  return out;
}

Fact fact_from_json(const Json& j, SymbolTable& symbols, bool declare) {
  const Json& name = field(j, "pred");
  const Json& cells = field(j, "cells");
  if (!name.is_string() || !cells.is_array()) throw FormatError("bad fact " + dump(j));
  Fact f;
  for (const auto& c : cells) f.cells.push_back(cell_from_json(c, symbols));
  auto pred = symbols.find_predicate(name.get<std::string>());
  if (!pred) {
    if (!declare) throw FormatError("unknown predicate '" + name.get<std::string>() + "'");
    PredicateSignature sig{name.get<std::string>(), {}, PredKind::KB};
    for (const auto& c : f.cells) sig.types.push_back(c.is_entity() ? ArgType::Entity : ArgType::Value);
    pred = symbols.add_predicate(std::move(sig));
  }
  const auto& sig = symbols.predicate(*pred);
  if (sig.arity() != f.cells.size()) throw FormatError("wrong arity in " + dump(j));
  for (std::size_t k = 0; k < sig.arity(); ++k) {
    if (f.cells[k].is_entity() != (sig.types[k] == ArgType::Entity)) {
      throw FormatError("cell " + std::to_string(k + 1) + " has the wrong kind in " + dump(j));
    }
  }
  f.pred = *pred;
  return f;
}

Json instance_to_json(const SymbolTable& symbols, const Instance& i) {
  std::vector<std::string> classes;
  std::map<std::string, Json> by_text;
  for (const auto& c : i.classes()) {
    Json j = cell_to_json(symbols, c).at("class");
    by_text.emplace(render_cell(symbols, c), std::move(j));
  }
  Json cls = Json::array();
  for (auto& [_, j] : by_text) cls.push_back(std::move(j));
  Json facts = Json::array();
  for (const auto& f : listing_order(symbols, i)) facts.push_back(fact_to_json(symbols, f));
  Json out = Json::object();
  out["classes"] = std::move(cls);
  out["facts"] = std::move(facts);
  return out;
}

Instance instance_from_json(const Json& j, SymbolTable& symbols, bool declare) {
  const Json& facts = field(j, "facts");
  if (!facts.is_array()) throw FormatError("'facts' must be an array");
  Instance i;
  for (const auto& fj : facts) {
    Fact f = fact_from_json(fj, symbols, declare);
    if (!i.insert(f)) throw FormatError("duplicate fact " + render_fact(symbols, f));
  }
  if (j.contains("classes")) {
    std::set<Cell> listed;
    for (const auto& c : j.at("classes")) {
      Json wrapped = Json::object();
      wrapped["class"] = c;
      listed.insert(cell_from_json(wrapped, symbols));
    }
    auto actual = i.classes();
    if (listed != std::set<Cell>(actual.begin(), actual.end())) {
      throw InvariantError("listed classes do not match the entity cells of the facts");
    }
  }
  return i;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

Instance load_instance(const std::string& path, KnowledgeBase& kb) {
  Instance i = instance_from_json(read_json_file(path), kb.symbols);
  for (auto& f : materialize_builtin_facts(kb)) i.insert(std::move(f));
  return i;
}

Json answers_to_json(const SymbolTable& symbols, const AnswerSet& a) {
  std::map<std::string, Json> sorted;
  for (const auto& t : a.tuples) {
    Json row = Json::array();
    std::string key;
    for (const auto& c : t) {
      row.push_back(cell_to_json(symbols, c));
      key += render_cell(symbols, c) + "\x1f";
    }
    sorted.emplace(std::move(key), std::move(row));
  }
  Json tuples = Json::array();
  for (auto& [_, row] : sorted) tuples.push_back(std::move(row));
  Json out = Json::object();
  out["query"] = a.query;
  out["tuples"] = std::move(tuples);
  return out;
}

AnswerSet answers_from_json(const Json& j, SymbolTable& symbols) {
  AnswerSet a;
  a.query = field(j, "query").get<std::string>();
  for (const auto& row : field(j, "tuples")) {
    std::vector<Cell> t;
    for (const auto& c : row) t.push_back(cell_from_json(c, symbols));
    a.tuples.insert(std::move(t));
  }
  return a;
}

namespace {

// Sorted by canonical text so the output does not depend on intern order.
Json facts_json(const SymbolTable& symbols, const std::vector<Fact>& fs) {
  std::vector<std::pair<std::string, const Fact*>> keyed;
  for (const auto& f : fs) keyed.emplace_back(render_fact(symbols, f), &f);
  std::sort(keyed.begin(), keyed.end());
  Json out = Json::array();
  for (const auto& [key, f] : keyed) out.push_back(fact_to_json(symbols, *f));
  return out;
}

}  // namespace

void write_trace_jsonl(std::ostream& out, const SymbolTable& symbols, const ChaseSequence& seq) {
  Json first = Json::object();
  first["initial"] = instance_to_json(symbols, seq.initial);
  out << dump(first) << '\n';
  for (const auto& rec : seq.records) {
    Json j = Json::object();
    j["step"] = rec.index;
    j["rule"] = rec.rule_id;
    j["kind"] = kind_tag(rec.kind);
    Json image = Json::array();
    for (const auto& f : rec.assignment.image) image.push_back(render_fact(symbols, f));
    j["image"] = std::move(image);
    Json bindings = Json::object();
    for (const auto& [name, cell] : rec.bindings) bindings[name] = cell_to_json(symbols, cell);
    j["bindings"] = std::move(bindings);
    j["added"] = facts_json(symbols, rec.added);
    j["removed"] = facts_json(symbols, rec.removed);
    Json fresh = Json::array();
    for (Sym s : rec.fresh_nulls) fresh.push_back(null_name(s));
    j["fresh_nulls"] = std::move(fresh);
    out << dump(j) << '\n';
  }
  Json last = Json::object();
  last["final"] = instance_to_json(symbols, seq.final);
  last["status"] = status_name(seq.status);
  last["steps"] = seq.steps();
  out << dump(last) << '\n';
}

ChaseSequence read_trace_jsonl(std::istream& in, SymbolTable& symbols) {
  ChaseSequence seq;
  std::string line;
  bool have_initial = false;
  bool have_final = false;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw FormatError("trace line " + std::to_string(no) + ": " + e.what());
    }
    if (j.contains("initial")) {
      seq.initial = instance_from_json(j.at("initial"), symbols, true);
      have_initial = true;
    } else if (j.contains("final")) {
      seq.final = instance_from_json(j.at("final"), symbols, true);
      auto status = field(j, "status").get<std::string>();
      if (status == "Terminated") {
        seq.status = ChaseStatus::Terminated;
      } else if (status == "BudgetExhausted") {
        seq.status = ChaseStatus::BudgetExhausted;
      } else {
        throw FormatError("trace line " + std::to_string(no) + ": unknown status '" + status + "'");
      }
      have_final = true;
    } else {
      if (!have_initial) throw FormatError("trace line " + std::to_string(no) + ": step before initial instance");
      ChaseStepRecord rec;
      rec.index = field(j, "step").get<std::size_t>();
      rec.rule_id = field(j, "rule").get<std::string>();
      auto kind = field(j, "kind").get<std::string>();
      rec.kind = kind == "tgd" ? RuleKind::Tgd : kind == "eegd" ? RuleKind::EntityEgd : RuleKind::ValueEgd;
      for (const auto& f : field(j, "image")) {
        try {
          rec.assignment.image.push_back(parse_fact_text(f.get<std::string>(), symbols));
        } catch (const Error& e) {
          throw FormatError("trace line " + std::to_string(no) + ": " + e.what());
        }
      }
      for (const auto& [name, cell] : field(j, "bindings").items()) {
        rec.bindings.emplace_back(name, cell_from_json(cell, symbols));
      }
      for (const auto& n : field(j, "fresh_nulls")) {
        ArgType type = n.get<std::string>().rfind("e", 0) == 0 ? ArgType::Entity : ArgType::Value;
        try {
          rec.fresh_nulls.push_back(symbols.parse_token(n.get<std::string>(), type));
        } catch (const std::invalid_argument&) {
          throw FormatError("trace line " + std::to_string(no) + ": bad null " + n.dump());
        }
      }
      for (const auto& f : field(j, "added")) rec.added.push_back(fact_from_json(f, symbols, true));
      for (const auto& f : field(j, "removed")) rec.removed.push_back(fact_from_json(f, symbols, true));
      std::sort(rec.added.begin(), rec.added.end());
      std::sort(rec.removed.begin(), rec.removed.end());
      seq.records.push_back(std::move(rec));
    }
  }
  if (!have_initial || !have_final) throw FormatError("trace needs an initial and a final line");
  if (!(seq.instance_at(seq.steps()) == seq.final)) {
    throw InvariantError("trace steps do not lead to the recorded final instance");
  }
  return seq;
}

void write_trace_pretty(std::ostream& out, const SymbolTable& symbols, const ChaseSequence& seq) {
  auto listing = [&](const Instance& i) {
    for (const auto& f : listing_order(symbols, i)) out << "    " << render_fact(symbols, f) << '\n';
  };
  out << "I0 (" << seq.initial.size() << " facts)\n";
  listing(seq.initial);
  for (const auto& rec : seq.records) {
    out << "step " << rec.index << ": " << rec.rule_id << " (" << kind_tag(rec.kind) << ")\n";
    out << "  image:";
    for (const auto& f : rec.assignment.image) out << ' ' << render_fact(symbols, f);
    out << '\n';
    if (!rec.bindings.empty()) {
      out << "  bindings:";
      for (const auto& [name, cell] : rec.bindings) out << ' ' << name << '=' << render_cell(symbols, cell);
      out << '\n';
    }
    for (const auto& f : rec.removed) out << "  - " << render_fact(symbols, f) << '\n';
    for (const auto& f : rec.added) out << "  + " << render_fact(symbols, f) << '\n';
    if (!rec.fresh_nulls.empty()) {
      out << "  fresh:";
      for (Sym s : rec.fresh_nulls) out << ' ' << null_name(s);
      out << '\n';
    }
  }
  out << status_name(seq.status) << " after " << seq.steps() << " steps; final instance (" << seq.final.size()
      << " facts)\n";
  listing(seq.final);
}

}  // namespace mergechase
