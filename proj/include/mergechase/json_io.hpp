#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "mergechase/query.hpp"

namespace mergechase {

using Json = nlohmann::ordered_json;

// Malformed or ill-shaped JSON input.
class FormatError : public Error {
 public:
  using Error::Error;
};

Json cell_to_json(const SymbolTable& symbols, const Cell& cell);
Cell cell_from_json(const Json& j, SymbolTable& symbols);
Json fact_to_json(const SymbolTable& symbols, const Fact& fact);
// Unknown predicates are an error unless `declare` is set, in which case
// they are added with argument types read off the cells.
Fact fact_from_json(const Json& j, SymbolTable& symbols, bool declare = false);

// {"classes": [[...], ...], "facts": [{"pred": ..., "cells": [...]}, ...]}
Json instance_to_json(const SymbolTable& symbols, const Instance& i);
// Rebuilds the instance and checks the listed classes against it.
Instance instance_from_json(const Json& j, SymbolTable& symbols, bool declare = false);

// Reads an instance file for `kb` and adds the built-in facts of the KB.
// Constants unknown to the KB are interned into its symbol table.
Instance load_instance(const std::string& path, KnowledgeBase& kb);
Json read_json_file(const std::string& path);

Json answers_to_json(const SymbolTable& symbols, const AnswerSet& a);
AnswerSet answers_from_json(const Json& j, SymbolTable& symbols);

// JSON lines: {"initial": I0}, one object per step, {"final": Im, ...}.
void write_trace_jsonl(std::ostream& out, const SymbolTable& symbols, const ChaseSequence& seq);
ChaseSequence read_trace_jsonl(std::istream& in, SymbolTable& symbols);
void write_trace_pretty(std::ostream& out, const SymbolTable& symbols, const ChaseSequence& seq);

}  // namespace mergechase
