#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mergechase/builtins.hpp"
#include "mergechase/kb.hpp"

namespace mergechase {

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct Program {
  KnowledgeBase kb;
  std::vector<ConjunctiveQuery> queries;

  const ConjunctiveQuery* find_query(std::string_view name) const;
};

// Parses a rule file. Lexical, syntactic and typing errors become
// ParseError with the position of the offending statement or token.
Program parse_program(std::string_view text,
                      const BuiltinRegistry& registry = BuiltinRegistry::standard());

std::string serialize(const KnowledgeBase& kb, const std::vector<ConjunctiveQuery>& queries = {});

// One canonical fact such as `CI([Doe1, Doe2], {"J. Doe"}, {"358"})`,
// interpreted against the predicates of `symbols` (interning new constants).
Fact parse_fact_text(std::string_view text, SymbolTable& symbols);

}  // namespace mergechase
