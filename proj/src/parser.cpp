#include "mergechase/parser.hpp"

#include <cctype>
#include <set>

namespace mergechase {

namespace {

constexpr std::string_view kBottom = "\xE2\x8A\xA5";

enum class Tok : std::uint8_t {
  Ident, AtIdent, String, Number, Null,
  LParen, RParen, LBracket, RBracket, LBrace, RBrace,
  Comma, Dot, Colon, Equals, Arrow, End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;  // identifier name, decoded string, number or null spelling
  int line = 1;
  int column = 1;
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::AtIdent: return "entity constant";
    case Tok::String: return "string";
    case Tok::Number: return "number";
    case Tok::Null: return "null";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::Colon: return "':'";
    case Tok::Equals: return "'='";
    case Tok::Arrow: return "'->'";
    case Tok::End: return "end of input";
  }
  return "?";
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (ident_start(c)) {
        t.text = ident();
        if ((t.text == "e" || t.text == "v") && src_.substr(pos_, kBottom.size()) == kBottom) {
          advance(kBottom.size());
          std::string digits;
          while (pos_ < src_.size() && digit(src_[pos_])) digits.push_back(get());
          if (digits.empty()) throw ParseError("malformed null", t.line, t.column);
          t.kind = Tok::Null;
          t.text += std::string(kBottom) + digits;
        } else {
          t.kind = Tok::Ident;
        }
      } else if (c == '@') {
        get();
        if (pos_ >= src_.size() || !ident_start(src_[pos_])) {
          throw ParseError("expected a name after '@'", t.line, t.column);
        }
        t.kind = Tok::AtIdent;
        t.text = ident();
      } else if (c == '"') {
        t.kind = Tok::String;
        t.text = string_lit(t);
      } else if (digit(c) || (c == '-' && pos_ + 1 < src_.size() && digit(src_[pos_ + 1]))) {
        t.kind = Tok::Number;
        if (c == '-') t.text.push_back(get());
        while (pos_ < src_.size() && digit(src_[pos_])) t.text.push_back(get());
        if (pos_ + 1 < src_.size() && src_[pos_] == '.' && digit(src_[pos_ + 1])) {
          t.text.push_back(get());
          while (pos_ < src_.size() && digit(src_[pos_])) t.text.push_back(get());
        }
        if (pos_ < src_.size() && ident_char(src_[pos_])) {
          throw ParseError("malformed number", t.line, t.column);
        }
      } else if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
        advance(2);
        t.kind = Tok::Arrow;
      } else {
        get();
        switch (c) {
          case '(': t.kind = Tok::LParen; break;
          case ')': t.kind = Tok::RParen; break;
          case '[': t.kind = Tok::LBracket; break;
          case ']': t.kind = Tok::RBracket; break;
          case '{': t.kind = Tok::LBrace; break;
          case '}': t.kind = Tok::RBrace; break;
          case ',': t.kind = Tok::Comma; break;
          case '.': t.kind = Tok::Dot; break;
          case ':': t.kind = Tok::Colon; break;
          case '=': t.kind = Tok::Equals; break;
          default: {
            std::string shown = std::isprint(static_cast<unsigned char>(c))
                                    ? std::string(1, c)
                                    : "\\x" + std::to_string(static_cast<unsigned char>(c));
            throw ParseError("unexpected character '" + shown + "'", t.line, t.column);
          }
        }
      }
      out.push_back(std::move(t));
    }
  }

 private:
  char get() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) {
      ++col_;
    }
    return c;
  }
  void advance(std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) get();
  }
  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') get();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        get();
      } else {
        return;
      }
    }
  }
  std::string ident() {
    std::string out;
    while (pos_ < src_.size() && ident_char(src_[pos_])) out.push_back(get());
    return out;
  }
  std::string string_lit(const Token& at) {
    get();
    std::string out;
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') {
        throw ParseError("unterminated string", at.line, at.column);
      }
      char c = get();
      if (c == '"') return out;
      if (c == '\\') {
        if (pos_ >= src_.size()) throw ParseError("unterminated string", at.line, at.column);
        char n = get();
        switch (n) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case '"': case '\\': out.push_back(n); break;
          default: throw ParseError("unknown escape '\\" + std::string(1, n) + "'", line_, col_ - 1);
        }
      } else {
        out.push_back(c);
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, const BuiltinRegistry& registry)
      : toks_(std::move(toks)), registry_(registry) {}

  Program program() {
    Program prog;
    while (peek().kind != Tok::End) statement(prog);
    try {
      check_kb(prog.kb);
    } catch (const SchemaError& e) {
      throw ParseError(e.what(), 1, 1);
    }
    return prog;
  }

  Fact fact_text(SymbolTable& symbols) {
    const Token& name = expect(Tok::Ident);
    auto pred = symbols.find_predicate(name.text);
    if (!pred) throw error_at(name, "unknown predicate '" + name.text + "'");
    const auto& sig = symbols.predicate(*pred);
    Fact f{*pred, {}};
    expect(Tok::LParen);
    for (std::size_t k = 0; k < sig.arity(); ++k) {
      if (k) expect(Tok::Comma);
      f.cells.push_back(cell(symbols, sig.types[k]));
    }
    expect(Tok::RParen);
    expect(Tok::End);
    return f;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  static ParseError error_at(const Token& t, const std::string& what) {
    return ParseError(what, t.line, t.column);
  }
  const Token& expect(Tok kind) {
    const Token& t = peek();
    if (t.kind != kind) {
      throw error_at(t, std::string("expected ") + tok_name(kind) + ", found " + tok_name(t.kind) +
                            (t.text.empty() ? "" : " '" + t.text + "'"));
    }
    return next();
  }
  bool accept(Tok kind) {
    if (peek().kind != kind) return false;
    next();
    return true;
  }
  bool at_keyword(std::string_view kw) const {
    return peek().kind == Tok::Ident && peek().text == kw;
  }

  void statement(Program& prog) {
    const Token& head = expect(Tok::Ident);
    const std::string& kw = head.text;
    if (kw == "pred" || kw == "builtin") {
      declaration(prog, head, kw == "builtin");
    } else if (kw == "tgd" || kw == "eegd" || kw == "vegd") {
      rule(prog, head);
    } else if (kw == "fact") {
      fact(prog, head);
    } else if (kw == "query") {
      query(prog, head);
    } else {
      throw error_at(head, "unknown statement '" + kw + "'");
    }
  }

  void declaration(Program& prog, const Token& at, bool builtin) {
    const Token& name = expect(Tok::Ident);
    PredicateSignature sig{name.text, {}, builtin ? PredKind::BuiltIn : PredKind::KB};
    expect(Tok::LParen);
    if (peek().kind != Tok::RParen) {
      do {
        const Token& t = expect(Tok::Ident);
        if (t.text == "e") {
          sig.types.push_back(ArgType::Entity);
        } else if (t.text == "v") {
          sig.types.push_back(ArgType::Value);
        } else {
          throw error_at(t, "argument type must be 'e' or 'v'");
        }
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen);
    expect(Tok::Dot);
    if (builtin) {
      const BuiltinDef* def = registry_.find(sig.name);
      if (!def) throw error_at(name, "unknown built-in '" + sig.name + "'");
      if (!def->enabled) throw error_at(name, "built-in '" + sig.name + "' is disabled");
      if (def->args.size() != sig.arity()) {
        throw error_at(name, "built-in '" + sig.name + "' takes " + std::to_string(def->args.size()) +
                                 " arguments");
      }
      for (ArgType t : sig.types) {
        if (t != ArgType::Value) throw error_at(name, "built-in arguments must be values");
      }
    }
    if (prog.kb.symbols.find_predicate(sig.name)) {
      throw error_at(name, "predicate '" + sig.name + "' declared twice");
    }
    (void)at;
    prog.kb.symbols.add_predicate(std::move(sig));
  }

  Term term(SymbolTable& symbols, ArgType want) {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Ident: next(); return Term::variable(t.text);
      case Tok::AtIdent:
        next();
        if (want != ArgType::Entity) throw error_at(t, "entity constant at a value position");
        return Term::constant_of(symbols.intern_entity(t.text));
      case Tok::String:
        next();
        if (want != ArgType::Value) throw error_at(t, "value constant at an entity position");
        return Term::constant_of(symbols.intern_string(t.text));
      case Tok::Number:
        next();
        if (want != ArgType::Value) throw error_at(t, "value constant at an entity position");
        return Term::constant_of(symbols.intern_number(t.text));
      default:
        throw error_at(t, std::string("expected a term, found ") + tok_name(t.kind));
    }
  }

  Atom atom(SymbolTable& symbols) {
    const Token& name = expect(Tok::Ident);
    auto pred = symbols.find_predicate(name.text);
    if (!pred) throw error_at(name, "undeclared predicate '" + name.text + "'");
    const auto& sig = symbols.predicate(*pred);
    Atom a{*pred, {}};
    expect(Tok::LParen);
    if (peek().kind != Tok::RParen) {
      do {
        ArgType want = a.args.size() < sig.arity() ? sig.types[a.args.size()] : ArgType::Value;
        a.args.push_back(term(symbols, want));
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen);
    if (a.args.size() != sig.arity()) {
      throw error_at(name, sig.name + " expects " + std::to_string(sig.arity()) + " arguments, got " +
                               std::to_string(a.args.size()));
    }
    return a;
  }

  Conjunction conjunction(SymbolTable& symbols) {
    Conjunction out;
    do {
      out.push_back(atom(symbols));
    } while (accept(Tok::Comma));
    return out;
  }

  std::vector<std::string> name_list() {
    std::vector<std::string> out;
    do {
      out.push_back(expect(Tok::Ident).text);
    } while (accept(Tok::Comma));
    return out;
  }

  bool existential_prefix() {
    return at_keyword("exists") && peek(1).kind == Tok::Ident;
  }

  void rule(Program& prog, const Token& head) {
    Rule r;
    r.kind = head.text == "tgd" ? RuleKind::Tgd : head.text == "eegd" ? RuleKind::EntityEgd
                                                                         : RuleKind::ValueEgd;
    r.id = expect(Tok::Ident).text;
    expect(Tok::Colon);
    r.body = conjunction(prog.kb.symbols);
    const Token& arrow = expect(Tok::Arrow);
    if (r.kind == RuleKind::Tgd) {
      if (existential_prefix()) {
        next();
        r.existentials = name_list();
        expect(Tok::Colon);
      }
      std::size_t start = pos_;
      for (const Token* t = &peek(); t->kind != Tok::Dot && t->kind != Tok::End; t = &toks_[++start]) {
        if (t->kind == Tok::String || t->kind == Tok::Number || t->kind == Tok::AtIdent) {
          throw error_at(*t, "rule " + r.id + ": constant in tgd head");
        }
        if (t->kind == Tok::Ident && toks_[start + 1].kind == Tok::LParen) {
          auto p = prog.kb.symbols.find_predicate(t->text);
          if (p && prog.kb.symbols.predicate(*p).kind == PredKind::BuiltIn) {
            throw error_at(*t, "rule " + r.id + ": built-in in tgd head");
          }
        }
      }
      r.head = conjunction(prog.kb.symbols);
    } else {
      r.lhs = expect(Tok::Ident).text;
      expect(Tok::Equals);
      r.rhs = expect(Tok::Ident).text;
    }
    expect(Tok::Dot);
    try {
      check_rule(prog.kb.symbols, r);
    } catch (const SchemaError& e) {
      throw error_at(r.kind == RuleKind::Tgd ? head : arrow, e.what());
    }
    if (prog.kb.find_rule(r.id)) throw error_at(head, "rule id '" + r.id + "' used twice");
    prog.kb.tbox.push_back(std::move(r));
  }

  void fact(Program& prog, const Token& head) {
    auto& symbols = prog.kb.symbols;
    const Token& name = expect(Tok::Ident);
    auto pred = symbols.find_predicate(name.text);
    if (!pred) throw error_at(name, "undeclared predicate '" + name.text + "'");
    const auto sig = symbols.predicate(*pred);
    if (sig.kind == PredKind::BuiltIn) {
      throw error_at(name, "built-in facts are derived, not stated");
    }
    GroundAtom g{*pred, {}};
    expect(Tok::LParen);
    if (peek().kind != Tok::RParen) {
      do {
        const Token& t = next();
        ArgType want = g.args.size() < sig.arity() ? sig.types[g.args.size()] : ArgType::Value;
        bool entity_tok = t.kind == Tok::Ident || t.kind == Tok::AtIdent;
        bool value_tok = t.kind == Tok::String || t.kind == Tok::Number;
        if (!entity_tok && !value_tok) {
          throw error_at(t, std::string("expected a constant, found ") + tok_name(t.kind));
        }
        if (entity_tok != (want == ArgType::Entity)) {
          throw error_at(t, "argument " + std::to_string(g.args.size() + 1) + " of " + sig.name +
                                " must be " + (want == ArgType::Entity ? "an entity" : "a value"));
        }
        if (entity_tok) {
          g.args.push_back(symbols.intern_entity(t.text));
        } else if (t.kind == Tok::String) {
          g.args.push_back(symbols.intern_string(t.text));
        } else {
          g.args.push_back(symbols.intern_number(t.text));
        }
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen);
    expect(Tok::Dot);
    try {
      check_ground_atom(symbols, g);
    } catch (const SchemaError& e) {
      throw error_at(head, e.what());
    }
    prog.kb.database.push_back(std::move(g));
  }

  void query(Program& prog, const Token& head) {
    ConjunctiveQuery q;
    q.name = expect(Tok::Ident).text;
    expect(Tok::LParen);
    if (peek().kind != Tok::RParen) q.free_vars = name_list();
    expect(Tok::RParen);
    expect(Tok::Colon);
    if (existential_prefix()) {
      next();
      q.existentials = name_list();
      expect(Tok::Colon);
    }
    q.body = conjunction(prog.kb.symbols);
    expect(Tok::Dot);
    try {
      check_query(prog.kb.symbols, q);
    } catch (const SchemaError& e) {
      throw error_at(head, e.what());
    }
    if (prog.find_query(q.name)) throw error_at(head, "query '" + q.name + "' defined twice");
    prog.queries.push_back(std::move(q));
  }

  Cell cell(SymbolTable& symbols, ArgType type) {
    auto member = [&](const Token& t) -> Sym {
      std::string spelled = t.kind == Tok::String ? quote_string(t.text) : t.text;
      bool ok = t.kind == Tok::Ident || t.kind == Tok::AtIdent || t.kind == Tok::String ||
                t.kind == Tok::Number || t.kind == Tok::Null;
      if (!ok) throw error_at(t, std::string("expected a member, found ") + tok_name(t.kind));
      try {
        return symbols.parse_token(spelled, type);
      } catch (const std::invalid_argument& e) {
        throw error_at(t, e.what());
      }
    };
    Tok close = Tok::End;
    if (accept(Tok::LBracket)) {
      close = Tok::RBracket;
    } else if (accept(Tok::LBrace)) {
      close = Tok::RBrace;
    } else {
      return Cell::singleton(member(next()));
    }
    if ((close == Tok::RBracket) != (type == ArgType::Entity)) {
      throw error_at(peek(), type == ArgType::Entity ? "entity cells use [...]" : "value cells use {...}");
    }
    std::vector<Sym> ms;
    do {
      ms.push_back(member(next()));
    } while (accept(Tok::Comma));
    expect(close);
    return Cell{std::move(ms)};
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const BuiltinRegistry& registry_;
};

std::string term_text(const SymbolTable& symbols, const Term& t) {
  if (t.is_var()) return t.var;
  if (sym_kind(t.constant) == SymKind::Entity) return "@" + symbols.entity_name(t.constant);
  return symbols.render(t.constant);
}

std::string conj_text(const SymbolTable& symbols, const Conjunction& conj) {
  std::string out;
  for (std::size_t a = 0; a < conj.size(); ++a) {
    if (a) out += ", ";
    out += symbols.predicate(conj[a].pred).name + "(";
    for (std::size_t k = 0; k < conj[a].args.size(); ++k) {
      if (k) out += ", ";
      out += term_text(symbols, conj[a].args[k]);
    }
    out += ")";
  }
  return out;
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (std::size_t k = 0; k < xs.size(); ++k) out += (k ? ", " : "") + xs[k];
  return out;
}

}  // namespace

const ConjunctiveQuery* Program::find_query(std::string_view name) const {
  for (const auto& q : queries) {
    if (q.name == name) return &q;
  }
  return nullptr;
}

Program parse_program(std::string_view text, const BuiltinRegistry& registry) {
  Parser p(Lexer(text).run(), registry);
  return p.program();
}

Fact parse_fact_text(std::string_view text, SymbolTable& symbols) {
  Parser p(Lexer(text).run(), BuiltinRegistry::standard());
  return p.fact_text(symbols);
}

std::string serialize(const KnowledgeBase& kb, const std::vector<ConjunctiveQuery>& queries) {
  const auto& symbols = kb.symbols;
  std::string out;
  for (PredId p = 0; p < symbols.predicate_count(); ++p) {
    const auto& sig = symbols.predicate(p);
    out += sig.kind == PredKind::BuiltIn ? "builtin " : "pred ";
    out += sig.name + "(";
    for (std::size_t k = 0; k < sig.arity(); ++k) {
      out += (k ? ", " : "");
      out += sig.types[k] == ArgType::Entity ? "e" : "v";
    }
    out += ").\n";
  }
  for (const auto& r : kb.tbox) {
    out += std::string(rule_kind_name(r.kind)) + " " + r.id + ": " + conj_text(symbols, r.body) + " -> ";
    if (r.kind == RuleKind::Tgd) {
      if (!r.existentials.empty()) out += "exists " + join(r.existentials) + ": ";
      out += conj_text(symbols, r.head);
    } else {
      out += r.lhs + " = " + r.rhs;
    }
    out += ".\n";
  }
  for (const auto& g : kb.database) {
    out += "fact " + symbols.predicate(g.pred).name + "(";
    for (std::size_t k = 0; k < g.args.size(); ++k) {
      out += (k ? ", " : "") + symbols.render(g.args[k]);
    }
    out += ").\n";
  }
  for (const auto& q : queries) {
    out += "query " + q.name + "(" + join(q.free_vars) + "): ";
    if (!q.existentials.empty()) out += "exists " + join(q.existentials) + ": ";
    out += conj_text(symbols, q.body) + ".\n";
  }
  return out;
}

}  // namespace mergechase
