#include "semplan/ltl.hpp"

#include <cctype>

namespace semplan {

Formula Formula::make_atom(std::string name) {
  Formula f;
  f.kind = FormulaKind::Atom;
  f.atom = std::move(name);
  return f;
}

Formula Formula::make_not(std::string name) {
  Formula f;
  f.kind = FormulaKind::Not;
  f.atom = std::move(name);
  return f;
}

Formula Formula::make_and(Formula lhs, Formula rhs) {
  Formula f;
  f.kind = FormulaKind::And;
  f.children = {std::move(lhs), std::move(rhs)};
  return f;
}

Formula Formula::make_or(Formula lhs, Formula rhs) {
  Formula f;
  f.kind = FormulaKind::Or;
  f.children = {std::move(lhs), std::move(rhs)};
  return f;
}

Formula Formula::make_until(Formula lhs, Formula rhs) {
  Formula f;
  f.kind = FormulaKind::Until;
  f.children = {std::move(lhs), std::move(rhs)};
  return f;
}

std::string Formula::to_string() const {
  switch (kind) {
    case FormulaKind::True:
      return "true";
    case FormulaKind::Atom:
      return atom;
    case FormulaKind::Not:
      return "!" + atom;
    case FormulaKind::And:
      return "(" + children[0].to_string() + " & " + children[1].to_string() + ")";
    case FormulaKind::Or:
      return "(" + children[0].to_string() + " | " + children[1].to_string() + ")";
    case FormulaKind::Until:
      return "(" + children[0].to_string() + " U " + children[1].to_string() + ")";
  }
  return {};
}

namespace {

void collect_atoms(const Formula& f, std::set<std::string>& out) {
  if (f.kind == FormulaKind::Atom || f.kind == FormulaKind::Not) out.insert(f.atom);
  for (const auto& c : f.children) collect_atoms(c, out);
}

}  // namespace

std::set<std::string> Formula::atoms() const {
  std::set<std::string> out;
  collect_atoms(*this, out);
  return out;
}

LtlParseError::LtlParseError(const std::string& what, int line, int column)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + what),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { Ident, True, Not, And, Or, Until, Eventually, LParen, RParen, End };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : src_(s) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "", line_, col_});
        return out;
      }
      const int line = line_, col = col_;
      const char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string word;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
          word.push_back(src_[pos_]);
          advance();
        }
        Tok k = Tok::Ident;
        if (word == "true") k = Tok::True;
        else if (word == "U") k = Tok::Until;
        else if (word == "F") k = Tok::Eventually;
        out.push_back({k, word, line, col});
        continue;
      }
      Tok k;
      switch (c) {
        case '!': k = Tok::Not; break;
        case '&': k = Tok::And; break;
        case '|': k = Tok::Or; break;
        case '(': k = Tok::LParen; break;
        case ')': k = Tok::RParen; break;
        default:
          throw LtlParseError(std::string("unexpected character '") + c + "'", line, col);
      }
      advance();
      out.push_back({k, std::string(1, c), line, col});
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, const std::optional<std::set<std::string>>& known)
      : toks_(std::move(toks)), known_(known) {}

  Formula parse() {
    Formula f = parse_or();
    if (peek().kind != Tok::End) fail("unexpected token '" + peek().text + "'");
    return f;
  }

 private:
  const Token& peek() const { return toks_[i_]; }
  const Token& take() { return toks_[i_++]; }
  [[noreturn]] void fail(const std::string& msg) const {
    throw LtlParseError(msg, peek().line, peek().column);
  }

  Formula parse_or() {
    Formula lhs = parse_and();
    while (peek().kind == Tok::Or) {
      take();
      lhs = Formula::make_or(std::move(lhs), parse_and());
    }
    return lhs;
  }

  Formula parse_and() {
    Formula lhs = parse_until();
    while (peek().kind == Tok::And) {
      take();
      lhs = Formula::make_and(std::move(lhs), parse_until());
    }
    return lhs;
  }

  Formula parse_until() {
    Formula lhs = parse_unary();
    if (peek().kind == Tok::Until) {
      take();
      return Formula::make_until(std::move(lhs), parse_until());
    }
    return lhs;
  }

  Formula parse_unary() {
    const Token& t = peek();
    if (t.kind == Tok::Not) {
      const Token bang = take();
      Formula operand = parse_unary();
      if (operand.kind != FormulaKind::Atom) {
        throw LtlParseError("negation of non-atom is not allowed", bang.line, bang.column);
      }
      return Formula::make_not(operand.atom);
    }
    if (t.kind == Tok::Eventually) {
      take();
      return Formula::make_eventually(parse_unary());
    }
    return parse_primary();
  }

  Formula parse_primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::True:
        take();
        return Formula::make_true();
      case Tok::Ident: {
        if (known_ && !known_->count(t.text)) fail("unknown atom '" + t.text + "'");
        return Formula::make_atom(take().text);
      }
      case Tok::LParen: {
        take();
        Formula inner = parse_or();
        if (peek().kind != Tok::RParen) fail("expected ')'");
        take();
        return inner;
      }
      case Tok::End:
        fail("unexpected end of input");
      default:
        fail("unexpected token '" + t.text + "'");
    }
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  const std::optional<std::set<std::string>>& known_;
};

}  // namespace

Formula parse_cosafe_ltl(std::string_view text,
                         const std::optional<std::set<std::string>>& known_atoms) {
  Parser p(Lexer(text).run(), known_atoms);
  return p.parse();
}

}  // namespace semplan
