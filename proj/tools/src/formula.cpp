#include "formula.hpp"

#include <cctype>
#include <charconv>
#include <set>

namespace shapegam::cli {

namespace {

enum class Tok { Ident, Number, String, Tilde, Plus, LParen, RParen, Comma, Equals, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t pos = 0;
};

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token t;
    t.pos = i;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && ident_char(s[j])) ++j;
      t.kind = Tok::Ident;
      t.text = std::string(s.substr(i, j - i));
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-') {
      std::size_t j = i + 1;
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
      t.kind = Tok::Number;
      t.text = std::string(s.substr(i, j - i));
      i = j;
    } else if (c == '"' || c == '\'') {
      const std::size_t close = s.find(c, i + 1);
      if (close == std::string_view::npos) throw ParseError("unterminated string", i);
      t.kind = Tok::String;
      t.text = std::string(s.substr(i + 1, close - i - 1));
      i = close + 1;
    } else {
      switch (c) {
        case '~': t.kind = Tok::Tilde; break;
        case '+': t.kind = Tok::Plus; break;
        case '(': t.kind = Tok::LParen; break;
        case ')': t.kind = Tok::RParen; break;
        case ',': t.kind = Tok::Comma; break;
        case '=': t.kind = Tok::Equals; break;
        default: throw ParseError(std::string("unexpected character '") + c + "'", i);
      }
      t.text = std::string(1, c);
      ++i;
    }
    out.push_back(std::move(t));
  }
  out.push_back(Token{Tok::End, "", s.size()});
  return out;
}

const char* describe(Tok k) {
  switch (k) {
    case Tok::Ident: return "a name";
    case Tok::Number: return "a number";
    case Tok::String: return "a string";
    case Tok::Tilde: return "'~'";
    case Tok::Plus: return "'+'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Equals: return "'='";
    case Tok::End: return "end of formula";
  }
  return "token";
}

std::string valid_symbols() {
  std::string s;
  for (Shape sh : kAllShapes) s += std::string(shape_name(sh)) + ", ";
  return s + "dd, ii, di, factor";
}

struct Value {
  std::vector<Token> items;  // Number or String tokens
};

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(lex(text)) {}

  ModelSpec parse() {
    ModelSpec spec;
    spec.response = expect(Tok::Ident, "a response name").text;
    expect(Tok::Tilde, "'~'");
    spec.terms.push_back(term());
    while (peek().kind == Tok::Plus) {
      next();
      spec.terms.push_back(term());
    }
    expect(Tok::End, "'+' or end of formula");
    return spec;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(i_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[i_];
    if (i_ + 1 < toks_.size()) ++i_;
    return t;
  }
  const Token& expect(Tok kind, const char* what) {
    if (peek().kind != kind) {
      throw ParseError(std::string("expected ") + what + ", found " + describe(peek().kind),
                       peek().pos);
    }
    return next();
  }

  Term term() {
    const Token name = expect(Tok::Ident, "a term");
    Term t;
    if (peek().kind != Tok::LParen) {
      t.kind = TermKind::Linear;
      t.predictors.push_back(name.text);
      return t;
    }
    if (name.text == "factor") {
      t.kind = TermKind::Factor;
    } else if (auto d = parse_direction(name.text)) {
      t.kind = TermKind::Wps;
      t.direction = *d;
    } else if (auto s = parse_shape(name.text)) {
      t.kind = TermKind::Shape;
      t.shape = *s;
    } else {
      throw ParseError("unknown function '" + name.text + "'; valid symbols are " + valid_symbols(),
                       name.pos);
    }
    next();  // '('
    if (peek().kind != Tok::Ident) {
      throw ParseError(std::string("expected a predictor name, found ") + describe(peek().kind),
                       peek().pos);
    }
    t.predictors.push_back(next().text);
    bool seen_numknots = false, seen_space = false;
    while (peek().kind == Tok::Comma) {
      next();
      const Token& id = expect(Tok::Ident, "a predictor or option name");
      if (peek().kind != Tok::Equals) {
        if (seen_numknots || seen_space) {
          throw ParseError("predictor '" + id.text + "' after options", id.pos);
        }
        t.predictors.push_back(id.text);
        continue;
      }
      next();  // '='
      const Value v = value();
      if (id.text == "numknots") {
        if (seen_numknots) throw ParseError("numknots given twice", id.pos);
        seen_numknots = true;
        for (const Token& item : v.items) t.numknots.push_back(to_int(item));
      } else if (id.text == "space") {
        if (seen_space) throw ParseError("space given twice", id.pos);
        seen_space = true;
        for (const Token& item : v.items) t.space.push_back(to_spacing(item));
      } else {
        throw ParseError("unknown option '" + id.text + "' (expected numknots or space)", id.pos);
      }
    }
    const Token& close = expect(Tok::RParen, "')'");
    check_arity(t, name, close.pos);
    return t;
  }

  Value value() {
    Value v;
    if (peek().kind == Tok::Ident && peek().text == "c" && peek(1).kind == Tok::LParen) {
      next();
      next();
      v.items.push_back(scalar());
      while (peek().kind == Tok::Comma) {
        next();
        v.items.push_back(scalar());
      }
      expect(Tok::RParen, "')'");
      return v;
    }
    v.items.push_back(scalar());
    return v;
  }

  Token scalar() {
    if (peek().kind != Tok::Number && peek().kind != Tok::String) {
      throw ParseError(std::string("expected a number or string, found ") + describe(peek().kind),
                       peek().pos);
    }
    return next();
  }

  static int to_int(const Token& t) {
    int v = 0;
    const char* end = t.text.data() + t.text.size();
    const auto r = std::from_chars(t.text.data(), end, v);
    if (t.kind != Tok::Number || r.ec != std::errc() || r.ptr != end) {
      throw ParseError("numknots must be an integer, got '" + t.text + "'", t.pos);
    }
    return v;
  }

  static KnotSpacing to_spacing(const Token& t) {
    if (t.kind == Tok::String && t.text == "E") return KnotSpacing::Equal;
    if (t.kind == Tok::String && t.text == "Q") return KnotSpacing::Quantile;
    throw ParseError("space must be \"E\" or \"Q\", got '" + t.text + "'", t.pos);
  }

  static void check_arity(const Term& t, const Token& name, std::size_t close) {
    const std::size_t np = t.predictors.size();
    switch (t.kind) {
      case TermKind::Factor:
        if (np != 1) throw ParseError("factor takes exactly one variable", close);
        if (!t.numknots.empty() || !t.space.empty()) {
          throw ParseError("factor takes no options", name.pos);
        }
        break;
      case TermKind::Shape:
        if (np != 1) throw ParseError(name.text + " takes exactly one predictor", close);
        if (t.numknots.size() > 1 || t.space.size() > 1) {
          throw ParseError(name.text + " takes a single numknots and space value", name.pos);
        }
        if (!is_smooth(t.shape) && (!t.numknots.empty() || !t.space.empty())) {
          throw ParseError("numknots and space apply only to smooth (s.*) terms", name.pos);
        }
        break;
      case TermKind::Wps:
        if (np != 2) throw ParseError(name.text + " takes exactly two predictors", close);
        if (t.numknots.size() > 2 || t.space.size() > 2) {
          throw ParseError(name.text + " takes at most two numknots and space values", name.pos);
        }
        break;
      case TermKind::Linear: break;
    }
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

std::string spacing_text(KnotSpacing s) { return s == KnotSpacing::Equal ? "\"E\"" : "\"Q\""; }

}  // namespace

bool ModelSpec::is_wps() const noexcept {
  for (const Term& t : terms) {
    if (t.kind == TermKind::Wps) return true;
  }
  return false;
}

ModelSpec parse_model_spec(std::string_view text) {
  ModelSpec spec = Parser(text).parse();
  std::set<std::string> constrained;
  int wps = 0, shapes = 0;
  for (const Term& t : spec.terms) {
    if (t.kind == TermKind::Wps) ++wps;
    if (t.kind == TermKind::Shape) ++shapes;
    if (t.kind != TermKind::Shape && t.kind != TermKind::Wps) continue;
    for (const std::string& p : t.predictors) {
      if (!constrained.insert(p).second) {
        throw InvalidInput("predictor '" + p + "' appears in more than one constrained term");
      }
    }
  }
  if (wps > 1) throw InvalidInput("a model takes at most one dd/ii/di term");
  if (wps == 1 && shapes > 0) {
    throw InvalidInput("dd/ii/di terms cannot be combined with other shape terms");
  }
  for (const Term& t : spec.terms) {
    for (const std::string& p : t.predictors) {
      if (p == spec.response) throw InvalidInput("response '" + p + "' also appears as a predictor");
    }
  }
  return spec;
}

std::string term_label(const Term& t) {
  switch (t.kind) {
    case TermKind::Linear: return t.predictors.front();
    case TermKind::Factor: return "factor(" + t.predictors.front() + ")";
    case TermKind::Shape: return std::string(shape_name(t.shape)) + "(" + t.predictors.front() + ")";
    case TermKind::Wps:
      return std::string(direction_name(t.direction)) + "(" + t.predictors[0] + ", " +
             t.predictors[1] + ")";
  }
  return {};
}

std::string serialize(const ModelSpec& spec) {
  std::string out = spec.response + " ~ ";
  for (std::size_t i = 0; i < spec.terms.size(); ++i) {
    const Term& t = spec.terms[i];
    if (i > 0) out += " + ";
    std::string s = term_label(t);
    if (!t.numknots.empty() || !t.space.empty()) {
      s.pop_back();
      if (!t.numknots.empty()) {
        s += ", numknots = ";
        if (t.numknots.size() == 1) {
          s += std::to_string(t.numknots[0]);
        } else {
          s += "c(" + std::to_string(t.numknots[0]) + ", " + std::to_string(t.numknots[1]) + ")";
        }
      }
      if (!t.space.empty()) {
        s += ", space = ";
        if (t.space.size() == 1) {
          s += spacing_text(t.space[0]);
        } else {
          s += "c(" + spacing_text(t.space[0]) + ", " + spacing_text(t.space[1]) + ")";
        }
      }
      s += ")";
    }
    out += s;
  }
  return out;
}

nlohmann::ordered_json to_json(const ModelSpec& spec) {
  nlohmann::ordered_json terms = nlohmann::ordered_json::array();
  for (const Term& t : spec.terms) {
    nlohmann::ordered_json j;
    switch (t.kind) {
      case TermKind::Linear: j["type"] = "linear"; break;
      case TermKind::Factor: j["type"] = "factor"; break;
      case TermKind::Shape:
        j["type"] = "shape";
        j["symbol"] = std::string(shape_name(t.shape));
        break;
      case TermKind::Wps:
        j["type"] = "wps";
        j["symbol"] = std::string(direction_name(t.direction));
        break;
    }
    j["predictors"] = t.predictors;
    j["numknots"] = t.numknots;
    nlohmann::ordered_json space = nlohmann::ordered_json::array();
    for (KnotSpacing s : t.space) space.push_back(s == KnotSpacing::Equal ? "E" : "Q");
    j["space"] = space;
    terms.push_back(std::move(j));
  }
  nlohmann::ordered_json out;
  out["response"] = spec.response;
  out["engine"] = spec.is_wps() ? "wps" : "cgam";
  out["terms"] = std::move(terms);
  return out;
}

}  // namespace shapegam::cli
