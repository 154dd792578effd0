#include "evseq/query.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "evseq/ingest.hpp"

namespace evseq {

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::eq: return "=";
    case CompareOp::ne: return "!=";
    case CompareOp::lt: return "<";
    case CompareOp::le: return "<=";
    case CompareOp::gt: return ">";
    case CompareOp::ge: return ">=";
  }
  return "=";
}

CompareOp parse_compare_op(std::string_view text) {
  if (text == "=") return CompareOp::eq;
  if (text == "!=") return CompareOp::ne;
  if (text == "<") return CompareOp::lt;
  if (text == "<=") return CompareOp::le;
  if (text == ">") return CompareOp::gt;
  if (text == ">=") return CompareOp::ge;
  throw ConfigError("unknown comparison operator '" + std::string(text) + "'");
}

QueryPtr make_comparison(std::string attribute, CompareOp op, QueryLiteral literal) {
  return std::make_shared<QueryNode>(QueryNode{Comparison{std::move(attribute), op, std::move(literal)}});
}
QueryPtr make_cluster_is(std::string label) { return std::make_shared<QueryNode>(QueryNode{ClusterIs{std::move(label)}}); }
QueryPtr make_has(std::string event_type) { return std::make_shared<QueryNode>(QueryNode{HasEvent{std::move(event_type)}}); }
QueryPtr make_and(QueryPtr lhs, QueryPtr rhs) {
  return std::make_shared<QueryNode>(QueryNode{AndNode{std::move(lhs), std::move(rhs)}});
}
QueryPtr make_or(QueryPtr lhs, QueryPtr rhs) {
  return std::make_shared<QueryNode>(QueryNode{OrNode{std::move(lhs), std::move(rhs)}});
}
QueryPtr make_not(QueryPtr operand) { return std::make_shared<QueryNode>(QueryNode{NotNode{std::move(operand)}}); }

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

bool is_keyword(std::string_view w) {
  return iequals(w, "and") || iequals(w, "or") || iequals(w, "not") || iequals(w, "has");
}

bool word_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool is_bare_word(std::string_view s) {
  if (s.empty() || !word_start(s[0])) return false;
  return std::all_of(s.begin(), s.end(), word_char) && !is_keyword(s);
}

// ---- Lexer -------------------------------------------------------------------

enum class Tok { lparen, rparen, op, number, string, quoted_ident, word, end };

struct Token {
  Tok kind = Tok::end;
  std::size_t pos = 0;
  std::string text;
  double number = 0;
};

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (true) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i >= s.size()) break;
    const char c = s[i];
    Token t;
    t.pos = i;
    if (c == '(' || c == ')') {
      t.kind = c == '(' ? Tok::lparen : Tok::rparen;
      ++i;
    } else if (c == '=' || c == '<' || c == '>' || c == '!') {
      t.kind = Tok::op;
      if (i + 1 < s.size() && s[i + 1] == '=' && c != '=') {
        t.text = s.substr(i, 2);
        i += 2;
      } else if (c == '!') {
        throw ParseError(i, {"!="}, "expected '!=' at position " + std::to_string(i));
      } else {
        t.text = std::string(1, c);
        ++i;
      }
    } else if (c == '\'' || c == '"' || c == '`') {
      t.kind = c == '\'' ? Tok::string : Tok::quoted_ident;
      ++i;
      while (true) {
        if (i >= s.size())
          throw ParseError(s.size(), {std::string(1, c)}, "unterminated quote starting at position " + std::to_string(t.pos));
        if (s[i] == c) {
          if (i + 1 < s.size() && s[i + 1] == c) {
            t.text += c;
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        t.text += s[i++];
      }
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               ((c == '-' || c == '.') && i + 1 < s.size() &&
                (std::isdigit(static_cast<unsigned char>(s[i + 1])) || s[i + 1] == '.'))) {
      double v = 0;
      auto [ptr, ec] = std::from_chars(s.data() + i, s.data() + s.size(), v);
      if (ec != std::errc()) throw ParseError(i, {"literal"}, "malformed number at position " + std::to_string(i));
      t.kind = Tok::number;
      t.number = v;
      t.text = std::string(s.substr(i, static_cast<std::size_t>(ptr - (s.data() + i))));
      i = static_cast<std::size_t>(ptr - s.data());
    } else if (word_start(c)) {
      t.kind = Tok::word;
      while (i < s.size() && word_char(s[i])) t.text += s[i++];
    } else {
      throw ParseError(i, {"expression"}, std::string("unexpected character '") + c + "' at position " + std::to_string(i));
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.pos = s.size();
  out.push_back(end);
  return out;
}

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::end: return "end of input";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    default: return "'" + t.text + "'";
  }
}

// ---- Parser ------------------------------------------------------------------

class Parser {
 public:
  Parser(std::string_view text, const AttributeSchema& schema, const TimeZone& tz)
      : tokens_(lex(text)), schema_(schema), tz_(tz) {}

  QueryPtr parse() {
    auto e = parse_or();
    if (peek().kind != Tok::end) fail({"AND", "OR", "end of input"});
    return e;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return tokens_[std::min(i_ + ahead, tokens_.size() - 1)]; }
  const Token& next() { return tokens_[i_ < tokens_.size() - 1 ? i_++ : i_]; }
  bool keyword(std::string_view kw, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::word && iequals(peek(ahead).text, kw);
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const auto& t = peek();
    std::string msg = "at position " + std::to_string(t.pos) + ": expected ";
    for (std::size_t k = 0; k < expected.size(); ++k) msg += (k ? ", " : "") + expected[k];
    msg += "; found " + describe(t);
    throw ParseError(t.pos, std::move(expected), msg);
  }

  QueryPtr parse_or() {
    auto lhs = parse_and();
    while (keyword("OR")) {
      next();
      lhs = make_or(lhs, parse_and());
    }
    return lhs;
  }

  QueryPtr parse_and() {
    auto lhs = parse_unary();
    while (keyword("AND")) {
      next();
      lhs = make_and(lhs, parse_unary());
    }
    return lhs;
  }

  QueryPtr parse_unary() {
    if (keyword("NOT")) {
      next();
      return make_not(parse_unary());
    }
    if (peek().kind == Tok::lparen) {
      next();
      auto e = parse_or();
      if (peek().kind != Tok::rparen) fail({")", "AND", "OR"});
      next();
      return e;
    }
    return parse_atom();
  }

  QueryPtr parse_atom() {
    if (keyword("HAS")) {
      next();
      const auto& t = peek();
      if (t.kind != Tok::word && t.kind != Tok::string && t.kind != Tok::quoted_ident) fail({"event type"});
      next();
      return make_has(t.text);
    }
    if (keyword("Cluster") && keyword("ID", 1)) {
      next();
      next();
      if (peek().kind != Tok::op || peek().text != "=") fail({"="});
      next();
      const auto& t = peek();
      if (t.kind == Tok::word || t.kind == Tok::string || t.kind == Tok::quoted_ident) {
        next();
        return make_cluster_is(t.text);
      }
      fail({"cluster label"});
    }
    const auto& id = peek();
    if (!((id.kind == Tok::word && !is_keyword(id.text)) || id.kind == Tok::quoted_ident))
      fail({"(", "NOT", "HAS", "Cluster ID", "identifier"});
    next();
    if (peek().kind != Tok::op) fail({"comparison operator"});
    const CompareOp op = parse_compare_op(next().text);
    const auto& lit = peek();
    if (lit.kind != Tok::number && lit.kind != Tok::string && lit.kind != Tok::word) fail({"literal"});
    next();

    const auto* spec = schema_.find(id.text);
    if (!spec) throw NameError("unknown attribute '" + id.text + "' at position " + std::to_string(id.pos));
    switch (spec->kind) {
      case AttributeKind::numerical:
        if (lit.kind != Tok::number)
          throw TypeError("attribute '" + spec->name + "' is numerical; expected a numeric literal at position " +
                          std::to_string(lit.pos));
        return make_comparison(spec->name, op, lit.number);
      case AttributeKind::temporal:
        if (lit.kind == Tok::number) return make_comparison(spec->name, op, lit.number);
        if (lit.kind == Tok::string) {
          if (auto ts = parse_timestamp(lit.text, kDefaultTimestampFormat, tz_))
            return make_comparison(spec->name, op, static_cast<double>(*ts));
        }
        throw TypeError("attribute '" + spec->name + "' is temporal; expected epoch seconds or a quoted timestamp at position " +
                        std::to_string(lit.pos));
      case AttributeKind::categorical:
        if (lit.kind == Tok::number)
          throw TypeError("attribute '" + spec->name + "' is categorical; expected a string literal at position " +
                          std::to_string(lit.pos));
        if (op != CompareOp::eq && op != CompareOp::ne)
          throw TypeError("attribute '" + spec->name + "' is categorical; only = and != apply");
        return make_comparison(spec->name, op, lit.text);
    }
    fail({"literal"});
  }

  std::vector<Token> tokens_;
  std::size_t i_ = 0;
  const AttributeSchema& schema_;
  TimeZone tz_;
};

// ---- Formatting ----------------------------------------------------------------

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string quote(std::string_view s, char q) {
  std::string out(1, q);
  for (char c : s) {
    if (c == q) out += q;
    out += c;
  }
  out += q;
  return out;
}

std::string format_identifier(const std::string& name) { return is_bare_word(name) ? name : quote(name, '"'); }

std::string format_name_value(const std::string& value) { return is_bare_word(value) ? value : quote(value, '\''); }

std::string format_node(const QueryNode& n);

std::string wrapped(const QueryPtr& p) { return "(" + format_node(*p) + ")"; }

std::string format_node(const QueryNode& n) {
  return std::visit(
      overloaded{
          [](const Comparison& c) {
            std::string lit = std::holds_alternative<double>(c.literal) ? format_number(std::get<double>(c.literal))
                                                                        : quote(std::get<std::string>(c.literal), '\'');
            return format_identifier(c.attribute) + " " + std::string(to_string(c.op)) + " " + lit;
          },
          [](const ClusterIs& c) { return "Cluster ID = " + format_name_value(c.label); },
          [](const HasEvent& h) { return "HAS " + format_name_value(h.event_type); },
          [](const AndNode& a) { return wrapped(a.lhs) + " AND " + wrapped(a.rhs); },
          [](const OrNode& o) { return wrapped(o.lhs) + " OR " + wrapped(o.rhs); },
          [](const NotNode& x) { return "NOT " + wrapped(x.operand); },
      },
      n.node);
}

// ---- Evaluation ----------------------------------------------------------------

bool uses_clusters(const QueryNode& n) {
  return std::visit(overloaded{
                        [](const ClusterIs&) { return true; },
                        [](const AndNode& a) { return uses_clusters(*a.lhs) || uses_clusters(*a.rhs); },
                        [](const OrNode& o) { return uses_clusters(*o.lhs) || uses_clusters(*o.rhs); },
                        [](const NotNode& x) { return uses_clusters(*x.operand); },
                        [](const auto&) { return false; },
                    },
                    n.node);
}

template <class T>
bool compare(const T& a, CompareOp op, const T& b) {
  switch (op) {
    case CompareOp::eq: return a == b;
    case CompareOp::ne: return a != b;
    case CompareOp::lt: return a < b;
    case CompareOp::le: return a <= b;
    case CompareOp::gt: return a > b;
    case CompareOp::ge: return a >= b;
  }
  return false;
}

bool value_matches(const AttributeValue& v, CompareOp op, const QueryLiteral& lit) {
  if (v.is_missing()) return false;
  if (const auto* s = std::get_if<std::string>(&lit)) return v.is_category() && compare(v.category(), op, *s);
  const auto x = v.as_double();
  return x && compare(*x, op, std::get<double>(lit));
}

class Evaluator {
 public:
  Evaluator(const Dataset& dataset, const ClusterAssignment* clusters) : dataset_(dataset), clusters_(clusters) {}

  bool eval(const QueryNode& n, const Sequence& s) {
    return std::visit(overloaded{
                          [&](const Comparison& c) { return eval_comparison(c, s); },
                          [&](const ClusterIs& c) {
                            auto it = clusters_->labels.find(s.id);
                            return it != clusters_->labels.end() && it->second == c.label;
                          },
                          [&](const HasEvent& h) {
                            return std::any_of(s.events.begin(), s.events.end(),
                                               [&](const auto& e) { return e.event_type == h.event_type; });
                          },
                          [&](const AndNode& a) { return eval(*a.lhs, s) && eval(*a.rhs, s); },
                          [&](const OrNode& o) { return eval(*o.lhs, s) || eval(*o.rhs, s); },
                          [&](const NotNode& x) { return !eval(*x.operand, s); },
                      },
                      n.node);
  }

 private:
  const AttributeAccessor& accessor(const std::string& name) {
    auto it = accessors_.find(name);
    if (it == accessors_.end()) it = accessors_.emplace(name, AttributeAccessor(dataset_, name)).first;
    return it->second;
  }

  bool eval_comparison(const Comparison& c, const Sequence& s) {
    const auto& acc = accessor(c.attribute);
    if (acc.spec().level == AttributeLevel::sequence) return value_matches(acc(s), c.op, c.literal);
    return std::any_of(s.events.begin(), s.events.end(),
                       [&](const EventOccurrence& e) { return value_matches(acc(s, e), c.op, c.literal); });
  }

  const Dataset& dataset_;
  const ClusterAssignment* clusters_;
  std::map<std::string, AttributeAccessor> accessors_;
};

}  // namespace

bool query_equal(const QueryNode& a, const QueryNode& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      overloaded{
          [&](const Comparison& x) {
            const auto& y = std::get<Comparison>(b.node);
            return x.attribute == y.attribute && x.op == y.op && x.literal == y.literal;
          },
          [&](const ClusterIs& x) { return x.label == std::get<ClusterIs>(b.node).label; },
          [&](const HasEvent& x) { return x.event_type == std::get<HasEvent>(b.node).event_type; },
          [&](const AndNode& x) {
            const auto& y = std::get<AndNode>(b.node);
            return query_equal(*x.lhs, *y.lhs) && query_equal(*x.rhs, *y.rhs);
          },
          [&](const OrNode& x) {
            const auto& y = std::get<OrNode>(b.node);
            return query_equal(*x.lhs, *y.lhs) && query_equal(*x.rhs, *y.rhs);
          },
          [&](const NotNode& x) { return query_equal(*x.operand, *std::get<NotNode>(b.node).operand); },
      },
      a.node);
}

QueryPtr parse_query(std::string_view text, const AttributeSchema& schema, const TimeZone& tz) {
  return Parser(text, schema, tz).parse();
}

std::string format_query(const QueryNode& ast) { return format_node(ast); }

Json query_to_json(const QueryNode& ast) {
  return std::visit(
      overloaded{
          [](const Comparison& c) {
            Json lit = std::holds_alternative<double>(c.literal) ? Json(std::get<double>(c.literal))
                                                                 : Json(std::get<std::string>(c.literal));
            return Json{{"type", "compare"}, {"attribute", c.attribute}, {"op", std::string(to_string(c.op))}, {"value", lit}};
          },
          [](const ClusterIs& c) { return Json{{"type", "cluster"}, {"label", c.label}}; },
          [](const HasEvent& h) { return Json{{"type", "has"}, {"event_type", h.event_type}}; },
          [](const AndNode& a) { return Json{{"type", "and"}, {"lhs", query_to_json(*a.lhs)}, {"rhs", query_to_json(*a.rhs)}}; },
          [](const OrNode& o) { return Json{{"type", "or"}, {"lhs", query_to_json(*o.lhs)}, {"rhs", query_to_json(*o.rhs)}}; },
          [](const NotNode& x) { return Json{{"type", "not"}, {"operand", query_to_json(*x.operand)}}; },
      },
      ast.node);
}

QueryPtr query_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("type")) throw ConfigError("query node needs a 'type'");
  const auto type = j.at("type").get<std::string>();
  try {
    if (type == "compare") {
      const auto& v = j.at("value");
      QueryLiteral lit = v.is_number() ? QueryLiteral(v.get<double>()) : QueryLiteral(v.get<std::string>());
      return make_comparison(j.at("attribute").get<std::string>(), parse_compare_op(j.at("op").get<std::string>()), lit);
    }
    if (type == "cluster") return make_cluster_is(j.at("label").get<std::string>());
    if (type == "has") return make_has(j.at("event_type").get<std::string>());
    if (type == "and") return make_and(query_from_json(j.at("lhs")), query_from_json(j.at("rhs")));
    if (type == "or") return make_or(query_from_json(j.at("lhs")), query_from_json(j.at("rhs")));
    if (type == "not") return make_not(query_from_json(j.at("operand")));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed query node: ") + e.what());
  }
  throw ConfigError("unknown query node type '" + type + "'");
}

SelectionSet evaluate_query(const QueryNode& ast, const Dataset& dataset, const ClusterAssignment* clusters) {
  if (uses_clusters(ast)) {
    if (!clusters) throw StateError("query uses Cluster ID but no clustering is available");
  }
  Evaluator ev(dataset, clusters);
  std::vector<SequenceId> ids;
  for (const auto& s : dataset.sequences())
    if (ev.eval(ast, s)) ids.push_back(s.id);
  auto sel = SelectionSet::of_sequences(dataset, ids);
  sel.origin = Json{{"kind", "query"}, {"query", format_query(ast)}};
  return sel;
}

}  // namespace evseq
