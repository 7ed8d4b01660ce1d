#include "pep3/query.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "pep3/error.hpp"

namespace pep3 {
namespace {

struct Token {
  enum Kind { Word, Number, Arg, Symbol, End } kind;
  std::string text;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      std::string w(s.substr(i, j - i));
      std::transform(w.begin(), w.end(), w.begin(), [](unsigned char ch) { return std::tolower(ch); });
      out.push_back({Token::Word, w});
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({Token::Number, std::string(s.substr(i, j - i))});
      i = j;
    } else if (c == '$') {
      std::size_t j = i + 1;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      if (j == i + 1) throw Error(ErrorCode::ParseError, "argument needs a number after '$'");
      out.push_back({Token::Arg, std::string(s.substr(i + 1, j - i - 1))});
      i = j;
    } else if (c == '<' || c == '>' || c == '!' || c == '=') {
      std::string op(1, c);
      if (i + 1 < s.size() && s[i + 1] == '=') op += '=';
      if (op == "!") throw Error(ErrorCode::ParseError, "unexpected '!'");
      out.push_back({Token::Symbol, op});
      i += op.size();
    } else if (c == ',' || c == '*' || c == '(' || c == ')') {
      out.push_back({Token::Symbol, std::string(1, c)});
      ++i;
    } else {
      throw Error(ErrorCode::ParseError, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Token::End, ""});
  return out;
}

std::uint64_t to_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw Error(ErrorCode::ParseError, "number out of range: " + s);
  return v;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> t) : toks_(std::move(t)) {}

  Query parse() {
    Query q;
    expect_word("select");
    if (accept_symbol("*")) {
      q.projection.assign(std::begin(kAllColumns), std::end(kAllColumns));
    } else if (accept_word("count")) {
      q.count = true;
      if (accept_symbol("(")) {
        if (!accept_symbol("*")) column();
        expect_symbol(")");
      }
    } else {
      do q.projection.push_back(column());
      while (accept_symbol(","));
    }
    if (accept_word("where")) {
      do q.where.push_back(term());
      while (accept_word("and"));
    }
    if (accept_word("order")) {
      expect_word("by");
      const Column c = column();
      if (is_pseudonym_column(c))
        throw Error(ErrorCode::WhitelistViolation, "ordering by pseudonym column " + std::string(column_name(c)));
      q.order_by = c;
      if (accept_word("desc")) q.descending = true;
      else accept_word("asc");
    }
    if (accept_word("limit")) {
      if (peek().kind != Token::Number) throw Error(ErrorCode::ParseError, "limit needs a number");
      q.limit = to_u64(next().text);
    }
    if (peek().kind != Token::End) throw Error(ErrorCode::ParseError, "unexpected '" + peek().text + "'");
    if (q.count && (q.order_by || q.limit)) throw Error(ErrorCode::ParseError, "count takes no order by or limit");
    return q;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept_word(std::string_view w) {
    if (peek().kind == Token::Word && peek().text == w) return next(), true;
    return false;
  }
  bool accept_symbol(std::string_view s) {
    if (peek().kind == Token::Symbol && peek().text == s) return next(), true;
    return false;
  }
  void expect_word(std::string_view w) {
    if (!accept_word(w)) throw Error(ErrorCode::ParseError, "expected '" + std::string(w) + "'");
  }
  void expect_symbol(std::string_view s) {
    if (!accept_symbol(s)) throw Error(ErrorCode::ParseError, "expected '" + std::string(s) + "'");
  }
  Column column() {
    if (peek().kind != Token::Word) throw Error(ErrorCode::ParseError, "expected a column name");
    const auto name = next().text;
    if (auto c = column_from_name(name)) return *c;
    if (name == "sum" || name == "avg" || name == "min" || name == "max")
      throw Error(ErrorCode::WhitelistViolation, "aggregate '" + name + "' is not admissible");
    throw Error(ErrorCode::ParseError, "unknown column '" + name + "'");
  }
  Term term() {
    Term t;
    t.column = column();
    if (peek().kind != Token::Symbol) throw Error(ErrorCode::ParseError, "expected a comparison");
    const auto op = next().text;
    if (op == "=" || op == "==") t.op = CmpOp::Eq;
    else if (op == "!=") t.op = CmpOp::Ne;
    else if (op == "<") t.op = CmpOp::Lt;
    else if (op == "<=") t.op = CmpOp::Le;
    else if (op == ">") t.op = CmpOp::Gt;
    else if (op == ">=") t.op = CmpOp::Ge;
    else throw Error(ErrorCode::ParseError, "expected a comparison, got '" + op + "'");
    const auto& v = next();
    t.pseudonym = is_pseudonym_column(t.column);
    const std::string col(column_name(t.column));
    if (t.pseudonym) {
      if (t.op != CmpOp::Eq)
        throw Error(ErrorCode::WhitelistViolation, "only equality is admissible on pseudonym column " + col);
      if (v.kind != Token::Arg)
        throw Error(ErrorCode::WhitelistViolation, "pseudonym column " + col + " compares only with a pseudonym argument");
      const auto k = to_u64(v.text);
      if (k == 0 || k > 1024) throw Error(ErrorCode::ParseError, "arguments are numbered from $1");
      t.arg_index = static_cast<std::uint32_t>(k - 1);
    } else {
      if (v.kind == Token::Arg)
        throw Error(ErrorCode::WhitelistViolation, "plain column " + col + " cannot compare with a pseudonym");
      if (v.kind != Token::Number) throw Error(ErrorCode::ParseError, "expected an integer literal for " + col);
      t.literal = to_u64(v.text);
    }
    return t;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view column_name(Column c) {
  switch (c) {
    case Column::TsStart: return "ts_start";
    case Column::TsEnd: return "ts_end";
    case Column::SrcIp: return "src_ip";
    case Column::DstIp: return "dst_ip";
    case Column::SrcPort: return "src_port";
    case Column::DstPort: return "dst_port";
    case Column::Proto: return "proto";
    case Column::Packets: return "packets";
    case Column::Bytes: return "bytes";
  }
  return "?";
}

std::optional<Column> column_from_name(std::string_view name) {
  for (auto c : kAllColumns)
    if (column_name(c) == name) return c;
  return std::nullopt;
}

std::uint32_t Query::arg_count() const {
  std::uint32_t n = 0;
  for (const auto& t : where)
    if (t.pseudonym) n = std::max(n, t.arg_index + 1);
  return n;
}

std::string Query::to_string() const {
  static constexpr const char* ops[] = {"=", "!=", "<", "<=", ">", ">="};
  std::string s = "select ";
  if (count) {
    s += "count";
  } else {
    for (std::size_t i = 0; i < projection.size(); ++i) {
      if (i) s += ", ";
      s += column_name(projection[i]);
    }
  }
  for (std::size_t i = 0; i < where.size(); ++i) {
    const auto& t = where[i];
    s += i ? " and " : " where ";
    s += std::string(column_name(t.column)) + " " + ops[static_cast<int>(t.op)] + " ";
    s += t.pseudonym ? "$" + std::to_string(t.arg_index + 1) : std::to_string(t.literal);
  }
  if (order_by) s += " order by " + std::string(column_name(*order_by)) + (descending ? " desc" : " asc");
  if (limit) s += " limit " + std::to_string(*limit);
  return s;
}

Query parse_query(std::string_view text) { return Parser(tokenize(text)).parse(); }

}  // namespace pep3
