#include "dlrq/sexpr.hpp"

#include <cctype>
#include <charconv>

namespace dlrq {

ParseError::ParseError(const std::string& what, int line, int column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

bool SExpr::has_head(std::string_view head) const {
  return is_list && !items.empty() && items[0].is_symbol(head);
}

void SExpr::fail(const std::string& message) const { throw ParseError(message, line, column); }

int SExpr::as_int() const {
  if (is_list) fail("expected integer, found list");
  int value = 0;
  auto [ptr, ec] = std::from_chars(symbol.data(), symbol.data() + symbol.size(), value);
  if (ec != std::errc() || ptr != symbol.data() + symbol.size()) fail("expected integer, found '" + symbol + "'");
  return value;
}

const std::string& SExpr::as_symbol() const {
  if (is_list) fail("expected symbol, found list");
  return symbol;
}

namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    skip_space();
    while (pos_ < text_.size()) {
      out.push_back(read());
      skip_space();
    }
    return out;
  }

 private:
  SExpr read() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", line_, col_);
    SExpr e;
    e.line = line_;
    e.column = col_;
    char c = text_[pos_];
    if (c == ')') throw ParseError("unexpected ')'", line_, col_);
    if (c == '(') {
      advance();
      e.is_list = true;
      for (;;) {
        skip_space();
        if (pos_ >= text_.size()) throw ParseError("unterminated list", e.line, e.column);
        if (text_[pos_] == ')') {
          advance();
          break;
        }
        e.items.push_back(read());
      }
      return e;
    }
    while (pos_ < text_.size()) {
      c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ';') break;
      e.symbol.push_back(c);
      advance();
    }
    return e;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

void print(const SExpr& e, std::string& out) {
  if (!e.is_list) {
    out += e.symbol;
    return;
  }
  out.push_back('(');
  for (std::size_t i = 0; i < e.items.size(); ++i) {
    if (i) out.push_back(' ');
    print(e.items[i], out);
  }
  out.push_back(')');
}

}  // namespace

std::vector<SExpr> parse_sexprs(std::string_view text) { return Reader(text).read_all(); }

SExpr parse_sexpr(std::string_view text) {
  auto all = parse_sexprs(text);
  if (all.size() != 1) throw ParseError("expected exactly one form, found " + std::to_string(all.size()), 1, 1);
  return std::move(all.front());
}

std::string to_string(const SExpr& e) {
  std::string out;
  print(e, out);
  return out;
}

}  // namespace dlrq
