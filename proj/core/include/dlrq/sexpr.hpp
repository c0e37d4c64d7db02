#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dlrq {

/// Error raised for malformed input documents; carries a 1-based source position.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column);

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// A node of an s-expression document: either a bare symbol or a parenthesized list.
struct SExpr {
  bool is_list = false;
  std::string symbol;
  std::vector<SExpr> items;
  int line = 0;
  int column = 0;

  bool is_symbol() const { return !is_list; }
  bool is_symbol(std::string_view s) const { return !is_list && symbol == s; }
  /// True for a list whose first element is the symbol `head`.
  bool has_head(std::string_view head) const;
  std::size_t size() const { return items.size(); }
  const SExpr& operator[](std::size_t i) const { return items[i]; }

  [[noreturn]] void fail(const std::string& message) const;
  int as_int() const;
  const std::string& as_symbol() const;
};

/// Reads every top-level form of `text`. `;` starts a comment running to end of line.
std::vector<SExpr> parse_sexprs(std::string_view text);

/// Reads exactly one form.
SExpr parse_sexpr(std::string_view text);

std::string to_string(const SExpr& e);

}  // namespace dlrq
