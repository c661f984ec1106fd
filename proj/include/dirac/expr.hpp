#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace dirac {

/// A real-valued arithmetic expression in one variable `x`.
///
/// Grammar (whitespace ignored):
///
///     expr    := term (('+' | '-') term)*
///     term    := unary (('*' | '/') unary)*
///     unary   := ('+' | '-') unary | power
///     power   := primary ('^' unary)?          right associative
///     primary := number | 'x' | 'pi' | func '(' expr ')' | '(' expr ')'
///     func    := sin | cos | exp | log | sqrt
///
/// Parse failures throw Error{ParseError} with the byte offset of the
/// offending token.
class Expression {
 public:
  struct Node;

  static Expression parse(std::string_view text);

  double operator()(double x) const;
  const std::string& text() const { return text_; }
  /// True when the expression is the literal constant 0.
  bool is_zero_literal() const;

 private:
  Expression(std::string text, std::shared_ptr<const Node> root)
      : text_(std::move(text)), root_(std::move(root)) {}

  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace dirac
