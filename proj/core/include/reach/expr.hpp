#pragma once

// Small expression language for drift components, so scenarios can be
// declared in config files without recompilation.
//
// Grammar (precedence low to high):
//   expr   := term   (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' INT)*        (right-assoc, INT a non-negative integer)
//   atom   := NUMBER | 't' | 'x'<k> | func '(' expr (',' expr)* ')' | '(' expr ')'
//   func   := abs | sin | cos | exp | min | max    (min/max take >= 2 args)
//
// '^' exponents are restricted to non-negative integer constants and are
// evaluated by repeated multiplication, so no branch cuts enter the
// Lipschitz sampling.

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "reach/vec.hpp"

namespace reach {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, const std::string& message,
             std::vector<std::string> expected = {})
      : std::runtime_error("parse error at position " + std::to_string(position) + ": " +
                           message),
        position_(position),
        expected_(std::move(expected)) {}

  std::size_t position() const { return position_; }  // 1-based character index
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t position_;
  std::vector<std::string> expected_;
};

class EvalError : public std::runtime_error {
 public:
  explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

enum class UnaryOp { Neg, Abs, Sin, Cos, Exp };
enum class BinaryOp { Add, Sub, Mul, Div };
enum class NaryOp { Min, Max };

struct ExprNode;
using ExprNodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Kind { Constant, Variable, Time, Unary, Binary, Nary, Power };

  Kind kind;
  double value = 0.0;     // Constant
  int var_index = 0;      // Variable, zero-based
  UnaryOp uop{};          // Unary
  BinaryOp bop{};         // Binary
  NaryOp nop{};           // Nary
  long exponent = 0;      // Power
  std::vector<ExprNodePtr> args;
};

// Immutable parsed expression; eval is pure and reentrant.
class Expr {
 public:
  Expr() = default;
  Expr(ExprNodePtr root, int dim, std::string source)
      : root_(std::move(root)), dim_(dim), source_(std::move(source)) {}

  bool valid() const { return root_ != nullptr; }
  int dim() const { return dim_; }
  const std::string& source() const { return source_; }
  const ExprNodePtr& root() const { return root_; }

  // exact recursive evaluation; division by zero and overflow to
  // non-finite raise EvalError
  double eval(const Vec& x, double t) const;

  // canonical text form; parsing it back yields a structurally equal tree
  std::string pretty() const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  ExprNodePtr root_;
  int dim_ = 0;
  std::string source_;
};

// Recursive-descent parse with positions reported 1-based.
Expr parse_expr(const std::string& src, int dim);

}  // namespace reach
