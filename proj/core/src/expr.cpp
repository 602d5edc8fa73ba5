#include "reach/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>

namespace reach {

namespace {

struct Parser {
  const std::string& src;
  int dim;
  std::size_t pos = 0;  // zero-based cursor

  explicit Parser(const std::string& s, int d) : src(s), dim(d) {}

  [[noreturn]] void fail(std::size_t at, const std::string& msg,
                         std::vector<std::string> expected = {}) {
    throw ParseError(at + 1, msg, std::move(expected));
  }

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }

  bool peek_is(char c) {
    skip_ws();
    return pos < src.size() && src[pos] == c;
  }

  bool accept(char c) {
    if (peek_is(c)) {
      ++pos;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!accept(c)) fail(pos, std::string("expected '") + c + "'", {what});
  }

  ExprNodePtr make(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

  ExprNodePtr parse_expression() {
    ExprNodePtr lhs = parse_term();
    for (;;) {
      skip_ws();
      if (accept('+')) {
        ExprNode n{ExprNode::Kind::Binary};
        n.bop = BinaryOp::Add;
        n.args = {lhs, parse_term()};
        lhs = make(std::move(n));
      } else if (accept('-')) {
        ExprNode n{ExprNode::Kind::Binary};
        n.bop = BinaryOp::Sub;
        n.args = {lhs, parse_term()};
        lhs = make(std::move(n));
      } else {
        return lhs;
      }
    }
  }

  ExprNodePtr parse_term() {
    ExprNodePtr lhs = parse_factor();
    for (;;) {
      skip_ws();
      if (accept('*')) {
        ExprNode n{ExprNode::Kind::Binary};
        n.bop = BinaryOp::Mul;
        n.args = {lhs, parse_factor()};
        lhs = make(std::move(n));
      } else if (accept('/')) {
        ExprNode n{ExprNode::Kind::Binary};
        n.bop = BinaryOp::Div;
        n.args = {lhs, parse_factor()};
        lhs = make(std::move(n));
      } else {
        return lhs;
      }
    }
  }

  ExprNodePtr parse_factor() {
    skip_ws();
    if (accept('-')) {
      ExprNode n{ExprNode::Kind::Unary};
      n.uop = UnaryOp::Neg;
      n.args = {parse_factor()};
      return make(std::move(n));
    }
    return parse_power();
  }

  ExprNodePtr parse_power() {
    ExprNodePtr base = parse_atom();
    std::vector<long> exps;
    while (true) {
      skip_ws();
      if (!accept('^')) break;
      exps.push_back(parse_integer_exponent());
    }
    if (exps.empty()) return base;
    // right-associative fold of the constant exponent chain
    long e = exps.back();
    for (std::size_t i = exps.size() - 1; i-- > 0;) {
      long b = exps[i];
      long r = 1;
      for (long k = 0; k < e; ++k) {
        r *= b;
        if (r > 1000000) fail(pos, "exponent too large");
      }
      e = r;
    }
    ExprNode n{ExprNode::Kind::Power};
    n.exponent = e;
    n.args = {base};
    return make(std::move(n));
  }

  long parse_integer_exponent() {
    skip_ws();
    const std::size_t start = pos;
    if (pos >= src.size() || !std::isdigit(static_cast<unsigned char>(src[pos])))
      fail(pos, "exponent must be a non-negative integer constant",
           {"integer"});
    long v = 0;
    auto res = std::from_chars(src.data() + pos, src.data() + src.size(), v);
    pos = static_cast<std::size_t>(res.ptr - src.data());
    if (pos < src.size() && (src[pos] == '.' || src[pos] == 'e' || src[pos] == 'E'))
      fail(start, "exponent must be a non-negative integer constant", {"integer"});
    if (v > 1000000) fail(start, "exponent too large");
    return v;
  }

  ExprNodePtr parse_atom() {
    skip_ws();
    if (pos >= src.size())
      fail(pos, "unexpected end of input", {"number", "variable", "function", "("});
    const char c = src[pos];
    if (c == '(') {
      ++pos;
      ExprNodePtr inner = parse_expression();
      expect(')', ")");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    fail(pos, std::string("unexpected character '") + c + "'",
         {"number", "variable", "function", "("});
  }

  ExprNodePtr parse_number() {
    const std::size_t start = pos;
    double v = 0.0;
    auto res = std::from_chars(src.data() + pos, src.data() + src.size(), v);
    if (res.ec != std::errc() || res.ptr == src.data() + pos)
      fail(start, "malformed number", {"number"});
    pos = static_cast<std::size_t>(res.ptr - src.data());
    ExprNode n{ExprNode::Kind::Constant};
    n.value = v;
    return make(std::move(n));
  }

  ExprNodePtr parse_identifier() {
    const std::size_t start = pos;
    while (pos < src.size() && (std::isalnum(static_cast<unsigned char>(src[pos])) ||
                                src[pos] == '_'))
      ++pos;
    const std::string name = src.substr(start, pos - start);

    if (name == "t") {
      ExprNode n{ExprNode::Kind::Time};
      return make(std::move(n));
    }
    if (name.size() >= 2 && name[0] == 'x') {
      int k = 0;
      auto res = std::from_chars(name.data() + 1, name.data() + name.size(), k);
      if (res.ec == std::errc() && res.ptr == name.data() + name.size()) {
        if (k < 1 || k > dim)
          fail(start, "variable " + name + " out of range for dimension " +
                          std::to_string(dim));
        ExprNode n{ExprNode::Kind::Variable};
        n.var_index = k - 1;
        return make(std::move(n));
      }
    }

    static const struct {
      const char* name;
      UnaryOp op;
    } kUnary[] = {{"abs", UnaryOp::Abs}, {"sin", UnaryOp::Sin},
                  {"cos", UnaryOp::Cos}, {"exp", UnaryOp::Exp}};
    for (const auto& u : kUnary) {
      if (name == u.name) {
        expect('(', "(");
        ExprNodePtr arg = parse_expression();
        expect(')', ")");
        ExprNode n{ExprNode::Kind::Unary};
        n.uop = u.op;
        n.args = {arg};
        return make(std::move(n));
      }
    }
    if (name == "min" || name == "max") {
      expect('(', "(");
      std::vector<ExprNodePtr> args;
      args.push_back(parse_expression());
      while (accept(',')) args.push_back(parse_expression());
      expect(')', ")");
      if (args.size() < 2)
        fail(start, name + " needs at least 2 arguments");
      ExprNode n{ExprNode::Kind::Nary};
      n.nop = name == "min" ? NaryOp::Min : NaryOp::Max;
      n.args = std::move(args);
      return make(std::move(n));
    }
    fail(start, "unknown identifier '" + name + "'",
         {"t", "x1..x" + std::to_string(dim), "abs", "sin", "cos", "exp", "min", "max"});
  }
};

double eval_node(const ExprNode& n, const Vec& x, double t);

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw EvalError(std::string("non-finite result in ") + what);
  return v;
}

double eval_node(const ExprNode& n, const Vec& x, double t) {
  switch (n.kind) {
    case ExprNode::Kind::Constant:
      return n.value;
    case ExprNode::Kind::Variable:
      return x[n.var_index];
    case ExprNode::Kind::Time:
      return t;
    case ExprNode::Kind::Unary: {
      const double a = eval_node(*n.args[0], x, t);
      switch (n.uop) {
        case UnaryOp::Neg: return -a;
        case UnaryOp::Abs: return std::fabs(a);
        case UnaryOp::Sin: return std::sin(a);
        case UnaryOp::Cos: return std::cos(a);
        case UnaryOp::Exp: return checked(std::exp(a), "exp");
      }
      break;
    }
    case ExprNode::Kind::Binary: {
      const double a = eval_node(*n.args[0], x, t);
      const double b = eval_node(*n.args[1], x, t);
      switch (n.bop) {
        case BinaryOp::Add: return checked(a + b, "+");
        case BinaryOp::Sub: return checked(a - b, "-");
        case BinaryOp::Mul: return checked(a * b, "*");
        case BinaryOp::Div:
          if (b == 0.0) throw EvalError("division by zero");
          return checked(a / b, "/");
      }
      break;
    }
    case ExprNode::Kind::Nary: {
      double acc = eval_node(*n.args[0], x, t);
      for (std::size_t i = 1; i < n.args.size(); ++i) {
        const double v = eval_node(*n.args[i], x, t);
        acc = n.nop == NaryOp::Min ? std::min(acc, v) : std::max(acc, v);
      }
      return acc;
    }
    case ExprNode::Kind::Power: {
      const double a = eval_node(*n.args[0], x, t);
      double r = 1.0;
      for (long k = 0; k < n.exponent; ++k) r = checked(r * a, "^");
      return r;
    }
  }
  throw EvalError("corrupt expression node");
}

std::string format_constant(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void print_node(const ExprNode& n, std::string& out) {
  switch (n.kind) {
    case ExprNode::Kind::Constant:
      if (std::signbit(n.value)) {
        out += "(-";
        out += format_constant(-n.value);
        out += ')';
      } else {
        out += format_constant(n.value);
      }
      return;
    case ExprNode::Kind::Variable:
      out += 'x';
      out += std::to_string(n.var_index + 1);
      return;
    case ExprNode::Kind::Time:
      out += 't';
      return;
    case ExprNode::Kind::Unary:
      switch (n.uop) {
        case UnaryOp::Neg: out += "(-"; break;
        case UnaryOp::Abs: out += "abs("; break;
        case UnaryOp::Sin: out += "sin("; break;
        case UnaryOp::Cos: out += "cos("; break;
        case UnaryOp::Exp: out += "exp("; break;
      }
      print_node(*n.args[0], out);
      out += ')';
      return;
    case ExprNode::Kind::Binary: {
      out += '(';
      print_node(*n.args[0], out);
      switch (n.bop) {
        case BinaryOp::Add: out += " + "; break;
        case BinaryOp::Sub: out += " - "; break;
        case BinaryOp::Mul: out += "*"; break;
        case BinaryOp::Div: out += "/"; break;
      }
      print_node(*n.args[1], out);
      out += ')';
      return;
    }
    case ExprNode::Kind::Nary: {
      out += n.nop == NaryOp::Min ? "min(" : "max(";
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        print_node(*n.args[i], out);
      }
      out += ')';
      return;
    }
    case ExprNode::Kind::Power:
      out += '(';
      print_node(*n.args[0], out);
      out += '^';
      out += std::to_string(n.exponent);
      out += ')';
      return;
  }
}

bool nodes_equal(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprNode::Kind::Constant:
      return a.value == b.value || (std::isnan(a.value) && std::isnan(b.value));
    case ExprNode::Kind::Variable: return a.var_index == b.var_index;
    case ExprNode::Kind::Time: return true;
    case ExprNode::Kind::Unary:
      if (a.uop != b.uop) return false;
      break;
    case ExprNode::Kind::Binary:
      if (a.bop != b.bop) return false;
      break;
    case ExprNode::Kind::Nary:
      if (a.nop != b.nop) return false;
      break;
    case ExprNode::Kind::Power:
      if (a.exponent != b.exponent) return false;
      break;
  }
  if (a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!nodes_equal(*a.args[i], *b.args[i])) return false;
  return true;
}

}  // namespace

double Expr::eval(const Vec& x, double t) const {
  if (!root_) throw EvalError("empty expression");
  if (x.dim != dim_) throw EvalError("eval: vector dimension mismatch");
  return eval_node(*root_, x, t);
}

std::string Expr::pretty() const {
  if (!root_) return "";
  std::string out;
  print_node(*root_, out);
  return out;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.dim_ != b.dim_) return false;
  if (!a.root_ || !b.root_) return a.root_ == b.root_;
  return nodes_equal(*a.root_, *b.root_);
}

Expr parse_expr(const std::string& src, int dim) {
  if (dim < 1) throw ParseError(1, "dimension must be at least 1");
  Parser p(src, dim);
  ExprNodePtr root = p.parse_expression();
  p.skip_ws();
  if (p.pos != src.size())
    p.fail(p.pos, std::string("trailing input starting at '") + src[p.pos] + "'");
  return Expr(std::move(root), dim, src);
}

}  // namespace reach
