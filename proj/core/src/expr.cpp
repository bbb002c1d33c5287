#include "accretiv/expr.hpp"

#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

namespace accretiv {

enum class Op { Lit, Imag, Var, PointNorm, Param, Neg, Add, Sub, Mul, Div, Pow, Fun };

struct Expr::Node {
  Op op;
  double lit = 0.0;
  int var = 0;          // x{var+1}
  std::string name;     // parameter or function name
  NodePtr a, b;
  int line = 1, col = 1;
};

namespace {

struct Token {
  enum Kind { Num, Ident, Sym, End } kind;
  std::string text;
  double num = 0.0;
  int line, col;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) { advance(); }
  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      if (s_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= s_.size()) {
      tok_.kind = Token::End;
      return;
    }
    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
        ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
        std::size_t save = pos_;
        ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
        if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
          while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
        } else {
          pos_ = save;
        }
      }
      tok_.kind = Token::Num;
      tok_.text = s_.substr(start, pos_ - start);
      tok_.num = std::stod(tok_.text);
      col_ += static_cast<int>(pos_ - start);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      tok_.kind = Token::Ident;
      tok_.text = s_.substr(start, pos_ - start);
      col_ += static_cast<int>(pos_ - start);
      return;
    }
    tok_.kind = Token::Sym;
    tok_.text = std::string(1, c);
    ++pos_;
    ++col_;
  }

  std::string s_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

const std::set<std::string> kFunctions = {"log", "exp", "sin", "cos", "abs", "sqrt"};

class Parser {
 public:
  explicit Parser(const std::string& s) : lex_(s) {}

  Expr::NodePtr parse() {
    auto e = sum();
    if (lex_.peek().kind != Token::End)
      fail("unexpected trailing input", lex_.peek());
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& m, const Token& t) {
    throw ExprError(m + (t.text.empty() ? "" : " near '" + t.text + "'"), t.line, t.col);
  }

  bool is_sym(const char* s) {
    return lex_.peek().kind == Token::Sym && lex_.peek().text == s;
  }

  Expr::NodePtr sum() {
    auto e = term();
    while (is_sym("+") || is_sym("-")) {
      Token t = lex_.take();
      auto n = std::make_shared<Expr::Node>();
      n->op = t.text == "+" ? Op::Add : Op::Sub;
      n->line = t.line;
      n->col = t.col;
      n->a = e;
      n->b = term();
      e = n;
    }
    return e;
  }

  Expr::NodePtr term() {
    auto e = unary();
    while (is_sym("*") || is_sym("/")) {
      Token t = lex_.take();
      auto n = std::make_shared<Expr::Node>();
      n->op = t.text == "*" ? Op::Mul : Op::Div;
      n->line = t.line;
      n->col = t.col;
      n->a = e;
      n->b = unary();
      e = n;
    }
    return e;
  }

  Expr::NodePtr unary() {
    if (is_sym("-")) {
      Token t = lex_.take();
      auto n = std::make_shared<Expr::Node>();
      n->op = Op::Neg;
      n->line = t.line;
      n->col = t.col;
      n->a = unary();
      return n;
    }
    if (is_sym("+")) {
      lex_.take();
      return unary();
    }
    return power();
  }

  Expr::NodePtr power() {
    auto base = atom();
    if (is_sym("^")) {
      Token t = lex_.take();
      auto n = std::make_shared<Expr::Node>();
      n->op = Op::Pow;
      n->line = t.line;
      n->col = t.col;
      n->a = base;
      // right associative; exponent may carry a unary minus
      bool neg = false;
      while (is_sym("-")) {
        lex_.take();
        neg = !neg;
      }
      n->b = power_exponent(neg);
      return n;
    }
    return base;
  }

  Expr::NodePtr power_exponent(bool neg) {
    auto e = power();
    if (!neg) return e;
    auto n = std::make_shared<Expr::Node>();
    n->op = Op::Neg;
    n->line = e->line;
    n->col = e->col;
    n->a = e;
    return n;
  }

  Expr::NodePtr atom() {
    Token t = lex_.peek();
    if (t.kind == Token::Num) {
      lex_.take();
      auto n = std::make_shared<Expr::Node>();
      n->op = Op::Lit;
      n->lit = t.num;
      n->line = t.line;
      n->col = t.col;
      return n;
    }
    if (t.kind == Token::Sym && t.text == "(") {
      lex_.take();
      auto e = sum();
      if (!is_sym(")")) fail("expected ')'", lex_.peek());
      lex_.take();
      return e;
    }
    if (t.kind == Token::Ident) {
      lex_.take();
      const std::string& id = t.text;
      if (id == "i") {
        auto n = std::make_shared<Expr::Node>();
        n->op = Op::Imag;
        n->line = t.line;
        n->col = t.col;
        return n;
      }
      if (kFunctions.count(id)) {
        if (!is_sym("(")) fail("expected '(' after function " + id, lex_.peek());
        lex_.take();
        // abs(x): bare x means the Euclidean norm of the point
        if (id == "abs" && lex_.peek().kind == Token::Ident &&
            lex_.peek().text == "x") {
          Token xt = lex_.take();
          if (!is_sym(")")) fail("expected ')' after abs(x", lex_.peek());
          lex_.take();
          auto n = std::make_shared<Expr::Node>();
          n->op = Op::PointNorm;
          n->line = xt.line;
          n->col = xt.col;
          return n;
        }
        auto arg = sum();
        if (!is_sym(")")) fail("expected ')'", lex_.peek());
        lex_.take();
        auto n = std::make_shared<Expr::Node>();
        n->op = Op::Fun;
        n->name = id;
        n->a = arg;
        n->line = t.line;
        n->col = t.col;
        return n;
      }
      if (id.size() == 2 && id[0] == 'x' && id[1] >= '1' && id[1] <= '3') {
        auto n = std::make_shared<Expr::Node>();
        n->op = Op::Var;
        n->var = id[1] - '1';
        n->line = t.line;
        n->col = t.col;
        return n;
      }
      if (id == "x")
        fail("bare x is only valid as abs(x)", t);
      // anything else is a named parameter
      auto n = std::make_shared<Expr::Node>();
      n->op = Op::Param;
      n->name = id;
      n->line = t.line;
      n->col = t.col;
      return n;
    }
    fail("expected expression", t);
  }

  Lexer lex_;
};

void collect_params(const Expr::NodePtr& n, std::set<std::string>& out) {
  if (!n) return;
  if (n->op == Op::Param) out.insert(n->name);
  collect_params(n->a, out);
  collect_params(n->b, out);
}

struct EvalCtx {
  const std::array<double, 3>* x;
  int dim;
  const std::map<std::string, double>* params;
};

cplx eval_node(const Expr::Node& n, const EvalCtx& ctx) {
  auto domain_error = [&](const std::string& m) -> ExprError {
    return ExprError(m, n.line, n.col);
  };
  switch (n.op) {
    case Op::Lit:
      return n.lit;
    case Op::Imag:
      return cplx(0.0, 1.0);
    case Op::Var:
      if (n.var >= ctx.dim)
        throw domain_error("variable x" + std::to_string(n.var + 1) +
                           " exceeds grid dimension");
      return (*ctx.x)[n.var];
    case Op::PointNorm: {
      double s = 0.0;
      for (int a = 0; a < ctx.dim; ++a) s += (*ctx.x)[a] * (*ctx.x)[a];
      return std::sqrt(s);
    }
    case Op::Param: {
      auto it = ctx.params->find(n.name);
      if (it == ctx.params->end())
        throw domain_error("unbound parameter '" + n.name + "'");
      return it->second;
    }
    case Op::Neg:
      return -eval_node(*n.a, ctx);
    case Op::Add:
      return eval_node(*n.a, ctx) + eval_node(*n.b, ctx);
    case Op::Sub:
      return eval_node(*n.a, ctx) - eval_node(*n.b, ctx);
    case Op::Mul:
      return eval_node(*n.a, ctx) * eval_node(*n.b, ctx);
    case Op::Div: {
      cplx d = eval_node(*n.b, ctx);
      if (d == cplx(0.0, 0.0)) throw domain_error("division by zero");
      return eval_node(*n.a, ctx) / d;
    }
    case Op::Pow: {
      cplx base = eval_node(*n.a, ctx);
      cplx ex = eval_node(*n.b, ctx);
      if (ex.imag() != 0.0) throw domain_error("exponent must be real");
      double p = ex.real();
      if (base.imag() == 0.0) {
        double br = base.real();
        if (br == 0.0 && p <= 0.0) throw domain_error("0 raised to nonpositive power");
        if (br < 0.0 && p != std::floor(p))
          throw domain_error("negative base with non-integer exponent");
        if (br < 0.0) {
          double r = std::pow(-br, p);
          return (static_cast<long long>(p) % 2 == 0) ? r : -r;
        }
        return std::pow(br, p);
      }
      return std::pow(base, cplx(p, 0.0));
    }
    case Op::Fun: {
      cplx v = eval_node(*n.a, ctx);
      if (n.name == "abs") return std::abs(v);
      if (n.name == "exp") return std::exp(v);
      if (n.name == "sin") return std::sin(v);
      if (n.name == "cos") return std::cos(v);
      if (n.name == "log") {
        if (v.imag() == 0.0) {
          if (v.real() <= 0.0) throw domain_error("log of nonpositive real");
          return std::log(v.real());
        }
        return std::log(v);
      }
      if (n.name == "sqrt") {
        if (v.imag() == 0.0) {
          if (v.real() < 0.0) throw domain_error("sqrt of negative real");
          return std::sqrt(v.real());
        }
        return std::sqrt(v);
      }
      throw domain_error("unknown function " + n.name);
    }
  }
  throw domain_error("corrupt expression node");
}

void print_node(const Expr::Node& n, std::ostringstream& os);

void print_child(const Expr::NodePtr& c, std::ostringstream& os, bool paren) {
  if (paren) os << '(';
  print_node(*c, os);
  if (paren) os << ')';
}

int precedence(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    default:
      return 5;
  }
}

void print_node(const Expr::Node& n, std::ostringstream& os) {
  switch (n.op) {
    case Op::Lit: {
      std::ostringstream t;
      t.precision(17);
      t << n.lit;
      os << t.str();
      return;
    }
    case Op::Imag:
      os << "i";
      return;
    case Op::Var:
      os << "x" << (n.var + 1);
      return;
    case Op::PointNorm:
      os << "abs(x)";
      return;
    case Op::Param:
      os << n.name;
      return;
    case Op::Neg:
      os << "-";
      print_child(n.a, os, precedence(n.a->op) < precedence(Op::Neg));
      return;
    case Op::Add:
    case Op::Sub:
      print_child(n.a, os, precedence(n.a->op) < 1);
      os << (n.op == Op::Add ? "+" : "-");
      print_child(n.b, os, precedence(n.b->op) <= 1);
      return;
    case Op::Mul:
    case Op::Div:
      print_child(n.a, os, precedence(n.a->op) < 2);
      os << (n.op == Op::Mul ? "*" : "/");
      print_child(n.b, os, precedence(n.b->op) <= 2);
      return;
    case Op::Pow:
      print_child(n.a, os, precedence(n.a->op) <= 4);
      os << "^";
      print_child(n.b, os, precedence(n.b->op) < 4);
      return;
    case Op::Fun:
      os << n.name << "(";
      print_node(*n.a, os);
      os << ")";
      return;
  }
}

}  // namespace

Expr Expr::parse(const std::string& text) {
  Parser p(text);
  Expr e;
  e.root_ = p.parse();
  return e;
}

std::string Expr::print() const {
  std::ostringstream os;
  print_node(*root_, os);
  return os.str();
}

cplx Expr::eval(const std::array<double, 3>& x, int dim,
                const std::map<std::string, double>& params) const {
  EvalCtx ctx{&x, dim, &params};
  return eval_node(*root_, ctx);
}

CScalarField Expr::eval_on_grid(
    const GridSpec& g, const std::map<std::string, double>& params) const {
  CScalarField out(g, 1);
  for (std::size_t k = 0; k < out.nodes(); ++k) {
    auto x = g.point(k);
    cplx v = eval(x, g.dim, params);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      std::ostringstream m;
      m << "non-finite value at node (";
      for (int a = 0; a < g.dim; ++a) m << (a ? "," : "") << x[a];
      m << ")";
      throw ExprError(m.str(), root_->line, root_->col);
    }
    out[k] = v;
  }
  return out;
}

std::vector<std::string> Expr::parameters() const {
  std::set<std::string> s;
  collect_params(root_, s);
  return std::vector<std::string>(s.begin(), s.end());
}

}  // namespace accretiv
