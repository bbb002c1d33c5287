#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "accretiv/grid.hpp"

namespace accretiv {

/// Coefficient expression language for CLI configs.
///
/// Grammar: decimal literals, the imaginary unit i, variables x1..xn,
/// abs(x) = Euclidean norm of the evaluation point (bare x is only legal
/// there), named parameters, unary -, binary + - * / ^ (with ^ > unary- >
/// * / > + -, ^ right associative, the rest left), and the functions
/// log, exp, sin, cos, abs, sqrt.
class Expr {
 public:
  struct Node;
  using NodePtr = std::shared_ptr<const Node>;

  static Expr parse(const std::string& text);

  /// Pretty-print; parse(print(e)) reproduces the AST.
  std::string print() const;

  /// Scalar evaluation at a point with bound parameters.
  cplx eval(const std::array<double, 3>& x, int dim,
            const std::map<std::string, double>& params) const;

  /// Nodewise evaluation; NaN/Inf at any node is a hard error naming it.
  CScalarField eval_on_grid(const GridSpec& g,
                            const std::map<std::string, double>& params) const;

  /// Names of parameters referenced by the expression.
  std::vector<std::string> parameters() const;

 private:
  NodePtr root_;
};

struct ExprError : std::runtime_error {
  int line, col;
  ExprError(const std::string& m, int line_, int col_)
      : std::runtime_error(m + " (line " + std::to_string(line_) + ", col " +
                           std::to_string(col_) + ")"),
        line(line_),
        col(col_) {}
};

}  // namespace accretiv
