// Scalar expressions over the chart variables (x, y, t).
//
// Grammar (whitespace ignored):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | func '(' expr ')' | '(' expr ')'
//   name    := 'x' | 'y' | 't' | 'alpha' | 'pi'
//   func    := 'sin' | 'cos' | 'exp' | 'sqrt' | 'log'
//
// 'alpha' is an alias for the third chart variable, which is the fiber
// angle in the roto-translation chart.
#pragma once

#include <array>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace subriemann {

using Coords = std::array<double, 3>;

struct Box {
  Coords lo{-1.0, -1.0, -1.0};
  Coords hi{1.0, 1.0, 1.0};

  bool contains(const Coords& p, double slack = 0.0) const {
    for (int i = 0; i < 3; ++i)
      if (p[i] < lo[i] - slack || p[i] > hi[i] + slack) return false;
    return true;
  }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t pos)
      : std::runtime_error(what + " at column " + std::to_string(pos + 1)), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
struct Node;
}

class ExprFn {
 public:
  ExprFn();  // the zero function
  static ExprFn parse(std::string_view text);
  static ExprFn constant(double c);
  static ExprFn variable(int index);

  double operator()(const Coords& p) const;
  double operator()(double x, double y, double t) const { return (*this)(Coords{x, y, t}); }

  ExprFn derivative(int var) const;
  ExprFn substitute(int var, const ExprFn& replacement) const;

  bool is_constant() const;
  double constant_value() const;  // only meaningful when is_constant()
  bool depends_on(int var) const;
  std::string str() const;

  // Conservative interval check that every division, sqrt, log and
  // fractional power stays defined on the box. Returns an empty string on
  // success, otherwise a description of the offending subexpression.
  std::string domain_violation(const Box& box) const;

  friend ExprFn operator+(const ExprFn& a, const ExprFn& b);
  friend ExprFn operator-(const ExprFn& a, const ExprFn& b);
  friend ExprFn operator*(const ExprFn& a, const ExprFn& b);
  friend ExprFn operator/(const ExprFn& a, const ExprFn& b);
  friend ExprFn operator-(const ExprFn& a);
  friend ExprFn pow(const ExprFn& a, const ExprFn& b);
  friend ExprFn sin(const ExprFn& a);
  friend ExprFn cos(const ExprFn& a);
  friend ExprFn exp(const ExprFn& a);
  friend ExprFn sqrt(const ExprFn& a);
  friend ExprFn log(const ExprFn& a);

 private:
  explicit ExprFn(std::shared_ptr<const detail::Node> root);
  void compile();

  struct Instr {
    int op;
    int a;
    int b;
    double value;
  };

  std::shared_ptr<const detail::Node> root_;
  std::vector<Instr> tape_;
};

inline ExprFn operator+(const ExprFn& a, double b) { return a + ExprFn::constant(b); }
inline ExprFn operator+(double a, const ExprFn& b) { return ExprFn::constant(a) + b; }
inline ExprFn operator-(const ExprFn& a, double b) { return a - ExprFn::constant(b); }
inline ExprFn operator-(double a, const ExprFn& b) { return ExprFn::constant(a) - b; }
inline ExprFn operator*(double a, const ExprFn& b) { return ExprFn::constant(a) * b; }
inline ExprFn operator*(const ExprFn& a, double b) { return a * ExprFn::constant(b); }
inline ExprFn operator/(const ExprFn& a, double b) { return a / ExprFn::constant(b); }
inline ExprFn operator/(double a, const ExprFn& b) { return ExprFn::constant(a) / b; }
inline ExprFn pow(const ExprFn& a, double b) { return pow(a, ExprFn::constant(b)); }

// Gradient and Hessian of an expression, built once and evaluated together.
class ExprJet {
 public:
  ExprJet() = default;
  explicit ExprJet(ExprFn f);

  const ExprFn& fn() const { return f_; }
  double value(const Coords& p) const { return f_(p); }
  std::array<double, 3> gradient(const Coords& p) const;
  std::array<std::array<double, 3>, 3> hessian(const Coords& p) const;
  const ExprFn& d(int i) const { return grad_[i]; }
  const ExprFn& dd(int i, int j) const { return hess_[i][j]; }

 private:
  ExprFn f_;
  std::array<ExprFn, 3> grad_;
  std::array<std::array<ExprFn, 3>, 3> hess_;
};

}  // namespace subriemann
