#include "subriemann/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace subriemann {

namespace detail {

enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Sqrt, Log };

struct Node {
  Op op;
  double value = 0.0;
  int var = -1;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
};

}  // namespace detail

namespace {

using detail::Node;
using detail::Op;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_const(double v) { return std::make_shared<Node>(Node{Op::Const, v, -1, nullptr, nullptr}); }
NodePtr make_var(int i) { return std::make_shared<Node>(Node{Op::Var, 0.0, i, nullptr, nullptr}); }

bool is_const(const NodePtr& n, double v) { return n->op == Op::Const && n->value == v; }

double apply_unary(Op op, double a) {
  switch (op) {
    case Op::Neg: return -a;
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Exp: return std::exp(a);
    case Op::Sqrt: return std::sqrt(a);
    case Op::Log: return std::log(a);
    default: return a;
  }
}

double apply_pow(double a, double b) {
  if (b == 2.0) return a * a;
  if (b == 3.0) return a * a * a;
  if (b == 1.0) return a;
  return std::pow(a, b);
}

NodePtr unary(Op op, NodePtr a) {
  if (a->op == Op::Const) return make_const(apply_unary(op, a->value));
  if (op == Op::Neg && a->op == Op::Neg) return a->a;
  return std::make_shared<Node>(Node{op, 0.0, -1, std::move(a), nullptr});
}

NodePtr binary(Op op, NodePtr a, NodePtr b) {
  const bool ca = a->op == Op::Const, cb = b->op == Op::Const;
  switch (op) {
    case Op::Add:
      if (ca && cb) return make_const(a->value + b->value);
      if (is_const(a, 0.0)) return b;
      if (is_const(b, 0.0)) return a;
      if (b->op == Op::Neg) return binary(Op::Sub, a, b->a);
      break;
    case Op::Sub:
      if (ca && cb) return make_const(a->value - b->value);
      if (is_const(b, 0.0)) return a;
      if (is_const(a, 0.0)) return unary(Op::Neg, b);
      if (a == b) return make_const(0.0);
      if (b->op == Op::Neg) return binary(Op::Add, a, b->a);
      break;
    case Op::Mul:
      if (ca && cb) return make_const(a->value * b->value);
      if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
      if (is_const(a, 1.0)) return b;
      if (is_const(b, 1.0)) return a;
      if (is_const(a, -1.0)) return unary(Op::Neg, b);
      if (is_const(b, -1.0)) return unary(Op::Neg, a);
      if (a->op == Op::Neg && b->op == Op::Neg) return binary(Op::Mul, a->a, b->a);
      if (a->op == Op::Neg) return unary(Op::Neg, binary(Op::Mul, a->a, b));
      if (b->op == Op::Neg) return unary(Op::Neg, binary(Op::Mul, a, b->a));
      break;
    case Op::Div:
      if (ca && cb && b->value != 0.0) return make_const(a->value / b->value);
      if (is_const(a, 0.0)) return make_const(0.0);
      if (is_const(b, 1.0)) return a;
      if (a->op == Op::Neg) return unary(Op::Neg, binary(Op::Div, a->a, b));
      break;
    case Op::Pow:
      if (ca && cb) return make_const(apply_pow(a->value, b->value));
      if (is_const(b, 1.0)) return a;
      if (is_const(b, 0.0)) return make_const(1.0);
      break;
    default: break;
  }
  return std::make_shared<Node>(Node{op, 0.0, -1, std::move(a), std::move(b)});
}

NodePtr differentiate(const NodePtr& n, int var, std::unordered_map<const Node*, NodePtr>& memo) {
  if (auto it = memo.find(n.get()); it != memo.end()) return it->second;
  NodePtr d;
  switch (n->op) {
    case Op::Const: d = make_const(0.0); break;
    case Op::Var: d = make_const(n->var == var ? 1.0 : 0.0); break;
    case Op::Add: d = binary(Op::Add, differentiate(n->a, var, memo), differentiate(n->b, var, memo)); break;
    case Op::Sub: d = binary(Op::Sub, differentiate(n->a, var, memo), differentiate(n->b, var, memo)); break;
    case Op::Mul:
      d = binary(Op::Add, binary(Op::Mul, differentiate(n->a, var, memo), n->b),
                 binary(Op::Mul, n->a, differentiate(n->b, var, memo)));
      break;
    case Op::Div: {
      auto da = differentiate(n->a, var, memo);
      auto db = differentiate(n->b, var, memo);
      d = binary(Op::Sub, binary(Op::Div, da, n->b),
                 binary(Op::Div, binary(Op::Mul, n->a, db), binary(Op::Pow, n->b, make_const(2.0))));
      break;
    }
    case Op::Pow: {
      auto da = differentiate(n->a, var, memo);
      if (n->b->op == Op::Const) {
        const double c = n->b->value;
        d = binary(Op::Mul, binary(Op::Mul, make_const(c), binary(Op::Pow, n->a, make_const(c - 1.0))), da);
      } else {
        auto db = differentiate(n->b, var, memo);
        auto inner = binary(Op::Add, binary(Op::Mul, db, unary(Op::Log, n->a)),
                            binary(Op::Div, binary(Op::Mul, n->b, da), n->a));
        d = binary(Op::Mul, n, inner);
      }
      break;
    }
    case Op::Neg: d = unary(Op::Neg, differentiate(n->a, var, memo)); break;
    case Op::Sin: d = binary(Op::Mul, unary(Op::Cos, n->a), differentiate(n->a, var, memo)); break;
    case Op::Cos:
      d = unary(Op::Neg, binary(Op::Mul, unary(Op::Sin, n->a), differentiate(n->a, var, memo)));
      break;
    case Op::Exp: d = binary(Op::Mul, n, differentiate(n->a, var, memo)); break;
    case Op::Sqrt:
      d = binary(Op::Div, differentiate(n->a, var, memo), binary(Op::Mul, make_const(2.0), n));
      break;
    case Op::Log: d = binary(Op::Div, differentiate(n->a, var, memo), n->a); break;
  }
  memo.emplace(n.get(), d);
  return d;
}

NodePtr substitute_node(const NodePtr& n, int var, const NodePtr& rep,
                        std::unordered_map<const Node*, NodePtr>& memo) {
  if (auto it = memo.find(n.get()); it != memo.end()) return it->second;
  NodePtr out;
  switch (n->op) {
    case Op::Const: out = n; break;
    case Op::Var: out = n->var == var ? rep : n; break;
    case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Pow:
      out = binary(n->op, substitute_node(n->a, var, rep, memo), substitute_node(n->b, var, rep, memo));
      break;
    default: out = unary(n->op, substitute_node(n->a, var, rep, memo)); break;
  }
  memo.emplace(n.get(), out);
  return out;
}

int precedence(Op op) {
  switch (op) {
    case Op::Add: case Op::Sub: return 1;
    case Op::Mul: case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    default: return 5;
  }
}

std::string format_number(double v) {
  if (v == std::numbers::pi) return "pi";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void print(const NodePtr& n, std::ostringstream& os) {
  static const char* names[] = {"x", "y", "t"};
  auto child = [&](const NodePtr& c, bool paren) {
    if (paren) os << '(';
    print(c, os);
    if (paren) os << ')';
  };
  const int p = precedence(n->op);
  switch (n->op) {
    case Op::Const:
      if (n->value < 0) os << '(' << format_number(n->value) << ')';
      else os << format_number(n->value);
      break;
    case Op::Var: os << names[n->var]; break;
    case Op::Add: child(n->a, precedence(n->a->op) < p); os << " + "; child(n->b, precedence(n->b->op) < p); break;
    case Op::Sub: child(n->a, precedence(n->a->op) < p); os << " - "; child(n->b, precedence(n->b->op) <= p); break;
    case Op::Mul: child(n->a, precedence(n->a->op) < p); os << '*'; child(n->b, precedence(n->b->op) < p); break;
    case Op::Div: child(n->a, precedence(n->a->op) < p); os << '/'; child(n->b, precedence(n->b->op) <= p); break;
    case Op::Pow: child(n->a, precedence(n->a->op) <= p); os << '^'; child(n->b, precedence(n->b->op) < p); break;
    case Op::Neg: os << '-'; child(n->a, precedence(n->a->op) < p); break;
    case Op::Sin: os << "sin("; print(n->a, os); os << ')'; break;
    case Op::Cos: os << "cos("; print(n->a, os); os << ')'; break;
    case Op::Exp: os << "exp("; print(n->a, os); os << ')'; break;
    case Op::Sqrt: os << "sqrt("; print(n->a, os); os << ')'; break;
    case Op::Log: os << "log("; print(n->a, os); os << ')'; break;
  }
}

bool depends(const NodePtr& n, int var) {
  switch (n->op) {
    case Op::Const: return false;
    case Op::Var: return n->var == var;
    case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Pow:
      return depends(n->a, var) || depends(n->b, var);
    default: return depends(n->a, var);
  }
}

// ---- parser ----

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  NodePtr parse_all() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) throw ParseError(std::string("unexpected '") + s_[pos_] + "'", pos_);
    return n;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    auto n = term();
    for (;;) {
      if (accept('+')) n = binary(Op::Add, n, term());
      else if (accept('-')) n = binary(Op::Sub, n, term());
      else return n;
    }
  }
  NodePtr term() {
    auto n = unary_expr();
    for (;;) {
      if (accept('*')) n = binary(Op::Mul, n, unary_expr());
      else if (accept('/')) n = binary(Op::Div, n, unary_expr());
      else return n;
    }
  }
  NodePtr unary_expr() {
    if (accept('-')) return unary(Op::Neg, unary_expr());
    if (accept('+')) return unary_expr();
    return power();
  }
  NodePtr power() {
    auto base = primary();
    if (accept('^')) return binary(Op::Pow, base, unary_expr());
    return base;
  }
  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      auto n = expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      const char* begin = s_.data() + pos_;
      auto [ptr, ec] = std::from_chars(begin, s_.data() + s_.size(), v);
      if (ec != std::errc()) throw ParseError("malformed number", pos_);
      pos_ += static_cast<std::size_t>(ptr - begin);
      return make_const(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string_view name = s_.substr(start, pos_ - start);
      if (name == "x") return make_var(0);
      if (name == "y") return make_var(1);
      if (name == "t" || name == "alpha") return make_var(2);
      if (name == "pi") return make_const(std::numbers::pi);
      Op op;
      if (name == "sin") op = Op::Sin;
      else if (name == "cos") op = Op::Cos;
      else if (name == "exp") op = Op::Exp;
      else if (name == "sqrt") op = Op::Sqrt;
      else if (name == "log") op = Op::Log;
      else throw ParseError("unknown identifier '" + std::string(name) + "'", start);
      if (!accept('(')) throw ParseError("expected '(' after " + std::string(name), pos_);
      auto arg = expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return unary(op, arg);
    }
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

// ---- interval arithmetic ----

struct Interval {
  double lo, hi;
};

struct IntervalFailure {
  std::string what;
};

Interval iv_sin(Interval x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (x.hi - x.lo >= two_pi) return {-1.0, 1.0};
  double lo = std::min(std::sin(x.lo), std::sin(x.hi));
  double hi = std::max(std::sin(x.lo), std::sin(x.hi));
  const double half_pi = 0.5 * std::numbers::pi;
  // crest at pi/2 + 2k pi, trough at -pi/2 + 2k pi
  if (std::ceil((x.lo - half_pi) / two_pi) <= std::floor((x.hi - half_pi) / two_pi)) hi = 1.0;
  if (std::ceil((x.lo + half_pi) / two_pi) <= std::floor((x.hi + half_pi) / two_pi)) lo = -1.0;
  return {lo, hi};
}

Interval iv_mul(Interval a, Interval b) {
  const double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
}

Interval iv_int_pow(Interval a, int n) {
  if (n == 0) return {1.0, 1.0};
  if (n < 0) {
    auto p = iv_int_pow(a, -n);
    if (p.lo <= 0.0 && p.hi >= 0.0) throw IntervalFailure{"negative power of an interval containing 0"};
    return {1.0 / p.hi, 1.0 / p.lo};
  }
  const double l = std::pow(a.lo, n), h = std::pow(a.hi, n);
  if (n % 2 == 1) return {l, h};
  if (a.lo <= 0.0 && a.hi >= 0.0) return {0.0, std::max(l, h)};
  return {std::min(l, h), std::max(l, h)};
}

Interval eval_interval(const NodePtr& n, const Box& box) {
  switch (n->op) {
    case Op::Const: return {n->value, n->value};
    case Op::Var: return {box.lo[n->var], box.hi[n->var]};
    case Op::Add: {
      auto a = eval_interval(n->a, box), b = eval_interval(n->b, box);
      return {a.lo + b.lo, a.hi + b.hi};
    }
    case Op::Sub: {
      auto a = eval_interval(n->a, box), b = eval_interval(n->b, box);
      return {a.lo - b.hi, a.hi - b.lo};
    }
    case Op::Mul: {
      auto a = eval_interval(n->a, box);
      if (n->a == n->b) return iv_int_pow(a, 2);
      return iv_mul(a, eval_interval(n->b, box));
    }
    case Op::Div: {
      auto a = eval_interval(n->a, box), b = eval_interval(n->b, box);
      if (b.lo <= 0.0 && b.hi >= 0.0) throw IntervalFailure{"divisor may vanish"};
      return iv_mul(a, Interval{1.0 / b.hi, 1.0 / b.lo});
    }
    case Op::Pow: {
      auto a = eval_interval(n->a, box);
      if (n->b->op == Op::Const) {
        const double c = n->b->value;
        if (c == std::round(c) && std::abs(c) < 64) return iv_int_pow(a, static_cast<int>(c));
        if (a.lo < 0.0 || (c < 0.0 && a.lo <= 0.0)) throw IntervalFailure{"fractional power of a possibly negative base"};
        const double l = std::pow(a.lo, c), h = std::pow(a.hi, c);
        return {std::min(l, h), std::max(l, h)};
      }
      if (a.lo <= 0.0) throw IntervalFailure{"variable exponent on a possibly non-positive base"};
      auto b = eval_interval(n->b, box);
      auto e = iv_mul(b, Interval{std::log(a.lo), std::log(a.hi)});
      return {std::exp(e.lo), std::exp(e.hi)};
    }
    case Op::Neg: {
      auto a = eval_interval(n->a, box);
      return {-a.hi, -a.lo};
    }
    case Op::Sin: return iv_sin(eval_interval(n->a, box));
    case Op::Cos: {
      auto a = eval_interval(n->a, box);
      const double h = 0.5 * std::numbers::pi;
      return iv_sin({a.lo + h, a.hi + h});
    }
    case Op::Exp: {
      auto a = eval_interval(n->a, box);
      return {std::exp(a.lo), std::exp(a.hi)};
    }
    case Op::Sqrt: {
      auto a = eval_interval(n->a, box);
      if (a.lo < 0.0) throw IntervalFailure{"sqrt of a possibly negative argument"};
      return {std::sqrt(a.lo), std::sqrt(a.hi)};
    }
    case Op::Log: {
      auto a = eval_interval(n->a, box);
      if (a.lo <= 0.0) throw IntervalFailure{"log of a possibly non-positive argument"};
      return {std::log(a.lo), std::log(a.hi)};
    }
  }
  return {0.0, 0.0};
}

std::string check_box(const NodePtr& n, const Box& box, int depth) {
  try {
    eval_interval(n, box);
    return {};
  } catch (const IntervalFailure& f) {
    if (depth == 0) return f.what;
    int widest = 0;
    for (int i = 1; i < 3; ++i)
      if (box.hi[i] - box.lo[i] > box.hi[widest] - box.lo[widest]) widest = i;
    const double mid = 0.5 * (box.lo[widest] + box.hi[widest]);
    Box left = box, right = box;
    left.hi[widest] = mid;
    right.lo[widest] = mid;
    if (auto r = check_box(n, left, depth - 1); !r.empty()) return r;
    return check_box(n, right, depth - 1);
  }
}

}  // namespace

ExprFn::ExprFn() : ExprFn(make_const(0.0)) {}

ExprFn::ExprFn(std::shared_ptr<const detail::Node> root) : root_(std::move(root)) { compile(); }

ExprFn ExprFn::parse(std::string_view text) { return ExprFn(Parser(text).parse_all()); }
ExprFn ExprFn::constant(double c) { return ExprFn(make_const(c)); }
ExprFn ExprFn::variable(int index) {
  if (index < 0 || index > 2) throw std::invalid_argument("chart variable index must be 0, 1 or 2");
  return ExprFn(make_var(index));
}

void ExprFn::compile() {
  tape_.clear();
  std::unordered_map<const Node*, int> slot;
  auto emit = [&](auto&& self, const NodePtr& n) -> int {
    if (auto it = slot.find(n.get()); it != slot.end()) return it->second;
    Instr ins{static_cast<int>(n->op), -1, -1, n->value};
    if (n->op == Op::Var) ins.a = n->var;
    if (n->a) ins.a = self(self, n->a);
    if (n->b) ins.b = self(self, n->b);
    tape_.push_back(ins);
    const int id = static_cast<int>(tape_.size()) - 1;
    slot.emplace(n.get(), id);
    return id;
  };
  emit(emit, root_);
}

double ExprFn::operator()(const Coords& p) const {
  constexpr std::size_t kStack = 128;
  double stack_regs[kStack];
  std::vector<double> heap_regs;
  double* r = stack_regs;
  if (tape_.size() > kStack) {
    heap_regs.resize(tape_.size());
    r = heap_regs.data();
  }
  for (std::size_t i = 0; i < tape_.size(); ++i) {
    const Instr& in = tape_[i];
    switch (static_cast<Op>(in.op)) {
      case Op::Const: r[i] = in.value; break;
      case Op::Var: r[i] = p[in.a]; break;
      case Op::Add: r[i] = r[in.a] + r[in.b]; break;
      case Op::Sub: r[i] = r[in.a] - r[in.b]; break;
      case Op::Mul: r[i] = r[in.a] * r[in.b]; break;
      case Op::Div: r[i] = r[in.a] / r[in.b]; break;
      case Op::Pow: r[i] = apply_pow(r[in.a], r[in.b]); break;
      default: r[i] = apply_unary(static_cast<Op>(in.op), r[in.a]); break;
    }
  }
  return r[tape_.size() - 1];
}

ExprFn ExprFn::derivative(int var) const {
  std::unordered_map<const Node*, NodePtr> memo;
  return ExprFn(differentiate(root_, var, memo));
}

ExprFn ExprFn::substitute(int var, const ExprFn& replacement) const {
  std::unordered_map<const Node*, NodePtr> memo;
  return ExprFn(substitute_node(root_, var, replacement.root_, memo));
}

bool ExprFn::is_constant() const { return root_->op == Op::Const; }
double ExprFn::constant_value() const { return root_->value; }
bool ExprFn::depends_on(int var) const { return depends(root_, var); }

std::string ExprFn::str() const {
  std::ostringstream os;
  print(root_, os);
  return os.str();
}

std::string ExprFn::domain_violation(const Box& box) const { return check_box(root_, box, 12); }

ExprFn operator+(const ExprFn& a, const ExprFn& b) { return ExprFn(binary(Op::Add, a.root_, b.root_)); }
ExprFn operator-(const ExprFn& a, const ExprFn& b) { return ExprFn(binary(Op::Sub, a.root_, b.root_)); }
ExprFn operator*(const ExprFn& a, const ExprFn& b) { return ExprFn(binary(Op::Mul, a.root_, b.root_)); }
ExprFn operator/(const ExprFn& a, const ExprFn& b) { return ExprFn(binary(Op::Div, a.root_, b.root_)); }
ExprFn operator-(const ExprFn& a) { return ExprFn(unary(Op::Neg, a.root_)); }
ExprFn pow(const ExprFn& a, const ExprFn& b) { return ExprFn(binary(Op::Pow, a.root_, b.root_)); }
ExprFn sin(const ExprFn& a) { return ExprFn(unary(Op::Sin, a.root_)); }
ExprFn cos(const ExprFn& a) { return ExprFn(unary(Op::Cos, a.root_)); }
ExprFn exp(const ExprFn& a) { return ExprFn(unary(Op::Exp, a.root_)); }
ExprFn sqrt(const ExprFn& a) { return ExprFn(unary(Op::Sqrt, a.root_)); }
ExprFn log(const ExprFn& a) { return ExprFn(unary(Op::Log, a.root_)); }

ExprJet::ExprJet(ExprFn f) : f_(std::move(f)) {
  for (int i = 0; i < 3; ++i) grad_[i] = f_.derivative(i);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      hess_[i][j] = grad_[i].derivative(j);
      hess_[j][i] = hess_[i][j];
    }
}

std::array<double, 3> ExprJet::gradient(const Coords& p) const {
  return {grad_[0](p), grad_[1](p), grad_[2](p)};
}

std::array<std::array<double, 3>, 3> ExprJet::hessian(const Coords& p) const {
  std::array<std::array<double, 3>, 3> h{};
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) h[i][j] = h[j][i] = hess_[i][j](p);
  return h;
}

}  // namespace subriemann
