#include "quadsr/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <limits>

namespace quadsr::sr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double apply_binary(Op op, double a, double b) {
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return std::abs(b) < kDivisionGuard ? kNaN : a / b;
    default: throw ExprError("not a binary operator");
  }
}

double apply_unary(Op op, double a) {
  switch (op) {
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Sqrt: return a < 0 ? kNaN : std::sqrt(a);
    default: throw ExprError("not a unary operator");
  }
}

}  // namespace

int arity(Op op) {
  switch (op) {
    case Op::Const:
    case Op::Var: return 0;
    case Op::Sin:
    case Op::Cos:
    case Op::Sqrt: return 1;
    default: return 2;
  }
}

bool is_terminal(Op op) { return arity(op) == 0; }

// ---------------------------------------------------------------------------
// ExprTree

ExprTree::ExprTree(std::vector<Node> prefix) : nodes_(std::move(prefix)) {
  if (nodes_.empty()) throw ExprError("empty expression");
  std::size_t need = 1;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (need == 0) throw ExprError("trailing nodes after a complete expression");
    need = need - 1 + static_cast<std::size_t>(arity(nodes_[i].op));
    if (nodes_[i].op == Op::Var && nodes_[i].var < 0) throw ExprError("negative variable index");
  }
  if (need != 0) throw ExprError("incomplete expression");
}

ExprTree ExprTree::constant(double v) { return ExprTree({Node{Op::Const, v, 0}}); }

ExprTree ExprTree::variable(int index) { return ExprTree({Node{Op::Var, 0.0, index}}); }

ExprTree ExprTree::unary(Op op, const ExprTree& a) {
  if (arity(op) != 1) throw ExprError("unary() needs a unary operator");
  std::vector<Node> n;
  n.reserve(a.size() + 1);
  n.push_back(Node{op, 0.0, 0});
  n.insert(n.end(), a.nodes_.begin(), a.nodes_.end());
  return ExprTree(std::move(n));
}

ExprTree ExprTree::binary(Op op, const ExprTree& a, const ExprTree& b) {
  if (arity(op) != 2) throw ExprError("binary() needs a binary operator");
  std::vector<Node> n;
  n.reserve(a.size() + b.size() + 1);
  n.push_back(Node{op, 0.0, 0});
  n.insert(n.end(), a.nodes_.begin(), a.nodes_.end());
  n.insert(n.end(), b.nodes_.begin(), b.nodes_.end());
  return ExprTree(std::move(n));
}

std::size_t ExprTree::subtree_end(std::size_t i) const {
  std::size_t need = 1;
  while (need > 0) {
    need = need - 1 + static_cast<std::size_t>(arity(nodes_.at(i).op));
    ++i;
  }
  return i;
}

ExprTree ExprTree::subtree(std::size_t i) const {
  return ExprTree(std::vector<Node>(nodes_.begin() + static_cast<long>(i),
                                    nodes_.begin() + static_cast<long>(subtree_end(i))));
}

ExprTree ExprTree::replace_subtree(std::size_t i, const ExprTree& replacement) const {
  const std::size_t end = subtree_end(i);
  std::vector<Node> n;
  n.reserve(nodes_.size() - (end - i) + replacement.size());
  n.insert(n.end(), nodes_.begin(), nodes_.begin() + static_cast<long>(i));
  n.insert(n.end(), replacement.nodes_.begin(), replacement.nodes_.end());
  n.insert(n.end(), nodes_.begin() + static_cast<long>(end), nodes_.end());
  return ExprTree(std::move(n));
}

int ExprTree::depth() const {
  // stack of remaining child slots per open node, its level tracked alongside
  int best = 0;
  std::vector<std::pair<int, int>> open;  // (remaining children, level)
  for (const Node& nd : nodes_) {
    const int level = open.empty() ? 0 : open.back().second + 1;
    best = std::max(best, level);
    if (!open.empty()) --open.back().first;
    while (!open.empty() && open.back().first == 0) open.pop_back();
    if (arity(nd.op) > 0) open.emplace_back(arity(nd.op), level);
  }
  return best;
}

int ExprTree::node_level(std::size_t target) const {
  std::vector<std::pair<int, int>> open;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const int level = open.empty() ? 0 : open.back().second + 1;
    if (i == target) return level;
    if (!open.empty()) --open.back().first;
    while (!open.empty() && open.back().first == 0) open.pop_back();
    if (arity(nodes_[i].op) > 0) open.emplace_back(arity(nodes_[i].op), level);
  }
  throw ExprError("node index out of range");
}

int ExprTree::max_variable() const {
  int m = -1;
  for (const Node& n : nodes_) {
    if (n.op == Op::Var) m = std::max(m, n.var);
  }
  return m;
}

std::size_t ExprTree::constant_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.op == Op::Const; }));
}

std::vector<double> ExprTree::constants() const {
  std::vector<double> c;
  for (const Node& n : nodes_) {
    if (n.op == Op::Const) c.push_back(n.value);
  }
  return c;
}

void ExprTree::set_constants(std::span<const double> values) {
  std::size_t k = 0;
  for (Node& n : nodes_) {
    if (n.op == Op::Const) {
      if (k >= values.size()) throw ExprError("too few constants");
      n.value = values[k++];
    }
  }
  if (k != values.size()) throw ExprError("too many constants");
}

void ExprTree::set_node(std::size_t i, const Node& n) {
  if (arity(n.op) != arity(nodes_.at(i).op)) throw ExprError("set_node must preserve arity");
  nodes_[i] = n;
}

Dataset Dataset::subset_rows(const std::vector<Eigen::Index>& rows) const {
  Dataset out;
  out.names = names;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
    out.y(static_cast<Eigen::Index>(i)) = y(rows[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double eval_scalar(const std::vector<Node>& nodes, std::size_t& i, std::span<const double> f) {
  const Node& n = nodes[i++];
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return f[static_cast<std::size_t>(n.var)];
    case Op::Sin:
    case Op::Cos:
    case Op::Sqrt: return apply_unary(n.op, eval_scalar(nodes, i, f));
    default: {
      const double a = eval_scalar(nodes, i, f);
      const double b = eval_scalar(nodes, i, f);
      return apply_binary(n.op, a, b);
    }
  }
}

Eigen::ArrayXd eval_array(const std::vector<Node>& nodes, std::size_t& i, const Eigen::MatrixXd& X) {
  const Node& n = nodes[i++];
  switch (n.op) {
    case Op::Const: return Eigen::ArrayXd::Constant(X.rows(), n.value);
    case Op::Var: return X.col(n.var).array();
    case Op::Sin: return eval_array(nodes, i, X).sin();
    case Op::Cos: return eval_array(nodes, i, X).cos();
    case Op::Sqrt: {
      Eigen::ArrayXd a = eval_array(nodes, i, X);
      return (a < 0).select(kNaN, a.max(0.0).sqrt());
    }
    default: {
      Eigen::ArrayXd a = eval_array(nodes, i, X);
      Eigen::ArrayXd b = eval_array(nodes, i, X);
      switch (n.op) {
        case Op::Add: return a + b;
        case Op::Sub: return a - b;
        case Op::Mul: return a * b;
        default: return (b.abs() < kDivisionGuard).select(kNaN, a / b);
      }
    }
  }
}

// Constants of a subtree are contiguous in prefix order, so a subtree's
// partials live in a narrow column band [c0, c0 + d.cols()).
struct Dual {
  Eigen::ArrayXd v;
  Eigen::ArrayXXd d;
  std::size_t c0 = 0;
};

Dual eval_dual(const std::vector<Node>& nodes, std::size_t& i, std::size_t& next_const, const Eigen::MatrixXd& X) {
  const Node& n = nodes[i++];
  const Eigen::Index rows = X.rows();
  switch (n.op) {
    case Op::Const: {
      Dual r{Eigen::ArrayXd::Constant(rows, n.value), Eigen::ArrayXXd::Ones(rows, 1), next_const};
      ++next_const;
      return r;
    }
    case Op::Var: return Dual{X.col(n.var).array(), Eigen::ArrayXXd(rows, 0), next_const};
    case Op::Sin:
    case Op::Cos:
    case Op::Sqrt: {
      Dual a = eval_dual(nodes, i, next_const, X);
      Eigen::ArrayXd v, g;
      if (n.op == Op::Sin) {
        v = a.v.sin();
        g = a.v.cos();
      } else if (n.op == Op::Cos) {
        v = a.v.cos();
        g = -a.v.sin();
      } else {
        v = (a.v < 0).select(kNaN, a.v.max(0.0).sqrt());
        g = 0.5 / v;
      }
      a.d.colwise() *= g;
      return Dual{std::move(v), std::move(a.d), a.c0};
    }
    default: {
      Dual a = eval_dual(nodes, i, next_const, X);
      Dual b = eval_dual(nodes, i, next_const, X);
      // b's band directly follows a's
      Eigen::ArrayXXd d(rows, a.d.cols() + b.d.cols());
      Eigen::ArrayXd v;
      switch (n.op) {
        case Op::Add:
          v = a.v + b.v;
          d << a.d, b.d;
          break;
        case Op::Sub:
          v = a.v - b.v;
          d << a.d, -b.d;
          break;
        case Op::Mul:
          v = a.v * b.v;
          d << a.d.colwise() * b.v, b.d.colwise() * a.v;
          break;
        default: {
          v = (b.v.abs() < kDivisionGuard).select(kNaN, a.v / b.v);
          const Eigen::ArrayXd inv = 1.0 / b.v;
          d << a.d.colwise() * inv, b.d.colwise() * (-v * inv);
          break;
        }
      }
      const std::size_t c0 = a.d.cols() > 0 ? a.c0 : b.c0;
      return Dual{std::move(v), std::move(d), c0};
    }
  }
}

void check_vars(const ExprTree& tree, std::size_t features) {
  if (tree.max_variable() >= static_cast<int>(features)) {
    throw ExprError("variable index " + std::to_string(tree.max_variable()) + " out of range for " +
                    std::to_string(features) + " features");
  }
}

}  // namespace

double eval_tree(const ExprTree& tree, std::span<const double> features) {
  check_vars(tree, features.size());
  std::size_t i = 0;
  return eval_scalar(tree.nodes(), i, features);
}

Eigen::ArrayXd eval_batch(const ExprTree& tree, const Eigen::MatrixXd& X) {
  check_vars(tree, static_cast<std::size_t>(X.cols()));
  std::size_t i = 0;
  return eval_array(tree.nodes(), i, X);
}

Jacobian eval_with_jacobian(const ExprTree& tree, const Eigen::MatrixXd& X) {
  check_vars(tree, static_cast<std::size_t>(X.cols()));
  std::size_t i = 0, next_const = 0;
  Dual r = eval_dual(tree.nodes(), i, next_const, X);
  Jacobian j;
  j.value = std::move(r.v);
  j.d = r.d.matrix();
  return j;
}

double fitness_of(const Eigen::ArrayXd& pred, const Eigen::VectorXd& y) {
  if (!pred.allFinite()) return std::numeric_limits<double>::infinity();
  const double e = (pred - y.array()).abs().sum();
  return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
}

double fitness(const ExprTree& tree, const Dataset& data) {
  if (data.rows() == 0) throw ExprError("fitness needs a nonempty dataset");
  return fitness_of(eval_batch(tree, data.X), data.y);
}

// ---------------------------------------------------------------------------
// Simplification

namespace {

bool is_const(const ExprTree& t, double v) {
  return t.size() == 1 && t.nodes()[0].op == Op::Const && t.nodes()[0].value == v;
}

bool is_const(const ExprTree& t) { return t.size() == 1 && t.nodes()[0].op == Op::Const; }

bool same(const ExprTree& a, const ExprTree& b) { return a.nodes() == b.nodes(); }

/// c*X or X*c as (c, X).
std::optional<std::pair<double, ExprTree>> scaled(const ExprTree& t) {
  if (t.nodes()[0].op != Op::Mul) return std::nullopt;
  const ExprTree l = t.subtree(1), r = t.subtree(t.subtree_end(1));
  if (is_const(l)) return std::make_pair(l.nodes()[0].value, r);
  if (is_const(r)) return std::make_pair(r.nodes()[0].value, l);
  return std::nullopt;
}

/// c+X or X+c as (c, X).
std::optional<std::pair<double, ExprTree>> offset(const ExprTree& t) {
  if (t.nodes()[0].op != Op::Add) return std::nullopt;
  const ExprTree l = t.subtree(1), r = t.subtree(t.subtree_end(1));
  if (is_const(l)) return std::make_pair(l.nodes()[0].value, r);
  if (is_const(r)) return std::make_pair(r.nodes()[0].value, l);
  return std::nullopt;
}

/// c * rest with constant factors merged.
ExprTree scale(double c, const ExprTree& rest) {
  if (const auto inner = scaled(rest)) {
    const double v = c * inner->first;
    if (std::isfinite(v)) return scale(v, inner->second);
  }
  if (c == 1.0) return rest;
  return ExprTree::binary(Op::Mul, ExprTree::constant(c), rest);
}

ExprTree simplify_at(const ExprTree& tree, std::size_t i) {
  const Node& n = tree.nodes()[i];
  const int a = arity(n.op);
  if (a == 0) return ExprTree({n});

  const ExprTree lhs = simplify_at(tree, i + 1);
  if (a == 1) {
    if (is_const(lhs)) {
      const double v = apply_unary(n.op, lhs.nodes()[0].value);
      if (std::isfinite(v)) return ExprTree::constant(v);
    }
    return ExprTree::unary(n.op, lhs);
  }

  const ExprTree rhs = simplify_at(tree, tree.subtree_end(i + 1));
  if (is_const(lhs) && is_const(rhs)) {
    const double v = apply_binary(n.op, lhs.nodes()[0].value, rhs.nodes()[0].value);
    if (std::isfinite(v)) return ExprTree::constant(v);
  }
  switch (n.op) {
    case Op::Add:
      if (is_const(rhs, 0.0)) return lhs;
      if (is_const(lhs, 0.0)) return rhs;
      // c1 + (c2 + x) -> (c1 + c2) + x
      for (const auto& [c, other] : {std::pair{lhs, rhs}, std::pair{rhs, lhs}}) {
        if (!is_const(c)) continue;
        if (const auto inner = offset(other)) {
          const double v = c.nodes()[0].value + inner->first;
          if (std::isfinite(v)) return ExprTree::binary(Op::Add, inner->second, ExprTree::constant(v));
        }
      }
      break;
    case Op::Sub:
      if (is_const(rhs, 0.0)) return lhs;
      if (same(lhs, rhs)) return ExprTree::constant(0.0);
      // 0 - (0 - x) -> x
      if (is_const(lhs, 0.0) && rhs.nodes()[0].op == Op::Sub && rhs.nodes()[1].op == Op::Const &&
          rhs.nodes()[1].value == 0.0) {
        return rhs.subtree(2);
      }
      break;
    case Op::Mul:
      if (is_const(rhs, 1.0)) return lhs;
      if (is_const(lhs, 1.0)) return rhs;
      if (is_const(rhs, 0.0) || is_const(lhs, 0.0)) return ExprTree::constant(0.0);
      // constant factors move to the front and merge
      if (is_const(lhs) && scaled(rhs)) return scale(lhs.nodes()[0].value, rhs);
      if (is_const(rhs)) return scale(rhs.nodes()[0].value, lhs);
      if (const auto l = scaled(lhs)) {
        if (const auto r = scaled(rhs)) {
          return scale(l->first * r->first, ExprTree::binary(Op::Mul, l->second, r->second));
        }
      }
      break;
    case Op::Div:
      if (is_const(rhs, 1.0)) return lhs;
      if (same(lhs, rhs)) return ExprTree::constant(1.0);
      // x / c -> (1/c) * x
      if (is_const(rhs) && rhs.nodes()[0].value != 0.0) {
        const double inv = 1.0 / rhs.nodes()[0].value;
        if (std::isfinite(inv) && std::abs(rhs.nodes()[0].value) >= kDivisionGuard) return scale(inv, lhs);
      }
      break;
    default: break;
  }
  return ExprTree::binary(n.op, lhs, rhs);
}

}  // namespace

ExprTree simplify(const ExprTree& tree) { return simplify_at(tree, 0); }

// ---------------------------------------------------------------------------
// Rendering

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  const auto e = s.find('e');
  if (e != std::string::npos) {
    std::string mant = s.substr(0, e);
    std::string exp = s.substr(e + 1);
    std::string sign;
    if (!exp.empty() && (exp[0] == '+' || exp[0] == '-')) {
      if (exp[0] == '-') sign = "-";
      exp.erase(0, 1);
    }
    exp.erase(0, std::min(exp.find_first_not_of('0'), exp.size() - 1));
    s = mant + "e" + sign + exp;
  }
  return s;
}

namespace {

bool is_square(const ExprTree& t, std::size_t i) {
  const auto& nd = t.nodes();
  return nd[i].op == Op::Mul && nd[i + 1].op == Op::Var && nd[i + 2].op == Op::Var && nd[i + 1].var == nd[i + 2].var;
}

// 1: additive, 2: multiplicative, 3: atom
int precedence(const ExprTree& t, std::size_t i) {
  if (is_square(t, i)) return 3;
  const Node& n = t.nodes()[i];
  switch (n.op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Const: return n.value < 0 || std::signbit(n.value) ? 1 : 3;
    default: return 3;
  }
}

std::string render_at(const ExprTree& t, std::size_t i, std::span<const std::string> names);

std::string wrap_if(bool cond, std::string s) { return cond ? "(" + s + ")" : s; }

std::string render_at(const ExprTree& t, std::size_t i, std::span<const std::string> names) {
  const Node& n = t.nodes()[i];
  switch (n.op) {
    case Op::Const: return format_number(n.value);
    case Op::Var: {
      const auto v = static_cast<std::size_t>(n.var);
      return v < names.size() ? names[v] : "x" + std::to_string(v);
    }
    case Op::Sin: return "sin(" + render_at(t, i + 1, names) + ")";
    case Op::Cos: return "cos(" + render_at(t, i + 1, names) + ")";
    case Op::Sqrt: return "sqrt(" + render_at(t, i + 1, names) + ")";
    default: break;
  }
  if (is_square(t, i)) return render_at(t, i + 1, names) + "^2";

  const std::size_t li = i + 1;
  const std::size_t ri = t.subtree_end(li);
  const int lp = precedence(t, li), rp = precedence(t, ri);
  std::string l = render_at(t, li, names);
  std::string r = render_at(t, ri, names);
  switch (n.op) {
    case Op::Add: return l + " + " + wrap_if(rp <= 1, r);
    case Op::Sub:
      if (t.nodes()[li].op == Op::Const && t.nodes()[li].value == 0.0 && !std::signbit(t.nodes()[li].value)) {
        return "-" + wrap_if(rp <= 2, r);
      }
      return l + " - " + wrap_if(rp <= 1, r);
    case Op::Mul: return wrap_if(lp <= 1, l) + "*" + wrap_if(rp <= 2, r);
    default: return wrap_if(lp <= 1, l) + "/" + wrap_if(rp <= 2, r);
  }
}

// ---------------------------------------------------------------------------
// Parsing

class Parser {
 public:
  Parser(std::string_view text, std::span<const std::string> names) : s_(text), names_(names) {}

  ExprTree parse() {
    ExprTree t = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return t;
  }

 private:
  std::string_view s_;
  std::span<const std::string> names_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ExprError("parse error at " + std::to_string(pos_) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ExprTree expr() {
    ExprTree t = term();
    for (;;) {
      if (accept('+')) {
        t = ExprTree::binary(Op::Add, t, term());
      } else if (accept('-')) {
        t = ExprTree::binary(Op::Sub, t, term());
      } else {
        return t;
      }
    }
  }

  ExprTree term() {
    ExprTree t = unary();
    for (;;) {
      if (accept('*')) {
        t = ExprTree::binary(Op::Mul, t, unary());
      } else if (accept('/')) {
        t = ExprTree::binary(Op::Div, t, unary());
      } else {
        return t;
      }
    }
  }

  ExprTree unary() {
    if (accept('-')) {
      ExprTree a = unary();
      if (a.size() == 1 && a.nodes()[0].op == Op::Const) return ExprTree::constant(-a.nodes()[0].value);
      return ExprTree::binary(Op::Sub, ExprTree::constant(0.0), a);
    }
    if (accept('+')) return unary();
    return power();
  }

  ExprTree power() {
    ExprTree base = primary();
    if (!accept('^')) return base;
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("exponent must be a nonnegative integer");
    int n = 0;
    std::from_chars(s_.data() + start, s_.data() + pos_, n);
    if (n == 0) return ExprTree::constant(1.0);
    ExprTree t = base;
    for (int k = 1; k < n; ++k) t = ExprTree::binary(Op::Mul, t, base);
    return t;
  }

  ExprTree primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      ExprTree t = expr();
      if (!accept(')')) fail("expected ')'");
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string_view id = s_.substr(start, pos_ - start);
      for (const auto& [name, op] : {std::pair{"sin", Op::Sin}, {"cos", Op::Cos}, {"sqrt", Op::Sqrt}}) {
        if (id == name) {
          if (!accept('(')) fail("expected '(' after " + std::string(id));
          ExprTree arg = expr();
          if (!accept(')')) fail("expected ')'");
          return ExprTree::unary(op, arg);
        }
      }
      for (std::size_t k = 0; k < names_.size(); ++k) {
        if (names_[k] == id) return ExprTree::variable(static_cast<int>(k));
      }
      fail("unknown identifier '" + std::string(id) + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  ExprTree number() {
    double v = 0;
    const auto res = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (res.ec != std::errc()) fail("bad number");
    pos_ = static_cast<std::size_t>(res.ptr - s_.data());
    return ExprTree::constant(v);
  }
};

}  // namespace

std::string render(const ExprTree& tree, std::span<const std::string> names) { return render_at(tree, 0, names); }

ExprTree parse_expr(std::string_view text, std::span<const std::string> names) { return Parser(text, names).parse(); }

}  // namespace quadsr::sr
