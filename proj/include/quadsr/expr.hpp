#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace quadsr::sr {

enum class Op : std::uint8_t { Const, Var, Add, Sub, Mul, Div, Sin, Cos, Sqrt };

int arity(Op op);
bool is_terminal(Op op);

struct Node {
  Op op = Op::Const;
  double value = 0.0;  // Const
  int var = 0;         // Var

  bool operator==(const Node&) const = default;
};

/// Malformed tree, out-of-range variable or unparsable text.
class ExprError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Divisors with magnitude below this evaluate to NaN.
inline constexpr double kDivisionGuard = 1e-12;

/// Expression tree stored as a prefix-order node list.
///
/// A subtree rooted at node i occupies the contiguous range
/// [i, subtree_end(i)), which makes crossover a splice.
class ExprTree {
 public:
  ExprTree() : nodes_{Node{}} {}
  explicit ExprTree(std::vector<Node> prefix);

  static ExprTree constant(double v);
  static ExprTree variable(int index);
  static ExprTree unary(Op op, const ExprTree& a);
  static ExprTree binary(Op op, const ExprTree& a, const ExprTree& b);

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  /// Node count.
  std::size_t complexity() const { return nodes_.size(); }
  /// Longest root-to-leaf edge count; a single leaf has depth 0.
  int depth() const;
  /// Depth of the node at position i measured from the root.
  int node_level(std::size_t i) const;

  std::size_t subtree_end(std::size_t i) const;
  ExprTree subtree(std::size_t i) const;
  ExprTree replace_subtree(std::size_t i, const ExprTree& replacement) const;

  int max_variable() const;
  std::size_t constant_count() const;
  std::vector<double> constants() const;
  void set_constants(std::span<const double> values);
  void set_node(std::size_t i, const Node& n);

  bool operator==(const ExprTree&) const = default;

 private:
  std::vector<Node> nodes_;
};

/// Row-per-sample feature matrix with one target column.
struct Dataset {
  Eigen::MatrixXd X;  // n x k
  Eigen::VectorXd y;  // n
  std::vector<std::string> names;

  std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t features() const { return static_cast<std::size_t>(X.cols()); }
  Dataset subset_rows(const std::vector<Eigen::Index>& rows) const;
};

double eval_tree(const ExprTree& tree, std::span<const double> features);
Eigen::ArrayXd eval_batch(const ExprTree& tree, const Eigen::MatrixXd& X);

/// Values and partial derivatives with respect to every constant, in prefix
/// order of the constants.
struct Jacobian {
  Eigen::ArrayXd value;
  Eigen::MatrixXd d;  // n x constant_count
};
Jacobian eval_with_jacobian(const ExprTree& tree, const Eigen::MatrixXd& X);

/// Sum of absolute errors; +inf if any prediction is non-finite.
double fitness(const ExprTree& tree, const Dataset& data);
double fitness_of(const Eigen::ArrayXd& pred, const Eigen::VectorXd& y);

/// Constant folding and identity elimination. Never grows the tree.
ExprTree simplify(const ExprTree& tree);

/// Infix text using `names` for variables; parse_expr reads it back.
std::string render(const ExprTree& tree, std::span<const std::string> names);
ExprTree parse_expr(std::string_view text, std::span<const std::string> names);

/// Shortest round-trip decimal for v, with compact exponents (7.78e-6).
std::string format_number(double v);

}  // namespace quadsr::sr
