#pragma once

#include "ginet/common.hpp"
#include "ginet/rng.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace ginet::ad {

using ginet::Matrix;

// One tape node in a define-by-run computation graph. Nodes are created in
// topological order (operands exist before results), so the creation index
// doubles as the topological order for the backward sweep.
struct Node {
  Matrix value;
  Matrix grad;  // allocated lazily; same shape as value
  bool requires_grad = false;
  bool is_leaf = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void()> backward_fn;  // accumulates this->grad into parents
  std::uint64_t order = 0;
  const char* op = "leaf";

  void ensure_grad() {
    if (grad.rows() != value.rows() || grad.cols() != value.cols())
      grad = Matrix::Zero(value.rows(), value.cols());
  }
};

// Value-semantics handle onto a shared tape node.
class Variable {
 public:
  Variable() = default;

  static Variable leaf(Matrix v, bool requires_grad);
  static Variable constant(Matrix v) { return leaf(std::move(v), false); }
  static Variable scalar(double v, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Matrix& value() const { return check()->value; }
  Matrix& value_mut() { return check()->value; }
  Matrix& grad() { return check()->grad; }
  const Matrix& grad() const { return check()->grad; }
  bool has_grad() const { return defined() && node_->grad.size() == node_->value.size() && node_->value.size() > 0; }
  bool requires_grad() const { return defined() && node_->requires_grad; }
  bool is_leaf() const { return defined() && node_->is_leaf; }
  double item() const;
  void zero_grad() { check()->grad.setZero(); }

  std::shared_ptr<Node> node() const { return node_; }
  explicit Variable(std::shared_ptr<Node> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<Node> check() const {
    if (!node_) throw ContractError("use of undefined Variable");
    return node_;
  }
  std::shared_ptr<Node> node_;
};

// Runs the backward sweep from a 1x1 loss node, accumulating gradients into
// every reachable node with requires_grad. Intermediate gradients are freed
// as soon as they have been consumed.
void backward(const Variable& loss);

// ---- Elementwise / broadcast arithmetic -------------------------------------

Variable add(const Variable& a, const Variable& b);        // same shape
Variable sub(const Variable& a, const Variable& b);        // same shape
Variable mul(const Variable& a, const Variable& b);        // elementwise
Variable scale(const Variable& a, double c);               // c * a
Variable add_scalar(const Variable& a, double c);          // a + c
Variable vabs(const Variable& a);                          // |a|; d|0|/dx taken as 0
Variable relu(const Variable& a);
Variable sigmoid(const Variable& a);
Variable vexp(const Variable& a);
// log with a positive floor: value = log(max(a, floor)); gradient is 0 where
// the floor engages. The floor guards cross-entropy against log(0).
Variable vlog(const Variable& a, double floor = 0.0);

// ---- Linear algebra ----------------------------------------------------------

Variable matmul(const Variable& a, const Variable& b);
// x (R x in) * W (in x out) + b (1 x out broadcast over rows), one fused node.
Variable linear(const Variable& x, const Variable& W, const Variable& b);
// linear followed by ReLU, fused into a single node (one output matrix and a
// masked gradient instead of a separate activation node).
Variable linear_relu(const Variable& x, const Variable& W, const Variable& b);

// ---- Shape ops ----------------------------------------------------------------

Variable concat_rows(const Variable& a, const Variable& b);
Variable concat_cols(const Variable& a, const Variable& b);
Variable slice_rows(const Variable& x, int begin, int count);
// y.row(r) = x.row(index[r]); backward scatter-adds.
Variable gather_rows(const Variable& x, std::vector<int> index);

// ---- Reductions ----------------------------------------------------------------

Variable sum_all(const Variable& x);   // 1x1
Variable mean_all(const Variable& x);  // 1x1
Variable sum_rows(const Variable& x);  // column sums -> 1 x C
Variable sum_cols(const Variable& x);  // row sums    -> R x 1

// ---- Row-normalized outputs -----------------------------------------------------

Variable softmax_rows(const Variable& x);

// ---- Structured ops for batched message passing ---------------------------------

// Ordered node pair (source, destination) for one message.
using PairList = std::vector<std::pair<int, int>>;

// x holds B stacked windows of n rows each ((B*n) x d). Produces one row per
// (window, pair): row b*P+p = [x.row(b*n+src_p), x.row(b*n+dst_p)], shape
// (B*P) x 2d.
Variable pair_concat(const Variable& x, const std::shared_ptr<const PairList>& pairs, int B,
                     int n);

// Weighted message aggregation. A is n x n (shared across windows), messages
// are (B*P) x W rows aligned with pair_concat. Output (B*n) x W accumulates
// out.row(b*n + dst_p) += A(src_p, dst_p) * messages.row(b*P + p).
Variable edge_aggregate(const Variable& A, const Variable& messages,
                        const std::shared_ptr<const PairList>& pairs, int B, int n);

// Builds a symmetric n x n matrix from a column of entry values: starts from
// the constant `base`, then sets (i,j) and (j,i) to entries(e) for each listed
// position. Backward sums the two mirrored gradient cells per entry.
Variable symmetric_scatter(const Variable& entries, const std::shared_ptr<const PairList>& positions,
                           Matrix base);

// Hard threshold at 0.5 with a straight-through gradient (identity backward).
Variable straight_through_round(const Variable& x);

// ---- Optimizer -------------------------------------------------------------------

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Parameters are registered with a per-group
// learning rate; step() consumes and clears gradients.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  void add_param(const Variable& p, double lr);
  void add_params(const std::vector<Variable>& ps, double lr);

  // Applies one update using the gradients currently stored on the
  // parameters; a registered parameter without a gradient is a contract
  // error. Gradients are zeroed afterwards.
  void step();
  void zero_grad();
  long steps() const { return t_; }

 private:
  struct Slot {
    Variable param;
    double lr;
    Matrix m, v;
  };
  AdamConfig cfg_;
  std::vector<Slot> slots_;
  long t_ = 0;
};

// ---- Multi-layer perceptron ---------------------------------------------------

struct LinearLayer {
  Variable W;  // in x out
  Variable b;  // 1 x out
};

struct Mlp {
  std::vector<LinearLayer> layers;

  // dims = {in, h1, ..., out}; weights get scaled-normal init
  // (std = sqrt(2/fan_in)), biases start at zero.
  static Mlp make(const std::vector<int>& dims, Rng& rng);

  // ReLU between layers; relu_output adds one after the final layer too.
  Variable forward(const Variable& x, bool relu_output) const;
  std::vector<Variable> params() const;
};

// ---- Tensor-map persistence ------------------------------------------------------

// Binary container of named matrices (doubles, little-endian), used for
// checkpoints. Order is preserved.
void save_tensors(const std::vector<std::pair<std::string, Matrix>>& tensors,
                  const std::string& path);
std::vector<std::pair<std::string, Matrix>> load_tensors(const std::string& path);

}  // namespace ginet::ad
