#include "ginet/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_set>

namespace ginet::ad {

namespace {

// Creation order doubles as topological order; the counter is thread-local so
// concurrent chunk graphs never contend (each graph lives on one thread).
thread_local std::uint64_t g_order = 0;

std::shared_ptr<Node> make_node(Matrix value, std::vector<std::shared_ptr<Node>> parents,
                                const char* op) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  n->op = op;
  n->order = ++g_order;
  for (const auto& p : n->parents)
    if (p->requires_grad) {
      n->requires_grad = true;
      break;
    }
  return n;
}

// Accumulates `delta` into the parent's gradient if the parent wants one. The
// first contribution assigns instead of clearing and adding, which halves the
// memory traffic on large intermediate gradients.
template <class Expr>
inline void accumulate(Node* parent, const Expr& delta) {
  if (!parent->requires_grad) return;
  if (parent->grad.size() == 0)
    parent->grad = delta;
  else
    parent->grad += delta;
}

// Same, for matrix products (keeps Eigen off the temporary-allocating path).
template <class Expr>
inline void accumulate_product(Node* parent, const Expr& delta) {
  if (!parent->requires_grad) return;
  if (parent->grad.size() == 0)
    parent->grad.noalias() = delta;
  else
    parent->grad.noalias() += delta;
}

// Broadcast of a single scalar into every gradient entry.
inline void accumulate_constant(Node* parent, double c) {
  if (!parent->requires_grad) return;
  if (parent->grad.size() == 0) {
    parent->grad.resize(parent->value.rows(), parent->value.cols());
    parent->grad.setConstant(c);
  } else {
    parent->grad.array() += c;
  }
}

void check_same_shape(const Variable& a, const Variable& b, const char* op) {
  if (a.value().rows() != b.value().rows() || a.value().cols() != b.value().cols())
    throw ShapeError(std::string(op) + ": shapes " + shape_str(a.value()) + " vs " +
                     shape_str(b.value()));
}

}  // namespace

Variable Variable::leaf(Matrix v, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  n->requires_grad = requires_grad;
  n->is_leaf = true;
  n->order = ++g_order;
  return Variable(std::move(n));
}

Variable Variable::scalar(double v, bool requires_grad) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return leaf(std::move(m), requires_grad);
}

double Variable::item() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1)
    throw ContractError("item: value is " + shape_str(v) + ", expected 1x1");
  return v(0, 0);
}

void backward(const Variable& loss) {
  if (!loss.defined()) throw ContractError("backward: undefined loss");
  Node* root = loss.node().get();
  if (root->value.rows() != 1 || root->value.cols() != 1)
    throw ContractError("backward: loss is " + shape_str(root->value) + ", expected 1x1");
  if (!root->requires_grad)
    throw ContractError("backward: loss does not depend on any trainable leaf");

  // Collect the reachable subgraph that carries gradients.
  std::vector<Node*> nodes;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{root};
  seen.insert(root);
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    nodes.push_back(n);
    for (const auto& p : n->parents) {
      if (!p->requires_grad) continue;
      if (seen.insert(p.get()).second) stack.push_back(p.get());
    }
  }
  // Children were created after their parents, so descending creation order
  // is a valid reverse-topological order.
  std::sort(nodes.begin(), nodes.end(),
            [](const Node* a, const Node* b) { return a->order > b->order; });

  root->ensure_grad();
  root->grad(0, 0) += 1.0;
  for (Node* n : nodes) {
    if (n->backward_fn && n->grad.size() > 0) n->backward_fn();
    if (!n->is_leaf) n->grad.resize(0, 0);  // consumed; free early
  }
}

// ---- Elementwise -------------------------------------------------------------

Variable add(const Variable& a, const Variable& b) {
  check_same_shape(a, b, "add");
  auto n = make_node(a.value() + b.value(), {a.node(), b.node()}, "add");
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node().get();
    Node* pb = b.node().get();
    n->backward_fn = [self, pa, pb] {
      accumulate(pa, self->grad);
      accumulate(pb, self->grad);
    };
  }
  return Variable(n);
}

Variable sub(const Variable& a, const Variable& b) {
  check_same_shape(a, b, "sub");
  auto n = make_node(a.value() - b.value(), {a.node(), b.node()}, "sub");
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node().get();
    Node* pb = b.node().get();
    n->backward_fn = [self, pa, pb] {
      accumulate(pa, self->grad);
      if (pb->requires_grad) {
        if (pb->grad.size() == 0)
          pb->grad = -self->grad;
        else
          pb->grad -= self->grad;
      }
    };
  }
  return Variable(n);
}

Variable mul(const Variable& a, const Variable& b) {
  check_same_shape(a, b, "mul");
  auto n = make_node(a.value().cwiseProduct(b.value()), {a.node(), b.node()}, "mul");
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node().get();
    Node* pb = b.node().get();
    n->backward_fn = [self, pa, pb] {
      if (pa->requires_grad) accumulate(pa, self->grad.cwiseProduct(pb->value));
      if (pb->requires_grad) accumulate(pb, self->grad.cwiseProduct(pa->value));
    };
  }
  return Variable(n);
}

Variable scale(const Variable& a, double c) {
  auto n = make_node(c * a.value(), {a.node()}, "scale");
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node().get();
    n->backward_fn = [self, pa, c] { accumulate(pa, c * self->grad); };
  }
  return Variable(n);
}

Variable add_scalar(const Variable& a, double c) {
  auto n = make_node(a.value().array() + c, {a.node()}, "add_scalar");
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node().get();
    n->backward_fn = [self, pa] { accumulate(pa, self->grad); };
  }
  return Variable(n);
}

Variable vabs(const Variable& a) {
  auto n = make_node(a.value().cwiseAbs(), {a.node()}, "abs");
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node().get();
    n->backward_fn = [self, pa] {
      accumulate(pa, self->grad.cwiseProduct(pa->value.unaryExpr(
                         [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); })));
    };
  }
  return Variable(n);
}

Variable relu(const Variable& a) {
  auto n = make_node(a.value().cwiseMax(0.0), {a.node()}, "relu");
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node().get();
    n->backward_fn = [self, pa] {
      accumulate(pa, self->grad.cwiseProduct(self->value.unaryExpr(
                         [](double v) { return v > 0.0 ? 1.0 : 0.0; })));
    };
  }
  return Variable(n);
}

Variable sigmoid(const Variable& a) {
  Matrix y = a.value().unaryExpr([](double v) {
    // Branch keeps exp() off large magnitudes in both directions.
    return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  });
  auto n = make_node(std::move(y), {a.node()}, "sigmoid");
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node().get();
    n->backward_fn = [self, pa] {
      accumulate(pa, self->grad.cwiseProduct(
                         (self->value.array() * (1.0 - self->value.array())).matrix()));
    };
  }
  return Variable(n);
}

Variable vexp(const Variable& a) {
  auto n = make_node(a.value().array().exp(), {a.node()}, "exp");
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node().get();
    n->backward_fn = [self, pa] { accumulate(pa, self->grad.cwiseProduct(self->value)); };
  }
  return Variable(n);
}

Variable vlog(const Variable& a, double floor) {
  const Matrix& x = a.value();
  if (floor <= 0.0) {
    if ((x.array() <= 0.0).any())
      throw NumericError("log: non-positive input without a floor");
  }
  Matrix y = x.unaryExpr([floor](double v) { return std::log(std::max(v, floor)); });
  auto n = make_node(std::move(y), {a.node()}, "log");
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node().get();
    n->backward_fn = [self, pa, floor] {
      accumulate(pa, self->grad.cwiseProduct(pa->value.unaryExpr([floor](double v) {
        return v > floor ? 1.0 / v : (floor > 0.0 ? 0.0 : 1.0 / v);
      })));
    };
  }
  return Variable(n);
}

// ---- Linear algebra ------------------------------------------------------------

Variable matmul(const Variable& a, const Variable& b) {
  if (a.value().cols() != b.value().rows())
    throw ShapeError("matmul: " + shape_str(a.value()) + " * " + shape_str(b.value()));
  auto n = make_node(a.value() * b.value(), {a.node(), b.node()}, "matmul");
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node().get();
    Node* pb = b.node().get();
    n->backward_fn = [self, pa, pb] {
      accumulate_product(pa, self->grad * pb->value.transpose());
      accumulate_product(pb, pa->value.transpose() * self->grad);
    };
  }
  return Variable(n);
}

namespace {

// Forward value of x*W + b, optionally clamped at zero. Small inner
// dimensions stream each output column in one fused pass, which sidesteps the
// clear-then-accumulate GEMM path Eigen uses for matrix products.
Matrix linear_forward_value(const Matrix& x, const Matrix& W, const Matrix& b, bool relu_out) {
  const Eigen::Index rows = x.rows();
  const Eigen::Index in = W.rows();
  const Eigen::Index out = W.cols();
  Matrix y(rows, out);
  if (in <= 4) {
    for (Eigen::Index j = 0; j < out; ++j) {
      const double bj = b(0, j);
      double* yc = y.data() + j * rows;
      const double* x0 = x.data();
      if (in == 1) {
        const double w0 = W(0, j);
        for (Eigen::Index r = 0; r < rows; ++r) {
          double acc = x0[r] * w0 + bj;
          yc[r] = relu_out && acc < 0.0 ? 0.0 : acc;
        }
      } else if (in == 2) {
        const double w0 = W(0, j), w1 = W(1, j);
        const double* x1 = x.data() + rows;
        for (Eigen::Index r = 0; r < rows; ++r) {
          double acc = x0[r] * w0 + x1[r] * w1 + bj;
          yc[r] = relu_out && acc < 0.0 ? 0.0 : acc;
        }
      } else {
        for (Eigen::Index r = 0; r < rows; ++r) {
          double acc = 0.0;
          for (Eigen::Index k = 0; k < in; ++k) acc += x(r, k) * W(k, j);
          acc += bj;
          yc[r] = relu_out && acc < 0.0 ? 0.0 : acc;
        }
      }
    }
  } else {
    y.noalias() = x * W;
    y.rowwise() += b.row(0);
    if (relu_out) y = y.cwiseMax(0.0);
  }
  return y;
}

Variable linear_impl(const Variable& x, const Variable& W, const Variable& b, bool relu_out,
                     const char* op) {
  if (x.value().cols() != W.value().rows())
    throw ShapeError("linear: x " + shape_str(x.value()) + " vs W " + shape_str(W.value()));
  if (b.value().rows() != 1 || b.value().cols() != W.value().cols())
    throw ShapeError("linear: bias " + shape_str(b.value()) + " vs W " + shape_str(W.value()));
  Matrix y = linear_forward_value(x.value(), W.value(), b.value(), relu_out);
  auto n = make_node(std::move(y), {x.node(), W.node(), b.node()}, op);
  if (n->requires_grad) {
    Node* self = n.get();
    Node* px = x.node().get();
    Node* pw = W.node().get();
    Node* pb = b.node().get();
    n->backward_fn = [self, px, pw, pb, relu_out] {
      Matrix masked;
      const Matrix* g = &self->grad;
      if (relu_out) {
        masked = self->grad.cwiseProduct(
            self->value.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
        g = &masked;
      }
      accumulate_product(px, *g * pw->value.transpose());
      accumulate_product(pw, px->value.transpose() * *g);
      accumulate(pb, g->colwise().sum());
    };
  }
  return Variable(n);
}

}  // namespace

Variable linear(const Variable& x, const Variable& W, const Variable& b) {
  return linear_impl(x, W, b, /*relu_out=*/false, "linear");
}

Variable linear_relu(const Variable& x, const Variable& W, const Variable& b) {
  return linear_impl(x, W, b, /*relu_out=*/true, "linear_relu");
}

// ---- Shape ops -------------------------------------------------------------------

Variable concat_rows(const Variable& a, const Variable& b) {
  if (a.value().cols() != b.value().cols())
    throw ShapeError("concat_rows: " + shape_str(a.value()) + " vs " + shape_str(b.value()));
  Matrix y(a.value().rows() + b.value().rows(), a.value().cols());
  y << a.value(), b.value();
  auto n = make_node(std::move(y), {a.node(), b.node()}, "concat_rows");
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node().get();
    Node* pb = b.node().get();
    const Eigen::Index ra = a.value().rows();
    n->backward_fn = [self, pa, pb, ra] {
      accumulate(pa, self->grad.topRows(ra));
      accumulate(pb, self->grad.bottomRows(self->grad.rows() - ra));
    };
  }
  return Variable(n);
}

Variable concat_cols(const Variable& a, const Variable& b) {
  if (a.value().rows() != b.value().rows())
    throw ShapeError("concat_cols: " + shape_str(a.value()) + " vs " + shape_str(b.value()));
  Matrix y(a.value().rows(), a.value().cols() + b.value().cols());
  y << a.value(), b.value();
  auto n = make_node(std::move(y), {a.node(), b.node()}, "concat_cols");
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node().get();
    Node* pb = b.node().get();
    const Eigen::Index ca = a.value().cols();
    n->backward_fn = [self, pa, pb, ca] {
      accumulate(pa, self->grad.leftCols(ca));
      accumulate(pb, self->grad.rightCols(self->grad.cols() - ca));
    };
  }
  return Variable(n);
}

Variable slice_rows(const Variable& x, int begin, int count) {
  if (begin < 0 || count < 0 || begin + count > x.value().rows())
    throw ShapeError("slice_rows: [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") out of " +
                     std::to_string(x.value().rows()) + " rows");
  auto n = make_node(x.value().middleRows(begin, count), {x.node()}, "slice_rows");
  if (n->requires_grad) {
    Node* self = n.get();
    Node* px = x.node().get();
    n->backward_fn = [self, px, begin, count] {
      if (!px->requires_grad) return;
      px->ensure_grad();
      px->grad.middleRows(begin, count) += self->grad;
    };
  }
  return Variable(n);
}

Variable gather_rows(const Variable& x, std::vector<int> index) {
  const Eigen::Index rows = x.value().rows();
  for (int i : index)
    if (i < 0 || i >= rows) throw ShapeError("gather_rows: index out of range");
  const Eigen::Index d = x.value().cols();
  const auto R = static_cast<Eigen::Index>(index.size());
  Matrix y(R, d);
  // Column-at-a-time keeps both sides on contiguous memory.
  for (Eigen::Index c = 0; c < d; ++c) {
    const double* src = x.value().data() + c * rows;
    double* dst = y.data() + c * R;
    for (Eigen::Index r = 0; r < R; ++r) dst[r] = src[index[static_cast<std::size_t>(r)]];
  }
  auto n = make_node(std::move(y), {x.node()}, "gather_rows");
  if (n->requires_grad) {
    Node* self = n.get();
    Node* px = x.node().get();
    auto idx = std::make_shared<std::vector<int>>(std::move(index));
    n->backward_fn = [self, px, idx, rows, d] {
      if (!px->requires_grad) return;
      px->ensure_grad();
      const auto R = static_cast<Eigen::Index>(idx->size());
      for (Eigen::Index c = 0; c < d; ++c) {
        const double* g = self->grad.data() + c * R;
        double* out = px->grad.data() + c * rows;
        for (Eigen::Index r = 0; r < R; ++r) out[(*idx)[static_cast<std::size_t>(r)]] += g[r];
      }
    };
  }
  return Variable(n);
}

// ---- Reductions ---------------------------------------------------------------------

Variable sum_all(const Variable& x) {
  Matrix y(1, 1);
  y(0, 0) = x.value().sum();
  auto n = make_node(std::move(y), {x.node()}, "sum_all");
  if (n->requires_grad) {
    Node* self = n.get();
    Node* px = x.node().get();
    n->backward_fn = [self, px] { accumulate_constant(px, self->grad(0, 0)); };
  }
  return Variable(n);
}

Variable mean_all(const Variable& x) {
  const double count = static_cast<double>(x.value().size());
  if (count == 0) throw ShapeError("mean_all: empty input");
  Matrix y(1, 1);
  y(0, 0) = x.value().sum() / count;
  auto n = make_node(std::move(y), {x.node()}, "mean_all");
  if (n->requires_grad) {
    Node* self = n.get();
    Node* px = x.node().get();
    n->backward_fn = [self, px, count] {
      accumulate_constant(px, self->grad(0, 0) / count);
    };
  }
  return Variable(n);
}

Variable sum_rows(const Variable& x) {
  auto n = make_node(x.value().colwise().sum(), {x.node()}, "sum_rows");
  if (n->requires_grad) {
    Node* self = n.get();
    Node* px = x.node().get();
    n->backward_fn = [self, px] {
      if (!px->requires_grad) return;
      px->ensure_grad();
      px->grad.rowwise() += self->grad.row(0);
    };
  }
  return Variable(n);
}

Variable sum_cols(const Variable& x) {
  auto n = make_node(x.value().rowwise().sum(), {x.node()}, "sum_cols");
  if (n->requires_grad) {
    Node* self = n.get();
    Node* px = x.node().get();
    n->backward_fn = [self, px] {
      if (!px->requires_grad) return;
      px->ensure_grad();
      px->grad.colwise() += self->grad.col(0);
    };
  }
  return Variable(n);
}

// ---- Softmax ---------------------------------------------------------------------------

Variable softmax_rows(const Variable& x) {
  Matrix y = x.value();
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    const double mx = y.row(r).maxCoeff();
    y.row(r) = (y.row(r).array() - mx).exp();
    y.row(r) /= y.row(r).sum();
  }
  auto n = make_node(std::move(y), {x.node()}, "softmax_rows");
  if (n->requires_grad) {
    Node* self = n.get();
    Node* px = x.node().get();
    n->backward_fn = [self, px] {
      if (!px->requires_grad) return;
      const Matrix gy = self->grad.cwiseProduct(self->value);
      const Matrix rowdot = gy.rowwise().sum();  // R x 1
      accumulate(px,
                 gy - self->value.cwiseProduct(rowdot.replicate(1, self->value.cols())));
    };
  }
  return Variable(n);
}

// ---- Structured message-passing ops -----------------------------------------------------

Variable pair_concat(const Variable& x, const std::shared_ptr<const PairList>& pairs, int B,
                     int n) {
  const Eigen::Index d = x.value().cols();
  if (x.value().rows() != static_cast<Eigen::Index>(B) * n)
    throw ShapeError("pair_concat: x has " + std::to_string(x.value().rows()) +
                     " rows, expected B*n = " + std::to_string(B * n));
  const auto P = static_cast<Eigen::Index>(pairs->size());
  for (const auto& [s, t] : *pairs)
    if (s < 0 || s >= n || t < 0 || t >= n)
      throw ShapeError("pair_concat: pair index out of range");
  const Eigen::Index out_rows = static_cast<Eigen::Index>(B) * P;
  Matrix y(out_rows, 2 * d);
  // Column-at-a-time: the source column stays cache-resident while the
  // destination columns are written sequentially.
  for (Eigen::Index c = 0; c < d; ++c) {
    const double* src = x.value().data() + c * x.value().rows();
    double* dst_s = y.data() + c * out_rows;
    double* dst_t = y.data() + (d + c) * out_rows;
    for (int b = 0; b < B; ++b) {
      const double* xb = src + static_cast<Eigen::Index>(b) * n;
      const Eigen::Index yoff = static_cast<Eigen::Index>(b) * P;
      for (Eigen::Index p = 0; p < P; ++p) {
        const auto& [s, t] = (*pairs)[static_cast<std::size_t>(p)];
        dst_s[yoff + p] = xb[s];
        dst_t[yoff + p] = xb[t];
      }
    }
  }
  auto node = make_node(std::move(y), {x.node()}, "pair_concat");
  if (node->requires_grad) {
    Node* self = node.get();
    Node* px = x.node().get();
    node->backward_fn = [self, px, pairs, B, n, d, P] {
      if (!px->requires_grad) return;
      px->ensure_grad();
      const Eigen::Index out_rows = static_cast<Eigen::Index>(B) * P;
      for (Eigen::Index c = 0; c < d; ++c) {
        const double* g_s = self->grad.data() + c * out_rows;
        const double* g_t = self->grad.data() + (d + c) * out_rows;
        double* out = px->grad.data() + c * px->grad.rows();
        for (int b = 0; b < B; ++b) {
          double* xb = out + static_cast<Eigen::Index>(b) * n;
          const Eigen::Index yoff = static_cast<Eigen::Index>(b) * P;
          for (Eigen::Index p = 0; p < P; ++p) {
            const auto& [s, t] = (*pairs)[static_cast<std::size_t>(p)];
            xb[s] += g_s[yoff + p];
            xb[t] += g_t[yoff + p];
          }
        }
      }
    };
  }
  return Variable(node);
}

Variable edge_aggregate(const Variable& A, const Variable& messages,
                        const std::shared_ptr<const PairList>& pairs, int B, int n) {
  if (A.value().rows() != n || A.value().cols() != n)
    throw ShapeError("edge_aggregate: A is " + shape_str(A.value()) + ", expected " +
                     std::to_string(n) + "x" + std::to_string(n));
  const auto P = static_cast<Eigen::Index>(pairs->size());
  const Eigen::Index W = messages.value().cols();
  if (messages.value().rows() != static_cast<Eigen::Index>(B) * P)
    throw ShapeError("edge_aggregate: messages have " + std::to_string(messages.value().rows()) +
                     " rows, expected B*P = " + std::to_string(B * static_cast<int>(P)));
  // The adjacency is one n x n matrix shared by every window in the chunk, so
  // the per-pair weights and destinations can be flattened once up front.
  auto weights = std::make_shared<std::vector<double>>(static_cast<std::size_t>(P));
  auto dests = std::make_shared<std::vector<int>>(static_cast<std::size_t>(P));
  for (Eigen::Index p = 0; p < P; ++p) {
    const auto& [s, t] = (*pairs)[static_cast<std::size_t>(p)];
    (*weights)[static_cast<std::size_t>(p)] = A.value()(s, t);
    (*dests)[static_cast<std::size_t>(p)] = t;
  }
  const Eigen::Index agg_rows = static_cast<Eigen::Index>(B) * n;
  const Eigen::Index msg_rows = static_cast<Eigen::Index>(B) * P;
  Matrix y(agg_rows, W);
  // Column-at-a-time: each output column stays cache-resident while the
  // message column streams through.
  for (Eigen::Index k = 0; k < W; ++k) {
    double* yc = y.data() + k * agg_rows;
    std::fill(yc, yc + agg_rows, 0.0);
    const double* mc = messages.value().data() + k * msg_rows;
    for (int b = 0; b < B; ++b) {
      double* yb = yc + static_cast<Eigen::Index>(b) * n;
      const double* mb = mc + static_cast<Eigen::Index>(b) * P;
      for (Eigen::Index p = 0; p < P; ++p) {
        const double w = (*weights)[static_cast<std::size_t>(p)];
        if (w != 0.0) yb[(*dests)[static_cast<std::size_t>(p)]] += w * mb[p];
      }
    }
  }
  auto node = make_node(std::move(y), {A.node(), messages.node()}, "edge_aggregate");
  if (node->requires_grad) {
    Node* self = node.get();
    Node* pA = A.node().get();
    Node* pm = messages.node().get();
    node->backward_fn = [self, pA, pm, pairs, weights, dests, B, n, P] {
      const Eigen::Index W = self->grad.cols();
      const Eigen::Index agg_rows = static_cast<Eigen::Index>(B) * n;
      const Eigen::Index msg_rows = static_cast<Eigen::Index>(B) * P;
      if (pm->requires_grad) {
        const bool fresh = pm->grad.size() == 0;
        if (fresh) pm->grad.resize(msg_rows, W);
        for (Eigen::Index k = 0; k < W; ++k) {
          const double* gc = self->grad.data() + k * agg_rows;
          double* mgc = pm->grad.data() + k * msg_rows;
          for (int b = 0; b < B; ++b) {
            const double* gb = gc + static_cast<Eigen::Index>(b) * n;
            double* mgb = mgc + static_cast<Eigen::Index>(b) * P;
            for (Eigen::Index p = 0; p < P; ++p) {
              const double w = (*weights)[static_cast<std::size_t>(p)];
              const double v = w != 0.0 ? w * gb[(*dests)[static_cast<std::size_t>(p)]] : 0.0;
              if (fresh)
                mgb[p] = v;
              else
                mgb[p] += v;
            }
          }
        }
      }
      if (pA->requires_grad) {
        pA->ensure_grad();
        std::vector<double> acc(static_cast<std::size_t>(P), 0.0);
        for (Eigen::Index k = 0; k < W; ++k) {
          const double* gc = self->grad.data() + k * agg_rows;
          const double* mc = pm->value.data() + k * msg_rows;
          for (int b = 0; b < B; ++b) {
            const double* gb = gc + static_cast<Eigen::Index>(b) * n;
            const double* mb = mc + static_cast<Eigen::Index>(b) * P;
            for (Eigen::Index p = 0; p < P; ++p)
              acc[static_cast<std::size_t>(p)] += mb[p] * gb[(*dests)[static_cast<std::size_t>(p)]];
          }
        }
        for (Eigen::Index p = 0; p < P; ++p) {
          const auto& [s, t] = (*pairs)[static_cast<std::size_t>(p)];
          pA->grad(s, t) += acc[static_cast<std::size_t>(p)];
        }
      }
    };
  }
  return Variable(node);
}

Variable symmetric_scatter(const Variable& entries, const std::shared_ptr<const PairList>& positions,
                           Matrix base) {
  if (entries.value().cols() != 1 ||
      entries.value().rows() != static_cast<Eigen::Index>(positions->size()))
    throw ShapeError("symmetric_scatter: entries must be " +
                     std::to_string(positions->size()) + "x1, got " +
                     shape_str(entries.value()));
  if (base.rows() != base.cols()) throw ShapeError("symmetric_scatter: base must be square");
  const Eigen::Index n = base.rows();
  for (const auto& [i, j] : *positions)
    if (i < 0 || i >= n || j < 0 || j >= n || i == j)
      throw ShapeError("symmetric_scatter: bad position (diagonal or out of range)");
  Matrix y = std::move(base);
  for (std::size_t e = 0; e < positions->size(); ++e) {
    const auto& [i, j] = (*positions)[e];
    y(i, j) = y(j, i) = entries.value()(static_cast<Eigen::Index>(e), 0);
  }
  auto node = make_node(std::move(y), {entries.node()}, "symmetric_scatter");
  if (node->requires_grad) {
    Node* self = node.get();
    Node* pe = entries.node().get();
    node->backward_fn = [self, pe, positions] {
      if (!pe->requires_grad) return;
      pe->ensure_grad();
      for (std::size_t e = 0; e < positions->size(); ++e) {
        const auto& [i, j] = (*positions)[e];
        pe->grad(static_cast<Eigen::Index>(e), 0) += self->grad(i, j) + self->grad(j, i);
      }
    };
  }
  return Variable(node);
}

Variable straight_through_round(const Variable& x) {
  Matrix y = x.value().unaryExpr([](double v) { return v >= 0.5 ? 1.0 : 0.0; });
  auto n = make_node(std::move(y), {x.node()}, "st_round");
  if (n->requires_grad) {
    Node* self = n.get();
    Node* px = x.node().get();
    n->backward_fn = [self, px] { accumulate(px, self->grad); };
  }
  return Variable(n);
}

// ---- Adam ------------------------------------------------------------------------------

void Adam::add_param(const Variable& p, double lr) {
  if (!p.is_leaf() || !p.requires_grad())
    throw ContractError("Adam: parameters must be trainable leaves");
  Slot s;
  s.param = p;
  s.lr = lr;
  s.m = Matrix::Zero(p.value().rows(), p.value().cols());
  s.v = Matrix::Zero(p.value().rows(), p.value().cols());
  slots_.push_back(std::move(s));
}

void Adam::add_params(const std::vector<Variable>& ps, double lr) {
  for (const auto& p : ps) add_param(p, lr);
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (auto& s : slots_) {
    if (!s.param.has_grad())
      throw ContractError("Adam: parameter has no gradient at step()");
    const Matrix& g = s.param.grad();
    s.m = cfg_.beta1 * s.m + (1.0 - cfg_.beta1) * g;
    s.v = cfg_.beta2 * s.v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    const Matrix mhat = s.m / bc1;
    const Matrix vhat = s.v / bc2;
    s.param.value_mut() -=
        s.lr * mhat.cwiseQuotient((vhat.cwiseSqrt().array() + cfg_.eps).matrix());
  }
  zero_grad();
}

void Adam::zero_grad() {
  for (auto& s : slots_) {
    s.param.node()->ensure_grad();
    s.param.zero_grad();
  }
}

// ---- MLP -------------------------------------------------------------------------------

Mlp Mlp::make(const std::vector<int>& dims, Rng& rng) {
  if (dims.size() < 2) throw ParameterError("Mlp: need at least input and output dims");
  Mlp mlp;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l], out = dims[l + 1];
    if (in < 1 || out < 1) throw ParameterError("Mlp: dims must be positive");
    Matrix W(in, out);
    const double std_dev = std::sqrt(2.0 / in);
    for (int i = 0; i < in; ++i)
      for (int j = 0; j < out; ++j) W(i, j) = rng.normal(0.0, std_dev);
    LinearLayer layer;
    layer.W = Variable::leaf(std::move(W), true);
    layer.b = Variable::leaf(Matrix::Zero(1, out), true);
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

Variable Mlp::forward(const Variable& x, bool relu_output) const {
  Variable h = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const bool act = l + 1 < layers.size() || relu_output;
    h = act ? linear_relu(h, layers[l].W, layers[l].b) : linear(h, layers[l].W, layers[l].b);
  }
  return h;
}

std::vector<Variable> Mlp::params() const {
  std::vector<Variable> out;
  for (const auto& l : layers) {
    out.push_back(l.W);
    out.push_back(l.b);
  }
  return out;
}

// ---- Tensor persistence -------------------------------------------------------------------

void save_tensors(const std::vector<std::pair<std::string, Matrix>>& tensors,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write tensors: " + path);
  const char magic[8] = {'G', 'N', 'T', '1', 0, 0, 0, 0};
  out.write(magic, 8);
  const std::uint64_t count = tensors.size();
  out.write(reinterpret_cast<const char*>(&count), 8);
  for (const auto& [name, m] : tensors) {
    const std::uint32_t len = static_cast<std::uint32_t>(name.size());
    out.write(reinterpret_cast<const char*>(&len), 4);
    out.write(name.data(), len);
    const std::int64_t rows = m.rows(), cols = m.cols();
    out.write(reinterpret_cast<const char*>(&rows), 8);
    out.write(reinterpret_cast<const char*>(&cols), 8);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) {
        const double v = m(i, j);
        out.write(reinterpret_cast<const char*>(&v), 8);
      }
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<std::pair<std::string, Matrix>> load_tensors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open tensors: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "GNT1\0\0\0\0", 8) != 0)
    throw ParseError("bad tensor file magic: " + path);
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), 8);
  std::vector<std::pair<std::string, Matrix>> out;
  for (std::uint64_t k = 0; k < count; ++k) {
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), 4);
    if (!in || len > 4096) throw ParseError("bad tensor name length: " + path);
    std::string name(len, '\0');
    in.read(name.data(), len);
    std::int64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), 8);
    in.read(reinterpret_cast<char*>(&cols), 8);
    if (!in || rows < 0 || cols < 0 || rows * cols > (1LL << 32))
      throw ParseError("bad tensor shape: " + path);
    Matrix m(rows, cols);
    for (std::int64_t i = 0; i < rows; ++i)
      for (std::int64_t j = 0; j < cols; ++j) {
        double v;
        in.read(reinterpret_cast<char*>(&v), 8);
        m(i, j) = v;
      }
    if (!in) throw ParseError("truncated tensor file: " + path);
    out.emplace_back(std::move(name), std::move(m));
  }
  return out;
}

}  // namespace ginet::ad
