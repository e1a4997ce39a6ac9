#include "ginet/ginmodel.hpp"

#include <algorithm>
#include <cmath>

namespace ginet {

namespace {

Variable make_theta(int m, std::uint64_t seed) {
  Rng rng(seed);
  Matrix theta(m, 1);
  for (int i = 0; i < m; ++i) theta(i, 0) = rng.normal(0.0, 0.1);
  return Variable::leaf(theta, /*requires_grad=*/true);
}

double sigmoid_scalar(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

EdgeScores make_edge_scores_full(int n, double tau, std::uint64_t seed) {
  if (n < 1) throw ParameterError("edge scores need at least one node");
  if (tau <= 0.0) throw ParameterError("temperature must be positive");
  auto entries = std::make_shared<PairList>();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) entries->push_back({i, j});
  EdgeScores scores;
  scores.theta = make_theta(static_cast<int>(entries->size()), seed);
  scores.entries = std::move(entries);
  scores.base = Matrix::Zero(n, n);
  scores.tau = tau;
  scores.n = n;
  return scores;
}

EdgeScores make_edge_scores_completion(const IntMatrix& known_adj, int n_obs, double tau,
                                       std::uint64_t seed) {
  const int n = static_cast<int>(known_adj.rows());
  if (known_adj.cols() != n) throw ShapeError("known adjacency must be square");
  if (n_obs < 0 || n_obs > n) throw ParameterError("observed count out of range");
  if (tau <= 0.0) throw ParameterError("temperature must be positive");
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int v = known_adj(i, j);
      if (v != 0 && v != 1) throw ParameterError("known adjacency entries must be 0/1");
      if (v != known_adj(j, i)) throw ParameterError("known adjacency must be symmetric");
      if (i == j && v != 0) throw ParameterError("known adjacency must have a zero diagonal");
    }
  }
  auto entries = std::make_shared<PairList>();
  Matrix base = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (i >= n_obs || j >= n_obs) {
        entries->push_back({i, j});
      } else {
        base(i, j) = base(j, i) = static_cast<double>(known_adj(i, j));
      }
    }
  }
  EdgeScores scores;
  scores.theta = make_theta(static_cast<int>(entries->size()), seed);
  scores.entries = std::move(entries);
  scores.base = std::move(base);
  scores.tau = tau;
  scores.n = n;
  return scores;
}

Matrix sample_concrete_noise(const EdgeScores& scores, Rng& rng) {
  Matrix noise(scores.num_entries(), 1);
  for (int i = 0; i < noise.rows(); ++i) noise(i, 0) = rng.gumbel() - rng.gumbel();
  return noise;
}

Variable sample_adjacency_with_noise(const EdgeScores& scores, const Matrix& noise, bool hard,
                                     double tau_override) {
  const double tau = tau_override > 0.0 ? tau_override : scores.tau;
  if (tau <= 0.0) throw ParameterError("temperature must be positive");
  if (noise.rows() != scores.num_entries() || noise.cols() != 1)
    throw ShapeError("noise must be one column with one row per inferred entry");
  // (theta + noise) / tau, with the noise as a constant shift.
  Variable logits = ad::add(ad::scale(scores.theta, 1.0 / tau),
                            Variable::constant(noise / tau));
  Variable probs = ad::sigmoid(logits);
  Variable adj = ad::symmetric_scatter(probs, scores.entries, scores.base);
  if (hard) adj = ad::straight_through_round(adj);
  return adj;
}

Variable sample_adjacency(const EdgeScores& scores, Rng& rng, bool hard) {
  return sample_adjacency_with_noise(scores, sample_concrete_noise(scores, rng), hard);
}

Matrix mean_adjacency(const EdgeScores& scores) {
  Matrix adj = scores.base;
  const auto& entries = *scores.entries;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const double p = sigmoid_scalar(scores.theta.value()(static_cast<int>(k), 0));
    adj(entries[k].first, entries[k].second) = p;
    adj(entries[k].second, entries[k].first) = p;
  }
  return adj;
}

IntMatrix hard_adjacency(const EdgeScores& scores) {
  const Matrix probs = mean_adjacency(scores);
  IntMatrix adj = IntMatrix::Zero(scores.n, scores.n);
  for (int i = 0; i < scores.n; ++i)
    for (int j = 0; j < scores.n; ++j) adj(i, j) = probs(i, j) >= 0.5 ? 1 : 0;
  return adj;
}

HiddenInitStates make_hidden_init(int S, int n_u, int d, InitActivation act,
                                  std::uint64_t seed) {
  if (S < 0 || n_u < 0 || d < 1) throw ParameterError("bad initial-state generator shape");
  Rng rng(seed);
  Matrix gamma(S * n_u, d);
  for (int i = 0; i < gamma.rows(); ++i)
    for (int j = 0; j < d; ++j) gamma(i, j) = rng.normal(0.0, 0.1);
  HiddenInitStates h;
  h.gamma = Variable::leaf(gamma, /*requires_grad=*/true);
  h.S = S;
  h.n_u = n_u;
  h.d = d;
  h.activation = act;
  return h;
}

Variable hidden_init_rows(const HiddenInitStates& h, const std::vector<int>& windows) {
  std::vector<int> rows;
  rows.reserve(windows.size() * static_cast<std::size_t>(h.n_u));
  for (int w : windows) {
    if (w < 0 || w >= h.S) throw ParameterError("window index out of range");
    for (int k = 0; k < h.n_u; ++k) rows.push_back(w * h.n_u + k);
  }
  Variable raw = ad::gather_rows(h.gamma, rows);
  switch (h.activation) {
    case InitActivation::sigmoid: return ad::sigmoid(raw);
    case InitActivation::softmax: return ad::softmax_rows(raw);
    case InitActivation::identity: return raw;
  }
  throw ContractError("unknown activation");
}

Variable hidden_init_window(const HiddenInitStates& h, int window) {
  return hidden_init_rows(h, {window});
}

std::vector<Variable> DynamicsLearner::params() const {
  std::vector<Variable> ps;
  for (const auto* mlp : {&edge_mlp, &node_mlp, &out_mlp}) {
    auto sub = mlp->params();
    ps.insert(ps.end(), sub.begin(), sub.end());
  }
  return ps;
}

DynamicsLearner make_dynamics_learner(int d, int width, bool voter_output,
                                      std::uint64_t seed) {
  if (d < 1 || width < 1) throw ParameterError("bad dynamics learner shape");
  Rng rng(seed);
  DynamicsLearner dl;
  Rng edge_rng = rng.derive(1);
  Rng node_rng = rng.derive(2);
  Rng out_rng = rng.derive(3);
  dl.edge_mlp = ad::Mlp::make({2 * d, width}, edge_rng);
  dl.node_mlp = ad::Mlp::make({width, width}, node_rng);
  dl.out_mlp = ad::Mlp::make({width + d, width, d}, out_rng);
  dl.d = d;
  dl.width = width;
  dl.voter_output = voter_output;
  return dl;
}

std::shared_ptr<const PairList> all_ordered_pairs(int n) {
  auto pairs = std::make_shared<PairList>();
  pairs->reserve(static_cast<std::size_t>(n) * (n - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) pairs->push_back({i, j});
  return pairs;
}

std::shared_ptr<const PairList> support_pairs(const EdgeScores& scores) {
  const int n = scores.n;
  BoolMatrix keep = BoolMatrix::Constant(n, n, false);
  for (const auto& [i, j] : *scores.entries) keep(i, j) = keep(j, i) = true;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && scores.base(i, j) != 0.0) keep(i, j) = true;
  auto pairs = std::make_shared<PairList>();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (keep(i, j)) pairs->push_back({i, j});
  return pairs;
}

Variable predict_step_batch(const DynamicsLearner& dl, const Variable& A, const Variable& x,
                            const std::shared_ptr<const PairList>& pairs, int B, int n) {
  if (A.value().rows() != n || A.value().cols() != n)
    throw ShapeError("adjacency shape mismatch: " + shape_str(A.value()));
  if (x.value().rows() != static_cast<Eigen::Index>(B) * n || x.value().cols() != dl.d)
    throw ShapeError("state shape mismatch: " + shape_str(x.value()));
  Variable pair_in = ad::pair_concat(x, pairs, B, n);
  Variable messages = dl.edge_mlp.forward(pair_in, /*relu_output=*/true);
  Variable agg = ad::edge_aggregate(A, messages, pairs, B, n);
  Variable node_h = dl.node_mlp.forward(agg, /*relu_output=*/true);
  Variable out_in = ad::concat_cols(node_h, x);
  Variable out = dl.out_mlp.forward(out_in, /*relu_output=*/false);
  if (dl.voter_output) out = ad::softmax_rows(out);
  return out;
}

Variable predict_step(const DynamicsLearner& dl, const Variable& A, const Variable& x) {
  const int n = static_cast<int>(A.value().rows());
  return predict_step_batch(dl, A, x, all_ordered_pairs(n), 1, n);
}

}  // namespace ginet
