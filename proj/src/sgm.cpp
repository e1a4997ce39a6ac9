#include "ginet/sgm.hpp"

#include "ginet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ginet {

std::vector<int> hungarian_min(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw ShapeError("assignment cost matrix must be square");
  if (!cost.allFinite()) throw NumericError("assignment cost matrix has non-finite entries");
  if (n == 0) return {};
  const double inf = std::numeric_limits<double>::infinity();
  // Potentials formulation, 1-indexed with column 0 as the virtual start.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

std::vector<int> hungarian_max(const Matrix& score) { return hungarian_min(-score); }

void MatchProblem::validate() const {
  const int nn = n();
  if (A.cols() != nn) throw ShapeError("reference adjacency must be square");
  if (Ahat.rows() != nn || Ahat.cols() != nn)
    throw ShapeError("adjacency sizes differ: " + shape_str(A) + " vs " + shape_str(Ahat));
  if (n_obs < 0 || n_obs > nn) throw ParameterError("observed count out of range");
  for (const Matrix* m : {&A, &Ahat}) {
    for (int i = 0; i < nn; ++i) {
      for (int j = 0; j < nn; ++j) {
        const double x = (*m)(i, j);
        if (!std::isfinite(x) || x < 0.0 || x > 1.0)
          throw ParameterError("adjacency entries must lie in [0, 1]");
        if (std::abs(x - (*m)(j, i)) > 1e-12)
          throw ParameterError("adjacency must be symmetric");
      }
    }
  }
}

namespace {

struct Blocks {
  Matrix A_oo, A_ou, A_uu;
  Matrix H_oo, H_ou, H_uu;  // same blocks of Ahat
  double const_oo = 0.0;    // observed-observed overlap, independent of P
};

Blocks split_blocks(const MatchProblem& prob) {
  const int no = prob.n_obs, nu = prob.n_hidden();
  Blocks b;
  b.A_oo = prob.A.topLeftCorner(no, no);
  b.A_ou = prob.A.topRightCorner(no, nu);
  b.A_uu = prob.A.bottomRightCorner(nu, nu);
  b.H_oo = prob.Ahat.topLeftCorner(no, no);
  b.H_ou = prob.Ahat.topRightCorner(no, nu);
  b.H_uu = prob.Ahat.bottomRightCorner(nu, nu);
  b.const_oo = (b.A_oo.array() * b.H_oo.array()).sum();
  return b;
}

double objective_blocks(const Blocks& b, const Matrix& P) {
  const double ou = (b.A_ou.array() * (b.H_ou * P.transpose()).array()).sum();
  const double uu = (b.A_uu.array() * (P * b.H_uu * P.transpose()).array()).sum();
  return b.const_oo + 2.0 * ou + uu;
}

Matrix perm_matrix(const std::vector<int>& perm) {
  const int nu = static_cast<int>(perm.size());
  Matrix P = Matrix::Zero(nu, nu);
  for (int a = 0; a < nu; ++a) P(a, perm[a]) = 1.0;
  return P;
}

struct FwOutcome {
  std::vector<int> permutation;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

FwOutcome frank_wolfe(const Blocks& b, Matrix P, int max_iters, double tol) {
  const int nu = static_cast<int>(P.rows());
  int iters = 0;
  bool converged = false;
  for (; iters < max_iters; ++iters) {
    const Matrix grad =
        2.0 * (b.A_ou.transpose() * b.H_ou + b.A_uu * P * b.H_uu);
    const std::vector<int> dir = hungarian_max(grad);
    const Matrix D = perm_matrix(dir) - P;
    // J(P + tD) = J(P) + bt*t + at*t^2 over t in [0, 1].
    const double bt = 2.0 * ((b.A_ou.array() * (b.H_ou * D.transpose()).array()).sum() +
                             (b.A_uu.array() * (D * b.H_uu * P.transpose()).array()).sum());
    const double at = (b.A_uu.array() * (D * b.H_uu * D.transpose()).array()).sum();
    const double scale = std::max(1.0, std::abs(objective_blocks(b, P)));
    if (bt <= tol * scale) {
      converged = true;
      break;
    }
    double t = 1.0;
    if (at < 0.0) t = std::clamp(-bt / (2.0 * at), 0.0, 1.0);
    P += t * D;
  }
  FwOutcome out;
  out.iterations = iters;
  out.converged = converged;
  // Project the doubly-stochastic iterate to its nearest permutation.
  out.permutation = hungarian_max(P);
  out.objective = objective_blocks(b, perm_matrix(out.permutation));
  return out;
}

}  // namespace

double match_objective(const MatchProblem& prob, const Matrix& P) {
  prob.validate();
  const int nu = prob.n_hidden();
  if (P.rows() != nu || P.cols() != nu)
    throw ShapeError("permutation block must be n_hidden x n_hidden");
  return objective_blocks(split_blocks(prob), P);
}

double match_objective(const MatchProblem& prob, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != prob.n_hidden())
    throw ShapeError("permutation length must equal the hidden-node count");
  return match_objective(prob, perm_matrix(perm));
}

MatchResult match(const MatchProblem& prob, const MatchOptions& opts) {
  prob.validate();
  if (opts.max_iters < 1 || opts.restarts < 1 || opts.tol <= 0.0)
    throw ParameterError("bad matcher options");
  const int nu = prob.n_hidden();
  MatchResult result;
  if (nu == 0) {
    result.objective = (prob.A.array() * prob.Ahat.array()).sum();
    result.converged = true;
    return result;
  }
  const Blocks b = split_blocks(prob);
  const Matrix bary = Matrix::Constant(nu, nu, 1.0 / nu);
  Rng rng(opts.seed);
  bool have_best = false;
  for (int r = 0; r < opts.restarts; ++r) {
    Matrix P0 = bary;
    if (r > 0) {
      std::vector<int> shuffled(nu);
      std::iota(shuffled.begin(), shuffled.end(), 0);
      Rng restart_rng = rng.derive(static_cast<std::uint64_t>(r));
      restart_rng.shuffle(shuffled);
      P0 = 0.5 * bary + 0.5 * perm_matrix(shuffled);
    }
    const FwOutcome out = frank_wolfe(b, P0, opts.max_iters, opts.tol);
    if (!have_best || out.objective > result.objective) {
      result.permutation = out.permutation;
      result.objective = out.objective;
      result.iterations = out.iterations;
      result.converged = out.converged;
      have_best = true;
    }
  }
  return result;
}

Matrix apply_match(const Matrix& Ahat, const std::vector<int>& perm, int n_obs) {
  const int n = static_cast<int>(Ahat.rows());
  const int nu = static_cast<int>(perm.size());
  if (Ahat.cols() != n) throw ShapeError("adjacency must be square");
  if (n_obs < 0 || n_obs + nu != n)
    throw ShapeError("permutation length must equal the hidden-node count");
  std::vector<int> full(n);
  std::iota(full.begin(), full.end(), 0);
  for (int a = 0; a < nu; ++a) {
    if (perm[a] < 0 || perm[a] >= nu) throw ParameterError("permutation entry out of range");
    full[n_obs + a] = n_obs + perm[a];
  }
  Matrix aligned(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) aligned(i, j) = Ahat(full[i], full[j]);
  return aligned;
}

Matrix permute_hidden_rows(const Matrix& hidden_rows, const std::vector<int>& perm) {
  const int nu = static_cast<int>(perm.size());
  if (hidden_rows.rows() != nu)
    throw ShapeError("row count must equal the permutation length");
  Matrix out(nu, hidden_rows.cols());
  for (int a = 0; a < nu; ++a) {
    if (perm[a] < 0 || perm[a] >= nu) throw ParameterError("permutation entry out of range");
    out.row(a) = hidden_rows.row(perm[a]);
  }
  return out;
}

}  // namespace ginet
