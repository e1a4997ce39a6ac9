#pragma once

#include "ginet/common.hpp"

#include <cstdint>
#include <vector>

namespace ginet {

// Minimum-cost perfect assignment on a square cost matrix (Hungarian
// algorithm with potentials, O(n^3)); returns the column assigned to each row.
std::vector<int> hungarian_min(const Matrix& cost);
// Maximum-score variant.
std::vector<int> hungarian_max(const Matrix& score);

// Seeded graph matching: the first n_obs nodes of A and Ahat are trusted to
// correspond (the seeds); the remaining hidden nodes of Ahat are permuted to
// best align with A. Both matrices must be square, equally sized, symmetric,
// with entries in [0, 1] (Ahat may hold soft edge probabilities).
struct MatchProblem {
  Matrix A;     // reference adjacency
  Matrix Ahat;  // adjacency to align (hidden rows/cols get permuted)
  int n_obs = 0;

  int n() const { return static_cast<int>(A.rows()); }
  int n_hidden() const { return n() - n_obs; }
  void validate() const;
};

struct MatchOptions {
  int max_iters = 100;
  double tol = 1e-6;  // relative duality-gap tolerance
  int restarts = 3;
  std::uint64_t seed = 0;
};

// permutation[a] = b means hidden slot a of A lines up with hidden slot b of
// Ahat: the aligned matrix has entry (n_obs+a, n_obs+c) = Ahat(n_obs+perm[a],
// n_obs+perm[c]).
struct MatchResult {
  std::vector<int> permutation;
  double objective = 0.0;  // trace overlap of the final (projected) permutation
  int iterations = 0;
  bool converged = false;
};

// Trace overlap J = Tr(A' (I (+) P) Ahat (I (+) P)') for a doubly-stochastic
// (or permutation) matrix P over the hidden block. For a permutation Q this
// satisfies |A - Q Ahat Q'|_F^2 = |A|_F^2 + |Ahat|_F^2 - 2 J.
double match_objective(const MatchProblem& prob, const Matrix& P);
double match_objective(const MatchProblem& prob, const std::vector<int>& perm);

// Frank-Wolfe ascent on the doubly-stochastic relaxation, then projection to
// the nearest permutation; the best of `restarts` starts is returned.
MatchResult match(const MatchProblem& prob, const MatchOptions& opts = {});

// Ahat with its hidden rows/columns reordered by `perm` (observed block is
// untouched as seeds never move).
Matrix apply_match(const Matrix& Ahat, const std::vector<int>& perm, int n_obs);

// Reorders per-hidden-node rows (e.g. learned initial states) by the same
// correspondence: out.row(a) = hidden_rows.row(perm[a]).
Matrix permute_hidden_rows(const Matrix& hidden_rows, const std::vector<int>& perm);

}  // namespace ginet
