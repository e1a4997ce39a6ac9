#pragma once

#include "ginet/autodiff.hpp"
#include "ginet/common.hpp"
#include "ginet/dynsim.hpp"
#include "ginet/rng.hpp"

#include <memory>
#include <vector>

namespace ginet {

using ad::PairList;
using ad::Variable;

// ---- Differentiable adjacency generator -------------------------------------
//
// Holds raw scores theta for the upper-triangular entries being inferred (all
// of them for reconstruction, the inverted-L for completion). Entries not
// listed stay fixed at the values in `base` (known edges / non-edges as exact
// constants). connection_probability(i,j) = sigmoid(theta_ij).
struct EdgeScores {
  Variable theta;                           // M x 1 raw scores
  std::shared_ptr<const PairList> entries;  // (i, j) with i < j, M positions
  Matrix base;                              // n x n constants for fixed entries
  double tau = 1.0;                         // sampling temperature
  int n = 0;

  int num_entries() const { return static_cast<int>(entries->size()); }
};

// Scores for every upper-triangular pair (reconstruction: nothing is known).
EdgeScores make_edge_scores_full(int n, double tau, std::uint64_t seed);

// Scores for the inverted-L only; the leading n_obs x n_obs block of
// known_adj (symmetric 0/1, observed-first node order) is frozen into `base`.
EdgeScores make_edge_scores_completion(const IntMatrix& known_adj, int n_obs, double tau,
                                       std::uint64_t seed);

// One column of binary-Concrete noise differences (g - g'), one row per
// inferred entry; g, g' are independent standard Gumbel draws.
Matrix sample_concrete_noise(const EdgeScores& scores, Rng& rng);

// Soft adjacency sample: entry = sigmoid((theta + noise)/tau), mirrored into
// both triangles over `base`; hard=true rounds forward values at 0.5 with a
// straight-through gradient. `tau_override` > 0 replaces scores.tau (for
// annealing schedules).
Variable sample_adjacency_with_noise(const EdgeScores& scores, const Matrix& noise, bool hard,
                                     double tau_override = -1.0);
// Convenience: draws fresh noise from rng.
Variable sample_adjacency(const EdgeScores& scores, Rng& rng, bool hard);

// Noise-free connection probabilities sigmoid(theta) (temperature-free), as a
// plain symmetric matrix over `base`. This is what evaluation and matching
// consume.
Matrix mean_adjacency(const EdgeScores& scores);
// mean_adjacency thresholded at 0.5 (known entries already 0/1).
IntMatrix hard_adjacency(const EdgeScores& scores);

// ---- Initial-state generator --------------------------------------------------
//
// gamma holds one (n_u x d) slice per window, stacked into an (S*n_u) x d
// Variable. The activation maps raw scores into the dynamics' state space.
enum class InitActivation { sigmoid, softmax, identity };

struct HiddenInitStates {
  Variable gamma;  // (S * n_u) x d
  int S = 0;
  int n_u = 0;
  int d = 0;
  InitActivation activation = InitActivation::identity;
};

inline InitActivation default_init_activation(Dynamics dyn) {
  return dyn == Dynamics::voter ? InitActivation::softmax : InitActivation::sigmoid;
}

// gamma entries drawn from N(0, 0.1).
HiddenInitStates make_hidden_init(int S, int n_u, int d, InitActivation act,
                                  std::uint64_t seed);

// Activated hidden rows for a batch of windows: (B*n_u) x d.
Variable hidden_init_rows(const HiddenInitStates& h, const std::vector<int>& windows);
// Single window convenience: n_u x d.
Variable hidden_init_window(const HiddenInitStates& h, int window);

// ---- Dynamics learner -----------------------------------------------------------
//
// Node-shared message passing with four weight layers in total:
//   edge block  (2d -> W, ReLU)      per ordered pair
//   node block  (W -> W, ReLU)       after weighted aggregation
//   out block   (W+d -> W, ReLU; W -> d)
// Voter output rows pass through softmax; CMN output is unconstrained during
// training (clamped to [0,1] only when reporting states).
struct DynamicsLearner {
  ad::Mlp edge_mlp;  // 1 layer
  ad::Mlp node_mlp;  // 1 layer
  ad::Mlp out_mlp;   // 2 layers
  int d = 1;
  int width = 32;
  bool voter_output = false;

  std::vector<Variable> params() const;
};

inline int default_hidden_width(Dynamics dyn) { return dyn == Dynamics::voter ? 64 : 32; }

DynamicsLearner make_dynamics_learner(int d, int width, bool voter_output,
                                      std::uint64_t seed);

// All ordered pairs (i, j), i != j.
std::shared_ptr<const PairList> all_ordered_pairs(int n);

// Ordered pairs whose adjacency weight can ever be nonzero: both orientations
// of every inferred entry plus every nonzero constant in `base`. Messages for
// pairs outside this set have exactly zero weight — and zero gradient — so
// skipping them is an exact optimization, not an approximation.
std::shared_ptr<const PairList> support_pairs(const EdgeScores& scores);

// One prediction step for B stacked windows: x is (B*n) x d, A is n x n
// (shared across the batch), result is (B*n) x d.
Variable predict_step_batch(const DynamicsLearner& dl, const Variable& A, const Variable& x,
                            const std::shared_ptr<const PairList>& pairs, int B, int n);

// Single-window form over all ordered pairs.
Variable predict_step(const DynamicsLearner& dl, const Variable& A, const Variable& x);

}  // namespace ginet
