#pragma once

#include "ginet/common.hpp"
#include "ginet/netcore.hpp"
#include "ginet/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ginet {

enum class Dynamics { voter, cmn };

std::string dynamics_name(Dynamics d);
Dynamics dynamics_from_name(const std::string& name);

// Per-node state dimension: Voter opinions are one-hot over {0,1}, the coupled
// map carries a single real value.
inline int state_dim(Dynamics d) { return d == Dynamics::voter ? 2 : 1; }

struct CmnParams {
  double eps = 0.2;  // coupling weight on the neighbour average
  double r = 3.5;    // logistic-map parameter, f(x) = r*x*(1-x)
};

// One trajectory: T+1 state matrices (initial state plus T synchronous
// updates), each n x d.
using Trajectory = std::vector<Matrix>;

// ---- Single-step dynamics ---------------------------------------------------

// Synchronous stochastic opinion update: node i adopts opinion 1 with
// probability (# neighbours holding 1) / degree(i); isolated nodes keep their
// state. Rows of x must be one-hot (columns = opinions 0 and 1).
Matrix voter_step(const Graph& g, const Matrix& x, Rng& rng);
Matrix voter_step(const Graph& g, const Matrix& x, std::uint64_t seed);

// Coupled logistic map: x_i' = (1-eps)*f(x_i) + (eps/|N_i|) * sum_j f(x_j)
// over neighbours j; an isolated node evolves by the bare map x_i' = f(x_i).
Matrix cmn_step(const Graph& g, const Matrix& x, const CmnParams& params);

// Random initial state: one-hot fair opinions (Voter) or uniform [0,1) (CMN).
Matrix random_state(Dynamics d, int n, Rng& rng);

// Simulates s trajectories of T steps each (so T+1 recorded states).
std::vector<Trajectory> simulate(const Graph& g, Dynamics dynamics, int s, int T,
                                 std::uint64_t seed, const CmnParams& params = {});

// ---- Windowing and splits ---------------------------------------------------

enum class WindowMode { sliding, disjoint };

// The window mode each dynamics uses by default (sliding for Voter, disjoint
// for CMN), both exposed explicitly.
inline WindowMode default_mode(Dynamics d) {
  return d == Dynamics::voter ? WindowMode::sliding : WindowMode::disjoint;
}

struct TrajectoryDataset {
  Dynamics dynamics = Dynamics::cmn;
  int n = 0;  // nodes per state
  int d = 1;  // state dimension
  int t = 2;  // states per window
  // windows[w] holds t consecutive n x d states.
  std::vector<std::vector<Matrix>> windows;

  int num_windows() const { return static_cast<int>(windows.size()); }
};

// Cuts each length-(T+1) trajectory into windows of t consecutive states.
// Counts follow the two data-budget formulas: per trajectory, sliding yields
// T-t+1 windows (offsets 0..T-t) and disjoint yields floor(T/t) windows
// (offsets 0, t, 2t, ...). The final state of a trajectory can go unused.
TrajectoryDataset windowize(const std::vector<Trajectory>& trajectories, Dynamics dynamics,
                            int t, WindowMode mode);

// Disjoint index sets over [0, n_windows), shuffled by seed, with sizes
// proportional to the ratio triple (train : test : validation).
struct DatasetSplit {
  std::vector<int> train, test, val;
};
DatasetSplit split_windows(int n_windows, int ratio_train, int ratio_test, int ratio_val,
                           std::uint64_t seed);

// Keeps only the rows of the listed nodes, in the given order, producing a
// dataset over n = nodes.size() relabelled nodes.
TrajectoryDataset select_nodes(const TrajectoryDataset& ds, const std::vector<int>& nodes);

// Rows permuted observed-first (the node ordering used by the learner).
TrajectoryDataset relabel_observed_first(const TrajectoryDataset& ds, const NodePartition& p);

// Observed rows only.
TrajectoryDataset mask_hidden(const TrajectoryDataset& ds, const NodePartition& p);

// ---- Persistence --------------------------------------------------------------

// Wide CSV: header "trajectory,step,x<node>_<dim>,...", one row per recorded
// state. Values are round-trip exact (hex float formatting).
void save_trajectories(const std::vector<Trajectory>& trajectories, const std::string& path);
std::vector<Trajectory> load_trajectories(const std::string& path, int n, int d);

}  // namespace ginet
