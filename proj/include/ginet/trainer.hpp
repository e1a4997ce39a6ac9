#pragma once

#include "ginet/autodiff.hpp"
#include "ginet/dynsim.hpp"
#include "ginet/ginmodel.hpp"
#include "ginet/netcore.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ginet {

struct TrainConfig {
  int max_epochs = 500;
  int batch_size = 1024;          // windows per epoch (capped by the train split)
  double lr_dynamics = 0.004;     // dynamics-learner weights
  double lr_init_states = 0.1;    // hidden initial-state scores
  double lr_edge_scores = 0.001;  // edge scores
  double tau = 1.0;
  double tau_final = -1.0;  // > 0: anneal the temperature linearly to this value
  double lambda = 0.0;      // L1 sparsity weight on the sampled adjacency
  int hidden_width = 0;     // 0: dynamics-specific default
  int val_subsample = 256;  // max windows scored for the validation column
  bool hard_samples = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainLogRow {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<TrainLogRow> rows;

  void save_csv(const std::string& path) const;
  static TrainLog load_csv(const std::string& path);
};

// What is known and what must be learned. `data` holds two-state windows of
// the observed nodes only (observed-first order, n rows = n_obs). For edge
// completion, the leading n_obs x n_obs block of known_adj pins the known
// entries and n_total - n_obs hidden nodes are added to the model; for
// reconstruction nothing is known and n_total == n_obs.
struct TrainTask {
  TrajectoryDataset data;
  DatasetSplit split;
  int n_total = 0;
  int n_obs = 0;
  IntMatrix known_adj;  // consulted only when completion == true
  bool completion = false;

  void validate() const;
};

struct TrainedModel {
  EdgeScores scores;
  HiddenInitStates hidden_init;
  DynamicsLearner learner;
  Dynamics dynamics = Dynamics::cmn;
  int n_total = 0;
  int n_obs = 0;
  TrainLog log;
};

// Cross-entropy (voter) or mean absolute error (coupled map) between
// predicted and target observed states, averaged per node row (and per
// component for the continuous case). `norm_rows` overrides the averaging
// denominator so partial batches can be combined exactly.
ad::Variable prediction_loss(const ad::Variable& predicted, const Matrix& target,
                             Dynamics dynamics, long norm_rows = -1);

// Joint optimization of edge scores, hidden initial states and the dynamics
// learner. One adjacency sample and one minibatch per epoch; the epoch loss
// and gradients are bitwise reproducible for a fixed seed regardless of
// GIN_THREADS.
TrainedModel train(const TrainTask& task, const TrainConfig& cfg);

// Forward pass over specific windows using the noise-free expected adjacency
// and the current hidden initial states; rows are (window-major, node-minor)
// observed predictions with matching targets.
struct ForwardResult {
  Matrix predicted;
  Matrix target;
};
ForwardResult predict_windows(const TrainedModel& model, const TrajectoryDataset& data,
                              const std::vector<int>& windows);

// Activated initial states of the hidden nodes for one window (n_hidden x d).
Matrix hidden_initial_states(const TrainedModel& model, int window);

// Checkpointing: `dir` receives params.bin and manifest.json. The training
// log is not part of the checkpoint.
void save_model(const TrainedModel& model, const std::string& dir);
TrainedModel load_model(const std::string& dir);

}  // namespace ginet
