#pragma once

#include "ginet/common.hpp"
#include "ginet/dynsim.hpp"
#include "ginet/netcore.hpp"

#include <string>
#include <vector>

namespace ginet {

// Rank-based AUC (Mann-Whitney with average ranks on ties). Labels are 0/1;
// both classes must be present or the statistic is undefined (NumericError).
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Per-cell outcome codes for the contrast matrix.
enum ContrastCode : int {
  kContrastObserved = 0,  // entry was known going in, not scored
  kContrastTP = 1,
  kContrastTN = 2,
  kContrastFP = 3,
  kContrastFN = 4,
};

struct EvalReport {
  double auc = 0.0;
  double accuracy = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  long tp = 0, tn = 0, fp = 0, fn = 0;
  int n_scored = 0;
  double threshold = 0.5;
  IntMatrix contrast;  // n x n ContrastCode entries (symmetric, diagonal OBS)

  std::string to_json() const;
};

// Scores the upper-triangular entries selected by `mask` (true = unknown
// going in, i.e. to be scored): AUC over probabilities, plus confusion counts
// at `threshold`.
EvalReport score_completion(const IntMatrix& a_true, const Matrix& probs,
                            const BoolMatrix& mask, double threshold = 0.5);

// Matrix-form CSV: cell (i, j) holds OBS/TP/TN/FP/FN.
void save_contrast_csv(const std::string& path, const IntMatrix& contrast);
void save_eval_report(const std::string& path, const EvalReport& report);

// State agreement between predicted and true rows: mean argmax accuracy for
// voter opinions, mean squared error (predictions clamped to [0, 1]) for the
// coupled map. Matrices are (rows x d).
double score_states(const Matrix& predicted, const Matrix& truth, Dynamics dynamics);

// Pairwise mutual information between node time series, in nats. Voter
// opinions are compared directly; continuous states are histogrammed into
// `bins` equal-width bins over [0, 1]. Constant series yield zero.
Matrix mi_scores(const std::vector<Trajectory>& trajectories, Dynamics dynamics,
                 int bins = 16);

// Pairwise partial-correlation magnitudes from the ridge-regularized precision
// matrix. Continuous (d = 1) series only; a zero-variance node is an error.
Matrix pcorr_scores(const std::vector<Trajectory>& trajectories, double ridge = 1e-4);

struct StructureComparison {
  StructuralStats reference;
  StructuralStats candidate;
  double d_average_degree = 0.0;
  double d_average_path_length = 0.0;
  double d_density = 0.0;
  double d_average_clustering = 0.0;
};

StructureComparison compare_structure(const Graph& reference, const Graph& candidate);
void save_structure_csv(const std::string& path, const StructureComparison& cmp);

// Graph from a symmetric 0/1 adjacency matrix (zero diagonal required).
Graph graph_from_adjacency(const IntMatrix& adj);
// Threshold soft probabilities at `threshold` first.
Graph graph_from_probabilities(const Matrix& probs, double threshold = 0.5);

}  // namespace ginet
