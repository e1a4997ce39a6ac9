#pragma once

#include "ginet/common.hpp"
#include "ginet/dynsim.hpp"
#include "ginet/netcore.hpp"
#include "ginet/trainer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ginet {

// ---- Experiment configuration ------------------------------------------------
//
// JSON schema (fields marked * are required):
//   {
//     "name": "er100-cmn-complete",
//     "seed": 1,
//     "task": "complete",                    * reconstruct|complete|complete_blind
//     "graph": {"kind": "er", "n": 100, "p": 0.04},              * one of:
//              {"kind": "ws", "n": 10, "k": 4, "rewire": 0.3}
//              {"kind": "ba", "n": 100, "m0": 20, "k": 2}
//              {"kind": "file", "path": "data/karate.csv"}
//     "dynamics": {"kind": "cmn", "eps": 0.2, "r": 3.5},         * or {"kind": "voter"}
//     "data": {"trajectories": 50, "steps": 100, "window": 2,    * first two required
//              "mode": "disjoint", "split": [10, 1, 1]},
//     "partition": {"hidden": 10}            or {"fraction": 0.1}; default none hidden
//     "train": {"epochs": 500, "batch": 1024, "lr_dynamics": 0.004,
//               "lr_init_states": 0.1, "lr_edge_scores": 0.001, "tau": 1.0,
//               "tau_final": -1.0, "lambda": 0.0, "width": 0,
//               "val_subsample": 256, "hard": false}             all optional
//   }
struct GraphSpec {
  std::string kind;  // er | ws | ba | file
  int n = 0;
  double p = 0.0;       // er
  int k = 0;            // ws neighbors / ba edges per arrival
  double rewire = 0.0;  // ws
  int m0 = 0;           // ba seed size
  std::string path;     // file
};

struct DataSpec {
  int trajectories = 0;
  int steps = 0;
  int window = 2;
  std::string mode;  // "", "sliding" or "disjoint"; empty = dynamics default
  std::array<int, 3> split = {5, 1, 1};  // train : test : val
};

struct ExperimentConfig {
  std::string name;
  std::uint64_t seed = 0;
  std::string task;  // reconstruct | complete | complete_blind
  GraphSpec graph;
  Dynamics dynamics = Dynamics::cmn;
  CmnParams cmn;
  DataSpec data;
  int hidden = 0;
  double hidden_fraction = -1.0;  // >= 0 overrides `hidden` (count = round(f * n))
  TrainConfig train;

  int resolved_hidden(int n) const;
  void validate() const;
  std::string to_json() const;
  static ExperimentConfig from_json_text(const std::string& text, const std::string& origin);
};

ExperimentConfig load_experiment_config(const std::string& path);

// ---- Pipeline stages -----------------------------------------------------------
//
// Every stage reads/writes a single artifact directory:
//   config.json            resolved configuration (provenance)
//   graph.csv              generated/loaded graph, original node labels
//   partition.json         observed/hidden node ids
//   trajectories.csv       full simulated time series (all nodes)
//   split.json             train/test/val window ids
//   dataset_manifest.json  shapes and counts
//   checkpoint/            trained parameters (+ stage1_checkpoint/ for blind runs)
//   trainlog.csv           per-epoch losses (+ stage1_trainlog.csv)
//   eval_report.json       scores (+ _observed/_missing variants for blind runs)
//   contrast.csv           per-cell outcome matrix
//   structure_stats.csv    true-vs-inferred structural statistics
//   match.json             hidden-node correspondence (when matching ran)
//   baselines.csv          model-free baseline AUCs
//   sweep.csv              hidden-fraction sweep results

void cmd_generate(const ExperimentConfig& cfg, const std::string& out);
void cmd_train(const ExperimentConfig& cfg, const std::string& out);
void cmd_evaluate(const ExperimentConfig& cfg, const std::string& out, bool no_match);
void cmd_baseline(const ExperimentConfig& cfg, const std::string& out);
void cmd_match_files(const std::string& ref_path, const std::string& cand_path, int n_obs,
                     std::uint64_t seed, const std::string& out);
void cmd_sweep(const ExperimentConfig& cfg, const std::string& out,
               const std::vector<double>& fractions);
void cmd_run_all(const ExperimentConfig& cfg, const std::string& out, bool no_match);

}  // namespace ginet
