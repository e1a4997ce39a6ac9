#include "ginet/pipeline.hpp"

#include "ginet/ginmodel.hpp"
#include "ginet/metrics.hpp"
#include "ginet/sgm.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace ginet {

namespace {

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("missing artifact: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out.good()) throw IoError("failed writing " + path);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError(where + ": unknown field '" + it.key() + "'");
  }
}

const json& section(const json& j, const std::string& key, bool required) {
  static const json empty = json::object();
  if (!j.contains(key)) {
    if (required) throw ConfigError("config." + key + " is required");
    return empty;
  }
  const json& s = j.at(key);
  if (!s.is_object()) throw ConfigError("config." + key + " must be an object");
  return s;
}

template <typename T>
T req_field(const json& o, const std::string& where, const char* key) {
  if (!o.contains(key)) throw ConfigError(where + "." + key + " is required");
  try {
    return o.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

template <typename T>
T opt_field(const json& o, const std::string& where, const char* key, T fallback) {
  if (!o.contains(key)) return fallback;
  try {
    return o.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

std::string artifact(const std::string& out, const char* name) {
  return out + "/" + name;
}

}  // namespace

int ExperimentConfig::resolved_hidden(int n) const {
  long h = hidden;
  if (hidden_fraction >= 0.0) h = std::lround(hidden_fraction * n);
  if (h < 0 || h >= n)
    throw ConfigError("partition leaves no observed nodes (hidden = " + std::to_string(h) +
                      " of " + std::to_string(n) + ")");
  return static_cast<int>(h);
}

void ExperimentConfig::validate() const {
  if (task != "reconstruct" && task != "complete" && task != "complete_blind")
    throw ConfigError("config.task must be reconstruct, complete or complete_blind");
  if (graph.kind == "er") {
    if (graph.n < 1) throw ConfigError("config.graph.n must be positive");
    if (graph.p < 0.0 || graph.p > 1.0) throw ConfigError("config.graph.p must lie in [0, 1]");
  } else if (graph.kind == "ws") {
    if (graph.n < 1) throw ConfigError("config.graph.n must be positive");
    if (graph.k < 2) throw ConfigError("config.graph.k must be at least 2");
    if (graph.rewire < 0.0 || graph.rewire > 1.0)
      throw ConfigError("config.graph.rewire must lie in [0, 1]");
  } else if (graph.kind == "ba") {
    if (graph.n < 1) throw ConfigError("config.graph.n must be positive");
    if (graph.m0 < 1 || graph.k < 1)
      throw ConfigError("config.graph.m0 and config.graph.k must be positive");
  } else if (graph.kind == "file") {
    if (graph.path.empty()) throw ConfigError("config.graph.path is required");
  } else {
    throw ConfigError("config.graph.kind must be er, ws, ba or file");
  }
  if (cmn.eps < 0.0 || cmn.eps > 1.0) throw ConfigError("config.dynamics.eps must lie in [0, 1]");
  if (cmn.r <= 0.0 || cmn.r > 4.0) throw ConfigError("config.dynamics.r must lie in (0, 4]");
  if (data.trajectories < 1) throw ConfigError("config.data.trajectories must be positive");
  if (data.steps < 1) throw ConfigError("config.data.steps must be positive");
  if (data.window < 2) throw ConfigError("config.data.window must be at least 2");
  if (!data.mode.empty() && data.mode != "sliding" && data.mode != "disjoint")
    throw ConfigError("config.data.mode must be sliding or disjoint");
  if (data.split[0] < 1 || data.split[1] < 0 || data.split[2] < 0)
    throw ConfigError("config.data.split needs a positive train share");
  if (hidden < 0) throw ConfigError("config.partition.hidden must be nonnegative");
  if (hidden_fraction >= 0.0 && hidden_fraction >= 1.0)
    throw ConfigError("config.partition.fraction must lie in [0, 1)");
  try {
    train.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config.train: ") + e.what());
  }
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text,
                                                  const std::string& origin) {
  const json j = parse_json_text(text, origin);
  if (!j.is_object()) throw ConfigError(origin + ": top level must be an object");
  check_keys(j, "config",
             {"name", "seed", "task", "graph", "dynamics", "data", "partition", "train"});
  ExperimentConfig c;
  c.name = opt_field<std::string>(j, "config", "name", "");
  c.seed = opt_field<std::uint64_t>(j, "config", "seed", 0);
  c.task = req_field<std::string>(j, "config", "task");

  const json& g = section(j, "graph", true);
  c.graph.kind = req_field<std::string>(g, "config.graph", "kind");
  if (c.graph.kind == "er") {
    check_keys(g, "config.graph", {"kind", "n", "p"});
    c.graph.n = req_field<int>(g, "config.graph", "n");
    c.graph.p = req_field<double>(g, "config.graph", "p");
  } else if (c.graph.kind == "ws") {
    check_keys(g, "config.graph", {"kind", "n", "k", "rewire"});
    c.graph.n = req_field<int>(g, "config.graph", "n");
    c.graph.k = req_field<int>(g, "config.graph", "k");
    c.graph.rewire = req_field<double>(g, "config.graph", "rewire");
  } else if (c.graph.kind == "ba") {
    check_keys(g, "config.graph", {"kind", "n", "m0", "k"});
    c.graph.n = req_field<int>(g, "config.graph", "n");
    c.graph.m0 = req_field<int>(g, "config.graph", "m0");
    c.graph.k = req_field<int>(g, "config.graph", "k");
  } else if (c.graph.kind == "file") {
    check_keys(g, "config.graph", {"kind", "path", "n"});
    c.graph.path = req_field<std::string>(g, "config.graph", "path");
    c.graph.n = opt_field<int>(g, "config.graph", "n", 0);
  } else {
    throw ConfigError("config.graph.kind must be er, ws, ba or file");
  }

  const json& dd = section(j, "dynamics", true);
  const std::string dyn_kind = req_field<std::string>(dd, "config.dynamics", "kind");
  c.dynamics = dynamics_from_name(dyn_kind);
  if (c.dynamics == Dynamics::cmn) {
    check_keys(dd, "config.dynamics", {"kind", "eps", "r"});
    c.cmn.eps = opt_field<double>(dd, "config.dynamics", "eps", c.cmn.eps);
    c.cmn.r = opt_field<double>(dd, "config.dynamics", "r", c.cmn.r);
  } else {
    check_keys(dd, "config.dynamics", {"kind"});
  }

  const json& da = section(j, "data", true);
  check_keys(da, "config.data", {"trajectories", "steps", "window", "mode", "split"});
  c.data.trajectories = req_field<int>(da, "config.data", "trajectories");
  c.data.steps = req_field<int>(da, "config.data", "steps");
  c.data.window = opt_field<int>(da, "config.data", "window", 2);
  c.data.mode = opt_field<std::string>(da, "config.data", "mode", "");
  if (da.contains("split")) {
    std::vector<int> sp;
    try {
      sp = da.at("split").get<std::vector<int>>();
    } catch (const json::exception&) {
      throw ConfigError("config.data.split has the wrong type");
    }
    if (sp.size() != 3)
      throw ConfigError("config.data.split must hold three ratios (train, test, val)");
    c.data.split = {sp[0], sp[1], sp[2]};
  }

  const json& pa = section(j, "partition", false);
  check_keys(pa, "config.partition", {"hidden", "fraction"});
  if (pa.contains("hidden") && pa.contains("fraction"))
    throw ConfigError("config.partition: give either hidden or fraction, not both");
  c.hidden = opt_field<int>(pa, "config.partition", "hidden", 0);
  c.hidden_fraction = opt_field<double>(pa, "config.partition", "fraction", -1.0);

  const json& tr = section(j, "train", false);
  check_keys(tr, "config.train",
             {"epochs", "batch", "lr_dynamics", "lr_init_states", "lr_edge_scores", "tau",
              "tau_final", "lambda", "width", "val_subsample", "hard"});
  c.train.max_epochs = opt_field<int>(tr, "config.train", "epochs", c.train.max_epochs);
  c.train.batch_size = opt_field<int>(tr, "config.train", "batch", c.train.batch_size);
  c.train.lr_dynamics =
      opt_field<double>(tr, "config.train", "lr_dynamics", c.train.lr_dynamics);
  c.train.lr_init_states =
      opt_field<double>(tr, "config.train", "lr_init_states", c.train.lr_init_states);
  c.train.lr_edge_scores =
      opt_field<double>(tr, "config.train", "lr_edge_scores", c.train.lr_edge_scores);
  c.train.tau = opt_field<double>(tr, "config.train", "tau", c.train.tau);
  c.train.tau_final = opt_field<double>(tr, "config.train", "tau_final", c.train.tau_final);
  c.train.lambda = opt_field<double>(tr, "config.train", "lambda", c.train.lambda);
  c.train.hidden_width = opt_field<int>(tr, "config.train", "width", c.train.hidden_width);
  c.train.val_subsample =
      opt_field<int>(tr, "config.train", "val_subsample", c.train.val_subsample);
  c.train.hard_samples = opt_field<bool>(tr, "config.train", "hard", c.train.hard_samples);

  c.validate();
  return c;
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["name"] = name;
  j["seed"] = seed;
  j["task"] = task;
  json g;
  g["kind"] = graph.kind;
  if (graph.kind == "er") {
    g["n"] = graph.n;
    g["p"] = graph.p;
  } else if (graph.kind == "ws") {
    g["n"] = graph.n;
    g["k"] = graph.k;
    g["rewire"] = graph.rewire;
  } else if (graph.kind == "ba") {
    g["n"] = graph.n;
    g["m0"] = graph.m0;
    g["k"] = graph.k;
  } else {
    g["path"] = graph.path;
    if (graph.n > 0) g["n"] = graph.n;
  }
  j["graph"] = g;
  json dd;
  dd["kind"] = dynamics_name(dynamics);
  if (dynamics == Dynamics::cmn) {
    dd["eps"] = cmn.eps;
    dd["r"] = cmn.r;
  }
  j["dynamics"] = dd;
  json da;
  da["trajectories"] = data.trajectories;
  da["steps"] = data.steps;
  da["window"] = data.window;
  if (!data.mode.empty()) da["mode"] = data.mode;
  da["split"] = {data.split[0], data.split[1], data.split[2]};
  j["data"] = da;
  json pa;
  if (hidden_fraction >= 0.0)
    pa["fraction"] = hidden_fraction;
  else
    pa["hidden"] = hidden;
  j["partition"] = pa;
  json tr;
  tr["epochs"] = train.max_epochs;
  tr["batch"] = train.batch_size;
  tr["lr_dynamics"] = train.lr_dynamics;
  tr["lr_init_states"] = train.lr_init_states;
  tr["lr_edge_scores"] = train.lr_edge_scores;
  tr["tau"] = train.tau;
  tr["tau_final"] = train.tau_final;
  tr["lambda"] = train.lambda;
  tr["width"] = train.hidden_width;
  tr["val_subsample"] = train.val_subsample;
  tr["hard"] = train.hard_samples;
  j["train"] = tr;
  return j.dump(2);
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return ExperimentConfig::from_json_text(slurp(path), path);
}

namespace {

WindowMode resolve_mode(const ExperimentConfig& cfg) {
  if (cfg.data.mode == "sliding") return WindowMode::sliding;
  if (cfg.data.mode == "disjoint") return WindowMode::disjoint;
  return default_mode(cfg.dynamics);
}

Graph build_graph(const GraphSpec& gs, std::uint64_t seed) {
  if (gs.kind == "er") return generate_er(gs.n, gs.p, seed);
  if (gs.kind == "ws") return generate_ws(gs.n, gs.k, gs.rewire, seed);
  if (gs.kind == "ba") return generate_ba(gs.n, gs.m0, gs.k, seed);
  return load_edge_list(gs.path, gs.n > 0 ? gs.n : -1);
}

void require_config_match(const ExperimentConfig& cfg, const std::string& out) {
  const ExperimentConfig stored = load_experiment_config(artifact(out, "config.json"));
  if (stored.to_json() != cfg.to_json())
    throw ConfigError("config does not match the artifacts in " + out);
}

DatasetSplit load_split(const std::string& path, int n_windows) {
  const json j = parse_json_text(slurp(path), path);
  DatasetSplit sp;
  try {
    sp.train = j.at("train").get<std::vector<int>>();
    sp.test = j.at("test").get<std::vector<int>>();
    sp.val = j.at("val").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  for (const auto* part : {&sp.train, &sp.test, &sp.val})
    for (int w : *part)
      if (w < 0 || w >= n_windows)
        throw ParseError(path + ": window id " + std::to_string(w) + " out of range");
  return sp;
}

struct Artifacts {
  Graph g{1};
  NodePartition part;
  std::vector<Trajectory> trajs;
  TrajectoryDataset full;      // all nodes, original label order
  TrajectoryDataset observed;  // observed rows only, observed-first order
  DatasetSplit split;
  IntMatrix truth;  // adjacency in observed-first order
};

Artifacts load_artifacts(const ExperimentConfig& cfg, const std::string& out) {
  require_config_match(cfg, out);
  Artifacts a;
  a.part = load_partition(artifact(out, "partition.json"));
  // Pin the node count from the partition: generated graphs may contain
  // isolated nodes, which an edge list alone cannot express.
  a.g = load_edge_list(artifact(out, "graph.csv"), a.part.n());
  a.part.validate(a.g.n);
  a.trajs = load_trajectories(artifact(out, "trajectories.csv"), a.g.n,
                              state_dim(cfg.dynamics));
  a.full = windowize(a.trajs, cfg.dynamics, cfg.data.window, resolve_mode(cfg));
  a.observed = mask_hidden(a.full, a.part);
  a.split = load_split(artifact(out, "split.json"), a.full.num_windows());
  a.truth = reorder_adjacency(a.g, a.part);
  return a;
}

std::vector<Trajectory> observed_trajectories(const std::vector<Trajectory>& trajs,
                                              const NodePartition& part) {
  std::vector<Trajectory> out;
  out.reserve(trajs.size());
  for (const auto& traj : trajs) {
    Trajectory sel;
    sel.reserve(traj.size());
    for (const auto& x : traj) {
      Matrix y(part.n_observed(), x.cols());
      for (int i = 0; i < part.n_observed(); ++i) y.row(i) = x.row(part.observed[i]);
      sel.push_back(std::move(y));
    }
    out.push_back(std::move(sel));
  }
  return out;
}

double upper_triangle_auc(const IntMatrix& truth, const Matrix& scores) {
  std::vector<double> s;
  std::vector<int> l;
  for (int i = 0; i < truth.rows(); ++i) {
    for (int j = i + 1; j < truth.cols(); ++j) {
      s.push_back(scores(i, j));
      l.push_back(truth(i, j) != 0 ? 1 : 0);
    }
  }
  return auc(s, l);
}

void write_match_json(const std::string& path, const MatchResult& mr, int n_obs) {
  json j;
  j["permutation"] = mr.permutation;
  j["objective"] = mr.objective;
  j["iterations"] = mr.iterations;
  j["converged"] = mr.converged;
  j["n_obs"] = n_obs;
  write_text(path, j.dump(2) + "\n");
}

void write_eval_json(const std::string& path, const EvalReport& rep, Dynamics dyn,
                     double state_score) {
  json j = json::parse(rep.to_json());
  j["state_metric"] = dyn == Dynamics::voter ? "accuracy" : "mse";
  j["state_score"] = state_score;
  write_text(path, j.dump(2) + "\n");
}

double read_eval_auc(const std::string& path) {
  const json j = parse_json_text(slurp(path), path);
  try {
    return j.at("auc").get<double>();
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string format_fraction(double f) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", f);
  return buf;
}

}  // namespace

void cmd_generate(const ExperimentConfig& cfg, const std::string& out) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out + ": " + ec.message());
  const Graph g = build_graph(cfg.graph, derive_seed(cfg.seed, 1));
  const int n_hidden = cfg.resolved_hidden(g.n);
  if (cfg.task == "reconstruct" && n_hidden != 0)
    throw ConfigError("task 'reconstruct' observes every node; set partition.hidden to 0");
  const NodePartition part = partition_nodes(g.n, n_hidden, derive_seed(cfg.seed, 2));
  const auto trajs =
      simulate(g, cfg.dynamics, cfg.data.trajectories, cfg.data.steps,
               derive_seed(cfg.seed, 3), cfg.cmn);
  const auto ds = windowize(trajs, cfg.dynamics, cfg.data.window, resolve_mode(cfg));
  const auto split = split_windows(ds.num_windows(), cfg.data.split[0], cfg.data.split[1],
                                   cfg.data.split[2], derive_seed(cfg.seed, 4));

  write_text(artifact(out, "config.json"), cfg.to_json() + "\n");
  save_edge_list(g, artifact(out, "graph.csv"));
  save_partition(part, artifact(out, "partition.json"));
  save_trajectories(trajs, artifact(out, "trajectories.csv"));
  json js;
  js["train"] = split.train;
  js["test"] = split.test;
  js["val"] = split.val;
  write_text(artifact(out, "split.json"), js.dump(2) + "\n");
  json jm;
  jm["name"] = cfg.name;
  jm["n"] = g.n;
  jm["edges"] = g.num_edges();
  jm["hidden"] = n_hidden;
  jm["dynamics"] = dynamics_name(cfg.dynamics);
  jm["d"] = state_dim(cfg.dynamics);
  jm["trajectories"] = cfg.data.trajectories;
  jm["steps"] = cfg.data.steps;
  jm["window"] = cfg.data.window;
  jm["mode"] = resolve_mode(cfg) == WindowMode::sliding ? "sliding" : "disjoint";
  jm["windows"] = ds.num_windows();
  jm["split_sizes"] = {static_cast<int>(split.train.size()),
                       static_cast<int>(split.test.size()),
                       static_cast<int>(split.val.size())};
  write_text(artifact(out, "dataset_manifest.json"), jm.dump(2) + "\n");
}

void cmd_train(const ExperimentConfig& cfg, const std::string& out) {
  cfg.validate();
  const Artifacts a = load_artifacts(cfg, out);
  const int n = a.g.n;
  const int n_obs = a.part.n_observed();

  if (cfg.task == "complete_blind") {
    TrainTask s1;
    s1.data = a.observed;
    s1.split = a.split;
    s1.n_total = n_obs;
    s1.n_obs = n_obs;
    s1.completion = false;
    TrainConfig tc1 = cfg.train;
    tc1.seed = derive_seed(cfg.seed, 21);
    const TrainedModel m1 = train(s1, tc1);
    save_model(m1, artifact(out, "stage1_checkpoint"));
    m1.log.save_csv(artifact(out, "stage1_trainlog.csv"));

    TrainTask s2;
    s2.data = a.observed;
    s2.split = a.split;
    s2.n_total = n;
    s2.n_obs = n_obs;
    s2.completion = true;
    s2.known_adj = hard_adjacency(m1.scores);
    TrainConfig tc2 = cfg.train;
    tc2.seed = derive_seed(cfg.seed, 22);
    const TrainedModel m2 = train(s2, tc2);
    save_model(m2, artifact(out, "checkpoint"));
    m2.log.save_csv(artifact(out, "trainlog.csv"));
    return;
  }

  TrainTask task;
  task.data = a.observed;
  task.split = a.split;
  task.n_obs = n_obs;
  if (cfg.task == "reconstruct") {
    task.n_total = n_obs;
    task.completion = false;
  } else {
    task.n_total = n;
    task.completion = true;
    task.known_adj = a.truth;  // only the observed block is consulted
  }
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  const TrainedModel model = train(task, tc);
  save_model(model, artifact(out, "checkpoint"));
  model.log.save_csv(artifact(out, "trainlog.csv"));
}

void cmd_evaluate(const ExperimentConfig& cfg, const std::string& out, bool no_match) {
  cfg.validate();
  const Artifacts a = load_artifacts(cfg, out);
  const int n = a.g.n;
  const int n_obs = a.part.n_observed();
  const TrainedModel model = load_model(artifact(out, "checkpoint"));
  if (model.n_obs != n_obs)
    throw ContractError("checkpoint does not match the partition in " + out);

  // State quality is teacher-forced prediction on the training windows: for
  // completion tasks those are the only windows whose hidden initial states
  // were fitted, and an untrained hidden state would put a floor under the
  // error that says nothing about the learned dynamics or structure.
  const ForwardResult fr = predict_windows(model, a.observed, a.split.train);
  const double state_score = score_states(fr.predicted, fr.target, cfg.dynamics);

  const Matrix truth_d = a.truth.cast<double>();
  const Graph truth_graph = graph_from_adjacency(a.truth);

  if (cfg.task == "reconstruct") {
    const Matrix probs = mean_adjacency(model.scores);
    const BoolMatrix mask = BoolMatrix::Constant(n, n, true);
    const EvalReport rep = score_completion(a.truth, probs, mask);
    write_eval_json(artifact(out, "eval_report.json"), rep, cfg.dynamics, state_score);
    save_contrast_csv(artifact(out, "contrast.csv"), rep.contrast);
    save_structure_csv(artifact(out, "structure_stats.csv"),
                       compare_structure(truth_graph, graph_from_probabilities(probs)));
    return;
  }

  if (cfg.task == "complete") {
    const Matrix probs = mean_adjacency(model.scores);
    Matrix aligned = probs;
    if (!no_match) {
      MatchProblem mp{truth_d, probs, n_obs};
      MatchOptions opts;
      opts.seed = derive_seed(cfg.seed, 5);
      const MatchResult mr = match(mp, opts);
      aligned = apply_match(probs, mr.permutation, n_obs);
      write_match_json(artifact(out, "match.json"), mr, n_obs);
    }
    const BoolMatrix mask = unobserved_mask(a.part);
    const EvalReport rep = score_completion(a.truth, aligned, mask);
    write_eval_json(artifact(out, "eval_report.json"), rep, cfg.dynamics, state_score);
    save_contrast_csv(artifact(out, "contrast.csv"), rep.contrast);
    save_structure_csv(artifact(out, "structure_stats.csv"),
                       compare_structure(truth_graph, graph_from_probabilities(aligned)));
    return;
  }

  // complete_blind: stage-1 soft scores fill the observed block, stage-2
  // aligned scores fill the entries touching hidden nodes.
  const TrainedModel m1 = load_model(artifact(out, "stage1_checkpoint"));
  if (m1.n_total != n_obs)
    throw ContractError("stage-1 checkpoint does not match the partition in " + out);
  const Matrix probs1 = mean_adjacency(m1.scores);
  const Matrix probs2 = mean_adjacency(model.scores);
  Matrix aligned = probs2;
  if (!no_match) {
    MatchProblem mp{truth_d, probs2, n_obs};
    MatchOptions opts;
    opts.seed = derive_seed(cfg.seed, 5);
    const MatchResult mr = match(mp, opts);
    aligned = apply_match(probs2, mr.permutation, n_obs);
    write_match_json(artifact(out, "match.json"), mr, n_obs);
  }
  Matrix whole = aligned;
  whole.topLeftCorner(n_obs, n_obs) = probs1;
  BoolMatrix mask_obs = BoolMatrix::Constant(n, n, false);
  mask_obs.topLeftCorner(n_obs, n_obs).setConstant(true);
  const BoolMatrix mask_all = BoolMatrix::Constant(n, n, true);
  const BoolMatrix mask_missing = unobserved_mask(a.part);
  const EvalReport rep_whole = score_completion(a.truth, whole, mask_all);
  const EvalReport rep_obs = score_completion(a.truth, whole, mask_obs);
  const EvalReport rep_missing = score_completion(a.truth, whole, mask_missing);
  write_eval_json(artifact(out, "eval_report.json"), rep_whole, cfg.dynamics, state_score);
  write_eval_json(artifact(out, "eval_report_observed.json"), rep_obs, cfg.dynamics,
                  state_score);
  write_eval_json(artifact(out, "eval_report_missing.json"), rep_missing, cfg.dynamics,
                  state_score);
  save_contrast_csv(artifact(out, "contrast.csv"), rep_whole.contrast);
  save_structure_csv(artifact(out, "structure_stats.csv"),
                     compare_structure(truth_graph, graph_from_probabilities(whole)));
}

void cmd_baseline(const ExperimentConfig& cfg, const std::string& out) {
  cfg.validate();
  const Artifacts a = load_artifacts(cfg, out);
  const int n_obs = a.part.n_observed();
  const auto obs_trajs = observed_trajectories(a.trajs, a.part);
  const IntMatrix truth_oo = a.truth.topLeftCorner(n_obs, n_obs);

  std::ostringstream csv;
  csv << "method,auc\n";
  char buf[64];
  const Matrix mi = mi_scores(obs_trajs, cfg.dynamics);
  std::snprintf(buf, sizeof(buf), "mi,%.10g\n", upper_triangle_auc(truth_oo, mi));
  csv << buf;
  if (cfg.dynamics == Dynamics::cmn) {
    const Matrix pc = pcorr_scores(obs_trajs);
    std::snprintf(buf, sizeof(buf), "pcorr,%.10g\n", upper_triangle_auc(truth_oo, pc));
    csv << buf;
  }
  write_text(artifact(out, "baselines.csv"), csv.str());
}

void cmd_match_files(const std::string& ref_path, const std::string& cand_path, int n_obs,
                     std::uint64_t seed, const std::string& out) {
  const Graph ref = load_edge_list(ref_path);
  const Graph cand = load_edge_list(cand_path);
  if (ref.n != cand.n)
    throw ParameterError("graphs differ in node count: " + std::to_string(ref.n) + " vs " +
                         std::to_string(cand.n));
  if (n_obs < 0 || n_obs > ref.n) throw ParameterError("seed count out of range");
  MatchProblem mp{ref.adj.cast<double>(), cand.adj.cast<double>(), n_obs};
  MatchOptions opts;
  opts.seed = seed;
  const MatchResult mr = match(mp, opts);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out + ": " + ec.message());
  write_match_json(artifact(out, "match.json"), mr, n_obs);
}

void cmd_sweep(const ExperimentConfig& cfg, const std::string& out,
               const std::vector<double>& fractions) {
  cfg.validate();
  if (fractions.empty()) throw ConfigError("sweep needs at least one fraction");
  for (double f : fractions)
    if (f <= 0.0 || f >= 1.0) throw ConfigError("sweep fractions must lie in (0, 1)");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out + ": " + ec.message());
  std::ostringstream csv;
  csv << "fraction,hidden,auc\n";
  for (double f : fractions) {
    ExperimentConfig sub = cfg;
    sub.task = "complete";
    sub.hidden = 0;
    sub.hidden_fraction = f;
    const std::string dir = out + "/fraction_" + format_fraction(f);
    cmd_generate(sub, dir);
    cmd_train(sub, dir);
    cmd_evaluate(sub, dir, /*no_match=*/false);
    const double score = read_eval_auc(artifact(dir, "eval_report.json"));
    const json jm =
        parse_json_text(slurp(artifact(dir, "dataset_manifest.json")), "manifest");
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s,%d,%.10g\n", format_fraction(f).c_str(),
                  jm.at("hidden").get<int>(), score);
    csv << buf;
  }
  write_text(artifact(out, "sweep.csv"), csv.str());
}

void cmd_run_all(const ExperimentConfig& cfg, const std::string& out, bool no_match) {
  cmd_generate(cfg, out);
  cmd_train(cfg, out);
  cmd_evaluate(cfg, out, no_match);
  cmd_baseline(cfg, out);
}

}  // namespace ginet
