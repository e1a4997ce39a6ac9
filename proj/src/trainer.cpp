#include "ginet/trainer.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace ginet {

namespace {

// Training allocates and frees the same large batch matrices every epoch.
// Left at its defaults, glibc serves each one with a fresh mmap and returns it
// immediately, so every epoch re-faults and re-zeroes hundreds of megabytes.
// Raising the thresholds keeps those blocks on the heap for reuse.
[[maybe_unused]] const bool g_malloc_tuned = [] {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 256 * 1024 * 1024);
  mallopt(M_TRIM_THRESHOLD, 256 * 1024 * 1024);
#endif
  return true;
}();

}  // namespace

void TrainConfig::validate() const {
  if (max_epochs < 1) throw ConfigError("epoch count must be positive");
  if (batch_size < 1) throw ConfigError("batch size must be positive");
  if (lr_dynamics <= 0.0 || lr_init_states <= 0.0 || lr_edge_scores <= 0.0)
    throw ConfigError("learning rates must be positive");
  if (tau <= 0.0) throw ConfigError("temperature must be positive");
  if (lambda < 0.0) throw ConfigError("sparsity weight must be nonnegative");
  if (val_subsample < 1) throw ConfigError("validation subsample must be positive");
  if (hidden_width < 0) throw ConfigError("hidden width must be nonnegative");
}

void TrainTask::validate() const {
  if (data.t != 2) throw ParameterError("training expects two-state windows");
  if (data.num_windows() < 1) throw ParameterError("no windows to train on");
  if (n_obs < 1 || n_obs != data.n)
    throw ParameterError("window rows must match the observed node count");
  if (n_total < n_obs) throw ParameterError("total node count below observed count");
  if (!completion && n_total != n_obs)
    throw ContractError("reconstruction cannot introduce hidden nodes");
  const int S = data.num_windows();
  for (const auto* part : {&split.train, &split.test, &split.val})
    for (int w : *part)
      if (w < 0 || w >= S) throw ParameterError("split references a missing window");
  if (split.train.empty()) throw ParameterError("training split is empty");
}

ad::Variable prediction_loss(const ad::Variable& predicted, const Matrix& target,
                             Dynamics dynamics, long norm_rows) {
  if (predicted.value().rows() != target.rows() || predicted.value().cols() != target.cols())
    throw ShapeError("prediction and target shapes differ: " +
                     shape_str(predicted.value()) + " vs " + shape_str(target));
  if (target.rows() == 0) throw ParameterError("nothing to score");
  const long rows = norm_rows > 0 ? norm_rows : target.rows();
  if (dynamics == Dynamics::voter) {
    ad::Variable logp = ad::vlog(predicted, 1e-12);
    ad::Variable weighted = ad::mul(logp, ad::Variable::constant(target));
    return ad::scale(ad::sum_all(weighted), -1.0 / static_cast<double>(rows));
  }
  ad::Variable err = ad::vabs(ad::sub(predicted, ad::Variable::constant(target)));
  return ad::scale(ad::sum_all(err),
                   1.0 / (static_cast<double>(rows) * target.cols()));
}

namespace {

int threads_from_env() {
  const char* raw = std::getenv("GIN_THREADS");
  if (raw == nullptr || *raw == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || v < 1 || v > 64)
    throw ConfigError("GIN_THREADS must be an integer in [1, 64]");
  return static_cast<int>(v);
}

DynamicsLearner clone_learner(const DynamicsLearner& src, bool requires_grad) {
  DynamicsLearner out = src;
  for (ad::Mlp* mlp : {&out.edge_mlp, &out.node_mlp, &out.out_mlp})
    for (auto& layer : mlp->layers) {
      layer.W = ad::Variable::leaf(layer.W.value(), requires_grad);
      layer.b = ad::Variable::leaf(layer.b.value(), requires_grad);
    }
  return out;
}

ad::Variable activate_init(const ad::Variable& raw, InitActivation act) {
  switch (act) {
    case InitActivation::sigmoid: return ad::sigmoid(raw);
    case InitActivation::softmax: return ad::softmax_rows(raw);
    case InitActivation::identity: return raw;
  }
  throw ContractError("unknown activation");
}

struct ChunkOut {
  double loss = 0.0;
  Matrix g_theta;
  std::vector<Matrix> g_alpha;
  Matrix g_gamma;
  std::vector<int> gamma_rows;
  Matrix predicted;  // filled only when predictions are requested
};

// Builds the forward graph for `B` windows starting at windows[offset]:
// observed rows come from the window data, hidden rows from the initial-state
// scores. Computes the loss against the observed next states, and gradients
// of local parameter copies when requested.
ChunkOut run_one_chunk(const TrainedModel& model, const TrajectoryDataset& data,
                       const std::shared_ptr<const PairList>& pairs,
                       const std::vector<int>& windows, std::size_t offset, int B,
                       bool with_grads, const Matrix* noise, double tau_e, bool hard,
                       long norm_rows, bool keep_predictions) {
  const int n = model.n_total;
  const int n_obs = model.n_obs;
  const int n_u = n - n_obs;
  const int d = data.d;
  const Dynamics dyn = data.dynamics;

  Matrix x_obs(static_cast<Eigen::Index>(B) * n_obs, d);
  Matrix target(static_cast<Eigen::Index>(B) * n_obs, d);
  std::vector<int> gamma_rows;
  gamma_rows.reserve(static_cast<std::size_t>(B) * n_u);
  for (int b = 0; b < B; ++b) {
    const int w = windows[offset + b];
    const auto& win = data.windows[w];
    x_obs.middleRows(static_cast<Eigen::Index>(b) * n_obs, n_obs) = win[0];
    target.middleRows(static_cast<Eigen::Index>(b) * n_obs, n_obs) = win[1];
    for (int k = 0; k < n_u; ++k) gamma_rows.push_back(w * n_u + k);
  }

  // Local parameter copies keep each chunk's graph thread-private; gradients
  // are merged in chunk order afterwards.
  ad::Variable theta_l;
  ad::Variable A;
  if (noise != nullptr) {
    theta_l = ad::Variable::leaf(model.scores.theta.value(), with_grads);
    EdgeScores local;
    local.theta = theta_l;
    local.entries = model.scores.entries;
    local.base = model.scores.base;
    local.tau = model.scores.tau;
    local.n = n;
    A = sample_adjacency_with_noise(local, *noise, hard, tau_e);
  } else {
    A = ad::Variable::constant(mean_adjacency(model.scores));
  }

  DynamicsLearner learner_l = clone_learner(model.learner, with_grads);

  ad::Variable gamma_l;
  ad::Variable x_full;
  if (n_u > 0) {
    Matrix gamma_raw(static_cast<Eigen::Index>(gamma_rows.size()), d);
    for (std::size_t r = 0; r < gamma_rows.size(); ++r)
      gamma_raw.row(static_cast<Eigen::Index>(r)) =
          model.hidden_init.gamma.value().row(gamma_rows[r]);
    gamma_l = ad::Variable::leaf(gamma_raw, with_grads);
    ad::Variable x_hid = activate_init(gamma_l, model.hidden_init.activation);
    ad::Variable stacked = ad::concat_rows(ad::Variable::constant(x_obs), x_hid);
    std::vector<int> interleave(static_cast<std::size_t>(B) * n);
    for (int b = 0; b < B; ++b)
      for (int i = 0; i < n; ++i)
        interleave[static_cast<std::size_t>(b) * n + i] =
            i < n_obs ? b * n_obs + i : B * n_obs + b * n_u + (i - n_obs);
    x_full = ad::gather_rows(stacked, interleave);
  } else {
    x_full = ad::Variable::constant(x_obs);
  }

  ad::Variable pred = predict_step_batch(learner_l, A, x_full, pairs, B, n);
  ad::Variable pred_obs = pred;
  if (n_u > 0) {
    std::vector<int> obs_rows(static_cast<std::size_t>(B) * n_obs);
    for (int b = 0; b < B; ++b)
      for (int i = 0; i < n_obs; ++i)
        obs_rows[static_cast<std::size_t>(b) * n_obs + i] = b * n + i;
    pred_obs = ad::gather_rows(pred, obs_rows);
  }
  ad::Variable loss = prediction_loss(pred_obs, target, dyn, norm_rows);

  ChunkOut out;
  out.loss = loss.item();
  if (keep_predictions) out.predicted = pred_obs.value();
  if (with_grads) {
    ad::backward(loss);
    out.g_theta = theta_l.has_grad()
                      ? theta_l.grad()
                      : Matrix::Zero(theta_l.value().rows(), theta_l.value().cols());
    for (const ad::Variable& p : learner_l.params())
      out.g_alpha.push_back(p.has_grad()
                                ? p.grad()
                                : Matrix::Zero(p.value().rows(), p.value().cols()));
    if (n_u > 0) {
      out.g_gamma = gamma_l.has_grad()
                        ? gamma_l.grad()
                        : Matrix::Zero(gamma_l.value().rows(), gamma_l.value().cols());
      out.gamma_rows = std::move(gamma_rows);
    }
  }
  return out;
}

int chunk_capacity(std::size_t pair_count) {
  const std::size_t target_rows = 60000;
  const std::size_t cap = target_rows / std::max<std::size_t>(pair_count, 1);
  return static_cast<int>(std::clamp<std::size_t>(cap, 1, 256));
}

// Runs all chunks (parallel across GIN_THREADS, reduced in chunk order) and
// returns the summed loss. When with_grads is set the gradients are
// accumulated into the model's parameter leaves.
double run_chunks(const TrainedModel& model, const TrajectoryDataset& data,
                  const std::shared_ptr<const PairList>& pairs,
                  const std::vector<int>& windows, bool with_grads, const Matrix* noise,
                  double tau_e, bool hard, int threads, Matrix* predictions) {
  const int n_obs = model.n_obs;
  const long norm_rows = static_cast<long>(windows.size()) * n_obs;
  const int cap = chunk_capacity(pairs->size());
  const int n_chunks = static_cast<int>((windows.size() + cap - 1) / cap);
  std::vector<ChunkOut> results(n_chunks);

  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(std::max(threads, 1));
  auto work = [&](int slot) {
    try {
      while (true) {
        const int c = next.fetch_add(1);
        if (c >= n_chunks) break;
        const std::size_t off = static_cast<std::size_t>(c) * cap;
        const int B = static_cast<int>(std::min<std::size_t>(cap, windows.size() - off));
        results[c] = run_one_chunk(model, data, pairs, windows, off, B, with_grads, noise,
                                   tau_e, hard, norm_rows, predictions != nullptr);
      }
    } catch (...) {
      errors[slot] = std::current_exception();
    }
  };
  const int pool = std::min<int>(threads, n_chunks);
  if (pool <= 1) {
    work(0);
  } else {
    std::vector<std::thread> ts;
    ts.reserve(pool);
    for (int t = 0; t < pool; ++t) ts.emplace_back(work, t);
    for (auto& t : ts) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  double loss = 0.0;
  // Variable copies share their node, so gradient accumulation lands on the
  // model's own leaves.
  ad::Variable theta = model.scores.theta;
  ad::Variable gamma = model.hidden_init.gamma;
  auto alpha = model.learner.params();
  for (int c = 0; c < n_chunks; ++c) {
    ChunkOut& r = results[c];
    loss += r.loss;
    if (with_grads) {
      theta.node()->ensure_grad();
      theta.grad() += r.g_theta;
      for (std::size_t k = 0; k < alpha.size(); ++k) {
        alpha[k].node()->ensure_grad();
        alpha[k].grad() += r.g_alpha[k];
      }
      if (!r.gamma_rows.empty()) {
        gamma.node()->ensure_grad();
        Matrix& gg = gamma.grad();
        for (std::size_t i = 0; i < r.gamma_rows.size(); ++i)
          gg.row(r.gamma_rows[i]) += r.g_gamma.row(static_cast<Eigen::Index>(i));
      }
    }
    if (predictions != nullptr) {
      const std::size_t off = static_cast<std::size_t>(c) * cap;
      predictions->middleRows(static_cast<Eigen::Index>(off) * n_obs,
                              r.predicted.rows()) = r.predicted;
    }
  }
  return loss;
}

}  // namespace

TrainedModel train(const TrainTask& task, const TrainConfig& cfg) {
  cfg.validate();
  task.validate();
  const Dynamics dyn = task.data.dynamics;
  const int d = task.data.d;
  const int n = task.n_total;
  const int n_obs = task.n_obs;
  const int n_u = n - n_obs;
  const int S = task.data.num_windows();

  IntMatrix known = IntMatrix::Zero(n, n);
  if (task.completion) {
    if (task.known_adj.rows() == n_obs && task.known_adj.cols() == n_obs) {
      known.topLeftCorner(n_obs, n_obs) = task.known_adj;
    } else if (task.known_adj.rows() == n && task.known_adj.cols() == n) {
      known = task.known_adj;
      // Only the observed block is trusted; anything else is inferred.
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i >= n_obs || j >= n_obs) known(i, j) = 0;
    } else {
      throw ShapeError("known adjacency must cover the observed block or the full graph");
    }
  }

  TrainedModel model;
  model.dynamics = dyn;
  model.n_total = n;
  model.n_obs = n_obs;
  const int width = cfg.hidden_width > 0 ? cfg.hidden_width : default_hidden_width(dyn);
  model.scores = task.completion
                     ? make_edge_scores_completion(known, n_obs, cfg.tau,
                                                   derive_seed(cfg.seed, 10))
                     : make_edge_scores_full(n, cfg.tau, derive_seed(cfg.seed, 10));
  model.hidden_init =
      make_hidden_init(S, n_u, d, default_init_activation(dyn), derive_seed(cfg.seed, 11));
  model.learner =
      make_dynamics_learner(d, width, dyn == Dynamics::voter, derive_seed(cfg.seed, 12));

  const auto pairs = support_pairs(model.scores);
  const int threads = threads_from_env();

  ad::Adam opt;
  opt.add_params(model.learner.params(), cfg.lr_dynamics);
  if (n_u > 0) opt.add_param(model.hidden_init.gamma, cfg.lr_init_states);
  opt.add_param(model.scores.theta, cfg.lr_edge_scores);

  Rng root(cfg.seed);
  std::vector<int> val_ids = task.split.val;
  {
    Rng vr = root.derive(13);
    vr.shuffle(val_ids);
    if (static_cast<int>(val_ids.size()) > cfg.val_subsample)
      val_ids.resize(cfg.val_subsample);
  }

  const int train_size = static_cast<int>(task.split.train.size());
  const int batch = std::min(cfg.batch_size, train_size);
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    double tau_e = cfg.tau;
    if (cfg.tau_final > 0.0 && cfg.max_epochs > 1)
      tau_e = cfg.tau + (cfg.tau_final - cfg.tau) * static_cast<double>(epoch - 1) /
                            static_cast<double>(cfg.max_epochs - 1);

    Rng batch_rng = root.derive(1000 + 2ull * static_cast<std::uint64_t>(epoch));
    Rng noise_rng = root.derive(1001 + 2ull * static_cast<std::uint64_t>(epoch));
    const std::vector<int> pick = batch_rng.sample_without_replacement(train_size, batch);
    std::vector<int> windows(batch);
    for (int i = 0; i < batch; ++i) windows[i] = task.split.train[pick[i]];
    const Matrix noise = sample_concrete_noise(model.scores, noise_rng);

    double train_loss = run_chunks(model, task.data, pairs, windows, /*with_grads=*/true,
                                   &noise, tau_e, cfg.hard_samples, threads, nullptr);
    if (cfg.lambda > 0.0) {
      ad::Variable A =
          sample_adjacency_with_noise(model.scores, noise, cfg.hard_samples, tau_e);
      ad::Variable l1 = ad::scale(ad::sum_all(ad::vabs(A)),
                                  cfg.lambda / (static_cast<double>(n) * n));
      ad::backward(l1);
      train_loss += l1.item();
    }
    if (!std::isfinite(train_loss))
      throw NumericError("training loss diverged at epoch " + std::to_string(epoch));
    opt.step();

    double val_loss = train_loss;
    if (!val_ids.empty())
      val_loss = run_chunks(model, task.data, pairs, val_ids, /*with_grads=*/false,
                            nullptr, tau_e, false, threads, nullptr);
    if (!std::isfinite(val_loss))
      throw NumericError("validation loss diverged at epoch " + std::to_string(epoch));

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    model.log.rows.push_back({epoch, train_loss, val_loss, seconds});
  }
  return model;
}

ForwardResult predict_windows(const TrainedModel& model, const TrajectoryDataset& data,
                              const std::vector<int>& windows) {
  if (data.t != 2) throw ParameterError("prediction expects two-state windows");
  if (data.n != model.n_obs) throw ShapeError("window rows must match the observed count");
  for (int w : windows)
    if (w < 0 || w >= model.hidden_init.S)
      throw ParameterError("window index out of range");
  if (windows.empty()) throw ParameterError("no windows requested");
  const auto pairs = support_pairs(model.scores);
  ForwardResult out;
  out.predicted.resize(static_cast<Eigen::Index>(windows.size()) * model.n_obs, data.d);
  out.target.resize(out.predicted.rows(), data.d);
  for (std::size_t i = 0; i < windows.size(); ++i)
    out.target.middleRows(static_cast<Eigen::Index>(i) * model.n_obs, model.n_obs) =
        data.windows[windows[i]][1];
  run_chunks(model, data, pairs, windows, /*with_grads=*/false, nullptr,
             model.scores.tau, false, threads_from_env(), &out.predicted);
  return out;
}

Matrix hidden_initial_states(const TrainedModel& model, int window) {
  return hidden_init_window(model.hidden_init, window).value();
}

void TrainLog::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "epoch,train_loss,val_loss,seconds\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.3f\n", r.epoch, r.train_loss,
                  r.val_loss, r.seconds);
    out << buf;
  }
  if (!out.good()) throw IoError("failed writing " + path);
}

TrainLog TrainLog::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "epoch,train_loss,val_loss,seconds")
    throw ParseError(path + ": unexpected header '" + line + "'");
  TrainLog log;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    TrainLogRow row;
    try {
      if (!std::getline(ss, field, ',')) throw std::invalid_argument("epoch");
      row.epoch = std::stoi(field);
      if (!std::getline(ss, field, ',')) throw std::invalid_argument("train_loss");
      row.train_loss = std::stod(field);
      if (!std::getline(ss, field, ',')) throw std::invalid_argument("val_loss");
      row.val_loss = std::stod(field);
      if (!std::getline(ss, field, ',')) throw std::invalid_argument("seconds");
      row.seconds = std::stod(field);
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": malformed row");
    }
    log.rows.push_back(row);
  }
  return log;
}

namespace {

const char* activation_name(InitActivation act) {
  switch (act) {
    case InitActivation::sigmoid: return "sigmoid";
    case InitActivation::softmax: return "softmax";
    case InitActivation::identity: return "identity";
  }
  throw ContractError("unknown activation");
}

InitActivation activation_from_name(const std::string& name) {
  if (name == "sigmoid") return InitActivation::sigmoid;
  if (name == "softmax") return InitActivation::softmax;
  if (name == "identity") return InitActivation::identity;
  throw ParseError("unknown activation '" + name + "'");
}

}  // namespace

void save_model(const TrainedModel& model, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::pair<std::string, Matrix>> tensors;
  tensors.emplace_back("theta", model.scores.theta.value());
  tensors.emplace_back("base", model.scores.base);
  tensors.emplace_back("gamma", model.hidden_init.gamma.value());
  const char* names[3] = {"edge", "node", "out"};
  const ad::Mlp* mlps[3] = {&model.learner.edge_mlp, &model.learner.node_mlp,
                            &model.learner.out_mlp};
  for (int m = 0; m < 3; ++m) {
    for (std::size_t l = 0; l < mlps[m]->layers.size(); ++l) {
      const std::string tag = std::string(names[m]) + "." + std::to_string(l);
      tensors.emplace_back(tag + ".W", mlps[m]->layers[l].W.value());
      tensors.emplace_back(tag + ".b", mlps[m]->layers[l].b.value());
    }
  }
  ad::save_tensors(tensors, dir + "/params.bin");

  nlohmann::json j;
  j["format"] = 1;
  j["dynamics"] = dynamics_name(model.dynamics);
  j["n"] = model.n_total;
  j["n_obs"] = model.n_obs;
  j["d"] = model.learner.d;
  j["width"] = model.learner.width;
  j["tau"] = model.scores.tau;
  j["windows"] = model.hidden_init.S;
  j["activation"] = activation_name(model.hidden_init.activation);
  const long full = static_cast<long>(model.n_total) * (model.n_total - 1) / 2;
  j["inverted_l"] = model.scores.num_entries() != full;
  std::ofstream out(dir + "/manifest.json");
  if (!out) throw IoError("cannot open " + dir + "/manifest.json for writing");
  out << j.dump(2) << '\n';
  if (!out.good()) throw IoError("failed writing " + dir + "/manifest.json");
}

TrainedModel load_model(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json");
  if (!in) throw IoError("cannot open " + dir + "/manifest.json");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError(dir + "/manifest.json: " + e.what());
  }
  TrainedModel model;
  try {
    if (j.at("format").get<int>() != 1) throw ParseError("unsupported checkpoint format");
    model.dynamics = dynamics_from_name(j.at("dynamics").get<std::string>());
    model.n_total = j.at("n").get<int>();
    model.n_obs = j.at("n_obs").get<int>();
    const int d = j.at("d").get<int>();
    const int width = j.at("width").get<int>();
    const double tau = j.at("tau").get<double>();
    const int S = j.at("windows").get<int>();
    const InitActivation act = activation_from_name(j.at("activation").get<std::string>());
    const bool inverted_l = j.at("inverted_l").get<bool>();

    auto tensors = ad::load_tensors(dir + "/params.bin");
    auto find = [&](const std::string& name) -> const Matrix& {
      for (const auto& [tn, tv] : tensors)
        if (tn == name) return tv;
      throw ParseError(dir + "/params.bin: missing tensor '" + name + "'");
    };

    const int n = model.n_total;
    auto entries = std::make_shared<PairList>();
    for (int i = 0; i < n; ++i)
      for (int jj = i + 1; jj < n; ++jj)
        if (!inverted_l || i >= model.n_obs || jj >= model.n_obs)
          entries->push_back({i, jj});
    model.scores.theta = ad::Variable::leaf(find("theta"), true);
    if (model.scores.theta.value().rows() != static_cast<Eigen::Index>(entries->size()) ||
        model.scores.theta.value().cols() != 1)
      throw ParseError(dir + "/params.bin: edge-score shape mismatch");
    model.scores.entries = std::move(entries);
    model.scores.base = find("base");
    if (model.scores.base.rows() != n || model.scores.base.cols() != n)
      throw ParseError(dir + "/params.bin: base shape mismatch");
    model.scores.tau = tau;
    model.scores.n = n;

    model.hidden_init.gamma = ad::Variable::leaf(find("gamma"), true);
    model.hidden_init.S = S;
    model.hidden_init.n_u = n - model.n_obs;
    model.hidden_init.d = d;
    model.hidden_init.activation = act;
    if (model.hidden_init.gamma.value().rows() !=
            static_cast<Eigen::Index>(S) * (n - model.n_obs) ||
        (model.hidden_init.gamma.value().rows() > 0 &&
         model.hidden_init.gamma.value().cols() != d))
      throw ParseError(dir + "/params.bin: initial-state shape mismatch");

    model.learner.d = d;
    model.learner.width = width;
    model.learner.voter_output = model.dynamics == Dynamics::voter;
    auto load_mlp = [&](const char* name, int layers) {
      ad::Mlp mlp;
      for (int l = 0; l < layers; ++l) {
        const std::string tag = std::string(name) + "." + std::to_string(l);
        ad::LinearLayer layer;
        layer.W = ad::Variable::leaf(find(tag + ".W"), true);
        layer.b = ad::Variable::leaf(find(tag + ".b"), true);
        mlp.layers.push_back(layer);
      }
      return mlp;
    };
    model.learner.edge_mlp = load_mlp("edge", 1);
    model.learner.node_mlp = load_mlp("node", 1);
    model.learner.out_mlp = load_mlp("out", 2);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(dir + "/manifest.json: " + e.what());
  }
  return model;
}

}  // namespace ginet
