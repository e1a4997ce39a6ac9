#include "ginet/trainer.hpp"

#include "ginet/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace ginet;

namespace {

std::string tmp_dir(const std::string& name) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(path);
  std::filesystem::create_directories(path);
  return path.string();
}

// Small coupled-map reconstruction task: every node observed.
TrainTask cmn_reconstruction_task(int n, int s, std::uint64_t seed) {
  const Graph g = generate_ws(n, 4, 0.3, seed);
  const auto trajs = simulate(g, Dynamics::cmn, s, 20, seed + 1);
  TrainTask task;
  task.data = windowize(trajs, Dynamics::cmn, 2, WindowMode::disjoint);
  task.split = split_windows(task.data.num_windows(), 10, 1, 1, seed + 2);
  task.n_total = n;
  task.n_obs = n;
  return task;
}

// Completion task: the last `hidden` nodes of a small graph go unobserved.
TrainTask cmn_completion_task(int n, int hidden, int s, std::uint64_t seed,
                              IntMatrix* truth_out = nullptr) {
  const Graph g = generate_ws(n, 4, 0.3, seed);
  const auto trajs = simulate(g, Dynamics::cmn, s, 20, seed + 1);
  NodePartition part;
  for (int i = 0; i < n - hidden; ++i) part.observed.push_back(i);
  for (int i = n - hidden; i < n; ++i) part.hidden.push_back(i);
  const TrajectoryDataset full = windowize(trajs, Dynamics::cmn, 2, WindowMode::disjoint);
  const IntMatrix truth = reorder_adjacency(g, part);
  if (truth_out != nullptr) *truth_out = truth;
  TrainTask task;
  task.data = mask_hidden(full, part);
  task.split = split_windows(task.data.num_windows(), 10, 1, 1, seed + 2);
  task.n_total = n;
  task.n_obs = n - hidden;
  task.known_adj = truth;
  task.completion = true;
  return task;
}

TrainConfig quick_config(int epochs, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.max_epochs = epochs;
  cfg.batch_size = 64;
  cfg.seed = seed;
  return cfg;
}

bool same_matrix(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.array() == b.array()).all();
}

}  // namespace

// ---- Loss -----------------------------------------------------------------------

TEST_CASE("prediction loss: exact opinions cost nothing, coin flips cost ln 2") {
  Matrix exact(2, 2), uniform(2, 2), target(2, 2);
  exact << 1, 0, 0, 1;
  uniform << 0.5, 0.5, 0.5, 0.5;
  target << 1, 0, 0, 1;
  CHECK(prediction_loss(ad::Variable::constant(exact), target, Dynamics::voter).item() ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(prediction_loss(ad::Variable::constant(uniform), target, Dynamics::voter).item() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("prediction loss: continuous error is the mean absolute deviation") {
  Matrix pred(2, 1), target(2, 1);
  pred << 0.2, 0.9;
  target << 0.5, 0.8;
  CHECK(prediction_loss(ad::Variable::constant(pred), target, Dynamics::cmn).item() ==
        doctest::Approx(0.2).epsilon(1e-12));
  // Overriding the row normalizer rescales the average, so two half batches
  // can sum to the loss of the full batch.
  CHECK(prediction_loss(ad::Variable::constant(pred), target, Dynamics::cmn, 4).item() ==
        doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("prediction loss: shape mismatches are rejected") {
  CHECK_THROWS_AS(prediction_loss(ad::Variable::constant(Matrix::Zero(2, 1)),
                                  Matrix::Zero(3, 1), Dynamics::cmn),
                  ShapeError);
  CHECK_THROWS_AS(prediction_loss(ad::Variable::constant(Matrix::Zero(0, 1)),
                                  Matrix::Zero(0, 1), Dynamics::cmn),
                  ParameterError);
}

// ---- Configuration and task validation ----------------------------------------------

TEST_CASE("train config: invalid settings are configuration errors") {
  TrainConfig cfg;
  cfg.max_epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.lr_dynamics = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.tau = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.lambda = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.val_subsample = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  TrainConfig ok;
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("train task: structural invariants are enforced") {
  TrainTask task = cmn_reconstruction_task(6, 4, 1);
  CHECK_NOTHROW(task.validate());

  TrainTask wrong_rows = task;
  wrong_rows.n_obs = 5;
  CHECK_THROWS_AS(wrong_rows.validate(), ParameterError);

  TrainTask hidden_in_reconstruction = task;
  hidden_in_reconstruction.n_total = 8;
  CHECK_THROWS_AS(hidden_in_reconstruction.validate(), ContractError);

  TrainTask bad_split = task;
  bad_split.split.train.push_back(task.data.num_windows());
  CHECK_THROWS_AS(bad_split.validate(), ParameterError);

  TrainTask no_train = task;
  no_train.split.train.clear();
  CHECK_THROWS_AS(no_train.validate(), ParameterError);

  TrainTask wrong_t = task;
  wrong_t.data.t = 3;
  CHECK_THROWS_AS(wrong_t.validate(), ParameterError);
}

// ---- Training behaviour ----------------------------------------------------------------

TEST_CASE("training: loss drops on a small reconstruction task") {
  const TrainTask task = cmn_reconstruction_task(8, 8, 7);
  const TrainedModel model = train(task, quick_config(40, 3));
  REQUIRE(model.log.rows.size() == 40);
  CHECK(model.log.rows.front().epoch == 1);
  CHECK(model.log.rows.back().epoch == 40);
  CHECK(model.log.rows.back().train_loss < 0.5 * model.log.rows.front().train_loss);
  for (const auto& row : model.log.rows) {
    CHECK(std::isfinite(row.train_loss));
    CHECK(std::isfinite(row.val_loss));
    CHECK(row.seconds >= 0.0);
  }
}

TEST_CASE("training: every parameter group moves") {
  const TrainTask task = cmn_completion_task(8, 2, 8, 21);
  const EdgeScores init_scores = make_edge_scores_completion(task.known_adj, task.n_obs, 1.0,
                                                             derive_seed(5, 10));
  const TrainedModel model = train(task, quick_config(10, 5));
  // Edge scores moved away from their initialization.
  CHECK(!same_matrix(model.scores.theta.value(), init_scores.theta.value()));
  // Hidden initial states moved (their gradient reaches them through messages).
  const HiddenInitStates init_hidden = make_hidden_init(
      task.data.num_windows(), 2, 1, InitActivation::sigmoid, derive_seed(5, 11));
  CHECK(!same_matrix(model.hidden_init.gamma.value(), init_hidden.gamma.value()));
  // And so did the dynamics learner.
  const DynamicsLearner init_learner =
      make_dynamics_learner(1, default_hidden_width(Dynamics::cmn), false, derive_seed(5, 12));
  CHECK(!same_matrix(model.learner.edge_mlp.layers[0].W.value(),
                     init_learner.edge_mlp.layers[0].W.value()));
}

TEST_CASE("training: bitwise reproducible for a fixed seed") {
  // 40 trajectories give ~330 training windows; a 320-window batch spans two
  // worker chunks, so the reduction order is exercised, not just one chunk.
  const TrainTask task = cmn_completion_task(7, 2, 40, 11);
  TrainConfig cfg = quick_config(6, 9);
  cfg.batch_size = 320;
  const TrainedModel m1 = train(task, cfg);
  const TrainedModel m2 = train(task, cfg);
  REQUIRE(m1.log.rows.size() == m2.log.rows.size());
  for (std::size_t e = 0; e < m1.log.rows.size(); ++e) {
    CHECK(m1.log.rows[e].train_loss == m2.log.rows[e].train_loss);
    CHECK(m1.log.rows[e].val_loss == m2.log.rows[e].val_loss);
  }
  CHECK(same_matrix(m1.scores.theta.value(), m2.scores.theta.value()));
  CHECK(same_matrix(m1.hidden_init.gamma.value(), m2.hidden_init.gamma.value()));
  for (std::size_t k = 0; k < m1.learner.params().size(); ++k)
    CHECK(same_matrix(m1.learner.params()[k].value(), m2.learner.params()[k].value()));
}

TEST_CASE("training: worker count does not change the arithmetic") {
  const TrainTask task = cmn_completion_task(7, 2, 40, 13);
  TrainConfig cfg = quick_config(5, 17);
  cfg.batch_size = 320;  // two chunks per epoch

  setenv("GIN_THREADS", "1", 1);
  const TrainedModel serial = train(task, cfg);
  setenv("GIN_THREADS", "3", 1);
  const TrainedModel threaded = train(task, cfg);
  unsetenv("GIN_THREADS");

  for (std::size_t e = 0; e < serial.log.rows.size(); ++e)
    CHECK(serial.log.rows[e].train_loss == threaded.log.rows[e].train_loss);
  CHECK(same_matrix(serial.scores.theta.value(), threaded.scores.theta.value()));
  CHECK(same_matrix(serial.hidden_init.gamma.value(), threaded.hidden_init.gamma.value()));
  for (std::size_t k = 0; k < serial.learner.params().size(); ++k)
    CHECK(same_matrix(serial.learner.params()[k].value(), threaded.learner.params()[k].value()));
}

TEST_CASE("training: a bad thread override is rejected") {
  const TrainTask task = cmn_reconstruction_task(6, 4, 19);
  setenv("GIN_THREADS", "0", 1);
  CHECK_THROWS_AS(train(task, quick_config(1, 1)), ConfigError);
  setenv("GIN_THREADS", "banana", 1);
  CHECK_THROWS_AS(train(task, quick_config(1, 1)), ConfigError);
  unsetenv("GIN_THREADS");
}

TEST_CASE("training: the sparsity term pushes connection probabilities down") {
  const TrainTask task = cmn_reconstruction_task(8, 8, 23);
  TrainConfig plain = quick_config(25, 7);
  TrainConfig sparse = plain;
  sparse.lambda = 0.5;
  const double mean_plain = mean_adjacency(train(task, plain).scores).mean();
  const double mean_sparse = mean_adjacency(train(task, sparse).scores).mean();
  CHECK(mean_sparse < mean_plain);
}

TEST_CASE("training: temperature annealing reaches the final value") {
  // With tau_final set, training must still run and improve; the schedule is
  // linear from tau to tau_final across epochs.
  const TrainTask task = cmn_reconstruction_task(6, 6, 29);
  TrainConfig cfg = quick_config(12, 3);
  cfg.tau = 2.0;
  cfg.tau_final = 0.5;
  const TrainedModel model = train(task, cfg);
  CHECK(model.log.rows.back().train_loss < model.log.rows.front().train_loss);
}

// ---- Forward evaluation -------------------------------------------------------------

TEST_CASE("prediction: rows pair windows with their targets") {
  const TrainTask task = cmn_reconstruction_task(6, 4, 31);
  const TrainedModel model = train(task, quick_config(3, 2));
  const std::vector<int> windows{0, 2};
  const ForwardResult fr = predict_windows(model, task.data, windows);
  REQUIRE(fr.predicted.rows() == 12);  // two windows x six observed nodes
  REQUIRE(fr.target.rows() == 12);
  CHECK(fr.target.topRows(6) == task.data.windows[0][1]);
  CHECK(fr.target.bottomRows(6) == task.data.windows[2][1]);
}

TEST_CASE("prediction: hidden initial states are the activated per-window slices") {
  const TrainTask task = cmn_completion_task(7, 2, 5, 37);
  const TrainedModel model = train(task, quick_config(3, 4));
  const Matrix h0 = hidden_initial_states(model, 0);
  REQUIRE(h0.rows() == 2);
  REQUIRE(h0.cols() == 1);
  // Sigmoid activation keeps the map's states inside the unit interval.
  CHECK(h0.minCoeff() > 0.0);
  CHECK(h0.maxCoeff() < 1.0);
  const Matrix again = hidden_initial_states(model, 0);
  CHECK(same_matrix(h0, again));
}

// ---- Persistence ----------------------------------------------------------------------

TEST_CASE("train log: CSV round trip with pinned header") {
  TrainLog log;
  log.rows = {{1, 0.5, 0.625, 0.25}, {2, 0.25, 0.3125, 0.5}};
  const std::string dir = tmp_dir("ginet_trainlog_test");
  const std::string path = dir + "/log.csv";
  log.save_csv(path);

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "epoch,train_loss,val_loss,seconds");

  const TrainLog loaded = TrainLog::load_csv(path);
  REQUIRE(loaded.rows.size() == 2);
  CHECK(loaded.rows[0].epoch == 1);
  CHECK(loaded.rows[0].train_loss == 0.5);
  CHECK(loaded.rows[0].val_loss == 0.625);
  CHECK(loaded.rows[1].train_loss == 0.25);
  CHECK(loaded.rows[1].seconds == 0.5);
  std::filesystem::remove_all(dir);
}

TEST_CASE("train log: malformed files are parse errors") {
  const std::string dir = tmp_dir("ginet_trainlog_bad");
  const std::string path = dir + "/log.csv";
  {
    std::ofstream out(path);
    out << "epoch,train_loss\n1,0.5\n";
  }
  CHECK_THROWS_AS(TrainLog::load_csv(path), ParseError);
  CHECK_THROWS_AS(TrainLog::load_csv(dir + "/missing.csv"), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("checkpoint: completion models round trip exactly") {
  const TrainTask task = cmn_completion_task(7, 2, 5, 41);
  const TrainedModel model = train(task, quick_config(4, 6));
  const std::string dir = tmp_dir("ginet_checkpoint_test");
  save_model(model, dir);
  const TrainedModel loaded = load_model(dir);

  CHECK(loaded.n_total == model.n_total);
  CHECK(loaded.n_obs == model.n_obs);
  CHECK(loaded.dynamics == model.dynamics);
  CHECK(same_matrix(loaded.scores.theta.value(), model.scores.theta.value()));
  CHECK(same_matrix(loaded.scores.base, model.scores.base));
  CHECK(*loaded.scores.entries == *model.scores.entries);
  CHECK(loaded.scores.tau == model.scores.tau);
  CHECK(same_matrix(loaded.hidden_init.gamma.value(), model.hidden_init.gamma.value()));
  CHECK(loaded.hidden_init.activation == model.hidden_init.activation);
  for (std::size_t k = 0; k < model.learner.params().size(); ++k)
    CHECK(same_matrix(loaded.learner.params()[k].value(), model.learner.params()[k].value()));

  // The reloaded model predicts identically.
  const ForwardResult a = predict_windows(model, task.data, {0, 1});
  const ForwardResult b = predict_windows(loaded, task.data, {0, 1});
  CHECK(same_matrix(a.predicted, b.predicted));

  CHECK_THROWS_AS(load_model(dir + "/nope"), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("checkpoint: voter reconstruction models keep their output layer") {
  const Graph g = generate_ws(6, 4, 0.3, 3);
  const auto trajs = simulate(g, Dynamics::voter, 6, 10, 4);
  TrainTask task;
  task.data = windowize(trajs, Dynamics::voter, 2, WindowMode::sliding);
  task.split = split_windows(task.data.num_windows(), 5, 1, 1, 5);
  task.n_total = 6;
  task.n_obs = 6;
  const TrainedModel model = train(task, quick_config(4, 2));
  CHECK(model.learner.voter_output);
  CHECK(model.learner.width == default_hidden_width(Dynamics::voter));

  const std::string dir = tmp_dir("ginet_checkpoint_voter");
  save_model(model, dir);
  const TrainedModel loaded = load_model(dir);
  CHECK(loaded.learner.voter_output);
  CHECK(loaded.dynamics == Dynamics::voter);
  const ForwardResult a = predict_windows(model, task.data, {0});
  const ForwardResult b = predict_windows(loaded, task.data, {0});
  CHECK(same_matrix(a.predicted, b.predicted));
  std::filesystem::remove_all(dir);
}
