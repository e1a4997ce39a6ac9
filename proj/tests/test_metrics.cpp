#include "ginet/metrics.hpp"

#include "ginet/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

using namespace ginet;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// One single-step "trajectory" per sample keeps the sample count explicit.
std::vector<Trajectory> scalar_series(const std::vector<std::vector<double>>& per_node) {
  const int n = static_cast<int>(per_node.size());
  const std::size_t m = per_node.front().size();
  std::vector<Trajectory> out;
  Trajectory t;
  for (std::size_t s = 0; s < m; ++s) {
    Matrix x(n, 1);
    for (int i = 0; i < n; ++i) x(i, 0) = per_node[static_cast<std::size_t>(i)][s];
    t.push_back(x);
  }
  out.push_back(std::move(t));
  return out;
}

std::vector<Trajectory> opinion_series(const std::vector<std::vector<int>>& per_node) {
  const int n = static_cast<int>(per_node.size());
  const std::size_t m = per_node.front().size();
  std::vector<Trajectory> out;
  Trajectory t;
  for (std::size_t s = 0; s < m; ++s) {
    Matrix x = Matrix::Zero(n, 2);
    for (int i = 0; i < n; ++i) x(i, per_node[static_cast<std::size_t>(i)][s]) = 1.0;
    t.push_back(x);
  }
  out.push_back(std::move(t));
  return out;
}

IntMatrix adjacency(int n, const std::vector<std::pair<int, int>>& edges) {
  IntMatrix adj = IntMatrix::Zero(n, n);
  for (auto [i, j] : edges) adj(i, j) = adj(j, i) = 1;
  return adj;
}

}  // namespace

// ---- AUC -----------------------------------------------------------------------

TEST_CASE("auc: hand-checked rankings") {
  // Positives 0.35 and 0.8 against negatives 0.1 and 0.4: three of the four
  // positive-negative pairs are ordered correctly.
  CHECK(auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(auc({0.9, 0.8, 0.1}, {1, 1, 0}) == 1.0);
  CHECK(auc({0.1, 0.2, 0.9}, {1, 1, 0}) == 0.0);
  // A tie between a positive and a negative counts half.
  CHECK(auc({0.5, 0.5, 0.2}, {1, 0, 0}) == doctest::Approx(0.75).epsilon(1e-15));
  // All scores equal: pure chance.
  CHECK(auc({0.3, 0.3, 0.3, 0.3}, {1, 0, 1, 0}) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("auc: invariant under strictly increasing transforms") {
  Rng rng(41);
  for (int rep = 0; rep < 50; ++rep) {
    const int m = 12;
    std::vector<double> scores(m);
    std::vector<int> labels(m);
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < m; ++i) {
      scores[static_cast<std::size_t>(i)] = rng.normal();
      const int l = rng.bernoulli(0.4) ? 1 : 0;
      labels[static_cast<std::size_t>(i)] = l;
      (l ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) continue;
    const double base = auc(scores, labels);
    std::vector<double> shifted(m), expd(m);
    for (int i = 0; i < m; ++i) {
      shifted[static_cast<std::size_t>(i)] = 2.0 * scores[static_cast<std::size_t>(i)] + 3.0;
      expd[static_cast<std::size_t>(i)] = std::exp(scores[static_cast<std::size_t>(i)]);
    }
    CHECK(auc(shifted, labels) == base);
    CHECK(auc(expd, labels) == base);
    // Negating scores flips the ranking (scores are almost surely tie-free).
    std::vector<double> neg(m);
    for (int i = 0; i < m; ++i) neg[static_cast<std::size_t>(i)] = -scores[static_cast<std::size_t>(i)];
    CHECK(auc(neg, labels) == doctest::Approx(1.0 - base).epsilon(1e-12));
  }
}

TEST_CASE("auc: degenerate inputs are rejected") {
  CHECK_THROWS_AS(auc({0.1, 0.2}, {1, 1}), NumericError);
  CHECK_THROWS_AS(auc({0.1, 0.2}, {0, 0}), NumericError);
  CHECK_THROWS_AS(auc({0.1, 0.2}, {0, 2}), ParameterError);
  CHECK_THROWS_AS(auc({0.1, 0.2}, {0, -1}), ParameterError);
  CHECK_THROWS_AS(auc({0.1}, {0, 1}), ShapeError);
  CHECK_THROWS_AS(auc({}, {}), NumericError);
}

// ---- Completion scoring ----------------------------------------------------------

TEST_CASE("completion scoring: hand-checked confusion counts and contrast cells") {
  // Nodes 2 and 3 hidden: every pair touching them is scored, the observed
  // 2x2 block is not.
  const IntMatrix a_true = adjacency(4, {{0, 1}, {0, 2}, {2, 3}});
  BoolMatrix mask = BoolMatrix::Constant(4, 4, true);
  mask.topLeftCorner(2, 2).setConstant(false);
  Matrix probs = Matrix::Zero(4, 4);
  const auto set = [&](int i, int j, double v) { probs(i, j) = probs(j, i) = v; };
  set(0, 2, 0.9);  // true edge, predicted    -> TP
  set(2, 3, 0.2);  // true edge, missed       -> FN
  set(1, 2, 0.7);  // non-edge, predicted     -> FP
  set(0, 3, 0.1);  // non-edge, rejected      -> TN
  set(1, 3, 0.3);  // non-edge, rejected      -> TN

  const EvalReport rep = score_completion(a_true, probs, mask);
  CHECK(rep.n_scored == 5);
  CHECK(rep.tp == 1);
  CHECK(rep.fn == 1);
  CHECK(rep.fp == 1);
  CHECK(rep.tn == 2);
  CHECK(rep.accuracy == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(rep.tpr == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rep.fpr == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  // Positives {0.9, 0.2} vs negatives {0.7, 0.1, 0.3}: 4 of 6 pairs ordered.
  CHECK(rep.auc == doctest::Approx(4.0 / 6.0).epsilon(1e-12));

  CHECK(rep.contrast(0, 2) == kContrastTP);
  CHECK(rep.contrast(2, 0) == kContrastTP);
  CHECK(rep.contrast(2, 3) == kContrastFN);
  CHECK(rep.contrast(1, 2) == kContrastFP);
  CHECK(rep.contrast(0, 3) == kContrastTN);
  CHECK(rep.contrast(1, 3) == kContrastTN);
  CHECK(rep.contrast(0, 1) == kContrastObserved);
  for (int i = 0; i < 4; ++i) CHECK(rep.contrast(i, i) == kContrastObserved);

  // A lower threshold turns the missed edge into a second true positive.
  const EvalReport low = score_completion(a_true, probs, mask, 0.15);
  CHECK(low.tp == 2);
  CHECK(low.fn == 0);
  CHECK(low.threshold == 0.15);
}

TEST_CASE("completion scoring: perfect and inverted probabilities") {
  const IntMatrix a_true = adjacency(5, {{0, 1}, {1, 2}, {3, 4}, {0, 4}});
  const BoolMatrix mask = BoolMatrix::Constant(5, 5, true);
  const Matrix exact = a_true.cast<double>();
  const EvalReport perfect = score_completion(a_true, exact, mask);
  CHECK(perfect.auc == 1.0);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.n_scored == 10);
  CHECK(perfect.tp == 4);
  CHECK(perfect.tn == 6);

  const Matrix flipped = Matrix::Constant(5, 5, 1.0) - exact;
  const EvalReport inverted = score_completion(a_true, flipped, mask);
  CHECK(inverted.auc == 0.0);
  CHECK(inverted.accuracy == 0.0);
}

TEST_CASE("completion scoring: input validation") {
  const IntMatrix a_true = adjacency(3, {{0, 1}});
  const Matrix probs = Matrix::Zero(3, 3);
  CHECK_THROWS_AS(score_completion(a_true, probs, BoolMatrix::Constant(3, 3, false)),
                  ParameterError);
  CHECK_THROWS_AS(score_completion(a_true, Matrix::Zero(4, 4), BoolMatrix::Constant(3, 3, true)),
                  ShapeError);
  CHECK_THROWS_AS(score_completion(a_true, probs, BoolMatrix::Constant(2, 2, true)), ShapeError);
}

TEST_CASE("completion scoring: report serialization round trip") {
  const IntMatrix a_true = adjacency(3, {{0, 2}});
  const EvalReport rep =
      score_completion(a_true, a_true.cast<double>(), BoolMatrix::Constant(3, 3, true));
  const std::string json = rep.to_json();
  for (const char* key : {"\"auc\"", "\"accuracy\"", "\"tpr\"", "\"fpr\"", "\"tp\"", "\"tn\"",
                          "\"fp\"", "\"fn\"", "\"n_scored\"", "\"threshold\""})
    CHECK(json.find(key) != std::string::npos);

  const std::string path = tmp_path("ginet_contrast_test.csv");
  save_contrast_csv(path, rep.contrast);
  const std::string text = slurp(path);
  CHECK(text == "OBS,TN,TP\nTN,OBS,TN\nTP,TN,OBS\n");
  std::filesystem::remove(path);
}

// ---- State scoring ---------------------------------------------------------------

TEST_CASE("state scoring: opinion accuracy counts argmax agreement") {
  Matrix pred(3, 2), truth(3, 2);
  pred << 0.7, 0.3, 0.2, 0.8, 0.6, 0.4;
  truth << 1, 0, 0, 1, 0, 1;  // first two match, third does not
  CHECK(score_states(pred, truth, Dynamics::voter) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("state scoring: continuous error clamps predictions to the unit interval") {
  Matrix pred(2, 1), truth(2, 1);
  pred << 1.2, 0.5;
  truth << 1.0, 0.25;
  // 1.2 clamps to 1.0: MSE = (0 + 0.0625) / 2.
  CHECK(score_states(pred, truth, Dynamics::cmn) == doctest::Approx(0.03125).epsilon(1e-15));
  pred << -0.4, 0.25;
  truth << 0.0, 0.25;
  CHECK(score_states(pred, truth, Dynamics::cmn) == 0.0);
}

TEST_CASE("state scoring: shape validation") {
  CHECK_THROWS_AS(score_states(Matrix::Zero(2, 1), Matrix::Zero(3, 1), Dynamics::cmn),
                  ShapeError);
  CHECK_THROWS_AS(score_states(Matrix::Zero(0, 1), Matrix::Zero(0, 1), Dynamics::cmn),
                  ParameterError);
}

// ---- Mutual information -------------------------------------------------------------

TEST_CASE("mi: identical balanced binary series carry exactly ln 2") {
  const auto trajs = opinion_series({{0, 1, 0, 1}, {0, 1, 0, 1}});
  const Matrix mi = mi_scores(trajs, Dynamics::voter);
  CHECK(mi(0, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(mi(1, 0) == mi(0, 1));
  CHECK(mi(0, 0) == 0.0);
}

TEST_CASE("mi: anti-correlated series are as informative as copies") {
  const auto trajs = opinion_series({{0, 1, 0, 1}, {1, 0, 1, 0}});
  CHECK(mi_scores(trajs, Dynamics::voter)(0, 1) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("mi: a uniform joint distribution carries zero information") {
  const auto trajs = opinion_series({{0, 1, 0, 1}, {0, 0, 1, 1}});
  CHECK(mi_scores(trajs, Dynamics::voter)(0, 1) == 0.0);
}

TEST_CASE("mi: constant series share no information with anything") {
  const auto trajs = scalar_series({{0.3, 0.3, 0.3, 0.3}, {0.1, 0.9, 0.2, 0.8}});
  const Matrix mi = mi_scores(trajs, Dynamics::cmn);
  CHECK(mi(0, 1) == 0.0);
}

TEST_CASE("mi: continuous states are binned into 16 equal-width cells") {
  // 0.01 and 0.51 land in different bins, so an identical pair carries ln 2;
  // values below 0 and above 1 clamp into the boundary bins first.
  const auto trajs = scalar_series({{0.01, 0.51, 0.01, 0.51}, {0.01, 0.51, 0.01, 0.51}});
  CHECK(mi_scores(trajs, Dynamics::cmn)(0, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  const auto clamped = scalar_series({{-0.2, 1.7, -0.2, 1.7}, {0.0, 1.0, 0.0, 1.0}});
  CHECK(mi_scores(clamped, Dynamics::cmn)(0, 1) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // Both values inside one bin are indistinguishable.
  const auto merged = scalar_series({{0.50, 0.52, 0.50, 0.52}, {0.1, 0.9, 0.1, 0.9}});
  CHECK(mi_scores(merged, Dynamics::cmn)(0, 1) == 0.0);
}

TEST_CASE("mi: a copied node dominates every other pair") {
  Rng rng(55);
  std::vector<double> src(500), indep(500);
  for (auto& v : src) v = rng.uniform();
  for (auto& v : indep) v = rng.uniform();
  const auto trajs = scalar_series({src, src, indep});
  const Matrix mi = mi_scores(trajs, Dynamics::cmn);
  CHECK(mi(0, 1) > mi(0, 2));
  CHECK(mi(0, 1) > mi(1, 2));
  // Symmetric, non-negative, zero diagonal.
  CHECK((mi - mi.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(mi.minCoeff() >= 0.0);
  for (int i = 0; i < 3; ++i) CHECK(mi(i, i) == 0.0);
}

TEST_CASE("mi: input validation") {
  CHECK_THROWS_AS(mi_scores({}, Dynamics::cmn), ParameterError);
  const auto trajs = scalar_series({{0.1, 0.2}, {0.3, 0.4}});
  CHECK_THROWS_AS(mi_scores(trajs, Dynamics::cmn, 1), ParameterError);
  // Continuous states must be scalar per node.
  Trajectory bad;
  bad.push_back(Matrix::Zero(2, 2));
  CHECK_THROWS_AS(mi_scores({bad}, Dynamics::cmn), ShapeError);
}

// ---- Partial correlation --------------------------------------------------------------

TEST_CASE("pcorr: conditioning removes the indirect link of a chain") {
  // x0 -> x1 -> x2: the precision matrix of a chain has a (0,2) entry of 0,
  // so the scored magnitude for the unlinked pair stays near zero while both
  // direct pairs stay large. 4000 samples keep the noise below ~0.05.
  Rng rng(99);
  const int m = 4000;
  std::vector<double> a(m), b(m), c(m);
  for (int s = 0; s < m; ++s) {
    a[static_cast<std::size_t>(s)] = rng.normal();
    b[static_cast<std::size_t>(s)] = a[static_cast<std::size_t>(s)] + 0.8 * rng.normal();
    c[static_cast<std::size_t>(s)] = b[static_cast<std::size_t>(s)] + 0.8 * rng.normal();
  }
  const Matrix p = pcorr_scores(scalar_series({a, b, c}));
  CHECK(p(0, 1) > 0.5);
  CHECK(p(1, 2) > 0.5);
  CHECK(p(0, 2) < 0.1);
  CHECK((p - p.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 3; ++i) CHECK(p(i, i) == 0.0);
  CHECK(p.minCoeff() >= 0.0);
}

TEST_CASE("pcorr: degenerate inputs are rejected") {
  CHECK_THROWS_AS(pcorr_scores({}), ParameterError);
  // Opinion states are one-hot (two columns), not scalar series.
  const auto opinions = opinion_series({{0, 1}, {1, 0}});
  CHECK_THROWS_AS(pcorr_scores(opinions), ParameterError);
  // One sample is not enough for a covariance.
  CHECK_THROWS_AS(pcorr_scores(scalar_series({{0.5}, {0.2}})), ParameterError);
  // Constant nodes have no correlation structure.
  CHECK_THROWS_AS(pcorr_scores(scalar_series({{0.5, 0.5, 0.5}, {0.1, 0.9, 0.4}})),
                  NumericError);
}

// ---- Structural comparison --------------------------------------------------------------

TEST_CASE("structure comparison: triangle versus path") {
  Graph triangle(3);
  triangle.add_edge(0, 1);
  triangle.add_edge(1, 2);
  triangle.add_edge(0, 2);
  Graph path(3);
  path.add_edge(0, 1);
  path.add_edge(1, 2);

  const StructureComparison cmp = compare_structure(triangle, path);
  CHECK(cmp.reference.average_degree == doctest::Approx(2.0));
  CHECK(cmp.candidate.average_degree == doctest::Approx(4.0 / 3.0));
  CHECK(cmp.d_average_degree == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(cmp.d_density == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(cmp.d_average_clustering == doctest::Approx(1.0).epsilon(1e-12));
  // Triangle: every pair at distance 1. Path: (0,1), (1,2) at 1 and (0,2) at 2.
  CHECK(cmp.d_average_path_length == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  const std::string path_csv = tmp_path("ginet_structure_test.csv");
  save_structure_csv(path_csv, cmp);
  const std::string text = slurp(path_csv);
  CHECK(text.find("metric,reference,candidate,abs_delta") == 0);
  CHECK(text.find("average_degree") != std::string::npos);
  CHECK(text.find("average_path_length") != std::string::npos);
  CHECK(text.find("density") != std::string::npos);
  CHECK(text.find("average_clustering") != std::string::npos);
  std::filesystem::remove(path_csv);
}

TEST_CASE("structure: adjacency and probability conversions") {
  const IntMatrix adj = adjacency(4, {{0, 1}, {2, 3}});
  const Graph g = graph_from_adjacency(adj);
  CHECK(g.n == 4);
  CHECK(g.num_edges() == 2);
  CHECK(g.has_edge(0, 1));
  CHECK(g.has_edge(2, 3));

  Matrix probs = Matrix::Zero(3, 3);
  probs(0, 1) = probs(1, 0) = 0.5;   // at the threshold: kept
  probs(1, 2) = probs(2, 1) = 0.49;  // below: dropped
  const Graph t = graph_from_probabilities(probs, 0.5);
  CHECK(t.has_edge(0, 1));
  CHECK(!t.has_edge(1, 2));

  IntMatrix asym = IntMatrix::Zero(3, 3);
  asym(0, 1) = 1;
  CHECK_THROWS_AS(graph_from_adjacency(asym), ParameterError);
  IntMatrix selfloop = adjacency(3, {{0, 1}});
  selfloop(2, 2) = 1;
  CHECK_THROWS_AS(graph_from_adjacency(selfloop), ParameterError);
}
