#include "ginet/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace ginet {

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw ShapeError("scores and labels differ in length");
  const std::size_t m = scores.size();
  long n_pos = 0, n_neg = 0;
  for (int l : labels) {
    if (l == 1)
      ++n_pos;
    else if (l == 0)
      ++n_neg;
    else
      throw ParameterError("labels must be 0 or 1");
  }
  if (n_pos == 0 || n_neg == 0)
    throw NumericError("AUC is undefined when only one class is present");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    while (j + 1 < m && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1);  // ranks are 1-based
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
    i = j + 1;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

EvalReport score_completion(const IntMatrix& a_true, const Matrix& probs,
                            const BoolMatrix& mask, double threshold) {
  const int n = static_cast<int>(a_true.rows());
  if (a_true.cols() != n) throw ShapeError("true adjacency must be square");
  if (probs.rows() != n || probs.cols() != n || mask.rows() != n || mask.cols() != n)
    throw ShapeError("adjacency, probabilities and mask sizes differ");
  EvalReport rep;
  rep.threshold = threshold;
  rep.contrast = IntMatrix::Constant(n, n, kContrastObserved);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!mask(i, j)) continue;
      const int truth = a_true(i, j) != 0 ? 1 : 0;
      const int pred = probs(i, j) >= threshold ? 1 : 0;
      scores.push_back(probs(i, j));
      labels.push_back(truth);
      int code;
      if (truth == 1)
        code = pred == 1 ? kContrastTP : kContrastFN;
      else
        code = pred == 1 ? kContrastFP : kContrastTN;
      rep.contrast(i, j) = rep.contrast(j, i) = code;
      rep.tp += (code == kContrastTP);
      rep.tn += (code == kContrastTN);
      rep.fp += (code == kContrastFP);
      rep.fn += (code == kContrastFN);
    }
  }
  rep.n_scored = static_cast<int>(scores.size());
  if (rep.n_scored == 0) throw ParameterError("mask selects no entries to score");
  rep.auc = auc(scores, labels);
  rep.accuracy = static_cast<double>(rep.tp + rep.tn) / rep.n_scored;
  rep.tpr = rep.tp + rep.fn > 0 ? static_cast<double>(rep.tp) / (rep.tp + rep.fn) : 0.0;
  rep.fpr = rep.fp + rep.tn > 0 ? static_cast<double>(rep.fp) / (rep.fp + rep.tn) : 0.0;
  return rep;
}

namespace {

const char* contrast_name(int code) {
  switch (code) {
    case kContrastTP: return "TP";
    case kContrastTN: return "TN";
    case kContrastFP: return "FP";
    case kContrastFN: return "FN";
    default: return "OBS";
  }
}

}  // namespace

void save_contrast_csv(const std::string& path, const IntMatrix& contrast) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (int i = 0; i < contrast.rows(); ++i) {
    for (int j = 0; j < contrast.cols(); ++j) {
      if (j > 0) out << ',';
      out << contrast_name(contrast(i, j));
    }
    out << '\n';
  }
  if (!out.good()) throw IoError("failed writing " + path);
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["auc"] = auc;
  j["accuracy"] = accuracy;
  j["tpr"] = tpr;
  j["fpr"] = fpr;
  j["tp"] = tp;
  j["tn"] = tn;
  j["fp"] = fp;
  j["fn"] = fn;
  j["n_scored"] = n_scored;
  j["threshold"] = threshold;
  return j.dump(2);
}

void save_eval_report(const std::string& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << report.to_json() << '\n';
  if (!out.good()) throw IoError("failed writing " + path);
}

double score_states(const Matrix& predicted, const Matrix& truth, Dynamics dynamics) {
  if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols())
    throw ShapeError("state shapes differ: " + shape_str(predicted) + " vs " +
                     shape_str(truth));
  if (predicted.rows() == 0) throw ParameterError("no states to score");
  if (dynamics == Dynamics::voter) {
    long hits = 0;
    for (int i = 0; i < predicted.rows(); ++i) {
      int pa = 0, ta = 0;
      predicted.row(i).maxCoeff(&pa);
      truth.row(i).maxCoeff(&ta);
      hits += (pa == ta);
    }
    return static_cast<double>(hits) / predicted.rows();
  }
  const Matrix clamped = predicted.array().min(1.0).max(0.0);
  return (clamped - truth).squaredNorm() / (truth.rows() * truth.cols());
}

namespace {

// Discrete symbol series per node, plus the alphabet size.
std::pair<std::vector<std::vector<int>>, int> discretize(
    const std::vector<Trajectory>& trajectories, Dynamics dynamics, int bins) {
  if (trajectories.empty() || trajectories.front().empty())
    throw ParameterError("no trajectory data");
  const int n = static_cast<int>(trajectories.front().front().rows());
  std::vector<std::vector<int>> series(n);
  int alphabet;
  if (dynamics == Dynamics::voter) {
    alphabet = 2;
    for (const auto& traj : trajectories) {
      for (const auto& x : traj) {
        if (x.rows() != n) throw ShapeError("inconsistent node count across states");
        for (int i = 0; i < n; ++i) {
          int a = 0;
          x.row(i).maxCoeff(&a);
          series[i].push_back(a);
        }
      }
    }
  } else {
    if (bins < 2) throw ParameterError("need at least two bins");
    alphabet = bins;
    for (const auto& traj : trajectories) {
      for (const auto& x : traj) {
        if (x.rows() != n || x.cols() != 1)
          throw ShapeError("continuous states must be one value per node");
        for (int i = 0; i < n; ++i) {
          const double v = std::clamp(x(i, 0), 0.0, 1.0);
          series[i].push_back(std::min(bins - 1, static_cast<int>(v * bins)));
        }
      }
    }
  }
  return {std::move(series), alphabet};
}

}  // namespace

Matrix mi_scores(const std::vector<Trajectory>& trajectories, Dynamics dynamics, int bins) {
  auto [series, alphabet] = discretize(trajectories, dynamics, bins);
  const int n = static_cast<int>(series.size());
  const std::size_t m = series.front().size();
  const double dm = static_cast<double>(m);
  std::vector<std::vector<double>> marginals(n, std::vector<double>(alphabet, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int s : series[i]) marginals[i][s] += 1.0;
    for (double& c : marginals[i]) c /= dm;
  }
  Matrix mi = Matrix::Zero(n, n);
  std::vector<double> joint(static_cast<std::size_t>(alphabet) * alphabet);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      std::fill(joint.begin(), joint.end(), 0.0);
      for (std::size_t s = 0; s < m; ++s)
        joint[static_cast<std::size_t>(series[i][s]) * alphabet + series[j][s]] += 1.0;
      double value = 0.0;
      for (int a = 0; a < alphabet; ++a) {
        for (int b = 0; b < alphabet; ++b) {
          const double pab = joint[static_cast<std::size_t>(a) * alphabet + b] / dm;
          if (pab <= 0.0) continue;
          value += pab * std::log(pab / (marginals[i][a] * marginals[j][b]));
        }
      }
      mi(i, j) = mi(j, i) = std::max(0.0, value);
    }
  }
  return mi;
}

Matrix pcorr_scores(const std::vector<Trajectory>& trajectories, double ridge) {
  if (trajectories.empty() || trajectories.front().empty())
    throw ParameterError("no trajectory data");
  const int n = static_cast<int>(trajectories.front().front().rows());
  if (trajectories.front().front().cols() != 1)
    throw ParameterError("partial correlation needs scalar node states");
  long m = 0;
  for (const auto& traj : trajectories) m += static_cast<long>(traj.size());
  if (m < 2) throw ParameterError("need at least two samples");
  Matrix X(m, n);
  long row = 0;
  for (const auto& traj : trajectories) {
    for (const auto& x : traj) {
      if (x.rows() != n || x.cols() != 1)
        throw ShapeError("inconsistent state shape across trajectories");
      X.row(row++) = x.col(0).transpose();
    }
  }
  const Matrix centered = X.rowwise() - X.colwise().mean();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(m - 1);
  for (int i = 0; i < n; ++i)
    if (cov(i, i) <= 1e-30)
      throw NumericError("node " + std::to_string(i) + " has zero variance");
  const Matrix precision =
      (cov + ridge * Matrix::Identity(n, n)).ldlt().solve(Matrix::Identity(n, n));
  Matrix scores = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      scores(i, j) = scores(j, i) =
          std::abs(precision(i, j)) / std::sqrt(precision(i, i) * precision(j, j));
  return scores;
}

StructureComparison compare_structure(const Graph& reference, const Graph& candidate) {
  StructureComparison cmp;
  cmp.reference = structural_stats(reference);
  cmp.candidate = structural_stats(candidate);
  cmp.d_average_degree = std::abs(cmp.reference.average_degree - cmp.candidate.average_degree);
  cmp.d_average_path_length =
      std::abs(cmp.reference.average_path_length - cmp.candidate.average_path_length);
  cmp.d_density = std::abs(cmp.reference.density - cmp.candidate.density);
  cmp.d_average_clustering =
      std::abs(cmp.reference.average_clustering - cmp.candidate.average_clustering);
  return cmp;
}

void save_structure_csv(const std::string& path, const StructureComparison& cmp) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.precision(12);
  out << "metric,reference,candidate,abs_delta\n";
  out << "average_degree," << cmp.reference.average_degree << ','
      << cmp.candidate.average_degree << ',' << cmp.d_average_degree << '\n';
  out << "average_path_length," << cmp.reference.average_path_length << ','
      << cmp.candidate.average_path_length << ',' << cmp.d_average_path_length << '\n';
  out << "density," << cmp.reference.density << ',' << cmp.candidate.density << ','
      << cmp.d_density << '\n';
  out << "average_clustering," << cmp.reference.average_clustering << ','
      << cmp.candidate.average_clustering << ',' << cmp.d_average_clustering << '\n';
  if (!out.good()) throw IoError("failed writing " + path);
}

Graph graph_from_adjacency(const IntMatrix& adj) {
  const int n = static_cast<int>(adj.rows());
  if (adj.cols() != n) throw ShapeError("adjacency must be square");
  Graph g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int v = adj(i, j);
      if (v != 0 && v != 1) throw ParameterError("adjacency entries must be 0/1");
      if (v != adj(j, i)) throw ParameterError("adjacency must be symmetric");
      if (i == j && v != 0) throw ParameterError("self-loops are not allowed");
      if (i < j && v == 1) g.add_edge(i, j);
    }
  }
  return g;
}

Graph graph_from_probabilities(const Matrix& probs, double threshold) {
  const int n = static_cast<int>(probs.rows());
  if (probs.cols() != n) throw ShapeError("adjacency must be square");
  IntMatrix adj = IntMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) adj(i, j) = probs(i, j) >= threshold ? 1 : 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (adj(i, j) != adj(j, i)) adj(i, j) = adj(j, i) = 1;
  return graph_from_adjacency(adj);
}

}  // namespace ginet
