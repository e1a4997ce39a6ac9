#include "ginet/dynsim.hpp"

#include "ginet/rng.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ginet {

std::string dynamics_name(Dynamics d) { return d == Dynamics::voter ? "voter" : "cmn"; }

Dynamics dynamics_from_name(const std::string& name) {
  if (name == "voter") return Dynamics::voter;
  if (name == "cmn") return Dynamics::cmn;
  throw ParameterError("unknown dynamics '" + name + "' (expected voter|cmn)");
}

namespace {

void check_one_hot(const Matrix& x) {
  if (x.cols() != 2) throw ShapeError("voter state must have 2 columns, got " + shape_str(x));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const bool a = x(i, 0) == 1.0 && x(i, 1) == 0.0;
    const bool b = x(i, 0) == 0.0 && x(i, 1) == 1.0;
    if (!a && !b)
      throw StateError("voter state row " + std::to_string(i) + " is not one-hot");
  }
}

void check_unit_interval(const Matrix& x) {
  if (x.cols() != 1) throw ShapeError("cmn state must have 1 column, got " + shape_str(x));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    if (!(x(i, 0) >= 0.0 && x(i, 0) <= 1.0))
      throw StateError("cmn state row " + std::to_string(i) + " outside [0,1]: " +
                       std::to_string(x(i, 0)));
}

void check_params(const CmnParams& p) {
  if (p.eps < 0.0 || p.eps > 1.0) throw ParameterError("cmn: coupling eps must be in [0,1]");
  if (p.r <= 0.0 || p.r > 4.0) throw ParameterError("cmn: logistic parameter r must be in (0,4]");
}

}  // namespace

Matrix voter_step(const Graph& g, const Matrix& x, Rng& rng) {
  if (x.rows() != g.n) throw ShapeError("voter_step: state rows != graph nodes");
  check_one_hot(x);
  Matrix next(g.n, 2);
  for (int i = 0; i < g.n; ++i) {
    const int deg = g.degree(i);
    if (deg == 0) {
      next.row(i) = x.row(i);
      continue;
    }
    double ones = 0.0;
    for (int j = 0; j < g.n; ++j)
      if (g.adj(i, j) != 0) ones += x(j, 1);
    const bool adopt_one = rng.bernoulli(ones / deg);
    next(i, 0) = adopt_one ? 0.0 : 1.0;
    next(i, 1) = adopt_one ? 1.0 : 0.0;
  }
  return next;
}

Matrix voter_step(const Graph& g, const Matrix& x, std::uint64_t seed) {
  Rng rng(seed);
  return voter_step(g, x, rng);
}

Matrix cmn_step(const Graph& g, const Matrix& x, const CmnParams& params) {
  if (x.rows() != g.n) throw ShapeError("cmn_step: state rows != graph nodes");
  check_unit_interval(x);
  check_params(params);
  const auto f = [&](double v) { return params.r * v * (1.0 - v); };
  Matrix next(g.n, 1);
  for (int i = 0; i < g.n; ++i) {
    const int deg = g.degree(i);
    if (deg == 0) {
      next(i, 0) = f(x(i, 0));  // bare map: the coupling term needs neighbours
      continue;
    }
    double coupled = 0.0;
    for (int j = 0; j < g.n; ++j)
      if (g.adj(i, j) != 0) coupled += f(x(j, 0));
    next(i, 0) = (1.0 - params.eps) * f(x(i, 0)) + params.eps / deg * coupled;
  }
  return next;
}

Matrix random_state(Dynamics d, int n, Rng& rng) {
  if (d == Dynamics::voter) {
    Matrix x = Matrix::Zero(n, 2);
    for (int i = 0; i < n; ++i) x(i, rng.bernoulli(0.5) ? 1 : 0) = 1.0;
    return x;
  }
  Matrix x(n, 1);
  for (int i = 0; i < n; ++i) x(i, 0) = rng.uniform();
  return x;
}

std::vector<Trajectory> simulate(const Graph& g, Dynamics dynamics, int s, int T,
                                 std::uint64_t seed, const CmnParams& params) {
  if (s < 1) throw ParameterError("simulate: s must be >= 1");
  if (T < 1) throw ParameterError("simulate: T must be >= 1");
  if (dynamics == Dynamics::cmn) check_params(params);
  Rng root(seed);
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(s));
  for (int traj = 0; traj < s; ++traj) {
    Rng rng = root.derive(static_cast<std::uint64_t>(traj));
    Trajectory states;
    states.reserve(static_cast<std::size_t>(T) + 1);
    states.push_back(random_state(dynamics, g.n, rng));
    for (int step = 0; step < T; ++step) {
      if (dynamics == Dynamics::voter)
        states.push_back(voter_step(g, states.back(), rng));
      else
        states.push_back(cmn_step(g, states.back(), params));
    }
    out.push_back(std::move(states));
  }
  return out;
}

TrajectoryDataset windowize(const std::vector<Trajectory>& trajectories, Dynamics dynamics,
                            int t, WindowMode mode) {
  if (trajectories.empty()) throw ParameterError("windowize: no trajectories");
  if (t < 2) throw ParameterError("windowize: window length must be >= 2");
  TrajectoryDataset ds;
  ds.dynamics = dynamics;
  ds.t = t;
  ds.n = static_cast<int>(trajectories.front().front().rows());
  ds.d = static_cast<int>(trajectories.front().front().cols());
  for (const auto& traj : trajectories) {
    const int len = static_cast<int>(traj.size());
    const int T = len - 1;  // steps; trajectories carry T+1 states
    if (t > len)
      throw ParameterError("windowize: window length " + std::to_string(t) +
                           " exceeds trajectory length " + std::to_string(len));
    if (mode == WindowMode::sliding) {
      for (int off = 0; off + t - 1 <= T - 1; ++off) {
        std::vector<Matrix> w(traj.begin() + off, traj.begin() + off + t);
        ds.windows.push_back(std::move(w));
      }
    } else {
      for (int off = 0; off + t <= T; off += t) {
        std::vector<Matrix> w(traj.begin() + off, traj.begin() + off + t);
        ds.windows.push_back(std::move(w));
      }
    }
  }
  return ds;
}

DatasetSplit split_windows(int n_windows, int ratio_train, int ratio_test, int ratio_val,
                           std::uint64_t seed) {
  if (n_windows < 1) throw ParameterError("split_windows: no windows");
  if (ratio_train < 1 || ratio_test < 0 || ratio_val < 0)
    throw ParameterError("split_windows: ratios must be positive (train) / non-negative");
  const int total = ratio_train + ratio_test + ratio_val;
  std::vector<int> idx(static_cast<std::size_t>(n_windows));
  for (int i = 0; i < n_windows; ++i) idx[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(idx);
  const int n_test = static_cast<int>(static_cast<long>(n_windows) * ratio_test / total);
  const int n_val = static_cast<int>(static_cast<long>(n_windows) * ratio_val / total);
  const int n_train = n_windows - n_test - n_val;
  DatasetSplit split;
  split.train.assign(idx.begin(), idx.begin() + n_train);
  split.test.assign(idx.begin() + n_train, idx.begin() + n_train + n_test);
  split.val.assign(idx.begin() + n_train + n_test, idx.end());
  return split;
}

TrajectoryDataset select_nodes(const TrajectoryDataset& ds, const std::vector<int>& nodes) {
  for (int id : nodes)
    if (id < 0 || id >= ds.n) throw ParameterError("select_nodes: node id out of range");
  TrajectoryDataset out;
  out.dynamics = ds.dynamics;
  out.n = static_cast<int>(nodes.size());
  out.d = ds.d;
  out.t = ds.t;
  out.windows.reserve(ds.windows.size());
  for (const auto& w : ds.windows) {
    std::vector<Matrix> sel;
    sel.reserve(w.size());
    for (const auto& state : w) {
      Matrix m(out.n, ds.d);
      for (std::size_t r = 0; r < nodes.size(); ++r)
        m.row(static_cast<Eigen::Index>(r)) = state.row(nodes[r]);
      sel.push_back(std::move(m));
    }
    out.windows.push_back(std::move(sel));
  }
  return out;
}

TrajectoryDataset relabel_observed_first(const TrajectoryDataset& ds, const NodePartition& p) {
  p.validate(ds.n);
  return select_nodes(ds, p.reorder());
}

TrajectoryDataset mask_hidden(const TrajectoryDataset& ds, const NodePartition& p) {
  p.validate(ds.n);
  return select_nodes(ds, p.observed);
}

void save_trajectories(const std::vector<Trajectory>& trajectories, const std::string& path) {
  if (trajectories.empty()) throw ParameterError("save_trajectories: nothing to save");
  const int n = static_cast<int>(trajectories.front().front().rows());
  const int d = static_cast<int>(trajectories.front().front().cols());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write trajectories: " + path);
  out << "trajectory,step";
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) out << ",x" << i << "_" << k;
  out << "\n";
  char buf[40];
  for (std::size_t traj = 0; traj < trajectories.size(); ++traj) {
    for (std::size_t step = 0; step < trajectories[traj].size(); ++step) {
      const Matrix& m = trajectories[traj][step];
      if (m.rows() != n || m.cols() != d)
        throw ShapeError("save_trajectories: inconsistent state shapes");
      out << traj << "," << step;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) {
          // Hex float keeps the round trip bit-exact.
          std::snprintf(buf, sizeof buf, "%a", m(i, k));
          out << "," << buf;
        }
      out << "\n";
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<Trajectory> load_trajectories(const std::string& path, int n, int d) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectories: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty trajectory file: " + path);
  std::vector<Trajectory> out;
  int line_no = 1;
  long expect_traj = 0, expect_step = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    auto next_field = [&]() {
      if (!std::getline(ss, field, ','))
        throw ParseError(path + ":" + std::to_string(line_no) + ": truncated row");
      return field;
    };
    const long traj = std::stol(next_field());
    const long step = std::stol(next_field());
    if (traj == expect_traj + 1 && step == 0) {
      ++expect_traj;
      expect_step = 0;
    }
    if (traj != expect_traj || step != expect_step)
      throw ParseError(path + ":" + std::to_string(line_no) + ": rows out of order");
    Matrix m(n, d);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < d; ++k) m(i, k) = std::strtod(next_field().c_str(), nullptr);
    if (ss.rdbuf()->in_avail() > 0)
      throw ParseError(path + ":" + std::to_string(line_no) + ": too many fields");
    if (static_cast<long>(out.size()) == traj) out.emplace_back();
    out.back().push_back(std::move(m));
    ++expect_step;
  }
  if (out.empty()) throw ParseError("trajectory file has no rows: " + path);
  const std::size_t len = out.front().size();
  for (const auto& traj : out)
    if (traj.size() != len) throw ParseError(path + ": trajectories have unequal lengths");
  return out;
}

}  // namespace ginet
