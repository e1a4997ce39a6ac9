#include "ginet/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

namespace {

std::vector<double> parse_fractions(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string item =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ginet::ConfigError("--fractions: '" + item + "' is not a number");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"network structure inference from node time series"};
  app.require_subcommand(1);

  std::string config_path, out_dir, task_override;
  std::uint64_t seed = 0;
  bool no_match = false;
  std::string fractions = "0.1,0.2,0.3,0.4,0.5";
  std::string ref_path, cand_path;
  int n_obs = 0;

  auto* gen = app.add_subcommand("generate", "simulate a dataset from a config");
  auto* tra = app.add_subcommand("train", "train on previously generated artifacts");
  auto* eva = app.add_subcommand("evaluate", "align and score a trained model");
  auto* bas = app.add_subcommand("baseline", "model-free baseline scores");
  auto* mat = app.add_subcommand("match", "align two edge lists sharing seed nodes");
  auto* swp = app.add_subcommand("sweep", "repeat an experiment across hidden fractions");
  auto* all = app.add_subcommand("run-all", "generate, train, evaluate and baseline");

  for (CLI::App* sub : {gen, tra, eva, bas, swp, all}) {
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "artifact directory")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--task", task_override, "override the config task");
  }
  eva->add_flag("--no-match", no_match, "score without hidden-node alignment");
  all->add_flag("--no-match", no_match, "score without hidden-node alignment");
  swp->add_option("--fractions", fractions, "comma-separated hidden fractions");

  mat->add_option("ref", ref_path, "reference edge list (CSV)")->required();
  mat->add_option("cand", cand_path, "candidate edge list (CSV)")->required();
  mat->add_option("--n-obs", n_obs, "leading shared (seed) node count")->required();
  mat->add_option("--seed", seed, "matcher restart seed");
  mat->add_option("--out", out_dir, "artifact directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (mat->parsed()) {
      ginet::cmd_match_files(ref_path, cand_path, n_obs, seed, out_dir);
      return 0;
    }
    ginet::ExperimentConfig cfg = ginet::load_experiment_config(config_path);
    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--seed") > 0) cfg.seed = seed;
    if (!task_override.empty()) cfg.task = task_override;
    cfg.validate();
    if (gen->parsed())
      ginet::cmd_generate(cfg, out_dir);
    else if (tra->parsed())
      ginet::cmd_train(cfg, out_dir);
    else if (eva->parsed())
      ginet::cmd_evaluate(cfg, out_dir, no_match);
    else if (bas->parsed())
      ginet::cmd_baseline(cfg, out_dir);
    else if (swp->parsed())
      ginet::cmd_sweep(cfg, out_dir, parse_fractions(fractions));
    else if (all->parsed())
      ginet::cmd_run_all(cfg, out_dir, no_match);
    return 0;
  } catch (const ginet::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ginet::ParameterError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ginet::ShapeError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ginet::ContractError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ginet::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  } catch (const ginet::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return 3;
  } catch (const ginet::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 4;
  } catch (const ginet::StateError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
