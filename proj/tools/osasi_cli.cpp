#include "osasi/experiment.hpp"
#include "osasi/io.hpp"
#include "osasi/rir.hpp"
#include "osasi/subspace.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string dataset_dir;
  std::string model_dir;
  int jobs = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("config", args.config_path, "experiment config JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "override the master seed");
  cmd->add_option("--out-dir", args.out_dir, "override the output directory");
  cmd->add_option("--dataset-dir", args.dataset_dir, "load the training dataset from this directory");
  cmd->add_option("--model-dir", args.model_dir, "load learned models from this directory");
  cmd->add_option("--jobs", args.jobs, "worker threads (0 = all cores)");
}

osasi::ExperimentConfig load_config(const CommonArgs& args) {
  osasi::ExperimentConfig config = osasi::ExperimentConfig::load(args.config_path);
  if (args.seed) config.seed = *args.seed;
  if (!args.out_dir.empty()) config.out_dir = args.out_dir;
  if (!args.dataset_dir.empty()) config.dataset.dir = args.dataset_dir;
  if (!args.model_dir.empty()) config.model.dir = args.model_dir;
  config.validate();
  return config;
}

bool wants(const osasi::ExperimentConfig& config, osasi::Algorithm a) {
  for (osasi::Algorithm x : config.algorithms)
    if (x == a) return true;
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-online acoustic system identification with subspace-projected updates"};
  app.require_subcommand(1);

  CommonArgs sim_args, learn_args, run_args, exp_args;
  CLI::App* sim = app.add_subcommand("simulate-rirs", "simulate the training RIR dataset");
  add_common(sim, sim_args);
  CLI::App* learn = app.add_subcommand("learn", "learn the affine subspace models");
  add_common(learn, learn_args);
  CLI::App* run = app.add_subcommand("run", "run a single trial");
  add_common(run, run_args);
  CLI::App* exp = app.add_subcommand("experiment", "run the full Monte Carlo sweep");
  add_common(exp, exp_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      const osasi::ExperimentConfig config = load_config(sim_args);
      const osasi::RirDataset ds =
          osasi::generate_dataset(config.scenario, config.dataset.count,
                                  config.dataset.filter_length, config.dataset.seed, sim_args.jobs);
      const std::string dir = config.out_dir + "/dataset";
      osasi::save_dataset(ds, dir);
      std::cout << "wrote " << ds.count() << " samples to " << dir << "\n";
    } else if (learn->parsed()) {
      osasi::ExperimentConfig config = load_config(learn_args);
      const osasi::RirDataset ds =
          config.dataset.dir.empty()
              ? osasi::generate_dataset(config.scenario, config.dataset.count,
                                        config.dataset.filter_length, config.dataset.seed,
                                        learn_args.jobs)
              : osasi::load_dataset(config.dataset.dir);
      if (wants(config, osasi::Algorithm::kLpud)) {
        const osasi::SubspaceUnion u =
            osasi::learn_union(ds, config.model.clusters, config.model.local_dim, config.model.seed);
        osasi::save_union(u, config.out_dir + "/model/lpud");
        std::cout << "wrote " << u.model_count() << "-model union to " << config.out_dir
                  << "/model/lpud\n";
      }
      if (wants(config, osasi::Algorithm::kGpud)) {
        const osasi::SubspaceUnion u = osasi::learn_union(ds, 1, config.model.global_dim, config.model.seed);
        osasi::save_union(u, config.out_dir + "/model/gpud");
        std::cout << "wrote global model to " << config.out_dir << "/model/gpud\n";
      }
    } else if (run->parsed()) {
      const osasi::ExperimentConfig config = load_config(run_args);
      const osasi::ExperimentPlan plan = osasi::build_plan(config, run_args.jobs);
      const osasi::TrialResult result = osasi::run_trial(plan, config.snr_db.front(), 0);
      std::filesystem::create_directories(config.out_dir);
      const std::string path =
          config.out_dir + "/trial_" + osasi::snr_label(config.snr_db.front()) + "_0000.csv";
      osasi::write_trial_csv(path, config, result);
      std::cout << "wrote " << path << "\n";
    } else if (exp->parsed()) {
      const osasi::ExperimentConfig config = load_config(exp_args);
      const osasi::ExperimentSummary summary = osasi::run_experiment(config, exp_args.jobs);
      std::cout << "wrote " << summary.trials.size() << " trials to " << config.out_dir << "\n";
      for (const auto& row : summary.rows)
        if (row.phase == "ss")
          std::cout << "snr " << row.snr_db << " dB  " << row.algorithm
                    << "  steady-state mismatch " << row.mismatch_db << " dB, erle " << row.erle_db
                    << " dB\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
