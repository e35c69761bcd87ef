#pragma once

#include "osasi/fdaf.hpp"
#include "osasi/lpud.hpp"
#include "osasi/metrics.hpp"
#include "osasi/rir.hpp"
#include "osasi/signal.hpp"
#include "osasi/subspace.hpp"
#include "osasi/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace osasi {

enum class Algorithm { kBaseline, kGpud, kLpud };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

struct DatasetParams {
  int count = 500;          // G training samples
  int filter_length = 512;  // adaptive filter length L
  std::uint64_t seed = 1;
  std::string dir;  // when set, load instead of simulating
};

struct ModelParams {
  int clusters = 8;      // I
  int local_dim = 20;    // D_i, identical per cluster
  int eigenfilters = 5;  // K_i used for evidence
  double lambda = 0.99;  // evidence averaging factor
  int global_dim = 55;   // D_1 of the single global model
  std::uint64_t seed = 2;
  std::string dir;  // when set, load learned models instead of fitting
  bool diagonal_evidence = false;
  std::optional<double> noise_variance;  // override of the true variance
};

/// Full experiment description; serialized 1:1 as the JSON config document.
struct ExperimentConfig {
  RoomScenario scenario;
  DatasetParams dataset;
  ModelParams model;
  FdafParams filter;
  ExcitationSpec excitation{ExcitationKind::kWhiteNoise, 10.0, 0.9, 1.0, {}};
  std::vector<double> snr_db{-5.0};
  std::vector<Algorithm> algorithms{Algorithm::kBaseline, Algorithm::kGpud, Algorithm::kLpud};
  int n_trials = 10;
  std::string out_dir = "out";
  std::uint64_t seed = 0;

  void validate() const;
  static ExperimentConfig load(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

struct Observation {
  MultichannelSignal y;  // observed microphone signals
  MultichannelSignal d;  // noiseless source image
  double noise_variance = 0.0;
};

/// Observed signals for a trial: d = full-length true system applied to the
/// excitation, y = d plus white Gaussian noise scaled to the requested SNR
/// (pooled over channels). +inf SNR yields y = d exactly.
Observation simulate_observation(const FirStack& true_system, const MultichannelSignal& x,
                                 double snr_db, std::uint64_t seed);

struct AlgorithmTrace {
  std::vector<double> mismatch;  // linear block mismatch, post-update
  double erle_cp = 0.0;          // linear, convergence phase
  double erle_ss = 0.0;          // linear, steady state
  double error_power_cp = 0.0;   // mean squared (d - y_hat), excess error
  double error_power_ss = 0.0;
  double mismatch_cp = 0.0;
  double mismatch_ss = 0.0;
  // Selection diagnostics (projection algorithms only).
  std::vector<int> selected;
  std::vector<std::uint8_t> switched;
  Matrix evidences;  // blocks x models
};

struct TrialResult {
  int blocks = 0;
  double snr_db = 0.0;
  double noise_variance = 0.0;
  Eigen::Vector3d source;
  std::map<Algorithm, AlgorithmTrace> traces;
  double oracle_erle_cp = 0.0;  // truncated-truth filter, linear
  double oracle_erle_ss = 0.0;
  double oracle_error_power_cp = 0.0;  // the unmodelled-tail floor
  double oracle_error_power_ss = 0.0;
};

/// Immutable per-experiment assets shared across trials.
struct ExperimentPlan {
  ExperimentConfig config;
  std::optional<SubspaceUnion> lpud_union;
  std::optional<SubspaceUnion> gpud_union;
  std::optional<EigenfilterBank> lpud_bank;
  std::optional<EigenfilterBank> gpud_bank;
};

ExperimentPlan build_plan(const ExperimentConfig& config, int jobs = 0);

/// One Monte Carlo trial: a fresh test source position (disjoint seed
/// stream from training), full-length RIR simulation, shared excitation and
/// noise, every configured algorithm run block-by-block on identical data.
TrialResult run_trial(const ExperimentPlan& plan, double snr_db, std::uint64_t trial_index);

struct ExperimentSummary {
  struct Row {
    double snr_db = 0.0;
    std::string algorithm;
    std::string phase;  // "cp" or "ss"
    double erle_db = 0.0;
    double erle_db_sd = 0.0;
    double mismatch_db = 0.0;
    double mismatch_db_sd = 0.0;
    int trials = 0;
  };
  struct Trace {
    double snr_db = 0.0;
    Algorithm algorithm = Algorithm::kBaseline;
    std::vector<double> mean_mismatch;  // linear, per block
  };
  std::vector<Row> rows;
  std::vector<Trace> traces;
  std::vector<TrialResult> trials;  // ordered by (snr index, trial index)
};

/// Run the full Monte Carlo sweep and write per-trial CSVs, the aggregate
/// mismatch trace, the summary table and a plot script into out_dir.
ExperimentSummary run_experiment(const ExperimentConfig& config, int jobs = 0);

void write_trial_csv(const std::string& path, const ExperimentConfig& config,
                     const TrialResult& result);

/// File name fragment for an SNR value ("-5" -> "m5", "2.5" -> "2p5").
std::string snr_label(double snr_db);

}  // namespace osasi
