#include "osasi/experiment.hpp"

#include "osasi/io.hpp"
#include "osasi/json_util.hpp"
#include "osasi/parallel.hpp"
#include "osasi/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

namespace osasi {

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kBaseline: return "baseline";
    case Algorithm::kGpud: return "gpud";
    case Algorithm::kLpud: return "lpud";
  }
  throw ConfigError("algorithm_name: unknown algorithm");
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "baseline") return Algorithm::kBaseline;
  if (name == "gpud") return Algorithm::kGpud;
  if (name == "lpud") return Algorithm::kLpud;
  throw ConfigError("unknown algorithm '" + name + "'");
}

void ExperimentConfig::validate() const {
  scenario.validate();
  filter.validate();
  if (dataset.count < 1) throw ConfigError("config: dataset.count must be positive");
  if (dataset.filter_length < 1 || dataset.filter_length > scenario.rir_length)
    throw ConfigError("config: dataset.filter_length must be in [1, rir_length]");
  if (model.clusters < 1) throw ConfigError("config: model.clusters must be positive");
  if (model.local_dim < 0 || model.global_dim < 0)
    throw ConfigError("config: subspace dimensions must be nonnegative");
  if (model.eigenfilters < 0) throw ConfigError("config: model.eigenfilters must be nonnegative");
  if (model.lambda < 0.0 || model.lambda > 1.0)
    throw ConfigError("config: model.lambda must be in [0, 1]");
  if (model.noise_variance && *model.noise_variance <= 0.0)
    throw ConfigError("config: model.noise_variance must be positive");
  if (excitation.duration_s * scenario.sample_rate < 2.0 * dataset.filter_length)
    throw ConfigError("config: excitation shorter than two blocks");
  if (snr_db.empty()) throw ConfigError("config: need at least one SNR point");
  if (algorithms.empty()) throw ConfigError("config: need at least one algorithm");
  std::set<Algorithm> unique(algorithms.begin(), algorithms.end());
  if (unique.size() != algorithms.size()) throw ConfigError("config: duplicate algorithm");
  if (n_trials < 1) throw ConfigError("config: n_trials must be positive");
}

namespace {

Json excitation_to_json(const ExcitationSpec& e) {
  Json j;
  switch (e.kind) {
    case ExcitationKind::kWhiteNoise: j["kind"] = "wgn"; break;
    case ExcitationKind::kAr1: j["kind"] = "ar1"; break;
    case ExcitationKind::kWavFile: j["kind"] = "wav"; break;
  }
  j["duration_s"] = e.duration_s;
  j["ar_pole"] = e.ar_pole;
  j["modulation_period_s"] = e.modulation_period_s;
  j["wav_path"] = e.wav_path;
  return j;
}

ExcitationSpec excitation_from_json(const Json& j) {
  require_keys(j, "excitation", {"kind", "duration_s", "ar_pole", "modulation_period_s", "wav_path"});
  ExcitationSpec e;
  if (j.contains("kind")) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "wgn")
      e.kind = ExcitationKind::kWhiteNoise;
    else if (kind == "ar1")
      e.kind = ExcitationKind::kAr1;
    else if (kind == "wav")
      e.kind = ExcitationKind::kWavFile;
    else
      throw ConfigError("excitation.kind: expected wgn, ar1 or wav");
  }
  if (j.contains("duration_s")) e.duration_s = j.at("duration_s").get<double>();
  if (j.contains("ar_pole")) e.ar_pole = j.at("ar_pole").get<double>();
  if (j.contains("modulation_period_s"))
    e.modulation_period_s = j.at("modulation_period_s").get<double>();
  if (j.contains("wav_path")) e.wav_path = j.at("wav_path").get<std::string>();
  return e;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  require_keys(j, "config",
               {"scenario", "dataset", "model", "filter", "excitation", "snr_db", "algorithms",
                "n_trials", "out_dir", "seed"});

  ExperimentConfig c;
  if (j.contains("scenario")) c.scenario = scenario_from_json(j.at("scenario"));

  if (j.contains("dataset")) {
    const Json& d = j.at("dataset");
    require_keys(d, "dataset", {"count", "filter_length", "seed", "dir"});
    if (d.contains("count")) c.dataset.count = d.at("count").get<int>();
    if (d.contains("filter_length")) c.dataset.filter_length = d.at("filter_length").get<int>();
    if (d.contains("seed")) c.dataset.seed = d.at("seed").get<std::uint64_t>();
    if (d.contains("dir")) c.dataset.dir = d.at("dir").get<std::string>();
  }

  if (j.contains("model")) {
    const Json& m = j.at("model");
    require_keys(m, "model",
                 {"clusters", "local_dim", "eigenfilters", "lambda", "global_dim", "seed", "dir",
                  "evidence", "noise_variance"});
    if (m.contains("clusters")) c.model.clusters = m.at("clusters").get<int>();
    if (m.contains("local_dim")) c.model.local_dim = m.at("local_dim").get<int>();
    if (m.contains("eigenfilters")) c.model.eigenfilters = m.at("eigenfilters").get<int>();
    if (m.contains("lambda")) c.model.lambda = m.at("lambda").get<double>();
    if (m.contains("global_dim")) c.model.global_dim = m.at("global_dim").get<int>();
    if (m.contains("seed")) c.model.seed = m.at("seed").get<std::uint64_t>();
    if (m.contains("dir")) c.model.dir = m.at("dir").get<std::string>();
    if (m.contains("evidence")) {
      const std::string form = m.at("evidence").get<std::string>();
      if (form == "full")
        c.model.diagonal_evidence = false;
      else if (form == "diagonal")
        c.model.diagonal_evidence = true;
      else
        throw ConfigError("model.evidence: expected full or diagonal");
    }
    if (m.contains("noise_variance") && !m.at("noise_variance").is_null())
      c.model.noise_variance = m.at("noise_variance").get<double>();
  }

  if (j.contains("filter")) {
    const Json& f = j.at("filter");
    require_keys(f, "filter", {"mu", "nu", "delta_max", "delta_0"});
    if (f.contains("mu")) c.filter.mu = f.at("mu").get<double>();
    if (f.contains("nu")) c.filter.nu = f.at("nu").get<double>();
    if (f.contains("delta_max")) c.filter.delta_max = f.at("delta_max").get<double>();
    if (f.contains("delta_0")) c.filter.delta_0 = f.at("delta_0").get<double>();
  }

  if (j.contains("excitation")) c.excitation = excitation_from_json(j.at("excitation"));

  if (j.contains("snr_db")) {
    c.snr_db.clear();
    if (j.at("snr_db").is_array())
      for (const auto& v : j.at("snr_db")) c.snr_db.push_back(v.get<double>());
    else
      c.snr_db.push_back(j.at("snr_db").get<double>());
  }

  if (j.contains("algorithms")) {
    c.algorithms.clear();
    for (const auto& a : j.at("algorithms"))
      c.algorithms.push_back(algorithm_from_name(a.get<std::string>()));
  }

  if (j.contains("n_trials")) c.n_trials = j.at("n_trials").get<int>();
  if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();

  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  return from_json_text(read_text_file(path));
}

std::string ExperimentConfig::to_json_text() const {
  Json j;
  j["scenario"] = scenario_to_json(scenario);
  j["dataset"] = Json{{"count", dataset.count},
                      {"filter_length", dataset.filter_length},
                      {"seed", dataset.seed},
                      {"dir", dataset.dir}};
  Json m{{"clusters", model.clusters},
         {"local_dim", model.local_dim},
         {"eigenfilters", model.eigenfilters},
         {"lambda", model.lambda},
         {"global_dim", model.global_dim},
         {"seed", model.seed},
         {"dir", model.dir},
         {"evidence", model.diagonal_evidence ? "diagonal" : "full"}};
  m["noise_variance"] = model.noise_variance ? Json(*model.noise_variance) : Json(nullptr);
  j["model"] = m;
  j["filter"] = Json{{"mu", filter.mu},
                     {"nu", filter.nu},
                     {"delta_max", filter.delta_max},
                     {"delta_0", filter.delta_0}};
  j["excitation"] = excitation_to_json(excitation);
  j["snr_db"] = snr_db;
  Json algs = Json::array();
  for (Algorithm a : algorithms) algs.push_back(algorithm_name(a));
  j["algorithms"] = algs;
  j["n_trials"] = n_trials;
  j["out_dir"] = out_dir;
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

Observation simulate_observation(const FirStack& true_system, const MultichannelSignal& x,
                                 double snr_db, std::uint64_t seed) {
  true_system.validate();
  if (x.frames() < true_system.dims.taps)
    throw ConfigError("simulate_observation: excitation shorter than the true system");

  Observation obs;
  obs.d = apply_fir_stack(true_system, x);
  const double mean_power = obs.d.samples.squaredNorm() /
                            static_cast<double>(obs.d.samples.rows() * obs.d.samples.cols());
  if (mean_power <= 0.0)
    throw ConfigError("simulate_observation: degenerate all-zero source image");

  if (std::isinf(snr_db) && snr_db > 0.0) {
    obs.y = obs.d;
    obs.noise_variance = 0.0;
    return obs;
  }

  obs.noise_variance = mean_power / std::pow(10.0, snr_db / 10.0);
  const double sigma = std::sqrt(obs.noise_variance);
  Matrix noisy = obs.d.samples;
  Rng rng(seed);
  for (Index n = 0; n < noisy.rows(); ++n)
    for (Index q = 0; q < noisy.cols(); ++q) noisy(n, q) += sigma * rng.normal();
  obs.y = MultichannelSignal(std::move(noisy), x.sample_rate);
  return obs;
}

namespace {

bool uses(const ExperimentConfig& c, Algorithm a) {
  return std::find(c.algorithms.begin(), c.algorithms.end(), a) != c.algorithms.end();
}

}  // namespace

ExperimentPlan build_plan(const ExperimentConfig& config, int jobs) {
  config.validate();
  ExperimentPlan plan;
  plan.config = config;

  const bool need_lpud = uses(config, Algorithm::kLpud);
  const bool need_gpud = uses(config, Algorithm::kGpud);
  if (!need_lpud && !need_gpud) return plan;

  if (!config.model.dir.empty()) {
    if (need_lpud) plan.lpud_union = load_union(config.model.dir + "/lpud");
    if (need_gpud) plan.gpud_union = load_union(config.model.dir + "/gpud");
  } else {
    RirDataset ds = config.dataset.dir.empty()
                        ? generate_dataset(config.scenario, config.dataset.count,
                                           config.dataset.filter_length, config.dataset.seed, jobs)
                        : load_dataset(config.dataset.dir);
    if (ds.dims.taps != config.dataset.filter_length ||
        ds.dims.outputs != config.scenario.mic_count())
      throw ConfigError("build_plan: dataset dimensions do not match the configured scenario");
    if (need_lpud)
      plan.lpud_union = learn_union(ds, config.model.clusters, config.model.local_dim,
                                    config.model.seed);
    if (need_gpud) plan.gpud_union = learn_union(ds, 1, config.model.global_dim, config.model.seed);
  }

  const FirDims expected{1, config.dataset.filter_length, config.scenario.mic_count()};
  const auto bank_of = [&](const SubspaceUnion& u) {
    std::vector<int> k_per_model;
    k_per_model.reserve(u.models.size());
    for (const auto& m : u.models) k_per_model.push_back(std::min(config.model.eigenfilters, m.dim()));
    return build_eigenfilter_bank(u, k_per_model);
  };
  if (need_lpud) {
    if (!(plan.lpud_union->dims == expected))
      throw ConfigError("build_plan: loaded model dims do not match the scenario");
    plan.lpud_bank = bank_of(*plan.lpud_union);
  }
  if (need_gpud) {
    if (!(plan.gpud_union->dims == expected))
      throw ConfigError("build_plan: loaded model dims do not match the scenario");
    plan.gpud_bank = bank_of(*plan.gpud_union);
  }
  return plan;
}

TrialResult run_trial(const ExperimentPlan& plan, double snr_db, std::uint64_t trial_index) {
  const ExperimentConfig& cfg = plan.config;
  const RoomScenario& scenario = cfg.scenario;
  const int block = cfg.dataset.filter_length;
  const int n_mics = scenario.mic_count();
  const std::uint64_t root = derive_seed(cfg.seed, SeedPurpose::kTrialRoot, trial_index);

  TrialResult result;
  result.snr_db = snr_db;

  // Fresh test source, full-length truth.
  Rng pos_rng(derive_seed(root, SeedPurpose::kTestPosition, 0));
  result.source = sample_source_position(scenario.source_sector, pos_rng);
  const FirDims full_dims{1, scenario.rir_length, n_mics};
  Matrix full_transmission(scenario.rir_length, n_mics);
  for (int q = 0; q < n_mics; ++q)
    full_transmission.col(q) = simulate_rir(scenario, result.source, scenario.mic_positions[q]);
  const FirStack truth_full = vec_fir(full_transmission, full_dims);

  const FirDims dims{1, block, n_mics};
  const FirStack truth = vec_fir(full_transmission.topRows(block), dims);

  // Shared signals: every algorithm sees identical excitation and noise.
  const MultichannelSignal x = generate_excitation(
      cfg.excitation, scenario.sample_rate, derive_seed(root, SeedPurpose::kExcitation, 0), 1);
  const Observation obs =
      simulate_observation(truth_full, x, snr_db, derive_seed(root, SeedPurpose::kObservationNoise, 0));
  result.noise_variance = obs.noise_variance;

  const int blocks = static_cast<int>(x.frames() / block);
  if (blocks < 2) throw ConfigError("run_trial: need at least two blocks");
  result.blocks = blocks;
  const Index used = static_cast<Index>(blocks) * block;
  const Index half = static_cast<Index>(blocks / 2) * block;

  // One forward transform of the input per block, shared by the adaptive
  // filter and all evidence computations of all algorithms.
  RealFft fft(2 * static_cast<Index>(block));
  std::vector<std::vector<CVector>> spectra(static_cast<std::size_t>(blocks));
  {
    BlockStream stream(block, 1);
    for (int b = 0; b < blocks; ++b) {
      stream.push(x.samples.middleRows(static_cast<Index>(b) * block, block));
      spectra[static_cast<std::size_t>(b)] = {fft.forward(stream.history().col(0))};
    }
  }

  // Truncated-truth oracle: the attainable ERLE given the modelled length.
  const auto d_used = obs.d.samples.topRows(used);
  const auto error_power = [&](const Eigen::Ref<const Matrix>& y_hat, Index begin, Index end) {
    return (d_used.middleRows(begin, end - begin) - y_hat.middleRows(begin, end - begin))
               .squaredNorm() /
           (static_cast<double>(end - begin) * n_mics);
  };
  {
    const MultichannelSignal y_oracle = apply_fir_stack(truth, x);
    const auto y_used = y_oracle.samples.topRows(used);
    result.oracle_erle_cp = erle_linear(d_used, y_used, 0, half);
    result.oracle_erle_ss = erle_linear(d_used, y_used, half, used);
    result.oracle_error_power_cp = error_power(y_used, 0, half);
    result.oracle_error_power_ss = error_power(y_used, half, used);
  }

  const double evidence_variance =
      cfg.model.noise_variance.value_or(std::max(obs.noise_variance, 1e-12));
  const NoiseModel noise = NoiseModel::isotropic(n_mics, evidence_variance);

  for (Algorithm algorithm : cfg.algorithms) {
    AlgorithmTrace trace;
    trace.mismatch.resize(static_cast<std::size_t>(blocks));
    Matrix y_hat(used, n_mics);

    FirStack coeffs = FirStack::zeros(dims);
    FdafState state = fdaf_init(dims, cfg.filter);

    const bool projected = algorithm != Algorithm::kBaseline;
    const SubspaceUnion* u = nullptr;
    const EigenfilterBank* bank = nullptr;
    if (algorithm == Algorithm::kGpud) {
      u = &*plan.gpud_union;
      bank = &*plan.gpud_bank;
    } else if (algorithm == Algorithm::kLpud) {
      u = &*plan.lpud_union;
      bank = &*plan.lpud_bank;
    }

    EvidenceTracker tracker(projected ? u->model_count() : 1, cfg.model.lambda);
    if (projected) {
      trace.selected.resize(static_cast<std::size_t>(blocks));
      trace.switched.resize(static_cast<std::size_t>(blocks));
      trace.evidences.resize(blocks, u->model_count());
    }

    for (int b = 0; b < blocks; ++b) {
      const auto y_block = obs.y.samples.middleRows(static_cast<Index>(b) * block, block);
      if (projected) {
        LpudStepResult step =
            lpud_step(coeffs, tracker, *bank, *u, state, spectra[static_cast<std::size_t>(b)],
                      y_block, noise, cfg.model.diagonal_evidence);
        y_hat.middleRows(static_cast<Index>(b) * block, block) = step.y_hat;
        trace.selected[static_cast<std::size_t>(b)] = step.selected;
        trace.switched[static_cast<std::size_t>(b)] = step.switched ? 1 : 0;
        trace.evidences.row(b) = step.evidences.transpose();
      } else {
        FdafStep step = fdaf_step(state, spectra[static_cast<std::size_t>(b)], y_block, coeffs);
        coeffs.coeffs += step.delta.coeffs;
        y_hat.middleRows(static_cast<Index>(b) * block, block) = step.y_hat;
      }
      trace.mismatch[static_cast<std::size_t>(b)] = system_mismatch_block(truth, coeffs);
    }

    trace.erle_cp = erle_linear(d_used, y_hat, 0, half);
    trace.erle_ss = erle_linear(d_used, y_hat, half, used);
    trace.error_power_cp = error_power(y_hat, 0, half);
    trace.error_power_ss = error_power(y_hat, half, used);
    trace.mismatch_cp = system_mismatch_avg(trace.mismatch, 0, blocks / 2);
    trace.mismatch_ss = system_mismatch_avg(trace.mismatch, blocks / 2, blocks);
    result.traces.emplace(algorithm, std::move(trace));
  }

  return result;
}

std::string snr_label(double snr_db) {
  std::string label = CsvWriter::num(snr_db);
  for (char& c : label) {
    if (c == '-') c = 'm';
    if (c == '.') c = 'p';
  }
  return label;
}

void write_trial_csv(const std::string& path, const ExperimentConfig& config,
                     const TrialResult& result) {
  CsvWriter csv(path);
  csv.comment("osasi trial schema v1");

  std::vector<std::string> names{"block"};
  for (Algorithm a : config.algorithms) names.push_back(algorithm_name(a) + "_mismatch_db");
  for (Algorithm a : config.algorithms) {
    if (a == Algorithm::kBaseline) continue;
    const std::string prefix = algorithm_name(a);
    names.push_back(prefix + "_selected");
    names.push_back(prefix + "_switched");
    const auto& trace = result.traces.at(a);
    for (Index i = 0; i < trace.evidences.cols(); ++i)
      names.push_back(prefix + "_e" + CsvWriter::num(static_cast<std::int64_t>(i) + 1));
  }
  csv.header(names);

  for (int b = 0; b < result.blocks; ++b) {
    std::vector<std::string> fields{CsvWriter::num(static_cast<std::int64_t>(b) + 1)};
    for (Algorithm a : config.algorithms)
      fields.push_back(CsvWriter::num(
          db10_capped(result.traces.at(a).mismatch[static_cast<std::size_t>(b)])));
    for (Algorithm a : config.algorithms) {
      if (a == Algorithm::kBaseline) continue;
      const auto& trace = result.traces.at(a);
      fields.push_back(
          CsvWriter::num(static_cast<std::int64_t>(trace.selected[static_cast<std::size_t>(b)] + 1)));
      fields.push_back(CsvWriter::num(static_cast<std::int64_t>(trace.switched[static_cast<std::size_t>(b)])));
      for (Index i = 0; i < trace.evidences.cols(); ++i)
        fields.push_back(CsvWriter::num(trace.evidences(b, i)));
    }
    csv.row(fields);
  }
}

namespace {

const char* kPlotScript = R"PY(#!/usr/bin/env python3
"""Render the aggregate CSVs written next to this script."""
import csv
import os
import sys
from collections import defaultdict

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit("matplotlib is required to render the plots")

here = os.path.dirname(os.path.abspath(__file__))


def read_csv(name):
    with open(os.path.join(here, name)) as f:
        rows = [r for r in csv.reader(f) if r and not r[0].startswith("#")]
    header, body = rows[0], rows[1:]
    return [dict(zip(header, r)) for r in body]


traces = defaultdict(lambda: defaultdict(list))
for r in read_csv("mismatch_trace.csv"):
    traces[float(r["snr_db"])][r["algorithm"]].append(
        (int(r["block"]), float(r["mean_mismatch_db"])))

fig, axes = plt.subplots(len(traces), 1, figsize=(8, 4 * len(traces)), squeeze=False)
for ax, (snr, algs) in zip(axes.flat, sorted(traces.items())):
    for alg, points in sorted(algs.items()):
        points.sort()
        ax.plot([p[0] for p in points], [p[1] for p in points], label=alg)
    ax.set_xlabel("block")
    ax.set_ylabel("mean system mismatch [dB]")
    ax.set_title(f"SNR {snr:g} dB")
    ax.grid(True, alpha=0.3)
    ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(here, "mismatch_trace.png"), dpi=150)

summary = read_csv("summary.csv")
phases = ["cp", "ss"]
metrics = [("erle_db", "ERLE [dB]"), ("mismatch_db", "system mismatch [dB]")]
fig, axes = plt.subplots(len(metrics), len(phases), figsize=(10, 8), squeeze=False)
for i, (key, label) in enumerate(metrics):
    for j, phase in enumerate(phases):
        ax = axes[i][j]
        by_alg = defaultdict(list)
        for r in summary:
            if r["phase"] == phase:
                by_alg[r["algorithm"]].append((float(r["snr_db"]), float(r[key])))
        for alg, points in sorted(by_alg.items()):
            points.sort()
            ax.plot([p[0] for p in points], [p[1] for p in points], marker="o", label=alg)
        ax.set_xlabel("SNR [dB]")
        ax.set_ylabel(label)
        ax.set_title(f"{label}, {'convergence phase' if phase == 'cp' else 'steady state'}")
        ax.grid(True, alpha=0.3)
        ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(here, "summary.png"), dpi=150)
print("wrote mismatch_trace.png and summary.png")
)PY";

double sample_sd(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& config, int jobs) {
  const ExperimentPlan plan = build_plan(config, jobs);
  std::filesystem::create_directories(config.out_dir);
  write_text_file(config.out_dir + "/resolved_config.json", config.to_json_text());

  const int n_snr = static_cast<int>(config.snr_db.size());
  const std::int64_t total = static_cast<std::int64_t>(n_snr) * config.n_trials;

  // Each trial's CSV is flushed as soon as the trial completes, so an
  // interrupted sweep keeps its finished trials.
  ExperimentSummary summary;
  summary.trials.resize(static_cast<std::size_t>(total));
  parallel_for(
      total,
      [&](std::int64_t idx) {
        const double snr = config.snr_db[static_cast<std::size_t>(idx / config.n_trials)];
        TrialResult result = run_trial(plan, snr, static_cast<std::uint64_t>(idx));
        char name[64];
        std::snprintf(name, sizeof(name), "/trial_%s_%04d.csv", snr_label(snr).c_str(),
                      static_cast<int>(idx % config.n_trials));
        write_trial_csv(config.out_dir + name, config, result);
        summary.trials[static_cast<std::size_t>(idx)] = std::move(result);
      },
      jobs);

  // Aggregate mismatch trace (linear mean over trials, reported in dB).
  {
    CsvWriter csv(config.out_dir + "/mismatch_trace.csv");
    csv.comment("osasi mismatch-trace schema v1");
    csv.header({"snr_db", "algorithm", "block", "mean_mismatch_db"});
    for (int s = 0; s < n_snr; ++s) {
      for (Algorithm a : config.algorithms) {
        ExperimentSummary::Trace trace;
        trace.snr_db = config.snr_db[s];
        trace.algorithm = a;
        const int blocks = summary.trials[static_cast<std::size_t>(s) * config.n_trials].blocks;
        trace.mean_mismatch.assign(static_cast<std::size_t>(blocks), 0.0);
        for (int t = 0; t < config.n_trials; ++t) {
          const auto& tr = summary.trials[static_cast<std::size_t>(s) * config.n_trials + t];
          for (int b = 0; b < blocks; ++b)
            trace.mean_mismatch[static_cast<std::size_t>(b)] +=
                tr.traces.at(a).mismatch[static_cast<std::size_t>(b)];
        }
        for (double& v : trace.mean_mismatch) v /= config.n_trials;
        for (int b = 0; b < blocks; ++b)
          csv.row({CsvWriter::num(config.snr_db[s]), algorithm_name(a),
                   CsvWriter::num(static_cast<std::int64_t>(b) + 1),
                   CsvWriter::num(db10_capped(trace.mean_mismatch[static_cast<std::size_t>(b)]))});
        summary.traces.push_back(std::move(trace));
      }
    }
  }

  // Summary table: linear means over trials in dB, spread as the sample
  // standard deviation of the per-trial dB values.
  {
    CsvWriter csv(config.out_dir + "/summary.csv");
    csv.comment("osasi summary schema v1");
    csv.comment("erle_db/mismatch_db: 10log10 of the linear trial mean;"
                " *_sd: sample sd of per-trial dB values");
    csv.header({"snr_db", "algorithm", "phase", "erle_db", "erle_db_sd", "mismatch_db",
                "mismatch_db_sd", "trials"});
    for (int s = 0; s < n_snr; ++s) {
      const auto* base = &summary.trials[static_cast<std::size_t>(s) * config.n_trials];
      auto emit = [&](const std::string& name, const std::string& phase, auto erle_of,
                      auto mismatch_of) {
        double erle_mean = 0.0;
        double mismatch_mean = 0.0;
        std::vector<double> erle_db_values;
        std::vector<double> mismatch_db_values;
        for (int t = 0; t < config.n_trials; ++t) {
          const double e = erle_of(base[t]);
          const double m = mismatch_of(base[t]);
          erle_mean += e;
          mismatch_mean += m;
          erle_db_values.push_back(db10_capped(e));
          mismatch_db_values.push_back(db10_capped(m));
        }
        erle_mean /= config.n_trials;
        mismatch_mean /= config.n_trials;
        ExperimentSummary::Row row;
        row.snr_db = config.snr_db[s];
        row.algorithm = name;
        row.phase = phase;
        row.erle_db = db10_capped(erle_mean);
        row.erle_db_sd = sample_sd(erle_db_values);
        row.mismatch_db = db10_capped(mismatch_mean);
        row.mismatch_db_sd = sample_sd(mismatch_db_values);
        row.trials = config.n_trials;
        csv.row({CsvWriter::num(row.snr_db), row.algorithm, row.phase, CsvWriter::num(row.erle_db),
                 CsvWriter::num(row.erle_db_sd), CsvWriter::num(row.mismatch_db),
                 CsvWriter::num(row.mismatch_db_sd),
                 CsvWriter::num(static_cast<std::int64_t>(row.trials))});
        summary.rows.push_back(std::move(row));
      };

      for (Algorithm a : config.algorithms) {
        const std::string name = algorithm_name(a);
        emit(name, "cp", [&](const TrialResult& r) { return r.traces.at(a).erle_cp; },
             [&](const TrialResult& r) { return r.traces.at(a).mismatch_cp; });
        emit(name, "ss", [&](const TrialResult& r) { return r.traces.at(a).erle_ss; },
             [&](const TrialResult& r) { return r.traces.at(a).mismatch_ss; });
      }
      emit("oracle", "cp", [](const TrialResult& r) { return r.oracle_erle_cp; },
           [](const TrialResult&) { return 0.0; });
      emit("oracle", "ss", [](const TrialResult& r) { return r.oracle_erle_ss; },
           [](const TrialResult&) { return 0.0; });
    }
  }

  write_text_file(config.out_dir + "/plots.py", kPlotScript);
  return summary;
}

}  // namespace osasi
