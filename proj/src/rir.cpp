#include "osasi/rir.hpp"

#include "osasi/io.hpp"
#include "osasi/json_util.hpp"
#include "osasi/parallel.hpp"

#include <cmath>
#include <filesystem>

namespace osasi {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kKernelHalfWidth = 40;  // 81-tap fractional-delay kernel
constexpr double kDistanceFloorM = 1e-3;

bool inside_room(const Eigen::Vector3d& p, const Eigen::Vector3d& dims) {
  return p.x() > 0.0 && p.x() < dims.x() && p.y() > 0.0 && p.y() < dims.y() && p.z() > 0.0 &&
         p.z() < dims.z();
}

}  // namespace

void SourceSector::validate() const {
  if (radius <= 0.0) throw ConfigError("SourceSector: radius must be positive");
  if (azimuth_deg[1] < azimuth_deg[0] || elevation_deg[1] < elevation_deg[0])
    throw ConfigError("SourceSector: angle ranges must be nonempty");
}

double RoomScenario::reflection_coefficient() const {
  const double volume = room_dims.prod();
  const double surface = 2.0 * (room_dims.x() * room_dims.y() + room_dims.x() * room_dims.z() +
                                room_dims.y() * room_dims.z());
  // Sabine: T60 = 24 ln(10) V / (c S alpha), one absorption coefficient
  // shared by all six surfaces.
  const double alpha = 24.0 * std::log(10.0) * volume / (kSpeedOfSound * surface * t60);
  if (alpha >= 1.0)
    throw GeometryError("RoomScenario: t60 too short for this room (Sabine absorption >= 1)");
  return std::sqrt(1.0 - alpha);
}

void RoomScenario::validate() const {
  if ((room_dims.array() <= 0.0).any()) throw ConfigError("RoomScenario: room dims must be positive");
  if (t60 <= 0.0) throw ConfigError("RoomScenario: t60 must be positive");
  if (sample_rate <= 0.0) throw ConfigError("RoomScenario: sample rate must be positive");
  if (rir_length < 1) throw ConfigError("RoomScenario: rir length must be positive");
  if (mic_positions.empty()) throw ConfigError("RoomScenario: need at least one microphone");
  for (const auto& m : mic_positions)
    if (!inside_room(m, room_dims))
      throw GeometryError("RoomScenario: microphone outside the room");
  source_sector.validate();
}

Vector simulate_rir(const RoomScenario& scenario, const Eigen::Vector3d& source,
                    const Eigen::Vector3d& mic, std::optional<double> reflection_override) {
  scenario.validate();
  if (!inside_room(source, scenario.room_dims)) throw GeometryError("simulate_rir: source outside room");
  if (!inside_room(mic, scenario.room_dims)) throw GeometryError("simulate_rir: mic outside room");

  const int n_taps = scenario.rir_length;
  const double beta = reflection_override ? *reflection_override : scenario.reflection_coefficient();
  const double meters_per_tap = kSpeedOfSound / scenario.sample_rate;

  // Work in tap units.
  const Eigen::Vector3d s = source / meters_per_tap;
  const Eigen::Vector3d r = mic / meters_per_tap;
  const Eigen::Vector3d room = scenario.room_dims / meters_per_tap;

  // Lattice bound: images farther than the horizon cannot contribute taps.
  const double horizon = static_cast<double>(n_taps) + kKernelHalfWidth;
  const int nx = static_cast<int>(std::ceil(horizon / (2.0 * room.x())));
  const int ny = static_cast<int>(std::ceil(horizon / (2.0 * room.y())));
  const int nz = static_cast<int>(std::ceil(horizon / (2.0 * room.z())));

  Vector h = Vector::Zero(n_taps);
  const double window_step = 2.0 * kPi / (2.0 * kKernelHalfWidth + 1.0);

  for (int mx = -nx; mx <= nx; ++mx) {
    for (int my = -ny; my <= ny; ++my) {
      for (int mz = -nz; mz <= nz; ++mz) {
        for (int qx = 0; qx <= 1; ++qx) {
          for (int qy = 0; qy <= 1; ++qy) {
            for (int qz = 0; qz <= 1; ++qz) {
              if (scenario.max_reflection_order >= 0) {
                const int order = std::abs(2 * mx - qx) + std::abs(2 * my - qy) +
                                  std::abs(2 * mz - qz);
                if (order > scenario.max_reflection_order) continue;
              }
              const double ix = (1 - 2 * qx) * s.x() - r.x() + 2.0 * mx * room.x();
              const double iy = (1 - 2 * qy) * s.y() - r.y() + 2.0 * my * room.y();
              const double iz = (1 - 2 * qz) * s.z() - r.z() + 2.0 * mz * room.z();
              const double delay = std::sqrt(ix * ix + iy * iy + iz * iz);
              if (delay - kKernelHalfWidth >= static_cast<double>(n_taps)) continue;

              const int wall_hits = std::abs(mx - qx) + std::abs(mx) + std::abs(my - qy) +
                                    std::abs(my) + std::abs(mz - qz) + std::abs(mz);
              const double reflection = std::pow(beta, wall_hits);
              if (reflection == 0.0 && wall_hits > 0) continue;
              const double dist_m = std::max(delay * meters_per_tap, kDistanceFloorM);
              const double gain = reflection / (4.0 * kPi * dist_m);

              const int first = std::max(0, static_cast<int>(std::ceil(delay)) - kKernelHalfWidth);
              const int last =
                  std::min(n_taps - 1, static_cast<int>(std::floor(delay)) + kKernelHalfWidth);
              if (first > last) continue;

              // sinc(t) for t = k - frac needs a single sine evaluation:
              // sin(pi (k - frac)) = -(-1)^k sin(pi frac).
              const double t0 = std::floor(delay);
              const double frac = delay - t0;
              const double sin_frac = std::sin(kPi * frac);
              // Hann window evaluated by rotating a unit phasor.
              double theta = window_step * (first - delay);
              double cos_t = std::cos(theta);
              double sin_t = std::sin(theta);
              const double cos_step = std::cos(window_step);
              const double sin_step = std::sin(window_step);

              for (int k = first; k <= last; ++k) {
                const double t = k - delay;
                double sinc;
                if (frac == 0.0) {
                  sinc = (t == 0.0) ? 1.0 : 0.0;
                } else {
                  const int rel = k - static_cast<int>(t0);
                  const double sign = (rel % 2 == 0) ? 1.0 : -1.0;
                  sinc = sign * sin_frac / (kPi * t);
                }
                const double window = 0.5 * (1.0 + cos_t);
                h[k] += gain * window * sinc;
                const double next_cos = cos_t * cos_step - sin_t * sin_step;
                sin_t = sin_t * cos_step + cos_t * sin_step;
                cos_t = next_cos;
              }
            }
          }
        }
      }
    }
  }
  return h;
}

Eigen::Vector3d sample_source_position(const SourceSector& sector, Rng& rng) {
  sector.validate();
  const double deg = kPi / 180.0;
  const double az = rng.uniform(sector.azimuth_deg[0], sector.azimuth_deg[1]) * deg;
  const double el = rng.uniform(sector.elevation_deg[0], sector.elevation_deg[1]) * deg;
  return sector.center + sector.radius * Eigen::Vector3d(std::cos(el) * std::cos(az),
                                                         std::cos(el) * std::sin(az), std::sin(el));
}

Eigen::Vector3d sample_source_position(const SourceSector& sector, std::uint64_t seed) {
  Rng rng(seed);
  return sample_source_position(sector, rng);
}

void RirDataset::validate() const {
  dims.validate();
  if (samples.cols() != dims.stacked()) throw DimensionError("RirDataset: sample width != R");
  if (source_positions.rows() != samples.rows())
    throw DimensionError("RirDataset: positions and samples disagree on G");
  const Index tail_taps = static_cast<Index>(scenario.rir_length - dims.taps);
  if (tails.cols() != tail_taps * dims.outputs)
    throw DimensionError("RirDataset: tail width does not match W - L");
}

RirDataset generate_dataset(const RoomScenario& scenario, int count, int adaptive_length,
                            std::uint64_t seed, int jobs) {
  scenario.validate();
  if (count < 1) throw ConfigError("generate_dataset: need at least one sample");
  if (adaptive_length < 1 || adaptive_length > scenario.rir_length)
    throw ConfigError("generate_dataset: adaptive length must be in [1, rir_length]");

  const int n_mics = scenario.mic_count();
  const FirDims dims{1, adaptive_length, n_mics};
  const int tail_taps = scenario.rir_length - adaptive_length;

  RirDataset ds;
  ds.scenario = scenario;
  ds.dims = dims;
  ds.seed = seed;
  ds.samples.resize(count, dims.stacked());
  ds.tails.resize(count, static_cast<Index>(tail_taps) * n_mics);
  ds.source_positions.resize(count, 3);

  parallel_for(
      count,
      [&](std::int64_t g) {
        Rng rng(derive_seed(seed, SeedPurpose::kDatasetPosition, static_cast<std::uint64_t>(g)));
        const Eigen::Vector3d pos = sample_source_position(scenario.source_sector, rng);
        Matrix transmission(adaptive_length, n_mics);
        for (int q = 0; q < n_mics; ++q) {
          const Vector full = simulate_rir(scenario, pos, scenario.mic_positions[q]);
          transmission.col(q) = full.head(adaptive_length);
          for (int l = 0; l < tail_taps; ++l)
            ds.tails(g, static_cast<Index>(q) + static_cast<Index>(n_mics) * l) =
                full(adaptive_length + l);
        }
        ds.samples.row(g) = vec_fir(transmission, dims).coeffs.transpose();
        ds.source_positions.row(g) = pos.transpose();
      },
      jobs);

  ds.validate();
  return ds;
}

void save_dataset(const RirDataset& dataset, const std::string& dir) {
  dataset.validate();
  std::filesystem::create_directories(dir);
  Json manifest;
  manifest["scenario"] = scenario_to_json(dataset.scenario);
  manifest["count"] = dataset.count();
  manifest["filter_length"] = dataset.dims.taps;
  manifest["seed"] = dataset.seed;
  manifest["dims"] = Json{{"inputs", dataset.dims.inputs},
                          {"taps", dataset.dims.taps},
                          {"outputs", dataset.dims.outputs}};
  write_text_file(dir + "/manifest.json", manifest.dump(2) + "\n");
  write_f64(dir + "/samples.f64", dataset.samples);
  write_f64(dir + "/tails.f64", dataset.tails);
  write_f64(dir + "/positions.f64", dataset.source_positions);
}

RirDataset load_dataset(const std::string& dir) {
  const Json manifest = Json::parse(read_text_file(dir + "/manifest.json"));
  RirDataset ds;
  ds.scenario = scenario_from_json(manifest.at("scenario"));
  const int count = manifest.at("count").get<int>();
  ds.seed = manifest.at("seed").get<std::uint64_t>();
  const Json& dims = manifest.at("dims");
  ds.dims = FirDims{dims.at("inputs").get<int>(), dims.at("taps").get<int>(),
                    dims.at("outputs").get<int>()};
  const Index tail_taps = static_cast<Index>(ds.scenario.rir_length - ds.dims.taps);
  ds.samples = read_f64(dir + "/samples.f64", count, ds.dims.stacked());
  ds.tails = read_f64(dir + "/tails.f64", count, tail_taps * ds.dims.outputs);
  ds.source_positions = read_f64(dir + "/positions.f64", count, 3);
  ds.validate();
  return ds;
}

}  // namespace osasi
