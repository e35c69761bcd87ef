#pragma once

#include "osasi/rng.hpp"
#include "osasi/signal.hpp"
#include "osasi/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace osasi {

inline constexpr double kSpeedOfSound = 343.0;  // m/s

/// Spherical sector of candidate source positions: fixed radius around a
/// center point, bounded azimuth/elevation ranges (degrees). Azimuth is
/// measured in the x-y plane from +x, elevation from the x-y plane.
struct SourceSector {
  Eigen::Vector3d center{3.0, 2.0, 1.5};
  double radius = 1.3;
  double azimuth_deg[2] = {30.0, 150.0};
  double elevation_deg[2] = {-5.0, 50.0};

  void validate() const;
};

struct RoomScenario {
  Eigen::Vector3d room_dims{6.0, 5.0, 3.5};  // meters
  double t60 = 0.3;                          // seconds
  double sample_rate = 8000.0;               // Hz
  std::vector<Eigen::Vector3d> mic_positions{{2.95, 2.0, 1.5}, {3.05, 2.0, 1.5}};
  SourceSector source_sector;
  int rir_length = 4096;             // W taps
  int max_reflection_order = -1;     // -1: every image inside the W-tap horizon

  int mic_count() const { return static_cast<int>(mic_positions.size()); }

  /// Uniform wall reflection coefficient from Sabine's formula.
  double reflection_coefficient() const;

  void validate() const;
};

/// Image-method room impulse response from source to mic, W taps at the
/// scenario sample rate. Each image source contributes an 81-tap
/// Hann-windowed sinc kernel centered on its fractional delay, scaled by
/// the wall-reflection product over 1/(4 pi distance). Deterministic.
Vector simulate_rir(const RoomScenario& scenario, const Eigen::Vector3d& source,
                    const Eigen::Vector3d& mic,
                    std::optional<double> reflection_override = std::nullopt);

/// Draw a source position uniformly in azimuth and elevation over the
/// sector ranges (azimuth first, then elevation).
Eigen::Vector3d sample_source_position(const SourceSector& sector, Rng& rng);
Eigen::Vector3d sample_source_position(const SourceSector& sector, std::uint64_t seed);

/// Training data: G stacked RIR samples truncated to the adaptive-filter
/// length L, plus the discarded tails for excess-error accounting.
struct RirDataset {
  RoomScenario scenario;
  FirDims dims;                 // (P=1, L, Q)
  Matrix samples;               // G x R, the first-L-tap stacks
  Matrix tails;                 // G x (W-L)*Q, same tap-major layout
  Matrix source_positions;      // G x 3
  std::uint64_t seed = 0;
  int count() const { return static_cast<int>(samples.rows()); }

  void validate() const;
};

/// Simulate G RIR stacks at independently drawn source positions. Sample g
/// uses the (kDatasetPosition, g) sub-stream of the seed, so datasets of
/// different sizes agree on their common prefix.
RirDataset generate_dataset(const RoomScenario& scenario, int count, int adaptive_length,
                            std::uint64_t seed, int jobs = 0);

/// Directory layout: manifest.json + samples.f64 + tails.f64 + positions.f64.
void save_dataset(const RirDataset& dataset, const std::string& dir);
RirDataset load_dataset(const std::string& dir);

}  // namespace osasi
