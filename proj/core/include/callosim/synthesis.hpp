#pragma once

#include <array>
#include <cstdint>

#include <nlohmann/json_fwd.hpp>

#include "callosim/augment.hpp"
#include "callosim/volume.hpp"

namespace callosim::synth {

using augment::Range;

struct LabelIntensity {
  Range mean{0.1, 1.0};
  Range stddev{0.0, 0.08};
};

struct SynthConfig {
  std::array<LabelIntensity, kTissueCount> labels = default_labels();
  Range bias_amplitude{0.0, 0.4};
  double bias_scale_mm = 32.0;
  Range blur_sigma_mm{0.0, 0.5};
  /// Through-plane acquisition spacing of one randomly chosen axis; values at
  /// or below the native spacing leave that axis untouched.
  Range acquisition_spacing_mm{0.5, 3.0};
  Range noise_std{0.0, 0.05};
  Range gamma{0.7, 1.4};

  static std::array<LabelIntensity, kTissueCount> default_labels();
  /// Every randomisation collapsed to identity: fixed means, zero std, no bias,
  /// blur, degradation or noise, gamma = 1.
  static SynthConfig identity(const std::array<double, kTissueCount>& means);

  /// Throws InvalidConfig.
  void validate() const;
};

/// Per-label Gaussian intensities. The (mean, std) of label c are drawn from
/// a stream keyed by c; voxel draws come from streams keyed by (c, slice).
IntensityVolume sample_intensities(const LabelVolume& vol, const SynthConfig& config, std::uint64_t seed,
                                   int workers = 1);

/// exp(B), B = amplitude * lattice noise, so max|B| = amplitude.
IntensityVolume bias_field(const Geometry& geometry, double amplitude, double scale_mm, std::uint64_t seed,
                           int workers = 1);

/// Separable Gaussian blur, sigma in mm per grid axis (0 = skip axis).
IntensityVolume gaussian_blur(const IntensityVolume& img, const Vec3& sigma_mm, int workers = 1);

/// Blur matched to the spacing ratio, trilinear downsample to acq_spacing and
/// trilinear upsample back to the native grid.
IntensityVolume degrade_resolution(const IntensityVolume& img, const Vec3& acq_spacing_mm, std::uint64_t seed,
                                   int workers = 1);

/// Linear map onto [0, 1]; a constant image maps to all zeros.
void normalize_min_max(IntensityVolume& img);

struct Sample {
  IntensityVolume image;
  LabelVolume labels;  // the input labels, untouched
};

/// sample_intensities -> bias -> blur/degrade -> noise -> gamma -> min-max.
Sample synthesize(const LabelVolume& vol, const SynthConfig& config, std::uint64_t seed, int workers = 1);

SynthConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthConfig& config);

}  // namespace callosim::synth
