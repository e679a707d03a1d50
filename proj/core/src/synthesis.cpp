#include "callosim/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "callosim/noise.hpp"
#include "callosim/parallel.hpp"
#include "callosim/random.hpp"

namespace callosim::synth {

namespace {

using nlohmann::json;

// Stream tags under the sample seed.
constexpr std::uint64_t kTagGlobals = 0;
constexpr std::uint64_t kTagLabelStats = 1;
constexpr std::uint64_t kTagLabelVoxels = 2;
constexpr std::uint64_t kTagBias = 3;
constexpr std::uint64_t kTagDegrade = 4;
constexpr std::uint64_t kTagNoise = 5;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

void check_range(const Range& r, std::string_view name) {
  if (!std::isfinite(r.min) || !std::isfinite(r.max) || r.min < 0.0 || r.max < r.min) {
    invalid("synthesis range " + std::string(name) + " must satisfy 0 <= min <= max");
  }
}

/// Applies fn(line) over every 1D line of the grid along `axis`; a line is
/// addressed by its first voxel index and stride.
template <typename Fn>
void for_each_line(const Index3& d, int axis, int workers, Fn&& fn) {
  const int a1 = axis == 0 ? 1 : 0;
  const int a2 = axis == 2 ? 1 : 2;
  const Index3 stride{1, d[0], d[0] * d[1]};
  parallel_for(d[a2], workers, [&](std::int64_t p2) {
    for (std::int64_t p1 = 0; p1 < d[a1]; ++p1) {
      fn(static_cast<std::size_t>(p1 * stride[a1] + p2 * stride[a2]), static_cast<std::size_t>(stride[axis]));
    }
  });
}

std::vector<double> gaussian_kernel(double sigma_vox) {
  const auto radius = static_cast<std::int64_t>(std::ceil(3.0 * sigma_vox));
  std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (std::int64_t t = -radius; t <= radius; ++t) {
    const double v = std::exp(-0.5 * double(t * t) / (sigma_vox * sigma_vox));
    w[static_cast<std::size_t>(t + radius)] = v;
    total += v;
  }
  for (auto& v : w) v /= total;
  return w;
}

/// One-axis blur with edge replication.
void blur_axis(IntensityVolume& img, int axis, double sigma_vox, int workers) {
  if (!(sigma_vox > 0.0)) return;
  const auto w = gaussian_kernel(sigma_vox);
  const auto radius = static_cast<std::int64_t>(w.size() / 2);
  const std::int64_t n = img.dims()[axis];
  float* data = img.buffer().data();
  for_each_line(img.dims(), axis, workers, [&](std::size_t start, std::size_t stride) {
    std::vector<double> line(static_cast<std::size_t>(n));
    for (std::int64_t q = 0; q < n; ++q) line[static_cast<std::size_t>(q)] = data[start + static_cast<std::size_t>(q) * stride];
    for (std::int64_t q = 0; q < n; ++q) {
      double acc = 0.0;
      for (std::int64_t t = -radius; t <= radius; ++t) {
        const std::int64_t s = std::clamp<std::int64_t>(q + t, 0, n - 1);
        acc += w[static_cast<std::size_t>(t + radius)] * line[static_cast<std::size_t>(s)];
      }
      data[start + static_cast<std::size_t>(q) * stride] = static_cast<float>(acc);
    }
  });
}

double lerp_line(const std::vector<double>& line, double t) {
  const auto n = static_cast<std::int64_t>(line.size());
  t = std::clamp(t, 0.0, double(n - 1));
  const auto i0 = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(t)), n - 1);
  const std::int64_t i1 = std::min<std::int64_t>(i0 + 1, n - 1);
  const double f = t - double(i0);
  return (1.0 - f) * line[static_cast<std::size_t>(i0)] + f * line[static_cast<std::size_t>(i1)];
}

/// Linear down/up resampling along one axis with ratio r > 1 and sample
/// offset `phase` (native voxels).
void resample_axis(IntensityVolume& img, int axis, double ratio, double phase, int workers) {
  const std::int64_t n = img.dims()[axis];
  const auto low = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor((double(n - 1) - phase) / ratio)) + 1);
  float* data = img.buffer().data();
  for_each_line(img.dims(), axis, workers, [&](std::size_t start, std::size_t stride) {
    std::vector<double> line(static_cast<std::size_t>(n)), coarse(static_cast<std::size_t>(low));
    for (std::int64_t q = 0; q < n; ++q) line[static_cast<std::size_t>(q)] = data[start + static_cast<std::size_t>(q) * stride];
    for (std::int64_t m = 0; m < low; ++m) coarse[static_cast<std::size_t>(m)] = lerp_line(line, phase + double(m) * ratio);
    for (std::int64_t q = 0; q < n; ++q) {
      data[start + static_cast<std::size_t>(q) * stride] = static_cast<float>(lerp_line(coarse, (double(q) - phase) / ratio));
    }
  });
}

}  // namespace

std::array<LabelIntensity, kTissueCount> SynthConfig::default_labels() {
  std::array<LabelIntensity, kTissueCount> labels{};
  labels[0] = {{0.0, 0.1}, {0.0, 0.03}};
  for (std::size_t c = 1; c < labels.size(); ++c) labels[c] = {{0.1, 1.0}, {0.0, 0.08}};
  return labels;
}

SynthConfig SynthConfig::identity(const std::array<double, kTissueCount>& means) {
  SynthConfig c;
  for (std::size_t n = 0; n < means.size(); ++n) c.labels[n] = {{means[n], means[n]}, {0.0, 0.0}};
  c.bias_amplitude = {0.0, 0.0};
  c.blur_sigma_mm = {0.0, 0.0};
  c.acquisition_spacing_mm = {0.0, 0.0};
  c.noise_std = {0.0, 0.0};
  c.gamma = {1.0, 1.0};
  return c;
}

void SynthConfig::validate() const {
  for (std::size_t c = 0; c < labels.size(); ++c) {
    const std::string name(tissue_name(static_cast<Tissue>(c)));
    check_range(labels[c].mean, name + ".mean");
    check_range(labels[c].stddev, name + ".std");
  }
  check_range(bias_amplitude, "bias_amplitude");
  if (!(bias_scale_mm > 0.0) || !std::isfinite(bias_scale_mm)) invalid("bias_scale_mm must be > 0");
  check_range(blur_sigma_mm, "blur_sigma_mm");
  check_range(acquisition_spacing_mm, "acquisition_spacing_mm");
  check_range(noise_std, "noise_std");
  check_range(gamma, "gamma");
  if (!(gamma.min > 0.0)) invalid("gamma must be > 0");
}

IntensityVolume sample_intensities(const LabelVolume& vol, const SynthConfig& config, std::uint64_t seed,
                                   int workers) {
  std::array<double, kTissueCount> mean{}, stddev{};
  for (std::size_t c = 0; c < kTissueCount; ++c) {
    Rng rng(derive_seed(seed, kTagLabelStats, c));
    mean[c] = uniform(rng, config.labels[c].mean.min, config.labels[c].mean.max);
    stddev[c] = uniform(rng, config.labels[c].stddev.min, config.labels[c].stddev.max);
  }
  IntensityVolume img(vol.geometry());
  const auto& d = vol.dims();
  const auto slice = static_cast<std::size_t>(d[0] * d[1]);
  parallel_for(d[2], workers, [&](std::int64_t k) {
    std::array<std::optional<Rng>, kTissueCount> streams;
    std::array<std::normal_distribution<double>, kTissueCount> normal;
    const std::size_t base = static_cast<std::size_t>(k) * slice;
    for (std::size_t n = base; n < base + slice; ++n) {
      const auto c = static_cast<std::size_t>(vol[n]);
      if (stddev[c] == 0.0) {
        img[n] = static_cast<float>(mean[c]);
        continue;
      }
      if (!streams[c]) streams[c].emplace(derive_seed(derive_seed(seed, kTagLabelVoxels, c), static_cast<std::uint64_t>(k)));
      img[n] = static_cast<float>(mean[c] + stddev[c] * normal[c](*streams[c]));
    }
  });
  return img;
}

IntensityVolume bias_field(const Geometry& geometry, double amplitude, double scale_mm, std::uint64_t seed,
                           int workers) {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw Error(ErrorCode::InvalidArgument, "bias amplitude must be >= 0");
  IntensityVolume field(geometry, 1.0f);
  if (amplitude == 0.0) return field;
  const LatticeNoise noise(geometry, scale_mm, seed);
  const auto& d = geometry.dims;
  parallel_for(d[2], workers, [&](std::int64_t k) {
    for (std::int64_t j = 0; j < d[1]; ++j) {
      for (std::int64_t i = 0; i < d[0]; ++i) field(i, j, k) = static_cast<float>(std::exp(amplitude * noise.value(i, j, k)));
    }
  });
  return field;
}

IntensityVolume gaussian_blur(const IntensityVolume& img, const Vec3& sigma_mm, int workers) {
  IntensityVolume out = img;
  for (int a = 0; a < 3; ++a) blur_axis(out, a, sigma_mm[a] / img.spacing()[a], workers);
  return out;
}

IntensityVolume degrade_resolution(const IntensityVolume& img, const Vec3& acq_spacing_mm, std::uint64_t seed,
                                   int workers) {
  IntensityVolume out = img;
  Rng rng(mix64(seed));
  for (int a = 0; a < 3; ++a) {
    const double ratio = acq_spacing_mm[a] / img.spacing()[a];
    if (!(ratio > 1.0 + 1e-9) || img.dims()[a] < 2) continue;
    blur_axis(out, a, 0.5 * std::sqrt(ratio * ratio - 1.0), workers);
    const double phase = uniform(rng, 0.0, std::min(ratio, double(img.dims()[a] - 1)));
    resample_axis(out, a, ratio, phase, workers);
  }
  return out;
}

void normalize_min_max(IntensityVolume& img) {
  if (img.size() == 0) return;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (float v : img.buffer()) {
    lo = std::min(lo, double(v));
    hi = std::max(hi, double(v));
  }
  if (!(hi > lo)) {
    std::fill(img.buffer().begin(), img.buffer().end(), 0.0f);
    return;
  }
  const double span = hi - lo;
  for (auto& v : img.buffer()) v = std::clamp(static_cast<float>((double(v) - lo) / span), 0.0f, 1.0f);
}

Sample synthesize(const LabelVolume& vol, const SynthConfig& config, std::uint64_t seed, int workers) {
  config.validate();
  Rng rng(derive_seed(seed, kTagGlobals));
  const double bias_amplitude = uniform(rng, config.bias_amplitude.min, config.bias_amplitude.max);
  const double blur_sigma = uniform(rng, config.blur_sigma_mm.min, config.blur_sigma_mm.max);
  const auto slice_axis = static_cast<int>(uniform_int(rng, 0, 2));
  const double acq_spacing = uniform(rng, config.acquisition_spacing_mm.min, config.acquisition_spacing_mm.max);
  const double noise_std = uniform(rng, config.noise_std.min, config.noise_std.max);
  const double gamma = log_uniform(rng, config.gamma.min, config.gamma.max);

  IntensityVolume img = sample_intensities(vol, config, seed, workers);
  if (bias_amplitude > 0.0) {
    const IntensityVolume bias = bias_field(vol.geometry(), bias_amplitude, config.bias_scale_mm,
                                            derive_seed(seed, kTagBias), workers);
    for (std::size_t n = 0; n < img.size(); ++n) img[n] *= bias[n];
  }
  if (blur_sigma > 0.0) img = gaussian_blur(img, {blur_sigma, blur_sigma, blur_sigma}, workers);
  Vec3 acq = vol.spacing();
  acq[slice_axis] = std::max(acq[slice_axis], acq_spacing);
  img = degrade_resolution(img, acq, derive_seed(seed, kTagDegrade), workers);
  if (noise_std > 0.0) {
    const auto& d = vol.dims();
    const auto slice = static_cast<std::size_t>(d[0] * d[1]);
    parallel_for(d[2], workers, [&](std::int64_t k) {
      Rng stream(derive_seed(seed, kTagNoise, static_cast<std::uint64_t>(k)));
      std::normal_distribution<double> normal(0.0, noise_std);
      const std::size_t base = static_cast<std::size_t>(k) * slice;
      for (std::size_t n = base; n < base + slice; ++n) img[n] = static_cast<float>(double(img[n]) + normal(stream));
    });
  }
  normalize_min_max(img);
  if (gamma != 1.0) {
    for (auto& v : img.buffer()) v = static_cast<float>(std::pow(double(v), gamma));
    normalize_min_max(img);
  }
  return {std::move(img), vol};
}

// ---------------------------------------------------------------- JSON

namespace {

Range range_from(const json& j, std::string_view name) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    invalid("synthesis range " + std::string(name) + " must be [min, max]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json range_to(const Range& r) { return json::array({r.min, r.max}); }

}  // namespace

SynthConfig config_from_json(const json& j) {
  SynthConfig c;
  try {
    if (!j.is_object()) invalid("synthesis config must be an object");
    for (const auto& [key, value] : j.items()) {
      if (key == "labels") {
        if (!value.is_object()) invalid("labels must be an object");
        for (const auto& [name, entry] : value.items()) {
          const auto t = tissue_from_name(name);
          if (!t) invalid("unknown tissue '" + name + "'");
          auto& target = c.labels[code(*t)];
          for (const auto& [field, r] : entry.items()) {
            if (field == "mean") {
              target.mean = range_from(r, name + ".mean");
            } else if (field == "std") {
              target.stddev = range_from(r, name + ".std");
            } else {
              invalid("unknown key '" + field + "' for tissue " + name);
            }
          }
        }
      } else if (key == "bias_amplitude") {
        c.bias_amplitude = range_from(value, key);
      } else if (key == "bias_scale_mm") {
        c.bias_scale_mm = value.get<double>();
      } else if (key == "blur_sigma_mm") {
        c.blur_sigma_mm = range_from(value, key);
      } else if (key == "acquisition_spacing_mm") {
        c.acquisition_spacing_mm = range_from(value, key);
      } else if (key == "noise_std") {
        c.noise_std = range_from(value, key);
      } else if (key == "gamma") {
        c.gamma = range_from(value, key);
      } else {
        invalid("unknown key '" + key + "' in synthesis config");
      }
    }
  } catch (const json::exception& e) {
    invalid(std::string("synthesis config: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const SynthConfig& c) {
  json labels = json::object();
  for (std::size_t n = 0; n < c.labels.size(); ++n) {
    labels[std::string(tissue_name(static_cast<Tissue>(n)))] = {{"mean", range_to(c.labels[n].mean)},
                                                                 {"std", range_to(c.labels[n].stddev)}};
  }
  return {{"labels", labels},
          {"bias_amplitude", range_to(c.bias_amplitude)},
          {"bias_scale_mm", c.bias_scale_mm},
          {"blur_sigma_mm", range_to(c.blur_sigma_mm)},
          {"acquisition_spacing_mm", range_to(c.acquisition_spacing_mm)},
          {"noise_std", range_to(c.noise_std)},
          {"gamma", range_to(c.gamma)}};
}

}  // namespace callosim::synth
