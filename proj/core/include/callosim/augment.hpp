#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "callosim/volume.hpp"
#include "callosim/warp.hpp"

namespace callosim::augment {

// Label-space transforms. All throw Error(NoTargetStructure) when the
// structure they act on is absent.

/// Every CC voxel becomes VM.
LabelVolume complete_agenesis(const LabelVolume& vol);

enum class End : std::uint8_t { Anterior, Posterior };

/// Relabels the ceil(fraction * E) CC slices at `end` of the CC's
/// posterior-anterior extent E to VM. fraction in (0, 1).
LabelVolume partial_agenesis(const LabelVolume& vol, double fraction, End end);

/// Erodes CC with a 3-voxel inferior-superior line `iterations` times; vacated
/// voxels become WM. Never empties the CC: the last non-empty erosion is kept.
LabelVolume cc_thinning(const LabelVolume& vol, int iterations);

/// Dilates CC with Sphere(radius), growing only into WM.
LabelVolume cc_thickening(const LabelVolume& vol, double radius);

/// Field used by cc_kink: inferior-superior displacement
/// amplitude * sin(2 pi cycles t / E + phase) * taper, zero outside the CC
/// bounding box grown by ceil(amplitude / spacing) + 2 voxels per axis. The
/// taper is 1 up to ceil(amplitude / spacing) voxels past the box and falls to
/// 0 with a raised cosine over the remaining 2.
DisplacementField kink_field(const LabelVolume& vol, double amplitude_mm, double cycles, double phase);
LabelVolume cc_kink(const LabelVolume& vol, double amplitude_mm, double cycles, double phase);

/// GM dilated by Sphere(radius) into WM only.
LabelVolume cortex_thickening(const LabelVolume& vol, double radius);
/// CSF dilated by Sphere(radius) into GM only.
LabelVolume cortex_thinning(const LabelVolume& vol, double radius);
/// Closing of GM u WM with Sphere(radius); CSF voxels added by the closing become GM.
LabelVolume cortex_smoothing(const LabelVolume& vol, double radius);

/// Joint erosion of CBM u BSM with Sphere(1); vacated voxels become CSF. A
/// structure's erosion step is rolled back when it would split into several
/// 26-components, vanish, or lose contact with the other structure.
LabelVolume posterior_fossa_hypoplasia(const LabelVolume& vol, int iterations);

enum class Laterality : std::uint8_t { Left, Right, Bilateral };

/// Grid coordinate (along the left-right grid axis) of the midplane of the
/// non-background bounding box.
double midplane(const LabelVolume& vol);
/// Centroids (mm, grid axes) of VM voxels on the selected sides.
std::vector<Vec3> ventricle_centroids(const LabelVolume& vol, Laterality side);
/// Radial field sampling from nearer each centroid (expansion), Gaussian
/// profile with sigma_mm, truncated to zero beyond 4 sigma.
DisplacementField ventricle_field(const LabelVolume& vol, double magnitude_mm, double sigma_mm, Laterality side);
LabelVolume ventriculomegaly(const LabelVolume& vol, double magnitude_mm, double sigma_mm, Laterality side);

// ---------------------------------------------------------------- planning

enum class Kind : std::uint8_t {
  CompleteAgenesis,
  PartialAgenesis,
  CcThinning,
  CcThickening,
  CcKink,
  CortexThickening,
  CortexThinning,
  CortexSmoothing,
  PosteriorFossaHypoplasia,
  Ventriculomegaly,
};
inline constexpr int kKindCount = 10;

std::string_view kind_name(Kind k) noexcept;
std::optional<Kind> kind_from_name(std::string_view name) noexcept;
std::string_view end_name(End e) noexcept;
std::string_view laterality_name(Laterality l) noexcept;

/// Severity in [0, 1], mapped linearly onto a configured range.
class Severity {
 public:
  explicit Severity(double value);
  double value() const noexcept { return value_; }
  double map(double lo, double hi) const noexcept { return lo + value_ * (hi - lo); }

 private:
  double value_;
};

struct Range {
  double min = 0.0;
  double max = 0.0;
};

struct Ranges {
  Range partial_fraction{0.2, 0.8};
  Range thinning_iterations{1, 3};
  Range thickening_radius{1, 3};
  Range kink_amplitude_mm{0.5, 3.0};
  Range kink_cycles{0.5, 2.0};
  Range ventriculomegaly_magnitude_mm{1.0, 6.0};
  Range ventriculomegaly_sigma_mm{4.0, 10.0};
  Range cortex_thickening_radius{1, 2};
  Range cortex_thinning_radius{1, 2};
  Range cortex_smoothing_radius{1, 2};
  Range hypoplasia_iterations{1, 3};
};

struct AugmentationConfig {
  double p_augment = 0.5;
  int max_transforms = 3;
  std::array<double, kKindCount> weights{1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  Ranges ranges{};

  /// Throws InvalidConfig.
  void validate() const;
};

struct CompleteAgenesisParams {};
struct PartialAgenesisParams { double fraction; End end; };
struct ThinningParams { int iterations; };
struct ThickeningParams { double radius; };
struct KinkParams { double amplitude_mm; double cycles; double phase; };
struct CortexParams { double radius; };
struct HypoplasiaParams { int iterations; };
struct VentriculomegalyParams { double magnitude_mm; double sigma_mm; Laterality side; };

using Params = std::variant<CompleteAgenesisParams, PartialAgenesisParams, ThinningParams, ThickeningParams,
                            KinkParams, CortexParams, HypoplasiaParams, VentriculomegalyParams>;

struct Step {
  Kind kind;
  Params params;
};

struct AugmentationPlan {
  std::uint64_t seed = 0;
  bool applied = false;
  std::vector<Step> steps;
};

/// With probability p_augment: 1..max_transforms distinct kinds drawn by
/// weight without replacement, parameters uniform in range. Pure in (config, seed).
AugmentationPlan sample_plan(const AugmentationConfig& config, std::uint64_t seed);

/// Runs one step. Throws NoTargetStructure when its precondition fails.
LabelVolume apply_step(const LabelVolume& vol, const Step& step);

struct PlanResult {
  LabelVolume volume;
  std::vector<std::string> skipped;  // one note per skipped step
};

/// Applies steps in order; steps whose target structure is missing are skipped and noted.
PlanResult apply_plan(const LabelVolume& vol, const AugmentationPlan& plan);

// JSON
AugmentationConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AugmentationConfig& config);
nlohmann::json to_json(const AugmentationPlan& plan);
AugmentationPlan plan_from_json(const nlohmann::json& j);
std::string describe(const Step& step);

}  // namespace callosim::augment
