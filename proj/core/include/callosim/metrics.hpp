#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "callosim/topology.hpp"
#include "callosim/volume.hpp"

namespace callosim::metrics {

struct ClassCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t gt_size() const noexcept { return tp + fn; }
  std::uint64_t pred_size() const noexcept { return tp + fp; }
};

struct ConfusionCounts {
  std::array<ClassCounts, kTissueCount> per_class{};
};

/// Throws MetadataMismatch on differing geometry.
ConfusionCounts confusion(const LabelVolume& gt, const LabelVolume& pred);

/// A metric value or the reason it is undefined.
struct Measure {
  std::optional<double> value;
  std::string flag;  // empty when defined, or when defined with a note (e.g. "gt-empty")

  bool defined() const noexcept { return value.has_value(); }
  static Measure of(double v, std::string note = {}) { return {v, std::move(note)}; }
  static Measure undefined(std::string reason) { return {std::nullopt, std::move(reason)}; }
};

struct GeneralizedDice {
  double value = 0.0;
  std::vector<Tissue> excluded;  // classes absent from gt
};

/// 2 sum w TP / sum w (2TP + FP + FN), w = 1/|gt|^2. Throws AllClassesAbsent.
GeneralizedDice generalized_dice(const LabelVolume& gt, const LabelVolume& pred, const std::vector<Tissue>& classes);
GeneralizedDice generalized_dice(const ConfusionCounts& counts, const std::vector<Tissue>& classes);

Measure dice(const BinaryMask& gt, const BinaryMask& pred);
Measure volume_similarity(const BinaryMask& gt, const BinaryMask& pred);
/// q-th percentile with linear interpolation between order statistics. `sorted` ascending, non-empty.
double percentile(const std::vector<double>& sorted, double q);
/// max(h95(gt, pred), h95(pred, gt)) in mm; undefined if either mask is empty.
Measure hd95(const BinaryMask& gt, const BinaryMask& pred);
/// |chi(reference) - chi(mask)|.
std::int64_t euler_difference(const BinaryMask& mask, const BettiTriple& reference = {1, 0, 0});

struct ClassReport {
  Tissue label;
  Measure dice;
  Measure hd95_mm;
  Measure vs;
  std::optional<std::int64_t> ed;
};

struct SegReport {
  std::string subject;
  std::vector<Tissue> classes;
  std::vector<ClassReport> rows;  // class code order
  Measure gdsc;
  bool merged_cc_into_wm = false;
};

std::vector<Tissue> all_classes();        // CSF..CC
std::vector<Tissue> feta_classes();       // CSF..BSM

/// Throws MetadataMismatch. With merge_cc_into_wm both volumes are relabelled and CC leaves the class set.
SegReport evaluate(const LabelVolume& gt, const LabelVolume& pred, std::vector<Tissue> classes,
                   bool merge_cc_into_wm, std::string subject = {});

struct ClassAggregate {
  Tissue label;
  double mean_dice = 0, mean_hd95_mm = 0, mean_vs = 0;
  std::size_t n_dice = 0, n_hd95 = 0, n_vs = 0;
  std::size_t excluded_dice = 0, excluded_hd95 = 0, excluded_vs = 0;
};

/// Per-class means over defined entries with exclusion counts.
std::vector<ClassAggregate> aggregate(const std::vector<SegReport>& reports);

/// Frozen columns: subject,class,label,dice,hd95_mm,vs,ed,gdsc,flags
std::string csv_header();
std::string to_csv_rows(const SegReport& report);
nlohmann::json to_json(const SegReport& report);

}  // namespace callosim::metrics
