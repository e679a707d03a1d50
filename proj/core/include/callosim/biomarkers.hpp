#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "callosim/volume.hpp"

namespace callosim::biomarkers {

struct Length {
  double mm = 0.0;
  bool cc_absent = false;
};

/// Posterior-anterior projection extent of the CC: (max - min) * spacing.
Length cc_length(const LabelVolume& vol);
double cc_volume(const LabelVolume& vol);

struct DeltaLength {
  double mm = 0.0;
  bool gt_cc_absent = false;  // CCA reference: gt length taken as 0
};

DeltaLength delta_length(const LabelVolume& pred, const LabelVolume& gt);

/// Expected CC length (mm) against gestational age (weeks).
class NormativeCurve {
 public:
  static NormativeCurve quadratic(std::array<double, 3> coefficients, std::pair<double, double> ga_range,
                                  std::string source);
  static NormativeCurve table(std::vector<std::pair<double, double>> knots, std::string source);

  /// Throws GAOutOfRange outside the declared interval.
  double operator()(double ga_weeks) const;
  std::pair<double, double> ga_range() const noexcept { return range_; }
  bool contains(double ga) const noexcept { return ga >= range_.first && ga <= range_.second; }
  const std::string& source() const noexcept { return source_; }
  bool is_quadratic() const noexcept { return knots_.empty(); }
  const std::array<double, 3>& coefficients() const noexcept { return coefficients_; }
  const std::vector<std::pair<double, double>>& knots() const noexcept { return knots_; }

  /// Synthetic curve for tests and examples; not clinical reference data.
  static NormativeCurve synthetic_default();

 private:
  std::array<double, 3> coefficients_{};
  std::vector<std::pair<double, double>> knots_;
  std::pair<double, double> range_{0, 0};
  std::string source_;
};

/// |length - curve(GA)|. Throws GAOutOfRange.
double delta_growth(double length_mm, double ga_weeks, const NormativeCurve& curve);

struct QuadraticFit {
  std::array<double, 3> coefficients{};  // a0 + a1 GA + a2 GA^2
  double rms_residual = 0.0;
};

/// Least squares via normal equations on a GA-centred basis. Throws DegenerateDesign.
QuadraticFit fit_growth_quadratic(const std::vector<std::pair<double, double>>& points);

struct BiomarkerReport {
  std::string subject;
  std::optional<double> ga_weeks;
  double cc_length_mm = 0.0;
  double cc_volume_mm3 = 0.0;
  std::optional<double> delta_length_mm;
  std::optional<double> delta_growth_mm;
  std::vector<std::string> flags;
};

BiomarkerReport measure(const LabelVolume& seg, std::optional<double> ga_weeks, const NormativeCurve* curve,
                        const LabelVolume* gt, std::string subject = {});

/// Frozen columns: subject,GA,length_mm,volume_mm3,delta_length_mm,delta_growth_mm,flags
std::string csv_header();
std::string to_csv_row(const BiomarkerReport& report);
nlohmann::json to_json(const BiomarkerReport& report);

NormativeCurve curve_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NormativeCurve& curve);

}  // namespace callosim::biomarkers
