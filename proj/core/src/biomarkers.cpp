#include "callosim/biomarkers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "text.hpp"

namespace callosim::biomarkers {

using nlohmann::json;

Length cc_length(const LabelVolume& vol) {
  const int g = vol.orientation().grid_axis(AnatomicalAxis::PosteriorAnterior);
  std::int64_t lo = vol.dims()[g], hi = -1;
  const auto& d = vol.dims();
  for (std::int64_t k = 0; k < d[2]; ++k) {
    for (std::int64_t j = 0; j < d[1]; ++j) {
      for (std::int64_t i = 0; i < d[0]; ++i) {
        if (vol(i, j, k) != Tissue::CC) continue;
        const Index3 p{i, j, k};
        lo = std::min(lo, p[g]);
        hi = std::max(hi, p[g]);
      }
    }
  }
  if (hi < 0) return {0.0, true};
  return {double(hi - lo) * vol.spacing()[g], false};
}

double cc_volume(const LabelVolume& vol) {
  const auto n = static_cast<double>(std::count(vol.buffer().begin(), vol.buffer().end(), Tissue::CC));
  const auto& s = vol.spacing();
  return n * s[0] * s[1] * s[2];
}

DeltaLength delta_length(const LabelVolume& pred, const LabelVolume& gt) {
  if (pred.geometry() != gt.geometry()) throw Error(ErrorCode::MetadataMismatch, "prediction and gt geometries differ");
  const Length p = cc_length(pred), g = cc_length(gt);
  return {std::abs(p.mm - g.mm), g.cc_absent};
}

// ------------------------------------------------------------ curve

namespace {
[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }
}  // namespace

NormativeCurve NormativeCurve::quadratic(std::array<double, 3> coefficients, std::pair<double, double> ga_range,
                                         std::string source) {
  for (double c : coefficients) {
    if (!std::isfinite(c)) invalid("curve coefficients must be finite");
  }
  if (!std::isfinite(ga_range.first) || !std::isfinite(ga_range.second) || !(ga_range.first < ga_range.second)) {
    invalid("curve GA range must be an increasing finite interval");
  }
  // The derivative is linear in GA, so its sign at both ends decides monotonicity.
  for (double ga : {ga_range.first, ga_range.second}) {
    if (coefficients[1] + 2.0 * coefficients[2] * ga < 0.0) invalid("normative curve must be non-decreasing over its GA range");
  }
  NormativeCurve c;
  c.coefficients_ = coefficients;
  c.range_ = ga_range;
  c.source_ = std::move(source);
  return c;
}

NormativeCurve NormativeCurve::table(std::vector<std::pair<double, double>> knots, std::string source) {
  if (knots.size() < 2) invalid("table curve needs at least two knots");
  for (std::size_t n = 0; n < knots.size(); ++n) {
    if (!std::isfinite(knots[n].first) || !std::isfinite(knots[n].second)) invalid("curve knots must be finite");
    if (n > 0 && !(knots[n].first > knots[n - 1].first)) invalid("curve knots must have increasing GA");
    if (n > 0 && knots[n].second < knots[n - 1].second) invalid("normative curve must be non-decreasing over its GA range");
  }
  NormativeCurve c;
  c.range_ = {knots.front().first, knots.back().first};
  c.knots_ = std::move(knots);
  c.source_ = std::move(source);
  return c;
}

double NormativeCurve::operator()(double ga) const {
  if (!contains(ga)) {
    std::ostringstream os;
    os << "GA " << ga << " outside curve range [" << range_.first << ", " << range_.second << "]";
    throw Error(ErrorCode::GAOutOfRange, os.str());
  }
  if (is_quadratic()) return coefficients_[0] + ga * (coefficients_[1] + ga * coefficients_[2]);
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), ga,
                                   [](double x, const std::pair<double, double>& k) { return x < k.first; });
  if (it == knots_.end()) return knots_.back().second;
  const auto& [x1, y1] = *it;
  const auto& [x0, y0] = *(it - 1);
  return y0 + (ga - x0) / (x1 - x0) * (y1 - y0);
}

NormativeCurve NormativeCurve::synthetic_default() {
  return quadratic({-30.0, 3.2, -0.03}, {20.0, 40.0}, "synthetic test curve; not clinical reference data");
}

double delta_growth(double length_mm, double ga_weeks, const NormativeCurve& curve) {
  return std::abs(length_mm - curve(ga_weeks));
}

// -------------------------------------------------------------- fit

QuadraticFit fit_growth_quadratic(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw Error(ErrorCode::DegenerateDesign, "quadratic fit needs at least 3 points");
  std::vector<double> xs;
  for (const auto& [x, y] : points) {
    if (!std::isfinite(x) || !std::isfinite(y)) throw Error(ErrorCode::InvalidArgument, "fit points must be finite");
    xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
  if (std::unique(xs.begin(), xs.end()) - xs.begin() < 3) {
    throw Error(ErrorCode::DegenerateDesign, "quadratic fit needs at least 3 distinct GA values");
  }

  const double n = double(points.size());
  double mean = 0.0;
  for (const auto& p : points) mean += p.first;
  mean /= n;
  double var = 0.0;
  for (const auto& p : points) var += (p.first - mean) * (p.first - mean);
  const double scale = std::sqrt(var / n);

  // Normal equations in z = (GA - mean) / scale.
  double a[3][4] = {};
  for (const auto& [x, y] : points) {
    const double z = (x - mean) / scale;
    const double basis[3] = {1.0, z, z * z};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) a[r][c] += basis[r] * basis[c];
      a[r][3] += basis[r] * y;
    }
  }
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-12 * n) throw Error(ErrorCode::DegenerateDesign, "quadratic design is rank deficient");
    std::swap(a[col], a[pivot]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
    }
  }
  const double b0 = a[0][3] / a[0][0], b1 = a[1][3] / a[1][1], b2 = a[2][3] / a[2][2];

  QuadraticFit fit;
  double sse = 0.0;
  for (const auto& [x, y] : points) {
    const double z = (x - mean) / scale;
    const double r = y - (b0 + z * (b1 + z * b2));
    sse += r * r;
  }
  fit.rms_residual = std::sqrt(sse / n);
  fit.coefficients = {b0 - b1 * mean / scale + b2 * mean * mean / (scale * scale),
                      b1 / scale - 2.0 * b2 * mean / (scale * scale), b2 / (scale * scale)};
  return fit;
}

// ----------------------------------------------------------- report

BiomarkerReport measure(const LabelVolume& seg, std::optional<double> ga_weeks, const NormativeCurve* curve,
                        const LabelVolume* gt, std::string subject) {
  BiomarkerReport r;
  r.subject = std::move(subject);
  r.ga_weeks = ga_weeks;
  const Length len = cc_length(seg);
  r.cc_length_mm = len.mm;
  r.cc_volume_mm3 = cc_volume(seg);
  if (len.cc_absent) r.flags.emplace_back("cc-absent");
  if (gt) {
    const DeltaLength d = delta_length(seg, *gt);
    r.delta_length_mm = d.mm;
    if (d.gt_cc_absent) r.flags.emplace_back("gt-cc-absent");
  }
  if (ga_weeks && curve) {
    const double expected = (*curve)(*ga_weeks);
    if (!len.cc_absent) r.delta_growth_mm = std::abs(len.mm - expected);
  } else if (ga_weeks) {
    r.flags.emplace_back("no-curve");
  }
  return r;
}

std::string csv_header() { return "subject,GA,length_mm,volume_mm3,delta_length_mm,delta_growth_mm,flags"; }

std::string to_csv_row(const BiomarkerReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? detail::format_number(*v) : std::string{}; };
  std::string flags;
  for (const auto& f : r.flags) flags += (flags.empty() ? "" : ";") + f;
  return detail::csv_field(r.subject) + ',' + opt(r.ga_weeks) + ',' + detail::format_number(r.cc_length_mm) + ',' +
         detail::format_number(r.cc_volume_mm3) + ',' + opt(r.delta_length_mm) + ',' + opt(r.delta_growth_mm) + ',' +
         detail::csv_field(flags) + '\n';
}

json to_json(const BiomarkerReport& r) {
  json j = {{"subject", r.subject},
            {"length_mm", r.cc_length_mm},
            {"volume_mm3", r.cc_volume_mm3},
            {"flags", r.flags}};
  if (r.ga_weeks) j["GA"] = *r.ga_weeks;
  if (r.delta_length_mm) j["delta_length_mm"] = *r.delta_length_mm;
  if (r.delta_growth_mm) j["delta_growth_mm"] = *r.delta_growth_mm;
  return j;
}

NormativeCurve curve_from_json(const json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const std::string source = j.value("source", std::string{});
    if (kind == "quadratic") {
      const auto c = j.at("coefficients").get<std::vector<double>>();
      const auto range = j.at("ga_range").get<std::vector<double>>();
      if (c.size() != 3 || range.size() != 2) invalid("quadratic curve needs 3 coefficients and a [min, max] ga_range");
      return NormativeCurve::quadratic({c[0], c[1], c[2]}, {range[0], range[1]}, source);
    }
    if (kind == "table") {
      std::vector<std::pair<double, double>> knots;
      for (const auto& k : j.at("knots")) {
        const auto v = k.get<std::vector<double>>();
        if (v.size() != 2) invalid("table knots must be [GA, length] pairs");
        knots.emplace_back(v[0], v[1]);
      }
      NormativeCurve curve = NormativeCurve::table(std::move(knots), source);
      if (j.contains("ga_range")) {
        const auto range = j.at("ga_range").get<std::vector<double>>();
        if (range.size() != 2 || range[0] != curve.ga_range().first || range[1] != curve.ga_range().second) {
          invalid("table ga_range must match the first and last knot");
        }
      }
      return curve;
    }
    invalid("curve kind must be 'quadratic' or 'table'");
  } catch (const json::exception& e) {
    invalid(std::string("normative curve: ") + e.what());
  }
}

json to_json(const NormativeCurve& curve) {
  json j = {{"ga_range", {curve.ga_range().first, curve.ga_range().second}}, {"source", curve.source()}};
  if (curve.is_quadratic()) {
    j["kind"] = "quadratic";
    j["coefficients"] = curve.coefficients();
  } else {
    j["kind"] = "table";
    json knots = json::array();
    for (const auto& [x, y] : curve.knots()) knots.push_back({x, y});
    j["knots"] = knots;
  }
  return j;
}

}  // namespace callosim::biomarkers
