#include "callosim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "callosim/distance.hpp"
#include "callosim/harmonize.hpp"
#include "callosim/morphology.hpp"
#include "text.hpp"

namespace callosim::metrics {

using nlohmann::json;

ConfusionCounts confusion(const LabelVolume& gt, const LabelVolume& pred) {
  if (gt.geometry() != pred.geometry()) throw Error(ErrorCode::MetadataMismatch, "gt and prediction geometries differ");
  ConfusionCounts counts;
  for (std::size_t n = 0; n < gt.size(); ++n) {
    const auto g = code(gt[n]), p = code(pred[n]);
    if (g == p) {
      ++counts.per_class[g].tp;
    } else {
      ++counts.per_class[g].fn;
      ++counts.per_class[p].fp;
    }
  }
  return counts;
}

GeneralizedDice generalized_dice(const ConfusionCounts& counts, const std::vector<Tissue>& classes) {
  if (classes.empty()) throw Error(ErrorCode::InvalidArgument, "generalized dice needs at least one class");
  GeneralizedDice out;
  double num = 0.0, den = 0.0;
  for (Tissue t : classes) {
    const ClassCounts& c = counts.per_class[code(t)];
    if (c.gt_size() == 0) {
      out.excluded.push_back(t);
      continue;
    }
    const double g = double(c.gt_size());
    const double w = 1.0 / (g * g);
    num += w * double(c.tp);
    den += w * double(2 * c.tp + c.fp + c.fn);
  }
  if (out.excluded.size() == classes.size()) {
    throw Error(ErrorCode::AllClassesAbsent, "no evaluated class is present in the ground truth");
  }
  out.value = 2.0 * num / den;
  return out;
}

GeneralizedDice generalized_dice(const LabelVolume& gt, const LabelVolume& pred, const std::vector<Tissue>& classes) {
  return generalized_dice(confusion(gt, pred), classes);
}

namespace {

struct Overlap {
  std::uint64_t a = 0, b = 0, both = 0;
};

Overlap overlap(const BinaryMask& gt, const BinaryMask& pred) {
  if (gt.geometry() != pred.geometry()) throw Error(ErrorCode::MetadataMismatch, "mask geometries differ");
  Overlap o;
  for (std::size_t n = 0; n < gt.size(); ++n) {
    const bool g = gt[n] != 0, p = pred[n] != 0;
    o.a += g;
    o.b += p;
    o.both += g && p;
  }
  return o;
}

std::string emptiness(const Overlap& o) {
  if (o.a == 0 && o.b == 0) return "both-empty";
  if (o.a == 0) return "gt-empty";
  if (o.b == 0) return "pred-empty";
  return {};
}

}  // namespace

Measure dice(const BinaryMask& gt, const BinaryMask& pred) {
  const Overlap o = overlap(gt, pred);
  if (o.a == 0 && o.b == 0) return Measure::undefined("both-empty");
  return Measure::of(2.0 * double(o.both) / double(o.a + o.b), emptiness(o));
}

Measure volume_similarity(const BinaryMask& gt, const BinaryMask& pred) {
  const Overlap o = overlap(gt, pred);
  if (o.a == 0 && o.b == 0) return Measure::undefined("both-empty");
  const double diff = o.a > o.b ? double(o.a - o.b) : double(o.b - o.a);
  return Measure::of(1.0 - diff / double(o.a + o.b), emptiness(o));
}

double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::InvalidArgument, "percentile of an empty sample");
  const double pos = q / 100.0 * double(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - double(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Measure hd95(const BinaryMask& gt, const BinaryMask& pred) {
  if (gt.geometry() != pred.geometry()) throw Error(ErrorCode::MetadataMismatch, "mask geometries differ");
  const bool ge = foreground_box(gt).empty(), pe = foreground_box(pred).empty();
  if (ge || pe) return Measure::undefined(ge && pe ? "both-empty" : ge ? "gt-empty" : "pred-empty");
  auto d = surface_distances(gt, pred);
  std::sort(d.a_to_b.begin(), d.a_to_b.end());
  std::sort(d.b_to_a.begin(), d.b_to_a.end());
  return Measure::of(std::max(percentile(d.a_to_b, 95.0), percentile(d.b_to_a, 95.0)));
}

std::int64_t euler_difference(const BinaryMask& mask, const BettiTriple& reference) {
  return std::abs(reference.euler() - euler_characteristic(mask));
}

std::vector<Tissue> all_classes() {
  return {Tissue::CSF, Tissue::GM, Tissue::WM, Tissue::VM, Tissue::CBM, Tissue::SGM, Tissue::BSM, Tissue::CC};
}

std::vector<Tissue> feta_classes() {
  return {Tissue::CSF, Tissue::GM, Tissue::WM, Tissue::VM, Tissue::CBM, Tissue::SGM, Tissue::BSM};
}

SegReport evaluate(const LabelVolume& gt_in, const LabelVolume& pred_in, std::vector<Tissue> classes,
                   bool merge_cc_into_wm, std::string subject) {
  if (gt_in.geometry() != pred_in.geometry()) {
    throw Error(ErrorCode::MetadataMismatch, "gt and prediction geometries differ");
  }
  const LabelVolume gt = merge_cc_into_wm ? harmonize::merge_cc_into_wm(gt_in) : gt_in;
  const LabelVolume pred = merge_cc_into_wm ? harmonize::merge_cc_into_wm(pred_in) : pred_in;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (merge_cc_into_wm) std::erase(classes, Tissue::CC);

  SegReport report;
  report.subject = std::move(subject);
  report.merged_cc_into_wm = merge_cc_into_wm;
  report.classes = classes;
  if (classes.empty()) {
    report.gdsc = Measure::undefined("no-classes");
    return report;
  }
  try {
    const GeneralizedDice g = generalized_dice(confusion(gt, pred), classes);
    std::string note;
    for (Tissue t : g.excluded) note += (note.empty() ? "excluded:" : "+") + std::string(tissue_name(t));
    report.gdsc = Measure::of(g.value, note);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::AllClassesAbsent) throw;
    report.gdsc = Measure::undefined("all-classes-absent");
  }

  for (Tissue t : classes) {
    const BinaryMask g = extract_mask(gt, t), p = extract_mask(pred, t);
    ClassReport row{t, dice(g, p), hd95(g, p), volume_similarity(g, p), std::nullopt};
    if (t == Tissue::CC) row.ed = euler_difference(p);
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<ClassAggregate> aggregate(const std::vector<SegReport>& reports) {
  std::array<std::optional<ClassAggregate>, kTissueCount> acc;
  auto add = [](const Measure& m, double& sum, std::size_t& n, std::size_t& excluded) {
    if (m.defined()) {
      sum += *m.value;
      ++n;
    } else {
      ++excluded;
    }
  };
  for (const auto& r : reports) {
    for (const auto& row : r.rows) {
      auto& a = acc[code(row.label)];
      if (!a) a = ClassAggregate{row.label};
      add(row.dice, a->mean_dice, a->n_dice, a->excluded_dice);
      add(row.hd95_mm, a->mean_hd95_mm, a->n_hd95, a->excluded_hd95);
      add(row.vs, a->mean_vs, a->n_vs, a->excluded_vs);
    }
  }
  std::vector<ClassAggregate> out;
  for (auto& a : acc) {
    if (!a) continue;
    if (a->n_dice) a->mean_dice /= double(a->n_dice);
    if (a->n_hd95) a->mean_hd95_mm /= double(a->n_hd95);
    if (a->n_vs) a->mean_vs /= double(a->n_vs);
    out.push_back(*a);
  }
  return out;
}

// ------------------------------------------------------------- output

namespace {

std::string cell(const Measure& m) { return m.defined() ? detail::format_number(*m.value) : std::string{}; }

std::string row_flags(const ClassReport& row, const Measure& gdsc) {
  std::string flags;
  auto add = [&](std::string_view name, const Measure& m) {
    if (m.flag.empty()) return;
    if (!flags.empty()) flags += ';';
    flags += std::string(name) + ':' + m.flag;
  };
  add("dice", row.dice);
  add("hd95", row.hd95_mm);
  add("vs", row.vs);
  add("gdsc", gdsc);
  return flags;
}

json measure_json(const Measure& m) {
  json j = {{"value", m.defined() ? json(*m.value) : json(nullptr)}};
  if (!m.flag.empty()) j["flag"] = m.flag;
  return j;
}

}  // namespace

std::string csv_header() { return "subject,class,label,dice,hd95_mm,vs,ed,gdsc,flags"; }

std::string to_csv_rows(const SegReport& report) {
  std::ostringstream os;
  for (const auto& row : report.rows) {
    os << detail::csv_field(report.subject) << ',' << tissue_name(row.label) << ',' << int(code(row.label)) << ','
       << cell(row.dice) << ',' << cell(row.hd95_mm) << ',' << cell(row.vs) << ','
       << (row.ed ? std::to_string(*row.ed) : std::string{}) << ',' << cell(report.gdsc) << ','
       << detail::csv_field(row_flags(row, report.gdsc)) << '\n';
  }
  return os.str();
}

json to_json(const SegReport& report) {
  json classes = json::array();
  for (Tissue t : report.classes) classes.push_back(tissue_name(t));
  json rows = json::array();
  for (const auto& row : report.rows) {
    json r = {{"class", tissue_name(row.label)},
              {"label", code(row.label)},
              {"dice", measure_json(row.dice)},
              {"hd95_mm", measure_json(row.hd95_mm)},
              {"vs", measure_json(row.vs)}};
    if (row.ed) r["ed"] = *row.ed;
    rows.push_back(std::move(r));
  }
  return {{"subject", report.subject},
          {"merged_cc_into_wm", report.merged_cc_into_wm},
          {"classes", classes},
          {"gdsc", measure_json(report.gdsc)},
          {"rows", rows}};
}

}  // namespace callosim::metrics
