#include "ccpath/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "callosim/augment.hpp"
#include "callosim/biomarkers.hpp"
#include "callosim/harmonize.hpp"
#include "callosim/metrics.hpp"
#include "callosim/nifti.hpp"
#include "callosim/parallel.hpp"
#include "callosim/phantom.hpp"
#include "callosim/random.hpp"
#include "callosim/resample.hpp"
#include "callosim/synthesis.hpp"
#include "callosim/version.hpp"

namespace ccpath {

namespace {

using callosim::Error;
using callosim::ErrorCode;
using nlohmann::json;
namespace fs = std::filesystem;

struct Failure {
  int code;
  std::string message;
};

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidConfig:
    case ErrorCode::InfeasibleSpec:
    case ErrorCode::GAOutOfRange:
    case ErrorCode::DegenerateDesign:
      return kConfig;
    case ErrorCode::MetadataMismatch: return kMetadata;
    case ErrorCode::UnmappedCode: return kUnmapped;
    case ErrorCode::IoError:
    case ErrorCode::MalformedHeader:
    case ErrorCode::UnsupportedDatatype:
    case ErrorCode::ObliqueAffine:
    case ErrorCode::LabelOutOfRange:
      return kReadIo;
    default: return kFailure;
  }
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{kConfig, "cannot open config " + path};
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Failure{kConfig, "cannot parse " + path + ": " + e.what()};
  }
}

template <typename Fn>
auto reading(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MetadataMismatch) throw;
    throw Failure{kReadIo, "cannot read " + path + ": " + e.what()};
  }
}

callosim::LabelVolume load_labels(const std::string& path) {
  return reading(path, [&] { return callosim::io::read_labels(path); });
}

template <typename V>
void store(const V& vol, const std::string& path) {
  try {
    callosim::io::write_volume(vol, path, callosim::io::wants_gzip(path));
  } catch (const Error& e) {
    throw Failure{kWriteIo, "cannot write " + path + ": " + e.what()};
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw Failure{kWriteIo, "cannot write " + path};
}

std::string replace_index(std::string tmpl, std::int64_t i) {
  const std::string key = "{i}";
  for (auto pos = tmpl.find(key); pos != std::string::npos; pos = tmpl.find(key, pos)) {
    const std::string n = std::to_string(i);
    tmpl.replace(pos, key.size(), n);
    pos += n.size();
  }
  return tmpl;
}

std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void print_census(std::ostream& out, const callosim::LabelVolume& vol) {
  const auto c = callosim::census(vol);
  for (int t = 0; t < callosim::kTissueCount; ++t) {
    out << t << ' ' << callosim::tissue_name(static_cast<callosim::Tissue>(t)) << ' ' << c[static_cast<std::size_t>(t)]
        << '\n';
  }
}

struct ConformOptions {
  std::vector<std::int64_t> dims{256, 256, 256};
  std::vector<double> spacing{0.5, 0.5, 0.5};
  bool skip = false;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--target-dims", dims, "Conformed grid size (one value or three)")->delimiter(',')->expected(1, 3);
    cmd.add_option("--target-spacing", spacing, "Conformed spacing in mm (one value or three)")
        ->delimiter(',')
        ->expected(1, 3);
    cmd.add_flag("--no-conform", skip, "Use the input grid as is");
  }

  callosim::LabelVolume apply(const callosim::LabelVolume& vol) const {
    if (skip) return vol;
    auto triple = [](const auto& v, const char* what) {
      if (v.size() == 1) return std::array{v[0], v[0], v[0]};
      if (v.size() == 3) return std::array{v[0], v[1], v[2]};
      throw Failure{kConfig, std::string(what) + " takes one or three values"};
    };
    return callosim::conform(vol, triple(spacing, "--target-spacing"), triple(dims, "--target-dims"));
  }
};

callosim::augment::AugmentationConfig augmentation_config(const std::string& path) {
  if (path.empty()) return {};
  const json j = read_json(path);
  return callosim::augment::config_from_json(j.contains("augmentation") ? j.at("augmentation") : j);
}

std::vector<callosim::Tissue> parse_classes(const std::string& spec) {
  if (spec == "all") return callosim::metrics::all_classes();
  if (spec == "feta") return callosim::metrics::feta_classes();
  std::vector<callosim::Tissue> out;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto t = callosim::tissue_from_name(item);
    if (!t || *t == callosim::Tissue::Background) throw Failure{kConfig, "unknown class '" + item + "'"};
    out.push_back(*t);
  }
  if (out.empty()) throw Failure{kConfig, "empty class list"};
  return out;
}

bool is_json_path(const std::string& path) { return fs::path(path).extension() == ".json"; }

// ------------------------------------------------------------ commands

struct PhantomArgs {
  std::string spec, out;
  std::optional<std::uint64_t> seed;
  bool small = false;
};

int cmd_phantom(const PhantomArgs& a, std::ostream& out) {
  callosim::phantom::PhantomSpec spec =
      a.small ? callosim::phantom::PhantomSpec::small() : callosim::phantom::PhantomSpec{};
  if (!a.spec.empty()) spec = callosim::phantom::spec_from_json(read_json(a.spec));
  if (a.seed) spec.seed = *a.seed;
  const auto vol = callosim::phantom::generate_phantom(spec);
  store(vol, a.out);
  print_census(out, vol);
  return kOk;
}

struct AugmentArgs {
  std::string in, out, config, plan_out;
  std::uint64_t seed = 0;
  ConformOptions conform;
};

int cmd_augment(const AugmentArgs& a, std::ostream& out) {
  const auto config = augmentation_config(a.config);
  const auto input = a.conform.apply(load_labels(a.in));
  const auto plan = callosim::augment::sample_plan(config, a.seed);
  const auto result = callosim::augment::apply_plan(input, plan);
  store(result.volume, a.out);
  json plan_json = callosim::augment::to_json(plan);
  plan_json["skipped"] = result.skipped;
  if (!a.plan_out.empty()) write_text(a.plan_out, plan_json.dump(2) + "\n");
  out << (plan.applied ? "applied" : "identity") << ' ' << plan.steps.size() << " step(s)\n";
  for (const auto& s : plan.steps) out << "  " << callosim::augment::describe(s) << '\n';
  for (const auto& s : result.skipped) out << "  " << s << '\n';
  return kOk;
}

struct SynthArgs {
  std::string in, out_img, out_lbl, config, manifest = "manifest.json", jsonl;
  std::uint64_t seed = 0;
  std::int64_t count = 1;
  int workers = 0;
  ConformOptions conform;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  callosim::augment::AugmentationConfig aug{};
  callosim::synth::SynthConfig syn{};
  if (!a.config.empty()) {
    const json j = read_json(a.config);
    if (!j.is_object()) throw Failure{kConfig, "synth config must be an object"};
    for (const auto& [key, value] : j.items()) {
      if (key != "augmentation" && key != "synthesis") throw Failure{kConfig, "unknown key '" + key + "' in synth config"};
    }
    if (j.contains("augmentation")) aug = callosim::augment::config_from_json(j.at("augmentation"));
    if (j.contains("synthesis")) syn = callosim::synth::config_from_json(j.at("synthesis"));
  }
  aug.validate();
  syn.validate();
  if (a.count < 0) throw Failure{kConfig, "--count must be >= 0"};
  if (a.count > 1 && (a.out_img.find("{i}") == std::string::npos || a.out_lbl.find("{i}") == std::string::npos)) {
    throw Failure{kConfig, "output paths need an {i} placeholder when --count > 1"};
  }
  const int workers = a.workers > 0 ? a.workers : callosim::default_workers();
  const json resolved = {{"augmentation", callosim::augment::to_json(aug)}, {"synthesis", callosim::synth::to_json(syn)}};

  callosim::LabelVolume input;
  if (a.count > 0) input = a.conform.apply(load_labels(a.in));

  struct Record {
    std::uint64_t seed = 0;
    callosim::augment::AugmentationPlan plan;
    std::vector<std::string> skipped;
    std::string image, labels;
  };
  std::vector<Record> records(static_cast<std::size_t>(a.count));
  callosim::parallel_for(a.count, workers, [&](std::int64_t i) {
    Record& r = records[static_cast<std::size_t>(i)];
    r.seed = callosim::derive_seed(a.seed, static_cast<std::uint64_t>(i));
    r.plan = callosim::augment::sample_plan(aug, callosim::derive_seed(r.seed, 0));
    auto augmented = callosim::augment::apply_plan(input, r.plan);
    r.skipped = std::move(augmented.skipped);
    const auto sample = callosim::synth::synthesize(augmented.volume, syn, callosim::derive_seed(r.seed, 1), 1);
    r.image = replace_index(a.out_img, i);
    r.labels = replace_index(a.out_lbl, i);
    store(sample.image, r.image);
    store(sample.labels, r.labels);
  });

  json samples = json::array();
  std::string lines;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Record& r = records[i];
    json summary = json::array();
    for (const auto& s : r.plan.steps) summary.push_back(callosim::augment::describe(s));
    json rec = {{"index", i},         {"input", a.in},       {"seed", r.seed},          {"plan", to_json(r.plan)},
                {"summary", summary}, {"image", r.image},    {"labels", r.labels},      {"skipped", r.skipped}};
    lines += json{{"input", a.in}, {"seed", r.seed}, {"image", r.image}, {"labels", r.labels}}.dump() + "\n";
    samples.push_back(std::move(rec));
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const json manifest = {{"tool", "ccpath"},
                         {"version", callosim::kVersion},
                         {"config_hash", fnv1a_hex(resolved.dump())},
                         {"config", resolved},
                         {"master_seed", a.seed},
                         {"count", a.count},
                         {"conform", a.conform.skip ? json(nullptr)
                                                    : json{{"dims", a.conform.dims}, {"spacing", a.conform.spacing}}},
                         {"samples", samples},
                         {"wall_time_s", wall}};
  write_text(a.manifest, manifest.dump(2) + "\n");
  if (!a.jsonl.empty()) write_text(a.jsonl, lines);
  out << a.count << " sample(s) in " << std::fixed << std::setprecision(2) << wall << " s\n";
  return kOk;
}

struct EvaluateArgs {
  std::string gt, pred, classes = "all", out, format, subject;
  bool merge = false;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const auto classes = parse_classes(a.classes);
  const auto gt = load_labels(a.gt);
  const auto pred = load_labels(a.pred);
  const auto report = callosim::metrics::evaluate(gt, pred, classes, a.merge, a.subject);
  const std::string format = !a.format.empty() ? a.format : is_json_path(a.out) ? "json" : "csv";
  if (format != "csv" && format != "json") throw Failure{kConfig, "--format must be csv or json"};
  const std::string text = format == "json" ? callosim::metrics::to_json(report).dump(2) + "\n"
                                            : callosim::metrics::csv_header() + "\n" + callosim::metrics::to_csv_rows(report);
  if (!a.out.empty()) {
    write_text(a.out, text);
  } else {
    out << text;
  }
  out << "gDSC=";
  if (report.gdsc.defined()) {
    out << *report.gdsc.value;
  } else {
    out << "undefined(" << report.gdsc.flag << ')';
  }
  out << " classes=" << report.classes.size() << (report.merged_cc_into_wm ? " merged-cc-wm" : "") << '\n';
  return kOk;
}

struct BiomarkerArgs {
  std::string seg, curve, gt, out, subject;
  std::optional<double> ga;
};

int cmd_biomarker(const BiomarkerArgs& a, std::ostream& out) {
  std::optional<callosim::biomarkers::NormativeCurve> curve;
  if (a.curve == "synthetic") {
    curve = callosim::biomarkers::NormativeCurve::synthetic_default();
  } else if (!a.curve.empty()) {
    curve = callosim::biomarkers::curve_from_json(read_json(a.curve));
  }
  const auto seg = load_labels(a.seg);
  std::optional<callosim::LabelVolume> gt;
  if (!a.gt.empty()) gt = load_labels(a.gt);
  const auto report =
      callosim::biomarkers::measure(seg, a.ga, curve ? &*curve : nullptr, gt ? &*gt : nullptr, a.subject);
  const std::string text = is_json_path(a.out) ? callosim::biomarkers::to_json(report).dump(2) + "\n"
                                               : callosim::biomarkers::csv_header() + "\n" +
                                                     callosim::biomarkers::to_csv_row(report);
  if (!a.out.empty()) {
    write_text(a.out, text);
  } else {
    out << text;
  }
  return kOk;
}

struct HarmonizeArgs {
  std::string in, out, map = "drawem-to-feta";
};

int cmd_harmonize(const HarmonizeArgs& a, std::ostream& out) {
  auto map = callosim::harmonize::LabelMap::builtin(a.map);
  if (!map) map = callosim::harmonize::map_from_json(read_json(a.map));
  const auto codes = reading(a.in, [&] { return callosim::io::read_codes(a.in); });
  const auto vol = callosim::harmonize::remap(codes, *map);
  store(vol, a.out);
  print_census(out, vol);
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Label-space pathology augmentation, synthesis and evaluation for fetal brain volumes", "ccpath"};
  app.set_version_flag("--version", callosim::kVersion);
  app.require_subcommand(1);

  PhantomArgs phantom;
  auto* p = app.add_subcommand("phantom", "Generate an 8-class phantom volume");
  p->add_option("--spec", phantom.spec, "Phantom spec JSON");
  p->add_option("--out", phantom.out, "Output volume")->required();
  p->add_option("--seed", phantom.seed, "Boundary noise seed (overrides --spec)");
  p->add_flag("--small", phantom.small, "96^3 at 1 mm instead of 256^3 at 0.5 mm");

  AugmentArgs augment;
  auto* a = app.add_subcommand("augment", "Sample and apply an augmentation plan");
  a->add_option("--in", augment.in, "Input label volume")->required();
  a->add_option("--out", augment.out, "Output label volume")->required();
  a->add_option("--config", augment.config, "Augmentation config JSON");
  a->add_option("--seed", augment.seed, "Plan seed");
  a->add_option("--plan-out", augment.plan_out, "Write the sampled plan as JSON");
  augment.conform.add_to(*a);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate augmented synthetic image/label pairs");
  s->add_option("--in", synth.in, "Input label volume")->required();
  s->add_option("--out-img", synth.out_img, "Image path template ({i} = sample index)")->required();
  s->add_option("--out-lbl", synth.out_lbl, "Label path template ({i} = sample index)")->required();
  s->add_option("--config", synth.config, "JSON with optional 'augmentation' and 'synthesis' sections");
  s->add_option("--seed", synth.seed, "Master seed");
  s->add_option("--count", synth.count, "Number of samples");
  s->add_option("--workers", synth.workers, "Worker threads (default: CCPATH_WORKERS or hardware)");
  s->add_option("--manifest", synth.manifest, "Run manifest path");
  s->add_option("--jsonl", synth.jsonl, "Batch manifest as JSON lines");
  synth.conform.add_to(*s);

  EvaluateArgs evaluate;
  auto* e = app.add_subcommand("evaluate", "Score a segmentation against a reference");
  e->add_option("--gt", evaluate.gt, "Reference label volume")->required();
  e->add_option("--pred", evaluate.pred, "Predicted label volume")->required();
  e->add_option("--classes", evaluate.classes, "all, feta, or a comma list of tissue names");
  e->add_flag("--merge-cc-wm", evaluate.merge, "Relabel CC as WM in both volumes first");
  e->add_option("--out", evaluate.out, "Report path (.json for JSON, otherwise CSV)");
  e->add_option("--format", evaluate.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  e->add_option("--subject", evaluate.subject, "Subject id for the report");

  BiomarkerArgs biomarker;
  auto* b = app.add_subcommand("biomarker", "Measure CC length, volume and deviations");
  b->add_option("--seg", biomarker.seg, "Segmentation")->required();
  b->add_option("--ga", biomarker.ga, "Gestational age in weeks");
  b->add_option("--curve", biomarker.curve, "Normative curve JSON, or 'synthetic'");
  b->add_option("--gt", biomarker.gt, "Reference segmentation for delta length");
  b->add_option("--out", biomarker.out, "Report path (.json for JSON, otherwise CSV)");
  b->add_option("--subject", biomarker.subject, "Subject id for the report");

  HarmonizeArgs harmonize;
  auto* h = app.add_subcommand("harmonize", "Remap a foreign label protocol onto the 8-class scheme");
  h->add_option("--in", harmonize.in, "Input code volume")->required();
  h->add_option("--out", harmonize.out, "Output label volume")->required();
  h->add_option("--map", harmonize.map, "drawem-to-feta, identity, or a label map JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*p) return cmd_phantom(phantom, out);
    if (*a) return cmd_augment(augment, out);
    if (*s) return cmd_synth(synth, out);
    if (*e) return cmd_evaluate(evaluate, out);
    if (*b) return cmd_biomarker(biomarker, out);
    if (*h) return cmd_harmonize(harmonize, out);
  } catch (const Failure& f) {
    err << "ccpath: " << f.message << '\n';
    return f.code;
  } catch (const Error& ex) {
    err << "ccpath: " << ex.what() << '\n';
    return exit_code_for(ex.code());
  } catch (const std::exception& ex) {
    err << "ccpath: " << ex.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace ccpath
