#include "cli.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>

#include "hotkit/error.hpp"
#include "hotkit/loss.hpp"
#include "hotkit/metrics.hpp"
#include "hotkit/parallel.hpp"
#include "hotkit/proximal.hpp"
#include "hotkit/regions.hpp"
#include "hotkit/synth.hpp"
#include "hotkit/tensorio.hpp"

namespace fs = std::filesystem;

namespace hotkit::cli {
namespace {

/// Raised for flag problems found after parsing; maps to exit 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string cell(std::optional<double> v) { return v ? fmt::format("{:.9f}", *v) : std::string(); }
std::string cell(double v) { return fmt::format("{:.9f}", v); }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, fmt::format("cannot open {} for writing", path.string()));
  out << text;
  if (!out) fail(ErrorKind::IoError, fmt::format("failed writing {}", path.string()));
}

std::pair<std::size_t, std::size_t> parse_size(const std::string& text) {
  static const std::regex pattern(R"((\d{1,6})x(\d{1,6}))");
  std::smatch m;
  if (!std::regex_match(text, m, pattern))
    throw UsageError(fmt::format("invalid size '{}', expected HxW", text));
  return {std::stoul(m[1]), std::stoul(m[2])};
}

/// Runs fn on every id across the OpenMP team. Results keep input order and
/// the first failure in input order is rethrown, so output never depends on
/// scheduling.
template <typename T, typename F>
std::vector<T> map_ordered(std::size_t n, F&& fn) {
  std::vector<std::optional<T>> results(n);
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      results[static_cast<std::size_t>(i)].emplace(fn(static_cast<std::size_t>(i)));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<T> out;
  out.reserve(n);
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

std::vector<std::string> require_images(const fs::path& dir) {
  auto ids = list_image_ids(dir);
  if (ids.empty())
    fail(ErrorKind::MissingFile, fmt::format("no *.gt.htf files in {}", dir.string()));
  return ids;
}

LabelMap gt_at(const DatasetEntry& e) {
  return *e.pred_resolution == PredResolution::Quarter ? downsample_labels_nearest(e.gt, 4) : e.gt;
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
  std::string data, out, pred_res;
};

int cmd_eval(const EvalOptions& o, std::ostream& out) {
  std::optional<PredResolution> want;
  if (o.pred_res == "full") want = PredResolution::Full;
  if (o.pred_res == "quarter") want = PredResolution::Quarter;

  const auto ids = require_images(o.data);
  const auto reports = map_ordered<MetricReport>(ids.size(), [&](std::size_t i) {
    const auto e = load_dataset_entry(o.data, ids[i], {.pred = true, .masks = true});
    if (want && *e.pred_resolution != *want)
      fail(ErrorKind::ShapeMismatch,
           fmt::format("{}: prediction is not at {} resolution",
                       dataset_file(o.data, ids[i], "pred").string(), o.pred_res));
    const LabelMap gt = gt_at(e);
    const BinaryGrid human = human_mask_at(*e.masks, gt.height(), gt.width());
    return std::visit([&](const auto& p) { return evaluate_image(p, gt, human); }, *e.pred);
  });

  std::string csv = "image_id,sc_acc,c_acc,miou,wiou,ad_acc";
  for (int c = 1; c <= kNumContactClasses; ++c) csv += fmt::format(",iou_c{}", c);
  csv += '\n';
  auto row = [&](const std::string& id, const MetricReport& r) {
    csv += fmt::format("{},{},{},{},{},{}", id, cell(r.sc_acc), cell(r.c_acc), cell(r.miou),
                       cell(r.wiou), cell(r.ad_acc));
    for (const auto& iou : r.per_class_iou) csv += "," + cell(iou);
    csv += '\n';
  };
  for (std::size_t i = 0; i < ids.size(); ++i) row(ids[i], reports[i]);
  const MetricReport agg = aggregate(reports);
  row("aggregate", agg);
  write_text(o.out, csv);

  auto show = [](std::optional<double> v) { return v ? fmt::format("{:.4f}", *v) : "n/a"; };
  fmt::print(out, "images {}  sc_acc {}  c_acc {}  miou {}  wiou {}  ad_acc {:.4f}\n", ids.size(),
             show(agg.sc_acc), show(agg.c_acc), show(agg.miou), show(agg.wiou), agg.ad_acc);
  return kExitOk;
}

// ---------------------------------------------------------------- loss

struct LossOptions {
  std::string data, out;
  LossWeights weights;
};

struct LossRow {
  double ce, local, global, total;
  std::optional<double> be;
};

int cmd_loss(const LossOptions& o, std::ostream& out) {
  const auto ids = require_images(o.data);
  const bool need_sim = o.weights.gamma > 0.0;
  const auto rows = map_ordered<LossRow>(ids.size(), [&](std::size_t i) {
    const auto e = load_dataset_entry(o.data, ids[i], {.pred = true, .sim = need_sim});
    const LabelMap gt = gt_at(e);
    const ProbMap probs = std::holds_alternative<ProbMap>(*e.pred)
                              ? std::get<ProbMap>(*e.pred)
                              : ProbMap::one_hot(std::get<LabelMap>(*e.pred));
    LossRow r{};
    r.ce = cross_entropy(probs, gt).value;
    r.local = local_joint_loss_soft(probs, gt).value.total;
    r.global = global_joint_loss_soft(probs).value.total;
    if (e.sim) r.be = prompt_be_loss(*e.sim, contact_indicator_from_gt(e.gt)).value;
    r.total = combine_losses(r.ce, r.local, r.global, r.be.value_or(0.0), o.weights);
    return r;
  });

  std::string csv = "image_id,ce,local_jl,global_jl,prompt_be,total\n";
  double sum = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& r = rows[i];
    csv += fmt::format("{},{},{},{},{},{}\n", ids[i], cell(r.ce), cell(r.local), cell(r.global),
                       cell(r.be), cell(r.total));
    sum += r.total;
  }
  write_text(o.out, csv);
  fmt::print(out, "images {}  mean total {:.6f}  (alpha {} beta {} gamma {})\n", ids.size(),
             sum / static_cast<double>(ids.size()), o.weights.alpha, o.weights.beta,
             o.weights.gamma);
  return kExitOk;
}

// ---------------------------------------------------------------- hpp

struct HppOptions {
  std::string data, out, mode = "soft";
  double tau = 0.1;
};

int cmd_hpp(const HppOptions& o, std::ostream& out) {
  const auto ids = require_images(o.data);
  fs::create_directories(o.out);
  const auto done = map_ordered<int>(ids.size(), [&](std::size_t i) {
    const auto e = load_dataset_entry(o.data, ids[i], {.depth = true, .masks = true});
    const DepthMap depth = normalize_depth(*e.depth);
    if (depth.is_degenerate())
      fail(ErrorKind::InvariantViolation,
           fmt::format("{}: constant depth map (degenerate normalization)",
                       dataset_file(o.data, ids[i], "depth").string()));
    const auto summary = person_mean_depth(depth, *e.masks);
    const ScalarField fm = o.mode == "hard" ? hard_filter_mask(depth, summary, o.tau)
                                            : soft_filter_mask(depth, summary, o.tau);
    write_htf(to_tensor(fm), fs::path(o.out) / fmt::format("{}.fm.htf", ids[i]));
    return 1;
  });
  fmt::print(out, "wrote {} {} filter masks (tau {}) to {}\n", done.size(), o.mode, o.tau, o.out);
  return kExitOk;
}

// ---------------------------------------------------------------- regions

struct RegionsOptions {
  std::string in, out, op;
  std::optional<int> cls;
};

int cmd_regions(const RegionsOptions& o, std::ostream& out) {
  if (o.op == "enclosed" && !o.cls) throw UsageError("--op enclosed requires --class");
  if (o.cls && (*o.cls < 1 || *o.cls > kNumContactClasses))
    throw UsageError(fmt::format("invalid class {}, expected 1..17", *o.cls));

  const Tensor input = read_htf(o.in);
  if (o.op == "components") {
    const ScalarField mask = o.cls ? binarize_class(label_map_from(input, o.in), *o.cls)
                                   : scalar_field_from(input, o.in);
    require_binary(mask, o.in.c_str());
    const ComponentMap comps = label_components(mask);
    write_htf(to_tensor(comps), o.out);
    fmt::print(out, "components {}\n", comps.count());
    return kExitOk;
  }
  const LabelMap labels = label_map_from(input, o.in);
  const ScalarField enclosed = enclosed_mask(labels, *o.cls);
  const auto boundary =
      boundary_labels(label_components(negate(binarize_class(labels, *o.cls))));
  const BinaryGrid mask = to_binary(enclosed, "enclosed mask");
  write_htf(to_tensor(mask), o.out);
  std::size_t marked = 0;
  for (auto v : mask.vec()) marked += v;
  fmt::print(out, "enclosed pixels {}  boundary labels {{{}}}\n", marked,
             fmt::join(boundary.labels(), ","));
  return kExitOk;
}

// ---------------------------------------------------------------- gradcheck

struct GradcheckOptions {
  std::uint64_t seed = 0;
  int trials = 10;
  double eps = 1e-5, tol = 1e-4;
};

int cmd_gradcheck(const GradcheckOptions& o, std::ostream& out) {
  if (o.trials <= 0) throw UsageError("--trials must be positive");
  if (!(o.eps > 0.0) || !(o.tol > 0.0)) throw UsageError("--eps and --tol must be positive");
  const auto r = run_gradcheck(o.seed, static_cast<std::size_t>(o.trials), o.eps, o.tol);
  fmt::print(out, "scenes {}  tau configurations skipped {}\n", r.checked, r.tau_skipped);
  fmt::print(out, "tau_grad       max_rel_err {:.3e}\n", r.tau);
  fmt::print(out, "local_soft     max_rel_err {:.3e}\n", r.local_soft);
  fmt::print(out, "global_soft    max_rel_err {:.3e}\n", r.global_soft);
  fmt::print(out, "cross_entropy  max_rel_err {:.3e}\n", r.cross_entropy);
  fmt::print(out, "prompt_be      max_rel_err {:.3e}\n", r.prompt_be);
  for (const auto& f : r.failures) fmt::print(out, "FAIL {}\n", f);
  fmt::print(out, "{}\n", r.passed ? "ok" : "gradient check failed");
  return r.passed ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------- synth

struct SynthOptions {
  std::string out, size = "64x64";
  int n = 8;
  std::uint64_t seed = 0;
  double noise = 0.0;
  int blobs = 0;
};

int cmd_synth(const SynthOptions& o, std::ostream& out) {
  const auto [h, w] = parse_size(o.size);
  if (o.n < 0) throw UsageError("--n must be non-negative");
  if (o.blobs < 0) throw UsageError("--blobs must be non-negative");
  if (!(o.noise >= 0.0 && o.noise <= 1.0)) throw UsageError("--noise must lie in [0, 1]");
  try {
    dataset_scene_config(o.seed, 0, h, w, o.noise, static_cast<std::size_t>(o.blobs)).validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  fs::create_directories(o.out);
  map_ordered<int>(static_cast<std::size_t>(o.n), [&](std::size_t i) {
    const auto config =
        dataset_scene_config(o.seed, i, h, w, o.noise, static_cast<std::size_t>(o.blobs));
    const Scene scene = gen_scene(config);
    DatasetEntry entry{fmt::format("img_{:05d}", i), scene.gt, {}, {}, {}, {}, {}};
    entry.pred = perturb_prediction(scene, config, 0.0);
    entry.depth = scene.depth;
    entry.masks = scene.persons;
    entry.sim = matched_similarity(scene.indicator, o.noise);
    write_dataset_entry(o.out, entry);
    return 1;
  });
  fmt::print(out, "wrote {} scenes ({}x{}) to {}\n", o.n, h, w, o.out);
  return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchOptions {
  std::string size = "2048x2048", baseline;
  int iters = 5;
  double budget_ms = 0.0;
};

double read_baseline(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::MissingFile, fmt::format("cannot open baseline {}", path.string()));
  std::string key;
  double value = 0.0;
  while (in >> key >> value)
    if (key == "pipeline_median_ms") return value;
  fail(ErrorKind::InvariantViolation,
       fmt::format("{}: no pipeline_median_ms entry", path.string()));
}

int cmd_bench(const BenchOptions& o, std::ostream& out) {
  const auto [h, w] = parse_size(o.size);
  if (h == 0 || w == 0) throw UsageError("--size must be positive");
  if (o.iters <= 0) throw UsageError("--iters must be positive");
  std::optional<double> baseline;
  if (!o.baseline.empty()) baseline = read_baseline(o.baseline);

  const BenchResult r = run_bench(h, w, static_cast<std::size_t>(o.iters));
  fmt::print(out, "size {}x{}  iters {}  threads {}\n", h, w, o.iters, num_threads());
  auto line = [&](const char* name, const Timing& t) {
    fmt::print(out, "{:<18} median_ms {:10.3f}  p95_ms {:10.3f}\n", name, t.median_ms, t.p95_ms);
  };
  line("label_components", r.label_components);
  line("enclosed_sweep", r.enclosed_sweep);
  line("evaluate_image", r.evaluate_image);
  line("soft_filter_mask", r.soft_filter_mask);
  line("pipeline", r.pipeline);

  int code = kExitOk;
  if (o.budget_ms > 0.0) {
    const bool ok = r.pipeline.median_ms < o.budget_ms;
    fmt::print(out, "budget {:.1f} ms: {}\n", o.budget_ms, ok ? "within" : "EXCEEDED");
    if (!ok) code = kExitCheckFailed;
  }
  if (baseline) {
    const bool ok = r.pipeline.median_ms <= 2.0 * *baseline;
    fmt::print(out, "baseline {:.3f} ms, gate {:.3f} ms: {}\n", *baseline, 2.0 * *baseline,
               ok ? "ok" : "REGRESSION");
    if (!ok) code = kExitCheckFailed;
  }
  return code;
}

std::optional<int> threads_from_env() {
  const char* env = std::getenv("HOTKIT_THREADS");
  if (env == nullptr || *env == '\0') return std::nullopt;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 0 || v > 4096)
    throw UsageError(fmt::format("invalid HOTKIT_THREADS value '{}'", env));
  return static_cast<int>(v);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Human-object contact toolkit: metrics, losses, depth masks and regions", "hotkit"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<int> threads;
  app.add_option("--threads", threads, "Worker threads (0 = all cores; default HOTKIT_THREADS)")
      ->check(CLI::Range(0, 4096));

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against ground truth");
  eval_cmd->add_option("--data", eval.data, "Dataset directory")->required();
  eval_cmd->add_option("--out", eval.out, "Output CSV")->required();
  eval_cmd->add_option("--pred-res", eval.pred_res, "Expected prediction resolution")
      ->check(CLI::IsMember({"full", "quarter"}));

  LossOptions loss;
  auto* loss_cmd = app.add_subcommand("loss", "Per-image loss breakdown");
  loss_cmd->add_option("--data", loss.data, "Dataset directory")->required();
  loss_cmd->add_option("--out", loss.out, "Output CSV")->required();
  loss_cmd->add_option("--alpha", loss.weights.alpha, "Local joint loss weight")->capture_default_str();
  loss_cmd->add_option("--beta", loss.weights.beta, "Global joint loss weight")->capture_default_str();
  loss_cmd->add_option("--gamma", loss.weights.gamma, "Prompt loss weight")->capture_default_str();
  loss_cmd->add_option("--tau", loss.weights.tau, "Depth band half-width")->capture_default_str();

  HppOptions hpp;
  auto* hpp_cmd = app.add_subcommand("hpp", "Write human-proximal filter masks");
  hpp_cmd->add_option("--data", hpp.data, "Dataset directory")->required();
  hpp_cmd->add_option("--out", hpp.out, "Output directory")->required();
  hpp_cmd->add_option("--tau", hpp.tau, "Depth band half-width")->capture_default_str();
  hpp_cmd->add_option("--mode", hpp.mode, "Mask form")
      ->check(CLI::IsMember({"hard", "soft"}))
      ->capture_default_str();

  RegionsOptions regions;
  auto* regions_cmd = app.add_subcommand("regions", "Component labeling and enclosed regions");
  regions_cmd->add_option("--in", regions.in, "Input HTF file")->required();
  regions_cmd->add_option("--out", regions.out, "Output HTF file")->required();
  regions_cmd->add_option("--op", regions.op, "Operation")
      ->required()
      ->check(CLI::IsMember({"components", "enclosed"}));
  regions_cmd->add_option("--class", regions.cls, "Contact class 1..17");

  GradcheckOptions grad;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  grad_cmd->add_option("--seed", grad.seed, "Scene seed")->capture_default_str();
  grad_cmd->add_option("--trials", grad.trials, "Number of scenes")->capture_default_str();
  grad_cmd->add_option("--eps", grad.eps, "Central difference step")->capture_default_str();
  grad_cmd->add_option("--tol", grad.tol, "Relative error tolerance")->capture_default_str();

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--n", synth.n, "Number of scenes")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Dataset seed")->capture_default_str();
  synth_cmd->add_option("--size", synth.size, "Scene size HxW")->capture_default_str();
  synth_cmd->add_option("--noise", synth.noise, "Label noise rate")->capture_default_str();
  synth_cmd->add_option("--blobs", synth.blobs, "Enclosed blobs per scene")->capture_default_str();

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time the core kernels");
  bench_cmd->add_option("--size", bench.size, "Scene size HxW")->capture_default_str();
  bench_cmd->add_option("--iters", bench.iters, "Timed iterations")->capture_default_str();
  bench_cmd->add_option("--baseline", bench.baseline, "Baseline file for the regression gate");
  bench_cmd->add_option("--budget-ms", bench.budget_ms, "Fail when the pipeline median exceeds this");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!threads) threads = threads_from_env();
    // Timings are quoted single-threaded unless a thread count is given.
    if (!threads && bench_cmd->parsed()) threads = 1;
    set_num_threads(threads.value_or(0));

    if (eval_cmd->parsed()) return cmd_eval(eval, out);
    if (loss_cmd->parsed()) {
      loss.weights.validate();
      return cmd_loss(loss, out);
    }
    if (hpp_cmd->parsed()) {
      if (!(hpp.tau > 0.0)) throw UsageError("--tau must be positive");
      return cmd_hpp(hpp, out);
    }
    if (regions_cmd->parsed()) return cmd_regions(regions, out);
    if (grad_cmd->parsed()) return cmd_gradcheck(grad, out);
    if (synth_cmd->parsed()) return cmd_synth(synth, out);
    if (bench_cmd->parsed()) return cmd_bench(bench, out);
  } catch (const UsageError& e) {
    fmt::print(err, "hotkit: {}\n", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    fmt::print(err, "hotkit: {}\n", e.what());
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    fmt::print(err, "hotkit: {}\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace hotkit::cli
