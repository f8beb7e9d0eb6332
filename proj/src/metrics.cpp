#include "hotkit/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

#include <fmt/format.h>

namespace hotkit {

namespace {

struct Counts {
  std::int64_t gt_contact = 0;    // sum GT^B
  std::int64_t exact = 0;         // gt > 0 and pred == gt
  std::int64_t contact_hit = 0;   // sum GT^B * O^B
  std::int64_t zeta = 0;          // human and gt == 0
  std::int64_t zeta_hit = 0;      // zeta * O^B
  std::array<std::int64_t, kNumClasses> inter{};
  std::array<std::int64_t, kNumClasses> pred_area{};
  std::array<std::int64_t, kNumClasses> gt_area{};
};

Counts count(const LabelMap& pred, const LabelMap& gt, const std::uint8_t* human) {
  require_same_shape(pred.height(), pred.width(), gt.height(), gt.width(), "prediction vs gt");
  const auto pd = pred.data();
  const auto gd = gt.data();
  const auto n = static_cast<std::ptrdiff_t>(gd.size());
  std::int64_t gt_contact = 0, exact = 0, contact_hit = 0, zeta = 0, zeta_hit = 0;
  std::int64_t inter[kNumClasses] = {};
  std::int64_t pred_area[kNumClasses] = {};
  std::int64_t gt_area[kNumClasses] = {};
#pragma omp parallel for schedule(static) \
    reduction(+ : gt_contact, exact, contact_hit, zeta, zeta_hit, inter[:kNumClasses], \
              pred_area[:kNumClasses], gt_area[:kNumClasses])
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    const ClassId g = gd[p];
    const ClassId o = pd[p];
    ++gt_area[g];
    ++pred_area[o];
    if (g == o) ++inter[g];
    if (g > 0) {
      ++gt_contact;
      exact += g == o;
      contact_hit += o > 0;
    } else if (human && human[p]) {
      ++zeta;
      zeta_hit += o > 0;
    }
  }
  Counts out{gt_contact, exact, contact_hit, zeta, zeta_hit, {}, {}, {}};
  for (int c = 0; c < kNumClasses; ++c) {
    out.inter[c] = inter[c];
    out.pred_area[c] = pred_area[c];
    out.gt_area[c] = gt_area[c];
  }
  return out;
}

std::optional<double> sc_from(const Counts& k) {
  if (k.gt_contact == 0) return std::nullopt;
  return 100.0 * static_cast<double>(k.exact) / static_cast<double>(k.gt_contact);
}

std::optional<double> c_from(const Counts& k) {
  if (k.gt_contact == 0) return std::nullopt;
  return 100.0 * static_cast<double>(k.contact_hit) / static_cast<double>(k.gt_contact);
}

PerClassIou iou_from(const Counts& k) {
  PerClassIou out{};
  for (int c = 1; c < kNumClasses; ++c) {
    const std::int64_t uni = k.pred_area[c] + k.gt_area[c] - k.inter[c];
    if (uni > 0) out[c - 1] = static_cast<double>(k.inter[c]) / static_cast<double>(uni);
  }
  return out;
}

std::optional<double> miou_from(const PerClassIou& iou) {
  double sum = 0.0;
  int defined = 0;
  for (const auto& v : iou) {
    if (v) {
      sum += *v;
      ++defined;
    }
  }
  if (defined == 0) return std::nullopt;
  return 100.0 * sum / defined;
}

std::optional<double> wiou_from(const Counts& k, const PerClassIou& iou) {
  if (k.gt_contact == 0) return std::nullopt;
  double acc = 0.0;
  for (int c = 1; c < kNumClasses; ++c) {
    if (k.gt_area[c] == 0) continue;
    acc += static_cast<double>(k.gt_area[c]) / static_cast<double>(k.gt_contact) * *iou[c - 1];
  }
  return 100.0 * acc;
}

double ad_from(const Counts& k) {
  const double hit = static_cast<double>(k.contact_hit) /
                     (static_cast<double>(k.gt_contact) + kAdAccDelta);
  const double false_contact = static_cast<double>(k.zeta_hit) /
                               (static_cast<double>(k.zeta) + kAdAccDelta);
  return 100.0 * (hit - false_contact);
}

MetricReport report_from(const Counts& k) {
  MetricReport r;
  const PerClassIou iou = iou_from(k);
  r.sc_acc = sc_from(k);
  r.c_acc = c_from(k);
  r.miou = miou_from(iou);
  r.wiou = wiou_from(k, iou);
  r.ad_acc = ad_from(k);
  for (int c = 0; c < kNumContactClasses; ++c)
    if (iou[c]) r.per_class_iou[c] = 100.0 * *iou[c];
  return r;
}

double require_value(const std::optional<double>& v, ErrorKind kind, const char* what) {
  if (!v) fail(kind, what);
  return *v;
}

}  // namespace

double sc_acc(const LabelMap& pred, const LabelMap& gt) {
  return require_value(sc_from(count(pred, gt, nullptr)), ErrorKind::NoContactPixels,
                       "ground truth has no contact pixels");
}

double c_acc(const LabelMap& pred, const LabelMap& gt) {
  return require_value(c_from(count(pred, gt, nullptr)), ErrorKind::NoContactPixels,
                       "ground truth has no contact pixels");
}

PerClassIou iou_per_class(const LabelMap& pred, const LabelMap& gt) {
  return iou_from(count(pred, gt, nullptr));
}

double miou(const LabelMap& pred, const LabelMap& gt) {
  return require_value(miou_from(iou_per_class(pred, gt)), ErrorKind::NoEvaluableClass,
                       "no contact class appears in prediction or ground truth");
}

double wiou(const LabelMap& pred, const LabelMap& gt) {
  const Counts k = count(pred, gt, nullptr);
  return require_value(wiou_from(k, iou_from(k)), ErrorKind::NoEvaluableClass,
                       "ground truth has no contact class");
}

double ad_acc(const LabelMap& pred, const LabelMap& gt, const ScalarField& human) {
  require_same_shape(human.height(), human.width(), gt.height(), gt.width(), "human mask vs gt");
  const BinaryGrid mask = to_binary(human, "human mask");
  return ad_from(count(pred, gt, mask.data().data()));
}

MetricReport evaluate_image(const LabelMap& pred, const LabelMap& gt, const BinaryGrid& human) {
  require_same_shape(human.height(), human.width(), gt.height(), gt.width(), "human mask vs gt");
  return report_from(count(pred, gt, human.data().data()));
}

MetricReport evaluate_image(const ProbMap& probs, const LabelMap& gt, const BinaryGrid& human) {
  return evaluate_image(argmax_labels(probs), gt, human);
}

MetricReport evaluate_image(const LabelMap& pred, const LabelMap& gt, const ScalarField& human) {
  return evaluate_image(pred, gt, to_binary(human, "human mask"));
}

MetricReport aggregate(std::span<const MetricReport> reports) {
  if (reports.empty()) fail(ErrorKind::EmptyList, "no reports to aggregate");
  // Values are summed in sorted order so the mean does not depend on the
  // order of the reports.
  struct Mean {
    std::vector<double> values;
    void add(const std::optional<double>& v) {
      if (v) values.push_back(*v);
    }
    std::optional<double> get() {
      if (values.empty()) return std::nullopt;
      std::sort(values.begin(), values.end());
      double sum = 0.0;
      for (double v : values) sum += v;
      return sum / static_cast<double>(values.size());
    }
  };
  Mean sc, ca, mi, wi, ad;
  std::array<Mean, kNumContactClasses> per{};
  for (const auto& r : reports) {
    sc.add(r.sc_acc);
    ca.add(r.c_acc);
    mi.add(r.miou);
    wi.add(r.wiou);
    ad.add(r.ad_acc);
    for (int c = 0; c < kNumContactClasses; ++c) per[c].add(r.per_class_iou[c]);
  }
  MetricReport out;
  out.sc_acc = sc.get();
  out.c_acc = ca.get();
  out.miou = mi.get();
  out.wiou = wi.get();
  out.ad_acc = *ad.get();
  for (int c = 0; c < kNumContactClasses; ++c) out.per_class_iou[c] = per[c].get();
  return out;
}

BinaryGrid human_mask_at(const PersonMaskSet& masks, std::size_t height, std::size_t width) {
  if (masks.count() == 0) return BinaryGrid(height, width, std::uint8_t{0});
  BinaryGrid full = masks.union_mask();
  if (full.same_shape(height, width)) return full;
  if (full.height() == 4 * height && full.width() == 4 * width) return max_pool_mask(full, 4);
  fail(ErrorKind::ShapeMismatch,
       fmt::format("person masks {}x{} do not match prediction {}x{} at full or quarter size",
                   full.height(), full.width(), height, width));
}

}  // namespace hotkit
