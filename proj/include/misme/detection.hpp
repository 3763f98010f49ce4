#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "misme/boxes.hpp"
#include "misme/error.hpp"

namespace misme::patch {

// Outcome of greedy matching at one IoU threshold. Labels follow the
// confidence-descending prediction order stored in `order`.
struct MatchResult {
  std::vector<std::size_t> order;  // indices into the prediction span
  std::vector<bool> is_tp;         // aligned with `order`
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;  // unmatched ground truths
  std::size_t n_ground_truth = 0;
};

// Greedy matcher: predictions in descending confidence, each taking the
// highest-IoU unmatched ground truth at or above the threshold; every ground
// truth matches at most once. Ties broken by earliest index for determinism.
inline MatchResult match_detections(std::span<const BoundingBox> predictions,
                                    std::span<const BoundingBox> ground_truth,
                                    double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw ContractError("match_detections: iou_threshold must be in (0, 1]");
  }
  MatchResult result;
  result.n_ground_truth = ground_truth.size();
  result.order.resize(predictions.size());
  std::iota(result.order.begin(), result.order.end(), std::size_t{0});
  std::stable_sort(result.order.begin(), result.order.end(), [&](std::size_t a, std::size_t b) {
    return predictions[a].confidence > predictions[b].confidence;
  });

  std::vector<bool> taken(ground_truth.size(), false);
  result.is_tp.resize(predictions.size(), false);
  for (std::size_t rank = 0; rank < result.order.size(); ++rank) {
    const BoundingBox& pred = predictions[result.order[rank]];
    double best = 0.0;
    std::ptrdiff_t best_gt = -1;
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (taken[g]) continue;
      const double overlap = iou(pred, ground_truth[g]);
      if (overlap >= iou_threshold && overlap > best) {
        best = overlap;
        best_gt = static_cast<std::ptrdiff_t>(g);
      }
    }
    if (best_gt >= 0) {
      taken[best_gt] = true;
      result.is_tp[rank] = true;
      ++result.tp;
    } else {
      ++result.fp;
    }
  }
  result.fn = ground_truth.size() - result.tp;
  return result;
}

struct ThresholdMetrics {
  double iou_threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double ap = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0;
};

// Detection metric bundle: one row per IoU threshold.
struct DetectionEvalReport {
  std::vector<ThresholdMetrics> per_threshold;
};

inline double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

// Metric bundle from one matching pass. AP is the all-point (non-interpolated)
// area under the precision/recall staircase built by sweeping the ranking.
inline ThresholdMetrics metrics_from_matches(const MatchResult& m) {
  ThresholdMetrics out;
  out.tp = m.tp;
  out.fp = m.fp;
  out.fn = m.fn;
  out.precision = safe_ratio(static_cast<double>(m.tp), static_cast<double>(m.tp + m.fp));
  out.recall = safe_ratio(static_cast<double>(m.tp), static_cast<double>(m.tp + m.fn));
  out.f1 = (out.precision + out.recall) == 0.0
               ? 0.0
               : 2.0 * out.precision * out.recall / (out.precision + out.recall);

  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp_so_far = 0;
  for (std::size_t rank = 0; rank < m.is_tp.size(); ++rank) {
    if (m.is_tp[rank]) ++tp_so_far;
    const double recall = safe_ratio(static_cast<double>(tp_so_far),
                                     static_cast<double>(m.n_ground_truth));
    const double precision = static_cast<double>(tp_so_far) / static_cast<double>(rank + 1);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  out.ap = ap;
  return out;
}

inline DetectionEvalReport detection_metrics(std::span<const BoundingBox> predictions,
                                             std::span<const BoundingBox> ground_truth,
                                             std::vector<double> thresholds = {0.5, 0.75, 0.90}) {
  DetectionEvalReport report;
  for (double thr : thresholds) {
    ThresholdMetrics m = metrics_from_matches(match_detections(predictions, ground_truth, thr));
    m.iou_threshold = thr;
    report.per_threshold.push_back(m);
  }
  return report;
}

}  // namespace misme::patch
