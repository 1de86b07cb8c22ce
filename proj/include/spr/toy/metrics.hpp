#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spr/labels.hpp"
#include "spr/tensor.hpp"

namespace spr::toy {

// Confusion-matrix metrics. IoU_c = TP/(TP+FP+FN); classes absent from the
// ground truth are excluded from the mean (the 0/0 case never enters mIoU).
struct Metrics {
  int num_classes = 0;
  std::vector<int64_t> confusion;    // C x C, rows = ground truth
  std::vector<double> per_class_iou; // 0 for classes absent from ground truth
  std::vector<bool> present;         // class appears in ground truth
  double miou = 0.0;
  double accuracy = 0.0;

  int64_t at(int truth, int pred) const {
    return confusion[static_cast<size_t>(truth) * num_classes + pred];
  }
};

inline Metrics evaluate_predictions(const LabelMap& truth, const LabelMap& pred,
                                    int num_classes) {
  if (truth.h != pred.h || truth.w != pred.w) {
    throw DimensionError("evaluate_predictions: label map shapes differ");
  }
  truth.validate(num_classes, "evaluate_predictions");
  pred.validate(num_classes, "evaluate_predictions");

  Metrics m;
  m.num_classes = num_classes;
  m.confusion.assign(static_cast<size_t>(num_classes) * num_classes, 0);
  m.per_class_iou.assign(static_cast<size_t>(num_classes), 0.0);
  m.present.assign(static_cast<size_t>(num_classes), false);

  int64_t correct = 0, counted = 0;
  for (size_t i = 0; i < truth.size(); ++i) {
    const uint32_t t = truth[i];
    if (t == kIgnoreLabel || pred[i] == kIgnoreLabel) continue;
    m.confusion[static_cast<size_t>(t) * num_classes + pred[i]] += 1;
    correct += (t == pred[i]);
    ++counted;
  }
  m.accuracy = counted > 0 ? static_cast<double>(correct) / counted : 0.0;

  double iou_sum = 0.0;
  int iou_classes = 0;
  for (int c = 0; c < num_classes; ++c) {
    int64_t tp = m.at(c, c), fp = 0, fn = 0;
    for (int k = 0; k < num_classes; ++k) {
      if (k == c) continue;
      fn += m.at(c, k);
      fp += m.at(k, c);
    }
    m.present[static_cast<size_t>(c)] = (tp + fn) > 0;
    if (!m.present[static_cast<size_t>(c)]) continue;
    m.per_class_iou[static_cast<size_t>(c)] =
        static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
    iou_sum += m.per_class_iou[static_cast<size_t>(c)];
    ++iou_classes;
  }
  m.miou = iou_classes > 0 ? iou_sum / iou_classes : 0.0;
  return m;
}

// Argmax predictions from H x W x C logits; ties break to the lowest class.
inline LabelMap argmax_labels(const Tensor& logits) {
  require_rank(logits, 3, "argmax_labels");
  const int h = logits.dim(0), w = logits.dim(1), c = logits.dim(2);
  LabelMap out(h, w);
  for (size_t i = 0; i < out.size(); ++i) {
    const float* row = &logits.data()[i * c];
    int best = 0;
    for (int j = 1; j < c; ++j) {
      if (row[j] > row[best]) best = j;
    }
    out[i] = static_cast<uint32_t>(best);
  }
  return out;
}

}  // namespace spr::toy
