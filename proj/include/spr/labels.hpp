#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spr/error.hpp"

namespace spr {

// Pixels carrying this label are excluded from every loss and metric.
inline constexpr uint32_t kIgnoreLabel = 0xFFFFFFFFu;

// Per-pixel class ids over an H x W grid. Values are {0..C-1} or kIgnoreLabel.
struct LabelMap {
  int h = 0;
  int w = 0;
  std::vector<uint32_t> ids;

  LabelMap() = default;
  LabelMap(int h_, int w_, uint32_t fill = kIgnoreLabel)
      : h(h_), w(w_), ids(static_cast<size_t>(h_) * w_, fill) {
    if (h_ < 1 || w_ < 1) throw DimensionError("LabelMap extents must be >= 1");
  }

  size_t size() const { return ids.size(); }
  uint32_t operator()(int y, int x) const { return ids[static_cast<size_t>(y) * w + x]; }
  uint32_t& operator()(int y, int x) { return ids[static_cast<size_t>(y) * w + x]; }
  uint32_t operator[](size_t n) const { return ids[n]; }
  uint32_t& operator[](size_t n) { return ids[n]; }

  // Every non-IGNORE id must fall in [0, num_classes).
  void validate(int num_classes, const char* who) const {
    for (uint32_t id : ids) {
      if (id != kIgnoreLabel && id >= static_cast<uint32_t>(num_classes)) {
        throw DimensionError(std::string(who) + ": label id " + std::to_string(id) +
                             " out of range for C=" + std::to_string(num_classes));
      }
    }
  }

  size_t labeled_count() const {
    size_t n = 0;
    for (uint32_t id : ids) n += (id != kIgnoreLabel);
    return n;
  }
};

}  // namespace spr
