#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "error.hpp"

namespace mlcl {

/// Fixed-width bitset over a label space of size l.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::size_t width) : width_(width), bits_((width + 63) / 64, 0) {}

  static LabelSet from_indices(std::size_t width, std::initializer_list<std::size_t> indices) {
    LabelSet s(width);
    for (auto i : indices) s.set(i);
    return s;
  }

  std::size_t width() const { return width_; }

  bool test(std::size_t i) const {
    check_index(i);
    return (bits_[i / 64] >> (i % 64)) & 1u;
  }

  void set(std::size_t i, bool value = true) {
    check_index(i);
    const std::uint64_t mask = std::uint64_t{1} << (i % 64);
    if (value) {
      bits_[i / 64] |= mask;
    } else {
      bits_[i / 64] &= ~mask;
    }
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bits_) n += static_cast<std::size_t>(std::popcount(b));
    return n;
  }

  bool any() const { return count() > 0; }

  std::vector<std::size_t> active() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < width_; ++i) {
      if (test(i)) out.push_back(i);
    }
    return out;
  }

  bool operator==(const LabelSet& other) const = default;

  friend std::size_t intersection_count(const LabelSet& a, const LabelSet& b) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.bits_.size(); ++i) {
      n += static_cast<std::size_t>(std::popcount(a.bits_[i] & b.bits_[i]));
    }
    return n;
  }

  friend std::size_t union_count(const LabelSet& a, const LabelSet& b) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.bits_.size(); ++i) {
      n += static_cast<std::size_t>(std::popcount(a.bits_[i] | b.bits_[i]));
    }
    return n;
  }

 private:
  void check_index(std::size_t i) const {
    if (i >= width_) fail(ErrorCode::kInvalidArgument, "label index out of range");
  }

  std::size_t width_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// |a ∩ b| / |a ∪ b|. Requires equal widths and at least one non-empty set.
double jaccard_coefficient(const LabelSet& a, const LabelSet& b);

}  // namespace mlcl
