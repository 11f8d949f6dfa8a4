#ifndef BG2LAB_FENWICK_HPP
#define BG2LAB_FENWICK_HPP

#include <cstddef>
#include <vector>

namespace bg2lab {

/// Fenwick (binary indexed) tree over nonnegative rates.  set() and sample()
/// are O(log n); sample(u) returns the first index whose cumulative sum
/// exceeds u.
class FenwickTree {
 public:
  void init(int size) {
    size_ = size;
    // internal arrays are 1-indexed
    tree_.assign(static_cast<std::size_t>(size) + 1, 0.0);
    leaf_.assign(static_cast<std::size_t>(size) + 1, 0.0);
    top_ = 1;
    while (top_ * 2 <= size_) top_ *= 2;
  }

  int size() const { return size_; }
  double get(int i) const { return leaf_[static_cast<std::size_t>(i) + 1]; }

  void set(int i, double v) {
    const std::size_t k = static_cast<std::size_t>(i) + 1;
    const double delta = v - leaf_[k];
    if (delta == 0.0) return;
    leaf_[k] = v;
    for (std::size_t j = k; j <= static_cast<std::size_t>(size_); j += j & (~j + 1))
      tree_[j] += delta;
  }

  double total() const {
    double s = 0;
    for (std::size_t j = static_cast<std::size_t>(size_); j > 0; j -= j & (~j + 1)) s += tree_[j];
    return s;
  }

  /// First index i with cumulative(i) > u.  Caller guarantees 0 <= u < total().
  int sample(double u) const {
    std::size_t pos = 0;
    for (int bit = top_; bit > 0; bit >>= 1) {
      const std::size_t next = pos + static_cast<std::size_t>(bit);
      if (next <= static_cast<std::size_t>(size_) && tree_[next] <= u) {
        u -= tree_[next];
        pos = next;
      }
    }
    int idx = static_cast<int>(pos);  // leaf index (0-based) is pos
    // rounding in the partial sums can land on a zero-rate leaf; step to the
    // next live one deterministically
    while (idx < size_ && leaf_[static_cast<std::size_t>(idx) + 1] == 0.0) ++idx;
    if (idx >= size_) {
      idx = size_ - 1;
      while (idx > 0 && leaf_[static_cast<std::size_t>(idx) + 1] == 0.0) --idx;
    }
    return idx;
  }

 private:
  int size_ = 0;
  int top_ = 1;
  std::vector<double> tree_;
  std::vector<double> leaf_;
};

}  // namespace bg2lab

#endif
