#ifndef EPINET_DETAIL_FENWICK_HPP
#define EPINET_DETAIL_FENWICK_HPP

#include <algorithm>
#include <cstddef>
#include <vector>

namespace epinet::detail {

// Binary indexed tree over non-negative weights with weighted selection.
template <class T>
class Fenwick {
 public:
  Fenwick() = default;
  explicit Fenwick(std::size_t n) { reset(n); }

  void reset(std::size_t n) {
    tree_.assign(n + 1, T{});
    value_.assign(n, T{});
    total_ = T{};
    top_ = 1;
    while (top_ * 2 <= n) top_ *= 2;
  }

  std::size_t size() const { return value_.size(); }
  T total() const { return total_; }
  T get(std::size_t i) const { return value_[i]; }

  void set(std::size_t i, T v) { add(i, v - value_[i]); }

  void add(std::size_t i, T delta) {
    value_[i] += delta;
    total_ += delta;
    for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += delta;
  }

  // Smallest i with prefix(i + 1) > target, for target in [0, total()).
  // Entries with zero weight are never returned.
  std::size_t find(T target) const {
    std::size_t pos = 0;
    for (std::size_t step = top_; step > 0; step >>= 1) {
      const std::size_t next = pos + step;
      if (next < tree_.size() && tree_[next] <= target) {
        pos = next;
        target -= tree_[next];
      }
    }
    // Floating round-off may land on a trailing zero entry.
    std::size_t i = pos < value_.size() ? pos : value_.size() - 1;
    while (i > 0 && !(value_[i] > T{})) --i;
    while (i + 1 < value_.size() && !(value_[i] > T{})) ++i;
    return i;
  }

  // Rebuild from the stored values; clears accumulated round-off.
  void rebuild() {
    std::fill(tree_.begin(), tree_.end(), T{});
    total_ = T{};
    for (std::size_t i = 0; i < value_.size(); ++i) {
      total_ += value_[i];
      for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += value_[i];
    }
  }

 private:
  std::vector<T> tree_;
  std::vector<T> value_;
  T total_{};
  std::size_t top_ = 1;
};

}  // namespace epinet::detail

#endif  // EPINET_DETAIL_FENWICK_HPP
