#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sparseopt {

enum class HeapOrder { max, min };

/// Binary heap over a fixed coordinate set with an inverse-position array, so
/// the key of any coordinate can be changed in O(log n). Ties between equal
/// keys are broken towards the smaller coordinate, which makes the top a total
/// order argbest.
class IndexedHeap {
 public:
  IndexedHeap() = default;
  IndexedHeap(std::span<const double> keys, HeapOrder order);

  std::size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }
  HeapOrder order() const { return order_; }

  /// Throws std::out_of_range on an empty heap.
  std::size_t top() const;
  double key(std::size_t i) const { return keys_[i]; }
  std::span<const double> keys() const { return keys_; }

  /// Sets keys[i] and restores heap order. Throws std::out_of_range.
  void update(std::size_t i, double new_key);
  /// Replaces every key and re-heapifies in O(n).
  void rebuild(std::span<const double> keys);

  /// Heap slots visited by update() calls since construction.
  std::uint64_t touched() const { return touched_; }

  // Exposed for invariant checks.
  std::span<const std::size_t> heap() const { return heap_; }
  std::span<const std::size_t> positions() const { return pos_; }

 private:
  bool better(std::size_t a, std::size_t b) const;
  void place(std::size_t slot, std::size_t coord);
  std::size_t sift_up(std::size_t slot);
  std::size_t sift_down(std::size_t slot);
  void heapify();

  HeapOrder order_ = HeapOrder::max;
  std::vector<double> keys_;
  std::vector<std::size_t> heap_;
  std::vector<std::size_t> pos_;
  std::uint64_t touched_ = 0;
};

/// Complete binary tree of partial sums over nonnegative leaf weights, used to
/// sample a coordinate with probability proportional to its weight. Internal
/// nodes are recomputed from their children on every update, so each node is
/// exactly the floating-point sum of its two children.
class SumTree {
 public:
  SumTree() = default;
  explicit SumTree(std::span<const double> weights);

  std::size_t size() const { return n_; }
  double total() const { return nodes_.empty() ? 0.0 : nodes_[1]; }
  double weight(std::size_t i) const { return nodes_[capacity_ + i]; }

  /// Throws std::invalid_argument for negative or non-finite weight,
  /// std::out_of_range for a bad index.
  void update(std::size_t i, double w);
  void rebuild(std::span<const double> weights);

  /// Returns the leaf whose left-closed cumulative interval
  /// [sum_{j<i} w_j, sum_{j<=i} w_j) contains u * total. Zero-weight leaves
  /// are never returned. Throws std::domain_error when total is zero.
  std::size_t sample(double u) const;

  std::uint64_t touched() const { return touched_; }
  std::size_t depth() const { return depth_; }

  /// Largest |node - (left + right)| over internal nodes.
  double max_node_drift() const;

 private:
  std::size_t n_ = 0;
  std::size_t capacity_ = 1;
  std::size_t depth_ = 0;
  std::vector<double> nodes_;
  std::uint64_t touched_ = 0;
};

/// ceil(log2(n)) for n >= 1, 0 for n <= 1.
std::size_t ceil_log2(std::size_t n);

}  // namespace sparseopt
