#include "sparseopt/index_structs.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sparseopt {

std::size_t ceil_log2(std::size_t n) {
  std::size_t d = 0;
  while ((std::size_t{1} << d) < n) ++d;
  return d;
}

// ---------------------------------------------------------------------------
// IndexedHeap

IndexedHeap::IndexedHeap(std::span<const double> keys, HeapOrder order) : order_(order) {
  rebuild(keys);
}

bool IndexedHeap::better(std::size_t a, std::size_t b) const {
  const double ka = keys_[a];
  const double kb = keys_[b];
  if (ka != kb) return order_ == HeapOrder::max ? ka > kb : ka < kb;
  return a < b;
}

void IndexedHeap::place(std::size_t slot, std::size_t coord) {
  heap_[slot] = coord;
  pos_[coord] = slot;
}

std::size_t IndexedHeap::sift_up(std::size_t slot) {
  std::size_t steps = 0;
  const std::size_t coord = heap_[slot];
  while (slot > 0) {
    const std::size_t parent = (slot - 1) / 2;
    if (!better(coord, heap_[parent])) break;
    place(slot, heap_[parent]);
    slot = parent;
    ++steps;
  }
  place(slot, coord);
  return steps;
}

std::size_t IndexedHeap::sift_down(std::size_t slot) {
  std::size_t steps = 0;
  const std::size_t n = heap_.size();
  const std::size_t coord = heap_[slot];
  while (true) {
    const std::size_t left = 2 * slot + 1;
    if (left >= n) break;
    std::size_t child = left;
    if (left + 1 < n && better(heap_[left + 1], heap_[left])) child = left + 1;
    if (!better(heap_[child], coord)) break;
    place(slot, heap_[child]);
    slot = child;
    ++steps;
  }
  place(slot, coord);
  return steps;
}

void IndexedHeap::heapify() {
  const std::size_t n = heap_.size();
  for (std::size_t s = n / 2; s-- > 0;) sift_down(s);
}

void IndexedHeap::rebuild(std::span<const double> keys) {
  keys_.assign(keys.begin(), keys.end());
  heap_.resize(keys_.size());
  pos_.resize(keys_.size());
  std::iota(heap_.begin(), heap_.end(), std::size_t{0});
  std::iota(pos_.begin(), pos_.end(), std::size_t{0});
  heapify();
}

std::size_t IndexedHeap::top() const {
  if (heap_.empty()) throw std::out_of_range("IndexedHeap::top on empty heap");
  return heap_[0];
}

void IndexedHeap::update(std::size_t i, double new_key) {
  if (i >= keys_.size()) {
    throw std::out_of_range("IndexedHeap::update index " + std::to_string(i));
  }
  ++touched_;
  const double old = keys_[i];
  if (old == new_key) return;
  keys_[i] = new_key;
  const bool improved = order_ == HeapOrder::max ? new_key > old : new_key < old;
  touched_ += improved ? sift_up(pos_[i]) : sift_down(pos_[i]);
}

// ---------------------------------------------------------------------------
// SumTree

SumTree::SumTree(std::span<const double> weights) { rebuild(weights); }

void SumTree::rebuild(std::span<const double> weights) {
  n_ = weights.size();
  depth_ = ceil_log2(n_);
  capacity_ = std::size_t{1} << depth_;
  nodes_.assign(2 * capacity_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw std::invalid_argument("SumTree weight must be finite and nonnegative");
    }
    nodes_[capacity_ + i] = weights[i];
  }
  for (std::size_t j = capacity_; j-- > 1;) nodes_[j] = nodes_[2 * j] + nodes_[2 * j + 1];
}

void SumTree::update(std::size_t i, double w) {
  if (i >= n_) throw std::out_of_range("SumTree::update index " + std::to_string(i));
  if (!(w >= 0.0) || !std::isfinite(w)) {
    throw std::invalid_argument("SumTree weight must be finite and nonnegative");
  }
  std::size_t j = capacity_ + i;
  ++touched_;
  if (nodes_[j] == w) return;
  nodes_[j] = w;
  for (j /= 2; j >= 1; j /= 2) {
    nodes_[j] = nodes_[2 * j] + nodes_[2 * j + 1];
    ++touched_;
  }
}

std::size_t SumTree::sample(double u) const {
  if (!(total() > 0.0)) throw std::domain_error("SumTree::sample with zero total");
  double target = u * total();
  std::size_t j = 1;
  while (j < capacity_) {
    const double left = nodes_[2 * j];
    const double right = nodes_[2 * j + 1];
    if (target < left) {
      j = 2 * j;
    } else if (right > 0.0) {
      target -= left;
      j = 2 * j + 1;
    } else {
      // Rounding pushed the target past a zero-weight right subtree.
      j = 2 * j;
    }
  }
  return j - capacity_;
}

double SumTree::max_node_drift() const {
  double drift = 0.0;
  for (std::size_t j = 1; j < capacity_; ++j) {
    drift = std::max(drift, std::abs(nodes_[j] - (nodes_[2 * j] + nodes_[2 * j + 1])));
  }
  return drift;
}

}  // namespace sparseopt
