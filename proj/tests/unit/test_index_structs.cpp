#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "sparseopt/index_structs.hpp"

using namespace sparseopt;

namespace {

std::size_t scan_best(const std::vector<double>& keys, HeapOrder order) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < keys.size(); ++i) {
    const bool better = order == HeapOrder::max ? keys[i] > keys[best] : keys[i] < keys[best];
    if (better) best = i;
  }
  return best;
}

void check_heap_shape(const IndexedHeap& h) {
  const auto heap = h.heap();
  const auto pos = h.positions();
  for (std::size_t j = 0; j < heap.size(); ++j) REQUIRE(pos[heap[j]] == j);
  for (std::size_t j = 1; j < heap.size(); ++j) {
    const std::size_t parent = heap[(j - 1) / 2];
    const std::size_t child = heap[j];
    const double kp = h.key(parent);
    const double kc = h.key(child);
    const bool ok = h.order() == HeapOrder::max ? (kp > kc || (kp == kc && parent < child))
                                                : (kp < kc || (kp == kc && parent < child));
    REQUIRE(ok);
  }
}

}  // namespace

TEST_CASE("heap examples") {
  IndexedHeap h(std::vector<double>{1, 5, 3}, HeapOrder::max);
  CHECK(h.top() == 1);
  h.update(0, 9);
  CHECK(h.top() == 0);

  CHECK(IndexedHeap(std::vector<double>{2, 2, 1}, HeapOrder::max).top() == 0);
  CHECK(IndexedHeap(std::vector<double>{-3, 1, 0}, HeapOrder::min).top() == 0);
  CHECK_THROWS_AS(IndexedHeap(std::vector<double>{}, HeapOrder::max).top(), std::out_of_range);
}

TEST_CASE("identity update leaves the heap untouched") {
  IndexedHeap h(std::vector<double>{4, 1, 7, 7, 2}, HeapOrder::max);
  const std::vector<std::size_t> before(h.heap().begin(), h.heap().end());
  h.update(2, 7);
  h.update(4, 2);
  const std::vector<std::size_t> after(h.heap().begin(), h.heap().end());
  CHECK(before == after);
}

TEST_CASE("random updates track the scan oracle") {
  for (HeapOrder order : {HeapOrder::max, HeapOrder::min}) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> small(0, 20);  // many ties
    const std::size_t n = 257;
    std::vector<double> keys(n);
    for (auto& k : keys) k = small(rng);
    IndexedHeap h(keys, order);
    check_heap_shape(h);
    std::uniform_int_distribution<std::size_t> coord(0, n - 1);
    const std::uint64_t bound = ceil_log2(n) + 2;
    for (int step = 0; step < 1000; ++step) {
      const std::size_t i = coord(rng);
      keys[i] = small(rng);
      const auto before = h.touched();
      h.update(i, keys[i]);
      CHECK(h.touched() - before <= bound);
      REQUIRE(h.top() == scan_best(keys, order));
    }
    check_heap_shape(h);
  }
}

TEST_CASE("heap rebuild") {
  IndexedHeap h(std::vector<double>{1, 2, 3}, HeapOrder::max);
  h.rebuild(std::vector<double>{5, 0, 5});
  CHECK(h.top() == 0);
  check_heap_shape(h);
}

TEST_CASE("sum tree examples") {
  SumTree t(std::vector<double>{1, 3});
  CHECK(t.total() == 4.0);
  CHECK(t.sample(0.1) == 0);
  CHECK(t.sample(0.5) == 1);
  t.update(1, 0.0);
  CHECK(t.total() == 1.0);
  t.update(0, 1.0);
  CHECK(t.total() == 1.0);

  SumTree z(std::vector<double>{2, 0, 2});
  CHECK(z.sample(0.5) == 2);
  for (int k = 0; k < 1000; ++k) CHECK(z.sample(k / 1000.0) != 1);
  CHECK(z.sample(std::nextafter(1.0, 0.0)) == 2);
}

TEST_CASE("sum tree rejects bad input") {
  SumTree t(std::vector<double>{1, 1});
  CHECK_THROWS(t.update(0, -1.0));
  CHECK_THROWS(t.update(0, std::nan("")));
  CHECK_THROWS(t.update(5, 1.0));
  SumTree zero(std::vector<double>{0, 0});
  CHECK_THROWS_AS(zero.sample(0.3), std::domain_error);
}

TEST_CASE("sum tree total under random updates") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> w(0.0, 10.0);
  const std::size_t n = 1000;
  std::vector<double> weights(n);
  for (auto& x : weights) x = w(rng);
  SumTree t(weights);
  std::uniform_int_distribution<std::size_t> coord(0, n - 1);
  const std::uint64_t bound = ceil_log2(n) + 2;
  for (int step = 0; step < 10000; ++step) {
    const std::size_t i = coord(rng);
    weights[i] = w(rng);
    const auto before = t.touched();
    t.update(i, weights[i]);
    CHECK(t.touched() - before <= bound);
  }
  const double direct = std::accumulate(weights.begin(), weights.end(), 0.0);
  CHECK(std::abs(t.total() - direct) <= 1e-9 * direct);
  CHECK(t.max_node_drift() <= 1e-9 * t.total());
}

TEST_CASE("sampling frequencies within three standard errors") {
  const std::vector<double> weights{1, 0, 5, 2.5, 0.5, 3, 8, 0.25};
  SumTree t(weights);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int draws = 100000;
  std::vector<int> counts(weights.size(), 0);
  for (int d = 0; d < draws; ++d) ++counts[t.sample(unif(rng))];
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double p = weights[i] / t.total();
    const double se = std::sqrt(p * (1 - p) / draws);
    CHECK(std::abs(counts[i] / static_cast<double>(draws) - p) <= 3 * se + 1e-12);
  }
  CHECK(counts[1] == 0);
}

TEST_CASE("ceil_log2") {
  CHECK(ceil_log2(1) == 0);
  CHECK(ceil_log2(2) == 1);
  CHECK(ceil_log2(3) == 2);
  CHECK(ceil_log2(1024) == 10);
  CHECK(ceil_log2(1025) == 11);
}
