#pragma once

#include <algorithm>
#include <atomic>
#include <numeric>
#include <optional>
#include <thread>

namespace chemdist {

template <class R>
std::vector<R> run_replicas(int reps, int threads, std::uint64_t order_seed, const std::function<R(int)>& f) {
  std::vector<int> order(static_cast<std::size_t>(std::max(reps, 0)));
  std::iota(order.begin(), order.end(), 0);
  if (order_seed != 0) {
    Stream rng(order_seed, 7);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  }
  std::vector<std::optional<R>> out(order.size());
  std::vector<std::exception_ptr> errors(order.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < order.size(); k = next++) {
      const auto r = static_cast<std::size_t>(order[k]);
      try {
        out[r].emplace(f(order[k]));
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const int t = std::max(1, std::min(threads, reps));
  if (t == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < t; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> res;
  res.reserve(out.size());
  for (auto& o : out) res.push_back(std::move(*o));
  return res;
}

}  // namespace chemdist
