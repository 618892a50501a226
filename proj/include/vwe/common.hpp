#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <future>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace vwe {

// Error taxonomy. CLI maps these onto exit codes (usage=2, data=3, numeric=4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid value for an operation (non-positive depth, empty field, t outside
// the trajectory domain, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (unsorted stream, parse failure, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Numerical failure (non-finite objective, rank-deficient fit, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Not enough events in a window to evaluate an objective.
class InsufficientDataError : public DomainError {
 public:
  using DomainError::DomainError;
};

namespace detail {
inline std::atomic<int>& max_threads_storage() {
  static std::atomic<int> value{0};  // 0 = use hardware_concurrency
  return value;
}
}  // namespace detail

inline void set_max_threads(int n) { detail::max_threads_storage().store(n); }

inline int max_threads() {
  int n = detail::max_threads_storage().load();
  if (n > 0) return n;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs make(i) for i in [0, n) on a bounded set of workers and feeds the
// results to consume(i, result) strictly in increasing i. The consumption
// order (and therefore any floating-point reduction built on top of it) is
// independent of the worker count.
template <class Make, class Consume>
void ordered_parallel(std::size_t n, Make make, Consume consume) {
  const int workers = max_threads();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) consume(i, make(i));
    return;
  }
  using Result = decltype(make(std::size_t{0}));
  std::deque<std::future<Result>> inflight;
  std::size_t next_launch = 0;
  std::size_t next_consume = 0;
  const std::size_t window = static_cast<std::size_t>(workers) + 1;
  while (next_consume < n) {
    while (next_launch < n && inflight.size() < window) {
      inflight.push_back(
          std::async(std::launch::async, make, std::size_t{next_launch}));
      ++next_launch;
    }
    consume(next_consume, inflight.front().get());
    inflight.pop_front();
    ++next_consume;
  }
}

// FNV-1a, used to fingerprint resolved configs in run manifests.
inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace vwe
