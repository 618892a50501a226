#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "vwe/common.hpp"

namespace vwe {

// One sensor event. Polarity is carried through but no objective uses it.
struct Event {
  double t = 0.0;   // seconds
  double x = 0.0;   // pixel column
  double y = 0.0;   // pixel row
  int polarity = 1; // +1 or -1
};

using EventSpan = std::span<const Event>;

inline bool is_sorted_by_time(EventSpan events) {
  for (std::size_t i = 1; i < events.size(); ++i)
    if (events[i].t < events[i - 1].t) return false;
  return true;
}

// Index range [first, last) of events with t in [t_lo, t_hi].
inline std::pair<std::size_t, std::size_t> time_range(EventSpan events,
                                                      double t_lo,
                                                      double t_hi) {
  auto lo = std::lower_bound(events.begin(), events.end(), t_lo,
                             [](const Event& e, double v) { return e.t < v; });
  auto hi = std::upper_bound(events.begin(), events.end(), t_hi,
                             [](double v, const Event& e) { return v < e.t; });
  return {static_cast<std::size_t>(lo - events.begin()),
          static_cast<std::size_t>(hi - events.begin())};
}

}  // namespace vwe
