#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecdn/cache_net.hpp"
#include "ecdn/rng.hpp"

namespace ecdn {

enum class Strategy { Drlcm, NoMig, FirstFit, BestFit, WorstFit, Random };

Strategy strategy_from_name(const std::string& name);
const char* strategy_name(Strategy s);

// Last access slot per (cache, low content); -1 = never.
struct RecencyTracker {
  int num_caches = 0;
  int num_low = 0;
  std::vector<int64_t> last_access;

  void reset(int caches, int low) {
    num_caches = caches;
    num_low = low;
    last_access.assign(static_cast<size_t>(caches) * low, -1);
  }
  void touch(int cache, int content, int64_t slot) {
    last_access[static_cast<size_t>(cache) * num_low + content] = slot;
  }
  int64_t at(int cache, int content) const {
    return last_access[static_cast<size_t>(cache) * num_low + content];
  }
};

struct EvictionDecision {
  int victim = 0;                  // low content id
  int source = 0;                  // cache shedding the victim
  std::optional<int> destination;  // empty = deleted
};

class Environment;

// Snapshot of what an overflow decision may look at: the placement, the
// hop metric, and per-cache destination headroom (already net of pending
// high-priority reservations).
struct OverflowView {
  const PlacementState& placement;
  const std::vector<EdgeCache>& caches;
  const std::vector<Content>& low_catalog;
  const HopTable& hops;
  std::vector<double> headroom_mb;  // per cache, as a migration destination
  double target_free_mb = 0.0;
};

// The five LRU-based overflow strategies. Defined in baselines.cpp.
std::vector<EvictionDecision> baseline_decide(Strategy strategy, const OverflowView& view,
                                              const Content& incoming, int target,
                                              const RecencyTracker& tracker, RngStream& rng);
std::vector<EvictionDecision> baseline_decide(Strategy strategy, const Environment& env,
                                              const Content& incoming, int target,
                                              const RecencyTracker& tracker, RngStream& rng);

}  // namespace ecdn
