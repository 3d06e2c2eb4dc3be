#include "ecdn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "ecdn/log.hpp"

namespace ecdn {

Strategy strategy_from_name(const std::string& name) {
  if (name == "drlcm") return Strategy::Drlcm;
  if (name == "nomig") return Strategy::NoMig;
  if (name == "firstfit") return Strategy::FirstFit;
  if (name == "bestfit") return Strategy::BestFit;
  if (name == "worstfit") return Strategy::WorstFit;
  if (name == "random") return Strategy::Random;
  throw std::invalid_argument("unknown strategy: " + name);
}

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Drlcm: return "drlcm";
    case Strategy::NoMig: return "nomig";
    case Strategy::FirstFit: return "firstfit";
    case Strategy::BestFit: return "bestfit";
    case Strategy::WorstFit: return "worstfit";
    case Strategy::Random: return "random";
  }
  return "?";
}

std::vector<EvictionDecision> baseline_decide(Strategy strategy, const OverflowView& view,
                                              const Content& incoming, int target,
                                              const RecencyTracker& tracker, RngStream& rng) {
  const PlacementState& p = view.placement;
  std::vector<EvictionDecision> out;
  double needed = incoming.size_mb - view.target_free_mb;
  if (needed <= 0) return out;

  std::vector<int> residents;
  for (int l = 0; l < p.num_low; ++l)
    if (p.y_at(target, l)) residents.push_back(l);
  std::sort(residents.begin(), residents.end(), [&](int a, int b) {
    int64_t ta = tracker.at(target, a);
    int64_t tb = tracker.at(target, b);
    if (ta != tb) return ta < tb;
    return a < b;
  });

  std::map<int, double> claimed;  // headroom consumed by earlier decisions
  for (int victim : residents) {
    if (needed <= 1e-9) break;
    const Content& content = view.low_catalog[victim];
    std::optional<int> dest;

    if (strategy != Strategy::NoMig) {
      std::vector<int> feasible;
      for (int i = 0; i < static_cast<int>(view.caches.size()); ++i) {
        if (i == target) continue;
        if (p.y_at(i, victim)) continue;  // a copy already lives there
        double room = view.headroom_mb[i] - claimed[i];
        if (room + 1e-9 >= content.size_mb) feasible.push_back(i);
      }
      if (feasible.empty()) {
        log_at(LogLevel::Debug, "strategy %s: no destination for content %d, deleting",
               strategy_name(strategy), victim);
      } else {
        switch (strategy) {
          case Strategy::FirstFit: {
            int best = feasible.front();
            int best_h = std::numeric_limits<int>::max();
            for (int i : feasible) {
              int h = view.hops.hops(target, i);
              if (h < 0) h = std::numeric_limits<int>::max() - 1;
              if (h < best_h) {
                best_h = h;
                best = i;
              }
            }
            dest = best;
            break;
          }
          case Strategy::BestFit:
          case Strategy::WorstFit: {
            int best = feasible.front();
            double best_room = view.headroom_mb[best] - claimed[best];
            for (int i : feasible) {
              double room = view.headroom_mb[i] - claimed[i];
              bool better = strategy == Strategy::BestFit ? room < best_room - 1e-9
                                                          : room > best_room + 1e-9;
              if (better) {
                best = i;
                best_room = room;
              }
            }
            dest = best;
            break;
          }
          case Strategy::Random:
            dest = feasible[rng.uniform_int(static_cast<int>(feasible.size()))];
            break;
          default:
            break;
        }
      }
    }
    if (dest.has_value()) claimed[*dest] += content.size_mb;
    out.push_back({victim, target, dest});
    needed -= content.size_mb;
  }
  return out;
}

std::vector<EvictionDecision> baseline_decide(Strategy strategy, const Environment& env,
                                              const Content& incoming, int target,
                                              const RecencyTracker& tracker, RngStream& rng) {
  OverflowView view{env.placement(), env.caches(), env.low_catalog(), env.hops(), {}, 0.0};
  view.headroom_mb.resize(env.caches().size());
  for (size_t i = 0; i < env.caches().size(); ++i)
    view.headroom_mb[i] = env.destination_headroom_mb(static_cast<int>(i));
  view.target_free_mb = env.free_storage_mb(target);
  return baseline_decide(strategy, view, incoming, target, tracker, rng);
}

FrozenTape record_tape(const Environment& env, int horizon) {
  if (horizon < 1) throw std::invalid_argument("record_tape: horizon must be >= 1");
  Environment clone = env;
  FrozenTape tape;
  tape.slots.resize(horizon);
  for (int k = 0; k < horizon; ++k) {
    FrozenTape::Slot& slot = tape.slots[k];
    slot.caches = clone.caches();
    slot.hops = clone.hops();
    slot.dominating = clone.dominating();
    slot.pending_arrivals = clone.pending_arrivals();
    clone.step_passive();
    slot.requests = clone.last_requests();
  }
  return tape;
}

namespace {

struct PlanScorer {
  const Environment& env;
  const FrozenTape& tape;

  bool feasible(const PlacementState& candidate) const {
    const auto& low = env.low_catalog();
    const auto& high = env.high_catalog();
    for (int i = 0; i < candidate.num_caches; ++i) {
      const EdgeCache& cache = env.caches()[i];
      double stored = candidate.stored_low_mb(i, low);
      if (cache.is_fixed()) {
        stored += candidate.stored_high_mb(i, high);
        if (stored > cache.storage_mb + 1e-9) return false;
      } else if (env.is_target(i)) {
        for (const auto& slot : tape.slots) {
          double pending = 0.0;
          for (int h : slot.pending_arrivals) pending += high[h].size_mb;
          if (stored + pending > cache.storage_mb + 1e-9) return false;
        }
      } else {
        if (stored > cache.storage_mb + 1e-9) return false;
      }
    }
    // Delivery load alone must fit the fixed caches' request budgets.
    for (const auto& slot : tape.slots) {
      for (int f = 0; f < candidate.num_fixed; ++f) {
        int staged_pending = 0;
        for (int h : slot.pending_arrivals) staged_pending += candidate.x_at(f, h);
        int covered = 0;
        for (int u : slot.dominating.members)
          if (coverage_contains(slot.caches[f].coverage, slot.caches[u].position())) ++covered;
        if (static_cast<double>(staged_pending) * covered >
            env.caches()[f].max_requests() + 1e-9)
          return false;
      }
    }
    return true;
  }

  double migration_delta_cost(const PlacementState& candidate) const {
    const PlacementState& current = env.placement();
    std::vector<PlacementFlip> flips;
    for (int i = 0; i < current.num_caches; ++i)
      for (int l = 0; l < current.num_low; ++l)
        if (!current.y_at(i, l) && candidate.y_at(i, l))
          flips.push_back({PlacementFlip::Matrix::Y, i, l});
    for (int f = 0; f < current.num_fixed; ++f)
      for (int h = 0; h < current.num_high; ++h)
        if (!current.x_at(f, h) && candidate.x_at(f, h))
          flips.push_back({PlacementFlip::Matrix::X, f, h});
    for (int i = 0; i < current.num_caches; ++i)
      for (int l = 0; l < current.num_low; ++l)
        if (current.y_at(i, l) && !candidate.y_at(i, l))
          flips.push_back({PlacementFlip::Matrix::Y, i, l});
    for (int f = 0; f < current.num_fixed; ++f)
      for (int h = 0; h < current.num_high; ++h)
        if (current.x_at(f, h) && !candidate.x_at(f, h))
          flips.push_back({PlacementFlip::Matrix::X, f, h});

    PlacementState scratch = current;
    DeltaContext ctx{tape.slots.front().caches, env.low_catalog(), env.high_catalog(),
                     tape.slots.front().hops};
    TransferLog log = apply_placement_delta(scratch, flips, ctx);
    return migration_cost_slot(log, env.config().cost_params, tape.slots.front().hops,
                               tape.slots.front().caches)
        .total();
  }

  double routing_cost(const PlacementState& candidate, const FrozenTape::Slot& slot) const {
    const auto& params = env.config().cost_params;
    const auto& links = env.config().links;
    const auto& low = env.low_catalog();
    SojournContext sojourn = env.sojourn_ctx();

    // Serving budgets: R_max minus the delivery load for fixed caches.
    std::vector<int> budget(candidate.num_caches);
    for (int i = 0; i < candidate.num_caches; ++i) {
      budget[i] = slot.caches[i].max_requests();
      if (i < candidate.num_fixed) {
        int staged_pending = 0;
        for (int h : slot.pending_arrivals) staged_pending += candidate.x_at(i, h);
        int covered = 0;
        for (int u : slot.dominating.members)
          if (coverage_contains(slot.caches[i].coverage, slot.caches[u].position())) ++covered;
        budget[i] = std::max(0, budget[i] - staged_pending * covered);
      }
    }

    auto items = slot.requests.items;
    std::sort(items.begin(), items.end(),
              [](const RequestBatch::Item& a, const RequestBatch::Item& b) {
                if (a.content != b.content) return a.content < b.content;
                return a.origin < b.origin;
              });

    double total = 0.0;
    for (const auto& item : items) {
      const Content& content = low[item.content];
      double cloud_cost = params.low_delay_cost * content.size_mb * links.cloud_delay_per_mb;
      for (int r = 0; r < item.count; ++r) {
        double best_cost = cloud_cost;
        int best_server = -1;
        for (int i = 0; i < candidate.num_caches; ++i) {
          if (!candidate.y_at(i, item.content) || budget[i] <= 0) continue;
          double cost;
          if (i == item.origin) {
            cost = 0.0;
          } else {
            double bytes = transferable_bytes(slot.caches[i], slot.caches[item.origin], content,
                                              true, links.rate(i, item.origin),
                                              links.delay(i, item.origin), sojourn);
            double delay =
                bytes > 0 ? transmission_delay(i, item.origin, bytes, links) : 0.0;
            delay += (content.size_mb - bytes) * links.cloud_delay_per_mb;
            cost = params.low_delay_cost * delay;
          }
          if (cost < best_cost - 1e-12) {
            best_cost = cost;
            best_server = i;
          }
        }
        if (best_server >= 0) --budget[best_server];
        total += best_cost;
      }
    }
    return total;
  }

  double delivery_cost(const PlacementState& candidate, const FrozenTape::Slot& slot) const {
    NetworkView view{slot.caches,       env.low_catalog(), env.high_catalog(),
                     env.config().links, slot.hops,         env.sojourn_ctx()};
    return high_priority_delivery_cost(candidate, slot.dominating, slot.pending_arrivals,
                                       env.config().cost_params, view)
        .cost;
  }

  double total_cost(const PlacementState& candidate) const {
    const CostWeights& w = env.config().cost_params.weights;
    double cost = w.migration * migration_delta_cost(candidate);
    for (const auto& slot : tape.slots) {
      cost += w.access * routing_cost(candidate, slot);
      cost += w.delivery * delivery_cost(candidate, slot);
    }
    return cost;
  }
};

}  // namespace

double plan_cost_on_tape(const Environment& env, const FrozenTape& tape,
                         const PlacementState& candidate) {
  return PlanScorer{env, tape}.total_cost(candidate);
}

OptimalPlan exhaustive_optimal(const Environment& env, int horizon, uint64_t plan_bound) {
  const PlacementState& current = env.placement();
  const int y_bits = current.num_caches * current.num_low;
  const int x_bits = current.num_fixed * current.num_high;
  const int bits = y_bits + x_bits;
  if (bits >= 63 || (1ull << bits) > plan_bound)
    throw std::runtime_error(
        "exhaustive_optimal: search space exceeds bound; use a smaller scenario");

  FrozenTape tape = record_tape(env, horizon);
  PlanScorer scorer{env, tape};

  OptimalPlan best;
  best.cost = std::numeric_limits<double>::infinity();
  const uint64_t count = 1ull << bits;
  for (uint64_t mask = 0; mask < count; ++mask) {
    PlacementState candidate(current.num_caches, current.num_fixed, current.num_low,
                             current.num_high);
    for (int b = 0; b < y_bits; ++b)
      if (mask & (1ull << b)) candidate.y[b] = 1;
    for (int b = 0; b < x_bits; ++b)
      if (mask & (1ull << (y_bits + b))) candidate.x[b] = 1;
    if (!scorer.feasible(candidate)) continue;
    double cost = scorer.total_cost(candidate);
    ++best.evaluated;
    if (cost < best.cost - 1e-12) {
      best.cost = cost;
      best.placement = candidate;
    }
  }
  if (!std::isfinite(best.cost))
    throw std::runtime_error("exhaustive_optimal: no feasible placement");
  return best;
}

}  // namespace ecdn
