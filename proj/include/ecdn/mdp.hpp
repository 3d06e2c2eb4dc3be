#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "ecdn/cache_net.hpp"
#include "ecdn/cost.hpp"
#include "ecdn/mobility.hpp"
#include "ecdn/rng.hpp"
#include "ecdn/strategy.hpp"

namespace ecdn {

// Flat state vector: all y rows, then all x rows, then all z matrices,
// zero-padded to the configured maxima.
struct StateVector {
  std::vector<double> values;
};

struct StateLayout {
  int max_caches = 0;
  int max_fixed = 0;
  int max_low = 0;
  int max_high = 0;

  int length() const {
    return max_caches * max_low + max_fixed * max_high +
           max_caches * max_caches * max_low;
  }
};

StateVector encode_state(const PlacementState& placement, const StateLayout& layout);
PlacementState decode_state(const StateVector& state, const StateLayout& layout,
                            int num_caches, int num_fixed, int num_low, int num_high);

struct AtomicAction {
  enum class Type { ToggleLow, ToggleHigh, AdjustRedirect, NoOp };
  Type type = Type::NoOp;
  int cache = 0;    // ToggleLow: cache id; ToggleHigh: fixed index; AdjustRedirect: serving cache
  int content = 0;  // low id / high id
  int origin = 0;   // AdjustRedirect: origin cache id
};

// Stable ordering: all ToggleLow (cache-major), all ToggleHigh, all
// AdjustRedirect (content, server, origin), then NoOp.
std::vector<AtomicAction> enumerate_atomic_actions(int num_caches, int num_fixed, int num_low,
                                                   int num_high);

double reward_value(const MigrationCost& migration, double access, double delivery,
                    const CostWeights& weights);

struct EnvConfig {
  RoadGrid grid;
  TurnPolicy turns;
  double slot_length = 1.0;
  std::vector<EdgeCache> caches;  // fixed caches first, ids 0..F-1
  std::vector<Content> low_catalog;
  std::vector<Content> high_catalog;
  DemandModel demand;
  LinkModel links;
  CostParameters cost_params;
  double high_arrival_rate = 5.0;
  int initial_full_mobiles = 8;
  int initial_targets = 5;
  int sigma = 1;
  double t_cap = 30.0;
  StateLayout layout;  // zeros -> sized to exact dimensions
  std::optional<MobilityTrace> trace;
  // When set, mobile caches get random on-road positions from the init
  // stream; otherwise the positions in `caches` are kept.
  bool randomize_mobile_positions = true;
};

struct SlotMetrics {
  MigrationCost migration;
  double access_cost = 0.0;
  double delivery_cost = 0.0;
  double reward = 0.0;
  double power_cost = 0.0;   // migration power + delivery up/download power
  double total_delay = 0.0;  // summed over requests and deliveries
  int delay_events = 0;
  int migrations = 0;  // logged downloads
  int cloud_fetches = 0;
  int requests = 0;
  int evictions = 0;
};

// One simulation instance: placement/redirection state, mobility, demand
// streams, per-slot transition and cost bookkeeping. Copyable; a copy is an
// independent deterministic continuation (used for frozen-snapshot
// evaluation).
class Environment {
 public:
  Environment(EnvConfig cfg, uint64_t seed, Strategy strategy);

  const std::vector<AtomicAction>& actions() const { return actions_; }
  int action_count() const { return static_cast<int>(actions_.size()); }
  int noop_index() const { return action_count() - 1; }
  std::vector<uint8_t> legal_mask() const;
  bool action_legal(int index) const;
  StateVector state() const { return encode_state(placement_, cfg_.layout); }

  // Full slot pipeline: forced evictions, action, request serving, high
  // delivery, costs, mobility, next arrivals, topology refresh.
  SlotMetrics step(int action_index);
  // Convenience for non-learning strategies (NoOp action every slot).
  SlotMetrics step_passive() { return step(noop_index()); }

  // read-only views
  const EnvConfig& config() const { return cfg_; }
  const PlacementState& placement() const { return placement_; }
  const std::vector<EdgeCache>& caches() const { return cfg_.caches; }
  const std::vector<Content>& low_catalog() const { return cfg_.low_catalog; }
  const std::vector<Content>& high_catalog() const { return cfg_.high_catalog; }
  const std::vector<int>& targets() const { return targets_; }
  const DominatingSet& dominating() const { return dominating_; }
  const ContactGraph& contacts() const { return contacts_; }
  const HopTable& hops() const { return hops_; }
  const RecencyTracker& recency() const { return recency_; }
  const std::vector<int>& pending_arrivals() const { return pending_arrivals_; }
  const RequestBatch& last_requests() const { return last_requests_; }
  double pending_high_mb() const;
  double phi() const { return slot_cost_.phi_cumulative; }
  const SlotCost& slot_cost() const { return slot_cost_; }
  int64_t slot() const { return slot_; }
  int num_fixed() const { return num_fixed_; }
  NetworkView network_view() const;
  SojournContext sojourn_ctx() const;
  // Free storage at a cache, accounting staged high content on fixed caches
  // and megabytes already reserved for this slot's forced evictions.
  double free_storage_mb(int cache) const;
  // Headroom available to a migration destination; targets additionally
  // reserve space for the not-yet-processed share of the pending batch.
  double destination_headroom_mb(int cache) const;
  bool is_target(int cache) const;

  std::vector<ConstraintViolation> validate() const;
  uint64_t stream_digest() const;

 private:
  void initial_placement(RngStream& init_rng);
  void refresh_topology();
  void sample_pending_arrivals();
  RequestBatch sample_requests();
  void advance_mobility();
  TransferLog forced_evictions();
  void clamp_fixed_budgets(TransferLog& log);
  void bootstrap_allowances(const TransferLog& log);
  bool allowance_budget_ok(int cache) const;
  double allowance_sum(int cache) const;
  double delivery_load(int fixed_index) const;

  EnvConfig cfg_;
  Strategy strategy_;
  int num_caches_ = 0;
  int num_fixed_ = 0;
  std::vector<AtomicAction> actions_;
  PlacementState placement_;
  std::vector<int> targets_;
  ContactGraph contacts_;
  DominatingSet dominating_;
  HopTable hops_;
  RecencyTracker recency_;
  std::vector<int> pending_arrivals_;   // high ids, delivery due this slot
  std::deque<int> arrival_backlog_;     // sampled but deferred arrivals
  std::vector<double> forced_reserved_; // per-target MB reserved during eviction phase
  std::vector<double> lambda_;          // per-content request rates
  RequestBatch last_requests_;
  SlotCost slot_cost_;
  int64_t slot_ = 0;

  RngStream mobility_rng_;
  RngStream request_rng_;
  RngStream arrival_rng_;
  RngStream strategy_rng_;
};

}  // namespace ecdn
