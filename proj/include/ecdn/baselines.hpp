#pragma once

#include <cstdint>
#include <vector>

#include "ecdn/mdp.hpp"

namespace ecdn {

// Placement-independent realization of the upcoming slots of an environment:
// cache positions, topology, request and arrival batches. Extracted from a
// frozen copy so candidate plans and policies can be scored on identical
// randomness.
struct FrozenTape {
  struct Slot {
    std::vector<EdgeCache> caches;  // positions as of serving time
    HopTable hops;
    DominatingSet dominating;
    RequestBatch requests;
    std::vector<int> pending_arrivals;
  };
  std::vector<Slot> slots;
};

FrozenTape record_tape(const Environment& env, int horizon);

struct OptimalPlan {
  PlacementState placement;
  double cost = 0.0;
  uint64_t evaluated = 0;
};

// Exhaustive search over all feasible (y, x) assignments applied at the
// snapshot and held for `horizon` slots, with greedy-optimal request routing
// and the standard delivery rule; returns the cheapest plan (ties -> lowest
// lexicographic bit pattern). Throws std::runtime_error when the search
// space exceeds plan_bound.
OptimalPlan exhaustive_optimal(const Environment& env, int horizon = 1,
                               uint64_t plan_bound = 10000000ull);

// Cost of one explicit placement on the frozen tape (exposed for tests).
double plan_cost_on_tape(const Environment& env, const FrozenTape& tape,
                         const PlacementState& candidate);

}  // namespace ecdn
