#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ecdn/mobility.hpp"

namespace ecdn {

enum class CacheKind { FixedStraight, FixedIntersection, Mobile };

struct EdgeCache {
  int id = 0;
  CacheKind kind = CacheKind::Mobile;
  double storage_mb = 0.0;       // L_stor
  double processing_units = 0.0; // L_proc
  double units_per_request = 0.0;
  CoverageDisc coverage;         // center tracks kinematics for mobile caches
  VehicleKinematics kinematics;  // meaningful for mobile caches only

  bool is_fixed() const { return kind != CacheKind::Mobile; }
  Vec2 position() const { return coverage.center; }
  Vec2 velocity() const {
    if (is_fixed()) return {0, 0};
    return kinematics.speed * heading_vector(kinematics.heading);
  }
  int max_requests() const;  // R_max = floor(L_proc / W)
  SojournBody body() const;
};

enum class Priority { Low, High };

struct Content {
  int id = 0;
  Priority priority = Priority::Low;
  double size_mb = 0.0;
  int popularity_rank = 0;  // 1-based; low-priority contents only
};

// Realization matrices: y (low placement, N x CL), x (high placement on
// fixed caches, F x CH) and z (request redirection counts, per low content
// an N x N integer matrix; z[l](server, origin)).
struct PlacementState {
  int num_caches = 0;
  int num_fixed = 0;
  int num_low = 0;
  int num_high = 0;
  std::vector<uint8_t> y;
  std::vector<uint8_t> x;
  std::vector<int> z;

  PlacementState() = default;
  PlacementState(int caches, int fixed, int low, int high)
      : num_caches(caches),
        num_fixed(fixed),
        num_low(low),
        num_high(high),
        y(static_cast<size_t>(caches) * low, 0),
        x(static_cast<size_t>(fixed) * high, 0),
        z(static_cast<size_t>(low) * caches * caches, 0) {}

  uint8_t& y_at(int cache, int low) { return y[static_cast<size_t>(cache) * num_low + low]; }
  uint8_t y_at(int cache, int low) const { return y[static_cast<size_t>(cache) * num_low + low]; }
  uint8_t& x_at(int fixed, int high) { return x[static_cast<size_t>(fixed) * num_high + high]; }
  uint8_t x_at(int fixed, int high) const { return x[static_cast<size_t>(fixed) * num_high + high]; }
  int& z_at(int low, int server, int origin) {
    return z[(static_cast<size_t>(low) * num_caches + server) * num_caches + origin];
  }
  int z_at(int low, int server, int origin) const {
    return z[(static_cast<size_t>(low) * num_caches + server) * num_caches + origin];
  }

  // Total low-priority megabytes stored at a cache.
  double stored_low_mb(int cache, const std::vector<Content>& low_catalog) const;
  // Total staged high-priority megabytes at a fixed cache.
  double stored_high_mb(int fixed_index, const std::vector<Content>& high_catalog) const;
};

struct RequestBatch {
  struct Item {
    int content = 0;  // low content id
    int origin = 0;   // cache id where the requests arrive
    int count = 0;
  };
  std::vector<Item> items;
  int total() const;
};

struct ContactGraph {
  std::vector<int> nodes;                   // cache ids
  std::vector<std::pair<int, int>> edges;   // pairs of cache ids, first < second
  std::vector<std::vector<int>> neighbors;  // indexed like nodes

  int index_of(int cache_id) const;
};

struct DominatingSet {
  std::vector<int> members;  // cache ids
  int radius = 1;
};

// Edge (q,p) present iff each endpoint lies inside the other's coverage.
ContactGraph build_contact_graph(const std::vector<EdgeCache>& caches,
                                 const std::vector<int>& target_ids);

// Greedy sigma-hop dominating set: repeatedly picks the node covering the
// most uncovered nodes (ties -> lowest cache id).
DominatingSet dominating_set(const ContactGraph& graph, int sigma);

// Pairwise hop distances over the mutual-coverage adjacency of all caches.
struct HopTable {
  int n = 0;
  std::vector<int> dist;  // -1 when unreachable
  int hops(int a, int b) const { return dist[static_cast<size_t>(a) * n + b]; }
};

HopTable hop_distances(const std::vector<EdgeCache>& caches);

// One realized transfer or eviction from a placement change.
struct TransferRecord {
  enum class Kind { Download, Eviction };
  Kind kind = Kind::Download;
  Priority priority = Priority::Low;
  int content = 0;
  int cache = 0;                   // destination (download) or holder (eviction)
  std::optional<int> source;       // downloads only; empty = cloud
  double size_mb = 0.0;
};

using TransferLog = std::vector<TransferRecord>;

// Bytes of `content` deliverable from holder to receiver within the
// receiver's dwell time in the holder's coverage:
//   min(placed * max(0, sojourn - tau) * rate, size)
double transferable_bytes(const EdgeCache& holder, const EdgeCache& receiver,
                          const Content& content, bool placed, double data_rate,
                          double propagation_delay, const SojournContext& ctx);

struct ConstraintContext {
  const std::vector<EdgeCache>& caches;
  const std::vector<Content>& low_catalog;
  const std::vector<Content>& high_catalog;
  const std::vector<int>& targets;      // Q(t)
  const std::vector<int>& dominating;   // D(t)
  const std::vector<int>& pending_high; // in-flight high content ids, C_High(t)
  double pending_high_mb = 0.0;         // total size of the in-flight batch
};

struct ConstraintViolation {
  std::string constraint;  // "15a" .. "15e"
  int cache = -1;
  double excess = 0.0;
};

// Checks the five constraint families; empty result means the state is
// feasible. Throws std::invalid_argument on dimension mismatch.
std::vector<ConstraintViolation> validate_constraints(const PlacementState& state,
                                                      const ConstraintContext& ctx);

struct PlacementFlip {
  enum class Matrix { Y, X };
  Matrix matrix = Matrix::Y;
  int cache = 0;    // cache id for Y, fixed index for X
  int content = 0;  // low id for Y, high id for X
};

struct DeltaContext {
  const std::vector<EdgeCache>& caches;
  const std::vector<Content>& low_catalog;
  const std::vector<Content>& high_catalog;
  const HopTable& hops;
};

// Applies toggles in order. A 0->1 flip logs a download sourced from the
// nearest current holder by hop distance (ties -> lowest id; unreachable or
// absent -> cloud). A 1->0 flip logs an eviction and clears the holder's z
// allowances for that content. Throws std::out_of_range on bad indices.
TransferLog apply_placement_delta(PlacementState& state,
                                  const std::vector<PlacementFlip>& flips,
                                  const DeltaContext& ctx);

}  // namespace ecdn
