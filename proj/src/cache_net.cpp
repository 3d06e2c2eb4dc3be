#include "ecdn/cache_net.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace ecdn {

int EdgeCache::max_requests() const {
  if (units_per_request <= 0) throw std::invalid_argument("EdgeCache: units_per_request must be positive");
  int r = static_cast<int>(std::floor(processing_units / units_per_request + 1e-9));
  if (r < 1) throw std::invalid_argument("EdgeCache: processing capacity below one request");
  return r;
}

SojournBody EdgeCache::body() const {
  SojournBody b;
  switch (kind) {
    case CacheKind::FixedStraight: b.kind = CacheMotion::FixedStraight; break;
    case CacheKind::FixedIntersection: b.kind = CacheMotion::FixedIntersection; break;
    case CacheKind::Mobile: b.kind = CacheMotion::Mobile; break;
  }
  b.coverage = coverage;
  b.position = coverage.center;
  b.velocity = velocity();
  b.heading = kinematics.heading;
  b.speed = is_fixed() ? 0.0 : kinematics.speed;
  return b;
}

double PlacementState::stored_low_mb(int cache, const std::vector<Content>& low_catalog) const {
  double total = 0.0;
  for (int l = 0; l < num_low; ++l)
    if (y_at(cache, l)) total += low_catalog[l].size_mb;
  return total;
}

double PlacementState::stored_high_mb(int fixed_index, const std::vector<Content>& high_catalog) const {
  double total = 0.0;
  for (int h = 0; h < num_high; ++h)
    if (x_at(fixed_index, h)) total += high_catalog[h].size_mb;
  return total;
}

int RequestBatch::total() const {
  int t = 0;
  for (const auto& item : items) t += item.count;
  return t;
}

int ContactGraph::index_of(int cache_id) const {
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i] == cache_id) return static_cast<int>(i);
  return -1;
}

ContactGraph build_contact_graph(const std::vector<EdgeCache>& caches,
                                 const std::vector<int>& target_ids) {
  if (target_ids.empty()) throw std::invalid_argument("build_contact_graph: no targets");
  ContactGraph g;
  g.nodes = target_ids;
  std::sort(g.nodes.begin(), g.nodes.end());
  g.neighbors.assign(g.nodes.size(), {});
  for (size_t a = 0; a < g.nodes.size(); ++a) {
    for (size_t b = a + 1; b < g.nodes.size(); ++b) {
      const EdgeCache& qa = caches[g.nodes[a]];
      const EdgeCache& qb = caches[g.nodes[b]];
      if (coverage_contains(qa.coverage, qb.position()) &&
          coverage_contains(qb.coverage, qa.position())) {
        g.edges.emplace_back(g.nodes[a], g.nodes[b]);
        g.neighbors[a].push_back(static_cast<int>(b));
        g.neighbors[b].push_back(static_cast<int>(a));
      }
    }
  }
  return g;
}

namespace {

// Node indices within sigma hops of start (including start).
std::vector<int> ball(const ContactGraph& g, int start, int sigma) {
  std::vector<int> depth(g.nodes.size(), -1);
  std::deque<int> queue{start};
  depth[start] = 0;
  std::vector<int> out{start};
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    if (depth[u] == sigma) continue;
    for (int v : g.neighbors[u]) {
      if (depth[v] < 0) {
        depth[v] = depth[u] + 1;
        out.push_back(v);
        queue.push_back(v);
      }
    }
  }
  return out;
}

}  // namespace

DominatingSet dominating_set(const ContactGraph& graph, int sigma) {
  if (sigma < 1) throw std::invalid_argument("dominating_set: sigma must be >= 1");
  DominatingSet result;
  result.radius = sigma;
  size_t n = graph.nodes.size();
  std::vector<std::vector<int>> balls(n);
  for (size_t i = 0; i < n; ++i) balls[i] = ball(graph, static_cast<int>(i), sigma);

  std::vector<bool> covered(n, false);
  size_t covered_count = 0;
  while (covered_count < n) {
    int best = -1;
    int best_gain = -1;
    for (size_t i = 0; i < n; ++i) {
      int gain = 0;
      for (int v : balls[i])
        if (!covered[v]) ++gain;
      if (gain > best_gain ||
          (gain == best_gain && best >= 0 && graph.nodes[i] < graph.nodes[best])) {
        best_gain = gain;
        best = static_cast<int>(i);
      }
    }
    result.members.push_back(graph.nodes[best]);
    for (int v : balls[best]) {
      if (!covered[v]) {
        covered[v] = true;
        ++covered_count;
      }
    }
  }
  std::sort(result.members.begin(), result.members.end());
  return result;
}

HopTable hop_distances(const std::vector<EdgeCache>& caches) {
  int n = static_cast<int>(caches.size());
  HopTable table;
  table.n = n;
  table.dist.assign(static_cast<size_t>(n) * n, -1);

  std::vector<std::vector<int>> adj(n);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (coverage_contains(caches[a].coverage, caches[b].position()) &&
          coverage_contains(caches[b].coverage, caches[a].position())) {
        adj[a].push_back(b);
        adj[b].push_back(a);
      }
    }
  }
  for (int s = 0; s < n; ++s) {
    std::deque<int> queue{s};
    table.dist[static_cast<size_t>(s) * n + s] = 0;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      int du = table.dist[static_cast<size_t>(s) * n + u];
      for (int v : adj[u]) {
        int& dv = table.dist[static_cast<size_t>(s) * n + v];
        if (dv < 0) {
          dv = du + 1;
          queue.push_back(v);
        }
      }
    }
  }
  return table;
}

double transferable_bytes(const EdgeCache& holder, const EdgeCache& receiver,
                          const Content& content, bool placed, double data_rate,
                          double propagation_delay, const SojournContext& ctx) {
  if (!placed) return 0.0;
  if (holder.id == receiver.id) return content.size_mb;
  double dwell = sojourn_time(holder.body(), receiver.body(), ctx);
  double window = std::max(0.0, dwell - propagation_delay);
  return std::min(window * data_rate, content.size_mb);
}

std::vector<ConstraintViolation> validate_constraints(const PlacementState& state,
                                                      const ConstraintContext& ctx) {
  int n = static_cast<int>(ctx.caches.size());
  int f_count = 0;
  for (const auto& c : ctx.caches)
    if (c.is_fixed()) ++f_count;
  if (state.num_caches != n || state.num_fixed != f_count ||
      state.num_low != static_cast<int>(ctx.low_catalog.size()) ||
      state.num_high != static_cast<int>(ctx.high_catalog.size())) {
    throw std::invalid_argument("validate_constraints: state dimensions do not match context");
  }

  std::vector<ConstraintViolation> violations;
  std::vector<bool> is_target(n, false);
  for (int q : ctx.targets) is_target[q] = true;

  for (int i = 0; i < n; ++i) {
    const EdgeCache& cache = ctx.caches[i];
    double allowance = 0.0;
    for (int l = 0; l < state.num_low; ++l) {
      if (!state.y_at(i, l)) continue;
      for (int j = 0; j < n; ++j) allowance += state.z_at(l, i, j);
    }

    if (!cache.is_fixed()) {
      // 15a: request-serving allowances within the mobile cache budget.
      if (allowance > cache.max_requests() + 1e-9) {
        violations.push_back({"15a", i, allowance - cache.max_requests()});
      }
      double stored = state.stored_low_mb(i, ctx.low_catalog);
      if (is_target[i]) {
        // 15d: targets must also hold headroom for in-flight high content.
        if (stored + ctx.pending_high_mb > cache.storage_mb + 1e-9) {
          violations.push_back({"15d", i, stored + ctx.pending_high_mb - cache.storage_mb});
        }
      } else {
        // 15c: plain capacity for non-target mobile caches.
        if (stored > cache.storage_mb + 1e-9) {
          violations.push_back({"15c", i, stored - cache.storage_mb});
        }
      }
    } else {
      if (i >= state.num_fixed)
        throw std::invalid_argument("validate_constraints: fixed caches must precede mobile ones");
      int fixed_index = i;
      // 15b: delivery load for the in-flight batch plus serving allowances.
      double delivery = 0.0;
      for (int u : ctx.dominating) {
        if (!coverage_contains(cache.coverage, ctx.caches[u].position())) continue;
        for (int h : ctx.pending_high) delivery += state.x_at(fixed_index, h);
      }
      if (delivery + allowance > cache.max_requests() + 1e-9) {
        violations.push_back({"15b", i, delivery + allowance - cache.max_requests()});
      }
      // 15e: stored low plus staged high within storage.
      double stored = state.stored_low_mb(i, ctx.low_catalog) +
                      state.stored_high_mb(fixed_index, ctx.high_catalog);
      if (stored > cache.storage_mb + 1e-9) {
        violations.push_back({"15e", i, stored - cache.storage_mb});
      }
    }
  }
  return violations;
}

TransferLog apply_placement_delta(PlacementState& state,
                                  const std::vector<PlacementFlip>& flips,
                                  const DeltaContext& ctx) {
  TransferLog log;
  int n = state.num_caches;
  for (const auto& flip : flips) {
    if (flip.matrix == PlacementFlip::Matrix::Y) {
      if (flip.cache < 0 || flip.cache >= n || flip.content < 0 || flip.content >= state.num_low)
        throw std::out_of_range("apply_placement_delta: y index out of range");
      uint8_t& cell = state.y_at(flip.cache, flip.content);
      const Content& content = ctx.low_catalog[flip.content];
      if (cell == 0) {
        cell = 1;
        // Source the download from the nearest current holder, else cloud.
        std::optional<int> source;
        int best_hops = std::numeric_limits<int>::max();
        for (int i = 0; i < n; ++i) {
          if (i == flip.cache || !state.y_at(i, flip.content)) continue;
          int h = ctx.hops.hops(i, flip.cache);
          if (h < 0) continue;
          if (h < best_hops) {
            best_hops = h;
            source = i;
          }
        }
        log.push_back({TransferRecord::Kind::Download, Priority::Low, flip.content, flip.cache,
                       source, content.size_mb});
      } else {
        cell = 0;
        for (int j = 0; j < n; ++j) state.z_at(flip.content, flip.cache, j) = 0;
        log.push_back({TransferRecord::Kind::Eviction, Priority::Low, flip.content, flip.cache,
                       std::nullopt, content.size_mb});
      }
    } else {
      if (flip.cache < 0 || flip.cache >= state.num_fixed || flip.content < 0 ||
          flip.content >= state.num_high)
        throw std::out_of_range("apply_placement_delta: x index out of range");
      uint8_t& cell = state.x_at(flip.cache, flip.content);
      const Content& content = ctx.high_catalog[flip.content];
      if (cell == 0) {
        cell = 1;
        std::optional<int> source;
        int best_hops = std::numeric_limits<int>::max();
        for (int f = 0; f < state.num_fixed; ++f) {
          if (f == flip.cache || !state.x_at(f, flip.content)) continue;
          int h = ctx.hops.hops(f, flip.cache);
          if (h < 0) continue;
          if (h < best_hops) {
            best_hops = h;
            source = f;
          }
        }
        log.push_back({TransferRecord::Kind::Download, Priority::High, flip.content, flip.cache,
                       source, content.size_mb});
      } else {
        cell = 0;
        log.push_back({TransferRecord::Kind::Eviction, Priority::High, flip.content, flip.cache,
                       std::nullopt, content.size_mb});
      }
    }
  }
  return log;
}

}  // namespace ecdn
