#include "ecdn/cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ecdn {

CostParameters CostParameters::uniform(int num_caches, double upload, double download) {
  CostParameters p;
  p.upload_cost_per_mb.assign(num_caches, upload);
  p.download_cost_per_mb.assign(num_caches, download);
  return p;
}

double DemandModel::normalizer() const {
  if (catalog_size < 1) throw std::invalid_argument("DemandModel: empty catalog");
  double rho = 0.0;
  for (int l = 1; l <= catalog_size; ++l) {
    rho += normalization == ZipfNormalization::ReciprocalRank ? 1.0 / l
                                                              : 1.0 / std::pow(l, zipf_slope);
  }
  return rho;
}

double zipf_request_rate(int rank, const DemandModel& demand) {
  if (rank < 1 || rank > demand.catalog_size)
    throw std::out_of_range("zipf_request_rate: rank outside catalog");
  return demand.request_rate / (demand.normalizer() * std::pow(rank, demand.zipf_slope));
}

double transmission_delay(std::optional<int> source, int dest, double bytes_mb,
                          const LinkModel& links) {
  if (bytes_mb < 0) throw std::invalid_argument("transmission_delay: negative bytes");
  if (!source.has_value()) return bytes_mb * links.cloud_delay_per_mb;
  if (*source == dest) return 0.0;
  return bytes_mb / links.rate(*source, dest) + links.delay(*source, dest);
}

MigrationCost migration_cost_slot(const TransferLog& log, const CostParameters& params,
                                  const HopTable& hops, const std::vector<EdgeCache>& caches) {
  MigrationCost cost;
  for (const auto& rec : log) {
    if (rec.kind == TransferRecord::Kind::Eviction) continue;
    cost.c2 += rec.size_mb * params.download(rec.cache);
    if (rec.source.has_value()) {
      cost.c1 += rec.size_mb * params.upload(*rec.source);
      double span;
      if (params.bandwidth_metric == BandwidthMetric::Hops) {
        int h = hops.hops(*rec.source, rec.cache);
        span = h < 0 ? 0.0 : static_cast<double>(h);
      } else {
        span = distance(caches[*rec.source].position(), caches[rec.cache].position());
      }
      cost.c3 += rec.size_mb * params.bandwidth_cost_per_mb_hop * span;
    }
  }
  return cost;
}

SlotCost accumulate_phi(const SlotCost& prev, const MigrationCost& migration,
                        double low_access, double high_delivery, const CostWeights& weights) {
  SlotCost next;
  next.migration = migration;
  next.low_access = low_access;
  next.high_delivery = high_delivery;
  next.phi_cumulative = prev.phi_cumulative + weights.migration * migration.total() +
                        weights.access * low_access + weights.delivery * high_delivery;
  return next;
}

namespace {

// Serving order for a request group: the origin itself first, then ascending
// hop distance (unreachable last), then ascending id.
std::vector<int> server_order(const PlacementState& state, int content, int origin,
                              const NetworkView& view) {
  std::vector<int> servers;
  for (int i = 0; i < state.num_caches; ++i) {
    if (state.y_at(i, content) && state.z_at(content, i, origin) > 0) servers.push_back(i);
  }
  std::sort(servers.begin(), servers.end(), [&](int a, int b) {
    if (a == origin || b == origin) return a == origin && b != origin;
    int ha = view.hops.hops(a, origin);
    int hb = view.hops.hops(b, origin);
    if (ha < 0) ha = std::numeric_limits<int>::max();
    if (hb < 0) hb = std::numeric_limits<int>::max();
    if (ha != hb) return ha < hb;
    return a < b;
  });
  return servers;
}

}  // namespace

AccessReport low_priority_access_cost(const PlacementState& state, const RequestBatch& requests,
                                      const CostParameters& params, const NetworkView& view) {
  AccessReport report;
  auto items = requests.items;
  std::sort(items.begin(), items.end(), [](const RequestBatch::Item& a, const RequestBatch::Item& b) {
    if (a.content != b.content) return a.content < b.content;
    return a.origin < b.origin;
  });

  for (const auto& item : items) {
    if (item.count <= 0) continue;
    const Content& content = view.low_catalog[item.content];
    report.requests += item.count;
    int remaining = item.count;

    for (int server : server_order(state, item.content, item.origin, view)) {
      if (remaining == 0) break;
      int take = std::min(remaining, state.z_at(item.content, server, item.origin));
      if (take <= 0) continue;
      double edge_mb, delay;
      if (server == item.origin) {
        edge_mb = content.size_mb;
        delay = 0.0;
      } else {
        edge_mb = transferable_bytes(view.caches[server], view.caches[item.origin], content,
                                     true, view.links.rate(server, item.origin),
                                     view.links.delay(server, item.origin), view.sojourn);
        delay = edge_mb > 0 ? transmission_delay(server, item.origin, edge_mb, view.links) : 0.0;
      }
      double cloud_mb = content.size_mb - edge_mb;
      delay += cloud_mb * view.links.cloud_delay_per_mb;
      report.cost += take * params.low_delay_cost * delay;
      report.total_delay += take * delay;
      if (cloud_mb > 0) report.cloud_fetches += take;
      report.events.push_back({item.content, item.origin, server, take, edge_mb, cloud_mb, delay});
      remaining -= take;
    }
    if (remaining > 0) {
      double delay = content.size_mb * view.links.cloud_delay_per_mb;
      report.cost += remaining * params.low_delay_cost * delay;
      report.total_delay += remaining * delay;
      report.cloud_fetches += remaining;
      report.events.push_back(
          {item.content, item.origin, -1, remaining, 0.0, content.size_mb, delay});
    }
  }
  return report;
}

DeliveryReport high_priority_delivery_cost(const PlacementState& state,
                                           const DominatingSet& dominating,
                                           const std::vector<int>& arrivals,
                                           const CostParameters& params,
                                           const NetworkView& view) {
  DeliveryReport report;
  for (int h : arrivals) {
    const Content& content = view.high_catalog[h];
    for (int u : dominating.members) {
      DeliveryEvent event;
      event.content = h;
      event.dominating = u;
      double remaining = content.size_mb;

      for (int f = 0; f < state.num_fixed && remaining > 1e-12; ++f) {
        if (!state.x_at(f, h)) continue;
        const EdgeCache& fixed = view.caches[f];
        if (!coverage_contains(fixed.coverage, view.caches[u].position())) continue;
        double dwell = sojourn_time(fixed.body(), view.caches[u].body(), view.sojourn);
        double window = std::max(0.0, dwell - view.links.delay(f, u));
        double bytes = std::min(window * view.links.rate(f, u), remaining);
        if (bytes <= 0) continue;
        event.delay += transmission_delay(f, u, bytes, view.links);
        event.fixed_mb += bytes;
        event.from_fixed.emplace_back(f, bytes);
        remaining -= bytes;
      }
      if (remaining > 1e-12) {
        event.delay += remaining * view.links.cloud_delay_per_mb;
        event.cloud_mb = remaining;
        ++report.cloud_fetches;
      }
      report.cost += params.high_delay_cost * event.delay;
      report.total_delay += event.delay;
      ++report.deliveries;
      report.events.push_back(std::move(event));
    }
  }
  return report;
}

}  // namespace ecdn
