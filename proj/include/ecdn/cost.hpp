#pragma once

#include <optional>
#include <vector>

#include "ecdn/cache_net.hpp"

namespace ecdn {

// Pairwise link parameters. Uniform defaults with optional per-pair
// overrides; symmetric.
struct LinkModel {
  double data_rate = 5.0;          // MB per time unit
  double propagation_delay = 0.0;  // time units
  double cloud_delay_per_mb = 0.5; // d_inf

  double rate(int /*a*/, int /*b*/) const { return data_rate; }
  double delay(int /*a*/, int /*b*/) const { return propagation_delay; }
};

struct CostWeights {
  double migration = 1.0;
  double access = 1.0;
  double delivery = 1.0;
};

enum class BandwidthMetric { Hops, Euclidean };

struct CostParameters {
  std::vector<double> upload_cost_per_mb;    // g_i, indexed by cache id
  std::vector<double> download_cost_per_mb;  // p_i
  double bandwidth_cost_per_mb_hop = 3.0;    // phi
  double low_delay_cost = 5.0;               // gamma
  double high_delay_cost = 10.0;             // Psi
  CostWeights weights;
  BandwidthMetric bandwidth_metric = BandwidthMetric::Hops;

  static CostParameters uniform(int num_caches, double upload = 2.0, double download = 2.0);
  double upload(int cache) const { return upload_cost_per_mb[cache]; }
  double download(int cache) const { return download_cost_per_mb[cache]; }
};

enum class ZipfNormalization { ReciprocalRank, Standard };

struct DemandModel {
  double zipf_slope = 0.8;    // alpha
  double request_rate = 25.0; // beta, requests per time unit
  int catalog_size = 0;
  ZipfNormalization normalization = ZipfNormalization::ReciprocalRank;

  double normalizer() const;  // rho
};

// beta / (rho * rank^alpha). Throws std::out_of_range for bad ranks.
double zipf_request_rate(int rank, const DemandModel& demand);

// Eq.-1-style delay: 0 for self, bytes/rate + tau between caches, and
// bytes * d_inf from the cloud (source = nullopt).
double transmission_delay(std::optional<int> source, int dest, double bytes_mb,
                          const LinkModel& links);

struct MigrationCost {
  double c1 = 0.0;  // upload power
  double c2 = 0.0;  // download power
  double c3 = 0.0;  // bandwidth occupation
  double total() const { return c1 + c2 + c3; }
};

MigrationCost migration_cost_slot(const TransferLog& log, const CostParameters& params,
                                  const HopTable& hops, const std::vector<EdgeCache>& caches);

struct SlotCost {
  MigrationCost migration;
  double low_access = 0.0;
  double high_delivery = 0.0;
  double phi_cumulative = 0.0;
};

// Phi(t+1) = Phi(t) + w_M*C_M + w_A*C_A + w_D*C_D
SlotCost accumulate_phi(const SlotCost& prev, const MigrationCost& migration,
                        double low_access, double high_delivery, const CostWeights& weights);

// Shared read-only context for the serving/delivery computations.
struct NetworkView {
  const std::vector<EdgeCache>& caches;
  const std::vector<Content>& low_catalog;
  const std::vector<Content>& high_catalog;
  const LinkModel& links;
  const HopTable& hops;
  SojournContext sojourn;
};

struct ServeEvent {
  int content = 0;
  int origin = 0;
  int server = -1;  // -1 = cloud
  int count = 0;
  double edge_mb = 0.0;   // per request
  double cloud_mb = 0.0;  // per request
  double delay = 0.0;     // per request
};

struct AccessReport {
  double cost = 0.0;
  double total_delay = 0.0;
  int requests = 0;
  int cloud_fetches = 0;  // requests with any cloud bytes
  std::vector<ServeEvent> events;
};

// Serves a realized request batch against the placement/redirection state.
// Requests for (l, origin) are routed to holders in allowance order (origin
// itself first, then ascending hop distance and id), each server taking up
// to z[l](server, origin) requests; the rest fall back to the cloud. Cost is
// gamma times the realized delay per request.
AccessReport low_priority_access_cost(const PlacementState& state, const RequestBatch& requests,
                                      const CostParameters& params, const NetworkView& view);

struct DeliveryEvent {
  int content = 0;       // high content id
  int dominating = 0;    // receiving cache id
  double fixed_mb = 0.0;
  double cloud_mb = 0.0;
  double delay = 0.0;
  std::vector<std::pair<int, double>> from_fixed;  // (fixed index, MB)
};

struct DeliveryReport {
  double cost = 0.0;
  double total_delay = 0.0;
  int deliveries = 0;
  int cloud_fetches = 0;
  std::vector<DeliveryEvent> events;
};

// Delivers each arrived high-priority content to every dominating cache:
// bytes stream from covering staged fixed caches (sojourn-limited), the
// residual comes from the cloud; cost is Psi times the accumulated delay.
DeliveryReport high_priority_delivery_cost(const PlacementState& state,
                                           const DominatingSet& dominating,
                                           const std::vector<int>& arrivals,
                                           const CostParameters& params,
                                           const NetworkView& view);

}  // namespace ecdn
