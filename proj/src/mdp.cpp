#include "ecdn/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ecdn {

namespace {
constexpr double kEps = 1e-9;
}

StateVector encode_state(const PlacementState& p, const StateLayout& layout) {
  if (p.num_caches > layout.max_caches || p.num_fixed > layout.max_fixed ||
      p.num_low > layout.max_low || p.num_high > layout.max_high)
    throw std::invalid_argument("encode_state: placement exceeds configured maxima");
  StateVector s;
  s.values.assign(layout.length(), 0.0);
  const int y_base = 0;
  for (int i = 0; i < p.num_caches; ++i)
    for (int l = 0; l < p.num_low; ++l)
      s.values[y_base + i * layout.max_low + l] = p.y_at(i, l);
  const int x_base = layout.max_caches * layout.max_low;
  for (int f = 0; f < p.num_fixed; ++f)
    for (int h = 0; h < p.num_high; ++h)
      s.values[x_base + f * layout.max_high + h] = p.x_at(f, h);
  const int z_base = x_base + layout.max_fixed * layout.max_high;
  for (int l = 0; l < p.num_low; ++l)
    for (int i = 0; i < p.num_caches; ++i)
      for (int j = 0; j < p.num_caches; ++j)
        s.values[z_base + (static_cast<size_t>(l) * layout.max_caches + i) * layout.max_caches + j] =
            p.z_at(l, i, j);
  return s;
}

PlacementState decode_state(const StateVector& state, const StateLayout& layout,
                            int num_caches, int num_fixed, int num_low, int num_high) {
  if (static_cast<int>(state.values.size()) != layout.length())
    throw std::invalid_argument("decode_state: vector length does not match layout");
  PlacementState p(num_caches, num_fixed, num_low, num_high);
  const int y_base = 0;
  for (int i = 0; i < num_caches; ++i)
    for (int l = 0; l < num_low; ++l)
      p.y_at(i, l) = state.values[y_base + i * layout.max_low + l] != 0.0 ? 1 : 0;
  const int x_base = layout.max_caches * layout.max_low;
  for (int f = 0; f < num_fixed; ++f)
    for (int h = 0; h < num_high; ++h)
      p.x_at(f, h) = state.values[x_base + f * layout.max_high + h] != 0.0 ? 1 : 0;
  const int z_base = x_base + layout.max_fixed * layout.max_high;
  for (int l = 0; l < num_low; ++l)
    for (int i = 0; i < num_caches; ++i)
      for (int j = 0; j < num_caches; ++j)
        p.z_at(l, i, j) = static_cast<int>(std::llround(
            state.values[z_base + (static_cast<size_t>(l) * layout.max_caches + i) * layout.max_caches + j]));
  return p;
}

std::vector<AtomicAction> enumerate_atomic_actions(int num_caches, int num_fixed, int num_low,
                                                   int num_high) {
  std::vector<AtomicAction> out;
  out.reserve(static_cast<size_t>(num_caches) * num_low + static_cast<size_t>(num_fixed) * num_high +
              static_cast<size_t>(num_caches) * num_caches * num_low + 1);
  for (int i = 0; i < num_caches; ++i)
    for (int l = 0; l < num_low; ++l) out.push_back({AtomicAction::Type::ToggleLow, i, l, 0});
  for (int f = 0; f < num_fixed; ++f)
    for (int h = 0; h < num_high; ++h) out.push_back({AtomicAction::Type::ToggleHigh, f, h, 0});
  for (int l = 0; l < num_low; ++l)
    for (int i = 0; i < num_caches; ++i)
      for (int j = 0; j < num_caches; ++j)
        out.push_back({AtomicAction::Type::AdjustRedirect, i, l, j});
  out.push_back({AtomicAction::Type::NoOp, 0, 0, 0});
  return out;
}

double reward_value(const MigrationCost& migration, double access, double delivery,
                    const CostWeights& weights) {
  return -(weights.migration * migration.total() + weights.access * access +
           weights.delivery * delivery);
}

Environment::Environment(EnvConfig cfg, uint64_t seed, Strategy strategy)
    : cfg_(std::move(cfg)),
      strategy_(strategy),
      mobility_rng_(derive_seed(seed, "mobility")),
      request_rng_(derive_seed(seed, "requests")),
      arrival_rng_(derive_seed(seed, "arrivals")),
      strategy_rng_(derive_seed(seed, "strategy")) {
  num_caches_ = static_cast<int>(cfg_.caches.size());
  for (int i = 0; i < num_caches_; ++i) {
    if (cfg_.caches[i].id != i)
      throw std::invalid_argument("Environment: cache ids must equal their index");
    if (cfg_.caches[i].is_fixed()) {
      if (i != num_fixed_)
        throw std::invalid_argument("Environment: fixed caches must precede mobile caches");
      ++num_fixed_;
    }
  }
  if (static_cast<int>(cfg_.cost_params.upload_cost_per_mb.size()) != num_caches_ ||
      static_cast<int>(cfg_.cost_params.download_cost_per_mb.size()) != num_caches_)
    throw std::invalid_argument("Environment: cost parameter vectors must cover every cache");

  const int low = static_cast<int>(cfg_.low_catalog.size());
  const int high = static_cast<int>(cfg_.high_catalog.size());
  if (cfg_.layout.length() == 0)
    cfg_.layout = StateLayout{num_caches_, num_fixed_, low, high};
  placement_ = PlacementState(num_caches_, num_fixed_, low, high);
  recency_.reset(num_caches_, low);
  actions_ = enumerate_atomic_actions(num_caches_, num_fixed_, low, high);
  cfg_.demand.catalog_size = low;
  forced_reserved_.assign(num_caches_, 0.0);
  lambda_.resize(low);
  for (int l = 0; l < low; ++l)
    lambda_[l] = zipf_request_rate(cfg_.low_catalog[l].popularity_rank, cfg_.demand);

  RngStream init_rng(derive_seed(seed, "init"));
  initial_placement(init_rng);
  refresh_topology();
  sample_pending_arrivals();
  // Clear headroom for the first batch before any action is taken; the
  // initial shedding predates cost accounting.
  TransferLog log = forced_evictions();
  clamp_fixed_budgets(log);
}

void Environment::initial_placement(RngStream& init_rng) {
  // Random on-road positions and headings for mobile caches.
  if (cfg_.randomize_mobile_positions) {
    for (auto& cache : cfg_.caches) {
      if (cache.is_fixed()) continue;
      bool horizontal = init_rng.uniform01() < 0.5;
      double line = cfg_.grid.cell_side * init_rng.uniform_int(cfg_.grid.n);
      double along = init_rng.uniform_range(0.0, cfg_.grid.span());
      Vec2 pos = horizontal ? Vec2{along, line} : Vec2{line, along};
      cache.kinematics.position = pos;
      cache.kinematics.heading = horizontal
                                     ? (init_rng.uniform01() < 0.5 ? Heading::East : Heading::West)
                                     : (init_rng.uniform01() < 0.5 ? Heading::North : Heading::South);
      cache.coverage.center = pos;
    }
  }

  std::vector<int> mobiles;
  for (int i = num_fixed_; i < num_caches_; ++i) mobiles.push_back(i);
  // Fisher-Yates with the init stream.
  for (int i = static_cast<int>(mobiles.size()) - 1; i > 0; --i)
    std::swap(mobiles[i], mobiles[init_rng.uniform_int(i + 1)]);

  int full_count = std::min<int>(cfg_.initial_full_mobiles, static_cast<int>(mobiles.size()));
  std::vector<int> shuffled_contents(cfg_.low_catalog.size());
  for (size_t l = 0; l < shuffled_contents.size(); ++l) shuffled_contents[l] = static_cast<int>(l);
  for (int i = static_cast<int>(shuffled_contents.size()) - 1; i > 0; --i)
    std::swap(shuffled_contents[i], shuffled_contents[init_rng.uniform_int(i + 1)]);

  auto place = [&](int cache, int content) {
    placement_.y_at(cache, content) = 1;
    recency_.touch(cache, content, 0);
    bootstrap_allowances({TransferRecord{TransferRecord::Kind::Download, Priority::Low, content,
                                         cache, std::nullopt, cfg_.low_catalog[content].size_mb}});
  };

  // Pack the designated mobiles full, in shuffled content order.
  size_t next = 0;
  double min_size = std::numeric_limits<double>::max();
  for (const auto& c : cfg_.low_catalog) min_size = std::min(min_size, c.size_mb);
  for (int k = 0; k < full_count && next < shuffled_contents.size(); ++k) {
    int cache = mobiles[k];
    while (next < shuffled_contents.size()) {
      int content = shuffled_contents[next];
      double stored = placement_.stored_low_mb(cache, cfg_.low_catalog);
      if (stored + cfg_.low_catalog[content].size_mb > cfg_.caches[cache].storage_mb + kEps) {
        if (cfg_.caches[cache].storage_mb - stored < min_size) break;  // cache is full
        ++next;  // this one does not fit, but a smaller one later might
        continue;
      }
      place(cache, content);
      ++next;
    }
  }
  // Spread any remaining contents across caches with room.
  for (size_t idx = 0; idx < shuffled_contents.size(); ++idx) {
    int content = shuffled_contents[idx];
    bool placed = false;
    for (int i = 0; i < num_caches_ && !placed; ++i)
      placed = placement_.y_at(i, content) != 0;
    if (placed) continue;
    std::vector<int> fitting;
    for (int i = 0; i < num_caches_; ++i) {
      double stored = placement_.stored_low_mb(i, cfg_.low_catalog);
      if (cfg_.caches[i].is_fixed())
        stored += placement_.stored_high_mb(i, cfg_.high_catalog);
      if (stored + cfg_.low_catalog[content].size_mb <= cfg_.caches[i].storage_mb + kEps)
        fitting.push_back(i);
    }
    if (!fitting.empty()) place(fitting[init_rng.uniform_int(static_cast<int>(fitting.size()))], content);
  }

  targets_.assign(mobiles.begin(), mobiles.begin() + std::min<int>(cfg_.initial_targets, full_count));
  std::sort(targets_.begin(), targets_.end());
}

void Environment::refresh_topology() {
  hops_ = hop_distances(cfg_.caches);
  if (!targets_.empty()) {
    contacts_ = build_contact_graph(cfg_.caches, targets_);
    dominating_ = dominating_set(contacts_, cfg_.sigma);
  } else {
    contacts_ = ContactGraph{};
    dominating_ = DominatingSet{{}, cfg_.sigma};
  }
}

double Environment::pending_high_mb() const {
  double total = 0.0;
  for (int h : pending_arrivals_) total += cfg_.high_catalog[h].size_mb;
  return total;
}

void Environment::sample_pending_arrivals() {
  pending_arrivals_.clear();
  if (cfg_.high_catalog.empty() || cfg_.high_arrival_rate <= 0) return;
  int count = arrival_rng_.poisson(cfg_.high_arrival_rate * cfg_.slot_length);
  for (int k = 0; k < count; ++k)
    arrival_backlog_.push_back(arrival_rng_.uniform_int(static_cast<int>(cfg_.high_catalog.size())));

  double cap = std::numeric_limits<double>::max();
  for (int q : targets_) cap = std::min(cap, cfg_.caches[q].storage_mb);
  double total = 0.0;
  while (!arrival_backlog_.empty()) {
    double size = cfg_.high_catalog[arrival_backlog_.front()].size_mb;
    if (!pending_arrivals_.empty() && total + size > cap + kEps) break;
    pending_arrivals_.push_back(arrival_backlog_.front());
    arrival_backlog_.pop_front();
    total += size;
  }
}

RequestBatch Environment::sample_requests() {
  RequestBatch batch;
  std::vector<int> counts(num_caches_);
  for (size_t l = 0; l < cfg_.low_catalog.size(); ++l) {
    int total = request_rng_.poisson(lambda_[l] * cfg_.slot_length);
    if (total == 0) continue;
    std::fill(counts.begin(), counts.end(), 0);
    for (int k = 0; k < total; ++k) ++counts[request_rng_.uniform_int(num_caches_)];
    for (int j = 0; j < num_caches_; ++j)
      if (counts[j] > 0) batch.items.push_back({static_cast<int>(l), j, counts[j]});
  }
  return batch;
}

void Environment::advance_mobility() {
  if (cfg_.trace.has_value()) {
    int next_slot = static_cast<int>(slot_) + 1;
    if (!cfg_.trace->has_slot(next_slot))
      throw std::runtime_error("mobility trace: missing slot " + std::to_string(next_slot));
    const auto& records = cfg_.trace->slots.at(next_slot);
    for (auto& cache : cfg_.caches) {
      if (cache.is_fixed()) continue;
      auto it = records.find(cache.id);
      if (it == records.end())
        throw std::runtime_error("mobility trace: missing vehicle " + std::to_string(cache.id));
      Vec2 prev = cache.kinematics.position;
      Vec2 pos = it->second.position;
      cache.kinematics.speed = it->second.speed;
      Vec2 d = pos - prev;
      if (std::abs(d.x) > std::abs(d.y) + kEps)
        cache.kinematics.heading = d.x >= 0 ? Heading::East : Heading::West;
      else if (std::abs(d.y) > std::abs(d.x) + kEps)
        cache.kinematics.heading = d.y >= 0 ? Heading::North : Heading::South;
      cache.kinematics.position = pos;
      cache.coverage.center = pos;
    }
    return;
  }
  for (auto& cache : cfg_.caches) {
    if (cache.is_fixed()) continue;
    cache.kinematics =
        step_vehicle(cache.kinematics, cfg_.grid, cfg_.turns, cfg_.slot_length, mobility_rng_);
    cache.coverage.center = cache.kinematics.position;
  }
}

SojournContext Environment::sojourn_ctx() const {
  return SojournContext{cfg_.grid, cfg_.turns, cfg_.t_cap};
}

NetworkView Environment::network_view() const {
  return NetworkView{cfg_.caches, cfg_.low_catalog, cfg_.high_catalog,
                     cfg_.links,  hops_,            sojourn_ctx()};
}

double Environment::free_storage_mb(int cache) const {
  double stored = placement_.stored_low_mb(cache, cfg_.low_catalog);
  if (cfg_.caches[cache].is_fixed())
    stored += placement_.stored_high_mb(cache, cfg_.high_catalog);
  return cfg_.caches[cache].storage_mb - stored - forced_reserved_[cache];
}

bool Environment::is_target(int cache) const {
  return std::find(targets_.begin(), targets_.end(), cache) != targets_.end();
}

double Environment::destination_headroom_mb(int cache) const {
  double free = free_storage_mb(cache);
  if (is_target(cache)) free -= std::max(0.0, pending_high_mb() - forced_reserved_[cache]);
  return free;
}

double Environment::allowance_sum(int cache) const {
  double total = 0.0;
  for (int l = 0; l < placement_.num_low; ++l) {
    if (!placement_.y_at(cache, l)) continue;
    for (int j = 0; j < num_caches_; ++j) total += placement_.z_at(l, cache, j);
  }
  return total;
}

double Environment::delivery_load(int fixed_index) const {
  int covered = 0;
  for (int u : dominating_.members)
    if (coverage_contains(cfg_.caches[fixed_index].coverage, cfg_.caches[u].position())) ++covered;
  int staged_pending = 0;
  for (int h : pending_arrivals_) staged_pending += placement_.x_at(fixed_index, h);
  return static_cast<double>(covered) * staged_pending;
}

// Mobility and fresh arrivals can push a fixed cache's delivery load over
// its request budget with no action involved; the environment sheds
// allowances (and staged content as a last resort) until the budget holds.
void Environment::clamp_fixed_budgets(TransferLog& log) {
  for (int f = 0; f < num_fixed_; ++f) {
    double budget = cfg_.caches[f].max_requests();
    while (delivery_load(f) + allowance_sum(f) > budget + kEps) {
      int best_l = -1, best_j = -1, best_v = 0;
      for (int l = 0; l < placement_.num_low; ++l) {
        if (!placement_.y_at(f, l)) continue;
        for (int j = 0; j < num_caches_; ++j) {
          int v = placement_.z_at(l, f, j);
          if (v > best_v) {
            best_v = v;
            best_l = l;
            best_j = j;
          }
        }
      }
      if (best_l >= 0) {
        --placement_.z_at(best_l, f, best_j);
        continue;
      }
      // No allowances left: unstage a pending staged content.
      int victim = -1;
      for (int h : pending_arrivals_)
        if (placement_.x_at(f, h)) {
          victim = h;
          break;
        }
      if (victim < 0) break;
      placement_.x_at(f, victim) = 0;
      log.push_back({TransferRecord::Kind::Eviction, Priority::High, victim, f, std::nullopt,
                     cfg_.high_catalog[victim].size_mb});
    }
  }
}

bool Environment::allowance_budget_ok(int cache) const {
  double budget = cfg_.caches[cache].max_requests();
  double used = allowance_sum(cache);
  if (cfg_.caches[cache].is_fixed()) used += delivery_load(cache);
  return used <= budget + kEps;
}

void Environment::bootstrap_allowances(const TransferLog& log) {
  for (const auto& rec : log) {
    if (rec.kind != TransferRecord::Kind::Download || rec.priority != Priority::Low) continue;
    int cache = rec.cache;
    int content = rec.content;
    if (placement_.z_at(content, cache, cache) != 0) continue;
    placement_.z_at(content, cache, cache) = 1;
    if (!allowance_budget_ok(cache)) placement_.z_at(content, cache, cache) = 0;
  }
}

std::vector<uint8_t> Environment::legal_mask() const {
  // Precomputed aggregates make each action check O(1).
  const int n = num_caches_;
  const int low = placement_.num_low;
  const int high = placement_.num_high;
  std::vector<double> stored(n), allowance(n), load(n, 0.0);
  std::vector<int> budget(n), covered(num_fixed_, 0);
  for (int i = 0; i < n; ++i) {
    stored[i] = placement_.stored_low_mb(i, cfg_.low_catalog);
    if (i < num_fixed_) stored[i] += placement_.stored_high_mb(i, cfg_.high_catalog);
    allowance[i] = allowance_sum(i);
    budget[i] = cfg_.caches[i].max_requests();
  }
  for (int f = 0; f < num_fixed_; ++f) {
    for (int u : dominating_.members)
      if (coverage_contains(cfg_.caches[f].coverage, cfg_.caches[u].position())) ++covered[f];
    int staged_pending = 0;
    for (int h : pending_arrivals_) staged_pending += placement_.x_at(f, h);
    load[f] = static_cast<double>(covered[f]) * staged_pending;
  }
  std::vector<uint8_t> pending_flag(high, 0);
  for (int h : pending_arrivals_) pending_flag[h] = 1;
  const double pending_mb = pending_high_mb();
  // dormant allowance rows: sum_j z[l][i][j]
  std::vector<double> dormant(static_cast<size_t>(low) * n, 0.0);
  for (int l = 0; l < low; ++l)
    for (int i = 0; i < n; ++i) {
      double total = 0.0;
      for (int j = 0; j < n; ++j) total += placement_.z_at(l, i, j);
      dormant[static_cast<size_t>(l) * n + i] = total;
    }

  std::vector<uint8_t> mask(actions_.size(), 0);
  size_t a = 0;
  for (int i = 0; i < n; ++i) {
    const EdgeCache& cache = cfg_.caches[i];
    bool fixed = cache.is_fixed();
    bool target = is_target(i);
    for (int l = 0; l < low; ++l, ++a) {
      if (placement_.y_at(i, l)) {
        mask[a] = 1;
        continue;
      }
      double used = allowance[i] + dormant[static_cast<size_t>(l) * n + i] + (fixed ? load[i] : 0.0);
      if (used > budget[i] + kEps) continue;
      double extra = fixed ? 0.0 : (target ? pending_mb : 0.0);
      if (stored[i] + cfg_.low_catalog[l].size_mb + extra <= cache.storage_mb + kEps) mask[a] = 1;
    }
  }
  for (int f = 0; f < num_fixed_; ++f) {
    const EdgeCache& cache = cfg_.caches[f];
    for (int h = 0; h < high; ++h, ++a) {
      if (placement_.x_at(f, h)) {
        mask[a] = 1;
        continue;
      }
      if (stored[f] + cfg_.high_catalog[h].size_mb > cache.storage_mb + kEps) continue;
      double load_after = load[f] + (pending_flag[h] ? covered[f] : 0.0);
      if (load_after + allowance[f] <= budget[f] + kEps) mask[a] = 1;
    }
  }
  for (int l = 0; l < low; ++l) {
    for (int i = 0; i < n; ++i) {
      bool fixed = cfg_.caches[i].is_fixed();
      bool held = placement_.y_at(i, l);
      double budget_left = budget[i] + kEps - allowance[i] - (fixed ? load[i] : 0.0);
      for (int j = 0; j < n; ++j, ++a) {
        int value = placement_.z_at(l, i, j);
        if (value >= budget[i]) {  // R_max(i): decrement
          mask[a] = 1;
        } else if (!held) {
          mask[a] = 1;  // outside the z*y sums
        } else if (budget_left >= 1.0) {
          mask[a] = 1;
        }
      }
    }
  }
  mask[a] = 1;  // NoOp
  return mask;
}

bool Environment::action_legal(int index) const {
  const AtomicAction& action = actions_[index];
  switch (action.type) {
    case AtomicAction::Type::NoOp:
      return true;
    case AtomicAction::Type::ToggleLow: {
      int i = action.cache;
      int l = action.content;
      if (placement_.y_at(i, l)) return true;  // eviction only shrinks usage
      const EdgeCache& cache = cfg_.caches[i];
      // Placing the content activates any allowances parked on (i, l).
      double dormant = 0.0;
      for (int j = 0; j < num_caches_; ++j) dormant += placement_.z_at(l, i, j);
      double used = allowance_sum(i) + dormant;
      if (cache.is_fixed()) used += delivery_load(i);
      if (used > cache.max_requests() + kEps) return false;

      double size = cfg_.low_catalog[l].size_mb;
      double stored = placement_.stored_low_mb(i, cfg_.low_catalog);
      if (cache.is_fixed()) {
        stored += placement_.stored_high_mb(i, cfg_.high_catalog);
        return stored + size <= cache.storage_mb + kEps;
      }
      double pending = is_target(i) ? pending_high_mb() : 0.0;
      return stored + size + pending <= cache.storage_mb + kEps;
    }
    case AtomicAction::Type::ToggleHigh: {
      int f = action.cache;
      int h = action.content;
      if (placement_.x_at(f, h)) return true;  // dropping staged content
      const EdgeCache& cache = cfg_.caches[f];
      double stored = placement_.stored_low_mb(f, cfg_.low_catalog) +
                      placement_.stored_high_mb(f, cfg_.high_catalog);
      if (stored + cfg_.high_catalog[h].size_mb > cache.storage_mb + kEps) return false;
      double load_after = delivery_load(f);
      bool in_flight = std::find(pending_arrivals_.begin(), pending_arrivals_.end(), h) !=
                       pending_arrivals_.end();
      if (in_flight) {
        int covered = 0;
        for (int u : dominating_.members)
          if (coverage_contains(cache.coverage, cfg_.caches[u].position())) ++covered;
        load_after += covered;
      }
      return load_after + allowance_sum(f) <= cache.max_requests() + kEps;
    }
    case AtomicAction::Type::AdjustRedirect: {
      int i = action.cache;
      int l = action.content;
      int j = action.origin;
      int value = placement_.z_at(l, i, j);
      int r_max = cfg_.caches[i].max_requests();
      if (value >= r_max) return true;  // decrement
      if (!placement_.y_at(i, l)) return true;  // does not enter the z*y sums
      double used = allowance_sum(i) + 1;
      if (cfg_.caches[i].is_fixed()) used += delivery_load(i);
      return used <= r_max + kEps;
    }
  }
  return false;
}

TransferLog Environment::forced_evictions() {
  TransferLog log;
  std::fill(forced_reserved_.begin(), forced_reserved_.end(), 0.0);
  if (pending_arrivals_.empty() || targets_.empty()) return log;

  DeltaContext delta_ctx{cfg_.caches, cfg_.low_catalog, cfg_.high_catalog, hops_};
  Strategy overflow = strategy_ == Strategy::Drlcm ? Strategy::NoMig : strategy_;
  for (int h : pending_arrivals_) {
    const Content& incoming = cfg_.high_catalog[h];
    for (int q : targets_) {
      if (free_storage_mb(q) + kEps >= incoming.size_mb) {
        forced_reserved_[q] += incoming.size_mb;
        continue;
      }
      auto decisions = baseline_decide(overflow, *this, incoming, q, recency_, strategy_rng_);
      for (const auto& d : decisions) {
        std::vector<PlacementFlip> flips;
        if (d.destination.has_value())
          flips.push_back({PlacementFlip::Matrix::Y, *d.destination, d.victim});
        flips.push_back({PlacementFlip::Matrix::Y, d.source, d.victim});
        TransferLog part = apply_placement_delta(placement_, flips, delta_ctx);
        bootstrap_allowances(part);
        for (const auto& rec : part)
          if (rec.kind == TransferRecord::Kind::Download && rec.priority == Priority::Low)
            recency_.touch(rec.cache, rec.content, slot_);
        log.insert(log.end(), part.begin(), part.end());
      }
      forced_reserved_[q] += incoming.size_mb;
    }
  }
  return log;
}

SlotMetrics Environment::step(int action_index) {
  if (action_index < 0 || action_index >= action_count())
    throw std::out_of_range("Environment::step: action index out of range");
  if (!action_legal(action_index))
    throw std::runtime_error("Environment::step: illegal action reached execution");

  SlotMetrics metrics;
  TransferLog log;
  DeltaContext delta_ctx{cfg_.caches, cfg_.low_catalog, cfg_.high_catalog, hops_};

  // 1. agent action
  const AtomicAction& action = actions_[action_index];
  switch (action.type) {
    case AtomicAction::Type::ToggleLow: {
      TransferLog part = apply_placement_delta(
          placement_, {{PlacementFlip::Matrix::Y, action.cache, action.content}}, delta_ctx);
      bootstrap_allowances(part);
      for (const auto& rec : part)
        if (rec.kind == TransferRecord::Kind::Download)
          recency_.touch(rec.cache, rec.content, slot_);
      log.insert(log.end(), part.begin(), part.end());
      break;
    }
    case AtomicAction::Type::ToggleHigh: {
      TransferLog part = apply_placement_delta(
          placement_, {{PlacementFlip::Matrix::X, action.cache, action.content}}, delta_ctx);
      log.insert(log.end(), part.begin(), part.end());
      break;
    }
    case AtomicAction::Type::AdjustRedirect: {
      int& z = placement_.z_at(action.content, action.cache, action.origin);
      int r_max = cfg_.caches[action.cache].max_requests();
      z = z >= r_max ? z - 1 : z + 1;
      break;
    }
    case AtomicAction::Type::NoOp:
      break;
  }

  // 2. sample and serve this slot's low-priority requests
  last_requests_ = sample_requests();
  const RequestBatch& batch = last_requests_;
  AccessReport access =
      low_priority_access_cost(placement_, batch, cfg_.cost_params, network_view());
  for (const auto& ev : access.events)
    if (ev.server >= 0) recency_.touch(ev.server, ev.content, slot_);

  // LRU insertion policy for the non-learning strategies: a full-cloud miss
  // caches the content at the requesting cache when it fits outright.
  if (strategy_ != Strategy::Drlcm) {
    for (const auto& ev : access.events) {
      if (ev.server >= 0) continue;
      int j = ev.origin;
      int l = ev.content;
      if (placement_.y_at(j, l)) continue;
      double size = cfg_.low_catalog[l].size_mb;
      double free = cfg_.caches[j].storage_mb - placement_.stored_low_mb(j, cfg_.low_catalog);
      if (j < num_fixed_) free -= placement_.stored_high_mb(j, cfg_.high_catalog);
      if (is_target(j)) free -= pending_high_mb();
      if (free + kEps < size) continue;
      placement_.y_at(j, l) = 1;
      recency_.touch(j, l, slot_);
      TransferLog insert{{TransferRecord::Kind::Download, Priority::Low, l, j, std::nullopt, size}};
      bootstrap_allowances(insert);
      log.insert(log.end(), insert.begin(), insert.end());
    }
  }

  // 3. deliver the pending high-priority batch to dominating caches
  DeliveryReport delivery = high_priority_delivery_cost(placement_, dominating_, pending_arrivals_,
                                                        cfg_.cost_params, network_view());
  pending_arrivals_.clear();
  std::fill(forced_reserved_.begin(), forced_reserved_.end(), 0.0);

  // Action transfers are priced at the pre-move topology.
  MigrationCost migration = migration_cost_slot(log, cfg_.cost_params, hops_, cfg_.caches);

  // 4. vehicles move one slot
  advance_mobility();
  ++slot_;
  refresh_topology();

  // 5. next batch arrives; targets shed content for it if needed, and fixed
  // caches shed load that no longer fits their request budgets
  sample_pending_arrivals();
  TransferLog forced = forced_evictions();
  clamp_fixed_budgets(forced);
  MigrationCost forced_cost = migration_cost_slot(forced, cfg_.cost_params, hops_, cfg_.caches);
  migration.c1 += forced_cost.c1;
  migration.c2 += forced_cost.c2;
  migration.c3 += forced_cost.c3;
  log.insert(log.end(), forced.begin(), forced.end());

  // 6. slot costs and reward
  slot_cost_ = accumulate_phi(slot_cost_, migration, access.cost, delivery.cost,
                              cfg_.cost_params.weights);
  metrics.migration = migration;
  metrics.access_cost = access.cost;
  metrics.delivery_cost = delivery.cost;
  metrics.reward = reward_value(migration, access.cost, delivery.cost, cfg_.cost_params.weights);
  metrics.power_cost = migration.c1 + migration.c2;
  for (const auto& ev : delivery.events) {
    metrics.power_cost +=
        cfg_.cost_params.download(ev.dominating) * (ev.fixed_mb + ev.cloud_mb);
    for (const auto& [f, mb] : ev.from_fixed) metrics.power_cost += cfg_.cost_params.upload(f) * mb;
  }
  metrics.total_delay = access.total_delay + delivery.total_delay;
  metrics.delay_events = access.requests + delivery.deliveries;
  for (const auto& rec : log) {
    // Migrations = inter-cache movements; cloud-sourced fills do not count.
    if (rec.kind == TransferRecord::Kind::Download) {
      if (rec.source.has_value()) ++metrics.migrations;
    } else {
      ++metrics.evictions;
    }
  }
  metrics.cloud_fetches = access.cloud_fetches + delivery.cloud_fetches;
  metrics.requests = access.requests;
  return metrics;
}

std::vector<ConstraintViolation> Environment::validate() const {
  ConstraintContext ctx{cfg_.caches, cfg_.low_catalog,    cfg_.high_catalog, targets_,
                        dominating_.members, pending_arrivals_, pending_high_mb()};
  return validate_constraints(placement_, ctx);
}

uint64_t Environment::stream_digest() const {
  uint64_t d = mobility_rng_.digest();
  d = d * 1099511628211ull ^ request_rng_.digest();
  d = d * 1099511628211ull ^ arrival_rng_.digest();
  return d;
}

}  // namespace ecdn
