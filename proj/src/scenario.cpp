#include "ecdn/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ecdn {

using nlohmann::json;

namespace {

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw std::invalid_argument("scenario: " + key + " " + what);
}

template <typename T>
void read_field(const json& section, const char* key, T& out) {
  if (section.contains(key)) out = section.at(key).get<T>();
}

void check_known_keys(const json& obj, const std::set<std::string>& known,
                      const std::string& section) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key()))
      throw std::invalid_argument("scenario: unknown key '" + section + it.key() + "'");
  }
}

}  // namespace

void validate_scenario(const ScenarioSpec& s) {
  require(s.grid_n >= 1, "grid.n", "must be >= 1");
  require(s.cell_side_m > 0, "grid.cell_side_m", "must be positive");
  require(s.speed_kmh >= 0, "mobility.speed_kmh", "must be nonnegative");
  double mu_sum = s.mu_straight + s.mu_left + s.mu_right;
  require(s.mu_straight >= 0 && s.mu_straight <= 1, "mobility.mu_straight", "must be in [0,1]");
  require(s.mu_left >= 0 && s.mu_left <= 1, "mobility.mu_left", "must be in [0,1]");
  require(s.mu_right >= 0 && s.mu_right <= 1, "mobility.mu_right", "must be in [0,1]");
  require(std::abs(mu_sum - 1.0) < 1e-9, "mobility.mu_*", "must sum to 1");
  require(s.t_cap > 0, "mobility.t_cap", "must be positive");
  require(s.fixed_count >= 0, "caches.fixed_count", "must be nonnegative");
  require(s.mobile_count >= 1, "caches.mobile_count", "must be >= 1");
  require(s.fixed_storage_mb > 0, "caches.fixed.storage_mb", "must be positive");
  require(s.mobile_storage_mb > 0, "caches.mobile.storage_mb", "must be positive");
  require(s.fixed_processing_units > 0, "caches.fixed.processing_units", "must be positive");
  require(s.mobile_processing_units > 0, "caches.mobile.processing_units", "must be positive");
  require(s.fixed_units_per_request > 0, "caches.fixed.units_per_request", "must be positive");
  require(s.mobile_units_per_request > 0, "caches.mobile.units_per_request", "must be positive");
  require(s.fixed_processing_units / s.fixed_units_per_request >= 1.0,
          "caches.fixed.processing_units", "must allow at least one request");
  require(s.mobile_processing_units / s.mobile_units_per_request >= 1.0,
          "caches.mobile.processing_units", "must allow at least one request");
  require(s.fixed_coverage_m > 0, "caches.fixed.coverage_diameter_m", "must be positive");
  require(s.mobile_coverage_m > 0, "caches.mobile.coverage_diameter_m", "must be positive");
  require(s.low_count >= 1, "contents.low_count", "must be >= 1");
  require(s.low_size_min_mb > 0, "contents.low_size_range_mb", "must be positive");
  require(s.low_size_max_mb >= s.low_size_min_mb, "contents.low_size_range_mb", "must be ordered");
  require(s.high_count >= 0, "contents.high_count", "must be nonnegative");
  if (s.high_count > 0) {
    require(s.high_size_min_mb > 0, "contents.high_size_range_mb", "must be positive");
    require(s.high_size_max_mb >= s.high_size_min_mb, "contents.high_size_range_mb",
            "must be ordered");
    require(s.high_size_max_mb <= s.mobile_storage_mb, "contents.high_size_range_mb",
            "must fit the target caches");
  }
  require(s.initially_full_mobiles >= 0 && s.initially_full_mobiles <= s.mobile_count,
          "contents.initially_full_mobile_caches", "must be within the mobile count");
  require(s.initial_targets >= 0 && s.initial_targets <= s.mobile_count,
          "contents.initial_target_caches", "must be within the mobile count");
  require(s.zipf_slope > 0 && s.zipf_slope <= 1.0, "demand.zipf_slope", "must be in (0,1]");
  require(s.request_rate >= 0, "demand.request_rate", "must be nonnegative");
  require(s.high_arrival_rate >= 0, "demand.high_arrival_rate", "must be nonnegative");
  require(s.data_rate_mb > 0, "links.data_rate_mb_per_unit", "must be positive");
  require(s.propagation_delay >= 0, "links.propagation_delay", "must be nonnegative");
  require(s.cloud_delay_per_mb >= 0, "links.cloud_delay_per_mb", "must be nonnegative");
  require(s.upload_cost_per_mb >= 0, "costs.upload_cost_per_mb", "must be nonnegative");
  require(s.download_cost_per_mb >= 0, "costs.download_cost_per_mb", "must be nonnegative");
  require(s.bandwidth_cost_per_mb_hop >= 0, "costs.bandwidth_cost_per_mb_hop",
          "must be nonnegative");
  require(s.low_delay_cost >= 0, "costs.low_delay_cost", "must be nonnegative");
  require(s.high_delay_cost >= 0, "costs.high_delay_cost", "must be nonnegative");
  require(s.weights.migration >= 0 && s.weights.access >= 0 && s.weights.delivery >= 0,
          "costs.weights", "must be nonnegative");
  require(s.sigma >= 1, "topology.sigma", "must be >= 1");
  require(s.agent.hidden_width >= 1, "agent.hidden_width", "must be >= 1");
  require(s.agent.discount >= 0 && s.agent.discount <= 1, "agent.discount", "must be in [0,1]");
  require(s.agent.learning_rate > 0, "agent.learning_rate", "must be positive");
  require(s.agent.reward_scale > 0, "agent.reward_scale", "must be positive");
  require(s.agent.gradient_clip >= 0, "agent.gradient_clip", "must be nonnegative");
  require(s.agent.batch_size >= 1, "agent.batch_size", "must be >= 1");
  require(s.agent.warmup_steps >= s.agent.batch_size, "agent.warmup_steps",
          "must cover at least one batch");
  require(s.agent.replay_capacity >= s.agent.batch_size, "agent.replay_capacity",
          "must hold at least one batch");
  require(s.agent.slots_per_episode >= 1, "agent.slots_per_episode", "must be >= 1");
}

ScenarioSpec scenario_from_json_text(const std::string& text) {
  json root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  if (!root.is_object()) throw std::invalid_argument("scenario: top level must be an object");
  check_known_keys(root,
                   {"grid", "mobility", "caches", "contents", "demand", "links", "costs",
                    "topology", "agent", "seed"},
                   "");

  ScenarioSpec s;
  if (root.contains("grid")) {
    const json& g = root["grid"];
    check_known_keys(g, {"n", "cell_side_m"}, "grid.");
    read_field(g, "n", s.grid_n);
    read_field(g, "cell_side_m", s.cell_side_m);
  }
  if (root.contains("mobility")) {
    const json& m = root["mobility"];
    check_known_keys(m, {"speed_kmh", "mu_straight", "mu_left", "mu_right", "t_cap", "trace_file"},
                     "mobility.");
    read_field(m, "speed_kmh", s.speed_kmh);
    read_field(m, "mu_straight", s.mu_straight);
    read_field(m, "mu_left", s.mu_left);
    read_field(m, "mu_right", s.mu_right);
    read_field(m, "t_cap", s.t_cap);
    read_field(m, "trace_file", s.trace_file);
  }
  if (root.contains("caches")) {
    const json& c = root["caches"];
    check_known_keys(c, {"fixed_count", "mobile_count", "fixed", "mobile"}, "caches.");
    read_field(c, "fixed_count", s.fixed_count);
    read_field(c, "mobile_count", s.mobile_count);
    if (c.contains("fixed")) {
      const json& f = c["fixed"];
      check_known_keys(
          f, {"storage_mb", "processing_units", "units_per_request", "coverage_diameter_m"},
          "caches.fixed.");
      read_field(f, "storage_mb", s.fixed_storage_mb);
      read_field(f, "processing_units", s.fixed_processing_units);
      read_field(f, "units_per_request", s.fixed_units_per_request);
      read_field(f, "coverage_diameter_m", s.fixed_coverage_m);
    }
    if (c.contains("mobile")) {
      const json& m = c["mobile"];
      check_known_keys(
          m, {"storage_mb", "processing_units", "units_per_request", "coverage_diameter_m"},
          "caches.mobile.");
      read_field(m, "storage_mb", s.mobile_storage_mb);
      read_field(m, "processing_units", s.mobile_processing_units);
      read_field(m, "units_per_request", s.mobile_units_per_request);
      read_field(m, "coverage_diameter_m", s.mobile_coverage_m);
    }
  }
  if (root.contains("contents")) {
    const json& c = root["contents"];
    check_known_keys(c,
                     {"low_count", "low_size_range_mb", "high_count", "high_size_range_mb",
                      "initially_full_mobile_caches", "initial_target_caches"},
                     "contents.");
    read_field(c, "low_count", s.low_count);
    read_field(c, "high_count", s.high_count);
    if (c.contains("low_size_range_mb")) {
      auto range = c["low_size_range_mb"].get<std::vector<double>>();
      require(range.size() == 2, "contents.low_size_range_mb", "must be [min, max]");
      s.low_size_min_mb = range[0];
      s.low_size_max_mb = range[1];
    }
    if (c.contains("high_size_range_mb")) {
      auto range = c["high_size_range_mb"].get<std::vector<double>>();
      require(range.size() == 2, "contents.high_size_range_mb", "must be [min, max]");
      s.high_size_min_mb = range[0];
      s.high_size_max_mb = range[1];
    }
    read_field(c, "initially_full_mobile_caches", s.initially_full_mobiles);
    read_field(c, "initial_target_caches", s.initial_targets);
  }
  if (root.contains("demand")) {
    const json& d = root["demand"];
    check_known_keys(d, {"zipf_slope", "request_rate", "zipf_normalization", "high_arrival_rate"},
                     "demand.");
    read_field(d, "zipf_slope", s.zipf_slope);
    read_field(d, "request_rate", s.request_rate);
    read_field(d, "high_arrival_rate", s.high_arrival_rate);
    if (d.contains("zipf_normalization")) {
      std::string mode = d["zipf_normalization"].get<std::string>();
      if (mode == "reciprocal_rank")
        s.zipf_normalization = ZipfNormalization::ReciprocalRank;
      else if (mode == "standard")
        s.zipf_normalization = ZipfNormalization::Standard;
      else
        throw std::invalid_argument("scenario: demand.zipf_normalization must be "
                                    "'reciprocal_rank' or 'standard'");
    }
  }
  if (root.contains("links")) {
    const json& l = root["links"];
    check_known_keys(l, {"data_rate_mb_per_unit", "propagation_delay", "cloud_delay_per_mb"},
                     "links.");
    read_field(l, "data_rate_mb_per_unit", s.data_rate_mb);
    read_field(l, "propagation_delay", s.propagation_delay);
    read_field(l, "cloud_delay_per_mb", s.cloud_delay_per_mb);
  }
  if (root.contains("costs")) {
    const json& c = root["costs"];
    check_known_keys(c,
                     {"upload_cost_per_mb", "download_cost_per_mb", "bandwidth_cost_per_mb_hop",
                      "low_delay_cost", "high_delay_cost", "weights", "bandwidth_metric"},
                     "costs.");
    read_field(c, "upload_cost_per_mb", s.upload_cost_per_mb);
    read_field(c, "download_cost_per_mb", s.download_cost_per_mb);
    read_field(c, "bandwidth_cost_per_mb_hop", s.bandwidth_cost_per_mb_hop);
    read_field(c, "low_delay_cost", s.low_delay_cost);
    read_field(c, "high_delay_cost", s.high_delay_cost);
    if (c.contains("weights")) {
      auto w = c["weights"].get<std::vector<double>>();
      require(w.size() == 3, "costs.weights", "must be [w_M, w_A, w_D]");
      s.weights = {w[0], w[1], w[2]};
    }
    if (c.contains("bandwidth_metric")) {
      std::string metric = c["bandwidth_metric"].get<std::string>();
      if (metric == "hops")
        s.bandwidth_metric = BandwidthMetric::Hops;
      else if (metric == "euclidean")
        s.bandwidth_metric = BandwidthMetric::Euclidean;
      else
        throw std::invalid_argument("scenario: costs.bandwidth_metric must be 'hops' or 'euclidean'");
    }
  }
  if (root.contains("topology")) {
    const json& t = root["topology"];
    check_known_keys(t, {"sigma"}, "topology.");
    read_field(t, "sigma", s.sigma);
  }
  if (root.contains("agent")) {
    const json& a = root["agent"];
    check_known_keys(a,
                     {"hidden_width", "use_lstm", "single_net", "discount", "learning_rate",
                      "reward_scale", "gradient_clip",
                      "epsilon_start", "epsilon_final", "epsilon_decay_fraction", "sync_period",
                      "batch_size", "warmup_steps", "replay_capacity", "episodes",
                      "slots_per_episode", "plateau_window", "plateau_threshold",
                      "learning_rate_floor", "checkpoint_every"},
                     "agent.");
    read_field(a, "hidden_width", s.agent.hidden_width);
    read_field(a, "use_lstm", s.agent.use_lstm);
    read_field(a, "single_net", s.agent.single_net);
    read_field(a, "discount", s.agent.discount);
    read_field(a, "learning_rate", s.agent.learning_rate);
    read_field(a, "reward_scale", s.agent.reward_scale);
    read_field(a, "gradient_clip", s.agent.gradient_clip);
    read_field(a, "epsilon_start", s.agent.epsilon_start);
    read_field(a, "epsilon_final", s.agent.epsilon_final);
    read_field(a, "epsilon_decay_fraction", s.agent.epsilon_decay_fraction);
    read_field(a, "sync_period", s.agent.sync_period);
    read_field(a, "batch_size", s.agent.batch_size);
    read_field(a, "warmup_steps", s.agent.warmup_steps);
    read_field(a, "replay_capacity", s.agent.replay_capacity);
    read_field(a, "episodes", s.agent.episodes);
    read_field(a, "slots_per_episode", s.agent.slots_per_episode);
    read_field(a, "plateau_window", s.agent.plateau_window);
    read_field(a, "plateau_threshold", s.agent.plateau_threshold);
    read_field(a, "learning_rate_floor", s.agent.learning_rate_floor);
    read_field(a, "checkpoint_every", s.agent.checkpoint_every);
  }
  read_field(root, "seed", s.seed);

  validate_scenario(s);
  return s;
}

ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("scenario: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json_text(buf.str());
}

std::string scenario_to_json_text(const ScenarioSpec& s) {
  json root;
  root["grid"] = {{"n", s.grid_n}, {"cell_side_m", s.cell_side_m}};
  root["mobility"] = {{"speed_kmh", s.speed_kmh}, {"mu_straight", s.mu_straight},
                      {"mu_left", s.mu_left},     {"mu_right", s.mu_right},
                      {"t_cap", s.t_cap},         {"trace_file", s.trace_file}};
  root["caches"] = {
      {"fixed_count", s.fixed_count},
      {"mobile_count", s.mobile_count},
      {"fixed",
       {{"storage_mb", s.fixed_storage_mb},
        {"processing_units", s.fixed_processing_units},
        {"units_per_request", s.fixed_units_per_request},
        {"coverage_diameter_m", s.fixed_coverage_m}}},
      {"mobile",
       {{"storage_mb", s.mobile_storage_mb},
        {"processing_units", s.mobile_processing_units},
        {"units_per_request", s.mobile_units_per_request},
        {"coverage_diameter_m", s.mobile_coverage_m}}}};
  root["contents"] = {{"low_count", s.low_count},
                      {"low_size_range_mb", {s.low_size_min_mb, s.low_size_max_mb}},
                      {"high_count", s.high_count},
                      {"high_size_range_mb", {s.high_size_min_mb, s.high_size_max_mb}},
                      {"initially_full_mobile_caches", s.initially_full_mobiles},
                      {"initial_target_caches", s.initial_targets}};
  root["demand"] = {{"zipf_slope", s.zipf_slope},
                    {"request_rate", s.request_rate},
                    {"zipf_normalization", s.zipf_normalization == ZipfNormalization::ReciprocalRank
                                               ? "reciprocal_rank"
                                               : "standard"},
                    {"high_arrival_rate", s.high_arrival_rate}};
  root["links"] = {{"data_rate_mb_per_unit", s.data_rate_mb},
                   {"propagation_delay", s.propagation_delay},
                   {"cloud_delay_per_mb", s.cloud_delay_per_mb}};
  root["costs"] = {{"upload_cost_per_mb", s.upload_cost_per_mb},
                   {"download_cost_per_mb", s.download_cost_per_mb},
                   {"bandwidth_cost_per_mb_hop", s.bandwidth_cost_per_mb_hop},
                   {"low_delay_cost", s.low_delay_cost},
                   {"high_delay_cost", s.high_delay_cost},
                   {"weights", {s.weights.migration, s.weights.access, s.weights.delivery}},
                   {"bandwidth_metric",
                    s.bandwidth_metric == BandwidthMetric::Hops ? "hops" : "euclidean"}};
  root["topology"] = {{"sigma", s.sigma}};
  root["agent"] = {{"hidden_width", s.agent.hidden_width},
                   {"use_lstm", s.agent.use_lstm},
                   {"single_net", s.agent.single_net},
                   {"discount", s.agent.discount},
                   {"learning_rate", s.agent.learning_rate},
                   {"reward_scale", s.agent.reward_scale},
                   {"gradient_clip", s.agent.gradient_clip},
                   {"epsilon_start", s.agent.epsilon_start},
                   {"epsilon_final", s.agent.epsilon_final},
                   {"epsilon_decay_fraction", s.agent.epsilon_decay_fraction},
                   {"sync_period", s.agent.sync_period},
                   {"batch_size", s.agent.batch_size},
                   {"warmup_steps", s.agent.warmup_steps},
                   {"replay_capacity", s.agent.replay_capacity},
                   {"episodes", s.agent.episodes},
                   {"slots_per_episode", s.agent.slots_per_episode},
                   {"plateau_window", s.agent.plateau_window},
                   {"plateau_threshold", s.agent.plateau_threshold},
                   {"learning_rate_floor", s.agent.learning_rate_floor},
                   {"checkpoint_every", s.agent.checkpoint_every}};
  root["seed"] = s.seed;
  return root.dump(2);
}

void save_scenario(const ScenarioSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("scenario: cannot write " + path);
  out << scenario_to_json_text(spec) << "\n";
}

EnvConfig build_env_config(const ScenarioSpec& spec) {
  validate_scenario(spec);
  EnvConfig cfg;
  cfg.grid = RoadGrid{spec.grid_n, spec.cell_side_m};
  cfg.turns = TurnPolicy{spec.mu_straight, spec.mu_left, spec.mu_right};
  cfg.t_cap = spec.t_cap;
  cfg.sigma = spec.sigma;
  cfg.high_arrival_rate = spec.high_arrival_rate;
  cfg.initial_full_mobiles = spec.initially_full_mobiles;
  cfg.initial_targets = spec.initial_targets;
  cfg.links.data_rate = spec.data_rate_mb;
  cfg.links.propagation_delay = spec.propagation_delay;
  cfg.links.cloud_delay_per_mb = spec.cloud_delay_per_mb;
  cfg.demand.zipf_slope = spec.zipf_slope;
  cfg.demand.request_rate = spec.request_rate;
  cfg.demand.normalization = spec.zipf_normalization;
  cfg.demand.catalog_size = spec.low_count;

  const double speed_mps = spec.speed_kmh / 3.6;
  // Fixed caches at grid intersections first, extras at segment midpoints.
  for (int f = 0; f < spec.fixed_count; ++f) {
    EdgeCache cache;
    cache.id = f;
    if (f < spec.grid_n * spec.grid_n) {
      int a = f % spec.grid_n;
      int b = f / spec.grid_n;
      cache.kind = CacheKind::FixedIntersection;
      cache.coverage.center = {a * spec.cell_side_m, b * spec.cell_side_m};
    } else {
      int k = f - spec.grid_n * spec.grid_n;
      int a = k % spec.grid_n;
      int b = k / spec.grid_n;
      cache.kind = CacheKind::FixedStraight;
      cache.coverage.center = {(a + 0.5) * spec.cell_side_m,
                               cfg.grid.wrap(b * spec.cell_side_m)};
    }
    cache.storage_mb = spec.fixed_storage_mb;
    cache.processing_units = spec.fixed_processing_units;
    cache.units_per_request = spec.fixed_units_per_request;
    cache.coverage.diameter = spec.fixed_coverage_m;
    cfg.caches.push_back(cache);
  }
  for (int m = 0; m < spec.mobile_count; ++m) {
    EdgeCache cache;
    cache.id = spec.fixed_count + m;
    cache.kind = CacheKind::Mobile;
    cache.storage_mb = spec.mobile_storage_mb;
    cache.processing_units = spec.mobile_processing_units;
    cache.units_per_request = spec.mobile_units_per_request;
    cache.coverage.diameter = spec.mobile_coverage_m;
    cache.kinematics.speed = speed_mps;
    cfg.caches.push_back(cache);
  }
  cfg.cost_params = CostParameters::uniform(static_cast<int>(cfg.caches.size()),
                                            spec.upload_cost_per_mb, spec.download_cost_per_mb);
  cfg.cost_params.bandwidth_cost_per_mb_hop = spec.bandwidth_cost_per_mb_hop;
  cfg.cost_params.low_delay_cost = spec.low_delay_cost;
  cfg.cost_params.high_delay_cost = spec.high_delay_cost;
  cfg.cost_params.weights = spec.weights;
  cfg.cost_params.bandwidth_metric = spec.bandwidth_metric;

  // Catalogs: sizes and the popularity permutation come from the scenario
  // seed, not the per-run seed, so sweeps and strategy comparisons share one
  // content universe.
  RngStream catalog_rng(derive_seed(spec.seed, "catalog"));
  std::vector<int> ranks(spec.low_count);
  for (int l = 0; l < spec.low_count; ++l) ranks[l] = l + 1;
  for (int l = spec.low_count - 1; l > 0; --l)
    std::swap(ranks[l], ranks[catalog_rng.uniform_int(l + 1)]);
  for (int l = 0; l < spec.low_count; ++l) {
    Content c;
    c.id = l;
    c.priority = Priority::Low;
    c.size_mb = catalog_rng.uniform_range(spec.low_size_min_mb, spec.low_size_max_mb);
    c.popularity_rank = ranks[l];
    cfg.low_catalog.push_back(c);
  }
  for (int h = 0; h < spec.high_count; ++h) {
    Content c;
    c.id = h;
    c.priority = Priority::High;
    c.size_mb = catalog_rng.uniform_range(spec.high_size_min_mb, spec.high_size_max_mb);
    cfg.high_catalog.push_back(c);
  }

  if (!spec.trace_file.empty()) cfg.trace = load_mobility_trace(spec.trace_file);
  return cfg;
}

}  // namespace ecdn
