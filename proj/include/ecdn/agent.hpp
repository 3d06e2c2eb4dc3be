#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ecdn/mdp.hpp"
#include "ecdn/neural.hpp"

namespace ecdn {

struct Experience {
  StateVector state;
  int action = 0;
  double reward = 0.0;
  StateVector next_state;
};

// Fixed-capacity ring with FIFO overwrite and uniform sampling without
// replacement within a batch. States hold small nonnegative integers, so
// entries are stored as bytes (z counts clamp at 255).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity);
  void push(const Experience& e);
  size_t size() const { return full_ ? entries_.size() : next_; }
  size_t capacity() const { return entries_.size(); }
  int action_at(size_t i) const { return entries_[i].action; }
  double reward_at(size_t i) const { return entries_[i].reward; }
  Experience get(size_t i) const;
  std::vector<int> sample_indices(int batch, RngStream& rng) const;
  // Materializes sampled entries as matrix columns for batched training.
  void gather(const std::vector<int>& indices, Matrix& states, Matrix& next_states,
              std::vector<int>& actions, std::vector<double>& rewards) const;

 private:
  struct Entry {
    std::vector<uint8_t> state;
    std::vector<uint8_t> next_state;
    int action = 0;
    double reward = 0.0;
  };
  std::vector<Entry> entries_;
  size_t next_ = 0;
  bool full_ = false;
};

struct AgentConfig {
  int hidden_width = 64;
  bool use_lstm = true;     // LSTM cell in the evaluation network
  bool single_net = false;  // ablation: classic single-network targets
  double discount = 0.9;
  double learning_rate = 1e-3;
  // Slot costs run in the thousands; the learner trains on scaled rewards
  // (argmax-invariant) and clips the batch gradient norm for stability.
  double reward_scale = 1e-3;
  double gradient_clip = 50.0;  // 0 disables clipping
  double epsilon_start = 1.0;
  double epsilon_final = 0.05;
  double epsilon_decay_fraction = 0.5;  // of total planned steps
  int sync_period = 500;
  int batch_size = 30;
  int warmup_steps = 700;
  int replay_capacity = 10000;
  int episodes = 1000;           // K
  int slots_per_episode = 20;    // T
  // Plateau schedule: halve the rate when the mean batch error over the last
  // `plateau_window` learning steps fails to improve by `plateau_threshold`.
  int plateau_window = 200;
  double plateau_threshold = 0.01;
  double learning_rate_floor = 1e-5;
  int checkpoint_every = 0;  // episodes; 0 = off
  std::string checkpoint_dir;
};

// Action-id arithmetic for the three exploration types.
struct ActionSpace {
  int num_caches = 0;
  int num_fixed = 0;
  int num_low = 0;
  int num_high = 0;

  int type1_count() const { return num_caches * num_low; }
  int type2_count() const { return num_fixed * num_high; }
  int type3_count() const { return num_caches * num_caches * num_low; }
  int total() const { return type1_count() + type2_count() + type3_count() + 1; }
  int type_begin(int type) const;
  int type_end(int type) const;
};

// Epsilon-greedy selection per the exploration/exploitation split: a random
// action type and a uniform legal index within it, or the legal argmax of
// the selection network (ties -> lowest index).
int select_action(const StateVector& state, const std::vector<uint8_t>& legal_mask,
                  QNetwork& selection, double epsilon, RngStream& rng, const ActionSpace& space);

// Double-Q targets: Y = R + gamma * Q_eval(s', argmax_a Q_select(s', a)).
// reward_scale rescales R for training-numerics purposes (default exact).
std::vector<double> compute_target(const std::vector<Experience>& batch, QNetwork& evaluation,
                                   QNetwork& selection, double discount,
                                   double reward_scale = 1.0);

// Action values Q(s_k, a_k) for column states, threading LSTM memory in
// column order when present.
std::vector<double> batched_action_values(QNetwork& net, const Matrix& states,
                                          const std::vector<int>& actions);

struct EpisodeStats {
  int episode = 0;
  double phi_delta = 0.0;  // weighted cost accumulated during the episode
  double migration_cost = 0.0;
  double access_cost = 0.0;
  double delivery_cost = 0.0;
  double power_cost = 0.0;
  double total_delay = 0.0;
  int delay_events = 0;
  int migrations = 0;
  int cloud_fetches = 0;
  double mean_batch_error = 0.0;
  double epsilon = 0.0;
  double learning_rate = 0.0;
};

class DdqnAgent {
 public:
  DdqnAgent(const AgentConfig& config, int state_width, const ActionSpace& space, uint64_t seed);

  // One slot: act, store, learn (after warmup), periodic sync.
  SlotMetrics train_step(Environment& env);
  // Full run over config.episodes x config.slots_per_episode on a continuing
  // environment; LSTM memory resets at each episode boundary.
  std::vector<EpisodeStats> run_training(Environment& env,
                                         const std::function<void(int)>& on_episode_end = {});

  int greedy_action(const StateVector& state, const std::vector<uint8_t>& mask);
  double current_epsilon() const;
  double current_learning_rate() const { return learning_rate_; }
  int64_t steps() const { return step_; }
  double last_batch_error() const { return last_batch_error_; }

  QNetwork& selection() { return selection_; }
  QNetwork& evaluation() { return evaluation_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  void begin_episode();  // resets evaluation memory

  void save_checkpoint(const std::string& prefix) const;
  void load_checkpoint(const std::string& prefix);

 private:
  void learn();

  AgentConfig config_;
  ActionSpace space_;
  QNetwork selection_;
  QNetwork evaluation_;
  ReplayBuffer buffer_;
  RngStream explore_rng_;
  RngStream sample_rng_;
  int64_t step_ = 0;
  int64_t total_planned_steps_ = 0;
  double learning_rate_ = 0.0;
  double last_batch_error_ = 0.0;
  // plateau tracking
  std::deque<double> error_window_;
  double best_window_mean_ = -1.0;
  int window_fill_ = 0;
};

}  // namespace ecdn
