#include "ecdn/agent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ecdn/log.hpp"

namespace ecdn {

ReplayBuffer::ReplayBuffer(size_t capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  entries_.resize(capacity);
}

namespace {

std::vector<uint8_t> compress_state(const StateVector& s) {
  std::vector<uint8_t> out(s.values.size());
  for (size_t i = 0; i < s.values.size(); ++i) {
    double v = s.values[i];
    out[i] = static_cast<uint8_t>(v < 0 ? 0 : v > 255 ? 255 : std::llround(v));
  }
  return out;
}

StateVector expand_state(const std::vector<uint8_t>& bytes) {
  StateVector s;
  s.values.assign(bytes.begin(), bytes.end());
  return s;
}

}  // namespace

void ReplayBuffer::push(const Experience& e) {
  Entry& slot = entries_[next_];
  slot.state = compress_state(e.state);
  slot.next_state = compress_state(e.next_state);
  slot.action = e.action;
  slot.reward = e.reward;
  next_ = (next_ + 1) % entries_.size();
  if (next_ == 0) full_ = true;
}

Experience ReplayBuffer::get(size_t i) const {
  const Entry& slot = entries_[i];
  return Experience{expand_state(slot.state), slot.action, slot.reward,
                    expand_state(slot.next_state)};
}

void ReplayBuffer::gather(const std::vector<int>& indices, Matrix& states, Matrix& next_states,
                          std::vector<int>& actions, std::vector<double>& rewards) const {
  const int width = static_cast<int>(entries_[indices.front()].state.size());
  states.resize(width, static_cast<int>(indices.size()));
  next_states.resize(width, static_cast<int>(indices.size()));
  actions.resize(indices.size());
  rewards.resize(indices.size());
  for (size_t k = 0; k < indices.size(); ++k) {
    const Entry& e = entries_[indices[k]];
    for (int i = 0; i < width; ++i) {
      states(i, k) = e.state[i];
      next_states(i, k) = e.next_state[i];
    }
    actions[k] = e.action;
    rewards[k] = e.reward;
  }
}

std::vector<int> ReplayBuffer::sample_indices(int batch, RngStream& rng) const {
  int n = static_cast<int>(size());
  if (batch > n) throw std::runtime_error("ReplayBuffer: batch larger than stored experiences");
  // Floyd's algorithm: uniform without replacement.
  std::vector<int> chosen;
  chosen.reserve(batch);
  for (int i = n - batch; i < n; ++i) {
    int j = rng.uniform_int(i + 1);
    if (std::find(chosen.begin(), chosen.end(), j) != chosen.end())
      chosen.push_back(i);
    else
      chosen.push_back(j);
  }
  return chosen;
}

int ActionSpace::type_begin(int type) const {
  switch (type) {
    case 0: return 0;
    case 1: return type1_count();
    case 2: return type1_count() + type2_count();
    default: throw std::out_of_range("ActionSpace: bad type");
  }
}

int ActionSpace::type_end(int type) const {
  return type_begin(type) + (type == 0 ? type1_count() : type == 1 ? type2_count() : type3_count());
}

int select_action(const StateVector& state, const std::vector<uint8_t>& legal_mask,
                  QNetwork& selection, double epsilon, RngStream& rng, const ActionSpace& space) {
  if (legal_mask.empty() || std::find(legal_mask.begin(), legal_mask.end(), 1) == legal_mask.end())
    throw std::invalid_argument("select_action: empty legal mask");

  if (epsilon > 0.0 && rng.uniform01() < epsilon) {
    int type = rng.uniform_int(3);
    std::vector<int> candidates;
    for (int a = space.type_begin(type); a < space.type_end(type); ++a)
      if (legal_mask[a]) candidates.push_back(a);
    if (candidates.empty()) return space.total() - 1;  // NoOp fallback
    return candidates[rng.uniform_int(static_cast<int>(candidates.size()))];
  }

  Eigen::Map<const Vector> s(state.values.data(), state.values.size());
  Vector q = selection.forward(s);
  int best = -1;
  for (int a = 0; a < static_cast<int>(legal_mask.size()); ++a) {
    if (!legal_mask[a]) continue;
    if (best < 0 || q[a] > q[best]) best = a;
  }
  return best;
}

std::vector<double> batched_action_values(QNetwork& net, const Matrix& states,
                                          const std::vector<int>& actions) {
  // Dense layers run batched; an LSTM layer threads its memory per column.
  Matrix h = states;
  size_t k = 0;
  for (; k + 1 < net.layers.size(); ++k) {
    auto& layer = net.layers[k];
    if (layer.kind == QNetwork::Layer::Kind::Dense) {
      Matrix pre = layer.dense.weights * h;
      pre.colwise() += layer.dense.biases;
      switch (layer.dense.activation) {
        case Activation::Sigmoid:
          h = pre.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
          break;
        case Activation::Tanh:
          h = pre.array().tanh().matrix();
          break;
        case Activation::Relu:
          h = pre.cwiseMax(0.0);
          break;
        case Activation::Identity:
          h = std::move(pre);
          break;
      }
    } else {
      Matrix out(layer.lstm.hidden(), h.cols());
      for (int c = 0; c < h.cols(); ++c)
        out.col(c) = lstm_forward(layer.lstm, h.col(c)).first;
      h = std::move(out);
    }
  }
  const DenseLayer& out = net.layers.back().dense;
  std::vector<double> values(actions.size());
  for (size_t c = 0; c < actions.size(); ++c)
    values[c] = out.weights.row(actions[c]).dot(h.col(c)) + out.biases[actions[c]];
  return values;
}

namespace {

std::vector<int> batch_argmax(QNetwork& selection, const Matrix& states) {
  Matrix q = selection.forward_batch(states);
  std::vector<int> best(states.cols());
  for (int c = 0; c < q.cols(); ++c) {
    int b = 0;
    for (int a = 1; a < q.rows(); ++a)
      if (q(a, c) > q(b, c)) b = a;
    best[c] = b;
  }
  return best;
}

}  // namespace

std::vector<double> compute_target(const std::vector<Experience>& batch, QNetwork& evaluation,
                                   QNetwork& selection, double discount, double reward_scale) {
  std::vector<double> targets(batch.size());
  if (batch.empty()) return targets;

  const int width = static_cast<int>(batch.front().next_state.values.size());
  Matrix states(width, batch.size());
  for (size_t k = 0; k < batch.size(); ++k)
    states.col(k) = Eigen::Map<const Vector>(batch[k].next_state.values.data(), width);
  std::vector<int> best = batch_argmax(selection, states);
  std::vector<double> values = batched_action_values(evaluation, states, best);
  for (size_t k = 0; k < batch.size(); ++k)
    targets[k] = reward_scale * batch[k].reward + discount * values[k];
  return targets;
}

DdqnAgent::DdqnAgent(const AgentConfig& config, int state_width, const ActionSpace& space,
                     uint64_t seed)
    : config_(config),
      space_(space),
      buffer_(config.replay_capacity),
      explore_rng_(derive_seed(seed, "agent-explore")),
      sample_rng_(derive_seed(seed, "agent-sample")) {
  RngStream init_rng(derive_seed(seed, "agent-init"));
  selection_ = make_q_network(NetworkRole::Selection, state_width, config.hidden_width,
                              space.total(), init_rng, config.use_lstm);
  evaluation_ = make_q_network(NetworkRole::Evaluation, state_width, config.hidden_width,
                               space.total(), init_rng, config.use_lstm);
  sync_target_params(selection_, evaluation_);
  learning_rate_ = config.learning_rate;
  total_planned_steps_ =
      static_cast<int64_t>(config.episodes) * std::max(1, config.slots_per_episode);
}

double DdqnAgent::current_epsilon() const {
  double decay_steps = config_.epsilon_decay_fraction * static_cast<double>(total_planned_steps_);
  if (decay_steps <= 0) return config_.epsilon_final;
  double t = std::min(1.0, static_cast<double>(step_) / decay_steps);
  return config_.epsilon_start + t * (config_.epsilon_final - config_.epsilon_start);
}

int DdqnAgent::greedy_action(const StateVector& state, const std::vector<uint8_t>& mask) {
  return select_action(state, mask, selection_, 0.0, explore_rng_, space_);
}

void DdqnAgent::begin_episode() { evaluation_.reset_memory(); }

SlotMetrics DdqnAgent::train_step(Environment& env) {
  StateVector state = env.state();
  std::vector<uint8_t> mask = env.legal_mask();
  // Purely random buffer-filling during warmup, epsilon-greedy afterwards.
  double epsilon = step_ < config_.warmup_steps ? 1.0 : current_epsilon();
  int action = select_action(state, mask, selection_, epsilon, explore_rng_, space_);

  SlotMetrics metrics = env.step(action);
  Experience exp{std::move(state), action, metrics.reward, env.state()};
  buffer_.push(std::move(exp));
  ++step_;

  if (step_ >= config_.warmup_steps &&
      static_cast<int>(buffer_.size()) >= config_.batch_size) {
    learn();
    if (config_.sync_period > 0 && step_ % config_.sync_period == 0)
      sync_target_params(selection_, evaluation_);
  }
  return metrics;
}

void DdqnAgent::learn() {
  std::vector<int> indices = buffer_.sample_indices(config_.batch_size, sample_rng_);
  Matrix states, next_states;
  std::vector<int> actions;
  std::vector<double> rewards;
  buffer_.gather(indices, states, next_states, actions, rewards);
  const int batch = static_cast<int>(indices.size());

  // Targets: Y = scale*R + gamma * Q_eval(s', argmax_a Q_select(s', a)).
  std::vector<int> best = batch_argmax(selection_, next_states);
  std::vector<double> values = config_.single_net
                                   ? batched_action_values(selection_, next_states, best)
                                   : batched_action_values(evaluation_, next_states, best);
  std::vector<double> targets(batch);
  for (int k = 0; k < batch; ++k)
    targets[k] = config_.reward_scale * rewards[k] + config_.discount * values[k];

  // Er = (1/beta) sum (Y - Q)^2 over the selection network, all in one
  // batched trunk pass (the selection net is pure feed-forward).
  const size_t depth = selection_.layers.size();
  std::vector<Matrix> inputs(depth), pre(depth - 1), post(depth - 1);
  Matrix h = states;
  for (size_t k = 0; k + 1 < depth; ++k) {
    const DenseLayer& d = selection_.layers[k].dense;
    inputs[k] = h;
    Matrix p = d.weights * h;
    p.colwise() += d.biases;
    pre[k] = p;
    switch (d.activation) {
      case Activation::Sigmoid:
        h = p.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
        break;
      case Activation::Tanh:
        h = p.array().tanh().matrix();
        break;
      case Activation::Relu:
        h = p.cwiseMax(0.0);
        break;
      case Activation::Identity:
        h = p;
        break;
    }
    post[k] = h;
  }
  inputs[depth - 1] = h;

  const DenseLayer& out = selection_.layers.back().dense;
  GradientSet grads = selection_.zero_gradients();
  LayerGradient& gout = grads.layers.back();
  Matrix delta(h.rows(), batch);  // gradient into the last hidden activations
  double error_sum = 0.0;
  const double scale = 2.0 / static_cast<double>(batch);
  for (int k = 0; k < batch; ++k) {
    double q = out.weights.row(actions[k]).dot(h.col(k)) + out.biases[actions[k]];
    double diff = q - targets[k];
    error_sum += diff * diff;
    double dq = scale * diff;
    gout.w.row(actions[k]) += dq * h.col(k).transpose();
    gout.b[actions[k]] += dq;
    delta.col(k) = dq * out.weights.row(actions[k]).transpose();
  }
  for (size_t k = depth - 1; k-- > 0;) {
    const DenseLayer& d = selection_.layers[k].dense;
    Matrix dact;
    switch (d.activation) {
      case Activation::Sigmoid:
        dact = post[k].array() * (1.0 - post[k].array());
        break;
      case Activation::Tanh:
        dact = 1.0 - post[k].array().square();
        break;
      case Activation::Relu:
        dact = pre[k].unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
        break;
      case Activation::Identity:
        dact = Matrix::Ones(pre[k].rows(), pre[k].cols());
        break;
    }
    Matrix dpre = delta.cwiseProduct(dact);
    grads.layers[k].w += dpre * inputs[k].transpose();
    grads.layers[k].b += dpre.rowwise().sum();
    if (k > 0) delta = d.weights.transpose() * dpre;
  }
  if (config_.gradient_clip > 0) {
    double norm_sq = 0.0;
    for (const auto& g : grads.layers) {
      norm_sq += g.w.squaredNorm() + g.b.squaredNorm();
      norm_sq += g.wf.squaredNorm() + g.wi.squaredNorm() + g.wo.squaredNorm() +
                 g.wc.squaredNorm();
      norm_sq += g.bf.squaredNorm() + g.bi.squaredNorm() + g.bo.squaredNorm() +
                 g.bc.squaredNorm();
    }
    double norm = std::sqrt(norm_sq);
    if (norm > config_.gradient_clip) grads.scale(config_.gradient_clip / norm);
  }
  selection_.apply_update(grads, learning_rate_);
  last_batch_error_ = error_sum / static_cast<double>(batch);

  // Plateau schedule on the windowed mean error.
  error_window_.push_back(last_batch_error_);
  if (static_cast<int>(error_window_.size()) >= config_.plateau_window) {
    double mean = std::accumulate(error_window_.begin(), error_window_.end(), 0.0) /
                  static_cast<double>(error_window_.size());
    error_window_.clear();
    if (best_window_mean_ >= 0 &&
        mean > best_window_mean_ * (1.0 - config_.plateau_threshold)) {
      learning_rate_ = std::max(learning_rate_ / 2.0, config_.learning_rate_floor);
      log_at(LogLevel::Debug, "plateau: learning rate -> %g", learning_rate_);
    }
    if (best_window_mean_ < 0 || mean < best_window_mean_) best_window_mean_ = mean;
  }
}

std::vector<EpisodeStats> DdqnAgent::run_training(Environment& env,
                                                  const std::function<void(int)>& on_episode_end) {
  std::vector<EpisodeStats> trace;
  trace.reserve(config_.episodes);
  for (int episode = 0; episode < config_.episodes; ++episode) {
    begin_episode();
    EpisodeStats stats;
    stats.episode = episode;
    double phi_before = env.phi();
    double error_sum = 0.0;
    int error_count = 0;
    for (int t = 0; t < config_.slots_per_episode; ++t) {
      SlotMetrics m = train_step(env);
      stats.migration_cost += m.migration.total();
      stats.access_cost += m.access_cost;
      stats.delivery_cost += m.delivery_cost;
      stats.power_cost += m.power_cost;
      stats.total_delay += m.total_delay;
      stats.delay_events += m.delay_events;
      stats.migrations += m.migrations;
      stats.cloud_fetches += m.cloud_fetches;
      if (step_ > config_.warmup_steps) {
        error_sum += last_batch_error_;
        ++error_count;
      }
    }
    stats.phi_delta = env.phi() - phi_before;
    stats.mean_batch_error = error_count > 0 ? error_sum / error_count : 0.0;
    stats.epsilon = current_epsilon();
    stats.learning_rate = learning_rate_;
    trace.push_back(stats);

    if (config_.checkpoint_every > 0 && !config_.checkpoint_dir.empty() &&
        (episode + 1) % config_.checkpoint_every == 0) {
      save_checkpoint(config_.checkpoint_dir + "/checkpoint_" + std::to_string(episode + 1));
    }
    if (on_episode_end) on_episode_end(episode);
  }
  return trace;
}

void DdqnAgent::save_checkpoint(const std::string& prefix) const {
  selection_.save(prefix + "_selection.qnet");
  evaluation_.save(prefix + "_evaluation.qnet");
}

void DdqnAgent::load_checkpoint(const std::string& prefix) {
  selection_ = QNetwork::load(prefix + "_selection.qnet");
  evaluation_ = QNetwork::load(prefix + "_evaluation.qnet");
}

}  // namespace ecdn
