#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "ecdn/rng.hpp"

namespace ecdn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Activation { Sigmoid, Tanh, Relu, Identity };

Vector apply_activation(Activation act, const Vector& pre);
// Elementwise derivative d(act)/d(pre), given pre-activation and output.
Vector activation_derivative(Activation act, const Vector& pre, const Vector& post);

struct DenseLayer {
  Matrix weights;  // out x in
  Vector biases;
  Activation activation = Activation::Identity;
};

// LSTM cell with standard candidate weights mapping (h+n) -> h. Memory and
// output persist across calls until reset_state().
struct LstmCell {
  Matrix w_forget, w_input, w_output, w_candidate;  // h x (h+n)
  Vector b_forget, b_input, b_output, b_candidate;  // h
  Vector memory;  // M_{t-1}
  Vector output;  // Y_{t-1}

  int hidden() const { return static_cast<int>(b_forget.size()); }
  int input_width() const { return static_cast<int>(w_forget.cols()) - hidden(); }
  void reset_state();
};

struct LstmTrace {
  Vector concat;  // [Y_{t-1}, s_t]
  Vector f, i, o, cand;
  Vector memory_prev, memory_new, tanh_memory;
};

// f = sig(Wf.[Y,s]+bf), i = sig(Wi.+bi), o = sig(Wo.+bo),
// cand = tanh(Wc.[Y,s]+bc), M_t = M (x) f (+) i (x) cand, Y_t = tanh(M_t) (x) o.
// Advances the cell state; returns (Y_t, M_t).
std::pair<Vector, Vector> lstm_forward(LstmCell& cell, const Vector& input,
                                       LstmTrace* trace = nullptr);

enum class NetworkRole { Selection, Evaluation };

struct LayerGradient {
  // dense
  Matrix w;
  Vector b;
  // lstm
  Matrix wf, wi, wo, wc;
  Vector bf, bi, bo, bc;
};

struct GradientSet {
  std::vector<LayerGradient> layers;
  void scale(double k);
  bool finite() const;
};

struct ForwardTrace {
  std::vector<Vector> inputs;  // input seen by each layer
  std::vector<Vector> pre;     // dense pre-activations
  std::vector<Vector> post;    // layer outputs
  std::vector<LstmTrace> lstm;
};

// Q-value approximator: a stack of dense layers with at most one LSTM cell
// in a hidden position (evaluation role). The LSTM makes inference stateful:
// one memory stream per episode, reset via reset_memory().
class QNetwork {
 public:
  struct Layer {
    enum class Kind { Dense, Lstm };
    Kind kind = Kind::Dense;
    DenseLayer dense;
    LstmCell lstm;
  };

  NetworkRole role = NetworkRole::Selection;
  std::vector<Layer> layers;

  int input_width() const;
  int output_width() const;
  bool has_lstm() const;

  // Full q vector; advances LSTM memory when present.
  Vector forward(const Vector& input);
  // q value of a single action (skips the unused output rows); optionally
  // records the trace needed by backward().
  double forward_value(const Vector& input, int action, ForwardTrace* trace = nullptr);
  // Batched forward for stateless networks (columns = inputs).
  Matrix forward_batch(const Matrix& inputs) const;

  // Accumulates gradients of a loss whose derivative w.r.t. q[action] is
  // dq (single-step truncation through the LSTM cell).
  void backward(const ForwardTrace& trace, int action, double dq, GradientSet& grads) const;
  GradientSet zero_gradients() const;
  // theta <- theta - lr * grad. Throws std::runtime_error on non-finite grads.
  void apply_update(const GradientSet& grads, double lr);

  void reset_memory();
  std::vector<std::pair<Vector, Vector>> snapshot_memory() const;
  void restore_memory(const std::vector<std::pair<Vector, Vector>>& snap);

  void save(const std::string& path) const;
  static QNetwork load(const std::string& path);
};

// Standard 4-layer architecture: dense(relu) -> [lstm | dense(relu)] ->
// dense(relu) -> linear output. The evaluation role embeds the LSTM cell
// unless use_lstm is false.
QNetwork make_q_network(NetworkRole role, int input_width, int hidden_width, int action_count,
                        RngStream& rng, bool use_lstm = true);

// Copies every shape-matched dense layer from selection into evaluation;
// evaluation's LSTM parameters and memory state are left untouched.
// Throws std::invalid_argument on dense shape mismatch.
void sync_target_params(const QNetwork& selection, QNetwork& evaluation);

// Single-sample squared-error update: Er = 1/2 (target - q[action])^2,
// theta <- theta - lr dEr/dtheta. Returns the pre-update error.
double backward_and_update(QNetwork& net, const Vector& state, int action, double target,
                           double learning_rate);

// Central-difference check of the analytic gradient of Er at the current
// parameters; returns the max relative error over all parameters.
double finite_difference_check(QNetwork& net, const Vector& state, int action, double target,
                               double epsilon = 1e-4);

// Redraws every weight and bias uniformly in [-bound, bound]; used by the
// gradient-verification harness to explore random parameterizations.
void randomize_parameters(QNetwork& net, RngStream& rng, double bound = 0.8);

// True when some ReLU pre-activation sits within `margin` of its kink for
// this input, where a central difference would straddle the
// nondifferentiability.
bool relu_kink_nearby(QNetwork& net, const Vector& state, double margin = 1e-3);

bool networks_equal(const QNetwork& a, const QNetwork& b);

}  // namespace ecdn
