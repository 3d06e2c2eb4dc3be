#include "ecdn/neural.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ecdn {

Vector apply_activation(Activation act, const Vector& pre) {
  switch (act) {
    case Activation::Sigmoid:
      return pre.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    case Activation::Tanh:
      return pre.array().tanh().matrix();
    case Activation::Relu:
      return pre.cwiseMax(0.0);
    case Activation::Identity:
      return pre;
  }
  return pre;
}

Vector activation_derivative(Activation act, const Vector& pre, const Vector& post) {
  switch (act) {
    case Activation::Sigmoid:
      return post.array() * (1.0 - post.array());
    case Activation::Tanh:
      return 1.0 - post.array().square();
    case Activation::Relu:
      return pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
    case Activation::Identity:
      return Vector::Ones(pre.size());
  }
  return Vector::Ones(pre.size());
}

void LstmCell::reset_state() {
  memory.setZero();
  output.setZero();
}

std::pair<Vector, Vector> lstm_forward(LstmCell& cell, const Vector& input, LstmTrace* trace) {
  const int h = cell.hidden();
  const int n = cell.input_width();
  if (input.size() != n) throw std::invalid_argument("lstm_forward: input width mismatch");

  Vector concat(h + n);
  concat << cell.output, input;

  auto sigmoid = [](const Vector& v) { return apply_activation(Activation::Sigmoid, v); };
  Vector f = sigmoid(cell.w_forget * concat + cell.b_forget);
  Vector i = sigmoid(cell.w_input * concat + cell.b_input);
  Vector o = sigmoid(cell.w_output * concat + cell.b_output);
  Vector cand = (cell.w_candidate * concat + cell.b_candidate).array().tanh().matrix();

  Vector memory_new = cell.memory.cwiseProduct(f) + i.cwiseProduct(cand);
  Vector tanh_memory = memory_new.array().tanh().matrix();
  Vector output_new = tanh_memory.cwiseProduct(o);

  if (trace) {
    trace->concat = concat;
    trace->f = f;
    trace->i = i;
    trace->o = o;
    trace->cand = cand;
    trace->memory_prev = cell.memory;
    trace->memory_new = memory_new;
    trace->tanh_memory = tanh_memory;
  }
  cell.memory = memory_new;
  cell.output = output_new;
  return {output_new, memory_new};
}

void GradientSet::scale(double k) {
  for (auto& g : layers) {
    if (g.w.size()) g.w *= k;
    if (g.b.size()) g.b *= k;
    if (g.wf.size()) {
      g.wf *= k;
      g.wi *= k;
      g.wo *= k;
      g.wc *= k;
      g.bf *= k;
      g.bi *= k;
      g.bo *= k;
      g.bc *= k;
    }
  }
}

bool GradientSet::finite() const {
  auto ok_m = [](const Matrix& m) { return m.size() == 0 || m.allFinite(); };
  auto ok_v = [](const Vector& v) { return v.size() == 0 || v.allFinite(); };
  for (const auto& g : layers) {
    if (!ok_m(g.w) || !ok_v(g.b)) return false;
    if (!ok_m(g.wf) || !ok_m(g.wi) || !ok_m(g.wo) || !ok_m(g.wc)) return false;
    if (!ok_v(g.bf) || !ok_v(g.bi) || !ok_v(g.bo) || !ok_v(g.bc)) return false;
  }
  return true;
}

int QNetwork::input_width() const {
  const Layer& first = layers.front();
  return first.kind == Layer::Kind::Dense ? static_cast<int>(first.dense.weights.cols())
                                          : first.lstm.input_width();
}

int QNetwork::output_width() const {
  const Layer& last = layers.back();
  return last.kind == Layer::Kind::Dense ? static_cast<int>(last.dense.weights.rows())
                                         : last.lstm.hidden();
}

bool QNetwork::has_lstm() const {
  for (const auto& layer : layers)
    if (layer.kind == Layer::Kind::Lstm) return true;
  return false;
}

Vector QNetwork::forward(const Vector& input) {
  if (input.size() != input_width())
    throw std::invalid_argument("QNetwork::forward: input width mismatch");
  Vector h = input;
  for (auto& layer : layers) {
    if (layer.kind == Layer::Kind::Dense) {
      h = apply_activation(layer.dense.activation, layer.dense.weights * h + layer.dense.biases);
    } else {
      h = lstm_forward(layer.lstm, h).first;
    }
  }
  return h;
}

double QNetwork::forward_value(const Vector& input, int action, ForwardTrace* trace) {
  if (input.size() != input_width())
    throw std::invalid_argument("QNetwork::forward_value: input width mismatch");
  if (action < 0 || action >= output_width())
    throw std::out_of_range("QNetwork::forward_value: action index out of range");
  if (trace) {
    trace->inputs.assign(layers.size(), Vector());
    trace->pre.assign(layers.size(), Vector());
    trace->post.assign(layers.size(), Vector());
    trace->lstm.assign(layers.size(), LstmTrace());
  }
  Vector h = input;
  for (size_t k = 0; k + 1 < layers.size(); ++k) {
    Layer& layer = layers[k];
    if (trace) trace->inputs[k] = h;
    if (layer.kind == Layer::Kind::Dense) {
      Vector pre = layer.dense.weights * h + layer.dense.biases;
      Vector post = apply_activation(layer.dense.activation, pre);
      if (trace) {
        trace->pre[k] = pre;
        trace->post[k] = post;
      }
      h = post;
    } else {
      LstmTrace* lt = trace ? &trace->lstm[k] : nullptr;
      h = lstm_forward(layer.lstm, h, lt).first;
      if (trace) trace->post[k] = h;
    }
  }
  // Output layer: single row suffices.
  const size_t last = layers.size() - 1;
  if (layers[last].kind != Layer::Kind::Dense)
    throw std::logic_error("QNetwork: output layer must be dense");
  if (trace) trace->inputs[last] = h;
  const DenseLayer& out = layers[last].dense;
  double pre = out.weights.row(action).dot(h) + out.biases[action];
  if (out.activation != Activation::Identity)
    throw std::logic_error("QNetwork: output layer must be linear");
  if (trace) {
    trace->pre[last] = Vector::Constant(1, pre);
    trace->post[last] = Vector::Constant(1, pre);
  }
  return pre;
}

Matrix QNetwork::forward_batch(const Matrix& inputs) const {
  if (has_lstm())
    throw std::logic_error("QNetwork::forward_batch: stateful network cannot batch");
  Matrix h = inputs;
  for (const auto& layer : layers) {
    const DenseLayer& d = layer.dense;
    Matrix pre = d.weights * h;
    pre.colwise() += d.biases;
    switch (d.activation) {
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
  }
  return h;
}

GradientSet QNetwork::zero_gradients() const {
  GradientSet grads;
  grads.layers.resize(layers.size());
  for (size_t k = 0; k < layers.size(); ++k) {
    const Layer& layer = layers[k];
    LayerGradient& g = grads.layers[k];
    if (layer.kind == Layer::Kind::Dense) {
      g.w = Matrix::Zero(layer.dense.weights.rows(), layer.dense.weights.cols());
      g.b = Vector::Zero(layer.dense.biases.size());
    } else {
      const LstmCell& c = layer.lstm;
      g.wf = Matrix::Zero(c.w_forget.rows(), c.w_forget.cols());
      g.wi = g.wf;
      g.wo = g.wf;
      g.wc = g.wf;
      g.bf = Vector::Zero(c.b_forget.size());
      g.bi = g.bf;
      g.bo = g.bf;
      g.bc = g.bf;
    }
  }
  return grads;
}

void QNetwork::backward(const ForwardTrace& trace, int action, double dq,
                        GradientSet& grads) const {
  const size_t last = layers.size() - 1;
  const DenseLayer& out = layers[last].dense;
  LayerGradient& gout = grads.layers[last];
  // Only the selected action's output unit carries error.
  gout.w.row(action) += dq * trace.inputs[last].transpose();
  gout.b[action] += dq;
  Vector delta = dq * out.weights.row(action).transpose();

  for (size_t k = last; k-- > 0;) {
    const Layer& layer = layers[k];
    LayerGradient& g = grads.layers[k];
    if (layer.kind == Layer::Kind::Dense) {
      Vector dpre =
          delta.cwiseProduct(activation_derivative(layer.dense.activation, trace.pre[k], trace.post[k]));
      g.w += dpre * trace.inputs[k].transpose();
      g.b += dpre;
      delta = layer.dense.weights.transpose() * dpre;
    } else {
      const LstmCell& cell = layer.lstm;
      const LstmTrace& lt = trace.lstm[k];
      const int n = cell.input_width();
      Vector d_o = delta.cwiseProduct(lt.tanh_memory);
      Vector d_memory = delta.cwiseProduct(lt.o).cwiseProduct(
          (1.0 - lt.tanh_memory.array().square()).matrix());
      Vector d_f = d_memory.cwiseProduct(lt.memory_prev);
      Vector d_i = d_memory.cwiseProduct(lt.cand);
      Vector d_cand = d_memory.cwiseProduct(lt.i);

      Vector pf = d_f.cwiseProduct(lt.f).cwiseProduct((1.0 - lt.f.array()).matrix());
      Vector pi = d_i.cwiseProduct(lt.i).cwiseProduct((1.0 - lt.i.array()).matrix());
      Vector po = d_o.cwiseProduct(lt.o).cwiseProduct((1.0 - lt.o.array()).matrix());
      Vector pc = d_cand.cwiseProduct((1.0 - lt.cand.array().square()).matrix());

      g.wf += pf * lt.concat.transpose();
      g.wi += pi * lt.concat.transpose();
      g.wo += po * lt.concat.transpose();
      g.wc += pc * lt.concat.transpose();
      g.bf += pf;
      g.bi += pi;
      g.bo += po;
      g.bc += pc;

      Vector d_concat = cell.w_forget.transpose() * pf + cell.w_input.transpose() * pi +
                        cell.w_output.transpose() * po + cell.w_candidate.transpose() * pc;
      delta = d_concat.tail(n);  // gradient into the layer input; Y_{t-1} is history
    }
  }
}

void QNetwork::apply_update(const GradientSet& grads, double lr) {
  if (!grads.finite())
    throw std::runtime_error("QNetwork::apply_update: non-finite gradients");
  for (size_t k = 0; k < layers.size(); ++k) {
    Layer& layer = layers[k];
    const LayerGradient& g = grads.layers[k];
    if (layer.kind == Layer::Kind::Dense) {
      layer.dense.weights -= lr * g.w;
      layer.dense.biases -= lr * g.b;
    } else {
      layer.lstm.w_forget -= lr * g.wf;
      layer.lstm.w_input -= lr * g.wi;
      layer.lstm.w_output -= lr * g.wo;
      layer.lstm.w_candidate -= lr * g.wc;
      layer.lstm.b_forget -= lr * g.bf;
      layer.lstm.b_input -= lr * g.bi;
      layer.lstm.b_output -= lr * g.bo;
      layer.lstm.b_candidate -= lr * g.bc;
    }
  }
}

void QNetwork::reset_memory() {
  for (auto& layer : layers)
    if (layer.kind == Layer::Kind::Lstm) layer.lstm.reset_state();
}

std::vector<std::pair<Vector, Vector>> QNetwork::snapshot_memory() const {
  std::vector<std::pair<Vector, Vector>> snap;
  for (const auto& layer : layers)
    if (layer.kind == Layer::Kind::Lstm) snap.emplace_back(layer.lstm.memory, layer.lstm.output);
  return snap;
}

void QNetwork::restore_memory(const std::vector<std::pair<Vector, Vector>>& snap) {
  size_t idx = 0;
  for (auto& layer : layers) {
    if (layer.kind == Layer::Kind::Lstm) {
      layer.lstm.memory = snap[idx].first;
      layer.lstm.output = snap[idx].second;
      ++idx;
    }
  }
}

namespace {

Matrix init_matrix(int rows, int cols, RngStream& rng) {
  double bound = std::sqrt(6.0 / (rows + cols));
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform_range(-bound, bound);
  return m;
}

QNetwork::Layer dense_layer(int out, int in, Activation act, RngStream& rng) {
  QNetwork::Layer layer;
  layer.kind = QNetwork::Layer::Kind::Dense;
  layer.dense.weights = init_matrix(out, in, rng);
  layer.dense.biases = Vector::Zero(out);
  layer.dense.activation = act;
  return layer;
}

QNetwork::Layer lstm_layer(int hidden, int in, RngStream& rng) {
  QNetwork::Layer layer;
  layer.kind = QNetwork::Layer::Kind::Lstm;
  LstmCell& c = layer.lstm;
  c.w_forget = init_matrix(hidden, hidden + in, rng);
  c.w_input = init_matrix(hidden, hidden + in, rng);
  c.w_output = init_matrix(hidden, hidden + in, rng);
  c.w_candidate = init_matrix(hidden, hidden + in, rng);
  c.b_forget = Vector::Zero(hidden);
  c.b_input = Vector::Zero(hidden);
  c.b_output = Vector::Zero(hidden);
  c.b_candidate = Vector::Zero(hidden);
  c.memory = Vector::Zero(hidden);
  c.output = Vector::Zero(hidden);
  return layer;
}

}  // namespace

QNetwork make_q_network(NetworkRole role, int input_width, int hidden_width, int action_count,
                        RngStream& rng, bool use_lstm) {
  QNetwork net;
  net.role = role;
  net.layers.push_back(dense_layer(hidden_width, input_width, Activation::Relu, rng));
  if (role == NetworkRole::Evaluation && use_lstm)
    net.layers.push_back(lstm_layer(hidden_width, hidden_width, rng));
  else
    net.layers.push_back(dense_layer(hidden_width, hidden_width, Activation::Relu, rng));
  net.layers.push_back(dense_layer(hidden_width, hidden_width, Activation::Relu, rng));
  net.layers.push_back(dense_layer(action_count, hidden_width, Activation::Identity, rng));
  return net;
}

void sync_target_params(const QNetwork& selection, QNetwork& evaluation) {
  if (selection.layers.size() != evaluation.layers.size())
    throw std::invalid_argument("sync_target_params: layer count mismatch");
  for (size_t k = 0; k < selection.layers.size(); ++k) {
    const auto& src = selection.layers[k];
    auto& dst = evaluation.layers[k];
    if (src.kind != QNetwork::Layer::Kind::Dense) continue;
    if (dst.kind != QNetwork::Layer::Kind::Dense) continue;  // lstm keeps its own values
    if (src.dense.weights.rows() != dst.dense.weights.rows() ||
        src.dense.weights.cols() != dst.dense.weights.cols())
      throw std::invalid_argument("sync_target_params: dense shape mismatch");
    dst.dense.weights = src.dense.weights;
    dst.dense.biases = src.dense.biases;
  }
}

double backward_and_update(QNetwork& net, const Vector& state, int action, double target,
                           double learning_rate) {
  if (!std::isfinite(target))
    throw std::invalid_argument("backward_and_update: target must be finite");
  ForwardTrace trace;
  double q = net.forward_value(state, action, &trace);
  double error = 0.5 * (target - q) * (target - q);
  GradientSet grads = net.zero_gradients();
  net.backward(trace, action, q - target, grads);  // dEr/dq = q - target
  net.apply_update(grads, learning_rate);
  return error;
}

namespace {

// Visits every parameter of the network as a mutable double pointer.
template <typename Fn>
void for_each_param(QNetwork& net, Fn&& fn) {
  for (auto& layer : net.layers) {
    if (layer.kind == QNetwork::Layer::Kind::Dense) {
      fn(layer.dense.weights.data(), layer.dense.weights.size());
      fn(layer.dense.biases.data(), layer.dense.biases.size());
    } else {
      for (Matrix* m : {&layer.lstm.w_forget, &layer.lstm.w_input, &layer.lstm.w_output,
                        &layer.lstm.w_candidate})
        fn(m->data(), m->size());
      for (Vector* v : {&layer.lstm.b_forget, &layer.lstm.b_input, &layer.lstm.b_output,
                        &layer.lstm.b_candidate})
        fn(v->data(), v->size());
    }
  }
}

// Flattens gradients in the same visit order as for_each_param.
std::vector<double> flatten(const QNetwork& net, const GradientSet& grads) {
  std::vector<double> flat;
  for (size_t k = 0; k < net.layers.size(); ++k) {
    const auto& layer = net.layers[k];
    const auto& g = grads.layers[k];
    auto append_m = [&](const Matrix& m) { flat.insert(flat.end(), m.data(), m.data() + m.size()); };
    auto append_v = [&](const Vector& v) { flat.insert(flat.end(), v.data(), v.data() + v.size()); };
    if (layer.kind == QNetwork::Layer::Kind::Dense) {
      append_m(g.w);
      append_v(g.b);
    } else {
      append_m(g.wf);
      append_m(g.wi);
      append_m(g.wo);
      append_m(g.wc);
      append_v(g.bf);
      append_v(g.bi);
      append_v(g.bo);
      append_v(g.bc);
    }
  }
  return flat;
}

}  // namespace

double finite_difference_check(QNetwork& net, const Vector& state, int action, double target,
                               double epsilon) {
  if (epsilon <= 0) throw std::invalid_argument("finite_difference_check: epsilon must be positive");
  auto memory = net.snapshot_memory();

  auto error_at = [&]() {
    net.restore_memory(memory);
    double q = net.forward_value(state, action);
    return 0.5 * (target - q) * (target - q);
  };

  net.restore_memory(memory);
  ForwardTrace trace;
  double q = net.forward_value(state, action, &trace);
  GradientSet grads = net.zero_gradients();
  net.backward(trace, action, q - target, grads);
  std::vector<double> analytic = flatten(net, grads);

  std::vector<double*> slots;
  for_each_param(net, [&](double* data, long count) {
    for (long idx = 0; idx < count; ++idx) slots.push_back(data + idx);
  });

  double worst = 0.0;
  for (size_t p = 0; p < slots.size(); ++p) {
    double saved = *slots[p];
    *slots[p] = saved + epsilon;
    double plus = error_at();
    *slots[p] = saved - epsilon;
    double minus = error_at();
    *slots[p] = saved;
    double numeric = (plus - minus) / (2.0 * epsilon);
    double denom = std::max({std::abs(numeric), std::abs(analytic[p]), 1e-12});
    worst = std::max(worst, std::abs(numeric - analytic[p]) / denom);
  }
  net.restore_memory(memory);
  return worst;
}

void randomize_parameters(QNetwork& net, RngStream& rng, double bound) {
  for_each_param(net, [&](double* data, long count) {
    for (long i = 0; i < count; ++i) data[i] = rng.uniform_range(-bound, bound);
  });
}

bool relu_kink_nearby(QNetwork& net, const Vector& state, double margin) {
  auto memory = net.snapshot_memory();
  ForwardTrace trace;
  net.forward_value(state, 0, &trace);
  net.restore_memory(memory);
  for (size_t k = 0; k < net.layers.size(); ++k) {
    if (net.layers[k].kind != QNetwork::Layer::Kind::Dense) continue;
    if (net.layers[k].dense.activation != Activation::Relu) continue;
    for (long i = 0; i < trace.pre[k].size(); ++i)
      if (std::abs(trace.pre[k][i]) < margin) return true;
  }
  return false;
}

namespace {

void write_matrix(std::ofstream& out, const Matrix& m) {
  int64_t rows = m.rows(), cols = m.cols();
  out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  out.write(reinterpret_cast<const char*>(m.data()), sizeof(double) * m.size());
}

Matrix read_matrix(std::ifstream& in) {
  int64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  Matrix m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()), sizeof(double) * m.size());
  return m;
}

void write_vector(std::ofstream& out, const Vector& v) {
  int64_t size = v.size();
  out.write(reinterpret_cast<const char*>(&size), sizeof(size));
  out.write(reinterpret_cast<const char*>(v.data()), sizeof(double) * v.size());
}

Vector read_vector(std::ifstream& in) {
  int64_t size = 0;
  in.read(reinterpret_cast<char*>(&size), sizeof(size));
  Vector v(size);
  in.read(reinterpret_cast<char*>(v.data()), sizeof(double) * v.size());
  return v;
}

constexpr char kMagic[8] = {'E', 'C', 'D', 'N', 'Q', 'N', '0', '1'};

}  // namespace

void QNetwork::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("QNetwork::save: cannot open " + path);
  out.write(kMagic, sizeof(kMagic));
  int32_t role_tag = role == NetworkRole::Selection ? 0 : 1;
  int32_t count = static_cast<int32_t>(layers.size());
  out.write(reinterpret_cast<const char*>(&role_tag), sizeof(role_tag));
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const auto& layer : layers) {
    int32_t kind = layer.kind == Layer::Kind::Dense ? 0 : 1;
    out.write(reinterpret_cast<const char*>(&kind), sizeof(kind));
    if (layer.kind == Layer::Kind::Dense) {
      int32_t act = static_cast<int32_t>(layer.dense.activation);
      out.write(reinterpret_cast<const char*>(&act), sizeof(act));
      write_matrix(out, layer.dense.weights);
      write_vector(out, layer.dense.biases);
    } else {
      write_matrix(out, layer.lstm.w_forget);
      write_matrix(out, layer.lstm.w_input);
      write_matrix(out, layer.lstm.w_output);
      write_matrix(out, layer.lstm.w_candidate);
      write_vector(out, layer.lstm.b_forget);
      write_vector(out, layer.lstm.b_input);
      write_vector(out, layer.lstm.b_output);
      write_vector(out, layer.lstm.b_candidate);
      write_vector(out, layer.lstm.memory);
      write_vector(out, layer.lstm.output);
    }
  }
}

QNetwork QNetwork::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("QNetwork::load: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("QNetwork::load: bad checkpoint header");
  int32_t role_tag = 0, count = 0;
  in.read(reinterpret_cast<char*>(&role_tag), sizeof(role_tag));
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  QNetwork net;
  net.role = role_tag == 0 ? NetworkRole::Selection : NetworkRole::Evaluation;
  net.layers.resize(count);
  for (auto& layer : net.layers) {
    int32_t kind = 0;
    in.read(reinterpret_cast<char*>(&kind), sizeof(kind));
    if (kind == 0) {
      layer.kind = Layer::Kind::Dense;
      int32_t act = 0;
      in.read(reinterpret_cast<char*>(&act), sizeof(act));
      layer.dense.activation = static_cast<Activation>(act);
      layer.dense.weights = read_matrix(in);
      layer.dense.biases = read_vector(in);
    } else {
      layer.kind = Layer::Kind::Lstm;
      layer.lstm.w_forget = read_matrix(in);
      layer.lstm.w_input = read_matrix(in);
      layer.lstm.w_output = read_matrix(in);
      layer.lstm.w_candidate = read_matrix(in);
      layer.lstm.b_forget = read_vector(in);
      layer.lstm.b_input = read_vector(in);
      layer.lstm.b_output = read_vector(in);
      layer.lstm.b_candidate = read_vector(in);
      layer.lstm.memory = read_vector(in);
      layer.lstm.output = read_vector(in);
    }
  }
  if (!in) throw std::runtime_error("QNetwork::load: truncated checkpoint");
  return net;
}

bool networks_equal(const QNetwork& a, const QNetwork& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (size_t k = 0; k < a.layers.size(); ++k) {
    const auto& la = a.layers[k];
    const auto& lb = b.layers[k];
    if (la.kind != lb.kind) return false;
    auto eq_m = [](const Matrix& x, const Matrix& y) {
      return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
    };
    auto eq_v = [](const Vector& x, const Vector& y) { return x.size() == y.size() && x == y; };
    if (la.kind == QNetwork::Layer::Kind::Dense) {
      if (la.dense.activation != lb.dense.activation) return false;
      if (!eq_m(la.dense.weights, lb.dense.weights) || !eq_v(la.dense.biases, lb.dense.biases))
        return false;
    } else {
      if (!eq_m(la.lstm.w_forget, lb.lstm.w_forget) || !eq_m(la.lstm.w_input, lb.lstm.w_input) ||
          !eq_m(la.lstm.w_output, lb.lstm.w_output) ||
          !eq_m(la.lstm.w_candidate, lb.lstm.w_candidate) ||
          !eq_v(la.lstm.b_forget, lb.lstm.b_forget) || !eq_v(la.lstm.b_input, lb.lstm.b_input) ||
          !eq_v(la.lstm.b_output, lb.lstm.b_output) ||
          !eq_v(la.lstm.b_candidate, lb.lstm.b_candidate) ||
          !eq_v(la.lstm.memory, lb.lstm.memory) || !eq_v(la.lstm.output, lb.lstm.output))
        return false;
    }
  }
  return true;
}

}  // namespace ecdn
