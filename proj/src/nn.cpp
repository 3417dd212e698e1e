#include "clickbait/nn.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace clickbait {

namespace {

template <class T>
void require_shape(const Matrix<T>& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw std::invalid_argument(std::string("GRU array ") + name + " has shape " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
}

template <class T>
void require_size(const Vector<T>& v, Eigen::Index size, const char* name) {
  if (v.size() != size) {
    throw std::invalid_argument(std::string(name) + " has length " + std::to_string(v.size()) + ", expected " +
                                std::to_string(size));
  }
}

template <class T>
auto sigmoid_array(const Eigen::ArrayBase<T>& a) {
  using S = typename T::Scalar;
  return (S(1) / (S(1) + (-a).exp()));
}

template <class T>
Matrix<T> glorot(Eigen::Index rows, Eigen::Index cols, Generator& gen) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix<T> m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = static_cast<T>(uniform(gen, -limit, limit));
  }
  return m;
}

Matrix<float> orthogonal(Eigen::Index n, Generator& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix<double> g(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) g(r, c) = normal(gen);
  }
  Eigen::HouseholderQR<Matrix<double>> qr(g);
  Matrix<double> q = qr.householderQ() * Matrix<double>::Identity(n, n);
  const Matrix<double>& r = qr.matrixQR();
  // Sign fix makes the factorization unique.
  for (Eigen::Index c = 0; c < n; ++c) {
    if (r(c, c) < 0) q.col(c) = -q.col(c);
  }
  return q.cast<float>();
}

GruParams<float> init_direction(Eigen::Index hidden, Eigen::Index input, Generator& gen) {
  auto p = GruParams<float>::zeros(hidden, input);
  p.w_reset = glorot<float>(hidden, input, gen);
  p.w_update = glorot<float>(hidden, input, gen);
  p.w_candidate = glorot<float>(hidden, input, gen);
  p.u_reset = orthogonal(hidden, gen);
  p.u_update = orthogonal(hidden, gen);
  p.u_candidate = orthogonal(hidden, gen);
  return p;
}

template <class T>
Vector<T> bernoulli_mask(Eigen::Index size, double rate, Generator& gen) {
  Vector<T> mask(size);
  const T keep = static_cast<T>(1.0 / (1.0 - rate));
  for (Eigen::Index i = 0; i < size; ++i) mask(i) = uniform01(gen) < rate ? T(0) : keep;
  return mask;
}

void check_rate(double rate, const char* name) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument(std::string(name) + " dropout rate must lie in [0, 1)");
}

}  // namespace

template <class T>
T sigmoid(T v) {
  return T(1) / (T(1) + std::exp(-v));
}

template <class T>
GruParams<T> GruParams<T>::zeros(Eigen::Index hidden, Eigen::Index input) {
  return {Matrix<T>::Zero(hidden, input), Matrix<T>::Zero(hidden, input), Matrix<T>::Zero(hidden, input),
          Matrix<T>::Zero(hidden, hidden), Matrix<T>::Zero(hidden, hidden), Matrix<T>::Zero(hidden, hidden),
          Vector<T>::Zero(hidden),         Vector<T>::Zero(hidden),         Vector<T>::Zero(hidden)};
}

template <class T>
void GruParams<T>::check_shapes() const {
  const auto h = hidden();
  const auto d = input();
  require_shape(w_reset, h, d, "w_reset");
  require_shape(w_update, h, d, "w_update");
  require_shape(w_candidate, h, d, "w_candidate");
  require_shape(u_reset, h, h, "u_reset");
  require_shape(u_update, h, h, "u_update");
  require_shape(u_candidate, h, h, "u_candidate");
  require_size(b_reset, h, "b_reset");
  require_size(b_update, h, "b_update");
  require_size(b_candidate, h, "b_candidate");
}

template <class T>
void Model<T>::validate() const {
  forward.check_shapes();
  backward.check_shapes();
  if (forward.input() != dim() || backward.input() != dim()) {
    throw std::invalid_argument("GRU input size must equal the embedding dimension");
  }
  require_size(head.weights, forward.hidden() + backward.hidden(), "head weights");
  check_rate(dropout.embed, "embedding");
  check_rate(dropout.gru_input, "GRU input");
  check_rate(dropout.gru_output, "GRU output");
}

template <class T>
std::vector<NamedArray<T>> parameter_arrays(Model<T>& m) {
  std::vector<NamedArray<T>> out;
  out.push_back({"embedding", {m.embedding.matrix.data(), static_cast<std::size_t>(m.embedding.matrix.size())}});
  for_each_gru_array(m.forward, [&](const char* name, auto& a) {
    out.push_back({std::string("forward.") + name, {a.data(), static_cast<std::size_t>(a.size())}});
  });
  for_each_gru_array(m.backward, [&](const char* name, auto& a) {
    out.push_back({std::string("backward.") + name, {a.data(), static_cast<std::size_t>(a.size())}});
  });
  out.push_back({"head.weights", {m.head.weights.data(), static_cast<std::size_t>(m.head.weights.size())}});
  out.push_back({"head.bias", {&m.head.bias, 1}});
  return out;
}

template <class T>
std::vector<NamedArray<const T>> parameter_arrays(const Model<T>& m) {
  auto mutable_view = parameter_arrays(const_cast<Model<T>&>(m));
  std::vector<NamedArray<const T>> out;
  out.reserve(mutable_view.size());
  for (auto& a : mutable_view) out.push_back({std::move(a.name), a.values});
  return out;
}

Model<float> init_model(EmbeddingTable<float> embedding, Eigen::Index hidden, DropoutConfig dropout,
                        std::uint64_t seed) {
  if (hidden < 1) throw std::invalid_argument("hidden size must be positive");
  auto gen = make_generator(seed, "init");
  Model<float> m;
  m.embedding = std::move(embedding);
  m.forward = init_direction(hidden, m.dim(), gen);
  m.backward = init_direction(hidden, m.dim(), gen);
  m.head.weights = glorot<float>(2 * hidden, 1, gen);
  m.head.bias = 0.0f;
  m.dropout = dropout;
  m.validate();
  return m;
}

template <class T>
GruStep<T> gru_step(const GruParams<T>& p, const Vector<T>& input, const Vector<T>& previous) {
  p.check_shapes();
  require_size(input, p.input(), "GRU input");
  require_size(previous, p.hidden(), "GRU state");
  GruStep<T> s;
  s.reset = sigmoid_array((p.w_reset * input + p.u_reset * previous + p.b_reset).array()).matrix();
  s.update = sigmoid_array((p.w_update * input + p.u_update * previous + p.b_update).array()).matrix();
  s.recurrent_candidate = p.u_candidate * previous;
  s.candidate =
      (p.w_candidate * input + s.reset.cwiseProduct(s.recurrent_candidate) + p.b_candidate).array().tanh().matrix();
  s.state = (T(1) - s.update.array()).matrix().cwiseProduct(previous) + s.update.cwiseProduct(s.candidate);
  return s;
}

template <class T>
DirectionTrace<T> trace_direction(const GruParams<T>& p, const Matrix<T>& inputs) {
  const auto h = p.hidden();
  const auto steps = inputs.cols();
  if (inputs.rows() != p.input()) throw std::invalid_argument("GRU input rows do not match the input size");

  DirectionTrace<T> tr;
  tr.inputs = inputs;
  tr.previous.resize(h, steps);
  tr.reset.resize(h, steps);
  tr.update.resize(h, steps);
  tr.candidate.resize(h, steps);
  tr.recurrent_candidate.resize(h, steps);

  // Input projections for all steps at once.
  Matrix<T> proj_reset = (p.w_reset * inputs).colwise() + p.b_reset;
  Matrix<T> proj_update = (p.w_update * inputs).colwise() + p.b_update;
  Matrix<T> proj_candidate = (p.w_candidate * inputs).colwise() + p.b_candidate;

  Vector<T> state = Vector<T>::Zero(h);
  for (Eigen::Index t = 0; t < steps; ++t) {
    tr.previous.col(t) = state;
    tr.reset.col(t) = sigmoid_array((proj_reset.col(t) + p.u_reset * state).array()).matrix();
    tr.update.col(t) = sigmoid_array((proj_update.col(t) + p.u_update * state).array()).matrix();
    tr.recurrent_candidate.col(t) = p.u_candidate * state;
    tr.candidate.col(t) =
        (proj_candidate.col(t) + tr.reset.col(t).cwiseProduct(tr.recurrent_candidate.col(t))).array().tanh().matrix();
    state = (T(1) - tr.update.col(t).array()).matrix().cwiseProduct(state) +
            tr.update.col(t).cwiseProduct(tr.candidate.col(t));
  }
  tr.final_state = state;
  return tr;
}

template <class T>
Matrix<T> run_direction(const GruParams<T>& p, const Matrix<T>& inputs, bool reversed) {
  p.check_shapes();
  const auto steps = inputs.cols();
  if (steps == 0) return Matrix<T>::Zero(p.hidden(), 1);
  if (!reversed) {
    auto tr = trace_direction(p, inputs);
    Matrix<T> states(p.hidden(), steps);
    states.leftCols(steps - 1) = tr.previous.rightCols(steps - 1);
    states.col(steps - 1) = tr.final_state;
    return states;
  }
  Matrix<T> flipped = inputs.rowwise().reverse();
  auto tr = trace_direction(p, flipped);
  Matrix<T> states(p.hidden(), steps);
  // Step k read position steps-1-k.
  for (Eigen::Index k = 0; k + 1 < steps; ++k) states.col(steps - 1 - k) = tr.previous.col(k + 1);
  states.col(0) = tr.final_state;
  return states;
}

template <class T>
DropoutMasks<T> sample_masks(const Model<T>& m, std::size_t length, Generator& gen) {
  DropoutMasks<T> masks;
  const auto d = m.dim();
  const auto steps = static_cast<Eigen::Index>(length);
  if (m.dropout.embed > 0.0) {
    Vector<T> flat = bernoulli_mask<T>(d * steps, m.dropout.embed, gen);
    masks.embed = Eigen::Map<Matrix<T>>(flat.data(), d, steps);
  }
  if (m.dropout.gru_input > 0.0) {
    masks.input_forward = bernoulli_mask<T>(d, m.dropout.gru_input, gen);
    masks.input_backward = bernoulli_mask<T>(d, m.dropout.gru_input, gen);
  }
  if (m.dropout.gru_output > 0.0) {
    masks.output = bernoulli_mask<T>(m.forward.hidden() + m.backward.hidden(), m.dropout.gru_output, gen);
  }
  return masks;
}

template <class T>
PostTrace<T> forward_trace(const Model<T>& m, const TokenSequence& seq, const DropoutMasks<T>& masks) {
  m.validate();
  const auto d = m.dim();
  const auto steps = static_cast<Eigen::Index>(seq.length);
  if (seq.length > seq.ids.size()) throw std::invalid_argument("token sequence length exceeds its id list");

  PostTrace<T> tr;
  tr.embedded.resize(d, steps);
  for (Eigen::Index t = 0; t < steps; ++t) {
    const auto id = seq.ids[static_cast<std::size_t>(t)];
    if (id < 0 || id >= m.embedding.rows()) throw std::invalid_argument("token id outside the embedding table");
    tr.embedded.col(t) = m.embedding.matrix.row(id).transpose();
  }
  if (masks.embed.size() > 0) tr.embedded.array() *= masks.embed.array();

  Matrix<T> fwd_in = tr.embedded;
  if (masks.input_forward.size() > 0) fwd_in.array().colwise() *= masks.input_forward.array();
  Matrix<T> bwd_in = tr.embedded.rowwise().reverse();
  if (masks.input_backward.size() > 0) bwd_in.array().colwise() *= masks.input_backward.array();

  tr.forward = trace_direction(m.forward, fwd_in);
  tr.backward = trace_direction(m.backward, bwd_in);

  const auto hf = m.forward.hidden();
  const auto hb = m.backward.hidden();
  tr.summary.resize(hf + hb);
  tr.summary.head(hf) = tr.forward.final_state;
  tr.summary.tail(hb) = tr.backward.final_state;
  tr.features = tr.summary;
  if (masks.output.size() > 0) tr.features.array() *= masks.output.array();
  tr.logit = m.head.weights.dot(tr.features) + m.head.bias;
  tr.probability = sigmoid(tr.logit);
  return tr;
}

template <class T>
Vector<T> encode_post(const Model<T>& m, const TokenSequence& seq, Mode mode, Generator* gen) {
  DropoutMasks<T> masks;
  if (mode == Mode::Train) {
    if (gen == nullptr) throw std::invalid_argument("train mode needs a generator for dropout");
    masks = sample_masks(m, seq.length, *gen);
  }
  return forward_trace(m, seq, masks).features;
}

template <class T>
T predict(const Model<T>& m, const TokenSequence& seq) {
  return forward_trace(m, seq, DropoutMasks<T>{}).probability;
}

#define CLICKBAIT_INSTANTIATE_NN(T)                                                                   \
  template T sigmoid<T>(T);                                                                           \
  template struct GruParams<T>;                                                                       \
  template struct Model<T>;                                                                           \
  template std::vector<NamedArray<T>> parameter_arrays<T>(Model<T>&);                                 \
  template std::vector<NamedArray<const T>> parameter_arrays<T>(const Model<T>&);                     \
  template GruStep<T> gru_step<T>(const GruParams<T>&, const Vector<T>&, const Vector<T>&);           \
  template DirectionTrace<T> trace_direction<T>(const GruParams<T>&, const Matrix<T>&);               \
  template Matrix<T> run_direction<T>(const GruParams<T>&, const Matrix<T>&, bool);                   \
  template DropoutMasks<T> sample_masks<T>(const Model<T>&, std::size_t, Generator&);                 \
  template PostTrace<T> forward_trace<T>(const Model<T>&, const TokenSequence&, const DropoutMasks<T>&); \
  template Vector<T> encode_post<T>(const Model<T>&, const TokenSequence&, Mode, Generator*);         \
  template T predict<T>(const Model<T>&, const TokenSequence&);

CLICKBAIT_INSTANTIATE_NN(float)
CLICKBAIT_INSTANTIATE_NN(double)

}  // namespace clickbait
