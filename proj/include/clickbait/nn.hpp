#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "clickbait/linalg.hpp"
#include "clickbait/rng.hpp"
#include "clickbait/text.hpp"

namespace clickbait {

/// One GRU direction. Input transforms are hidden x input, recurrent
/// transforms hidden x hidden.
template <class T>
struct GruParams {
  Matrix<T> w_reset, w_update, w_candidate;
  Matrix<T> u_reset, u_update, u_candidate;
  Vector<T> b_reset, b_update, b_candidate;

  static GruParams zeros(Eigen::Index hidden, Eigen::Index input);

  Eigen::Index hidden() const { return u_reset.rows(); }
  Eigen::Index input() const { return w_reset.cols(); }

  /// Throws std::invalid_argument if the nine shapes disagree.
  void check_shapes() const;

  template <class U>
  GruParams<U> cast() const {
    return {w_reset.template cast<U>(),     w_update.template cast<U>(), w_candidate.template cast<U>(),
            u_reset.template cast<U>(),     u_update.template cast<U>(), u_candidate.template cast<U>(),
            b_reset.template cast<U>(),     b_update.template cast<U>(), b_candidate.template cast<U>()};
  }
};

/// Calls fn(name, array) for the nine arrays in a fixed order.
template <class Params, class Fn>
void for_each_gru_array(Params& p, Fn&& fn) {
  fn("w_reset", p.w_reset);
  fn("w_update", p.w_update);
  fn("w_candidate", p.w_candidate);
  fn("u_reset", p.u_reset);
  fn("u_update", p.u_update);
  fn("u_candidate", p.u_candidate);
  fn("b_reset", p.b_reset);
  fn("b_update", p.b_update);
  fn("b_candidate", p.b_candidate);
}

template <class T>
struct DenseSigmoid {
  Vector<T> weights;
  T bias = 0;

  template <class U>
  DenseSigmoid<U> cast() const {
    return {weights.template cast<U>(), static_cast<U>(bias)};
  }
};

struct DropoutConfig {
  double embed = 0.2;
  double gru_input = 0.2;
  double gru_output = 0.5;
};

template <class T>
struct Model {
  EmbeddingTable<T> embedding;
  GruParams<T> forward;
  GruParams<T> backward;
  DenseSigmoid<T> head;
  DropoutConfig dropout;

  Eigen::Index dim() const { return embedding.dim(); }
  Eigen::Index hidden() const { return forward.hidden(); }

  /// Throws std::invalid_argument on inconsistent shapes or dropout rates.
  void validate() const;

  template <class U>
  Model<U> cast() const {
    return {embedding.template cast<U>(), forward.template cast<U>(), backward.template cast<U>(),
            head.template cast<U>(), dropout};
  }
};

/// A flat view of one parameter array in storage order.
template <class T>
struct NamedArray {
  std::string name;
  std::span<T> values;
};

/// Every learnable array of the model in checkpoint order: embedding,
/// forward.*, backward.*, head.weights, head.bias.
template <class T>
std::vector<NamedArray<T>> parameter_arrays(Model<T>& m);
template <class T>
std::vector<NamedArray<const T>> parameter_arrays(const Model<T>& m);

/// Glorot-uniform input transforms and head, orthogonal recurrent
/// transforms (QR of a Gaussian), zero biases. Uses the "init" stream.
Model<float> init_model(EmbeddingTable<float> embedding, Eigen::Index hidden, DropoutConfig dropout,
                        std::uint64_t seed);

template <class T>
struct GruStep {
  Vector<T> state;
  Vector<T> reset;
  Vector<T> update;
  Vector<T> candidate;
  Vector<T> recurrent_candidate;  // u_candidate * previous state, before gating
};

/// One application of the cell. Throws std::invalid_argument on shape mismatch.
template <class T>
GruStep<T> gru_step(const GruParams<T>& p, const Vector<T>& input, const Vector<T>& previous);

/// Everything backpropagation needs from one direction, column t being the
/// t-th processed step.
template <class T>
struct DirectionTrace {
  Matrix<T> inputs;
  Matrix<T> previous;
  Matrix<T> reset;
  Matrix<T> update;
  Matrix<T> candidate;
  Matrix<T> recurrent_candidate;
  Vector<T> final_state;

  Eigen::Index steps() const { return inputs.cols(); }
};

/// Runs the cell over the columns of `inputs` in order from the zero state.
template <class T>
DirectionTrace<T> trace_direction(const GruParams<T>& p, const Matrix<T>& inputs);

/// States aligned to input positions. In reversed mode column t is the state
/// after reading x_N..x_t. An empty input yields one zero column.
template <class T>
Matrix<T> run_direction(const GruParams<T>& p, const Matrix<T>& inputs, bool reversed);

/// Inverted-dropout multipliers (0 or 1/(1-rate)). Empty members mean no
/// dropout at that site. `embed` is per element and step; the GRU input masks
/// are per direction and shared across steps; `output` covers the
/// concatenated summary.
template <class T>
struct DropoutMasks {
  Matrix<T> embed;
  Vector<T> input_forward;
  Vector<T> input_backward;
  Vector<T> output;
};

template <class T>
DropoutMasks<T> sample_masks(const Model<T>& m, std::size_t length, Generator& gen);

template <class T>
struct PostTrace {
  Matrix<T> embedded;  // d x length, after the embedding mask
  DirectionTrace<T> forward;
  DirectionTrace<T> backward;  // processed in reverse position order
  Vector<T> summary;           // [forward final, backward final]
  Vector<T> features;          // summary after the output mask
  T logit = 0;
  T probability = 0;
};

template <class T>
PostTrace<T> forward_trace(const Model<T>& m, const TokenSequence& seq, const DropoutMasks<T>& masks);

enum class Mode { Train, Infer };

/// The 2h-vector fed to the head. Train mode samples dropout masks from gen.
template <class T>
Vector<T> encode_post(const Model<T>& m, const TokenSequence& seq, Mode mode, Generator* gen = nullptr);

template <class T>
T predict(const Model<T>& m, const TokenSequence& seq);

template <class T>
T sigmoid(T v);

}  // namespace clickbait
