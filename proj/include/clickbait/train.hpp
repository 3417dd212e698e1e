#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "clickbait/ingest.hpp"
#include "clickbait/nn.hpp"
#include "clickbait/text.hpp"

namespace clickbait {

struct TrainConfig {
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double rho = 0.9;
  double epsilon = 1e-8;
  std::size_t epochs = 20;
  DropoutConfig dropout;
  int dim = 100;
  int hidden = 128;
  std::size_t max_len = 32;
  std::uint64_t seed = 0;
  TextField text_field = TextField::PostText;
  double clip = 5.0;  // elementwise gradient bound; <= 0 disables

  /// Throws UsageError on out-of-range values.
  void validate() const;
};

/// Same layout as the learnable part of Model.
template <class T>
struct GradientSet {
  RowMatrix<T> embedding;
  GruParams<T> forward;
  GruParams<T> backward;
  DenseSigmoid<T> head;

  static GradientSet zeros_like(const Model<T>& m);
  void set_zero();
};

/// Arrays in the same order as parameter_arrays(Model&).
template <class T>
std::vector<NamedArray<T>> gradient_arrays(GradientSet<T>& g);

template <class T>
struct RmsPropState {
  GradientSet<T> accumulators;

  static RmsPropState zeros_like(const Model<T>& m) { return {GradientSet<T>::zeros_like(m)}; }
};

struct TrainingExample {
  TokenSequence seq;
  double target = 0.0;
};

/// Mean of squared differences. Throws UsageError on empty or unequal input.
double mse_loss(std::span<const double> preds, std::span<const double> targets);

struct BackpropOptions {
  double clip = 5.0;  // <= 0 disables clipping
};

/// Batch MSE and its exact gradient by reverse accumulation through time.
/// `masks` is either empty (no dropout) or one entry per example. `grads` is
/// overwritten. Throws NumericError naming the first non-finite parameter
/// array if the loss is not finite.
template <class T>
T backprop(const Model<T>& m, std::span<const TrainingExample> batch, std::span<const DropoutMasks<T>> masks,
           GradientSet<T>& grads, const BackpropOptions& options = {});

/// acc <- rho*acc + (1-rho)*g^2; param <- param - lr*g/(sqrt(acc)+eps).
/// The embedding is left untouched when it is not trainable.
template <class T>
void rmsprop_update(Model<T>& m, GradientSet<T>& grads, RmsPropState<T>& state, const TrainConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  double valid_mse = 0.0;
};

struct FitResult {
  Model<float> model;  // weights from best_epoch
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch RMSprop training. Epoch 0 records the initial model; the model
/// with the lowest validation MSE (earliest on ties) is returned.
FitResult fit(const std::vector<TrainingExample>& train, const std::vector<TrainingExample>& valid,
              const TrainConfig& cfg, Model<float> initial, const EpochCallback& on_epoch = {});

/// Tokenizes the configured text field and targets truthMean, then trains a
/// freshly initialized model on top of `embeddings`.
FitResult fit(const LabeledDataset& train, const LabeledDataset& valid, const TrainConfig& cfg,
              const Vocabulary& vocab, EmbeddingTable<float> embeddings, const EpochCallback& on_epoch = {});

std::vector<TrainingExample> make_examples(const LabeledDataset& ds, const Vocabulary& vocab, std::size_t max_len,
                                           TextField field);

std::vector<double> predict_all(const Model<float>& m, const std::vector<TrainingExample>& examples);
double evaluate_mse(const Model<float>& m, const std::vector<TrainingExample>& examples);

/// CSV with header "epoch,train_mse,valid_mse".
void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history);

struct GradCheckEntry {
  std::string name;
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::size_t checked = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> arrays;
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  bool passed = false;
};

struct GradCheckOptions {
  double step = 1e-5;
  std::size_t samples_per_array = 0;  // 0 checks every element
  std::uint64_t seed = 0;             // element sampling
  // Smallest denominator in the relative error. Round-off in a central
  // difference at step 1e-5 is about 2e-11, so gradients much below 1e-7
  // cannot be resolved to 1e-4 relative.
  double magnitude_floor = 1e-7;
};

/// Compares backprop (no dropout, no clipping) against central differences.
/// Relative error is |a-n| / max(|a|, |n|, magnitude_floor).
GradCheckReport grad_check(const Model<double>& m, std::span<const TrainingExample> batch, double tolerance,
                           const GradCheckOptions& options = {});

}  // namespace clickbait
