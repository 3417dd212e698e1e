#include "clickbait/train.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "clickbait/error.hpp"
#include "clickbait/rng.hpp"

namespace clickbait {

namespace {

template <class T>
void zero_gru(GruParams<T>& g) {
  for_each_gru_array(g, [](const char*, auto& a) { a.setZero(); });
}

// Reverse pass through one direction. Accumulates parameter gradients into
// `g` and returns the gradient with respect to the direction's inputs.
template <class T>
Matrix<T> backward_direction(const GruParams<T>& p, const DirectionTrace<T>& tr, const Vector<T>& d_final,
                             GruParams<T>& g) {
  const auto h = p.hidden();
  const auto steps = tr.steps();
  if (steps == 0) return Matrix<T>(p.input(), 0);

  Matrix<T> d_reset_pre(h, steps);
  Matrix<T> d_update_pre(h, steps);
  Matrix<T> d_candidate_pre(h, steps);
  Matrix<T> d_recurrent(h, steps);

  Vector<T> d_state = d_final;
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    auto r = tr.reset.col(t).array();
    auto z = tr.update.col(t).array();
    auto c = tr.candidate.col(t).array();
    auto prev = tr.previous.col(t).array();
    auto uc = tr.recurrent_candidate.col(t).array();
    auto ds = d_state.array();

    Eigen::Array<T, Eigen::Dynamic, 1> d_cand_pre = ds * z * (T(1) - c * c);
    d_candidate_pre.col(t) = d_cand_pre.matrix();
    d_recurrent.col(t) = (d_cand_pre * r).matrix();
    d_update_pre.col(t) = (ds * (c - prev) * z * (T(1) - z)).matrix();
    d_reset_pre.col(t) = (d_cand_pre * uc * r * (T(1) - r)).matrix();

    Vector<T> d_prev = (ds * (T(1) - z)).matrix();
    d_prev.noalias() += p.u_candidate.transpose() * d_recurrent.col(t);
    d_prev.noalias() += p.u_update.transpose() * d_update_pre.col(t);
    d_prev.noalias() += p.u_reset.transpose() * d_reset_pre.col(t);
    d_state = std::move(d_prev);
  }

  g.w_reset.noalias() += d_reset_pre * tr.inputs.transpose();
  g.w_update.noalias() += d_update_pre * tr.inputs.transpose();
  g.w_candidate.noalias() += d_candidate_pre * tr.inputs.transpose();
  g.u_reset.noalias() += d_reset_pre * tr.previous.transpose();
  g.u_update.noalias() += d_update_pre * tr.previous.transpose();
  g.u_candidate.noalias() += d_recurrent * tr.previous.transpose();
  g.b_reset += d_reset_pre.rowwise().sum();
  g.b_update += d_update_pre.rowwise().sum();
  g.b_candidate += d_candidate_pre.rowwise().sum();

  Matrix<T> d_inputs = p.w_reset.transpose() * d_reset_pre;
  d_inputs.noalias() += p.w_update.transpose() * d_update_pre;
  d_inputs.noalias() += p.w_candidate.transpose() * d_candidate_pre;
  return d_inputs;
}

template <class T>
std::string first_non_finite(const Model<T>& m) {
  for (const auto& a : parameter_arrays(m)) {
    if (std::any_of(a.values.begin(), a.values.end(), [](T v) { return !std::isfinite(v); })) return a.name;
  }
  return {};
}

template <class T>
T batch_loss(const Model<T>& m, std::span<const TrainingExample> batch) {
  T sum = 0;
  for (const auto& ex : batch) {
    T diff = predict(m, ex.seq) - static_cast<T>(ex.target);
    sum += diff * diff;
  }
  return sum / static_cast<T>(batch.size());
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw UsageError("batch size must be at least 1");
  if (!(learning_rate > 0.0)) throw UsageError("learning rate must be positive");
  if (!(rho >= 0.0 && rho < 1.0)) throw UsageError("rho must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw UsageError("epsilon must be positive");
  for (double rate : {dropout.embed, dropout.gru_input, dropout.gru_output}) {
    if (!(rate >= 0.0 && rate < 1.0)) throw UsageError("dropout rates must lie in [0, 1)");
  }
  if (dim < 1 || hidden < 1) throw UsageError("dimensions must be positive");
  if (max_len < 1) throw UsageError("max_len must be at least 1");
}

template <class T>
GradientSet<T> GradientSet<T>::zeros_like(const Model<T>& m) {
  GradientSet<T> g;
  g.embedding = RowMatrix<T>::Zero(m.embedding.rows(), m.embedding.dim());
  g.forward = GruParams<T>::zeros(m.forward.hidden(), m.forward.input());
  g.backward = GruParams<T>::zeros(m.backward.hidden(), m.backward.input());
  g.head.weights = Vector<T>::Zero(m.head.weights.size());
  g.head.bias = 0;
  return g;
}

template <class T>
void GradientSet<T>::set_zero() {
  embedding.setZero();
  zero_gru(forward);
  zero_gru(backward);
  head.weights.setZero();
  head.bias = 0;
}

template <class T>
std::vector<NamedArray<T>> gradient_arrays(GradientSet<T>& g) {
  std::vector<NamedArray<T>> out;
  out.push_back({"embedding", {g.embedding.data(), static_cast<std::size_t>(g.embedding.size())}});
  for_each_gru_array(g.forward, [&](const char* name, auto& a) {
    out.push_back({std::string("forward.") + name, {a.data(), static_cast<std::size_t>(a.size())}});
  });
  for_each_gru_array(g.backward, [&](const char* name, auto& a) {
    out.push_back({std::string("backward.") + name, {a.data(), static_cast<std::size_t>(a.size())}});
  });
  out.push_back({"head.weights", {g.head.weights.data(), static_cast<std::size_t>(g.head.weights.size())}});
  out.push_back({"head.bias", {&g.head.bias, 1}});
  return out;
}

double mse_loss(std::span<const double> preds, std::span<const double> targets) {
  if (preds.empty()) throw UsageError("mse_loss needs at least one prediction");
  if (preds.size() != targets.size()) throw UsageError("mse_loss inputs differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    double diff = preds[i] - targets[i];
    sum += diff * diff;
  }
  return sum / static_cast<double>(preds.size());
}

template <class T>
T backprop(const Model<T>& m, std::span<const TrainingExample> batch, std::span<const DropoutMasks<T>> masks,
           GradientSet<T>& grads, const BackpropOptions& options) {
  if (batch.empty()) throw UsageError("backprop needs a non-empty batch");
  if (!masks.empty() && masks.size() != batch.size()) throw UsageError("need one dropout mask set per example");
  if (grads.embedding.rows() != m.embedding.rows() || grads.embedding.cols() != m.embedding.dim() ||
      grads.head.weights.size() != m.head.weights.size()) {
    grads = GradientSet<T>::zeros_like(m);
  } else {
    grads.set_zero();
  }

  const DropoutMasks<T> none;
  const T scale = T(2) / static_cast<T>(batch.size());
  const auto hf = m.forward.hidden();
  const auto hb = m.backward.hidden();
  T loss_sum = 0;

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& ex = batch[i];
    const auto& mask = masks.empty() ? none : masks[i];
    const auto tr = forward_trace(m, ex.seq, mask);

    const T diff = tr.probability - static_cast<T>(ex.target);
    loss_sum += diff * diff;
    const T d_logit = scale * diff * tr.probability * (T(1) - tr.probability);
    grads.head.weights += d_logit * tr.features;
    grads.head.bias += d_logit;

    Vector<T> d_summary = d_logit * m.head.weights;
    if (mask.output.size() > 0) d_summary.array() *= mask.output.array();

    const auto steps = tr.forward.steps();
    if (steps == 0) continue;

    Matrix<T> d_fwd = backward_direction(m.forward, tr.forward, Vector<T>(d_summary.head(hf)), grads.forward);
    Matrix<T> d_bwd = backward_direction(m.backward, tr.backward, Vector<T>(d_summary.tail(hb)), grads.backward);
    if (mask.input_forward.size() > 0) d_fwd.array().colwise() *= mask.input_forward.array();
    if (mask.input_backward.size() > 0) d_bwd.array().colwise() *= mask.input_backward.array();
    Matrix<T> d_embedded = d_fwd + d_bwd.rowwise().reverse();
    if (mask.embed.size() > 0) d_embedded.array() *= mask.embed.array();
    for (Eigen::Index t = 0; t < steps; ++t) {
      grads.embedding.row(ex.seq.ids[static_cast<std::size_t>(t)]) += d_embedded.col(t).transpose();
    }
  }

  const T loss = loss_sum / static_cast<T>(batch.size());
  if (!std::isfinite(loss)) {
    auto name = first_non_finite(m);
    throw NumericError("non-finite loss" + (name.empty() ? std::string(" with finite parameters")
                                                         : " (first non-finite parameter: " + name + ")"));
  }
  if (options.clip > 0) {
    const T bound = static_cast<T>(options.clip);
    for (auto& a : gradient_arrays(grads)) {
      for (T& v : a.values) v = std::clamp(v, -bound, bound);
    }
  }
  return loss;
}

template <class T>
void rmsprop_update(Model<T>& m, GradientSet<T>& grads, RmsPropState<T>& state, const TrainConfig& cfg) {
  auto params = parameter_arrays(m);
  auto gs = gradient_arrays(grads);
  auto accs = gradient_arrays(state.accumulators);
  if (params.size() != gs.size() || params.size() != accs.size()) throw UsageError("parameter layout mismatch");
  const T lr = static_cast<T>(cfg.learning_rate);
  const T rho = static_cast<T>(cfg.rho);
  const T eps = static_cast<T>(cfg.epsilon);
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (k == 0 && !m.embedding.trainable) continue;
    auto p = params[k].values;
    auto g = gs[k].values;
    auto acc = accs[k].values;
    if (p.size() != g.size() || p.size() != acc.size()) throw UsageError("shape mismatch in " + params[k].name);
    for (std::size_t i = 0; i < p.size(); ++i) {
      acc[i] = rho * acc[i] + (T(1) - rho) * g[i] * g[i];
      p[i] -= lr * g[i] / (std::sqrt(acc[i]) + eps);
    }
  }
}

std::vector<double> predict_all(const Model<float>& m, const std::vector<TrainingExample>& examples) {
  std::vector<double> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(predict(m, ex.seq));
  return out;
}

double evaluate_mse(const Model<float>& m, const std::vector<TrainingExample>& examples) {
  auto preds = predict_all(m, examples);
  std::vector<double> targets;
  targets.reserve(examples.size());
  for (const auto& ex : examples) targets.push_back(ex.target);
  return mse_loss(preds, targets);
}

FitResult fit(const std::vector<TrainingExample>& train, const std::vector<TrainingExample>& valid,
              const TrainConfig& cfg, Model<float> initial, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train.empty() || valid.empty()) throw UsageError("training and validation sets must be non-empty");
  initial.dropout = cfg.dropout;
  initial.validate();

  FitResult result;
  Model<float> model = std::move(initial);
  auto record = [&](std::size_t epoch) {
    EpochRecord rec{epoch, evaluate_mse(model, train), evaluate_mse(model, valid)};
    if (!std::isfinite(rec.valid_mse)) {
      throw NumericError("validation MSE became non-finite at epoch " + std::to_string(epoch));
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    return rec;
  };

  double best_valid = record(0).valid_mse;
  result.model = model;
  result.best_epoch = 0;

  auto shuffle_gen = make_generator(cfg.seed, "shuffle");
  auto dropout_gen = make_generator(cfg.seed, "dropout");
  const bool any_dropout = cfg.dropout.embed > 0 || cfg.dropout.gru_input > 0 || cfg.dropout.gru_output > 0;
  auto grads = GradientSet<float>::zeros_like(model);
  auto state = RmsPropState<float>::zeros_like(model);
  const BackpropOptions options{cfg.clip};

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<TrainingExample> batch;
  std::vector<DropoutMasks<float>> masks;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_gen);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      masks.clear();
      for (std::size_t k = start; k < end; ++k) {
        batch.push_back(train[order[k]]);
        if (any_dropout) masks.push_back(sample_masks(model, batch.back().seq.length, dropout_gen));
      }
      backprop<float>(model, batch, masks, grads, options);
      rmsprop_update(model, grads, state, cfg);
    }
    const auto rec = record(epoch);
    if (rec.valid_mse < best_valid) {
      best_valid = rec.valid_mse;
      result.model = model;
      result.best_epoch = epoch;
    }
  }
  return result;
}

std::vector<TrainingExample> make_examples(const LabeledDataset& ds, const Vocabulary& vocab, std::size_t max_len,
                                           TextField field) {
  std::vector<TrainingExample> out;
  out.reserve(ds.size());
  for (const auto& r : ds.records) {
    out.push_back({encode(tokenize(modeling_text(r.post, field)), vocab, max_len), r.truth.mean});
  }
  return out;
}

FitResult fit(const LabeledDataset& train, const LabeledDataset& valid, const TrainConfig& cfg,
              const Vocabulary& vocab, EmbeddingTable<float> embeddings, const EpochCallback& on_epoch) {
  cfg.validate();
  if (embeddings.dim() != cfg.dim) throw UsageError("embedding dimension does not match the configuration");
  if (static_cast<std::size_t>(embeddings.rows()) != vocab.size()) {
    throw UsageError("embedding rows do not match the vocabulary size");
  }
  auto model = init_model(std::move(embeddings), cfg.hidden, cfg.dropout, cfg.seed);
  return fit(make_examples(train, vocab, cfg.max_len, cfg.text_field),
             make_examples(valid, vocab, cfg.max_len, cfg.text_field), cfg, std::move(model), on_epoch);
}

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history) {
  out << "epoch,train_mse,valid_mse\n";
  for (const auto& r : history) {
    out << r.epoch << ',' << format_double(r.train_mse) << ',' << format_double(r.valid_mse) << '\n';
  }
}

GradCheckReport grad_check(const Model<double>& m, std::span<const TrainingExample> batch, double tolerance,
                           const GradCheckOptions& options) {
  GradCheckReport report;
  auto grads = GradientSet<double>::zeros_like(m);
  backprop<double>(m, batch, {}, grads, BackpropOptions{0.0});

  Model<double> probe = m;
  auto params = parameter_arrays(probe);
  auto analytic = gradient_arrays(grads);
  auto gen = make_generator(options.seed, "gradcheck");

  for (std::size_t k = 0; k < params.size(); ++k) {
    auto values = params[k].values;
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (options.samples_per_array > 0 && options.samples_per_array < idx.size()) {
      std::shuffle(idx.begin(), idx.end(), gen);
      idx.resize(options.samples_per_array);
      std::sort(idx.begin(), idx.end());
    }
    GradCheckEntry entry{params[k].name, 0.0, 0.0, idx.size()};
    for (std::size_t i : idx) {
      const double saved = values[i];
      values[i] = saved + options.step;
      const double plus = batch_loss(probe, batch);
      values[i] = saved - options.step;
      const double minus = batch_loss(probe, batch);
      values[i] = saved;
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double a = analytic[k].values[i];
      const double abs_err = std::abs(a - numeric);
      const double rel = abs_err / std::max({std::abs(a), std::abs(numeric), options.magnitude_floor});
      entry.max_relative_error = std::max(entry.max_relative_error, rel);
      entry.max_absolute_error = std::max(entry.max_absolute_error, abs_err);
    }
    report.max_relative_error = std::max(report.max_relative_error, entry.max_relative_error);
    report.max_absolute_error = std::max(report.max_absolute_error, entry.max_absolute_error);
    report.arrays.push_back(std::move(entry));
  }
  report.passed = report.max_relative_error < tolerance;
  return report;
}

#define CLICKBAIT_INSTANTIATE_TRAIN(T)                                                                           \
  template struct GradientSet<T>;                                                                                \
  template std::vector<NamedArray<T>> gradient_arrays<T>(GradientSet<T>&);                                       \
  template T backprop<T>(const Model<T>&, std::span<const TrainingExample>, std::span<const DropoutMasks<T>>,     \
                         GradientSet<T>&, const BackpropOptions&);                                               \
  template void rmsprop_update<T>(Model<T>&, GradientSet<T>&, RmsPropState<T>&, const TrainConfig&);

CLICKBAIT_INSTANTIATE_TRAIN(float)
CLICKBAIT_INSTANTIATE_TRAIN(double)

}  // namespace clickbait
