#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "clickbait/ingest.hpp"

namespace clickbait {

struct EvalReport {
  double mse = 0.0;
  double median_absolute_error = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double accuracy = 0.0;
  double r2 = 0.0;
  double runtime_seconds = 0.0;
  bool r2_undefined = false;  // truth means were constant; r2 reported as 0
};

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
};

/// Counts with Clickbait as the positive class.
Confusion confusion(std::span<const ClassLabel> predicted, std::span<const ClassLabel> truth);

/// Where the true binary labels come from.
enum class TruthLabels {
  Class,          // truthClass from the file (median rule)
  MeanThreshold,  // truthMean >= threshold
};

/// Regression metrics against truthMean, classification metrics from
/// pred >= threshold. Precision/recall are 0 when their denominator is 0.
/// runtime_seconds is left at 0; callers time the call themselves.
EvalReport evaluate(std::span<const double> preds, std::span<const Judgment> truth, double threshold = 0.5,
                    TruthLabels labels = TruthLabels::Class);

/// Flat object keyed by the snake_cased metric names: mean_squared_error,
/// median_absolute_error, f1_score, precision, recall, accuracy, r2_score,
/// runtime. A "warnings" array is added only when something was undefined.
nlohmann::ordered_json to_json(const EvalReport& report);

}  // namespace clickbait
