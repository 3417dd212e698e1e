#include "clickbait/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "clickbait/error.hpp"

namespace clickbait {

Confusion confusion(std::span<const ClassLabel> predicted, std::span<const ClassLabel> truth) {
  if (predicted.size() != truth.size()) throw UsageError("label lists differ in length");
  Confusion c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] == ClassLabel::Clickbait;
    const bool t = truth[i] == ClassLabel::Clickbait;
    if (p && t) {
      ++c.tp;
    } else if (p) {
      ++c.fp;
    } else if (t) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

EvalReport evaluate(std::span<const double> preds, std::span<const Judgment> truth, double threshold,
                    TruthLabels labels) {
  if (preds.size() != truth.size()) throw UsageError("predictions and truth differ in length");
  if (preds.size() < 2) throw UsageError("evaluation needs at least two examples");
  if (!(threshold > 0.0 && threshold < 1.0)) throw UsageError("threshold must lie in (0, 1)");

  const auto n = preds.size();
  const double count = static_cast<double>(n);
  EvalReport r;

  double mean_truth = 0.0;
  for (const auto& j : truth) mean_truth += j.mean;
  mean_truth /= count;

  double ss_res = 0.0;
  double ss_tot = 0.0;
  std::vector<double> abs_err(n);
  std::vector<ClassLabel> predicted(n);
  std::vector<ClassLabel> actual(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = preds[i] - truth[i].mean;
    ss_res += diff * diff;
    const double dev = truth[i].mean - mean_truth;
    ss_tot += dev * dev;
    abs_err[i] = std::abs(diff);
    predicted[i] = preds[i] >= threshold ? ClassLabel::Clickbait : ClassLabel::NoClickbait;
    actual[i] = labels == TruthLabels::Class
                    ? truth[i].class_label
                    : (truth[i].mean >= threshold ? ClassLabel::Clickbait : ClassLabel::NoClickbait);
  }
  r.mse = ss_res / count;
  if (!std::isfinite(r.mse)) throw NumericError("non-finite mean squared error");

  // Lower median for even counts.
  const auto mid = abs_err.begin() + static_cast<std::ptrdiff_t>((n - 1) / 2);
  std::nth_element(abs_err.begin(), mid, abs_err.end());
  r.median_absolute_error = *mid;

  if (ss_tot > 0.0) {
    r.r2 = 1.0 - ss_res / ss_tot;
  } else {
    r.r2 = 0.0;
    r.r2_undefined = true;
  }

  const auto c = confusion(predicted, actual);
  r.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  r.recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  // 2pr/(p+r) written over the counts; 0 when there are no true positives.
  r.f1 = c.tp > 0 ? 2.0 * static_cast<double>(c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn) : 0.0;
  r.accuracy = static_cast<double>(c.tp + c.tn) / count;
  return r;
}

nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["mean_squared_error"] = report.mse;
  j["median_absolute_error"] = report.median_absolute_error;
  j["f1_score"] = report.f1;
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["accuracy"] = report.accuracy;
  j["r2_score"] = report.r2;
  j["runtime"] = report.runtime_seconds;
  if (report.r2_undefined) j["warnings"] = {"r2_score undefined: truth means are constant"};
  return j;
}

}  // namespace clickbait
