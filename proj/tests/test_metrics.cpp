#include <doctest.h>

#include <algorithm>

#include "clickbait/error.hpp"
#include "clickbait/metrics.hpp"
#include "clickbait/train.hpp"
#include "test_support.hpp"

using namespace clickbait;
using clickbait::testing::judgment;

namespace {

struct Fixture {
  std::vector<double> preds;
  std::vector<Judgment> truth;
};

Fixture confusion_fixture(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  const std::array<double, 5> high{1, 1, 1, 0.66667, 0.33333};
  const std::array<double, 5> low{0, 0, 0, 0.33333, 0.66667};
  Fixture f;
  auto add = [&](std::size_t n, double p, const std::array<double, 5>& s) {
    for (std::size_t i = 0; i < n; ++i) {
      f.preds.push_back(p + 0.01 * static_cast<double>(i));
      f.truth.push_back(judgment(s));
    }
  };
  add(tp, 0.7, high);
  add(fp, 0.6, low);
  add(fn, 0.2, high);
  add(tn, 0.1, low);
  return f;
}

}  // namespace

TEST_CASE("confusion counts Clickbait as positive") {
  using L = ClassLabel;
  std::vector<L> pred{L::Clickbait, L::Clickbait, L::NoClickbait, L::NoClickbait};
  std::vector<L> truth{L::Clickbait, L::NoClickbait, L::Clickbait, L::NoClickbait};
  auto c = confusion(pred, truth);
  CHECK(c.tp == 1);
  CHECK(c.fp == 1);
  CHECK(c.fn == 1);
  CHECK(c.tn == 1);
}

TEST_CASE("hand-derived confusion fixtures") {
  // Values from the exact rational arithmetic in the formulas.
  auto a = evaluate(confusion_fixture(2, 1, 1, 6).preds, confusion_fixture(2, 1, 1, 6).truth);
  CHECK(a.precision == 2.0 / 3.0);
  CHECK(a.recall == 2.0 / 3.0);
  CHECK(a.f1 == 2.0 / 3.0);
  CHECK(a.accuracy == 0.8);

  auto f = confusion_fixture(2, 1, 2, 10);
  auto b = evaluate(f.preds, f.truth);
  CHECK(b.precision == 2.0 / 3.0);
  CHECK(b.recall == 0.5);
  CHECK(b.f1 == 4.0 / 7.0);
  CHECK(b.accuracy == 0.8);
}

TEST_CASE("confusion on identical, inverted and mixed labels") {
  using L = ClassLabel;
  std::vector<L> labels{L::Clickbait, L::NoClickbait, L::Clickbait, L::NoClickbait, L::NoClickbait};
  auto same = confusion(labels, labels);
  CHECK(same.fp == 0);
  CHECK(same.fn == 0);
  std::vector<L> inverted;
  for (auto l : labels) inverted.push_back(l == L::Clickbait ? L::NoClickbait : L::Clickbait);
  auto inv = confusion(inverted, labels);
  CHECK(inv.tp == 0);
  CHECK(inv.tn == 0);

  auto f = confusion_fixture(2, 1, 1, 6);
  std::vector<L> pred, truth;
  for (std::size_t i = 0; i < f.preds.size(); ++i) {
    pred.push_back(f.preds[i] >= 0.5 ? L::Clickbait : L::NoClickbait);
    truth.push_back(f.truth[i].class_label);
  }
  auto c = confusion(pred, truth);
  CHECK(c.tp == 2);
  CHECK(c.fp == 1);
  CHECK(c.fn == 1);
  CHECK(c.tn == 6);
}

TEST_CASE("perfect predictions") {
  auto ds = testing::random_dataset(50, 3);
  std::vector<double> preds;
  std::vector<Judgment> truth;
  for (const auto& rec : ds.records) {
    preds.push_back(rec.truth.mean);
    truth.push_back(rec.truth);
  }
  auto r = evaluate(preds, truth, 0.5, TruthLabels::MeanThreshold);
  CHECK(std::abs(r.mse) <= 1e-12);
  CHECK(std::abs(r.median_absolute_error) <= 1e-12);
  CHECK(std::abs(r.r2 - 1.0) <= 1e-12);
  CHECK(r.accuracy == 1.0);
  CHECK_FALSE(r.r2_undefined);
}

TEST_CASE("regression metrics by hand") {
  std::vector<Judgment> truth{judgment({0, 0, 0, 0, 0}), judgment({1, 1, 1, 1, 1}), judgment({0, 0, 1, 1, 1}),
                              judgment({0, 0, 0, 1, 1})};
  // truth means 0, 1, 0.6, 0.4; errors 0.1, -0.2, 0.3, -0.4
  std::vector<double> preds{0.1, 0.8, 0.9, 0.0};
  auto r = evaluate(preds, truth);
  CHECK(r.mse == doctest::Approx((0.01 + 0.04 + 0.09 + 0.16) / 4));
  CHECK(r.median_absolute_error == doctest::Approx(0.2));
  const double ss_tot = 0.25 + 0.25 + 0.01 + 0.01;
  CHECK(r.r2 == doctest::Approx(1.0 - 0.30 / ss_tot));

  std::vector<double> odd_preds{0.1, 0.8, 0.9};
  std::vector<Judgment> odd_truth(truth.begin(), truth.begin() + 3);
  CHECK(evaluate(odd_preds, odd_truth).median_absolute_error == doctest::Approx(0.2));
}

TEST_CASE("mse agrees with the training loss") {
  auto ds = testing::random_dataset(200, 9);
  auto gen = make_generator(9, "preds");
  std::vector<double> preds, means;
  std::vector<Judgment> truth;
  for (const auto& rec : ds.records) {
    preds.push_back(uniform01(gen));
    means.push_back(rec.truth.mean);
    truth.push_back(rec.truth);
  }
  CHECK(std::abs(evaluate(preds, truth).mse - mse_loss(preds, means)) <= 1e-12);
}

TEST_CASE("zero-division conventions") {
  std::vector<Judgment> truth{judgment({0, 0, 0, 0, 0}), judgment({0, 0, 0, 0.33333, 0.33333})};
  std::vector<double> preds{0.1, 0.2};
  auto r = evaluate(preds, truth);
  CHECK(r.precision == 0.0);
  CHECK(r.recall == 0.0);
  CHECK(r.f1 == 0.0);
  CHECK(r.accuracy == 1.0);
  CHECK_FALSE(r.r2_undefined);
}

TEST_CASE("constant truth means give r2 0 with a warning") {
  std::vector<Judgment> truth(3, judgment({0, 0, 1, 1, 1}));
  std::vector<double> preds{0.1, 0.6, 0.9};
  auto r = evaluate(preds, truth);
  CHECK(r.r2 == 0.0);
  CHECK(r.r2_undefined);
  auto j = to_json(r);
  REQUIRE(j.contains("warnings"));
  CHECK(j["warnings"].size() == 1);
}

TEST_CASE("metrics are invariant under joint permutation") {
  auto ds = testing::random_dataset(120, 4);
  auto gen = make_generator(4, "perm");
  std::vector<double> preds;
  std::vector<Judgment> truth;
  for (const auto& rec : ds.records) {
    preds.push_back(uniform01(gen));
    truth.push_back(rec.truth);
  }
  auto base = evaluate(preds, truth);
  std::vector<std::size_t> idx(preds.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), gen);
  std::vector<double> p2;
  std::vector<Judgment> t2;
  for (auto i : idx) {
    p2.push_back(preds[i]);
    t2.push_back(truth[i]);
  }
  auto perm = evaluate(p2, t2);
  CHECK(perm.mse == doctest::Approx(base.mse).epsilon(1e-12));
  CHECK(perm.median_absolute_error == base.median_absolute_error);
  CHECK(perm.r2 == doctest::Approx(base.r2).epsilon(1e-12));
  CHECK(perm.f1 == base.f1);
  CHECK(perm.accuracy == base.accuracy);

  for (const auto& v : {base.precision, base.recall, base.f1, base.accuracy}) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(base.r2 <= 1.0);
  CHECK(base.f1 == doctest::Approx(2.0 * base.precision * base.recall / (base.precision + base.recall)));
  CHECK(base.f1 <= std::max(base.precision, base.recall));
  CHECK(base.f1 >= std::min(base.precision, base.recall));
}

TEST_CASE("threshold and truth-label source") {
  std::vector<Judgment> truth{judgment({0, 0, 0, 1, 1}), judgment({1, 1, 1, 0, 0})};
  // mean 0.4 labeled no-clickbait, mean 0.6 labeled clickbait
  std::vector<double> preds{0.45, 0.55};
  CHECK(evaluate(preds, truth, 0.5).accuracy == 1.0);
  CHECK(evaluate(preds, truth, 0.3, TruthLabels::MeanThreshold).accuracy == 1.0);
  CHECK(evaluate(preds, truth, 0.5, TruthLabels::MeanThreshold).accuracy == 1.0);
  CHECK(evaluate(preds, truth, 0.3).accuracy == 0.5);
  CHECK(evaluate(std::vector<double>{0.5, 0.5}, truth).recall == 1.0);
}

TEST_CASE("evaluate rejects bad input") {
  std::vector<Judgment> truth{judgment({0, 0, 0, 0, 0}), judgment({1, 1, 1, 1, 1})};
  CHECK_THROWS_AS(evaluate(std::vector<double>{0.5}, truth), UsageError);
  CHECK_THROWS_AS(evaluate(std::vector<double>{0.5}, std::span<const Judgment>(truth).first(1)), UsageError);
  CHECK_THROWS_AS(evaluate(std::vector<double>{0.2, 0.3}, truth, 1.0), UsageError);
  CHECK_THROWS_AS(evaluate(std::vector<double>{0.2, 0.3}, truth, 0.0), UsageError);
}

TEST_CASE("JSON report keys and order") {
  auto f = confusion_fixture(2, 1, 2, 10);
  auto r = evaluate(f.preds, f.truth);
  r.runtime_seconds = 0.25;
  auto j = to_json(r);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"mean_squared_error", "median_absolute_error", "f1_score", "precision",
                                         "recall", "accuracy", "r2_score", "runtime"});
  CHECK(j["runtime"].get<double>() == 0.25);
  CHECK(j["f1_score"].get<double>() == 4.0 / 7.0);
}
