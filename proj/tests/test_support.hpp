#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "clickbait/ingest.hpp"
#include "clickbait/rng.hpp"

namespace clickbait::testing {

inline Judgment judgment(std::array<double, 5> scores, ClassLabel label) {
  Judgment j;
  j.scores = scores;
  double sum = 0.0;
  for (double s : scores) sum += s;
  j.mean = sum / 5.0;
  auto sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  j.median = sorted[2];
  j.class_label = label;
  return j;
}

inline Judgment judgment(std::array<double, 5> scores) {
  auto j = judgment(scores, ClassLabel::NoClickbait);
  j.class_label = j.median >= 0.5 ? ClassLabel::Clickbait : ClassLabel::NoClickbait;
  return j;
}

inline LabeledRecord record(const std::string& id, const std::string& text, std::array<double, 5> scores) {
  LabeledRecord r;
  r.post.id = id;
  r.post.post_text = {text};
  r.truth = judgment(scores);
  return r;
}

/// Random labeled dataset whose judgments are consistent with the median rule.
inline LabeledDataset random_dataset(std::size_t n, std::uint64_t seed, std::size_t distinct_texts = 0) {
  auto gen = make_generator(seed, "test-data");
  LabeledDataset ds;
  ds.name = "random";
  const char* words[] = {"you", "won't", "believe", "what", "happened", "next", "trump", "says", "10", "things",
                         "quote", "of", "the", "day:", "news", "report", "!", "?"};
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, 5> s{};
    for (auto& v : s) v = static_cast<double>(gen() % 4) / 3.0;
    std::string text;
    if (distinct_texts > 0) {
      text = "text " + std::to_string(gen() % distinct_texts);
    } else {
      const auto len = 1 + gen() % 8;
      for (std::size_t k = 0; k < len; ++k) {
        if (k) text += ' ';
        text += words[gen() % std::size(words)];
      }
    }
    ds.records.push_back(record("id" + std::to_string(i), text, s));
  }
  return ds;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("clickbait_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace clickbait::testing
