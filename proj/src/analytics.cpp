#include "clickbait/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "clickbait/error.hpp"

namespace clickbait {

namespace {

constexpr std::array<double, 4> kLevels{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};

std::size_t label_index(ClassLabel label) { return static_cast<std::size_t>(label); }

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void finish_percentages(Histogram& h) {
  for (std::size_t c = 0; c < 2; ++c) {
    std::size_t total = 0;
    for (auto n : h.counts[c]) total += n;
    h.percentages[c].assign(h.bins(), 0.0);
    if (total == 0) continue;
    for (std::size_t b = 0; b < h.bins(); ++b) {
      h.percentages[c][b] = 100.0 * static_cast<double>(h.counts[c][b]) / static_cast<double>(total);
    }
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

double median_of_sorted(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  const std::size_t n = hi - lo;
  const std::size_t mid = lo + n / 2;
  return n % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

ClassCounts class_counts(const LabeledDataset& ds) {
  ClassCounts c;
  c.total = ds.size();
  for (const auto& r : ds.records) {
    if (r.truth.class_label == ClassLabel::Clickbait) {
      ++c.clickbait;
    } else {
      ++c.no_clickbait;
    }
  }
  return c;
}

std::size_t median_level_index(double median) {
  for (std::size_t i = 0; i < kLevels.size(); ++i) {
    if (std::abs(median - kLevels[i]) <= kLevelTolerance) return i;
  }
  throw DataError("median " + num(median) + " is not a judgment level");
}

MedianLabelTable median_label_table(const LabeledDataset& ds) {
  MedianLabelTable t;
  for (const auto& r : ds.records) {
    ++t.counts[median_level_index(r.truth.median)][label_index(r.truth.class_label)];
  }
  return t;
}

BoxStats tukey_box(std::vector<double> values) {
  if (values.empty()) throw UsageError("box statistics need at least one value");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  // Lower half [0, ceil(n/2)), upper half [floor(n/2), n).
  const std::size_t half = (n + 1) / 2;
  return {values.front(), median_of_sorted(values, 0, half), median_of_sorted(values, 0, n),
          median_of_sorted(values, n - half, n), values.back()};
}

ClassBoxStats score_box_stats(const LabeledDataset& ds) {
  std::array<std::vector<double>, 2> means;
  for (const auto& r : ds.records) means[label_index(r.truth.class_label)].push_back(r.truth.mean);
  if (means[0].empty() || means[1].empty()) throw DataError("box statistics need records of both classes");
  return {tukey_box(std::move(means[label_index(ClassLabel::Clickbait)])),
          tukey_box(std::move(means[label_index(ClassLabel::NoClickbait)]))};
}

Histogram score_histogram(const LabeledDataset& ds, std::size_t bins) {
  if (bins < 2) throw UsageError("score histogram needs at least 2 bins");
  Histogram h;
  for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(static_cast<double>(b) / static_cast<double>(bins));
  h.counts[0].assign(bins, 0);
  h.counts[1].assign(bins, 0);
  for (const auto& r : ds.records) {
    const double v = std::clamp(r.truth.mean, 0.0, 1.0);
    const auto b = std::min(bins - 1, static_cast<std::size_t>(std::floor(v * static_cast<double>(bins))));
    ++h.counts[label_index(r.truth.class_label)][b];
  }
  finish_percentages(h);
  return h;
}

std::size_t character_length(std::string_view utf8) {
  return static_cast<std::size_t>(
      std::count_if(utf8.begin(), utf8.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

Histogram length_distribution(const LabeledDataset& ds, std::size_t bin_width) {
  if (bin_width < 1) throw UsageError("length bin width must be positive");
  std::vector<std::size_t> lengths;
  lengths.reserve(ds.size());
  std::size_t longest = 0;
  for (const auto& r : ds.records) {
    lengths.push_back(character_length(r.post.joined_post_text()));
    longest = std::max(longest, lengths.back());
  }
  const std::size_t bins = longest / bin_width + 1;
  Histogram h;
  for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(static_cast<double>(b * bin_width));
  h.counts[0].assign(bins, 0);
  h.counts[1].assign(bins, 0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    ++h.counts[label_index(ds.records[i].truth.class_label)][lengths[i] / bin_width];
  }
  finish_percentages(h);
  return h;
}

void write_analysis(const LabeledDataset& ds, const std::filesystem::path& dir, const AnalysisOptions& options) {
  std::filesystem::create_directories(dir);
  const auto counts = class_counts(ds);
  const std::size_t cb = label_index(ClassLabel::Clickbait);
  const std::size_t ncb = label_index(ClassLabel::NoClickbait);

  {
    const auto table = median_label_table(ds);
    auto out = open_output(dir / "fig1_median_label.csv");
    out << "median,clickbait,no_clickbait\n";
    for (std::size_t l = 0; l < 4; ++l) {
      out << kMedianLevelNames[l] << ',' << table.counts[l][cb] << ',' << table.counts[l][ncb] << '\n';
    }
  }
  {
    std::array<std::vector<double>, 2> means;
    for (const auto& r : ds.records) means[label_index(r.truth.class_label)].push_back(r.truth.mean);
    auto out = open_output(dir / "fig2_box.csv");
    out << "class,min,q1,median,q3,max\n";
    for (auto label : {ClassLabel::Clickbait, ClassLabel::NoClickbait}) {
      auto& values = means[label_index(label)];
      if (values.empty()) continue;
      const auto b = tukey_box(std::move(values));
      out << to_string(label) << ',' << num(b.min) << ',' << num(b.q1) << ',' << num(b.median) << ','
          << num(b.q3) << ',' << num(b.max) << '\n';
    }
  }
  {
    const auto h = score_histogram(ds, options.score_bins);
    auto out = open_output(dir / "fig3_score_hist.csv");
    out << "bin_start,bin_end,clickbait,no_clickbait\n";
    for (std::size_t b = 0; b < h.bins(); ++b) {
      out << num(h.edges[b]) << ',' << num(h.edges[b + 1]) << ',' << h.counts[cb][b] << ',' << h.counts[ncb][b]
          << '\n';
    }
  }
  {
    const auto h = length_distribution(ds, options.length_bin_width);
    auto out = open_output(dir / "fig4_length_hist.csv");
    out << "bin_start,bin_end,clickbait_pct,no_clickbait_pct,clickbait,no_clickbait\n";
    for (std::size_t b = 0; b < h.bins(); ++b) {
      out << num(h.edges[b]) << ',' << num(h.edges[b + 1]) << ',' << num(h.percentages[cb][b]) << ','
          << num(h.percentages[ncb][b]) << ',' << h.counts[cb][b] << ',' << h.counts[ncb][b] << '\n';
    }
  }
  const auto duplicates = find_duplicate_posts(ds);
  {
    auto out = open_output(dir / "duplicates.csv");
    out << "post_text,count,clickbait,no_clickbait\n";
    for (const auto& g : duplicates) {
      out << csv_field(g.post_text) << ',' << g.count << ',' << g.clickbait << ',' << g.no_clickbait << '\n';
    }
  }
  {
    nlohmann::ordered_json j;
    j["total"] = counts.total;
    j["clickbait"] = counts.clickbait;
    j["no_clickbait"] = counts.no_clickbait;
    j["duplicate_post_texts"] = duplicates.size();
    j["label_violations"] = validate_labels(ds).size();
    auto out = open_output(dir / "counts.json");
    out << j.dump(2) << '\n';
  }
}

}  // namespace clickbait
