#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "clickbait/ingest.hpp"

namespace clickbait {

struct ClassCounts {
  std::size_t total = 0;
  std::size_t clickbait = 0;
  std::size_t no_clickbait = 0;
};

ClassCounts class_counts(const LabeledDataset& ds);

/// Judgment levels 0, 1/3, 2/3, 1 as rows.
inline constexpr std::array<const char*, 4> kMedianLevelNames{"0", "0.33333", "0.66667", "1"};

/// Index of the nearest judgment level; throws DataError if none is within tolerance.
std::size_t median_level_index(double median);

/// counts[level][label], label indexed by ClassLabel (NoClickbait = 0).
struct MedianLabelTable {
  std::array<std::array<std::size_t, 2>, 4> counts{};

  std::size_t at(std::size_t level, ClassLabel label) const { return counts[level][static_cast<std::size_t>(label)]; }
};

MedianLabelTable median_label_table(const LabeledDataset& ds);

struct BoxStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Five-number summary with Tukey hinges (the median is shared by both
/// halves when the count is odd). Throws UsageError on empty input.
BoxStats tukey_box(std::vector<double> values);

struct ClassBoxStats {
  BoxStats clickbait;
  BoxStats no_clickbait;
};

/// Box statistics of truthMean per class. Throws DataError if a class is empty.
ClassBoxStats score_box_stats(const LabeledDataset& ds);

/// Per-class counts over shared bin edges; index by ClassLabel.
struct Histogram {
  std::vector<double> edges;
  std::array<std::vector<std::size_t>, 2> counts;
  std::array<std::vector<double>, 2> percentages;  // 0 everywhere for an empty class

  std::size_t bins() const { return edges.empty() ? 0 : edges.size() - 1; }
};

/// Equal-width bins over [0, 1]; 1.0 falls in the last bin.
Histogram score_histogram(const LabeledDataset& ds, std::size_t bins);

/// Number of Unicode code points in UTF-8 text.
std::size_t character_length(std::string_view utf8);

/// Joined post length in characters, bins [k*w, (k+1)*w) up to the longest post.
Histogram length_distribution(const LabeledDataset& ds, std::size_t bin_width = 10);

struct AnalysisOptions {
  std::size_t score_bins = 20;
  std::size_t length_bin_width = 10;
};

/// Writes fig1_median_label.csv, fig2_box.csv, fig3_score_hist.csv,
/// fig4_length_hist.csv, duplicates.csv and counts.json into `dir`.
void write_analysis(const LabeledDataset& ds, const std::filesystem::path& dir, const AnalysisOptions& options = {});

}  // namespace clickbait
