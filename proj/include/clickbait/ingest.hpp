#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace clickbait {

enum class ClassLabel { NoClickbait, Clickbait };

/// Which record field feeds the model.
enum class TextField { PostText, TargetDescription, TargetTitle };

struct PostRecord {
  std::string id;
  std::vector<std::string> post_text;
  std::string post_timestamp;
  std::vector<std::string> post_media;
  std::string target_title;
  std::string target_description;
  std::string target_keywords;
  std::vector<std::string> target_paragraphs;
  std::vector<std::string> target_captions;

  /// Space-joined postText segments.
  std::string joined_post_text() const;
};

/// "postText", "targetDescription" or "targetTitle".
std::string to_string(TextField field);
TextField parse_text_field(const std::string& name);

/// Text used for modeling under the given field selection.
std::string modeling_text(const PostRecord& record, TextField field);

struct Judgment {
  std::array<double, 5> scores{};
  double mean = 0.0;
  double median = 0.0;
  ClassLabel class_label = ClassLabel::NoClickbait;
};

struct LabeledRecord {
  PostRecord post;
  Judgment truth;
};

struct LabeledDataset {
  std::string name;
  std::vector<LabeledRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

/// Tolerance used when matching judgment values against the four levels
/// {0, 1/3, 2/3, 1}; the files store them truncated (0.33333, 0.66667).
inline constexpr double kLevelTolerance = 1e-3;

/// Parses an instances file (one JSON object per line). Blank lines are
/// skipped. Throws DataError with the 1-based line number on malformed JSON,
/// a missing "id" or a missing "postText".
std::vector<PostRecord> parse_instances(std::istream& in);

/// Parses a truth file and validates every Judgment invariant except the
/// class/median agreement, which validate_labels() reports separately.
std::vector<std::pair<std::string, Judgment>> parse_truth(std::istream& in);

/// Clickbait iff median >= 0.5. Throws DataError when the median is not one
/// of the four judgment levels.
ClassLabel derive_label(double median);

std::string to_string(ClassLabel label);
ClassLabel parse_class_label(const std::string& text);

/// Pairs instances with truth records by id. Throws DataError on duplicate
/// ids or ids present on only one side. Instance order is preserved.
LabeledDataset join(std::vector<PostRecord> instances,
                    const std::vector<std::pair<std::string, Judgment>>& truth, std::string name);

/// Ids of records whose truthClass disagrees with derive_label(truthMedian).
std::vector<std::string> validate_labels(const LabeledDataset& ds);

/// Serializers producing the same line-delimited layout the parsers read.
void write_instances(std::ostream& out, const std::vector<PostRecord>& records);
void write_truth(std::ostream& out, const std::vector<std::pair<std::string, Judgment>>& truth);

/// Loads `dir/instances.jsonl` + `dir/truth.jsonl`.
LabeledDataset load_dataset(const std::filesystem::path& dir);
LabeledDataset load_dataset(const std::filesystem::path& instances,
                            const std::filesystem::path& truth);
std::vector<PostRecord> load_instances(const std::filesystem::path& path);
void save_dataset(const LabeledDataset& ds, const std::filesystem::path& dir);

/// Concatenates datasets, checking id uniqueness across them.
LabeledDataset concat(const std::vector<LabeledDataset>& parts, std::string name);

struct SplitResult {
  LabeledDataset train;
  LabeledDataset test;
};

/// Class-stratified split. The global test size is round-half-up of
/// fraction * |ds|; it is allotted to the classes by largest remainder of
/// fraction * class_size (ties go to Clickbait). Each class is shuffled with
/// the seed; both outputs keep the original record order.
SplitResult stratified_split(const LabeledDataset& ds, double test_fraction, std::uint64_t seed);

struct DuplicateGroup {
  std::string post_text;
  std::size_t count = 0;
  std::size_t clickbait = 0;
  std::size_t no_clickbait = 0;
};

/// Groups by exact joined post text; only groups with count >= 2, sorted by
/// count descending then text ascending.
std::vector<DuplicateGroup> find_duplicate_posts(const LabeledDataset& ds);

}  // namespace clickbait
