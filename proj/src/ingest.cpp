#include "clickbait/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "clickbait/error.hpp"
#include "clickbait/rng.hpp"

namespace clickbait {

using json = nlohmann::json;

namespace {

constexpr std::array<double, 4> kLevels{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};

std::string join_strings(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back(' ');
    out += parts[i];
  }
  return out;
}

std::string line_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

// Accepts a string, an array of strings, or null/missing.
std::vector<std::string> read_string_list(const json& obj, const char* key, std::size_t line) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (it->is_string()) {
    out.push_back(it->get<std::string>());
    return out;
  }
  if (!it->is_array()) throw DataError(line_error(line, std::string("field \"") + key + "\" must be a list of strings"));
  for (const auto& v : *it) {
    if (!v.is_string()) throw DataError(line_error(line, std::string("field \"") + key + "\" must be a list of strings"));
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string read_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (it->is_string()) return it->get<std::string>();
  return join_strings(read_string_list(obj, key, line));
}

std::string read_id(const json& obj, std::size_t line) {
  auto it = obj.find("id");
  if (it == obj.end() || it->is_null()) throw DataError(line_error(line, "missing \"id\""));
  std::string id;
  if (it->is_string()) {
    id = it->get<std::string>();
  } else if (it->is_number_integer()) {
    id = it->dump();
  } else {
    throw DataError(line_error(line, "\"id\" must be a string"));
  }
  if (id.empty()) throw DataError(line_error(line, "empty \"id\""));
  return id;
}

// Calls fn(json, line_number) for every non-blank line.
template <class Fn>
void for_each_json_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c) != 0; })) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(line_error(number, std::string("malformed JSON: ") + e.what()));
    }
    if (!obj.is_object()) throw DataError(line_error(number, "expected a JSON object"));
    fn(obj, number);
  }
}

double median_of_five(std::array<double, 5> v) {
  std::sort(v.begin(), v.end());
  return v[2];
}

bool near_level(double v) {
  return std::any_of(kLevels.begin(), kLevels.end(),
                     [v](double level) { return std::abs(v - level) <= kLevelTolerance; });
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

std::string PostRecord::joined_post_text() const { return join_strings(post_text); }

std::string to_string(TextField field) {
  switch (field) {
    case TextField::PostText:
      return "postText";
    case TextField::TargetDescription:
      return "targetDescription";
    case TextField::TargetTitle:
      return "targetTitle";
  }
  return {};
}

TextField parse_text_field(const std::string& name) {
  if (name == "postText") return TextField::PostText;
  if (name == "targetDescription") return TextField::TargetDescription;
  if (name == "targetTitle") return TextField::TargetTitle;
  throw UsageError("unknown text field \"" + name + "\"");
}

std::string modeling_text(const PostRecord& record, TextField field) {
  switch (field) {
    case TextField::PostText:
      return record.joined_post_text();
    case TextField::TargetDescription:
      return record.target_description;
    case TextField::TargetTitle:
      return record.target_title;
  }
  return {};
}

std::vector<PostRecord> parse_instances(std::istream& in) {
  std::vector<PostRecord> out;
  for_each_json_line(in, [&](const json& obj, std::size_t line) {
    PostRecord r;
    r.id = read_id(obj, line);
    if (!obj.contains("postText")) throw DataError(line_error(line, "missing \"postText\""));
    r.post_text = read_string_list(obj, "postText", line);
    r.post_timestamp = read_string(obj, "postTimestamp", line);
    r.post_media = read_string_list(obj, "postMedia", line);
    r.target_title = read_string(obj, "targetTitle", line);
    r.target_description = read_string(obj, "targetDescription", line);
    r.target_keywords = read_string(obj, "targetKeywords", line);
    r.target_paragraphs = read_string_list(obj, "targetParagraphs", line);
    r.target_captions = read_string_list(obj, "targetCaptions", line);
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<std::pair<std::string, Judgment>> parse_truth(std::istream& in) {
  std::vector<std::pair<std::string, Judgment>> out;
  for_each_json_line(in, [&](const json& obj, std::size_t line) {
    std::string id = read_id(obj, line);
    Judgment j;
    auto scores = obj.find("truthJudgments");
    if (scores == obj.end() || !scores->is_array()) throw DataError(line_error(line, "missing \"truthJudgments\""));
    if (scores->size() != 5) {
      throw DataError(line_error(line, "expected 5 judgments, got " + std::to_string(scores->size())));
    }
    for (std::size_t i = 0; i < 5; ++i) {
      const auto& s = (*scores)[i];
      if (!s.is_number()) throw DataError(line_error(line, "non-numeric judgment"));
      j.scores[i] = s.get<double>();
      if (!near_level(j.scores[i])) {
        throw DataError(line_error(line, "judgment " + s.dump() + " is not one of 0, 1/3, 2/3, 1"));
      }
    }
    auto number = [&](const char* key) {
      auto it = obj.find(key);
      if (it == obj.end() || !it->is_number()) throw DataError(line_error(line, std::string("missing \"") + key + "\""));
      return it->get<double>();
    };
    j.mean = number("truthMean");
    j.median = number("truthMedian");
    double mean = std::accumulate(j.scores.begin(), j.scores.end(), 0.0) / 5.0;
    if (std::abs(mean - j.mean) > kLevelTolerance) {
      throw DataError(line_error(line, "truthMean inconsistent with judgments"));
    }
    if (std::abs(median_of_five(j.scores) - j.median) > kLevelTolerance) {
      throw DataError(line_error(line, "truthMedian inconsistent with judgments"));
    }
    auto cls = obj.find("truthClass");
    if (cls == obj.end() || !cls->is_string()) throw DataError(line_error(line, "missing \"truthClass\""));
    try {
      j.class_label = parse_class_label(cls->get<std::string>());
    } catch (const DataError& e) {
      throw DataError(line_error(line, e.what()));
    }
    out.emplace_back(std::move(id), j);
  });
  return out;
}

ClassLabel derive_label(double median) {
  if (!near_level(median)) {
    throw DataError("median " + std::to_string(median) + " is not a judgment level");
  }
  return median >= 0.5 ? ClassLabel::Clickbait : ClassLabel::NoClickbait;
}

std::string to_string(ClassLabel label) {
  return label == ClassLabel::Clickbait ? "clickbait" : "no-clickbait";
}

ClassLabel parse_class_label(const std::string& text) {
  if (text == "clickbait") return ClassLabel::Clickbait;
  if (text == "no-clickbait") return ClassLabel::NoClickbait;
  throw DataError("unknown truthClass \"" + text + "\"");
}

LabeledDataset join(std::vector<PostRecord> instances,
                    const std::vector<std::pair<std::string, Judgment>>& truth, std::string name) {
  std::unordered_map<std::string, const Judgment*> by_id;
  by_id.reserve(truth.size());
  for (const auto& [id, j] : truth) {
    if (!by_id.emplace(id, &j).second) throw DataError("duplicate truth id " + id);
  }
  LabeledDataset ds;
  ds.name = std::move(name);
  ds.records.reserve(instances.size());
  std::unordered_set<std::string> seen;
  for (auto& post : instances) {
    if (!seen.insert(post.id).second) throw DataError("duplicate instance id " + post.id);
    auto it = by_id.find(post.id);
    if (it == by_id.end()) throw DataError("instance " + post.id + " has no truth record");
    Judgment j = *it->second;
    ds.records.push_back({std::move(post), j});
  }
  for (const auto& [id, j] : truth) {
    if (!seen.contains(id)) throw DataError("truth id " + id + " has no instance");
  }
  return ds;
}

std::vector<std::string> validate_labels(const LabeledDataset& ds) {
  std::vector<std::string> bad;
  for (const auto& r : ds.records) {
    bool ok = true;
    try {
      ok = derive_label(r.truth.median) == r.truth.class_label;
    } catch (const DataError&) {
      ok = false;
    }
    if (!ok) bad.push_back(r.post.id);
  }
  return bad;
}

void write_instances(std::ostream& out, const std::vector<PostRecord>& records) {
  for (const auto& r : records) {
    json obj = {
        {"id", r.id},
        {"postText", r.post_text},
        {"postTimestamp", r.post_timestamp},
        {"postMedia", r.post_media},
        {"targetTitle", r.target_title},
        {"targetDescription", r.target_description},
        {"targetKeywords", r.target_keywords},
        {"targetParagraphs", r.target_paragraphs},
        {"targetCaptions", r.target_captions},
    };
    out << obj.dump() << '\n';
  }
}

void write_truth(std::ostream& out, const std::vector<std::pair<std::string, Judgment>>& truth) {
  for (const auto& [id, j] : truth) {
    json obj = {
        {"id", id},
        {"truthJudgments", std::vector<double>(j.scores.begin(), j.scores.end())},
        {"truthMean", j.mean},
        {"truthMedian", j.median},
        {"truthClass", to_string(j.class_label)},
    };
    out << obj.dump() << '\n';
  }
}

std::vector<PostRecord> load_instances(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return parse_instances(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

LabeledDataset load_dataset(const std::filesystem::path& instances, const std::filesystem::path& truth) {
  auto posts = load_instances(instances);
  auto in = open_input(truth);
  std::vector<std::pair<std::string, Judgment>> judgments;
  try {
    judgments = parse_truth(in);
  } catch (const DataError& e) {
    throw DataError(truth.string() + ": " + e.what());
  }
  if (judgments.empty()) throw DataError(truth.string() + ": no truth records");
  return join(std::move(posts), judgments, instances.parent_path().filename().string());
}

LabeledDataset load_dataset(const std::filesystem::path& dir) {
  return load_dataset(dir / "instances.jsonl", dir / "truth.jsonl");
}

void save_dataset(const LabeledDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<PostRecord> posts;
  std::vector<std::pair<std::string, Judgment>> truth;
  posts.reserve(ds.size());
  truth.reserve(ds.size());
  for (const auto& r : ds.records) {
    posts.push_back(r.post);
    truth.emplace_back(r.post.id, r.truth);
  }
  std::ofstream inst(dir / "instances.jsonl", std::ios::binary);
  std::ofstream tr(dir / "truth.jsonl", std::ios::binary);
  if (!inst || !tr) throw DataError("cannot write dataset to " + dir.string());
  write_instances(inst, posts);
  write_truth(tr, truth);
}

LabeledDataset concat(const std::vector<LabeledDataset>& parts, std::string name) {
  LabeledDataset out;
  out.name = std::move(name);
  std::unordered_set<std::string> ids;
  for (const auto& part : parts) {
    for (const auto& r : part.records) {
      if (!ids.insert(r.post.id).second) throw DataError("duplicate id " + r.post.id + " across datasets");
      out.records.push_back(r);
    }
  }
  return out;
}

SplitResult stratified_split(const LabeledDataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw UsageError("test fraction must lie in (0, 1)");
  }
  if (ds.empty()) throw DataError("cannot split an empty dataset");

  // Index 0 = Clickbait, 1 = NoClickbait, which is also the tie order.
  std::array<std::vector<std::size_t>, 2> members;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    members[ds.records[i].truth.class_label == ClassLabel::Clickbait ? 0 : 1].push_back(i);
  }
  for (const auto& m : members) {
    if (m.empty()) throw DataError("stratified split needs both classes present");
  }

  const auto total = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(ds.size()) + 0.5));
  std::array<std::size_t, 2> quota{};
  std::array<double, 2> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    double exact = test_fraction * static_cast<double>(members[c].size());
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - std::floor(exact);
    assigned += quota[c];
  }
  std::array<std::size_t, 2> order{0, 1};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % 2) {
    std::size_t c = order[k];
    if (quota[c] < members[c].size()) {
      ++quota[c];
      ++assigned;
    }
  }

  auto gen = make_generator(seed, "split");
  std::vector<bool> in_test(ds.size(), false);
  for (std::size_t c = 0; c < 2; ++c) {
    auto shuffled = members[c];
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    for (std::size_t k = 0; k < quota[c]; ++k) in_test[shuffled[k]] = true;
  }

  SplitResult out;
  out.train.name = ds.name + "-train";
  out.test.name = ds.name + "-test";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    (in_test[i] ? out.test : out.train).records.push_back(ds.records[i]);
  }
  return out;
}

std::vector<DuplicateGroup> find_duplicate_posts(const LabeledDataset& ds) {
  std::map<std::string, DuplicateGroup> groups;
  for (const auto& r : ds.records) {
    auto text = r.post.joined_post_text();
    auto& g = groups[text];
    ++g.count;
    if (r.truth.class_label == ClassLabel::Clickbait) {
      ++g.clickbait;
    } else {
      ++g.no_clickbait;
    }
  }
  std::vector<DuplicateGroup> out;
  for (auto& [text, g] : groups) {
    if (g.count < 2) continue;
    g.post_text = text;
    out.push_back(std::move(g));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const DuplicateGroup& a, const DuplicateGroup& b) { return a.count > b.count; });
  return out;
}

}  // namespace clickbait
