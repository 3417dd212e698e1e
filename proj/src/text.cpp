#include "clickbait/text.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <utility>

#include "clickbait/error.hpp"
#include "clickbait/rng.hpp"

namespace clickbait {

namespace {

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_punct(unsigned char c) { return c < 0x80 && std::ispunct(c) != 0; }

const std::string kPadToken = "<pad>";
const std::string kUnkToken = "<unk>";

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t end = i;
    while (end < text.size() && !is_space(static_cast<unsigned char>(text[end]))) ++end;
    if (end == i) break;

    std::size_t lo = i;
    std::size_t hi = end;
    while (lo < hi && is_punct(static_cast<unsigned char>(text[lo]))) {
      tokens.emplace_back(1, text[lo]);
      ++lo;
    }
    std::vector<std::string> trailing;
    while (hi > lo && is_punct(static_cast<unsigned char>(text[hi - 1]))) {
      trailing.emplace_back(1, text[hi - 1]);
      --hi;
    }
    if (hi > lo) {
      std::string core(text.substr(lo, hi - lo));
      for (auto& c : core) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      }
      tokens.push_back(std::move(core));
    }
    tokens.insert(tokens.end(), trailing.rbegin(), trailing.rend());
    i = end;
  }
  return tokens;
}

Vocabulary::Vocabulary() : id_to_token_{kPadToken, kUnkToken} {}

std::int32_t Vocabulary::add(const std::string& token) {
  auto [it, inserted] = token_to_id_.emplace(token, static_cast<std::int32_t>(id_to_token_.size()));
  if (inserted) id_to_token_.push_back(token);
  return it->second;
}

std::int32_t Vocabulary::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

std::vector<std::string> Vocabulary::corpus_tokens() const {
  return {id_to_token_.begin() + 2, id_to_token_.end()};
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus, std::size_t min_count) {
  if (min_count < 1) throw UsageError("min_count must be at least 1");
  std::map<std::string, std::size_t> freq;
  for (const auto& doc : corpus) {
    for (const auto& t : doc) ++freq[t];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [t, n] : freq) {
    if (n >= min_count) kept.emplace_back(t, n);
  }
  // freq is already lexicographic, so a stable sort on count gives the tie rule.
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary vocab;
  for (const auto& [t, n] : kept) vocab.add(t);
  return vocab;
}

EmbeddingTable<float> random_embeddings(const Vocabulary& vocab, int dim, std::uint64_t seed) {
  if (dim < 1) throw UsageError("embedding dimension must be positive");
  EmbeddingTable<float> table;
  table.matrix = RowMatrix<float>::Zero(static_cast<Eigen::Index>(vocab.size()), dim);
  auto gen = make_generator(seed, "oov");
  for (Eigen::Index r = 1; r < table.matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      table.matrix(r, c) = static_cast<float>(uniform(gen, -kOovRange, kOovRange));
    }
  }
  return table;
}

GloveLoad load_glove(std::istream& in, const Vocabulary& vocab, int dim, std::uint64_t seed) {
  GloveLoad out{random_embeddings(vocab, dim, seed), 0};
  std::vector<bool> seen(vocab.size(), false);
  std::string line;
  std::size_t number = 0;
  std::vector<float> values;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto space = line.find(' ');
    if (space == std::string::npos) {
      throw DataError("GloVe line " + std::to_string(number) + ": missing vector");
    }

    values.clear();
    const char* p = line.data() + space;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      float v = 0.0f;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        throw DataError("GloVe line " + std::to_string(number) + ": bad number");
      }
      values.push_back(v);
      p = next;
    }
    if (values.size() != static_cast<std::size_t>(dim)) {
      std::string what = number == 1 ? "vector dimension " + std::to_string(values.size()) +
                                           " does not match configured dimension " + std::to_string(dim)
                                     : "expected " + std::to_string(dim) + " values, got " +
                                           std::to_string(values.size());
      throw DataError("GloVe line " + std::to_string(number) + ": " + what);
    }

    std::string token = line.substr(0, space);
    if (!vocab.contains(token)) continue;
    auto id = static_cast<std::size_t>(vocab.id(token));
    if (seen[id]) continue;
    seen[id] = true;
    ++out.matched;
    for (int c = 0; c < dim; ++c) out.table.matrix(static_cast<Eigen::Index>(id), c) = values[static_cast<std::size_t>(c)];
  }
  return out;
}

TokenSequence encode(const std::vector<std::string>& tokens, const Vocabulary& vocab, std::size_t max_len) {
  if (max_len < 1) throw UsageError("max_len must be at least 1");
  TokenSequence seq;
  seq.length = std::min(tokens.size(), max_len);
  seq.ids.assign(max_len, Vocabulary::kPad);
  for (std::size_t i = 0; i < seq.length; ++i) seq.ids[i] = vocab.id(tokens[i]);
  return seq;
}

}  // namespace clickbait
