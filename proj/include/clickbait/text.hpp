#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "clickbait/linalg.hpp"

namespace clickbait {

/// Lowercases ASCII letters, splits on ASCII whitespace and peels leading and
/// trailing ASCII punctuation off every chunk as one-character tokens.
std::vector<std::string> tokenize(std::string_view text);

class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;

  Vocabulary();

  /// Appends a corpus token with the next free id. Re-adding is a no-op.
  std::int32_t add(const std::string& token);

  /// Id of a corpus token, or kUnk.
  std::int32_t id(const std::string& token) const;
  bool contains(const std::string& token) const { return token_to_id_.contains(token); }
  const std::string& token(std::int32_t id) const { return id_to_token_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return id_to_token_.size(); }

  /// Corpus tokens in id order, i.e. ids 2..size()-1.
  std::vector<std::string> corpus_tokens() const;

 private:
  std::unordered_map<std::string, std::int32_t> token_to_id_;
  std::vector<std::string> id_to_token_;
};

/// Keeps tokens with frequency >= min_count, ordered by descending
/// frequency then lexicographically.
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus, std::size_t min_count = 1);

template <class T>
struct EmbeddingTable {
  RowMatrix<T> matrix;  // vocabulary_size x dim, row 0 is PAD
  bool trainable = true;

  Eigen::Index dim() const { return matrix.cols(); }
  Eigen::Index rows() const { return matrix.rows(); }

  template <class U>
  EmbeddingTable<U> cast() const {
    return {matrix.template cast<U>(), trainable};
  }
};

inline constexpr double kOovRange = 0.05;
inline constexpr std::uint64_t kDefaultOovSeed = 20170630;

/// Every non-PAD row drawn uniformly from [-0.05, 0.05]; PAD is zero.
EmbeddingTable<float> random_embeddings(const Vocabulary& vocab, int dim, std::uint64_t seed = kDefaultOovSeed);

struct GloveLoad {
  EmbeddingTable<float> table;
  std::size_t matched = 0;
};

/// Reads GloVe text vectors for the vocabulary tokens. Rows not found in the
/// stream (and UNK) keep their seeded random initialization; PAD stays zero.
/// Throws DataError (with line number) when a line's vector length is not dim.
GloveLoad load_glove(std::istream& in, const Vocabulary& vocab, int dim, std::uint64_t seed = kDefaultOovSeed);

struct TokenSequence {
  std::vector<std::int32_t> ids;
  std::size_t length = 0;  // true length before padding
};

/// Maps tokens to ids, truncating from the tail / padding with PAD to max_len.
TokenSequence encode(const std::vector<std::string>& tokens, const Vocabulary& vocab, std::size_t max_len);

}  // namespace clickbait
