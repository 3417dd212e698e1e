#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "clickbait/ingest.hpp"
#include "clickbait/nn.hpp"
#include "clickbait/text.hpp"

namespace clickbait {

/// Everything prediction needs: vocabulary, model and encoding settings.
struct Checkpoint {
  Vocabulary vocab;
  Model<float> model;
  std::size_t max_len = 32;
  TextField text_field = TextField::PostText;
};

/// Format tag written at the start of every checkpoint.
inline constexpr char kCheckpointMagic[8] = {'C', 'B', 'G', 'R', 'U', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Layout: 8-byte magic, u32 version, u64 header length, JSON header
/// (dimensions, dropout, vocabulary, array table), then every parameter array
/// as little-endian float32 in the order and storage layout the header lists.
void save_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint load_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace clickbait
