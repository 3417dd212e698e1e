#include "clickbait/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "clickbait/error.hpp"

namespace clickbait {

using json = nlohmann::json;

namespace {

template <class U>
void write_le(std::ostream& out, U value) {
  unsigned char bytes[sizeof(U)];
  std::memcpy(bytes, &value, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(U));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <class U>
U read_le(std::istream& in) {
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) throw DataError("checkpoint truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(U));
  U value;
  std::memcpy(&value, bytes, sizeof(U));
  return value;
}

struct ArrayShape {
  Eigen::Index rows;
  Eigen::Index cols;
  const char* order;
};

// Shapes in parameter_arrays() order.
std::vector<ArrayShape> array_shapes(const Model<float>& m) {
  std::vector<ArrayShape> shapes;
  shapes.push_back({m.embedding.matrix.rows(), m.embedding.matrix.cols(), "row-major"});
  auto add = [&](const char*, const auto& a) { shapes.push_back({a.rows(), a.cols(), "column-major"}); };
  for_each_gru_array(m.forward, add);
  for_each_gru_array(m.backward, add);
  shapes.push_back({m.head.weights.rows(), 1, "column-major"});
  shapes.push_back({1, 1, "column-major"});
  return shapes;
}

}  // namespace

void save_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const auto& m = ckpt.model;
  m.validate();
  if (static_cast<std::size_t>(m.embedding.rows()) != ckpt.vocab.size()) {
    throw std::invalid_argument("embedding rows do not match the vocabulary size");
  }

  json header;
  header["format"] = "clickbait-bigru";
  header["version"] = kCheckpointVersion;
  header["dtype"] = "float32";
  header["dim"] = m.dim();
  header["hidden"] = m.hidden();
  header["max_len"] = ckpt.max_len;
  header["text_field"] = to_string(ckpt.text_field);
  header["embedding_trainable"] = m.embedding.trainable;
  header["dropout"] = {{"embed", m.dropout.embed},
                       {"gru_input", m.dropout.gru_input},
                       {"gru_output", m.dropout.gru_output}};
  header["vocab"] = ckpt.vocab.corpus_tokens();
  auto arrays = parameter_arrays(m);
  auto shapes = array_shapes(m);
  json table = json::array();
  for (std::size_t i = 0; i < arrays.size(); ++i) {
    table.push_back({{"name", arrays[i].name},
                     {"rows", shapes[i].rows},
                     {"cols", shapes[i].cols},
                     {"order", shapes[i].order}});
  }
  header["arrays"] = table;
  const std::string text = header.dump();

  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_le<std::uint32_t>(out, kCheckpointVersion);
  write_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& a : arrays) {
    for (float v : a.values) write_le<float>(out, v);
  }
  if (!out) throw DataError("failed writing checkpoint");
}

Checkpoint load_checkpoint(std::istream& in) {
  char magic[sizeof(kCheckpointMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw DataError("not a checkpoint file");
  }
  const auto version = read_le<std::uint32_t>(in);
  if (version != kCheckpointVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
  const auto length = read_le<std::uint64_t>(in);
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length))) throw DataError("checkpoint truncated");

  Checkpoint ckpt;
  try {
    const json header = json::parse(text);
    if (header.at("dtype") != "float32") throw DataError("unsupported checkpoint dtype");
    const auto dim = header.at("dim").get<Eigen::Index>();
    const auto hidden = header.at("hidden").get<Eigen::Index>();
    ckpt.max_len = header.at("max_len").get<std::size_t>();
    ckpt.text_field = parse_text_field(header.at("text_field").get<std::string>());
    for (const auto& t : header.at("vocab")) ckpt.vocab.add(t.get<std::string>());

    auto& m = ckpt.model;
    m.embedding.matrix = RowMatrix<float>::Zero(static_cast<Eigen::Index>(ckpt.vocab.size()), dim);
    m.embedding.trainable = header.at("embedding_trainable").get<bool>();
    m.forward = GruParams<float>::zeros(hidden, dim);
    m.backward = GruParams<float>::zeros(hidden, dim);
    m.head.weights = Vector<float>::Zero(2 * hidden);
    const auto& dropout = header.at("dropout");
    m.dropout = {dropout.at("embed").get<double>(), dropout.at("gru_input").get<double>(),
                 dropout.at("gru_output").get<double>()};

    auto arrays = parameter_arrays(m);
    const auto& table = header.at("arrays");
    if (table.size() != arrays.size()) throw DataError("checkpoint array table does not match the model layout");
    for (std::size_t i = 0; i < arrays.size(); ++i) {
      const auto& entry = table[i];
      const auto rows = entry.at("rows").get<std::size_t>();
      const auto cols = entry.at("cols").get<std::size_t>();
      if (entry.at("name") != arrays[i].name || rows * cols != arrays[i].values.size()) {
        throw DataError("checkpoint array " + entry.at("name").get<std::string>() + " does not match the model layout");
      }
      for (float& v : arrays[i].values) v = read_le<float>(in);
    }
    m.validate();
  } catch (const json::exception& e) {
    throw DataError(std::string("bad checkpoint header: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("bad checkpoint header: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  save_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return load_checkpoint(in);
}

}  // namespace clickbait
