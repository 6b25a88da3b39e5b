#include "scoregan/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <vector>

namespace scoregan {

namespace {

const char kMagic[4] = {'S', 'G', 'A', 'N'};

std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
  return table;
}

void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
  buf.push_back(static_cast<unsigned char>(v & 0xFF));
  buf.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
  buf.push_back(static_cast<unsigned char>((v >> 16) & 0xFF));
  buf.push_back(static_cast<unsigned char>((v >> 24) & 0xFF));
}

void put_f32(std::vector<unsigned char>& buf, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(buf, bits);
}

struct Reader {
  const std::vector<unsigned char>& data;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > data.size()) throw CheckpointError("checkpoint truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = static_cast<std::uint32_t>(data[pos]) |
                      (static_cast<std::uint32_t>(data[pos + 1]) << 8) |
                      (static_cast<std::uint32_t>(data[pos + 2]) << 16) |
                      (static_cast<std::uint32_t>(data[pos + 3]) << 24);
    pos += 4;
    return v;
  }
  float f32() {
    std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data.data() + pos), n);
    pos += n;
    return s;
  }
};

}  // namespace

std::uint32_t crc32(const unsigned char* data, std::size_t n, std::uint32_t seed) {
  static const auto table = make_crc_table();
  std::uint32_t c = seed ^ 0xFFFFFFFFu;
  for (std::size_t i = 0; i < n; ++i) c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

void save_checkpoint(std::map<std::string, Matrix*> tensors, const nlohmann::json& meta,
                     const std::string& path) {
  std::vector<unsigned char> buf;
  buf.insert(buf.end(), kMagic, kMagic + 4);
  put_u32(buf, kCheckpointVersion);
  put_u32(buf, static_cast<std::uint32_t>(tensors.size()));
  for (auto& [name, m] : tensors) {
    put_u32(buf, static_cast<std::uint32_t>(name.size()));
    buf.insert(buf.end(), name.begin(), name.end());
    put_u32(buf, 2);  // rank: everything in this engine is a matrix
    put_u32(buf, static_cast<std::uint32_t>(m->rows()));
    put_u32(buf, static_cast<std::uint32_t>(m->cols()));
    // Row-major floats; the live tensor is rounded through float32 so a
    // resumed run continues from exactly what was written.
    for (Eigen::Index r = 0; r < m->rows(); ++r) {
      for (Eigen::Index cidx = 0; cidx < m->cols(); ++cidx) {
        auto f = static_cast<float>((*m)(r, cidx));
        (*m)(r, cidx) = static_cast<Scalar>(f);
        put_f32(buf, f);
      }
    }
  }
  std::string json_text = meta.dump();
  put_u32(buf, static_cast<std::uint32_t>(json_text.size()));
  buf.insert(buf.end(), json_text.begin(), json_text.end());
  put_u32(buf, crc32(buf.data(), buf.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw CheckpointError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (data.size() < 12) throw CheckpointError("checkpoint truncated");

  std::uint32_t stored_crc = static_cast<std::uint32_t>(data[data.size() - 4]) |
                             (static_cast<std::uint32_t>(data[data.size() - 3]) << 8) |
                             (static_cast<std::uint32_t>(data[data.size() - 2]) << 16) |
                             (static_cast<std::uint32_t>(data[data.size() - 1]) << 24);
  if (crc32(data.data(), data.size() - 4) != stored_crc) {
    throw CheckpointError("checkpoint checksum mismatch (corrupt or truncated file)");
  }

  Reader r{data};
  if (r.bytes(4) != std::string(kMagic, 4)) throw CheckpointError("not a checkpoint file");
  std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint format version " + std::to_string(version) +
                          " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint ckpt;
  std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.bytes(r.u32());
    std::uint32_t rank = r.u32();
    if (rank != 2) throw CheckpointError("unsupported tensor rank in checkpoint");
    std::uint32_t rows_n = r.u32();
    std::uint32_t cols_n = r.u32();
    Matrix m(rows_n, cols_n);
    for (std::uint32_t row = 0; row < rows_n; ++row)
      for (std::uint32_t col = 0; col < cols_n; ++col) m(row, col) = static_cast<Scalar>(r.f32());
    ckpt.tensors.emplace(std::move(name), std::move(m));
  }
  std::string json_text = r.bytes(r.u32());
  try {
    ckpt.meta = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint metadata is not valid JSON: ") + e.what());
  }
  return ckpt;
}

void collect_params(std::map<std::string, Matrix*>& out, ParamSet& params,
                    const std::string& prefix) {
  for (auto& [name, p] : params) out.emplace(prefix + name, &p.value);
}

void restore_params(const Checkpoint& ckpt, ParamSet& params, const std::string& prefix) {
  for (auto& [name, p] : params) {
    auto it = ckpt.tensors.find(prefix + name);
    if (it == ckpt.tensors.end()) {
      throw CheckpointError("checkpoint is missing tensor: " + prefix + name);
    }
    if (it->second.rows() != p.value.rows() || it->second.cols() != p.value.cols()) {
      throw CheckpointError("checkpoint tensor shape mismatch: " + prefix + name);
    }
    p.value = it->second;
    p.grad.setZero();
  }
}

}  // namespace scoregan
