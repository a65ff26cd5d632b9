#include "sparsetrack/mpn.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sparsetrack {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'T', 'R', 'K', 'M', 'P', 'N'};
constexpr uint32_t kFormatVersion = 1;

void put_u32(std::string& out, uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFFu));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  uint32_t u32(const std::string& field) {
    need(4, "truncated header: missing " + field);
    uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<uint32_t>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    pos_ += 4;
    return v;
  }

  double f64(const std::string& tensor) {
    need(8, "truncated payload: missing tensor " + tensor);
    uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<uint64_t>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }

  size_t remaining() const { return bytes_.size() - pos_; }
  void skip(size_t n) { pos_ += n; }

 private:
  void need(size_t n, const std::string& what) const {
    if (bytes_.size() - pos_ < n) throw DataError("load_parameters: " + what);
  }

  std::string_view bytes_;
  size_t pos_ = 0;
};

}  // namespace

std::string save_parameters(const MpnParameters& params) {
  params.validate_shapes();
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<uint32_t>(params.d_node));
  put_u32(out, static_cast<uint32_t>(params.d_edge));
  for (const auto& t : params.tensors()) {
    for (size_t i = 0; i < t.size; ++i) put_f64(out, t.data[i]);
  }
  return out;
}

MpnParameters load_parameters(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw DataError("load_parameters: bad magic");
  }
  Reader in(bytes);
  in.skip(sizeof(kMagic));
  const uint32_t version = in.u32("format version");
  if (version != kFormatVersion) {
    throw DataError("load_parameters: unsupported format version " + std::to_string(version));
  }
  const uint32_t d_node = in.u32("d_node");
  const uint32_t d_edge = in.u32("d_edge");
  if (d_node == 0 || d_edge == 0 || d_node > (1u << 16) || d_edge > (1u << 16)) {
    throw DataError("load_parameters: implausible dimensions d_node=" + std::to_string(d_node) +
                    " d_edge=" + std::to_string(d_edge));
  }
  MpnParameters params = MpnParameters::zeros(static_cast<int>(d_node), static_cast<int>(d_edge));
  for (auto& t : params.tensors()) {
    for (size_t i = 0; i < t.size; ++i) t.data[i] = in.f64(t.name);
  }
  if (in.remaining() != 0) {
    throw DataError("load_parameters: " + std::to_string(in.remaining()) + " trailing bytes after last tensor");
  }
  return params;
}

void save_parameters_file(const MpnParameters& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write parameter file: " + path);
  const std::string bytes = save_parameters(params);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing parameter file: " + path);
}

MpnParameters load_parameters_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open parameter file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return load_parameters(buf.str());
}

}  // namespace sparsetrack
