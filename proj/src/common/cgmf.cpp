#include "paretofact/common/cgmf.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "paretofact/common/error.hpp"

namespace paretofact::cgmf {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[offset + i]) << (8 * i);
  return v;
}

void put_f32(std::vector<std::uint8_t>& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

}  // namespace

const num::Tensor& File::get(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t.tensor;
  }
  throw FormatError("cgmf: no tensor named '" + name + "'", 0);
}

std::vector<std::uint8_t> encode(const File& file) {
  nlohmann::json header = file.header;
  header["tensors"] = nlohmann::json::array();
  std::size_t blob_bytes = 0;
  for (const auto& t : file.tensors) {
    header["tensors"].push_back({{"name", t.name}, {"shape", t.tensor.shape()}});
    blob_bytes += 4 * t.tensor.size();
  }
  const std::string text = header.dump();
  std::vector<std::uint8_t> out;
  out.reserve(12 + text.size() + blob_bytes);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& t : file.tensors) {
    for (float v : t.tensor.values()) put_f32(out, v);
  }
  return out;
}

File decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) {
    throw FormatError("cgmf: file too short for the fixed header (" + std::to_string(bytes.size()) +
                          " bytes, need 12)",
                      bytes.size());
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("cgmf: bad magic bytes", 0);
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kVersion) {
    throw FormatError("cgmf: unsupported version " + std::to_string(version), 4);
  }
  const std::uint32_t header_len = get_u32(bytes, 8);
  if (bytes.size() - 12 < header_len) {
    throw FormatError("cgmf: header length " + std::to_string(header_len) + " exceeds remaining " +
                          std::to_string(bytes.size() - 12) + " bytes",
                      8);
  }
  File file;
  try {
    file.header = nlohmann::json::parse(bytes.begin() + 12, bytes.begin() + 12 + header_len);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("cgmf: malformed JSON header: ") + e.what(), 12);
  }
  if (!file.header.is_object() || !file.header.contains("tensors") ||
      !file.header["tensors"].is_array()) {
    throw FormatError("cgmf: header lacks a 'tensors' list", 12);
  }
  std::size_t offset = 12 + header_len;
  for (const auto& entry : file.header["tensors"]) {
    num::Shape shape;
    std::string name;
    try {
      name = entry.at("name").get<std::string>();
      shape = entry.at("shape").get<num::Shape>();
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("cgmf: malformed tensor entry: ") + e.what(), 12);
    }
    const std::size_t count = num::shape_size(shape);
    const std::size_t need = 4 * count;
    if (bytes.size() - offset < need) {
      throw FormatError("cgmf: blob '" + name + "' expected " + std::to_string(need) +
                            " bytes, found " + std::to_string(bytes.size() - offset),
                        offset);
    }
    std::vector<float> values(count);
    for (std::size_t i = 0; i < count; ++i) {
      values[i] = std::bit_cast<float>(get_u32(bytes, offset + 4 * i));
    }
    offset += need;
    try {
      file.tensors.push_back({name, num::Tensor(shape, std::move(values))});
    } catch (const DimensionError& e) {
      throw FormatError(std::string("cgmf: tensor '") + name + "': " + e.what(), offset - need);
    }
  }
  if (offset != bytes.size()) {
    throw FormatError("cgmf: " + std::to_string(bytes.size() - offset) +
                          " trailing bytes after the last blob (header declares " +
                          std::to_string(offset) + " bytes, file has " + std::to_string(bytes.size()) + ")",
                      offset);
  }
  file.header.erase("tensors");
  return file;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_bytes(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()),
                                                  text.size()));
}

void write(const std::filesystem::path& path, const File& file) { write_bytes(path, encode(file)); }

File read(const std::filesystem::path& path) { return decode(read_bytes(path)); }

}  // namespace paretofact::cgmf
