#pragma once

// Binary container shared by model bundles, target models, datasets and
// report images:
//
//   "CGMF" | uint32 LE version | uint32 LE header length | UTF-8 JSON header
//   | one float32 LE blob per entry of header["tensors"], in order
//
// header["tensors"] is a list of {"name": string, "shape": [dims...]}; blob
// lengths follow from the shapes.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "paretofact/num/tensor.hpp"

namespace paretofact::cgmf {

inline constexpr char kMagic[4] = {'C', 'G', 'M', 'F'};
inline constexpr std::uint32_t kVersion = 1;

struct NamedTensor {
  std::string name;
  num::Tensor tensor;
};

struct File {
  nlohmann::json header;  // without the "tensors" entry
  std::vector<NamedTensor> tensors;

  // Throws FormatError when no tensor carries `name`.
  const num::Tensor& get(const std::string& name) const;
};

std::vector<std::uint8_t> encode(const File& file);
// Throws FormatError (with byte offset) on bad magic, unsupported version,
// truncation, malformed header, or trailing bytes.
File decode(std::span<const std::uint8_t> bytes);

void write(const std::filesystem::path& path, const File& file);
File read(const std::filesystem::path& path);

// Whole-file helpers; throw IoError naming the path.
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace paretofact::cgmf
