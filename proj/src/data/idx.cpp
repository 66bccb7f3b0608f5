#include "paretofact/data/idx.hpp"

#include <algorithm>
#include <cmath>

#include "paretofact/common/cgmf.hpp"
#include "paretofact/common/error.hpp"

namespace paretofact::data {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t offset, const std::string& what) {
  if (b.size() < offset + 4) {
    throw FormatError(what + ": truncated header (file has " + std::to_string(b.size()) + " bytes)", offset);
  }
  return (std::uint32_t{b[offset]} << 24) | (std::uint32_t{b[offset + 1]} << 16) |
         (std::uint32_t{b[offset + 2]} << 8) | std::uint32_t{b[offset + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void require_magic(std::uint32_t got, std::uint32_t want, const std::string& what) {
  if (got != want) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "bad magic 0x%08x, expected 0x%08x", got, want);
    throw FormatError(what + ": " + buf, 0);
  }
}

void require_payload(const std::vector<std::uint8_t>& b, std::size_t header, std::size_t need,
                     const std::string& what) {
  if (b.size() - header < need) {
    throw FormatError(what + ": truncated payload, expected " + std::to_string(need) + " bytes, found " +
                          std::to_string(b.size() - header),
                      b.size());
  }
  if (b.size() - header > need) {
    throw FormatError(what + ": " + std::to_string(b.size() - header - need) + " trailing bytes",
                      header + need);
  }
}

}  // namespace

AnnotatedDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const std::string iname = images.string();
  const std::string lname = labels.string();
  const auto ib = cgmf::read_bytes(images);
  const auto lb = cgmf::read_bytes(labels);

  require_magic(read_be32(ib, 0, iname), kImageMagic, iname);
  const std::size_t n = read_be32(ib, 4, iname);
  const std::size_t rows = read_be32(ib, 8, iname);
  const std::size_t cols = read_be32(ib, 12, iname);
  require_magic(read_be32(lb, 0, lname), kLabelMagic, lname);
  const std::size_t nl = read_be32(lb, 4, lname);
  if (n != nl) {
    throw FormatError("idx: image count " + std::to_string(n) + " in " + iname + " differs from label count " +
                          std::to_string(nl) + " in " + lname,
                      4);
  }
  if (n == 0 || rows == 0 || cols == 0) throw FormatError(iname + ": zero-sized dimension", 4);
  const std::size_t p = rows * cols;
  require_payload(ib, 16, n * p, iname);
  require_payload(lb, 8, n, lname);

  int max_label = 0;
  for (std::size_t i = 0; i < n; ++i) max_label = std::max<int>(max_label, lb[8 + i]);
  const std::size_t classes = std::max<std::size_t>(10, static_cast<std::size_t>(max_label) + 1);

  AnnotatedDataset ds;
  ds.height = rows;
  ds.width = cols;
  ds.channels = 1;
  ds.source = "idx";
  for (std::size_t c = 0; c < classes; ++c) {
    ds.class_names.push_back(std::to_string(c));
    ds.attribute_names.push_back("is_" + std::to_string(c));
  }
  ds.images = num::Tensor(num::Shape{n, p});
  ds.attributes = num::Tensor(num::Shape{n, classes});
  ds.labels.resize(n);
  float* px = ds.images.data();
  for (std::size_t i = 0; i < n * p; ++i) px[i] = static_cast<float>(ib[16 + i]) / 255.0f;
  for (std::size_t i = 0; i < n; ++i) {
    ds.labels[i] = lb[8 + i];
    ds.attributes.at(i, ds.labels[i]) = 1.0f;
  }
  return ds;
}

void save_idx(const AnnotatedDataset& dataset, const std::filesystem::path& images,
              const std::filesystem::path& labels) {
  if (dataset.channels != 1) {
    throw ContractError("save_idx: IDX images are single-channel, dataset has " +
                        std::to_string(dataset.channels) + " channels");
  }
  const std::size_t n = dataset.size();
  std::vector<std::uint8_t> ib;
  put_be32(ib, kImageMagic);
  put_be32(ib, static_cast<std::uint32_t>(n));
  put_be32(ib, static_cast<std::uint32_t>(dataset.height));
  put_be32(ib, static_cast<std::uint32_t>(dataset.width));
  for (float v : dataset.images.values()) {
    ib.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)));
  }
  std::vector<std::uint8_t> lb;
  put_be32(lb, kLabelMagic);
  put_be32(lb, static_cast<std::uint32_t>(n));
  for (int l : dataset.labels) {
    if (l < 0 || l > 255) throw ContractError("save_idx: label " + std::to_string(l) + " does not fit a byte");
    lb.push_back(static_cast<std::uint8_t>(l));
  }
  cgmf::write_bytes(images, ib);
  cgmf::write_bytes(labels, lb);
}

}  // namespace paretofact::data
