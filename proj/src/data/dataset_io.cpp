#include "paretofact/data/dataset_io.hpp"

#include <cmath>

#include "paretofact/common/cgmf.hpp"
#include "paretofact/common/error.hpp"

namespace paretofact::data {

nlohmann::json manifest(const AnnotatedDataset& d) {
  nlohmann::json j;
  j["kind"] = "dataset";
  j["source"] = d.source;
  j["seed"] = d.seed;
  j["size"] = d.size();
  j["height"] = d.height;
  j["width"] = d.width;
  j["channels"] = d.channels;
  j["attribute_names"] = d.attribute_names;
  j["class_names"] = d.class_names;
  j["class_counts"] = d.class_counts();
  if (d.bias) {
    j["bias"] = {{"attribute", d.bias->attribute}, {"class", d.bias->label}, {"strength", d.bias->strength}};
  } else {
    j["bias"] = nullptr;
  }
  return j;
}

void save_dataset(const AnnotatedDataset& d, const std::filesystem::path& path) {
  cgmf::File file;
  file.header = manifest(d);
  num::Tensor labels(num::Shape{d.size()});
  for (std::size_t i = 0; i < d.size(); ++i) labels[i] = static_cast<float>(d.labels[i]);
  file.tensors = {{"images", d.images}, {"attributes", d.attributes}, {"labels", labels}};
  cgmf::write(path, file);
}

AnnotatedDataset load_dataset(const std::filesystem::path& path) {
  const cgmf::File file = cgmf::read(path);
  const auto& h = file.header;
  AnnotatedDataset d;
  try {
    if (h.at("kind") != "dataset") throw FormatError(path.string() + ": not a dataset file", 12);
    d.source = h.at("source").get<std::string>();
    d.seed = h.at("seed").get<std::uint64_t>();
    d.height = h.at("height").get<std::size_t>();
    d.width = h.at("width").get<std::size_t>();
    d.channels = h.at("channels").get<std::size_t>();
    d.attribute_names = h.at("attribute_names").get<std::vector<std::string>>();
    d.class_names = h.at("class_names").get<std::vector<std::string>>();
    if (!h.at("bias").is_null()) {
      const auto& b = h.at("bias");
      d.bias = BiasSpec{b.at("attribute").get<std::size_t>(), b.at("class").get<int>(),
                        b.at("strength").get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": malformed dataset header: " + e.what(), 12);
  }
  d.images = file.get("images");
  d.attributes = file.get("attributes");
  for (float v : file.get("labels").values()) d.labels.push_back(static_cast<int>(std::lround(v)));
  try {
    d.validate();
  } catch (const ContractError& e) {
    throw FormatError(path.string() + ": " + e.what(), 12);
  }
  return d;
}

nlohmann::json split_to_json(const SplitPlan& p) {
  return {{"seed", p.seed},
          {"gan_train", p.gan_train},
          {"target_train", p.target_train},
          {"target_holdout", p.target_holdout}};
}

SplitPlan split_from_json(const nlohmann::json& j) {
  SplitPlan p;
  try {
    p.seed = j.at("seed").get<std::uint64_t>();
    p.gan_train = j.at("gan_train").get<std::vector<std::size_t>>();
    p.target_train = j.at("target_train").get<std::vector<std::size_t>>();
    p.target_holdout = j.at("target_holdout").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed split record: ") + e.what(), 0);
  }
  return p;
}

}  // namespace paretofact::data
