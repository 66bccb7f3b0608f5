#include "paretofact/gan/model_io.hpp"

namespace paretofact::gan {

namespace {

nlohmann::json network_spec(const Mlp& net) {
  return {{"sizes", net.sizes()}, {"head", head_name(net.head())}, {"hidden_activation", "leaky_relu"},
          {"slope", net.slope()}};
}

Mlp network_from_spec(const nlohmann::json& spec) {
  return Mlp(spec.at("sizes").get<std::vector<std::size_t>>(),
             parse_head(spec.at("head").get<std::string>()), spec.at("slope").get<double>());
}

void load_parameters(const cgmf::File& file,
                     const std::vector<std::pair<std::string, num::Parameter*>>& named) {
  if (file.tensors.size() != named.size()) {
    throw FormatError("model file holds " + std::to_string(file.tensors.size()) +
                          " tensors, header networks need " + std::to_string(named.size()),
                      12);
  }
  for (std::size_t i = 0; i < named.size(); ++i) {
    const auto& [name, param] = named[i];
    const auto& stored = file.tensors[i];
    if (stored.name != name || stored.tensor.shape() != param->value.shape()) {
      throw FormatError("model tensor " + std::to_string(i) + " is '" + stored.name + "' " +
                            num::shape_string(stored.tensor.shape()) + ", expected '" + name + "' " +
                            num::shape_string(param->value.shape()),
                        12);
    }
    *param = num::Parameter(stored.tensor);
  }
}

}  // namespace

cgmf::File bundle_to_file(const ModelBundle& bundle) {
  cgmf::File file;
  const auto& s = bundle.shape;
  nlohmann::json nets = {{"encoder", network_spec(bundle.encoder)},
                         {"decoder", network_spec(bundle.decoder)},
                         {"trunk", network_spec(bundle.trunk)},
                         {"critic_head", network_spec(bundle.critic_head)},
                         {"plausibility_head", network_spec(bundle.plausibility_head)}};
  if (bundle.conditional()) nets["attribute_head"] = network_spec(bundle.attribute_head);
  file.header = {{"kind", "model_bundle"},
                 {"mode", mode_name(s.mode)},
                 {"image_shape", s.image_shape},
                 {"latent", s.latent},
                 {"attributes", s.attributes},
                 {"hidden", s.hidden},
                 {"seed", bundle.seed},
                 {"networks", nets}};
  for (const auto& [name, p] : bundle.named_parameters()) file.tensors.push_back({name, p->value});
  return file;
}

ModelBundle bundle_from_file(const cgmf::File& file) {
  try {
    const auto& h = file.header;
    if (h.at("kind").get<std::string>() != "model_bundle") {
      throw FormatError("file is a '" + h.at("kind").get<std::string>() + "', not a model bundle", 12);
    }
    BundleShape shape;
    shape.mode = parse_mode(h.at("mode").get<std::string>());
    shape.image_shape = h.at("image_shape").get<std::vector<std::size_t>>();
    shape.latent = h.at("latent").get<std::size_t>();
    shape.attributes = h.at("attributes").get<std::size_t>();
    shape.hidden = h.at("hidden").get<std::vector<std::size_t>>();
    ModelBundle b = ModelBundle::create(shape, h.at("seed").get<std::uint64_t>());
    const auto& nets = h.at("networks");
    b.encoder = network_from_spec(nets.at("encoder"));
    b.decoder = network_from_spec(nets.at("decoder"));
    b.trunk = network_from_spec(nets.at("trunk"));
    b.critic_head = network_from_spec(nets.at("critic_head"));
    b.plausibility_head = network_from_spec(nets.at("plausibility_head"));
    if (b.conditional()) b.attribute_head = network_from_spec(nets.at("attribute_head"));
    load_parameters(file, b.named_parameters());
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model bundle header: ") + e.what(), 12);
  } catch (const ContractError& e) {
    throw FormatError(std::string("model bundle header: ") + e.what(), 12);
  }
}

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle) {
  cgmf::write(path, bundle_to_file(bundle));
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  return bundle_from_file(cgmf::read(path));
}

void save_target(const std::filesystem::path& path, const TargetModel& model) {
  cgmf::File file;
  file.header = {{"kind", "target_model"},
                 {"class_labels", model.class_labels},
                 {"network", network_spec(model.network)}};
  std::size_t i = 0;
  for (const auto* p : model.network.parameters()) {
    file.tensors.push_back({"network." + std::to_string(i / 2) + (i % 2 ? ".bias" : ".weight"), p->value});
    ++i;
  }
  cgmf::write(path, file);
}

TargetModel load_target(const std::filesystem::path& path) {
  const cgmf::File file = cgmf::read(path);
  try {
    const auto& h = file.header;
    if (h.at("kind").get<std::string>() != "target_model") {
      throw FormatError("file is a '" + h.at("kind").get<std::string>() + "', not a target model", 12);
    }
    TargetModel m;
    m.class_labels = h.at("class_labels").get<std::vector<std::string>>();
    m.network = network_from_spec(h.at("network"));
    std::vector<std::pair<std::string, num::Parameter*>> named;
    std::size_t i = 0;
    for (auto* p : m.network.parameters()) {
      named.emplace_back("network." + std::to_string(i / 2) + (i % 2 ? ".bias" : ".weight"), p);
      ++i;
    }
    load_parameters(file, named);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("target model header: ") + e.what(), 12);
  } catch (const ContractError& e) {
    throw FormatError(std::string("target model header: ") + e.what(), 12);
  }
}

}  // namespace paretofact::gan
