#include "paretofact/cli/config.hpp"

#include <fmt/format.h>

#include "paretofact/common/cgmf.hpp"
#include "paretofact/common/error.hpp"
#include "paretofact/data/blobs.hpp"

namespace paretofact::cli {

using nlohmann::json;

namespace {

// Typed access to one config object, naming dotted keys in errors.
class Reader {
 public:
  Reader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) fail("", "an object");
  }

  std::string key(std::string_view k) const { return prefix_.empty() ? std::string(k) : prefix_ + "." + std::string(k); }

  const json& raw(std::string_view k) const {
    const auto it = j_.find(std::string(k));
    if (it == j_.end()) throw ContractError("config key '" + key(k) + "' is missing");
    return *it;
  }

  Reader object(std::string_view k) const { return Reader(raw(k), key(k)); }

  // Parsed text stores positive integers as unsigned; values built in code
  // may be signed.
  static bool natural(const json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  }

  std::uint64_t u64(std::string_view k) const {
    const json& v = raw(k);
    if (!natural(v)) fail(k, "a non-negative integer");
    return v.get<std::uint64_t>();
  }
  std::size_t size(std::string_view k) const { return static_cast<std::size_t>(u64(k)); }
  double number(std::string_view k) const {
    const json& v = raw(k);
    if (!v.is_number()) fail(k, "a number");
    return v.get<double>();
  }
  bool boolean(std::string_view k) const {
    const json& v = raw(k);
    if (!v.is_boolean()) fail(k, "true or false");
    return v.get<bool>();
  }
  std::string string(std::string_view k) const {
    const json& v = raw(k);
    if (!v.is_string()) fail(k, "a string");
    return v.get<std::string>();
  }
  bool null(std::string_view k) const { return raw(k).is_null(); }
  std::vector<std::size_t> sizes(std::string_view k) const {
    const json& v = raw(k);
    if (!v.is_array()) fail(k, "an array of non-negative integers");
    std::vector<std::size_t> out;
    for (const auto& e : v) {
      if (!natural(e)) fail(k, "an array of non-negative integers");
      out.push_back(e.get<std::size_t>());
    }
    return out;
  }

  [[noreturn]] void fail(std::string_view k, std::string_view expected) const {
    const std::string name = k.empty() ? prefix_ : key(k);
    const json& v = k.empty() ? j_ : j_.at(std::string(k));
    throw ContractError(fmt::format("config key '{}' must be {}, got {}", name, expected, v.dump()));
  }

 private:
  const json& j_;
  std::string prefix_;
};

void merge(json& base, const json& over, const std::string& path) {
  if (!over.is_object()) {
    throw ContractError(path.empty() ? "config must be a JSON object" : "config key '" + path + "' must be an object");
  }
  for (const auto& [k, v] : over.items()) {
    const std::string key = path.empty() ? k : path + "." + k;
    if (!base.contains(k)) throw ContractError("unknown config key '" + key + "'");
    if (base[k].is_object() && v.is_object()) {
      merge(base[k], v, key);
    } else {
      base[k] = v;
    }
  }
}

// Runs a component validator and prefixes its message with the config section.
template <typename F>
void within(std::string_view section, F&& f) {
  try {
    f();
  } catch (const ContractError& e) {
    throw ContractError(fmt::format("config section '{}': {}", section, e.what()));
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

json default_config_json() {
  RunConfig c;
  c.training.seed = 42;
  c.target_training.seed = 42;
  c.nsga.seed = 100;
  return config_to_json(c);
}

json config_to_json(const RunConfig& c) {
  json j;
  j["dataset"] = {{"source", c.dataset.source},
                  {"seed", c.dataset.seed},
                  {"n", c.dataset.n},
                  {"bias", c.dataset.bias ? json{{"attribute", c.dataset.bias->attribute},
                                                 {"class", c.dataset.bias->label},
                                                 {"strength", c.dataset.bias->strength}}
                                          : json(nullptr)},
                  {"augment_erased", c.dataset.augment_erased},
                  {"augment_seed", c.dataset.augment_seed},
                  {"idx_images", c.dataset.idx_images.empty() ? json(nullptr) : json(c.dataset.idx_images.string())},
                  {"idx_labels", c.dataset.idx_labels.empty() ? json(nullptr) : json(c.dataset.idx_labels.string())}};
  j["split"] = {{"fractions", c.split.fractions}, {"seed", c.split.seed}};
  j["model"] = {{"latent", c.model.latent},
                {"hidden", c.model.hidden},
                {"mode", gan::mode_name(c.model.mode)},
                {"seed", c.model.seed}};
  const auto& t = c.training;
  j["loss_weights"] = {{"lambda1", t.weights.lambda1}, {"lambda2", t.weights.lambda2}, {"lambda3", t.weights.lambda3}};
  j["training"] = {{"epochs", t.epochs},
                   {"batch_size", t.batch_size},
                   {"learning_rate", t.learning_rate},
                   {"momentum", t.momentum},
                   {"clip", t.clip},
                   {"n_critic", t.n_critic},
                   {"max_grad_norm", t.max_grad_norm},
                   {"seed", t.seed}};
  const auto& tt = c.target_training;
  j["target_training"] = {{"hidden", tt.hidden},
                          {"epochs", tt.epochs},
                          {"batch_size", tt.batch_size},
                          {"learning_rate", tt.learning_rate},
                          {"momentum", tt.momentum},
                          {"seed", tt.seed}};
  const auto& n = c.nsga;
  j["nsga"] = {{"population", n.population},
               {"offspring", n.offspring},
               {"mutation_probability", n.mutation_probability < 0 ? json(nullptr) : json(n.mutation_probability)},
               {"eta_mutation", n.eta_mutation},
               {"crossover_probability", n.crossover_probability},
               {"eta_crossover", n.eta_crossover},
               {"generations", n.generations},
               {"seed", n.seed},
               {"lower", n.lower},
               {"upper", n.upper},
               {"threads", n.threads}};
  j["objectives"] = {{"adversarial", objectives::adv_mode_name(c.objectives.adv)},
                     {"intensity", objectives::att_mode_name(c.objectives.att)},
                     {"target_class", c.target_class ? json(*c.target_class) : json(nullptr)}};
  j["audit"] = {{"anchor", c.audit.anchor ? json(*c.audit.anchor) : json(nullptr)},
                {"anchor_seed", c.audit.anchor_seed}};
  j["report"] = {{"combinations", c.combinations.empty() ? json(nullptr) : json(c.combinations)}};
  j["verify"] = {{"inject_broken_gradient", c.inject_broken_gradient}};
  j["output_dir"] = c.output_dir.string();
  return j;
}

RunConfig config_from_json(const json& overrides, const std::filesystem::path& base_dir) {
  json merged = default_config_json();
  merge(merged, overrides, "");
  const Reader root(merged, "");
  RunConfig c;

  const Reader d = root.object("dataset");
  c.dataset.source = d.string("source");
  if (c.dataset.source != "blobs" && c.dataset.source != "idx") d.fail("source", "\"blobs\" or \"idx\"");
  c.dataset.seed = d.u64("seed");
  c.dataset.n = d.size("n");
  if (!d.null("bias")) {
    const Reader b = d.object("bias");
    for (const auto& [k, v] : d.raw("bias").items()) {
      if (k != "attribute" && k != "class" && k != "strength") throw ContractError("unknown config key 'dataset.bias." + k + "'");
    }
    data::BiasSpec bias;
    bias.attribute = b.size("attribute");
    const json& label = b.raw("class");
    if (!label.is_number_integer()) b.fail("class", "an integer");
    bias.label = label.get<int>();
    bias.strength = b.number("strength");
    within("dataset.bias", [&] { data::validate_bias(bias); });
    c.dataset.bias = bias;
  }
  c.dataset.augment_erased = d.boolean("augment_erased");
  c.dataset.augment_seed = d.u64("augment_seed");
  if (!d.null("idx_images")) c.dataset.idx_images = resolve(base_dir, d.string("idx_images"));
  if (!d.null("idx_labels")) c.dataset.idx_labels = resolve(base_dir, d.string("idx_labels"));
  if (c.dataset.source == "idx") {
    for (const auto& [key, p] : {std::pair{"dataset.idx_images", c.dataset.idx_images},
                                 std::pair{"dataset.idx_labels", c.dataset.idx_labels}}) {
      if (p.empty()) throw ContractError(fmt::format("config key '{}' is required when dataset.source is \"idx\"", key));
      if (!std::filesystem::exists(p)) throw IoError(fmt::format("config key '{}': no such file {}", key, p.string()));
    }
    if (c.dataset.bias) throw ContractError("config key 'dataset.bias' only applies to the blobs source");
  } else if (c.dataset.n < 50) {
    throw ContractError(fmt::format("config key 'dataset.n' must be at least 50, got {}", c.dataset.n));
  }

  const Reader s = root.object("split");
  const json& fr = s.raw("fractions");
  if (!fr.is_array() || fr.size() != 3 || !fr[0].is_number() || !fr[1].is_number() || !fr[2].is_number()) {
    s.fail("fractions", "an array of three numbers");
  }
  c.split.fractions = {fr[0].get<double>(), fr[1].get<double>(), fr[2].get<double>()};
  c.split.seed = s.u64("seed");
  within("split", [&] { data::make_split(3, c.split.fractions, 0); });

  const Reader m = root.object("model");
  c.model.latent = m.size("latent");
  c.model.hidden = m.sizes("hidden");
  within("model", [&] { c.model.mode = gan::parse_mode(m.string("mode")); });
  c.model.seed = m.u64("seed");
  if (c.model.latent == 0) m.fail("latent", "positive");
  for (std::size_t h : c.model.hidden) {
    if (h == 0) m.fail("hidden", "an array of positive widths");
  }

  const Reader w = root.object("loss_weights");
  c.training.weights.lambda1 = w.number("lambda1");
  c.training.weights.lambda2 = w.number("lambda2");
  c.training.weights.lambda3 = w.number("lambda3");

  const Reader t = root.object("training");
  c.training.epochs = t.size("epochs");
  c.training.batch_size = t.size("batch_size");
  c.training.learning_rate = t.number("learning_rate");
  c.training.momentum = t.number("momentum");
  c.training.clip = t.number("clip");
  c.training.n_critic = t.size("n_critic");
  c.training.max_grad_norm = t.number("max_grad_norm");
  c.training.seed = t.u64("seed");
  within("training", [&] { c.training.validate(); });

  const Reader tt = root.object("target_training");
  c.target_training.hidden = tt.sizes("hidden");
  c.target_training.epochs = tt.size("epochs");
  c.target_training.batch_size = tt.size("batch_size");
  c.target_training.learning_rate = tt.number("learning_rate");
  c.target_training.momentum = tt.number("momentum");
  c.target_training.seed = tt.u64("seed");
  if (c.target_training.epochs == 0) tt.fail("epochs", "positive");
  if (c.target_training.batch_size == 0) tt.fail("batch_size", "positive");
  if (!(c.target_training.learning_rate > 0)) tt.fail("learning_rate", "positive");
  if (!(c.target_training.momentum >= 0 && c.target_training.momentum < 1)) tt.fail("momentum", "in [0, 1)");

  const Reader n = root.object("nsga");
  c.nsga.population = n.size("population");
  c.nsga.offspring = n.size("offspring");
  c.nsga.mutation_probability = n.null("mutation_probability") ? -1.0 : n.number("mutation_probability");
  c.nsga.eta_mutation = n.number("eta_mutation");
  c.nsga.crossover_probability = n.number("crossover_probability");
  c.nsga.eta_crossover = n.number("eta_crossover");
  c.nsga.generations = n.size("generations");
  c.nsga.seed = n.u64("seed");
  c.nsga.lower = n.number("lower");
  c.nsga.upper = n.number("upper");
  c.nsga.threads = n.size("threads");
  within("nsga", [&] { c.nsga.validate(); });

  const Reader o = root.object("objectives");
  within("objectives", [&] {
    c.objectives.adv = objectives::parse_adv_mode(o.string("adversarial"));
    c.objectives.att = objectives::parse_att_mode(o.string("intensity"));
  });
  if (!o.null("target_class")) c.target_class = o.size("target_class");
  if (c.objectives.adv == objectives::AdvMode::targeted && !c.target_class) {
    throw ContractError("config key 'objectives.target_class' is required for targeted mode");
  }
  if (c.objectives.adv == objectives::AdvMode::untargeted && c.target_class) {
    throw ContractError("config key 'objectives.target_class' only applies to targeted mode");
  }

  const Reader a = root.object("audit");
  if (!a.null("anchor")) c.audit.anchor = a.size("anchor");
  c.audit.anchor_seed = a.u64("anchor_seed");

  const Reader r = root.object("report");
  if (!r.null("combinations")) {
    const json& combos = r.raw("combinations");
    if (!combos.is_array()) r.fail("combinations", "an array of index arrays");
    for (const auto& combo : combos) {
      if (!combo.is_array()) r.fail("combinations", "an array of index arrays");
      std::vector<std::size_t> row;
      for (const auto& e : combo) {
        if (!Reader::natural(e)) r.fail("combinations", "an array of index arrays");
        row.push_back(e.get<std::size_t>());
      }
      c.combinations.push_back(std::move(row));
    }
  }

  c.inject_broken_gradient = root.object("verify").string("inject_broken_gradient");
  c.output_dir = resolve(base_dir, root.string("output_dir"));
  return c;
}

void apply_override(json& j, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ContractError("override '" + std::string(assignment) + "' must look like key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ContractError("override key '" + key + "' has an empty segment");
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  const auto bytes = cgmf::read_bytes(path);
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": malformed JSON: " + e.what(), e.byte);
  }
  for (const auto& o : overrides) apply_override(j, o);
  return config_from_json(j, path.parent_path());
}

}  // namespace paretofact::cli
