#include "paretofact/analysis/report.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "paretofact/common/error.hpp"
#include "paretofact/moea/counterfactual.hpp"

namespace paretofact::analysis {

using nlohmann::json;

std::vector<double> FrontReport::mean_abs_delta() const {
  std::vector<double> out(attribute_names.size(), 0.0);
  if (members.empty()) return out;
  for (const auto& m : members) {
    for (std::size_t i = 0; i < out.size() && i < m.delta.size(); ++i) out[i] += std::abs(m.delta[i]);
  }
  for (double& v : out) v /= static_cast<double>(members.size());
  return out;
}

std::size_t FrontReport::flip_count() const {
  return static_cast<std::size_t>(std::count_if(members.begin(), members.end(), [](const auto& m) { return m.flip; }));
}

std::size_t FrontReport::plausible_flip_count() const {
  return static_cast<std::size_t>(
      std::count_if(members.begin(), members.end(), [](const auto& m) { return m.flip && m.display.plausible; }));
}

std::size_t closest_adversarial(std::span<const double> own) {
  if (own.empty()) throw ContractError("closest_adversarial: no candidates");
  return static_cast<std::size_t>(std::min_element(own.begin(), own.end()) - own.begin());
}

FrontReport front_report(const moea::ParetoFront& front, const objectives::AnchorContext& ctx,
                         const gan::ModelBundle& bundle, const gan::TargetModel& target,
                         const data::AnnotatedDataset& dataset, std::span<const std::size_t> candidates,
                         std::size_t anchor_index, std::size_t original_classes,
                         const objectives::ObjectiveConfig& config) {
  if (front.members.empty()) throw ContractError("front_report: empty front");
  FrontReport r;
  r.anchor_index = anchor_index;
  r.anchor_class = ctx.anchor_class;
  r.target_class = ctx.target_class;
  r.anchor_attributes = ctx.attributes;
  r.anchor_plausibility = ctx.anchor_plausibility;
  r.anchor_image = ctx.image;
  r.attribute_names = dataset.attribute_names;
  r.class_names = target.class_labels;
  r.original_classes = original_classes;
  r.height = ctx.height;
  r.width = ctx.width;
  r.channels = ctx.channels;
  r.objectives = config;
  r.nsga = front.config;
  r.evaluations = front.evaluations;

  for (const auto& ind : front.members) {
    const auto e = objectives::evaluate_full(ctx, bundle, target, ind.delta, config);
    MemberReport m;
    m.delta = ind.delta;
    m.raw = e.triple;
    m.display = objectives::display_transform(e.triple);
    m.predicted_class = e.predicted_class;
    m.proba = e.proba;
    m.critic_gap = e.critic_gap;
    m.flip = e.predicted_class != ctx.anchor_class && e.predicted_class < original_classes;
    m.image = e.image;
    r.members.push_back(std::move(m));
  }

  // Exemplar: in targeted mode the target class, otherwise any original
  // class other than the anchor's.
  std::vector<std::size_t> pool;
  for (std::size_t i : candidates) {
    const auto label = static_cast<std::size_t>(dataset.labels.at(i));
    const bool wanted = ctx.target_class ? label == *ctx.target_class
                                         : label != ctx.anchor_class && label < original_classes;
    if (wanted) pool.push_back(i);
  }
  if (!pool.empty()) {
    const num::Tensor probs = target.predict_proba(dataset.gather_images(pool));
    std::vector<double> own(pool.size());
    for (std::size_t k = 0; k < pool.size(); ++k) {
      own[k] = probs.at(k, static_cast<std::size_t>(dataset.labels[pool[k]]));
    }
    const std::size_t best = closest_adversarial(own);
    r.exemplar_index = pool[best];
    r.exemplar_own_probability = own[best];
    const auto img = dataset.image(pool[best]);
    r.exemplar_image = num::Tensor(num::Shape{1, img.size()}, std::vector<float>(img.begin(), img.end()));
  }
  return r;
}

namespace {

json nsga_json(const moea::NsgaConfig& c) {
  return {{"population", c.population},
          {"offspring", c.offspring},
          {"mutation_probability", c.mutation_probability},
          {"eta_mutation", c.eta_mutation},
          {"crossover_probability", c.crossover_probability},
          {"eta_crossover", c.eta_crossover},
          {"generations", c.generations},
          {"seed", c.seed},
          {"lower", c.lower},
          {"upper", c.upper}};
}

moea::NsgaConfig nsga_from(const json& j) {
  moea::NsgaConfig c;
  c.population = j.at("population").get<std::size_t>();
  c.offspring = j.at("offspring").get<std::size_t>();
  c.mutation_probability = j.at("mutation_probability").get<double>();
  c.eta_mutation = j.at("eta_mutation").get<double>();
  c.crossover_probability = j.at("crossover_probability").get<double>();
  c.eta_crossover = j.at("eta_crossover").get<double>();
  c.generations = j.at("generations").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.lower = j.at("lower").get<double>();
  c.upper = j.at("upper").get<double>();
  return c;
}

num::Tensor as_image(const num::Tensor& flat, const FrontReport& r) {
  return flat.reshaped(num::Shape{r.height, r.width, r.channels});
}

}  // namespace

json report_to_json(const FrontReport& r) {
  json j;
  j["kind"] = "front_report";
  j["anchor"] = {{"index", r.anchor_index},
                 {"class", r.anchor_class},
                 {"target_class", r.target_class ? json(*r.target_class) : json(nullptr)},
                 {"attributes", r.anchor_attributes},
                 {"plausibility", r.anchor_plausibility}};
  j["exemplar"] = r.exemplar_index ? json{{"index", *r.exemplar_index}, {"own_probability", r.exemplar_own_probability}}
                                   : json(nullptr);
  j["attribute_names"] = r.attribute_names;
  j["class_names"] = r.class_names;
  j["original_classes"] = r.original_classes;
  j["image_shape"] = {r.height, r.width, r.channels};
  j["objectives"] = {{"adversarial", objectives::adv_mode_name(r.objectives.adv)},
                     {"intensity", objectives::att_mode_name(r.objectives.att)}};
  j["nsga"] = nsga_json(r.nsga);
  j["evaluations"] = r.evaluations;
  j["summary"] = {{"members", r.members.size()},
                  {"flips", r.flip_count()},
                  {"plausible_flips", r.plausible_flip_count()},
                  {"mean_abs_delta", r.mean_abs_delta()}};
  json members = json::array();
  for (const auto& m : r.members) {
    members.push_back({{"delta", m.delta},
                       {"f_gan", m.raw.f_gan},
                       {"f_adv", m.raw.f_adv},
                       {"f_att", m.raw.f_att},
                       {"plausibility", m.display.plausibility},
                       {"power", m.display.power},
                       {"intensity", m.display.intensity},
                       {"plausible", m.display.plausible},
                       {"predicted_class", m.predicted_class},
                       {"proba", m.proba},
                       {"critic_gap", m.critic_gap},
                       {"flip", m.flip}});
  }
  j["members"] = std::move(members);
  return j;
}

std::string report_to_csv(const FrontReport& r) {
  std::string out = "member";
  const std::size_t n = r.members.empty() ? r.attribute_names.size() : r.members.front().delta.size();
  for (std::size_t i = 0; i < n; ++i) {
    out += ",delta_" + (i < r.attribute_names.size() ? r.attribute_names[i] : std::to_string(i));
  }
  out += ",f_gan,f_adv,f_att,plausibility,power,intensity,plausible,predicted_class,flip\n";
  for (std::size_t k = 0; k < r.members.size(); ++k) {
    const auto& m = r.members[k];
    out += std::to_string(k);
    for (double d : m.delta) out += fmt::format(",{}", d);
    out += fmt::format(",{},{},{},{},{},{},{},{},{}\n", m.raw.f_gan, m.raw.f_adv, m.raw.f_att, m.display.plausibility,
                       m.display.power, m.display.intensity, m.display.plausible ? 1 : 0, m.predicted_class,
                       m.flip ? 1 : 0);
  }
  return out;
}

cgmf::File report_images(const FrontReport& r) {
  cgmf::File f;
  f.header = {{"kind", "front_images"}, {"layout", "HWC"}};
  f.tensors.push_back({"anchor", as_image(r.anchor_image, r)});
  if (r.exemplar_index) f.tensors.push_back({"exemplar", as_image(r.exemplar_image, r)});
  for (std::size_t k = 0; k < r.members.size(); ++k) {
    f.tensors.push_back({"member_" + std::to_string(k), as_image(r.members[k].image, r)});
  }
  return f;
}

std::string report_to_svg(const FrontReport& r) {
  constexpr double W = 480, H = 360, M = 48;
  double pmin = 0, pmax = 1, qmin = 1, qmax = 1;
  for (const auto& m : r.members) {
    pmin = std::min(pmin, m.display.plausibility);
    pmax = std::max(pmax, m.display.plausibility);
    qmin = std::min(qmin, m.display.power);
    qmax = std::max(qmax, m.display.power);
  }
  if (qmax - qmin < 1e-9) qmax = qmin + 1;
  double imax = 1e-9;
  for (const auto& m : r.members) imax = std::max(imax, m.display.intensity);
  auto sx = [&](double p) { return M + (p - pmin) / (pmax - pmin) * (W - 2 * M); };
  auto sy = [&](double q) { return H - M - (q - qmin) / (qmax - qmin) * (H - 2 * M); };

  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n"
      "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n"
      "<line x1=\"{:.2f}\" y1=\"{}\" x2=\"{:.2f}\" y2=\"{}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n"
      "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">plausibility 1-f_gan</text>\n"
      "<text x=\"14\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 {})\">power 1-f_adv</text>\n",
      W, H, W, H, M, H - M, W - M, H - M, M, M, M, H - M, sx(objectives::kPlausibleThreshold), M,
      sx(objectives::kPlausibleThreshold), H - M, W / 2, H - 12, H / 2, H / 2);
  for (std::size_t k = 0; k < r.members.size(); ++k) {
    const auto& m = r.members[k];
    const double radius = 2.0 + 6.0 * m.display.intensity / imax;
    const bool mark = m.flip && m.display.plausible;
    s += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"{}\" stroke=\"#1f4e79\"><title>member {}</title></circle>\n",
                     sx(m.display.plausibility), sy(m.display.power), radius, mark ? "#1f4e79" : "none", k);
  }
  s += "</svg>\n";
  return s;
}

void write_front_report(const std::filesystem::path& dir, const FrontReport& r) {
  cgmf::write_text(dir / "report.json", report_to_json(r).dump(2) + "\n");
  cgmf::write_text(dir / "front.csv", report_to_csv(r));
  cgmf::write(dir / "images.cgmf", report_images(r));
  cgmf::write_text(dir / "front.svg", report_to_svg(r));
}

FrontReport read_front_report(const std::filesystem::path& dir) {
  const auto path = dir / "report.json";
  const auto bytes = cgmf::read_bytes(path);
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": malformed JSON: " + e.what(), 0);
  }
  FrontReport r;
  try {
    if (j.at("kind") != "front_report") throw FormatError(path.string() + ": not a front report", 0);
    const auto& a = j.at("anchor");
    r.anchor_index = a.at("index").get<std::size_t>();
    r.anchor_class = a.at("class").get<std::size_t>();
    if (!a.at("target_class").is_null()) r.target_class = a.at("target_class").get<std::size_t>();
    r.anchor_attributes = a.at("attributes").get<std::vector<float>>();
    r.anchor_plausibility = a.at("plausibility").get<double>();
    if (!j.at("exemplar").is_null()) {
      r.exemplar_index = j["exemplar"].at("index").get<std::size_t>();
      r.exemplar_own_probability = j["exemplar"].at("own_probability").get<double>();
    }
    r.attribute_names = j.at("attribute_names").get<std::vector<std::string>>();
    r.class_names = j.at("class_names").get<std::vector<std::string>>();
    r.original_classes = j.at("original_classes").get<std::size_t>();
    const auto shape = j.at("image_shape").get<std::vector<std::size_t>>();
    if (shape.size() != 3) throw FormatError(path.string() + ": image_shape must have 3 entries", 0);
    r.height = shape[0];
    r.width = shape[1];
    r.channels = shape[2];
    r.objectives.adv = objectives::parse_adv_mode(j.at("objectives").at("adversarial").get<std::string>());
    r.objectives.att = objectives::parse_att_mode(j.at("objectives").at("intensity").get<std::string>());
    r.nsga = nsga_from(j.at("nsga"));
    r.evaluations = j.at("evaluations").get<std::size_t>();
    for (const auto& mj : j.at("members")) {
      MemberReport m;
      m.delta = mj.at("delta").get<std::vector<double>>();
      m.raw = {mj.at("f_gan").get<double>(), mj.at("f_adv").get<double>(), mj.at("f_att").get<double>()};
      m.display = objectives::display_transform(m.raw);
      m.predicted_class = mj.at("predicted_class").get<std::size_t>();
      m.proba = mj.at("proba").get<std::vector<double>>();
      m.critic_gap = mj.at("critic_gap").get<double>();
      m.flip = mj.at("flip").get<bool>();
      r.members.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": malformed report: " + e.what(), 0);
  } catch (const ContractError& e) {
    throw FormatError(path.string() + ": " + e.what(), 0);
  }

  const cgmf::File images = cgmf::read(dir / "images.cgmf");
  const std::size_t p = r.height * r.width * r.channels;
  auto flat = [&](const std::string& name) {
    const auto& t = images.get(name);
    if (t.size() != p) {
      throw FormatError((dir / "images.cgmf").string() + ": image '" + name + "' has " + std::to_string(t.size()) +
                            " values, expected " + std::to_string(p),
                        0);
    }
    return t.reshaped(num::Shape{1, p});
  };
  r.anchor_image = flat("anchor");
  if (r.exemplar_index) r.exemplar_image = flat("exemplar");
  for (std::size_t k = 0; k < r.members.size(); ++k) r.members[k].image = flat("member_" + std::to_string(k));
  return r;
}

SimilarityMatrices similarity_matrices(const FrontReport& r) {
  SimilarityMatrices s;
  std::vector<const num::Tensor*> images{&r.anchor_image};
  s.labels.push_back("anchor");
  for (std::size_t k = 0; k < r.members.size(); ++k) {
    images.push_back(&r.members[k].image);
    s.labels.push_back("member_" + std::to_string(k));
  }
  const std::size_t n = images.size();
  s.ssim.assign(n, std::vector<double>(n, 1.0));
  s.mean_diff.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = ssim_image(images[i]->values(), images[j]->values(), r.height, r.width, r.channels);
      const auto heat = diff_heatmap(images[i]->values(), images[j]->values(), r.height, r.width, r.channels);
      double mean = 0;
      for (float h : heat.values()) mean += h;
      mean /= static_cast<double>(heat.size());
      s.ssim[i][j] = s.ssim[j][i] = v;
      s.mean_diff[i][j] = s.mean_diff[j][i] = mean;
      if (i == 0 && j > 0) s.anchor_heatmaps.push_back(heat);
    }
  }
  return s;
}

std::string matrix_to_csv(const std::vector<std::string>& labels, const std::vector<std::vector<double>>& m) {
  std::string out = "";
  for (const auto& l : labels) out += "," + l;
  out += "\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += labels.at(i);
    for (double v : m[i]) out += fmt::format(",{}", v);
    out += "\n";
  }
  return out;
}

std::string bias_table_to_csv(const BiasTable& t) {
  std::string out = "combination";
  for (const auto& c : t.class_names) out += ",count_" + c;
  out += "\n";
  for (const auto& row : t.rows) {
    std::string name;
    for (std::size_t k = 0; k < row.combination.size(); ++k) {
      if (k) name += "+";
      name += t.attribute_names.at(row.combination[k]);
    }
    out += name.empty() ? "(all)" : name;
    for (std::size_t c : row.counts) out += "," + std::to_string(c);
    out += "\n";
  }
  return out;
}

}  // namespace paretofact::analysis
