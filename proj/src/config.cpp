#include "sclub/bench.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sclub {

using nlohmann::json;

namespace {

PolicyConfig parse_policy(const json& j) {
  PolicyConfig p;
  p.variant = parse_variant(j.at("variant").get<std::string>());
  p.name = j.value("name", std::string(to_string(p.variant)));
  p.alpha = j.value("alpha", p.alpha);
  p.n = j.value("n", p.n);
  p.graph_period = j.value("graph_period", p.graph_period);
  p.club_alpha2 = j.value("club_alpha2", p.club_alpha2);
  if (j.contains("sigma")) {
    const auto& s = j.at("sigma");
    if (s.is_string()) {
      if (s.get<std::string>() != "median") throw std::invalid_argument("policy sigma must be \"median\" or a number");
    } else {
      p.fixed_sigma = s.get<double>();
    }
  }
  return p;
}

json policy_to_json(const PolicyConfig& p) {
  json j = {{"name", p.name},       {"variant", std::string(to_string(p.variant))},
            {"alpha", p.alpha},     {"n", p.n},
            {"graph_period", p.graph_period}, {"club_alpha2", p.club_alpha2}};
  if (p.fixed_sigma) {
    j["sigma"] = *p.fixed_sigma;
  } else {
    j["sigma"] = "median";
  }
  return j;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("config: at least one seed required");
  if (policies.empty()) throw std::invalid_argument("config: at least one policy required");
  std::set<std::string> names;
  for (const auto& p : policies) {
    if (p.name.empty() || p.name.find_first_of(",\n\"") != std::string::npos) {
      throw std::invalid_argument("config: policy name '" + p.name + "' must be nonempty without commas or quotes");
    }
    if (!names.insert(p.name).second) throw std::invalid_argument("config: duplicate policy name '" + p.name + "'");
  }
  if (world.kind == WorldSpec::Kind::logged && world.archive.empty()) {
    throw std::invalid_argument("config: logged world requires an archive path");
  }
}

ExperimentConfig parse_config(std::string_view text) {
  const json j = json::parse(text);
  ExperimentConfig c;
  c.name = j.value("name", c.name);

  const json& w = j.at("world");
  const auto type = w.value("type", std::string("synthetic"));
  auto& s = c.world.synthetic;
  if (type == "synthetic") {
    c.world.kind = WorldSpec::Kind::synthetic;
    s.users = w.value("users", s.users);
    s.clusters = w.value("clusters", s.clusters);
    s.items = w.value("items", s.items);
    s.dim = w.value("dim", s.dim);
    s.sigma_c = w.value("sigma_c", s.sigma_c);
    s.sigma_eps = w.value("sigma_eps", s.sigma_eps);
    if (w.contains("perturbation")) s.perturbation = parse_perturbation(w.at("perturbation").get<std::string>());
  } else if (type == "logged") {
    c.world.kind = WorldSpec::Kind::logged;
    c.world.archive = w.at("archive").get<std::string>();
  } else {
    throw std::invalid_argument("config: unknown world type '" + type + "'");
  }
  s.pool = w.value("pool", s.pool);

  c.horizon = j.value("horizon", c.horizon);
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  c.output_dir = j.value("output_dir", c.output_dir.string());
  c.threads = j.value("threads", c.threads);
  if (j.contains("record")) {
    const json& r = j.at("record");
    c.record.clusters = r.value("clusters", c.record.clusters);
    c.record.nmi = r.value("nmi", c.record.nmi);
    c.record.modularity = r.value("modularity", c.record.modularity);
  }
  for (const auto& p : j.at("policies")) c.policies.push_back(parse_policy(p));
  if (j.contains("sweep")) {
    const json& sw = j.at("sweep");
    c.sweep.policy = sw.value("policy", std::string());
    c.sweep.n_values = sw.value("n_values", std::vector<int>{});
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json world;
  const auto& s = c.world.synthetic;
  if (c.world.kind == WorldSpec::Kind::synthetic) {
    world = {{"type", "synthetic"}, {"users", s.users},     {"clusters", s.clusters},   {"items", s.items},
             {"dim", s.dim},        {"pool", s.pool},       {"sigma_c", s.sigma_c},     {"sigma_eps", s.sigma_eps},
             {"perturbation", std::string(to_string(s.perturbation))}};
  } else {
    world = {{"type", "logged"}, {"archive", c.world.archive.string()}, {"pool", s.pool}};
  }
  json policies = json::array();
  for (const auto& p : c.policies) policies.push_back(policy_to_json(p));
  json j = {{"name", c.name},
            {"world", world},
            {"horizon", c.horizon},
            {"seeds", c.seeds},
            {"output_dir", c.output_dir.string()},
            {"threads", c.threads},
            {"record", {{"clusters", c.record.clusters}, {"nmi", c.record.nmi}, {"modularity", c.record.modularity}}},
            {"policies", policies}};
  if (!c.sweep.n_values.empty()) j["sweep"] = {{"policy", c.sweep.policy}, {"n_values", c.sweep.n_values}};
  return j.dump(2);
}

}  // namespace sclub
