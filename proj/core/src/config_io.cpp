#include "pqsched/config_io.hpp"

#include <cmath>
#include <fstream>

namespace pqsched {

using nlohmann::json;

namespace {

template <class T>
T get_field(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

json to_json(const Distribution& dist) {
  json j{{"family", to_string(dist.family)}};
  if (dist.family == Distribution::Family::Lognormal) j["cv"] = dist.cv;
  return j;
}

Distribution distribution_from_json(const json& j) {
  if (j.is_string()) return distribution_from_json(json{{"family", j}});
  const auto family = get_field<std::string>(j, "family");
  if (family == "exponential") return Distribution::exponential();
  if (family == "deterministic") return Distribution::deterministic();
  if (family == "lognormal") {
    const double cv = get_field<double>(j, "cv");
    if (!(cv >= 0.0) || !std::isfinite(cv)) throw Error(ErrorCode::ParseError, "lognormal cv must be finite and >= 0");
    return Distribution::lognormal(cv);
  }
  throw Error(ErrorCode::ParseError, "unknown distribution family '" + family + "'");
}

json to_json(const ConfusionMatrix& q) {
  json rows = json::array();
  for (std::size_t k = 0; k < q.size(); ++k) {
    auto r = q.row(k);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

ConfusionMatrix confusion_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "confusion must be an array");
  if (!j.empty() && j.front().is_array()) {
    return ConfusionMatrix::from_rows(j.get<std::vector<std::vector<double>>>());
  }
  auto flat = j.get<std::vector<double>>();
  const auto k = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(flat.size()))));
  if (k * k != flat.size()) throw Error(ErrorCode::ParseError, "flat confusion array is not square");
  return ConfusionMatrix(k, std::move(flat));
}

json to_json(const SystemConfig& config) {
  json costs = json::array();
  for (const auto& c : config.costs) costs.push_back({{"coeff", c.coeff}, {"power", c.power}});
  return json{{"lambda", config.lambda},
              {"prevalences", config.prevalences},
              {"service_rates", config.service_rates},
              {"costs", costs},
              {"confusion", to_json(config.confusion)},
              {"horizon", config.horizon},
              {"arrival_dist", to_json(config.arrival_dist)},
              {"service_dist", to_json(config.service_dist)}};
}

SystemConfig config_from_json(const json& j) {
  SystemConfig c;
  c.lambda = get_field<double>(j, "lambda");
  c.prevalences = get_field<std::vector<double>>(j, "prevalences");
  c.service_rates = get_field<std::vector<double>>(j, "service_rates");
  if (!j.contains("costs") || !j.at("costs").is_array()) throw Error(ErrorCode::ParseError, "missing array 'costs'");
  for (const auto& cj : j.at("costs")) {
    CostFn cost;
    cost.coeff = get_field<double>(cj, "coeff");
    cost.power = cj.contains("power") ? get_field<double>(cj, "power") : 2.0;
    c.costs.push_back(cost);
  }
  if (!j.contains("confusion")) throw Error(ErrorCode::ParseError, "missing field 'confusion'");
  c.confusion = confusion_from_json(j.at("confusion"));
  c.horizon = j.contains("horizon") ? get_field<double>(j, "horizon") : 1.0;
  if (j.contains("arrival_dist")) c.arrival_dist = distribution_from_json(j.at("arrival_dist"));
  if (j.contains("service_dist")) c.service_dist = distribution_from_json(j.at("service_dist"));
  return c;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

SystemConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path));
}

void save_config(const std::filesystem::path& path, const SystemConfig& config) {
  write_json_file(path, to_json(config));
}

}  // namespace pqsched
