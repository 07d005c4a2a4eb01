#include "wme/protocol.hpp"

#include "json.hpp"
#include "wme/targets.hpp"

namespace wme::protocol {

using nlohmann::json;

std::string hello() {
  json schema = json::array();
  for (auto name : feature_names()) schema.push_back(std::string(name));
  return json{{"type", "hello"}, {"schema", schema}, {"classes", kClassCount}}.dump();
}

std::string features(int round, std::string_view ticker, const FeatureVector& z) {
  json values = json::array();
  json valid = json::array();
  for (int i = 0; i < kFeatureCount; ++i) {
    values.push_back(z.values(i));
    valid.push_back(z.valid.test(i));
  }
  return json{{"type", "features"}, {"round", round}, {"ticker", std::string(ticker)}, {"values", values}, {"valid", valid}}
      .dump();
}

std::string bye() { return json{{"type", "bye"}}.dump(); }

Reply parse_reply(std::string_view line) {
  const json msg = json::parse(line.begin(), line.end(), nullptr, false);
  if (msg.is_discarded()) return Malformed{"not JSON"};
  if (!msg.is_object()) return Malformed{"not a JSON object"};
  const auto type = msg.find("type");
  if (type == msg.end() || !type->is_string()) return Malformed{"missing type"};
  if (*type == "ready") {
    const auto name = msg.find("name");
    if (name == msg.end() || !name->is_string() || name->get<std::string>().empty())
      return Malformed{"ready without a name"};
    return Ready{name->get<std::string>()};
  }
  if (*type == "prediction") {
    const auto round = msg.find("round");
    const auto ticker = msg.find("ticker");
    const auto klass = msg.find("class");
    if (round == msg.end() || !round->is_number_integer()) return Malformed{"prediction without integer round"};
    if (ticker == msg.end() || !ticker->is_string()) return Malformed{"prediction without ticker"};
    if (klass == msg.end() || !klass->is_number_integer()) return Malformed{"prediction without integer class"};
    return PredictionReply{round->get<int>(), ticker->get<std::string>(), klass->get<std::int64_t>()};
  }
  return Unknown{};
}

}  // namespace wme::protocol
