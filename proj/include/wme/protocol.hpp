#pragma once

// Newline-delimited JSON messages exchanged with external experts.
//
//   engine -> expert  {"type":"hello","schema":[...],"classes":5}
//   expert -> engine  {"type":"ready","name":"..."}
//   engine -> expert  {"type":"features","round":R,"ticker":"T","values":[...],"valid":[...]}
//   expert -> engine  {"type":"prediction","round":R,"ticker":"T","class":K}
//   engine -> expert  {"type":"bye"}

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "wme/features.hpp"

namespace wme::protocol {

std::string hello();
std::string features(int round, std::string_view ticker, const FeatureVector& z);
std::string bye();

struct Ready {
  std::string name;
};

/// Class is kept raw so range violations can be reported.
struct PredictionReply {
  int round = 0;
  std::string ticker;
  std::int64_t klass = 0;
};

struct Unknown {};

struct Malformed {
  std::string reason;
};

using Reply = std::variant<Ready, PredictionReply, Unknown, Malformed>;

/// Classifies one line from an expert. Messages of an unrecognized type are
/// `Unknown` and must be ignored.
Reply parse_reply(std::string_view line);

}  // namespace wme::protocol
