#pragma once

#include <stdexcept>
#include <string>

namespace wme {

/// Root of every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data does not conform to a documented file format.
class ParseError : public Error {
 public:
  ParseError(const std::string& detail, std::size_t line, const std::string& source = {})
      : Error((source.empty() ? "line " : source + ":") + std::to_string(line) + ": " + detail),
        detail_(detail),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::size_t line_;
};

/// A (round, ticker) cell is missing from a day file.
class GapError : public Error {
 public:
  GapError(int round_in_day, std::string ticker)
      : Error("missing candle at round_in_day " + std::to_string(round_in_day) +
              " for ticker \"" + ticker + "\""),
        round_(round_in_day),
        ticker_(std::move(ticker)) {}
  int round_in_day() const noexcept { return round_; }
  const std::string& ticker() const noexcept { return ticker_; }

 private:
  int round_;
  std::string ticker_;
};

class DuplicateError : public Error {
 public:
  using Error::Error;
};

/// Normalizing close is zero or negative.
class DegeneratePriceError : public Error {
 public:
  using Error::Error;
};

/// Calibration produced an unusable artifact (zero-variance feature,
/// collapsed bin edges).
class CalibrationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Inference read a ground truth that is not yet observable.
class CausalityError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace wme
