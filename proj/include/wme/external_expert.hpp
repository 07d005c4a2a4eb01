#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "wme/experts.hpp"

namespace wme {

/// `cmd:<shell command>` (stdio transport) or `tcp:<host>:<port>`.
struct ExternalDescriptor {
  enum class Transport { kStdio, kTcp };
  Transport transport = Transport::kStdio;
  std::string command;
  std::string host;
  int port = 0;

  static ExternalDescriptor parse(std::string_view text);
  std::string to_string() const;
};

struct ExternalOptions {
  /// Per-round reply deadline.
  std::chrono::milliseconds deadline{500};
  std::chrono::milliseconds handshake_timeout{5000};
};

/// Expert living in another process. A round's feature messages are sent
/// together; replies arriving after the deadline, or not matching an
/// outstanding (round, ticker), are dropped and the cell abstains. A broken
/// transport makes the expert abstain for the rest of the run.
class ExternalExpert : public Expert {
 public:
  ~ExternalExpert() override;

  /// Connects (or spawns) and performs the hello/ready handshake.
  static std::unique_ptr<ExternalExpert> connect(const ExternalDescriptor& descriptor, const ExternalOptions& options);

  const std::string& name() const override { return name_; }
  ExpertKind kind() const override { return ExpertKind::kExternal; }
  std::vector<Prediction> predict_round(const RoundQuery& query) override;

  bool failed() const { return failed_; }
  std::size_t abstentions() const { return abstentions_; }
  std::size_t protocol_violations() const { return violations_; }
  const std::vector<std::string>& events() const { return events_; }

  /// Sends bye and releases the transport; idempotent.
  void shutdown();

 private:
  class Channel;
  ExternalExpert(std::unique_ptr<Channel> channel, ExternalOptions options);
  void log(std::string message);
  void fail(const std::string& why);

  std::unique_ptr<Channel> channel_;
  ExternalOptions options_;
  std::string name_;
  bool failed_ = false;
  std::size_t abstentions_ = 0;
  std::size_t violations_ = 0;
  std::vector<std::string> events_;
};

std::unique_ptr<ExternalExpert> host_external(std::string_view descriptor, const ExternalOptions& options = {});

}  // namespace wme
