#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace vbqc {

enum class MsgType { round_begin, herald, delta, outcome, m_err, round_end, result, abort };

enum class Detector { s, p };

// One public classical message.  Only the fields relevant to the type are
// set; everything the server can observe goes through this struct.
struct WireMessage {
  MsgType type = MsgType::round_begin;
  std::int64_t round = 0;
  std::optional<Detector> detector;
  std::optional<std::int64_t> attempts;
  std::optional<std::int64_t> timestamp_ns;
  std::optional<int> octant;
  std::optional<int> bit;

  bool operator==(const WireMessage&) const = default;
};

constexpr int kWireSchemaVersion = 1;

const char* to_string(MsgType t);
MsgType msg_type_from_string(const std::string& s);

// Single-line JSON, no trailing newline.
std::string serialize(const WireMessage& m);
// Throws std::invalid_argument on malformed input, unknown fields or a
// payload that does not fit the type.
WireMessage parse_wire(const std::string& line);

WireMessage make_round_begin(std::int64_t round);
WireMessage make_herald(std::int64_t round, Detector d, std::int64_t attempts, std::int64_t timestamp_ns);
WireMessage make_delta(std::int64_t round, int octant);
WireMessage make_outcome(std::int64_t round, int bit);
WireMessage make_m_err(std::int64_t round, int bit);
WireMessage make_round_end(std::int64_t round);
WireMessage make_result(std::int64_t round);
WireMessage make_abort(std::int64_t round);

}  // namespace vbqc
