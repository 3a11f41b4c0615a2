#include "vbqc/wire.hpp"

#include <json.hpp>
#include <stdexcept>

namespace vbqc {

using nlohmann::json;

namespace {

struct TypeName {
  MsgType type;
  const char* name;
};

constexpr TypeName kTypes[] = {
    {MsgType::round_begin, "round_begin"}, {MsgType::herald, "herald"},       {MsgType::delta, "delta"},
    {MsgType::outcome, "outcome"},         {MsgType::m_err, "m_err"},         {MsgType::round_end, "round_end"},
    {MsgType::result, "result"},           {MsgType::abort, "abort"},
};

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("malformed message: " + what);
}

}  // namespace

const char* to_string(MsgType t) {
  for (const auto& e : kTypes)
    if (e.type == t) return e.name;
  return "?";
}

MsgType msg_type_from_string(const std::string& s) {
  for (const auto& e : kTypes)
    if (s == e.name) return e.type;
  throw std::invalid_argument("unknown message type '" + s + "'");
}

std::string serialize(const WireMessage& m) {
  // nlohmann::ordered_json keeps the field order stable on the wire.
  nlohmann::ordered_json j;
  j["type"] = to_string(m.type);
  j["round"] = m.round;
  if (m.detector) j["detector"] = *m.detector == Detector::s ? "s" : "p";
  if (m.attempts) j["attempts"] = *m.attempts;
  if (m.timestamp_ns) j["timestamp_ns"] = *m.timestamp_ns;
  if (m.octant) j["octant"] = *m.octant;
  if (m.bit) j["bit"] = *m.bit;
  return j.dump();
}

WireMessage parse_wire(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed message: ") + e.what());
  }
  require(j.is_object(), "not an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    require(k == "type" || k == "round" || k == "detector" || k == "attempts" || k == "timestamp_ns" || k == "octant" ||
                k == "bit",
            "unknown field '" + k + "'");
  }
  require(j.contains("type") && j["type"].is_string(), "missing type");
  require(j.contains("round") && j["round"].is_number_integer(), "missing round");
  WireMessage m;
  m.type = msg_type_from_string(j["type"].get<std::string>());
  m.round = j["round"].get<std::int64_t>();
  if (j.contains("detector")) {
    require(j["detector"].is_string(), "detector");
    std::string d = j["detector"];
    require(d == "s" || d == "p", "detector must be s or p");
    m.detector = d == "s" ? Detector::s : Detector::p;
  }
  auto get_int = [&](const char* key) -> std::optional<std::int64_t> {
    if (!j.contains(key)) return std::nullopt;
    require(j[key].is_number_integer(), key);
    return j[key].get<std::int64_t>();
  };
  m.attempts = get_int("attempts");
  m.timestamp_ns = get_int("timestamp_ns");
  if (auto o = get_int("octant")) {
    require(*o >= 0 && *o < 8, "octant out of range");
    m.octant = static_cast<int>(*o);
  }
  if (auto b = get_int("bit")) {
    require(*b == 0 || *b == 1, "bit out of range");
    m.bit = static_cast<int>(*b);
  }

  bool herald_fields = m.detector && m.attempts && m.timestamp_ns;
  bool any_herald = m.detector || m.attempts || m.timestamp_ns;
  switch (m.type) {
    case MsgType::herald:
      require(herald_fields && !m.octant && !m.bit, "herald payload");
      require(*m.attempts >= 1, "attempts must be positive");
      break;
    case MsgType::delta:
      require(m.octant && !any_herald && !m.bit, "delta payload");
      break;
    case MsgType::outcome:
    case MsgType::m_err:
      require(m.bit && !any_herald && !m.octant, "bit payload");
      break;
    default:
      require(!any_herald && !m.octant && !m.bit, "unexpected payload");
  }
  return m;
}

WireMessage make_round_begin(std::int64_t round) { return {MsgType::round_begin, round, {}, {}, {}, {}, {}}; }
WireMessage make_herald(std::int64_t round, Detector d, std::int64_t attempts, std::int64_t timestamp_ns) {
  return {MsgType::herald, round, d, attempts, timestamp_ns, {}, {}};
}
WireMessage make_delta(std::int64_t round, int octant) { return {MsgType::delta, round, {}, {}, {}, octant, {}}; }
WireMessage make_outcome(std::int64_t round, int bit) { return {MsgType::outcome, round, {}, {}, {}, {}, bit}; }
WireMessage make_m_err(std::int64_t round, int bit) { return {MsgType::m_err, round, {}, {}, {}, {}, bit}; }
WireMessage make_round_end(std::int64_t round) { return {MsgType::round_end, round, {}, {}, {}, {}, {}}; }
WireMessage make_result(std::int64_t round) { return {MsgType::result, round, {}, {}, {}, {}, {}}; }
WireMessage make_abort(std::int64_t round) { return {MsgType::abort, round, {}, {}, {}, {}, {}}; }

}  // namespace vbqc
