#include "isobath/comms.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "isobath/errors.hpp"
#include "isobath/motion.hpp"

namespace isobath::comms {

namespace {

void put_f32(std::vector<std::uint8_t>& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

float get_f32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

}  // namespace

std::size_t measurement_capacity(std::size_t n_actions) {
  const std::size_t used = kHeaderBytes + n_actions + 1;
  return used >= kPacketBytes ? 0 : (kPacketBytes - used) / kMeasurementBytes;
}

std::vector<std::uint8_t> encode_packet(const Packet& p) {
  if (!std::isfinite(p.heading) || !std::isfinite(p.north) || !std::isfinite(p.east))
    throw EncodeError("header", "initial state must be finite");
  if (kHeaderBytes + p.actions.size() + 1 > kPacketBytes)
    throw EncodeError("actions", std::to_string(p.actions.size()) + " actions do not fit");
  for (auto a : p.actions)
    if (a >= motion::kActionCount) throw EncodeError("actions", "index " + std::to_string(a) + " out of range");
  if (p.measurements.size() > measurement_capacity(p.actions.size()))
    throw EncodeError("measurements", std::to_string(p.measurements.size()) + " measurements exceed capacity " +
                                          std::to_string(measurement_capacity(p.actions.size())));

  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + p.actions.size() + 1 + kMeasurementBytes * p.measurements.size());
  out.push_back(p.agent_id);
  out.push_back(p.plan_epoch);
  put_f32(out, p.heading);
  put_f32(out, p.north);
  put_f32(out, p.east);
  out.insert(out.end(), p.actions.begin(), p.actions.end());
  out.push_back(p.lawnmower_tail ? kTerminalLawnmower : kTerminalNone);
  for (const auto& m : p.measurements) {
    put_f32(out, m.north);
    put_f32(out, m.east);
    put_f32(out, m.depth);
  }
  return out;
}

Packet decode_packet(std::span<const std::uint8_t> bytes) {
  if (bytes.size() > kPacketBytes) throw DecodeError(kPacketBytes, "packet longer than 252 bytes");
  if (bytes.size() < kHeaderBytes) throw DecodeError(bytes.size(), "truncated header");
  Packet p;
  p.agent_id = bytes[0];
  p.plan_epoch = bytes[1];
  p.heading = get_f32(bytes, 2);
  p.north = get_f32(bytes, 6);
  p.east = get_f32(bytes, 10);
  if (!std::isfinite(p.heading) || !std::isfinite(p.north) || !std::isfinite(p.east))
    throw DecodeError(2, "non-finite initial state");

  std::size_t at = kHeaderBytes;
  for (;; ++at) {
    if (at >= bytes.size()) throw DecodeError(at, "missing terminal byte");
    const std::uint8_t b = bytes[at];
    if (b == kTerminalNone || b == kTerminalLawnmower) {
      p.lawnmower_tail = b == kTerminalLawnmower;
      ++at;
      break;
    }
    if (b >= motion::kActionCount) throw DecodeError(at, "invalid action index " + std::to_string(b));
    p.actions.push_back(b);
  }

  const std::size_t rest = bytes.size() - at;
  if (rest % kMeasurementBytes != 0)
    throw DecodeError(at + rest - rest % kMeasurementBytes, "truncated measurement group");
  for (; at < bytes.size(); at += kMeasurementBytes) {
    Measurement m{get_f32(bytes, at), get_f32(bytes, at + 4), get_f32(bytes, at + 8)};
    if (!std::isfinite(m.north) || !std::isfinite(m.east) || !std::isfinite(m.depth))
      throw DecodeError(at, "non-finite measurement");
    p.measurements.push_back(m);
  }
  return p;
}

// ---------------------------------------------------------------------------

void CommLog::record(const gp::Sample& s) {
  queue_.push_back(samples_.size());
  samples_.push_back(s);
  sent_.push_back(0);
}

std::vector<std::size_t> CommLog::select(std::size_t capacity) {
  std::vector<std::size_t> picked;
  if (capacity == 0 || queue_.empty()) return picked;
  const std::size_t n = (queue_.size() + capacity - 1) / capacity;
  std::deque<std::size_t> keep;
  for (std::size_t i = 0; i < queue_.size(); ++i) {
    if (i % n == 0 && picked.size() < capacity) {
      picked.push_back(queue_[i]);
      sent_[queue_[i]] = 1;
    } else {
      keep.push_back(queue_[i]);
    }
  }
  queue_.swap(keep);
  return picked;
}

std::vector<gp::Sample> select_measurements(CommLog& log, std::size_t capacity) {
  std::vector<gp::Sample> out;
  for (auto i : log.select(capacity)) out.push_back(log.sample(i));
  return out;
}

void TdmaSchedule::validate() const {
  if (!(slot_duration > 0.0) || !std::isfinite(slot_duration)) throw ConfigError("tdma slot must be > 0");
  if (team_size == 0) throw ConfigError("tdma team size must be >= 1");
}

int tdma_active_agent(const TdmaSchedule& s, double time) {
  if (time < s.epoch_start) return -1;
  const auto slot = static_cast<long long>(std::floor((time - s.epoch_start) / s.slot_duration));
  return static_cast<int>(slot % static_cast<long long>(s.team_size));
}

}  // namespace isobath::comms
