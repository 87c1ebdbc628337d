#pragma once

// Wire format of the 252-byte broadcast packet, TDMA slot ownership, and the
// every-n-th selection of not-yet-communicated samples.
//
// Layout, little-endian:
//   [0]       agent id
//   [1]       plan epoch
//   [2..13]   float32 heading (rad), north (m), east (m) of the path start
//   [14..]    one byte per action index (0..10)
//   terminal  0xFF no heuristic tail, 0xFE lawnmower tail follows virtually
//   then      12-byte groups of float32 north, east, depth

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "isobath/gp.hpp"

namespace isobath::comms {

inline constexpr std::size_t kPacketBytes = 252;
inline constexpr std::size_t kHeaderBytes = 14;
inline constexpr std::size_t kMeasurementBytes = 12;
inline constexpr std::uint8_t kTerminalNone = 0xFF;
inline constexpr std::uint8_t kTerminalLawnmower = 0xFE;

struct Measurement {
  float north = 0.0f;
  float east = 0.0f;
  float depth = 0.0f;

  friend bool operator==(const Measurement&, const Measurement&) = default;
};

struct Packet {
  std::uint8_t agent_id = 0;
  std::uint8_t plan_epoch = 0;
  float heading = 0.0f;
  float north = 0.0f;
  float east = 0.0f;
  std::vector<std::uint8_t> actions;
  bool lawnmower_tail = false;
  std::vector<Measurement> measurements;

  friend bool operator==(const Packet&, const Packet&) = default;
};

/// Measurements that still fit after the header, `n_actions` and the terminal byte.
std::size_t measurement_capacity(std::size_t n_actions);

/// Throws EncodeError naming the section that does not fit or is invalid.
std::vector<std::uint8_t> encode_packet(const Packet& p);

/// Throws DecodeError with the offending byte offset.
Packet decode_packet(std::span<const std::uint8_t> bytes);

/// Own samples in collection order, with the not-yet-communicated ones queued.
class CommLog {
 public:
  void record(const gp::Sample& s);
  std::size_t pending() const { return queue_.size(); }
  std::size_t total() const { return samples_.size(); }
  bool communicated(std::size_t index) const { return sent_[index] != 0; }
  const gp::Sample& sample(std::size_t index) const { return samples_[index]; }

  /// n = ceil(queue / capacity); takes queue positions 0, n, 2n, ... (at most
  /// `capacity`), marks them communicated and drops them from the queue.
  /// Returns their indices into the log.
  std::vector<std::size_t> select(std::size_t capacity);

 private:
  std::vector<gp::Sample> samples_;
  std::vector<std::uint8_t> sent_;
  std::deque<std::size_t> queue_;
};

std::vector<gp::Sample> select_measurements(CommLog& log, std::size_t capacity);

struct TdmaSchedule {
  double slot_duration = 10.0;
  std::size_t team_size = 1;
  double epoch_start = 0.0;

  void validate() const;
};

/// floor((t - epoch_start) / slot) mod team_size; -1 before the epoch.
int tdma_active_agent(const TdmaSchedule& s, double time);

}  // namespace isobath::comms
