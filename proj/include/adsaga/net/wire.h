// Copyright 2026 The ADSAGA Workbench Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Frame layout, all little-endian:
//
//   u32 length   bytes that follow (kind + sender + payload)
//   u8  kind     HELLO=0 UPDATE=1 PARAM=2 STOP=3
//   u32 sender   machine id (the server uses kServerId)
//   f64 payload[(length - 5) / 8]
//
// UPDATE and PARAM carry a d-vector; HELLO and STOP carry nothing.

#ifndef ADSAGA_NET_WIRE_H_
#define ADSAGA_NET_WIRE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace adsaga::net {

enum class MessageKind : std::uint8_t { kHello = 0, kUpdate = 1, kParam = 2, kStop = 3 };

inline constexpr std::uint32_t kServerId = 0xffffffffu;
inline constexpr std::size_t kLengthBytes = 4;
inline constexpr std::size_t kHeaderBytes = 5;  // kind + sender
// Upper bound on the length field; rejects garbage before allocating.
inline constexpr std::uint32_t kMaxFrameLength = 1u << 28;

struct WireMessage {
  MessageKind kind = MessageKind::kHello;
  std::uint32_t sender = 0;
  std::vector<double> payload;

  bool operator==(const WireMessage&) const = default;
};

class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string KindName(MessageKind kind);

std::vector<std::uint8_t> Encode(const WireMessage& message);

// Decodes exactly one complete frame. Throws WireError on a short buffer,
// trailing bytes, a bad length field, an unknown kind, or a payload that does
// not fit the kind.
WireMessage Decode(std::span<const std::uint8_t> frame);

// Validates the length field of a frame prefix and returns it.
std::uint32_t DecodeLength(std::span<const std::uint8_t, kLengthBytes> prefix);

// Decodes the body that follows the length field.
WireMessage DecodeBody(std::span<const std::uint8_t> body);

}  // namespace adsaga::net

#endif  // ADSAGA_NET_WIRE_H_
