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

#include "adsaga/net/wire.h"

#include <bit>

namespace adsaga::net {
namespace {

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void PutU64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

std::uint32_t GetU32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(p[k]) << (8 * k);
  return v;
}

std::uint64_t GetU64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(p[k]) << (8 * k);
  return v;
}

bool CarriesVector(MessageKind kind) {
  return kind == MessageKind::kUpdate || kind == MessageKind::kParam;
}

}  // namespace

std::string KindName(MessageKind kind) {
  switch (kind) {
    case MessageKind::kHello:
      return "HELLO";
    case MessageKind::kUpdate:
      return "UPDATE";
    case MessageKind::kParam:
      return "PARAM";
    case MessageKind::kStop:
      return "STOP";
  }
  return "UNKNOWN";
}

std::vector<std::uint8_t> Encode(const WireMessage& message) {
  if (!CarriesVector(message.kind) && !message.payload.empty()) {
    throw WireError("encode: " + KindName(message.kind) + " carries no payload");
  }
  const std::size_t length = kHeaderBytes + 8 * message.payload.size();
  if (length > kMaxFrameLength) throw WireError("encode: payload too large");
  std::vector<std::uint8_t> out;
  out.reserve(kLengthBytes + length);
  PutU32(out, static_cast<std::uint32_t>(length));
  out.push_back(static_cast<std::uint8_t>(message.kind));
  PutU32(out, message.sender);
  for (double v : message.payload) PutU64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

std::uint32_t DecodeLength(std::span<const std::uint8_t, kLengthBytes> prefix) {
  const std::uint32_t length = GetU32(prefix.data());
  if (length < kHeaderBytes) {
    throw WireError("decode: length field " + std::to_string(length) +
                    " is shorter than the 5-byte header");
  }
  if (length > kMaxFrameLength) {
    throw WireError("decode: length field " + std::to_string(length) + " exceeds the limit");
  }
  if ((length - kHeaderBytes) % 8 != 0) {
    throw WireError("decode: payload of " + std::to_string(length - kHeaderBytes) +
                    " bytes is not a whole number of doubles");
  }
  return length;
}

WireMessage DecodeBody(std::span<const std::uint8_t> body) {
  if (body.size() < kHeaderBytes) {
    throw WireError("decode: truncated header (" + std::to_string(body.size()) + " bytes)");
  }
  const std::uint8_t kind = body[0];
  if (kind > static_cast<std::uint8_t>(MessageKind::kStop)) {
    throw WireError("decode: unknown kind byte " + std::to_string(kind));
  }
  WireMessage message;
  message.kind = static_cast<MessageKind>(kind);
  message.sender = GetU32(body.data() + 1);
  const std::size_t payload_bytes = body.size() - kHeaderBytes;
  if (payload_bytes % 8 != 0) {
    throw WireError("decode: payload of " + std::to_string(payload_bytes) +
                    " bytes is not a whole number of doubles");
  }
  if (!CarriesVector(message.kind) && payload_bytes != 0) {
    throw WireError("decode: " + KindName(message.kind) + " with a non-empty payload");
  }
  message.payload.resize(payload_bytes / 8);
  for (std::size_t k = 0; k < message.payload.size(); ++k) {
    message.payload[k] = std::bit_cast<double>(GetU64(body.data() + kHeaderBytes + 8 * k));
  }
  return message;
}

WireMessage Decode(std::span<const std::uint8_t> frame) {
  if (frame.size() < kLengthBytes) {
    throw WireError("decode: truncated length field (" + std::to_string(frame.size()) +
                    " bytes)");
  }
  const std::uint32_t length = DecodeLength(frame.first<kLengthBytes>());
  const std::size_t available = frame.size() - kLengthBytes;
  if (available < length) {
    throw WireError("decode: truncated frame, length field says " + std::to_string(length) +
                    " but " + std::to_string(available) + " bytes follow");
  }
  if (available > length) {
    throw WireError("decode: " + std::to_string(available - length) +
                    " trailing bytes after the frame");
  }
  return DecodeBody(frame.subspan(kLengthBytes));
}

}  // namespace adsaga::net
