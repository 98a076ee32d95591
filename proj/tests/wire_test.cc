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


#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include "adsaga/net/wire.h"
#include "gtest/gtest.h"

namespace adsaga::net {
namespace {

using Bytes = std::vector<std::uint8_t>;

void PutU32(Bytes& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void PutF64(Bytes& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<std::uint8_t>(bits >> (8 * k)));
}

// Hand-built frame, independent of Encode.
Bytes Frame(std::uint8_t kind, std::uint32_t sender, const std::vector<double>& payload) {
  Bytes out;
  PutU32(out, static_cast<std::uint32_t>(5 + 8 * payload.size()));
  out.push_back(kind);
  PutU32(out, sender);
  for (double v : payload) PutF64(out, v);
  return out;
}

TEST(WireTest, StopFrameIsNineBytes) {
  const Bytes frame = Encode({MessageKind::kStop, 3, {}});
  EXPECT_EQ(frame, (Bytes{5, 0, 0, 0, 3, 3, 0, 0, 0}));
  const WireMessage m = Decode(frame);
  EXPECT_EQ(m.kind, MessageKind::kStop);
  EXPECT_EQ(m.sender, 3u);
  EXPECT_TRUE(m.payload.empty());
}

TEST(WireTest, UpdateFrameLayout) {
  const WireMessage m{MessageKind::kUpdate, 2, {1.0, -1.0}};
  const Bytes frame = Encode(m);
  ASSERT_EQ(frame.size(), 25u);
  EXPECT_EQ(frame, Frame(1, 2, {1.0, -1.0}));
  // 1.0 = 0x3ff0000000000000, little-endian.
  EXPECT_EQ(frame[15], 0xf0);
  EXPECT_EQ(frame[16], 0x3f);
  EXPECT_EQ(frame[24], 0xbf);
  EXPECT_EQ(Decode(frame), m);
}

TEST(WireTest, LengthPrefixAndBodySplit) {
  const Bytes frame = Frame(2, kServerId, {0.5, 0.25, 0.125});
  const std::uint32_t length =
      DecodeLength(std::span<const std::uint8_t, 4>(frame.data(), 4));
  EXPECT_EQ(length, 29u);
  const WireMessage m = DecodeBody(std::span<const std::uint8_t>(frame).subspan(4));
  EXPECT_EQ(m.kind, MessageKind::kParam);
  EXPECT_EQ(m.sender, kServerId);
  EXPECT_EQ(m.payload, (std::vector<double>{0.5, 0.25, 0.125}));
}

TEST(WireTest, RandomMessagesRoundTripBitExactly) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_int_distribution<int> dim(0, 64);
  for (int t = 0; t < 10000; ++t) {
    WireMessage m;
    m.kind = static_cast<MessageKind>(kind(rng));
    m.sender = static_cast<std::uint32_t>(rng());
    if (m.kind == MessageKind::kUpdate || m.kind == MessageKind::kParam) {
      m.payload.resize(static_cast<std::size_t>(dim(rng)));
      // Arbitrary bit patterns, including subnormals, infinities and NaNs.
      for (double& v : m.payload) v = std::bit_cast<double>(rng());
    }
    const Bytes frame = Encode(m);
    const WireMessage back = Decode(frame);
    ASSERT_EQ(back.kind, m.kind);
    ASSERT_EQ(back.sender, m.sender);
    ASSERT_EQ(back.payload.size(), m.payload.size());
    ASSERT_EQ(std::memcmp(back.payload.data(), m.payload.data(), 8 * m.payload.size()), 0);
    ASSERT_EQ(Encode(back), frame);
  }
}

TEST(WireTest, SpecialValuesSurvive) {
  const WireMessage m{MessageKind::kParam,
                      0,
                      {0.0, -0.0, std::numeric_limits<double>::infinity(),
                       std::numeric_limits<double>::denorm_min(),
                       std::numeric_limits<double>::max()}};
  const WireMessage back = Decode(Encode(m));
  EXPECT_TRUE(std::signbit(back.payload[1]));
  EXPECT_EQ(back.payload[3], std::numeric_limits<double>::denorm_min());
}

TEST(WireTest, EncodeRejectsPayloadOnControlMessages) {
  EXPECT_THROW(Encode({MessageKind::kHello, 0, {1.0}}), WireError);
  EXPECT_THROW(Encode({MessageKind::kStop, 0, {1.0}}), WireError);
}

TEST(WireTest, DecodeRejectsMalformedFrames) {
  std::vector<Bytes> bad;
  bad.push_back({});                           // nothing
  bad.push_back({5, 0, 0});                    // short length field
  bad.push_back({4, 0, 0, 0, 3, 0, 0, 0});     // length below header size
  bad.push_back({5, 0, 0, 0, 3, 0, 0});        // truncated header
  Bytes unknown = Frame(4, 0, {});
  bad.push_back(unknown);                      // unknown kind
  Bytes truncated = Frame(1, 0, {1.0, 2.0});
  truncated.pop_back();
  bad.push_back(truncated);                    // truncated payload
  Bytes trailing = Frame(1, 0, {1.0});
  trailing.push_back(0);
  bad.push_back(trailing);                     // bytes after the frame
  Bytes ragged = Frame(1, 0, {});
  ragged[0] = 8;
  ragged.insert(ragged.end(), {1, 2, 3});
  bad.push_back(ragged);                       // payload not a multiple of 8
  bad.push_back(Frame(0, 0, {1.0}));           // HELLO with payload
  bad.push_back(Frame(3, 0, {1.0}));           // STOP with payload
  Bytes huge = Frame(1, 0, {});
  huge[3] = 0x7f;
  bad.push_back(huge);                         // absurd length
  for (std::size_t k = 0; k < bad.size(); ++k) {
    EXPECT_THROW(Decode(bad[k]), WireError) << "case " << k;
  }
}

TEST(WireTest, KindNames) {
  EXPECT_EQ(KindName(MessageKind::kHello), "HELLO");
  EXPECT_EQ(KindName(MessageKind::kUpdate), "UPDATE");
  EXPECT_EQ(KindName(MessageKind::kParam), "PARAM");
  EXPECT_EQ(KindName(MessageKind::kStop), "STOP");
}

}  // namespace
}  // namespace adsaga::net
