/*
 * Copyright 2026 The v2gsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <gtest/gtest.h>

#include <limits>

#include "v2g/bytes.hpp"

namespace v2g {
namespace {

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(to_hex(sha256("")), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(to_hex(sha256("abc")), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Sha256, HexRoundTrip) {
  const Digest d = sha256("v2g");
  EXPECT_EQ(digest_from_hex(to_hex(d)), d);
  EXPECT_THROW(digest_from_hex("abc"), std::invalid_argument);
  EXPECT_THROW(digest_from_hex(std::string(64, 'g')), std::invalid_argument);
}

TEST(ByteCodec, RoundTripsEveryType) {
  ByteWriter w;
  w.u8(0xAB);
  w.u32(0xDEADBEEF);
  w.u64(std::numeric_limits<std::uint64_t>::max());
  w.i64(-42);
  w.f64(-0.1);
  w.f64(std::numeric_limits<double>::denorm_min());
  w.str("EV1");
  w.digest(sha256("x"));
  ByteReader r(w.bytes());
  EXPECT_EQ(r.u8(), 0xAB);
  EXPECT_EQ(r.u32(), 0xDEADBEEFu);
  EXPECT_EQ(r.u64(), std::numeric_limits<std::uint64_t>::max());
  EXPECT_EQ(r.i64(), -42);
  EXPECT_EQ(r.f64(), -0.1);
  EXPECT_EQ(r.f64(), std::numeric_limits<double>::denorm_min());
  EXPECT_EQ(r.str(), "EV1");
  EXPECT_EQ(r.digest(), sha256("x"));
  EXPECT_TRUE(r.done());
}

TEST(ByteCodec, LittleEndianLayout) {
  ByteWriter w;
  w.u32(0x01020304);
  EXPECT_EQ(w.bytes(), std::string("\x04\x03\x02\x01", 4));
}

TEST(ByteCodec, TruncationThrows) {
  ByteWriter w;
  w.str("hello");
  const std::string cut = w.bytes().substr(0, 6);
  ByteReader r(cut);
  EXPECT_THROW(r.str(), std::out_of_range);
}

}  // namespace
}  // namespace v2g
