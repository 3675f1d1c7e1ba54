#include <cstdint>

#include "doctest.h"
#include "unilab/codec.hpp"

using namespace unilab;

TEST_CASE("encoder roundtrips every field kind") {
  Encoder enc;
  enc.put_u8(0x7f).put_u32(0xdeadbeef).put_u64(0x0102030405060708ull);
  enc.put_bytes(to_payload("payload"));
  enc.put_bytes(Payload{});  // empty field survives too

  Decoder dec(enc.bytes());
  CHECK(dec.take_u8() == 0x7f);
  CHECK(dec.take_u32() == 0xdeadbeef);
  CHECK(dec.take_u64() == 0x0102030405060708ull);
  CHECK(dec.take_bytes() == to_payload("payload"));
  CHECK(dec.take_bytes() == Payload{});
  CHECK(dec.done());
}

TEST_CASE("every field carries a 4 byte length prefix") {
  Encoder enc;
  enc.put_u8(5);
  CHECK(enc.bytes().size() == 5);  // 4 length + 1 body
  CHECK(enc.bytes()[3] == 1);

  Encoder enc2;
  enc2.put_bytes(to_payload("abc"));
  CHECK(enc2.bytes().size() == 7);
  CHECK(enc2.bytes()[3] == 3);
}

TEST_CASE("identical values encode to identical bytes") {
  auto make = [] {
    Encoder e;
    e.put_u32(7).put_bytes(to_payload("x")).put_u64(9);
    return e.take();
  };
  CHECK(make() == make());
}

TEST_CASE("field order is part of the encoding") {
  Encoder ab;
  ab.put_u8(1).put_u8(2);
  Encoder ba;
  ba.put_u8(2).put_u8(1);
  CHECK(ab.bytes() != ba.bytes());
}

TEST_CASE("decoder rejects truncated input") {
  Encoder enc;
  enc.put_u64(42);
  Payload bytes = enc.take();

  // Chop the body short: the length prefix promises 8 bytes.
  Payload cut(bytes.begin(), bytes.end() - 1);
  Decoder dec(cut);
  CHECK(!dec.take_u64().has_value());

  // Chop into the prefix itself.
  Payload stub(bytes.begin(), bytes.begin() + 3);
  Decoder dec2(stub);
  CHECK(!dec2.take_u64().has_value());
}

TEST_CASE("decoder rejects a field of the wrong width") {
  Encoder enc;
  enc.put_u32(1);
  Decoder dec(enc.bytes());
  CHECK(!dec.take_u64().has_value());
}

TEST_CASE("done is false while input remains") {
  Encoder enc;
  enc.put_u8(1).put_u8(2);
  Decoder dec(enc.bytes());
  CHECK(!dec.done());
  (void)dec.take_u8();
  CHECK(!dec.done());
  (void)dec.take_u8();
  CHECK(dec.done());
}

TEST_CASE("variable bytes cannot be confused with adjacent fields") {
  // enc(["ab", "c"]) vs enc(["a", "bc"]): framing keeps them apart.
  Encoder left;
  left.put_bytes(to_payload("ab")).put_bytes(to_payload("c"));
  Encoder right;
  right.put_bytes(to_payload("a")).put_bytes(to_payload("bc"));
  CHECK(left.bytes() != right.bytes());
}

TEST_CASE("hex helpers roundtrip") {
  Payload p{0x00, 0x0f, 0xa5, 0xff};
  CHECK(to_hex(p) == "000fa5ff");
  CHECK(from_hex("000fa5ff") == p);
  CHECK(from_hex("") == Payload{});
  CHECK(!from_hex("0").has_value());    // odd length
  CHECK(!from_hex("zz").has_value());   // not hex
}
