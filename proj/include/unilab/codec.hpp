#pragma once

#include <cstdint>
#include <optional>

#include "unilab/util.hpp"

namespace unilab {

/// Canonical byte encoding: every field is emitted as a 4-byte big-endian
/// length followed by the field body, in declaration order; integer bodies
/// are fixed-width big-endian. Structurally equal values therefore encode
/// to identical bytes, which is what makes idealized signatures and state
/// hashing well defined.
class Encoder {
 public:
  Encoder& put_u8(std::uint8_t v) { return field(&v, 1); }

  Encoder& put_u32(std::uint32_t v) {
    Byte b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<Byte>(v >> (8 * (3 - i)));
    return field(b, 4);
  }

  Encoder& put_u64(std::uint64_t v) {
    Byte b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<Byte>(v >> (8 * (7 - i)));
    return field(b, 8);
  }

  Encoder& put_bytes(ByteSpan v) { return field(v.data(), v.size()); }

  const Payload& bytes() const { return buf_; }
  Payload take() { return std::move(buf_); }

 private:
  Encoder& field(const Byte* data, std::size_t len) {
    std::uint32_t l = static_cast<std::uint32_t>(len);
    for (int i = 0; i < 4; ++i)
      buf_.push_back(static_cast<Byte>(l >> (8 * (3 - i))));
    buf_.insert(buf_.end(), data, data + len);
    return *this;
  }

  Payload buf_;
};

class Decoder {
 public:
  explicit Decoder(ByteSpan data) : data_(data) {}

  std::optional<std::uint8_t> take_u8() {
    auto f = field(1);
    if (!f) return std::nullopt;
    return (*f)[0];
  }

  std::optional<std::uint32_t> take_u32() {
    auto f = field(4);
    if (!f) return std::nullopt;
    std::uint32_t v = 0;
    for (Byte b : *f) v = (v << 8) | b;
    return v;
  }

  std::optional<std::uint64_t> take_u64() {
    auto f = field(8);
    if (!f) return std::nullopt;
    std::uint64_t v = 0;
    for (Byte b : *f) v = (v << 8) | b;
    return v;
  }

  std::optional<Payload> take_bytes() {
    auto f = field(std::nullopt);
    if (!f) return std::nullopt;
    return Payload(f->begin(), f->end());
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  std::optional<ByteSpan> field(std::optional<std::size_t> expect) {
    if (data_.size() - pos_ < 4) return std::nullopt;
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len = (len << 8) | data_[pos_ + i];
    if (expect && len != *expect) return std::nullopt;
    if (data_.size() - pos_ - 4 < len) return std::nullopt;
    ByteSpan out = data_.subspan(pos_ + 4, len);
    pos_ += 4 + len;
    return out;
  }

  ByteSpan data_;
  std::size_t pos_ = 0;
};

}  // namespace unilab
