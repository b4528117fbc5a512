#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "diffcodec/common.hpp"

namespace diffcodec {

inline std::uint64_t zigzag_encode(std::int64_t v) {
    return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
}

inline std::int64_t zigzag_decode(std::uint64_t u) {
    return static_cast<std::int64_t>(u >> 1) ^ -static_cast<std::int64_t>(u & 1);
}

// Bytes taken by the LEB128 form of u.
std::size_t varint_size(std::uint64_t u);

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t size);

// Little-endian byte sink.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void varint(std::uint64_t v);
    void svarint(std::int64_t v) { varint(zigzag_encode(v)); }
    // u8 length followed by the bytes.
    void short_string(const std::string& s);
    void bytes(const std::uint8_t* data, std::size_t size) { buf_.insert(buf_.end(), data, data + size); }

    const std::vector<std::uint8_t>& buffer() const { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

// Every read past the end, and every overlong varint, throws CorruptStream.
class ByteReader {
public:
    ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}
    explicit ByteReader(const std::vector<std::uint8_t>& v) : ByteReader(v.data(), v.size()) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    std::uint64_t varint();
    std::int64_t svarint() { return zigzag_decode(varint()); }
    std::string short_string();
    const std::uint8_t* take(std::size_t n);

    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return size_ - pos_; }

private:
    void need(std::size_t n) const;

    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

}  // namespace diffcodec
