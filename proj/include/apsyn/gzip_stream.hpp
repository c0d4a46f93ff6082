// Streaming gzip decompression on top of an arbitrary std::istream.

#pragma once

#include <zlib.h>

#include <array>
#include <istream>
#include <streambuf>

#include "apsyn/error.hpp"

namespace apsyn {

// True when the next two bytes of `in` are the gzip magic (1f 8b).
// Does not consume anything.
inline bool has_gzip_magic(std::istream& in) {
  auto* buf = in.rdbuf();
  if (buf == nullptr) return false;
  try {
    const auto first = buf->sgetc();
    if (first != 0x1f) return false;
    buf->sbumpc();
    const auto second = buf->sgetc();
    buf->sungetc();
    return second == 0x8b;
  } catch (...) {
    // Let the first real read surface the failure.
    return false;
  }
}

class GzipStreambuf : public std::streambuf {
 public:
  explicit GzipStreambuf(std::istream& source) : source_(source) {
    stream_.zalloc = Z_NULL;
    stream_.zfree = Z_NULL;
    stream_.opaque = Z_NULL;
    stream_.avail_in = 0;
    stream_.next_in = Z_NULL;
    // 16 + MAX_WBITS: gzip wrapper only.
    if (inflateInit2(&stream_, 16 + MAX_WBITS) != Z_OK) {
      throw ReadError("cannot initialise gzip decoder", 0);
    }
    setg(out_.data(), out_.data(), out_.data());
  }

  GzipStreambuf(const GzipStreambuf&) = delete;
  GzipStreambuf& operator=(const GzipStreambuf&) = delete;

  ~GzipStreambuf() override { inflateEnd(&stream_); }

 protected:
  int_type underflow() override {
    if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
    while (!finished_) {
      if (stream_.avail_in == 0) {
        source_.read(in_.data(), static_cast<std::streamsize>(in_.size()));
        const auto got = source_.gcount();
        if (source_.bad()) throw ReadError("gzip source read failed", consumed_);
        if (got == 0) {
          throw ReadError("truncated gzip stream", consumed_);
        }
        consumed_ += static_cast<std::uint64_t>(got);
        stream_.next_in = reinterpret_cast<Bytef*>(in_.data());
        stream_.avail_in = static_cast<uInt>(got);
      }
      stream_.next_out = reinterpret_cast<Bytef*>(out_.data());
      stream_.avail_out = static_cast<uInt>(out_.size());
      const int rc = inflate(&stream_, Z_NO_FLUSH);
      if (rc == Z_STREAM_END) {
        // Concatenated members are legal gzip; restart if more input follows.
        if (stream_.avail_in > 0 || source_.peek() != std::istream::traits_type::eof()) {
          inflateReset(&stream_);
        } else {
          finished_ = true;
        }
      } else if (rc != Z_OK && rc != Z_BUF_ERROR) {
        throw ReadError("corrupt gzip stream", consumed_);
      }
      const auto produced = out_.size() - stream_.avail_out;
      if (produced > 0) {
        setg(out_.data(), out_.data(), out_.data() + produced);
        return traits_type::to_int_type(*gptr());
      }
    }
    return traits_type::eof();
  }

 private:
  std::istream& source_;
  z_stream stream_{};
  std::array<char, 1 << 16> in_{};
  std::array<char, 1 << 16> out_{};
  std::uint64_t consumed_ = 0;
  bool finished_ = false;
};

}  // namespace apsyn
