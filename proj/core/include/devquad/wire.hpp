#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace devquad {

// Frames are a 4-byte little-endian length followed by the payload. JSON
// messages are one frame; a message announcing binary arrays is followed by
// one more frame holding them as little-endian float32.
inline constexpr std::uint32_t kMaxFrameBytes = 256u << 20;

std::string encode_frame(std::string_view payload);

// Incremental decoder for a byte stream. Throws Error{MalformedMessage}
// for frames larger than kMaxFrameBytes.
class FrameDecoder {
 public:
  void feed(std::string_view bytes);
  std::optional<std::string> next();
  std::size_t buffered() const { return buffer_.size(); }

 private:
  std::string buffer_;
  std::size_t offset_ = 0;
};

std::string encode_float32(std::span<const double> values);
// Throws Error{MalformedMessage} if the size is not a multiple of 4.
std::vector<float> decode_float32(std::string_view bytes);

}  // namespace devquad
