#include "devquad/wire.hpp"

#include <bit>

#include "devquad/error.hpp"

namespace devquad {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

}  // namespace

std::string encode_frame(std::string_view payload) {
  if (payload.size() > kMaxFrameBytes) throw Error(ErrorCode::MalformedMessage, "frame too large");
  std::string out;
  out.reserve(payload.size() + 4);
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  out.append(payload);
  return out;
}

void FrameDecoder::feed(std::string_view bytes) {
  if (offset_ > 0 && offset_ >= buffer_.size() / 2) {
    buffer_.erase(0, offset_);
    offset_ = 0;
  }
  buffer_.append(bytes);
}

std::optional<std::string> FrameDecoder::next() {
  if (buffer_.size() - offset_ < 4) return std::nullopt;
  const std::uint32_t n = get_u32(buffer_.data() + offset_);
  if (n > kMaxFrameBytes) throw Error(ErrorCode::MalformedMessage, "frame too large");
  if (buffer_.size() - offset_ - 4 < n) return std::nullopt;
  std::string payload = buffer_.substr(offset_ + 4, n);
  offset_ += 4 + n;
  return payload;
}

std::string encode_float32(std::span<const double> values) {
  std::string out;
  out.reserve(values.size() * 4);
  for (double d : values) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(d)));
  return out;
}

std::vector<float> decode_float32(std::string_view bytes) {
  if (bytes.size() % 4 != 0) throw Error(ErrorCode::MalformedMessage, "float32 payload size");
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::bit_cast<float>(get_u32(bytes.data() + 4 * i));
  return out;
}

}  // namespace devquad
