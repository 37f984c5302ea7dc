#include "adbn/engine/wire.hpp"

#include <bit>

#include "adbn/error.hpp"

namespace adbn::engine {

namespace {

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, std::size_t offset) : bytes_(bytes), pos_(offset) {}

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_++]} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_++]} << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t pos() const noexcept { return pos_; }
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(Errc::ParseError, "truncated communication record");
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
};

}  // namespace

void encode(const Communication& c, std::vector<std::uint8_t>& out) {
  const std::size_t start = out.size();
  put_u32(out, 0);  // patched below
  put_u32(out, c.sender);
  put_u32(out, c.recipient);
  put_f64(out, c.send_time);
  put_u32(out, static_cast<std::uint32_t>(c.messages.size()));
  for (const auto& m : c.messages) {
    put_u8(out, static_cast<std::uint8_t>(m.kind));
    put_u32(out, m.sender.var);
    put_f64(out, m.sender.time);
    put_u32(out, m.recipient.var);
    put_f64(out, m.recipient.time);
    put_u32(out, static_cast<std::uint32_t>(m.values.size()));
    for (double v : m.values) put_f64(out, v);
  }
  const auto len = static_cast<std::uint32_t>(out.size() - start - 4);
  for (int i = 0; i < 4; ++i) out[start + i] = static_cast<std::uint8_t>(len >> (8 * i));
}

std::vector<std::uint8_t> encode(const Communication& c) {
  std::vector<std::uint8_t> out;
  encode(c, out);
  return out;
}

Communication decode(std::span<const std::uint8_t> bytes, std::size_t& offset) {
  Reader r(bytes, offset);
  const std::uint32_t len = r.u32();
  r.need(len);
  const std::size_t end = r.pos() + len;
  Communication c;
  c.sender = r.u32();
  c.recipient = r.u32();
  c.send_time = r.f64();
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    Message m;
    const std::uint8_t kind = r.u8();
    if (kind > 1) throw Error(Errc::ParseError, "unknown message kind");
    m.kind = static_cast<bp::MessageKind>(kind);
    m.sender.var = r.u32();
    m.sender.time = r.f64();
    m.recipient.var = r.u32();
    m.recipient.time = r.f64();
    const std::uint32_t n = r.u32();
    r.need(std::size_t{n} * 8);
    m.values.resize(n);
    for (auto& v : m.values) v = r.f64();
    c.messages.push_back(std::move(m));
  }
  if (r.pos() != end) throw Error(Errc::ParseError, "communication length mismatch");
  offset = end;
  return c;
}

Communication decode(std::span<const std::uint8_t> bytes) {
  std::size_t offset = 0;
  Communication c = decode(bytes, offset);
  if (offset != bytes.size()) throw Error(Errc::ParseError, "trailing bytes after record");
  return c;
}

std::vector<Communication> decode_all(std::span<const std::uint8_t> bytes) {
  std::vector<Communication> out;
  std::size_t offset = 0;
  while (offset < bytes.size()) out.push_back(decode(bytes, offset));
  return out;
}

}  // namespace adbn::engine
