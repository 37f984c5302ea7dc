#pragma once

// Little-endian wire encoding of communications:
//   u32 length of the rest of the record
//   u32 sender supernode, u32 recipient supernode, f64 send time, u32 count
//   per message: u8 kind, u32 sender var, f64 sender time,
//                u32 recipient var, f64 recipient time, u32 n, n x f64

#include <cstdint>
#include <span>
#include <vector>

#include "adbn/engine/messages.hpp"

namespace adbn::engine {

void encode(const Communication& c, std::vector<std::uint8_t>& out);
std::vector<std::uint8_t> encode(const Communication& c);

// Decodes one record starting at bytes[offset] and advances offset past it.
// Throws ParseError on truncated or malformed input.
Communication decode(std::span<const std::uint8_t> bytes, std::size_t& offset);
Communication decode(std::span<const std::uint8_t> bytes);
std::vector<Communication> decode_all(std::span<const std::uint8_t> bytes);

}  // namespace adbn::engine
