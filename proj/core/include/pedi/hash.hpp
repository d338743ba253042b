#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace pedi {

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

// splitmix64 step; used to derive independent per-episode seeds.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index);

}  // namespace pedi
