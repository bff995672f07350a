#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gsr {

[[nodiscard]] std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws ProtocolError on characters outside the standard alphabet or bad padding.
[[nodiscard]] std::vector<std::uint8_t> base64_decode(std::string_view text);

} // namespace gsr
