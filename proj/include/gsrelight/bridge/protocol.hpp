#pragma once

#include "gsrelight/core/image.hpp"

#include <json.hpp>

#include <string>

namespace gsr {

inline constexpr int kProtocolVersion = 1;

/// {"dtype": "float32", "shape": [H, W, C], "data": base64 of little-endian float32}
[[nodiscard]] nlohmann::json encode_array(const Image& image);
/// Throws ProtocolError on a wrong dtype, shape or byte count.
[[nodiscard]] Image decode_array(const nlohmann::json& j);

/// Rank-1 float32 array, used for embeddings.
[[nodiscard]] nlohmann::json encode_vector(const std::vector<double>& v);
[[nodiscard]] std::vector<double> decode_vector(const nlohmann::json& j);

[[nodiscard]] nlohmann::json make_request(const std::string& op, const std::string& request_id,
                                          const nlohmann::json& payload);

struct BridgeReply {
    std::string request_id;
    bool ok = false;
    nlohmann::json payload;
    std::string error_code;
    std::string error_message;
};

[[nodiscard]] nlohmann::json make_ok_reply(const std::string& request_id, const nlohmann::json& payload);
[[nodiscard]] nlohmann::json make_error_reply(const std::string& request_id, const std::string& code,
                                              const std::string& message);
/// Throws ProtocolError when the body is not a well-formed reply envelope.
[[nodiscard]] BridgeReply parse_reply(const std::string& body);

} // namespace gsr
