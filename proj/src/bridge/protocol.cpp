#include "gsrelight/bridge/protocol.hpp"

#include "gsrelight/core/base64.hpp"
#include "gsrelight/core/error.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace gsr {
namespace {

static_assert(std::endian::native == std::endian::little, "wire format assumes a little-endian host");

std::string pack_floats(std::span<const double> values) {
    std::vector<std::uint8_t> bytes(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const float f = static_cast<float>(values[i]);
        std::memcpy(bytes.data() + 4 * i, &f, 4);
    }
    return base64_encode(bytes);
}

std::vector<double> unpack_floats(const nlohmann::json& j, std::size_t expected) {
    require(j.is_object() && j.contains("dtype") && j.contains("shape") && j.contains("data"),
            ErrorCode::ProtocolError, "array needs dtype, shape and data");
    require(j.at("dtype") == "float32", ErrorCode::ProtocolError, "only float32 arrays are supported");
    require(j.at("data").is_string(), ErrorCode::ProtocolError, "array data must be a base64 string");
    const auto bytes = base64_decode(j.at("data").get<std::string>());
    require(bytes.size() == expected * 4, ErrorCode::ProtocolError,
            "array payload has " + std::to_string(bytes.size()) + " bytes, shape needs " +
                std::to_string(expected * 4));
    std::vector<double> out(expected);
    for (std::size_t i = 0; i < expected; ++i) {
        float f;
        std::memcpy(&f, bytes.data() + 4 * i, 4);
        out[i] = f;
    }
    return out;
}

} // namespace

nlohmann::json encode_array(const Image& image) {
    return {{"dtype", "float32"},
            {"shape", {image.height(), image.width(), image.channels()}},
            {"data", pack_floats(image.data())}};
}

Image decode_array(const nlohmann::json& j) {
    require(j.is_object() && j.contains("shape") && j.at("shape").is_array() && j.at("shape").size() == 3,
            ErrorCode::ProtocolError, "array shape must be [H, W, C]");
    int dims[3];
    for (int a = 0; a < 3; ++a) {
        const auto& d = j.at("shape")[a];
        require(d.is_number_integer() && d.get<long>() > 0 && d.get<long>() < (1L << 20), ErrorCode::ProtocolError,
                "array dimensions must be positive integers");
        dims[a] = d.get<int>();
    }
    Image image(dims[0], dims[1], dims[2]);
    const auto values = unpack_floats(j, image.size());
    std::copy(values.begin(), values.end(), image.data().begin());
    return image;
}

nlohmann::json encode_vector(const std::vector<double>& v) {
    return {{"dtype", "float32"}, {"shape", {v.size()}}, {"data", pack_floats(v)}};
}

std::vector<double> decode_vector(const nlohmann::json& j) {
    require(j.is_object() && j.contains("shape") && j.at("shape").is_array() && j.at("shape").size() == 1 &&
                j.at("shape")[0].is_number_integer() && j.at("shape")[0].get<long>() >= 0,
            ErrorCode::ProtocolError, "vector shape must be [N]");
    return unpack_floats(j, j.at("shape")[0].get<std::size_t>());
}

nlohmann::json make_request(const std::string& op, const std::string& request_id, const nlohmann::json& payload) {
    return {{"op", op}, {"request_id", request_id}, {"payload", payload}};
}

nlohmann::json make_ok_reply(const std::string& request_id, const nlohmann::json& payload) {
    return {{"request_id", request_id}, {"ok", true}, {"payload", payload}};
}

nlohmann::json make_error_reply(const std::string& request_id, const std::string& code, const std::string& message) {
    return {{"request_id", request_id}, {"ok", false}, {"error", {{"code", code}, {"message", message}}}};
}

BridgeReply parse_reply(const std::string& body) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ProtocolError, std::string("reply is not JSON: ") + e.what());
    }
    require(j.is_object() && j.contains("request_id") && j.at("request_id").is_string() && j.contains("ok") &&
                j.at("ok").is_boolean(),
            ErrorCode::ProtocolError, "reply envelope needs request_id and ok");
    BridgeReply reply;
    reply.request_id = j.at("request_id").get<std::string>();
    reply.ok = j.at("ok").get<bool>();
    if (reply.ok) {
        require(j.contains("payload"), ErrorCode::ProtocolError, "ok reply without payload");
        reply.payload = j.at("payload");
    } else {
        require(j.contains("error") && j.at("error").is_object() && j.at("error").contains("code") &&
                    j.at("error").at("code").is_string(),
                ErrorCode::ProtocolError, "error reply without error.code");
        reply.error_code = j.at("error").at("code").get<std::string>();
        reply.error_message = j.at("error").value("message", "");
    }
    return reply;
}

} // namespace gsr
