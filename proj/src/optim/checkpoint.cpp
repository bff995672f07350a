#include "gsrelight/optim/checkpoint.hpp"

#include "gsrelight/core/base64.hpp"
#include "gsrelight/core/error.hpp"
#include "gsrelight/model/cloud_io.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>

namespace gsr {
namespace {

std::string encode_doubles(const std::vector<double>& values) {
    std::vector<std::uint8_t> bytes(values.size() * sizeof(double));
    if (!bytes.empty()) {
        std::memcpy(bytes.data(), values.data(), bytes.size());
    }
    return base64_encode(bytes);
}

std::vector<double> decode_doubles(const std::string& text) {
    const auto bytes = base64_decode(text);
    require(bytes.size() % sizeof(double) == 0, ErrorCode::MalformedFile, "checkpoint moment payload is truncated");
    std::vector<double> values(bytes.size() / sizeof(double));
    if (!values.empty()) {
        std::memcpy(values.data(), bytes.data(), bytes.size());
    }
    return values;
}

nlohmann::json adam_to_json(const AdamState& s) {
    return {{"step", s.step}, {"beta1", s.beta1}, {"beta2", s.beta2}, {"eps", s.eps},
            {"m", encode_doubles(s.m)}, {"v", encode_doubles(s.v)}};
}

AdamState adam_from_json(const nlohmann::json& j) {
    AdamState s;
    s.step = j.at("step").get<std::int64_t>();
    s.beta1 = j.at("beta1").get<double>();
    s.beta2 = j.at("beta2").get<double>();
    s.eps = j.at("eps").get<double>();
    s.m = decode_doubles(j.at("m").get<std::string>());
    s.v = decode_doubles(j.at("v").get<std::string>());
    require(s.m.size() == s.v.size(), ErrorCode::MalformedFile, "checkpoint moments differ in length");
    return s;
}

} // namespace

void save_checkpoint(const std::filesystem::path& dir, const RelightCheckpoint& ckpt) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    require(!ec, ErrorCode::IoFailure, "cannot create checkpoint directory " + dir.string());
    // json first, cloud second: a reader only trusts the pair once both exist.
    const nlohmann::json j = {{"version", 1},
                              {"next_outer", ckpt.next_outer},
                              {"image_step", ckpt.image_step},
                              {"rng_seed", ckpt.rng_seed},
                              {"adam_color", adam_to_json(ckpt.adam_color)},
                              {"adam_sh", adam_to_json(ckpt.adam_sh)}};
    const auto tmp = dir / "checkpoint.json.tmp";
    {
        std::ofstream out(tmp);
        require(static_cast<bool>(out), ErrorCode::IoFailure, "cannot write " + tmp.string());
        out << j.dump(2) << '\n';
        require(static_cast<bool>(out), ErrorCode::IoFailure, "write failed for " + tmp.string());
    }
    save_cloud(ckpt.cloud, dir / "checkpoint.ply");
    std::filesystem::rename(tmp, dir / "checkpoint.json", ec);
    require(!ec, ErrorCode::IoFailure, "cannot finalize checkpoint in " + dir.string());
}

bool has_checkpoint(const std::filesystem::path& dir) {
    return std::filesystem::exists(dir / "checkpoint.json") && std::filesystem::exists(dir / "checkpoint.ply");
}

RelightCheckpoint load_checkpoint(const std::filesystem::path& dir) {
    require(has_checkpoint(dir), ErrorCode::IoFailure, "no checkpoint in " + dir.string());
    std::ifstream in(dir / "checkpoint.json");
    require(static_cast<bool>(in), ErrorCode::IoFailure, "cannot read checkpoint.json");
    RelightCheckpoint ckpt;
    try {
        const auto j = nlohmann::json::parse(in);
        require(j.at("version").get<int>() == 1, ErrorCode::MalformedFile, "unsupported checkpoint version");
        ckpt.next_outer = j.at("next_outer").get<int>();
        ckpt.image_step = j.at("image_step").get<long>();
        ckpt.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        ckpt.adam_color = adam_from_json(j.at("adam_color"));
        ckpt.adam_sh = adam_from_json(j.at("adam_sh"));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::MalformedFile, std::string("checkpoint.json: ") + e.what());
    }
    ckpt.cloud = load_cloud(dir / "checkpoint.ply");
    return ckpt;
}

} // namespace gsr
