#include "gsrelight/model/cloud_io.hpp"

#include "gsrelight/core/error.hpp"

#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>

namespace gsr {
namespace {

enum class ScalarType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

struct Property {
    std::string name;
    ScalarType type;
    std::size_t offset;
};

std::size_t type_size(ScalarType t) {
    switch (t) {
    case ScalarType::Int8:
    case ScalarType::UInt8: return 1;
    case ScalarType::Int16:
    case ScalarType::UInt16: return 2;
    case ScalarType::Int32:
    case ScalarType::UInt32:
    case ScalarType::Float32: return 4;
    case ScalarType::Float64: return 8;
    }
    return 0;
}

ScalarType parse_type(const std::string& token) {
    static const std::map<std::string, ScalarType> kTypes = {
        {"char", ScalarType::Int8},      {"int8", ScalarType::Int8},      {"uchar", ScalarType::UInt8},
        {"uint8", ScalarType::UInt8},    {"short", ScalarType::Int16},    {"int16", ScalarType::Int16},
        {"ushort", ScalarType::UInt16},  {"uint16", ScalarType::UInt16},  {"int", ScalarType::Int32},
        {"int32", ScalarType::Int32},    {"uint", ScalarType::UInt32},    {"uint32", ScalarType::UInt32},
        {"float", ScalarType::Float32},  {"float32", ScalarType::Float32}, {"double", ScalarType::Float64},
        {"float64", ScalarType::Float64}};
    const auto it = kTypes.find(token);
    require(it != kTypes.end(), ErrorCode::MalformedFile, "unsupported property type '" + token + "'");
    return it->second;
}

double read_scalar(const std::uint8_t* p, ScalarType t) {
    switch (t) {
    case ScalarType::Int8: return static_cast<std::int8_t>(*p);
    case ScalarType::UInt8: return *p;
    case ScalarType::Int16: { std::int16_t v; std::memcpy(&v, p, 2); return v; }
    case ScalarType::UInt16: { std::uint16_t v; std::memcpy(&v, p, 2); return v; }
    case ScalarType::Int32: { std::int32_t v; std::memcpy(&v, p, 4); return v; }
    case ScalarType::UInt32: { std::uint32_t v; std::memcpy(&v, p, 4); return v; }
    case ScalarType::Float32: { float v; std::memcpy(&v, p, 4); return v; }
    case ScalarType::Float64: { double v; std::memcpy(&v, p, 8); return v; }
    }
    return 0.0;
}

struct PlyTable {
    std::size_t count = 0;
    std::size_t stride = 0;
    std::vector<Property> properties;
    std::vector<std::string> comments;
    std::vector<std::uint8_t> body;

    [[nodiscard]] const Property* find(const std::string& name) const {
        for (const auto& p : properties) {
            if (p.name == name) {
                return &p;
            }
        }
        return nullptr;
    }
    [[nodiscard]] const Property& get(const std::string& name) const {
        const Property* p = find(name);
        require(p != nullptr, ErrorCode::MalformedFile, "missing attribute '" + name + "'");
        return *p;
    }
    [[nodiscard]] double value(std::size_t row, const Property& p) const {
        return read_scalar(body.data() + row * stride + p.offset, p.type);
    }
};

PlyTable read_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::IoFailure, "cannot open " + path.string());

    std::string line;
    require(std::getline(in, line) && line == "ply", ErrorCode::MalformedFile, "missing 'ply' magic");
    PlyTable table;
    bool format_ok = false;
    bool in_vertex = false;
    bool saw_vertex = false;
    while (true) {
        require(static_cast<bool>(std::getline(in, line)), ErrorCode::MalformedFile, "header not terminated");
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line == "end_header") {
            break;
        }
        std::istringstream tok(line);
        std::string key;
        tok >> key;
        if (key == "format") {
            std::string fmt, version;
            tok >> fmt >> version;
            require(fmt == "binary_little_endian", ErrorCode::MalformedFile, "only binary_little_endian supported");
            format_ok = true;
        } else if (key == "comment" || key == "obj_info") {
            std::string rest;
            std::getline(tok >> std::ws, rest);
            table.comments.push_back(rest);
        } else if (key == "element") {
            std::string name;
            long long count = -1;
            tok >> name >> count;
            require(!tok.fail() && count >= 0, ErrorCode::MalformedFile, "bad element line: " + line);
            if (name == "vertex") {
                require(!saw_vertex, ErrorCode::MalformedFile, "duplicate vertex element");
                saw_vertex = true;
                in_vertex = true;
                table.count = static_cast<std::size_t>(count);
            } else {
                require(count == 0, ErrorCode::MalformedFile, "unexpected non-empty element '" + name + "'");
                in_vertex = false;
            }
        } else if (key == "property") {
            std::string type, name;
            tok >> type;
            require(type != "list", ErrorCode::MalformedFile, "list properties not supported");
            tok >> name;
            require(!tok.fail(), ErrorCode::MalformedFile, "bad property line: " + line);
            if (in_vertex) {
                const ScalarType t = parse_type(type);
                table.properties.push_back({name, t, table.stride});
                table.stride += type_size(t);
            }
        } else {
            fail(ErrorCode::MalformedFile, "unknown header line: " + line);
        }
    }
    require(format_ok, ErrorCode::MalformedFile, "missing format line");
    require(saw_vertex, ErrorCode::MalformedFile, "missing vertex element");

    table.body.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    require(table.body.size() == table.count * table.stride, ErrorCode::MalformedFile,
            "attribute payload has " + std::to_string(table.body.size()) + " bytes, header implies " +
                std::to_string(table.count * table.stride));
    return table;
}

void write_header(std::ofstream& out, std::size_t count, const std::vector<std::string>& names,
                  const std::vector<std::string>& comments) {
    out << "ply\nformat binary_little_endian 1.0\n";
    for (const auto& c : comments) {
        out << "comment " << c << "\n";
    }
    out << "element vertex " << count << "\n";
    for (const auto& n : names) {
        out << "property float " << n << "\n";
    }
    out << "end_header\n";
}

void write_floats(std::ofstream& out, const std::vector<float>& values) {
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(float)));
}

constexpr const char* kLinearComment = "storage linear";
constexpr const char* kDegreeComment = "active_sh_degree ";

} // namespace

GaussianCloud load_cloud(const std::filesystem::path& path) {
    const PlyTable table = read_table(path);

    bool linear = false;
    int declared_degree = -1;
    for (const auto& c : table.comments) {
        linear = linear || c == kLinearComment;
        if (c.rfind(kDegreeComment, 0) == 0) {
            declared_degree = std::atoi(c.c_str() + std::strlen(kDegreeComment));
        }
    }

    int rest = 0;
    while (table.find("f_rest_" + std::to_string(rest)) != nullptr) {
        ++rest;
    }
    int degree = -1;
    for (int d = 0; d <= kMaxShDegree; ++d) {
        if (rest == 3 * (sh_coeff_count(d) - 1)) {
            degree = d;
        }
    }
    require(degree >= 0, ErrorCode::MalformedFile, "f_rest attribute count " + std::to_string(rest) + " is not 0/9/24/45");
    const int rest_per_channel = rest / 3;

    const Property* pos[3] = {&table.get("x"), &table.get("y"), &table.get("z")};
    const Property* dc[3] = {&table.get("f_dc_0"), &table.get("f_dc_1"), &table.get("f_dc_2")};
    const Property* scl[3] = {&table.get("scale_0"), &table.get("scale_1"), &table.get("scale_2")};
    const Property* rot[4] = {&table.get("rot_0"), &table.get("rot_1"), &table.get("rot_2"), &table.get("rot_3")};
    const Property& opa = table.get("opacity");
    std::vector<const Property*> rest_props;
    for (int k = 0; k < rest; ++k) {
        rest_props.push_back(&table.get("f_rest_" + std::to_string(k)));
    }

    if (declared_degree >= 0) {
        require(declared_degree <= degree, ErrorCode::MalformedFile, "declared SH degree exceeds stored coefficients");
        degree = declared_degree;
    }

    GaussianCloud cloud;
    cloud.active_sh_degree = degree;
    const std::size_t n = table.count;
    cloud.means.resize(n);
    cloud.log_scales.resize(n);
    cloud.rotations.resize(n);
    cloud.opacity_logits.resize(n);
    cloud.sh.assign(n * kShFloats, 0.0f);

    auto finite_or_fail = [](double v, std::size_t row, const std::string& what) {
        require(std::isfinite(v), ErrorCode::InvariantViolation,
                "non-finite " + what + " at record " + std::to_string(row));
        return v;
    };

    for (std::size_t i = 0; i < n; ++i) {
        for (int a = 0; a < 3; ++a) {
            cloud.means[i][a] = static_cast<float>(finite_or_fail(table.value(i, *pos[a]), i, "position"));
            cloud.sh[i * kShFloats + a] = static_cast<float>(finite_or_fail(table.value(i, *dc[a]), i, "f_dc"));
        }
        // f_rest is channel-major in the export: all coefficients of red, then green, then blue.
        for (int c = 0; c < 3; ++c) {
            for (int k = 0; k < rest_per_channel; ++k) {
                const double v = finite_or_fail(table.value(i, *rest_props[c * rest_per_channel + k]), i, "f_rest");
                cloud.sh[i * kShFloats + (k + 1) * 3 + c] = static_cast<float>(v);
            }
        }

        const double raw_opacity = finite_or_fail(table.value(i, opa), i, "opacity");
        if (linear) {
            require(raw_opacity >= 0.0 && raw_opacity <= 1.0, ErrorCode::InvariantViolation,
                    "opacity " + std::to_string(raw_opacity) + " outside [0,1] at record " + std::to_string(i));
            cloud.opacity_logits[i] = static_cast<float>(logit(raw_opacity));
        } else {
            cloud.opacity_logits[i] = static_cast<float>(raw_opacity);
        }
        for (int a = 0; a < 3; ++a) {
            const double s = finite_or_fail(table.value(i, *scl[a]), i, "scale");
            if (linear) {
                require(s > 0.0, ErrorCode::InvariantViolation, "non-positive scale at record " + std::to_string(i));
                cloud.log_scales[i][a] = static_cast<float>(std::log(s));
            } else {
                cloud.log_scales[i][a] = static_cast<float>(s);
            }
        }

        Eigen::Vector4d q;
        for (int a = 0; a < 4; ++a) {
            q[a] = finite_or_fail(table.value(i, *rot[a]), i, "rotation");
        }
        const double norm = q.norm();
        require(norm > 0.0, ErrorCode::InvariantViolation, "zero quaternion at record " + std::to_string(i));
        // Already-unit quaternions are kept bit-exact so save/load round-trips.
        cloud.rotations[i] = std::abs(norm - 1.0) > 1e-6 ? Eigen::Vector4f((q / norm).cast<float>()) : Eigen::Vector4f(q.cast<float>());
    }
    cloud.validate();
    return cloud;
}

void save_cloud(const GaussianCloud& cloud, const std::filesystem::path& path, CloudStorage storage) {
    cloud.validate();
    std::vector<std::string> names = {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"};
    constexpr int kRest = kShFloats - 3;
    for (int k = 0; k < kRest; ++k) {
        names.push_back("f_rest_" + std::to_string(k));
    }
    for (const char* n : {"opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"}) {
        names.emplace_back(n);
    }
    std::vector<std::string> comments;
    if (storage == CloudStorage::Linear) {
        comments.emplace_back(kLinearComment);
    }
    if (cloud.active_sh_degree != kMaxShDegree) {
        comments.push_back(kDegreeComment + std::to_string(cloud.active_sh_degree));
    }

    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    write_header(out, cloud.size(), names, comments);

    std::vector<float> row;
    row.reserve(names.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        row.clear();
        row.insert(row.end(), {cloud.means[i].x(), cloud.means[i].y(), cloud.means[i].z(), 0.0f, 0.0f, 0.0f});
        for (int c = 0; c < 3; ++c) {
            row.push_back(cloud.sh_at(i, 0, c));
        }
        for (int c = 0; c < 3; ++c) {
            for (int k = 1; k < kShCoeffs; ++k) {
                row.push_back(cloud.sh_at(i, k, c));
            }
        }
        if (storage == CloudStorage::Linear) {
            row.push_back(static_cast<float>(cloud.opacity(i)));
            const Eigen::Vector3d s = cloud.scale(i);
            row.insert(row.end(), {static_cast<float>(s.x()), static_cast<float>(s.y()), static_cast<float>(s.z())});
        } else {
            row.push_back(cloud.opacity_logits[i]);
            row.insert(row.end(), {cloud.log_scales[i].x(), cloud.log_scales[i].y(), cloud.log_scales[i].z()});
        }
        row.insert(row.end(), {cloud.rotations[i][0], cloud.rotations[i][1], cloud.rotations[i][2], cloud.rotations[i][3]});
        write_floats(out, row);
    }
    out.flush();
    require(static_cast<bool>(out), ErrorCode::IoFailure, "write failed for " + path.string());
}

void save_points(const std::filesystem::path& path, const std::vector<Eigen::Vector3d>& points) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    write_header(out, points.size(), {"x", "y", "z"}, {});
    std::vector<float> values;
    values.reserve(points.size() * 3);
    for (const auto& p : points) {
        values.insert(values.end(), {static_cast<float>(p.x()), static_cast<float>(p.y()), static_cast<float>(p.z())});
    }
    write_floats(out, values);
    out.flush();
    require(static_cast<bool>(out), ErrorCode::IoFailure, "write failed for " + path.string());
}

std::vector<Eigen::Vector3d> load_points(const std::filesystem::path& path) {
    const PlyTable table = read_table(path);
    const Property& x = table.get("x");
    const Property& y = table.get("y");
    const Property& z = table.get("z");
    std::vector<Eigen::Vector3d> out(table.count);
    for (std::size_t i = 0; i < table.count; ++i) {
        out[i] = {table.value(i, x), table.value(i, y), table.value(i, z)};
    }
    return out;
}

} // namespace gsr
