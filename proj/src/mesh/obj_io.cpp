#include "gsrelight/mesh/obj_io.hpp"

#include "gsrelight/core/error.hpp"

#include <fstream>
#include <sstream>

namespace gsr {

MeshScene parse_obj(std::istream& in) {
    std::vector<Eigen::Vector3d> positions;
    MeshScene scene;
    // Global vertex indices used by each object, remapped to local ones.
    std::vector<std::vector<int>> local_of(1);
    scene.objects.push_back({"default", {}, {}});

    auto start_object = [&](const std::string& name) {
        if (scene.objects.back().triangles.empty()) {
            scene.objects.back().name = name;
            return;
        }
        scene.objects.push_back({name, {}, {}});
        local_of.emplace_back();
    };
    auto local_index = [&](int global) {
        auto& map = local_of.back();
        if (map.size() < positions.size()) {
            map.resize(positions.size(), -1);
        }
        if (map[global] < 0) {
            map[global] = static_cast<int>(scene.objects.back().vertices.size());
            scene.objects.back().vertices.push_back(positions[global]);
        }
        return map[global];
    };

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') {
            continue;
        }
        const std::string where = "OBJ line " + std::to_string(line_no);
        if (tag == "v") {
            Eigen::Vector3d v;
            require(static_cast<bool>(ls >> v.x() >> v.y() >> v.z()), ErrorCode::MalformedFile, where + ": bad vertex");
            positions.push_back(v);
        } else if (tag == "o" || tag == "g") {
            std::string name;
            std::getline(ls >> std::ws, name);
            start_object(name.empty() ? "object" + std::to_string(scene.objects.size()) : name);
        } else if (tag == "f") {
            std::vector<int> face;
            std::string token;
            while (ls >> token) {
                int idx = 0;
                try {
                    idx = std::stoi(token.substr(0, token.find('/')));
                } catch (const std::exception&) {
                    fail(ErrorCode::MalformedFile, where + ": bad face index '" + token + "'");
                }
                const int n = static_cast<int>(positions.size());
                const int global = idx > 0 ? idx - 1 : n + idx;
                require(idx != 0 && global >= 0 && global < n, ErrorCode::MalformedFile,
                        where + ": face index out of range");
                face.push_back(local_index(global));
            }
            require(face.size() >= 3, ErrorCode::MalformedFile, where + ": face needs at least 3 vertices");
            for (std::size_t k = 1; k + 1 < face.size(); ++k) {
                scene.objects.back().triangles.push_back({face[0], face[k], face[k + 1]});
            }
        }
    }
    std::erase_if(scene.objects, [](const MeshObject& o) { return o.triangles.empty(); });
    return scene;
}

MeshScene load_obj(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::IoFailure, "cannot open " + path.string());
    return parse_obj(in);
}

void save_obj(const std::filesystem::path& path, const MeshScene& scene) {
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorCode::IoFailure, "cannot write " + path.string());
    out.precision(17);
    int base = 1;
    for (const auto& obj : scene.objects) {
        out << "o " << obj.name << '\n';
        for (const auto& v : obj.vertices) {
            out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
        }
        for (const auto& t : obj.triangles) {
            out << "f " << t[0] + base << ' ' << t[1] + base << ' ' << t[2] + base << '\n';
        }
        base += static_cast<int>(obj.vertices.size());
    }
}

} // namespace gsr
