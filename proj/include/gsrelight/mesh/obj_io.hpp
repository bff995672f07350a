#pragma once

#include "gsrelight/mesh/mesh.hpp"

#include <filesystem>
#include <istream>

namespace gsr {

/// OBJ subset: v and f lines (polygons fan-triangulated, v/vt/vn and negative
/// indices accepted); o and g start a new object. Other lines are ignored.
[[nodiscard]] MeshScene parse_obj(std::istream& in);
[[nodiscard]] MeshScene load_obj(const std::filesystem::path& path);
void save_obj(const std::filesystem::path& path, const MeshScene& scene);

} // namespace gsr
