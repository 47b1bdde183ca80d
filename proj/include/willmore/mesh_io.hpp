#pragma once

#include "willmore/mesh.hpp"

#include <filesystem>
#include <stdexcept>

namespace willmore {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RawMesh {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    std::size_t ignored_records = 0;  // OBJ records other than v/f
};

/// OBJ subset: `v x y z` and `f i j k` (1-based, negative = relative,
/// `i/t/n` forms accepted). Other records are counted and skipped.
RawMesh read_obj(const std::filesystem::path& path);
/// Binary little-endian PLY with double (or float) x/y/z and int32 face lists.
RawMesh read_ply(const std::filesystem::path& path);

/// Dispatch on extension (.obj / .ply); validates into a closed Mesh.
Mesh load_mesh(const std::filesystem::path& path);

/// OBJ with 17 significant digits.
void save_obj(const Mesh& mesh, const std::filesystem::path& path);
/// Binary little-endian PLY: float64 positions, int32 indices.
void save_ply(const Mesh& mesh, const std::filesystem::path& path);
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);

}  // namespace willmore
