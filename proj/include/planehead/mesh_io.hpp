#pragma once

#include "planehead/mesh.hpp"

#include <json.hpp>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace planehead {

struct RawMesh {
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
};

// OBJ (v/f records; polygons fan-triangulated) and PLY (ascii, binary_little_endian).
// Normals, colors and texture coordinates are ignored. Throws ParseError.
RawMesh read_mesh_file(const std::filesystem::path& path);

// Parses, builds and validates. Throws ParseError, or ValidationError carrying the report.
Mesh load_mesh(const std::filesystem::path& path);

enum class PlyEncoding { ascii, binary_little_endian };

// Writers take positions separately so deformed results reuse the input connectivity.
void save_obj(const std::filesystem::path& path, std::span<const Vec3> positions,
              std::span<const Triangle> triangles);
void save_ply(const std::filesystem::path& path, std::span<const Vec3> positions,
              std::span<const Triangle> triangles,
              PlyEncoding encoding = PlyEncoding::binary_little_endian);
// Dispatches on extension (.obj / .ply).
void save_mesh(const std::filesystem::path& path, std::span<const Vec3> positions,
               std::span<const Triangle> triangles);

nlohmann::json labels_to_json(const RegionLabeling& labels);
RegionLabeling labels_from_json(const nlohmann::json& j);
RegionLabeling load_labels(const std::filesystem::path& path);
void save_labels(const std::filesystem::path& path, const RegionLabeling& labels);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

// FNV-1a 64 over file bytes, hex encoded.
std::string file_content_hash(const std::filesystem::path& path);

}  // namespace planehead
