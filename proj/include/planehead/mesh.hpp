#pragma once

#include "planehead/geometry.hpp"

#include <Eigen/SparseCore>

#include <array>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace planehead {

using Triangle = std::array<int, 3>;

// Indexed triangle mesh. Immutable after construction; deformation produces new
// position arrays that share this connectivity.
class Mesh {
public:
    Mesh() = default;
    // Throws InvalidArgument when a triangle index is outside [0, vertices.size()).
    Mesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

    const std::vector<Vec3>& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    int vertex_count() const { return static_cast<int>(vertices_.size()); }
    int face_count() const { return static_cast<int>(triangles_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    double mean_edge_length() const { return mean_edge_length_; }

    // Unique undirected edges, endpoints sorted ascending.
    const std::vector<std::array<int, 2>>& edges() const { return edges_; }
    // Up to two incident faces per edge (-1 when absent); see edge_face_count().
    const std::array<int, 2>& edge_faces(int e) const { return edge_faces_[e]; }
    int edge_face_count(int e) const { return edge_face_count_[e]; }
    // face_edges(f)[k] is the edge joining triangle corners k and k+1.
    const std::array<int, 3>& face_edges(int f) const { return face_edges_[f]; }
    bool is_boundary_edge(int e) const { return edge_face_count_[e] == 1; }

    std::span<const int> vertex_neighbors(int v) const {
        return {neighbor_list_.data() + neighbor_offsets_[v],
                neighbor_list_.data() + neighbor_offsets_[v + 1]};
    }
    std::span<const int> vertex_faces(int v) const {
        return {vface_list_.data() + vface_offsets_[v], vface_list_.data() + vface_offsets_[v + 1]};
    }

    Vec3 face_normal(int f) const;  // unit; zero for degenerate faces
    Vec3 face_area_vector(int f) const;  // A_t * n_t
    double face_area(int f) const;
    Vec3 face_centroid(int f) const;
    double total_area() const;
    double bbox_diagonal() const;

private:
    void build_topology();

    std::vector<Vec3> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<std::array<int, 2>> edges_;
    std::vector<std::array<int, 2>> edge_faces_;
    std::vector<int> edge_face_count_;
    std::vector<std::array<int, 3>> face_edges_;
    std::vector<int> neighbor_offsets_, neighbor_list_;
    std::vector<int> vface_offsets_, vface_list_;
    double mean_edge_length_ = 0.0;
};

// Per-face region ids in {0..K}; 0 marks geometry outside the optimization area.
struct RegionLabeling {
    int K = 0;
    std::vector<int> face_labels;
};

enum class DefectKind {
    degenerate_triangle,
    non_manifold_edge,
    orientation_conflict,
};

struct Defect {
    DefectKind kind;
    int element;  // face index for degenerate_triangle, edge index otherwise
};

struct ValidationReport {
    bool is_manifold = true;
    bool is_connected = true;
    int component_count = 0;
    int boundary_loop_count = 0;
    std::vector<Defect> defects;

    bool ok() const { return defects.empty(); }
};

const char* to_string(DefectKind kind);

class ValidationError : public Error {
public:
    ValidationError(const std::string& what, ValidationReport report)
        : Error(what), report_(std::move(report)) {}
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

ValidationReport validate_mesh(const Mesh& m);

// Throws InvalidArgument on size mismatch, out-of-range ids, empty or face-disconnected regions.
void check_labeling(const Mesh& m, const RegionLabeling& labels);

// Connected components of the faces carrying `label`, via shared edges.
std::vector<std::vector<int>> label_components(const Mesh& m, std::span<const int> face_labels,
                                               int label);

struct RegionAdjacency {
    // Keyed by (i, j) with i < j; value is the total length of shared mesh edges.
    std::map<std::pair<int, int>, double> boundary_length;

    double length(int i, int j) const;
    std::vector<int> neighbors(int r) const;
};

RegionAdjacency region_adjacency(const Mesh& m, const RegionLabeling& labels);

// Clamped cotangent Laplacian over a vertex subset. Only triangles whose three
// corners lie in the subset contribute. Rows and columns follow `vertices`.
// operator is positive semidefinite: L_ii = sum_j w_ij, L_ij = -w_ij.
struct CotanLaplacian {
    std::vector<int> vertices;
    Eigen::SparseMatrix<double> matrix;
};

double cotangent_weight_clamped(double cot_alpha, double cot_beta);

CotanLaplacian cotangent_laplacian(const Mesh& m, std::span<const int> vertex_subset);
// Same operator restricted to an explicit face set (vertex subset = their corners, sorted).
CotanLaplacian cotangent_laplacian_faces(const Mesh& m, std::span<const int> faces);

}  // namespace planehead
