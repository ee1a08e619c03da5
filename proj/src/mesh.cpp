#include "planehead/mesh.hpp"

#include <cstdint>
#include <algorithm>
#include <numeric>
#include <queue>
#include <unordered_map>

namespace planehead {

namespace {

std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

void build_csr(int n, const std::vector<std::pair<int, int>>& pairs, std::vector<int>& offsets,
               std::vector<int>& list) {
    offsets.assign(n + 1, 0);
    for (const auto& [a, b] : pairs) ++offsets[a + 1];
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    list.resize(pairs.size());
    std::vector<int> cursor(offsets.begin(), offsets.end() - 1);
    for (const auto& [a, b] : pairs) list[cursor[a]++] = b;
}

}  // namespace

Mesh::Mesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    const int n = vertex_count();
    for (const auto& t : triangles_)
        for (int v : t)
            if (v < 0 || v >= n)
                throw InvalidArgument("triangle index " + std::to_string(v) + " out of range");
    build_topology();
}

void Mesh::build_topology() {
    std::unordered_map<std::uint64_t, int> lookup;
    lookup.reserve(triangles_.size() * 2);
    face_edges_.resize(triangles_.size());
    for (int f = 0; f < face_count(); ++f) {
        const auto& t = triangles_[f];
        for (int k = 0; k < 3; ++k) {
            const int a = t[k], b = t[(k + 1) % 3];
            auto [it, inserted] = lookup.try_emplace(edge_key(a, b), edge_count());
            if (inserted) {
                edges_.push_back({std::min(a, b), std::max(a, b)});
                edge_faces_.push_back({-1, -1});
                edge_face_count_.push_back(0);
            }
            const int e = it->second;
            face_edges_[f][k] = e;
            int& count = edge_face_count_[e];
            if (count < 2) edge_faces_[e][count] = f;
            ++count;
        }
    }

    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(edges_.size() * 2);
    double total = 0.0;
    for (const auto& [a, b] : edges_) {
        if (a != b) {
            pairs.emplace_back(a, b);
            pairs.emplace_back(b, a);
        }
        total += (vertices_[a] - vertices_[b]).norm();
    }
    std::sort(pairs.begin(), pairs.end());
    build_csr(vertex_count(), pairs, neighbor_offsets_, neighbor_list_);
    mean_edge_length_ = edges_.empty() ? 0.0 : total / static_cast<double>(edges_.size());

    pairs.clear();
    for (int f = 0; f < face_count(); ++f)
        for (int v : triangles_[f]) pairs.emplace_back(v, f);
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    build_csr(vertex_count(), pairs, vface_offsets_, vface_list_);
}

Vec3 Mesh::face_area_vector(int f) const {
    const auto& t = triangles_[f];
    const Vec3& a = vertices_[t[0]];
    const Vec3& b = vertices_[t[1]];
    const Vec3& c = vertices_[t[2]];
    return 0.5 * (a.cross(b) + b.cross(c) + c.cross(a));
}

double Mesh::face_area(int f) const { return face_area_vector(f).norm(); }

Vec3 Mesh::face_normal(int f) const {
    const Vec3 v = face_area_vector(f);
    const double len = v.norm();
    return len > 0.0 ? Vec3(v / len) : Vec3::Zero();
}

Vec3 Mesh::face_centroid(int f) const {
    const auto& t = triangles_[f];
    return (vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]]) / 3.0;
}

double Mesh::total_area() const {
    double a = 0.0;
    for (int f = 0; f < face_count(); ++f) a += face_area(f);
    return a;
}

double Mesh::bbox_diagonal() const {
    if (vertices_.empty()) return 0.0;
    Vec3 lo = vertices_.front(), hi = vertices_.front();
    for (const auto& v : vertices_) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    return (hi - lo).norm();
}

const char* to_string(DefectKind kind) {
    switch (kind) {
        case DefectKind::degenerate_triangle: return "degenerate_triangle";
        case DefectKind::non_manifold_edge: return "non_manifold_edge";
        case DefectKind::orientation_conflict: return "orientation_conflict";
    }
    return "unknown";
}

ValidationReport validate_mesh(const Mesh& m) {
    ValidationReport report;

    for (int f = 0; f < m.face_count(); ++f) {
        const auto& t = m.triangles()[f];
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2] || m.face_area(f) <= 0.0)
            report.defects.push_back({DefectKind::degenerate_triangle, f});
    }

    // Directed occurrence of edge e inside face f: +1 if traversed low->high.
    auto direction = [&](int f, int e) {
        const auto& t = m.triangles()[f];
        for (int k = 0; k < 3; ++k)
            if (m.face_edges(f)[k] == e) return t[k] < t[(k + 1) % 3] ? 1 : -1;
        return 0;
    };

    for (int e = 0; e < m.edge_count(); ++e) {
        const int count = m.edge_face_count(e);
        if (count > 2) {
            report.is_manifold = false;
            report.defects.push_back({DefectKind::non_manifold_edge, e});
        } else if (count == 2) {
            const auto [f0, f1] = m.edge_faces(e);
            if (direction(f0, e) == direction(f1, e)) {
                report.is_manifold = false;
                report.defects.push_back({DefectKind::orientation_conflict, e});
            }
        }
    }

    // Face components through shared edges.
    std::vector<int> comp(m.face_count(), -1);
    std::vector<std::vector<int>> edge_to_faces;
    for (int f = 0; f < m.face_count(); ++f) {
        if (comp[f] >= 0) continue;
        std::vector<int> stack{f};
        comp[f] = report.component_count;
        while (!stack.empty()) {
            const int g = stack.back();
            stack.pop_back();
            for (int e : m.face_edges(g))
                for (int h : m.edge_faces(e))
                    if (h >= 0 && comp[h] < 0) {
                        comp[h] = report.component_count;
                        stack.push_back(h);
                    }
        }
        ++report.component_count;
    }
    report.is_connected = report.component_count <= 1;

    // Boundary loops: connected components of the boundary-edge graph.
    std::unordered_map<int, std::vector<int>> bgraph;
    for (int e = 0; e < m.edge_count(); ++e) {
        if (!m.is_boundary_edge(e)) continue;
        const auto [a, b] = m.edges()[e];
        bgraph[a].push_back(b);
        bgraph[b].push_back(a);
    }
    std::unordered_map<int, bool> seen;
    std::vector<int> keys;
    for (const auto& kv : bgraph) keys.push_back(kv.first);
    std::sort(keys.begin(), keys.end());
    for (int start : keys) {
        if (seen[start]) continue;
        ++report.boundary_loop_count;
        std::vector<int> stack{start};
        seen[start] = true;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int w : bgraph[v])
                if (!seen[w]) {
                    seen[w] = true;
                    stack.push_back(w);
                }
        }
    }
    return report;
}

std::vector<std::vector<int>> label_components(const Mesh& m, std::span<const int> face_labels,
                                               int label) {
    std::vector<std::vector<int>> comps;
    std::vector<char> seen(m.face_count(), 0);
    for (int f = 0; f < m.face_count(); ++f) {
        if (seen[f] || face_labels[f] != label) continue;
        auto& comp = comps.emplace_back();
        std::vector<int> stack{f};
        seen[f] = 1;
        while (!stack.empty()) {
            const int g = stack.back();
            stack.pop_back();
            comp.push_back(g);
            for (int e : m.face_edges(g))
                for (int h : m.edge_faces(e))
                    if (h >= 0 && !seen[h] && face_labels[h] == label) {
                        seen[h] = 1;
                        stack.push_back(h);
                    }
        }
        std::sort(comp.begin(), comp.end());
    }
    return comps;
}

void check_labeling(const Mesh& m, const RegionLabeling& labels) {
    if (static_cast<int>(labels.face_labels.size()) != m.face_count())
        throw InvalidArgument("label count " + std::to_string(labels.face_labels.size()) +
                              " does not match face count " + std::to_string(m.face_count()));
    if (labels.K < 0) throw InvalidArgument("negative region count");
    std::vector<int> counts(labels.K + 1, 0);
    for (int l : labels.face_labels) {
        if (l < 0 || l > labels.K)
            throw InvalidArgument("region id " + std::to_string(l) + " outside [0, K]");
        ++counts[l];
    }
    for (int r = 1; r <= labels.K; ++r) {
        if (counts[r] == 0) throw InvalidArgument("region " + std::to_string(r) + " is empty");
        if (label_components(m, labels.face_labels, r).size() != 1)
            throw InvalidArgument("region " + std::to_string(r) + " is not face-connected");
    }
}

double RegionAdjacency::length(int i, int j) const {
    const auto it = boundary_length.find({std::min(i, j), std::max(i, j)});
    return it == boundary_length.end() ? 0.0 : it->second;
}

std::vector<int> RegionAdjacency::neighbors(int r) const {
    std::vector<int> out;
    for (const auto& [key, len] : boundary_length) {
        if (key.first == r) out.push_back(key.second);
        if (key.second == r) out.push_back(key.first);
    }
    std::sort(out.begin(), out.end());
    return out;
}

RegionAdjacency region_adjacency(const Mesh& m, const RegionLabeling& labels) {
    if (static_cast<int>(labels.face_labels.size()) != m.face_count())
        throw InvalidArgument("label count does not match face count");
    RegionAdjacency adj;
    for (int e = 0; e < m.edge_count(); ++e) {
        if (m.edge_face_count(e) != 2) continue;
        const int li = labels.face_labels[m.edge_faces(e)[0]];
        const int lj = labels.face_labels[m.edge_faces(e)[1]];
        if (li == lj) continue;
        const auto [a, b] = m.edges()[e];
        adj.boundary_length[{std::min(li, lj), std::max(li, lj)}] +=
            (m.vertices()[a] - m.vertices()[b]).norm();
    }
    return adj;
}

double cotangent_weight_clamped(double cot_alpha, double cot_beta) {
    return std::max(0.0, 0.5 * (cot_alpha + cot_beta));
}

namespace {

CotanLaplacian assemble(const Mesh& m, std::vector<int> vertices, std::span<const int> faces) {
    std::unordered_map<int, int> local;
    local.reserve(vertices.size() * 2);
    for (int i = 0; i < static_cast<int>(vertices.size()); ++i) local[vertices[i]] = i;

    // Accumulate half-cotangents per directed pair, then clamp the summed weight.
    std::map<std::pair<int, int>, double> half_cot;
    for (int f : faces) {
        const auto& t = m.triangles()[f];
        for (int k = 0; k < 3; ++k) {
            const int i = t[k], j = t[(k + 1) % 3], o = t[(k + 2) % 3];
            const Vec3 u = m.vertices()[i] - m.vertices()[o];
            const Vec3 v = m.vertices()[j] - m.vertices()[o];
            const double s = u.cross(v).norm();
            const double cot = s > 0.0 ? u.dot(v) / s : 0.0;
            const int li = local.at(i), lj = local.at(j);
            half_cot[{std::min(li, lj), std::max(li, lj)}] += 0.5 * cot;
        }
    }

    const int n = static_cast<int>(vertices.size());
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    for (const auto& [key, w_raw] : half_cot) {
        const double w = std::max(0.0, w_raw);
        if (w == 0.0) continue;
        trip.emplace_back(key.first, key.second, -w);
        trip.emplace_back(key.second, key.first, -w);
        diag[key.first] += w;
        diag[key.second] += w;
    }
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, diag[i]);

    CotanLaplacian out;
    out.vertices = std::move(vertices);
    out.matrix.resize(n, n);
    out.matrix.setFromTriplets(trip.begin(), trip.end());
    return out;
}

}  // namespace

CotanLaplacian cotangent_laplacian(const Mesh& m, std::span<const int> vertex_subset) {
    if (vertex_subset.empty()) throw InvalidArgument("empty vertex subset");
    std::vector<int> verts(vertex_subset.begin(), vertex_subset.end());
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    std::vector<char> in(m.vertex_count(), 0);
    for (int v : verts) {
        if (v < 0 || v >= m.vertex_count()) throw InvalidArgument("vertex index out of range");
        in[v] = 1;
    }
    std::vector<int> faces;
    for (int f = 0; f < m.face_count(); ++f) {
        const auto& t = m.triangles()[f];
        if (in[t[0]] && in[t[1]] && in[t[2]]) faces.push_back(f);
    }
    return assemble(m, std::move(verts), faces);
}

CotanLaplacian cotangent_laplacian_faces(const Mesh& m, std::span<const int> faces) {
    if (faces.empty()) throw InvalidArgument("empty face subset");
    std::vector<int> verts;
    for (int f : faces)
        for (int v : m.triangles()[f]) verts.push_back(v);
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    return assemble(m, std::move(verts), faces);
}

}  // namespace planehead
