#include "planehead/segmenter.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <random>

namespace planehead {

namespace {

// Shortest dual-graph distances (centroid to centroid) from a set of source faces.
std::vector<double> dual_distances(const Mesh& m, const std::vector<int>& sources) {
    std::vector<double> dist(m.face_count(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (int s : sources) {
        dist[s] = 0.0;
        pq.emplace(0.0, s);
    }
    while (!pq.empty()) {
        const auto [d, f] = pq.top();
        pq.pop();
        if (d > dist[f]) continue;
        const Vec3 cf = m.face_centroid(f);
        for (int e : m.face_edges(f))
            for (int g : m.edge_faces(e)) {
                if (g < 0 || g == f) continue;
                const double nd = d + (m.face_centroid(g) - cf).norm();
                if (nd < dist[g]) {
                    dist[g] = nd;
                    pq.emplace(nd, g);
                }
            }
    }
    return dist;
}

struct FaceData {
    std::vector<Vec3> normal;
    std::vector<double> area;
};

double face_error(const FaceData& fd, int f, const Vec3& n) {
    return fd.area[f] * (fd.normal[f] - n).squaredNorm();
}

// Region growing from one seed per proxy, ordered by the L2,1 error.
std::vector<int> flood(const Mesh& m, const FaceData& fd, const std::vector<VsaProxy>& proxies) {
    std::vector<int> label(m.face_count(), 0);
    struct Item {
        double err;
        int face;
        int proxy;
        bool operator>(const Item& o) const {
            if (err != o.err) return err > o.err;
            if (face != o.face) return face > o.face;
            return proxy > o.proxy;
        }
    };
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    auto push_neighbors = [&](int f, int p) {
        for (int e : m.face_edges(f))
            for (int g : m.edge_faces(e))
                if (g >= 0 && label[g] == 0) pq.push({face_error(fd, g, proxies[p].normal), g, p});
    };
    for (int p = 0; p < static_cast<int>(proxies.size()); ++p) label[proxies[p].seed_face] = p + 1;
    for (int p = 0; p < static_cast<int>(proxies.size()); ++p) push_neighbors(proxies[p].seed_face, p);
    while (!pq.empty()) {
        const Item it = pq.top();
        pq.pop();
        if (label[it.face] != 0) continue;
        label[it.face] = it.proxy + 1;
        push_neighbors(it.face, it.proxy);
    }
    return label;
}

void refit(const Mesh& m, const FaceData& fd, const std::vector<int>& label,
           std::vector<VsaProxy>& proxies) {
    std::vector<Vec3> sum(proxies.size(), Vec3::Zero());
    for (int f = 0; f < m.face_count(); ++f) sum[label[f] - 1] += fd.area[f] * fd.normal[f];
    for (std::size_t p = 0; p < proxies.size(); ++p) {
        const double len = sum[p].norm();
        if (len > 1e-300) proxies[p].normal = sum[p] / len;
        // Reseed at the best-fitting face so the next flood starts inside the region.
        double best = std::numeric_limits<double>::infinity();
        for (int f = 0; f < m.face_count(); ++f) {
            if (label[f] != static_cast<int>(p) + 1) continue;
            const double err = face_error(fd, f, proxies[p].normal);
            if (err < best) {
                best = err;
                proxies[p].seed_face = f;
            }
        }
    }
}

double energy_of(const FaceData& fd, const std::vector<int>& label,
                 const std::vector<VsaProxy>& proxies) {
    double e = 0.0;
    for (std::size_t f = 0; f < label.size(); ++f)
        e += face_error(fd, static_cast<int>(f), proxies[label[f] - 1].normal);
    return e;
}

}  // namespace

double vsa_energy(const Mesh& m, const RegionLabeling& labels,
                  const std::vector<VsaProxy>& proxies) {
    double e = 0.0;
    for (int f = 0; f < m.face_count(); ++f) {
        const int l = labels.face_labels[f];
        if (l <= 0) continue;
        e += m.face_area(f) * (m.face_normal(f) - proxies[l - 1].normal).squaredNorm();
    }
    return e;
}

VsaResult vsa_segment(const Mesh& m, int K, int max_iters, std::uint64_t seed) {
    if (K < 1) throw InvalidArgument("VSA needs K >= 1");
    if (K > m.face_count())
        throw InvalidArgument("VSA region count " + std::to_string(K) + " exceeds face count " +
                              std::to_string(m.face_count()));

    FaceData fd;
    fd.normal.resize(m.face_count());
    fd.area.resize(m.face_count());
    for (int f = 0; f < m.face_count(); ++f) {
        fd.normal[f] = m.face_normal(f);
        fd.area[f] = m.face_area(f);
    }

    // Farthest-face seeding from a random start.
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, m.face_count() - 1);
    std::vector<int> seeds{pick(rng)};
    while (static_cast<int>(seeds.size()) < K) {
        const auto dist = dual_distances(m, seeds);
        int best = -1;
        for (int f = 0; f < m.face_count(); ++f) {
            if (std::isinf(dist[f])) throw InvalidArgument("VSA requires a connected mesh");
            if (best < 0 || dist[f] > dist[best]) best = f;
        }
        seeds.push_back(best);
    }
    if (K == 1) {
        const auto dist = dual_distances(m, seeds);
        for (double d : dist)
            if (std::isinf(d)) throw InvalidArgument("VSA requires a connected mesh");
    }

    VsaResult result;
    result.proxies.resize(K);
    for (int p = 0; p < K; ++p) result.proxies[p] = {p + 1, fd.normal[seeds[p]], seeds[p]};

    std::vector<int> label;
    double energy = std::numeric_limits<double>::infinity();
    for (int it = 0; it < std::max(1, max_iters); ++it) {
        std::vector<VsaProxy> proxies = result.proxies;
        std::vector<int> next = flood(m, fd, proxies);
        refit(m, fd, next, proxies);
        const double e = energy_of(fd, next, proxies);
        // Lloyd safeguard: a partition that raises the energy is discarded.
        if (!label.empty() && e > energy) break;
        const bool unchanged = next == label;
        label = std::move(next);
        result.proxies = std::move(proxies);
        energy = e;
        result.energy_trace.push_back(e);
        result.iterations = it + 1;
        if (unchanged) break;
    }

    result.labels.K = K;
    result.labels.face_labels = std::move(label);
    spdlog::debug("vsa: K={} iterations={} energy={}", K, result.iterations, energy);
    return result;
}

int majority_label(int a, int b, int c) {
    if (a == b || a == c) return a;
    if (b == c) return b;
    return std::min({a, b, c});
}

PointGrid::PointGrid(const std::vector<Vec3>& points) : points_(points) {
    if (points.empty()) throw InvalidArgument("empty point set");
    Vec3 lo = points.front(), hi = points.front();
    for (const auto& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const Vec3 ext = (hi - lo).cwiseMax(Vec3::Constant(1e-12));
    // Roughly two points per occupied cell for surface-like sets.
    const double target_cells = std::max(1.0, static_cast<double>(points.size()) / 2.0);
    const double vol_cell = ext.prod() / target_cells;
    double area_cell = (ext.x() * ext.y() + ext.y() * ext.z() + ext.x() * ext.z()) / target_cells;
    cell_ = std::max(std::cbrt(vol_cell), std::sqrt(area_cell) * 0.5);
    cell_ = std::max(cell_, ext.maxCoeff() / 1024.0);
    origin_ = lo;
    for (int k = 0; k < 3; ++k)
        dims_[k] = std::max(1, static_cast<int>(std::floor(ext[k] / cell_)) + 1);

    const std::int64_t ncell = static_cast<std::int64_t>(dims_[0]) * dims_[1] * dims_[2];
    offsets_.assign(ncell + 1, 0);
    std::vector<std::int64_t> keys(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto c = cell_of(points[i]);
        keys[i] = cell_key(c[0], c[1], c[2]);
        ++offsets_[keys[i] + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    items_.resize(points.size());
    std::vector<int> cursor(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < points.size(); ++i) items_[cursor[keys[i]]++] = static_cast<int>(i);
}

std::array<int, 3> PointGrid::cell_of(const Vec3& p) const {
    std::array<int, 3> c{};
    for (int k = 0; k < 3; ++k)
        c[k] = std::clamp(static_cast<int>(std::floor((p[k] - origin_[k]) / cell_)), 0, dims_[k] - 1);
    return c;
}

std::int64_t PointGrid::cell_key(int x, int y, int z) const {
    return (static_cast<std::int64_t>(z) * dims_[1] + y) * dims_[0] + x;
}

int PointGrid::nearest(const Vec3& q) const {
    const auto c = cell_of(q);
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    const int max_ring = std::max({dims_[0], dims_[1], dims_[2]});
    for (int ring = 0; ring <= max_ring; ++ring) {
        for (int z = c[2] - ring; z <= c[2] + ring; ++z) {
            if (z < 0 || z >= dims_[2]) continue;
            for (int y = c[1] - ring; y <= c[1] + ring; ++y) {
                if (y < 0 || y >= dims_[1]) continue;
                for (int x = c[0] - ring; x <= c[0] + ring; ++x) {
                    if (x < 0 || x >= dims_[0]) continue;
                    const int cheb = std::max({std::abs(x - c[0]), std::abs(y - c[1]), std::abs(z - c[2])});
                    if (cheb != ring) continue;
                    const auto key = cell_key(x, y, z);
                    for (int k = offsets_[key]; k < offsets_[key + 1]; ++k) {
                        const int i = items_[k];
                        const double d2 = (points_[i] - q).squaredNorm();
                        if (d2 < best_d2 || (d2 == best_d2 && i < best)) {
                            best_d2 = d2;
                            best = i;
                        }
                    }
                }
            }
        }
        if (best >= 0 && static_cast<double>(ring) * cell_ >= std::sqrt(best_d2)) break;
    }
    return best;
}

RegionLabeling clean_labels(const Mesh& m, std::vector<int> face_labels, double min_area_fraction) {
    if (static_cast<int>(face_labels.size()) != m.face_count())
        throw InvalidArgument("label count does not match face count");

    // Split each nonzero label into its face-connected components.
    const int max_label = face_labels.empty() ? 0 : *std::max_element(face_labels.begin(), face_labels.end());
    std::vector<int> split(m.face_count(), 0);
    int next_id = 1;
    for (int l = 1; l <= max_label; ++l)
        for (const auto& comp : label_components(m, face_labels, l)) {
            for (int f : comp) split[f] = next_id;
            ++next_id;
        }

    // Merge small regions into the neighbor sharing the longest boundary.
    std::vector<double> area(next_id, 0.0);
    double total = 0.0;
    for (int f = 0; f < m.face_count(); ++f) {
        const double a = m.face_area(f);
        if (split[f] > 0) {
            area[split[f]] += a;
            total += a;
        }
    }
    std::vector<int> parent(next_id);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    // Smallest first so chains of slivers collapse into substantial regions.
    std::vector<int> order(next_id - 1);
    std::iota(order.begin(), order.end(), 1);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return area[a] < area[b]; });
    for (int r : order) {
        if (find(r) != r || area[r] >= min_area_fraction * total) continue;
        std::map<int, double> shared;
        for (int e = 0; e < m.edge_count(); ++e) {
            if (m.edge_face_count(e) != 2) continue;
            const int a = find(split[m.edge_faces(e)[0]]);
            const int b = find(split[m.edge_faces(e)[1]]);
            const auto [u, v] = m.edges()[e];
            const double len = (m.vertices()[u] - m.vertices()[v]).norm();
            if (a == r && b != r && b > 0) shared[b] += len;
            if (b == r && a != r && a > 0) shared[a] += len;
        }
        if (shared.empty()) {
            // Only outside-area neighbors: the sliver joins label 0.
            parent[r] = 0;
            continue;
        }
        int target = shared.begin()->first;
        for (const auto& [nb, len] : shared)
            if (len > shared[target]) target = nb;
        parent[r] = target;
        area[target] += area[r];
    }

    RegionLabeling out;
    out.face_labels.resize(m.face_count());
    // Compact in ascending original order so clean inputs keep their ids.
    std::map<int, int> compact;
    for (int f = 0; f < m.face_count(); ++f)
        if (split[f] > 0 && find(split[f]) > 0) compact.emplace(find(split[f]), 0);
    int id = 0;
    for (auto& [root, value] : compact) value = ++id;
    for (int f = 0; f < m.face_count(); ++f)
        out.face_labels[f] = split[f] == 0 || find(split[f]) == 0 ? 0 : compact.at(find(split[f]));
    out.K = static_cast<int>(compact.size());
    return out;
}

RegionLabeling transfer_labels(const Mesh& input, const LabeledTemplate& tmpl,
                               const LabelTransferOptions& options) {
    if (tmpl.mesh.vertex_count() == 0 || tmpl.mesh.face_count() == 0)
        throw InvalidArgument("empty template");
    if (static_cast<int>(tmpl.labels.face_labels.size()) != tmpl.mesh.face_count())
        throw InvalidArgument("template labels do not match template faces");

    const Mesh& tm = tmpl.mesh;
    // Template vertex label: majority of incident face labels, ties to the lowest id.
    std::vector<int> tvert_label(tm.vertex_count(), 0);
    for (int v = 0; v < tm.vertex_count(); ++v) {
        std::map<int, int> count;
        for (int f : tm.vertex_faces(v)) ++count[tmpl.labels.face_labels[f]];
        int best = 0, best_n = -1;
        for (const auto& [l, n] : count)
            if (n > best_n) {
                best = l;
                best_n = n;
            }
        tvert_label[v] = best;
    }

    PointGrid grid(tm.vertices());
    std::vector<int> corr(input.vertex_count());
    for (int v = 0; v < input.vertex_count(); ++v) corr[v] = grid.nearest(input.vertices()[v]);

    // Template faces keyed by their sorted corner triple.
    std::map<std::array<int, 3>, int> tface;
    for (int f = 0; f < tm.face_count(); ++f) {
        auto t = tm.triangles()[f];
        std::sort(t.begin(), t.end());
        tface.emplace(t, f);
    }

    std::vector<int> face_labels(input.face_count());
    for (int f = 0; f < input.face_count(); ++f) {
        const auto& t = input.triangles()[f];
        std::array<int, 3> key{corr[t[0]], corr[t[1]], corr[t[2]]};
        std::sort(key.begin(), key.end());
        // A face mapped onto a template face takes that face's label outright.
        if (const auto it = tface.find(key); it != tface.end()) {
            face_labels[f] = tmpl.labels.face_labels[it->second];
            continue;
        }
        face_labels[f] = majority_label(tvert_label[corr[t[0]]], tvert_label[corr[t[1]]],
                                        tvert_label[corr[t[2]]]);
    }
    return clean_labels(input, std::move(face_labels), options.min_area_fraction);
}

}  // namespace planehead
