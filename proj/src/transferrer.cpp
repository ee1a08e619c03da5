#include "planehead/transferrer.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace planehead {

namespace {

using Entry = std::pair<int, double>;

void prune_and_normalize(std::vector<Entry>& w, double threshold) {
    std::erase_if(w, [&](const Entry& e) { return e.second < threshold; });
    double sum = 0.0;
    for (const auto& e : w) sum += e.second;
    for (auto& e : w) e.second /= sum;
}

}  // namespace

SkinningPyramid::SkinningPyramid(const Mesh& m, const RegionLabeling& labels, Options options)
    : options_(options), vertex_count_(m.vertex_count()) {
    if (options.levels < 1) throw InvalidArgument("pyramid needs at least one level");
    if (options.levels > 12) throw InvalidArgument("pyramid level count above 12 rejected");
    if (static_cast<int>(labels.face_labels.size()) != m.face_count())
        throw InvalidArgument("label count does not match face count");
    const int n = m.vertex_count();

    // Level 0: incident face counts per region, normalized.
    std::vector<int> off(n + 1, 0);
    std::vector<Entry> ent;
    std::vector<Entry> scratch;
    for (int v = 0; v < n; ++v) {
        scratch.clear();
        for (int f : m.vertex_faces(v)) {
            const int l = labels.face_labels[f];
            auto it = std::find_if(scratch.begin(), scratch.end(), [&](const Entry& e) { return e.first == l; });
            if (it == scratch.end()) scratch.emplace_back(l, 1.0);
            else it->second += 1.0;
        }
        if (scratch.empty()) scratch.emplace_back(0, 1.0);  // isolated vertex: outside area
        std::sort(scratch.begin(), scratch.end());
        double total = 0.0;
        for (const auto& e : scratch) total += e.second;
        for (auto& e : scratch) e.second /= total;
        ent.insert(ent.end(), scratch.begin(), scratch.end());
        off[v + 1] = static_cast<int>(ent.size());
    }
    offsets_.push_back(std::move(off));
    entries_.push_back(std::move(ent));

    const int K = std::max(labels.K, *std::max_element(labels.face_labels.begin(), labels.face_labels.end()));
    std::vector<double> acc(K + 1, 0.0);
    std::vector<int> touched;
    std::vector<int> cur_off = offsets_.back();
    std::vector<Entry> cur_ent = entries_.back();

    for (int level = 1; level < options.levels; ++level) {
        const int passes = 1 << (level - 1);
        for (int pass = 0; pass < passes; ++pass) {
            std::vector<int> next_off(n + 1, 0);
            std::vector<Entry> next_ent;
            next_ent.reserve(cur_ent.size() * 5 / 4 + 16);
            for (int v = 0; v < n; ++v) {
                const auto nb = m.vertex_neighbors(v);
                if (nb.empty()) {
                    next_ent.insert(next_ent.end(), cur_ent.begin() + cur_off[v], cur_ent.begin() + cur_off[v + 1]);
                } else {
                    touched.clear();
                    for (int j : nb)
                        for (int k = cur_off[j]; k < cur_off[j + 1]; ++k) {
                            const auto [r, w] = cur_ent[k];
                            if (acc[r] == 0.0) touched.push_back(r);
                            acc[r] += w;
                        }
                    std::sort(touched.begin(), touched.end());
                    const double inv = 1.0 / static_cast<double>(nb.size());
                    for (int r : touched) {
                        next_ent.emplace_back(r, acc[r] * inv);
                        acc[r] = 0.0;
                    }
                }
                next_off[v + 1] = static_cast<int>(next_ent.size());
            }
            cur_off = std::move(next_off);
            cur_ent = std::move(next_ent);
        }
        // Prune tiny weights, renormalize, and store the level.
        std::vector<int> lvl_off(n + 1, 0);
        std::vector<Entry> lvl_ent;
        lvl_ent.reserve(cur_ent.size());
        std::vector<Entry> w;
        for (int v = 0; v < n; ++v) {
            w.assign(cur_ent.begin() + cur_off[v], cur_ent.begin() + cur_off[v + 1]);
            prune_and_normalize(w, options.prune_threshold);
            lvl_ent.insert(lvl_ent.end(), w.begin(), w.end());
            lvl_off[v + 1] = static_cast<int>(lvl_ent.size());
        }
        cur_off = lvl_off;
        cur_ent = lvl_ent;
        offsets_.push_back(std::move(lvl_off));
        entries_.push_back(std::move(lvl_ent));
    }
}

std::vector<int> SkinningPyramid::schedule() const {
    std::vector<int> out{0};
    for (int l = 1; l < levels(); ++l) out.push_back(1 << (l - 1));
    return out;
}

RegionWeights SkinningPyramid::interpolated(int v, double scale) const {
    const int top = levels() - 1;
    const int lo = std::clamp(static_cast<int>(std::floor(scale)), 0, top);
    const double frac = lo >= top ? 0.0 : scale - lo;
    const auto a = weights(lo, v);
    if (frac <= 0.0) return {a.begin(), a.end()};
    const auto b = weights(lo + 1, v);
    RegionWeights out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            out.emplace_back(a[i].first, (1.0 - frac) * a[i].second);
            ++i;
        } else if (i == a.size() || b[j].first < a[i].first) {
            out.emplace_back(b[j].first, frac * b[j].second);
            ++j;
        } else {
            out.emplace_back(a[i].first, (1.0 - frac) * a[i].second + frac * b[j].second);
            ++i;
            ++j;
        }
    }
    return out;
}

SkinningPyramid build_skinning_pyramid(const Mesh& m, const RegionLabeling& labels, int levels,
                                       double prune_threshold) {
    return SkinningPyramid(m, labels, {levels, prune_threshold});
}

struct SmoothingScaleSolver::RegionCache {
    std::vector<int> dirichlet;  // global ids, sorted; cache key
    CotanLaplacian laplacian;
    std::vector<int> unknown_local;   // local indices solved for
    std::vector<int> dirichlet_local;
    std::vector<int> isolated_local;  // local unknowns without a path to a Dirichlet vertex
    std::vector<int> isolated_source; // nearest Dirichlet local index per isolated vertex
    Eigen::SparseMatrix<double> L_ud;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    bool has_system = false;
};

SmoothingScaleSolver::SmoothingScaleSolver(const Mesh& m, const RegionLabeling& labels)
    : mesh_(&m), labels_(labels.face_labels) {
    if (static_cast<int>(labels_.size()) != m.face_count())
        throw InvalidArgument("label count does not match face count");
    max_label_ = labels_.empty() ? 0 : *std::max_element(labels_.begin(), labels_.end());
    region_faces_.resize(max_label_ + 1);
    for (int f = 0; f < m.face_count(); ++f) region_faces_[labels_[f]].push_back(f);
    vertex_pairs_.resize(m.vertex_count());
    for (int e = 0; e < m.edge_count(); ++e) {
        if (m.edge_face_count(e) != 2) continue;
        const int a = labels_[m.edge_faces(e)[0]], b = labels_[m.edge_faces(e)[1]];
        if (a == b) continue;
        const RegionPair key = make_pair_key(a, b);
        for (int v : m.edges()[e]) {
            auto& vp = vertex_pairs_[v];
            if (std::find(vp.begin(), vp.end(), key) == vp.end()) vp.push_back(key);
        }
    }
}

SmoothingScaleSolver::~SmoothingScaleSolver() = default;
SmoothingScaleSolver::SmoothingScaleSolver(SmoothingScaleSolver&&) noexcept = default;
SmoothingScaleSolver& SmoothingScaleSolver::operator=(SmoothingScaleSolver&&) noexcept = default;

ScaleField SmoothingScaleSolver::solve(const std::map<RegionPair, double>& boundary_values) {
    const Mesh& m = *mesh_;
    const int n = m.vertex_count();
    ScaleField out;
    out.values.assign(n, 0.0);

    // Dirichlet value per vertex: mean of valued boundaries it lies on.
    std::vector<double> dval(n, 0.0);
    std::vector<char> is_d(n, 0);
    for (int v = 0; v < n; ++v) {
        double sum = 0.0;
        int count = 0;
        for (const auto& key : vertex_pairs_[v])
            if (const auto it = boundary_values.find(key); it != boundary_values.end()) {
                sum += it->second;
                ++count;
            }
        if (count > 0) {
            is_d[v] = 1;
            dval[v] = sum / count;
        }
    }

    std::vector<double> acc(n, 0.0);
    std::vector<int> hits(n, 0);
    std::vector<char> flagged(n, 0);

    for (int r = 0; r <= max_label_; ++r) {
        const auto& faces = region_faces_[r];
        if (faces.empty()) continue;
        // Region is touched by a valued boundary only through its own pairs.
        std::vector<int> dset;
        {
            std::vector<int> verts;
            for (int f : faces)
                for (int v : m.triangles()[f]) verts.push_back(v);
            std::sort(verts.begin(), verts.end());
            verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
            for (int v : verts) {
                bool own = false;
                for (const auto& key : vertex_pairs_[v])
                    if ((key.first == r || key.second == r) && boundary_values.count(key)) own = true;
                if (own) dset.push_back(v);
            }
        }

        auto& slot = cache_[r];
        if (!slot || slot->dirichlet != dset) {
            auto rc = std::make_unique<RegionCache>();
            rc->dirichlet = dset;
            rc->laplacian = cotangent_laplacian_faces(m, faces);
            const auto& lv = rc->laplacian.vertices;
            const int nl = static_cast<int>(lv.size());
            std::vector<char> local_d(nl, 0);
            for (int i = 0; i < nl; ++i)
                local_d[i] = std::binary_search(dset.begin(), dset.end(), lv[i]);

            // Unknowns reachable from a Dirichlet vertex through positive weights.
            std::vector<char> reach(nl, 0);
            std::vector<int> stack;
            for (int i = 0; i < nl; ++i)
                if (local_d[i]) {
                    reach[i] = 1;
                    stack.push_back(i);
                }
            const auto& L = rc->laplacian.matrix;
            while (!stack.empty()) {
                const int i = stack.back();
                stack.pop_back();
                for (Eigen::SparseMatrix<double>::InnerIterator it(L, i); it; ++it) {
                    const int j = static_cast<int>(it.row());
                    if (j != i && it.value() < 0.0 && !reach[j]) {
                        reach[j] = 1;
                        stack.push_back(j);
                    }
                }
            }
            std::vector<int> col(nl, -1);
            for (int i = 0; i < nl; ++i) {
                if (local_d[i]) {
                    rc->dirichlet_local.push_back(i);
                } else if (reach[i]) {
                    col[i] = static_cast<int>(rc->unknown_local.size());
                    rc->unknown_local.push_back(i);
                } else {
                    rc->isolated_local.push_back(i);
                }
            }
            for (int i : rc->isolated_local) {
                int best = -1;
                double bd = std::numeric_limits<double>::infinity();
                for (int d : rc->dirichlet_local) {
                    const double dist = (m.vertices()[lv[d]] - m.vertices()[lv[i]]).squaredNorm();
                    if (dist < bd) {
                        bd = dist;
                        best = d;
                    }
                }
                rc->isolated_source.push_back(best);
            }
            if (!rc->unknown_local.empty()) {
                std::vector<int> dcol(nl, -1);
                for (std::size_t k = 0; k < rc->dirichlet_local.size(); ++k)
                    dcol[rc->dirichlet_local[k]] = static_cast<int>(k);
                std::vector<Eigen::Triplet<double>> tuu, tud;
                for (int c = 0; c < L.outerSize(); ++c)
                    for (Eigen::SparseMatrix<double>::InnerIterator it(L, c); it; ++it) {
                        const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
                        if (col[i] < 0) continue;
                        if (col[j] >= 0) tuu.emplace_back(col[i], col[j], it.value());
                        else if (dcol[j] >= 0) tud.emplace_back(col[i], dcol[j], it.value());
                    }
                const auto nu = static_cast<Eigen::Index>(rc->unknown_local.size());
                Eigen::SparseMatrix<double> Luu(nu, nu);
                Luu.setFromTriplets(tuu.begin(), tuu.end());
                rc->L_ud.resize(nu, static_cast<Eigen::Index>(rc->dirichlet_local.size()));
                rc->L_ud.setFromTriplets(tud.begin(), tud.end());
                rc->solver.compute(Luu);
                if (rc->solver.info() != Eigen::Success)
                    throw Error("smoothing-scale factorization failed in region " + std::to_string(r));
                rc->has_system = true;
                ++factorizations_;
            }
            slot = std::move(rc);
        }

        const RegionCache& rc = *slot;
        const auto& lv = rc.laplacian.vertices;
        if (rc.dirichlet_local.empty()) {
            // Untouched region: scale 0.
            for (int v : lv) {
                acc[v] += 0.0;
                ++hits[v];
            }
            continue;
        }
        Eigen::VectorXd sd(static_cast<Eigen::Index>(rc.dirichlet_local.size()));
        for (std::size_t k = 0; k < rc.dirichlet_local.size(); ++k)
            sd[static_cast<Eigen::Index>(k)] = dval[lv[rc.dirichlet_local[k]]];
        if (rc.has_system) {
            const Eigen::VectorXd su = rc.solver.solve(-(rc.L_ud * sd));
            for (std::size_t k = 0; k < rc.unknown_local.size(); ++k) {
                const int v = lv[rc.unknown_local[k]];
                acc[v] += su[static_cast<Eigen::Index>(k)];
                ++hits[v];
            }
        }
        for (std::size_t k = 0; k < rc.isolated_local.size(); ++k) {
            const int v = lv[rc.isolated_local[k]];
            acc[v] += dval[lv[rc.isolated_source[k]]];
            ++hits[v];
            flagged[v] = 1;
        }
    }

    for (int v = 0; v < n; ++v) {
        if (is_d[v]) out.values[v] = dval[v];
        else if (hits[v] > 0) out.values[v] = acc[v] / hits[v];
        if (flagged[v] && !is_d[v]) out.isolated_vertices.push_back(v);
    }
    if (!out.isolated_vertices.empty())
        spdlog::warn("smoothing scale: {} vertices without a Dirichlet path took the nearest value",
                     out.isolated_vertices.size());
    return out;
}

ScaleField diffuse_smoothing_scale(const Mesh& m, const RegionLabeling& labels,
                                   const std::map<RegionPair, double>& boundary_values) {
    SmoothingScaleSolver solver(m, labels);
    return solver.solve(boundary_values);
}

std::map<RegionPair, double> boundary_smoothing_values(const RegionAdjacency& adjacency,
                                                       const StyleParams& params) {
    std::map<RegionPair, double> out;
    for (const auto& [key, len] : adjacency.boundary_length)
        out[key] = params.smoothing_for(key.first, key.second);
    return out;
}

std::vector<Vec3> apply_transfer(const Mesh& m, std::span<const AffineTransform> transforms,
                                 const SkinningPyramid& pyramid, std::span<const double> scale) {
    const int n = m.vertex_count();
    if (pyramid.vertex_count() != n) throw InvalidArgument("pyramid does not match mesh");
    if (static_cast<int>(scale.size()) != n) throw InvalidArgument("scale field does not match mesh");
    std::vector<Mat34> T(transforms.size() + 1);
    T[0] = AffineTransform::identity().matrix();
    for (std::size_t r = 0; r < transforms.size(); ++r) T[r + 1] = transforms[r].matrix();
    const double top = pyramid.levels() - 1;
    int clamped = 0;

    std::vector<Vec3> out(n);
    for (int v = 0; v < n; ++v) {
        double s = scale[v];
        if (!(s >= 0.0 && s <= top)) {
            ++clamped;
            s = std::isnan(s) ? 0.0 : std::clamp(s, 0.0, top);
        }
        const int lo = static_cast<int>(std::floor(s));
        const double frac = lo >= static_cast<int>(top) ? 0.0 : s - lo;
        Mat34 M = Mat34::Zero();
        for (const auto& [r, w] : pyramid.weights(lo, v)) M += ((1.0 - frac) * w) * T[r];
        if (frac > 0.0)
            for (const auto& [r, w] : pyramid.weights(lo + 1, v)) M += (frac * w) * T[r];
        const Vec3& p = m.vertices()[v];
        out[v] = M.leftCols<3>() * p + M.col(3);
    }
    if (clamped > 0)
        spdlog::warn("apply_transfer: {} smoothing scales outside [0, {}] were clamped", clamped, top);
    return out;
}

nlohmann::json to_json(const SkinningPyramid& p) {
    nlohmann::json j;
    j["levels"] = p.levels();
    j["schedule"] = p.schedule();
    j["prune_threshold"] = p.options().prune_threshold;
    auto& lv = j["weights"] = nlohmann::json::array();
    for (int l = 0; l < p.levels(); ++l) {
        auto level = nlohmann::json::array();
        for (int v = 0; v < p.vertex_count(); ++v) {
            auto w = nlohmann::json::array();
            for (const auto& [r, x] : p.weights(l, v)) w.push_back({r, x});
            level.push_back(std::move(w));
        }
        lv.push_back(std::move(level));
    }
    return j;
}

nlohmann::json to_json(const ScaleField& s) {
    return {{"values", s.values}, {"isolated_vertices", s.isolated_vertices}};
}

}  // namespace planehead
