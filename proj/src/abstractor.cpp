#include "planehead/abstractor.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace planehead {

std::vector<Vec3> AbstractedMesh::anchor_positions() const {
    std::vector<Vec3> out;
    out.reserve(anchors.size());
    for (const auto& a : anchors) out.push_back(a.position);
    return out;
}

std::vector<std::pair<int, int>> AbstractedMesh::region_pairs() const {
    std::set<std::pair<int, int>> pairs;
    for (const auto& p : polylines)
        if (p.region_right >= 1) pairs.emplace(p.region_right, p.region_left);
    return {pairs.begin(), pairs.end()};
}

namespace {

struct Chain {
    int right = 0, left = 0;
    bool closed = false;
    std::vector<int> verts;  // closed chains repeat the first vertex at the end
};

struct BorderTopology {
    std::vector<char> is_border;
    std::vector<int> right, left;  // per edge
    std::vector<std::vector<int>> vertex_edges;
    std::vector<char> mandatory;
    std::vector<char> fixed;
};

BorderTopology classify(const Mesh& m, const std::vector<int>& L) {
    BorderTopology bt;
    const int E = m.edge_count();
    bt.is_border.assign(E, 0);
    bt.right.assign(E, 0);
    bt.left.assign(E, 0);
    bt.vertex_edges.resize(m.vertex_count());
    std::vector<char> on_boundary(m.vertex_count(), 0);
    for (int e = 0; e < E; ++e) {
        const auto [f0, f1] = m.edge_faces(e);
        const int l0 = L[f0];
        const int l1 = f1 >= 0 ? L[f1] : kOpenBoundary;
        if (f1 < 0) on_boundary[m.edges()[e][0]] = on_boundary[m.edges()[e][1]] = 1;
        if (l0 == l1 || std::max(l0, l1) < 1) continue;
        bt.is_border[e] = 1;
        bt.right[e] = std::min(l0, l1);
        bt.left[e] = std::max(l0, l1);
        for (int v : m.edges()[e]) bt.vertex_edges[v].push_back(e);
    }

    bt.mandatory.assign(m.vertex_count(), 0);
    bt.fixed.assign(m.vertex_count(), 0);
    for (int v = 0; v < m.vertex_count(); ++v) {
        std::set<int> labels;
        for (int f : m.vertex_faces(v)) labels.insert(L[f]);
        if (on_boundary[v]) labels.insert(kOpenBoundary);
        bt.fixed[v] = on_boundary[v] || labels.count(0) > 0;
        if (bt.vertex_edges[v].empty()) continue;
        bool mand = labels.size() >= 3;
        std::map<std::pair<int, int>, int> degree;
        for (int e : bt.vertex_edges[v]) ++degree[{bt.right[e], bt.left[e]}];
        for (const auto& [key, d] : degree)
            if (d != 2) mand = true;
        bt.mandatory[v] = mand;
    }
    return bt;
}

int other_end(const Mesh& m, int e, int v) {
    const auto& ed = m.edges()[e];
    return ed[0] == v ? ed[1] : ed[0];
}

std::vector<Chain> trace_chains(const Mesh& m, BorderTopology& bt) {
    std::vector<Chain> chains;
    std::vector<char> used(m.edge_count(), 0);

    auto walk = [&](int start, int first_edge) {
        Chain c;
        c.right = bt.right[first_edge];
        c.left = bt.left[first_edge];
        c.verts.push_back(start);
        int cur = start, e = first_edge;
        for (;;) {
            used[e] = 1;
            const int next = other_end(m, e, cur);
            c.verts.push_back(next);
            if (next == start) {
                c.closed = true;
                break;
            }
            if (bt.mandatory[next]) break;
            int nxt = -1;
            for (int f : bt.vertex_edges[next])
                if (!used[f] && bt.right[f] == c.right && bt.left[f] == c.left) {
                    nxt = f;
                    break;
                }
            if (nxt < 0) break;
            cur = next;
            e = nxt;
        }
        return c;
    };

    for (int v = 0; v < m.vertex_count(); ++v) {
        if (!bt.mandatory[v]) continue;
        for (int e : bt.vertex_edges[v])
            if (!used[e]) chains.push_back(walk(v, e));
    }
    // Remaining edges form closed cycles without corners.
    for (int e = 0; e < m.edge_count(); ++e) {
        if (!bt.is_border[e] || used[e]) continue;
        // Restart from the lowest vertex on this cycle for determinism.
        int lowest = std::min(m.edges()[e][0], m.edges()[e][1]);
        {
            int cur = m.edges()[e][0], ce = e;
            std::set<int> seen_e{e};
            for (;;) {
                const int next = other_end(m, ce, cur);
                lowest = std::min(lowest, next);
                int nxt = -1;
                for (int f : bt.vertex_edges[next])
                    if (!seen_e.count(f) && bt.is_border[f] && !used[f] && bt.right[f] == bt.right[e] &&
                        bt.left[f] == bt.left[e]) {
                        nxt = f;
                        break;
                    }
                if (nxt < 0) break;
                seen_e.insert(nxt);
                cur = next;
                ce = nxt;
            }
        }
        bt.mandatory[lowest] = 1;
        for (int f : bt.vertex_edges[lowest])
            if (!used[f] && bt.right[f] == bt.right[e] && bt.left[f] == bt.left[e]) {
                chains.push_back(walk(lowest, f));
                break;
            }
    }
    return chains;
}

// Orients a chain so its left region lies on the left (matching that region's face winding).
void orient(const Mesh& m, const std::vector<int>& L, Chain& c) {
    const int a = c.verts[0], b = c.verts[1];
    for (int f : m.vertex_faces(a)) {
        if (L[f] != c.left) continue;
        const auto& t = m.triangles()[f];
        for (int k = 0; k < 3; ++k) {
            if (t[k] == a && t[(k + 1) % 3] == b) return;
            if (t[k] == b && t[(k + 1) % 3] == a) {
                std::reverse(c.verts.begin(), c.verts.end());
                return;
            }
        }
    }
}

std::vector<double> arc_lengths(const Mesh& m, const std::vector<int>& verts) {
    std::vector<double> s(verts.size(), 0.0);
    for (std::size_t k = 1; k < verts.size(); ++k)
        s[k] = s[k - 1] + (m.vertices()[verts[k]] - m.vertices()[verts[k - 1]]).norm();
    return s;
}

// Anchors at evenly spaced arc length along the chain, as indices into the vertex
// path (first and, for open chains, last included). Uses the fewest segments whose
// straight-line spans are all <= spacing.
std::vector<int> place_evenly(const std::vector<double>& s, bool closed, int nseg) {
    const int last = static_cast<int>(s.size()) - 1;
    const double total = s.back();
    std::vector<int> idx{0};
    for (int k = 1; k < nseg; ++k) {
        const double target = total * k / nseg;
        auto it = std::lower_bound(s.begin(), s.end(), target);
        int i = static_cast<int>(it - s.begin());
        if (i > 0 && (i > last || target - s[i - 1] < s[i] - target)) --i;
        i = std::max(i, idx.back() + 1);
        const int room = nseg - k;  // anchors still to place after this one
        i = std::min(i, last - room);
        idx.push_back(i);
    }
    if (!closed) idx.push_back(last);
    return idx;
}

std::vector<int> subsample(const Mesh& m, const std::vector<int>& verts, const std::vector<double>& s,
                           bool closed, double spacing) {
    const int last = static_cast<int>(s.size()) - 1;
    const int lo = std::min(closed ? 3 : 1, last);
    for (int nseg = lo;; ++nseg) {
        std::vector<int> idx = place_evenly(s, closed, nseg);
        if (nseg >= last) return idx;
        bool ok = true;
        for (std::size_t k = 0; k < idx.size() && ok; ++k) {
            const int a = idx[k];
            const int b = k + 1 < idx.size() ? idx[k + 1] : (closed ? 0 : -1);
            if (b < 0) break;
            ok = (m.vertices()[verts[a]] - m.vertices()[verts[b]]).norm() <= spacing;
        }
        if (ok) return idx;
    }
}

struct LoopBuild {
    std::vector<LoopCycles> loops;
    int short_region = 0;  // region whose cycle has < 3 anchors, 0 if none
    int short_polyline = -1;
};

LoopBuild build_loops(int K, const std::vector<BoundaryPolyline>& polylines) {
    LoopBuild out;
    out.loops.resize(K);
    for (int r = 1; r <= K; ++r) {
        struct Seq {
            std::vector<int> anchors;
            int polyline;
            bool closed;
        };
        std::vector<Seq> seqs;
        for (int p = 0; p < static_cast<int>(polylines.size()); ++p) {
            const auto& pl = polylines[p];
            if (pl.region_left == r) seqs.push_back({pl.anchors, p, pl.closed});
            if (pl.region_right == r) {
                std::vector<int> rev(pl.anchors.rbegin(), pl.anchors.rend());
                seqs.push_back({rev, p, pl.closed});
            }
        }
        if (seqs.empty())
            throw InvalidArgument("region " + std::to_string(r) + " has no border loop");

        std::vector<char> used(seqs.size(), 0);
        for (std::size_t s = 0; s < seqs.size(); ++s) {
            if (used[s]) continue;
            used[s] = 1;
            std::vector<int> cycle;
            std::vector<int> members{seqs[s].polyline};
            if (seqs[s].closed) {
                cycle = seqs[s].anchors;
            } else {
                cycle.assign(seqs[s].anchors.begin(), seqs[s].anchors.end() - 1);
                const int start = seqs[s].anchors.front();
                int end = seqs[s].anchors.back();
                while (end != start) {
                    std::size_t found = seqs.size();
                    for (std::size_t t = 0; t < seqs.size(); ++t)
                        if (!used[t] && !seqs[t].closed && seqs[t].anchors.front() == end) {
                            found = t;
                            break;
                        }
                    if (found == seqs.size())
                        throw InvalidArgument("border of region " + std::to_string(r) +
                                              " does not close");
                    used[found] = 1;
                    members.push_back(seqs[found].polyline);
                    cycle.insert(cycle.end(), seqs[found].anchors.begin(),
                                 seqs[found].anchors.end() - 1);
                    end = seqs[found].anchors.back();
                }
            }
            if (cycle.size() < 3 && out.short_region == 0) {
                out.short_region = r;
                // Longest member polyline gets refined.
                int best = members.front();
                for (int p : members)
                    if (polylines[p].length > polylines[best].length) best = p;
                out.short_polyline = best;
            }
            out.loops[r - 1].push_back(std::move(cycle));
        }
    }
    return out;
}

}  // namespace

AbstractedMesh build_abstracted_mesh(const Mesh& m, const RegionLabeling& labels,
                                     const AbstractOptions& options) {
    check_labeling(m, labels);
    const auto& L = labels.face_labels;
    if (labels.K < 1) throw InvalidArgument("labeling has no regions");

    double labeled_area = 0.0;
    for (int f = 0; f < m.face_count(); ++f)
        if (L[f] > 0) labeled_area += m.face_area(f);

    AbstractedMesh a;
    a.K = labels.K;
    a.spacing = std::max(options.spacing_edge_factor * m.mean_edge_length(),
                         options.spacing_area_factor * std::sqrt(labeled_area / labels.K));

    BorderTopology bt = classify(m, L);
    std::vector<Chain> chains = trace_chains(m, bt);

    std::vector<int> anchor_of(m.vertex_count(), -1);
    auto anchor_for = [&](int v) {
        if (anchor_of[v] < 0) {
            anchor_of[v] = static_cast<int>(a.anchors.size());
            a.anchors.push_back({m.vertices()[v], v, bt.fixed[v] != 0});
        }
        return anchor_of[v];
    };

    // Anchor selection per chain, as indices into the chain's vertex path.
    std::vector<std::vector<int>> picks(chains.size());
    std::vector<std::vector<double>> arcs(chains.size());
    for (std::size_t c = 0; c < chains.size(); ++c) {
        orient(m, L, chains[c]);
        arcs[c] = arc_lengths(m, chains[c].verts);
        picks[c] = subsample(m, chains[c].verts, arcs[c], chains[c].closed, a.spacing);
    }

    for (int attempt = 0;; ++attempt) {
        a.anchors.clear();
        std::fill(anchor_of.begin(), anchor_of.end(), -1);
        a.polylines.clear();
        for (std::size_t c = 0; c < chains.size(); ++c) {
            BoundaryPolyline pl;
            pl.region_right = chains[c].right;
            pl.region_left = chains[c].left;
            pl.closed = chains[c].closed;
            pl.vertices = chains[c].verts;
            if (pl.closed) pl.vertices.pop_back();
            pl.length = arcs[c].back();
            for (int i : picks[c]) pl.anchors.push_back(anchor_for(chains[c].verts[i]));
            a.polylines.push_back(std::move(pl));
        }
        LoopBuild lb = build_loops(a.K, a.polylines);
        if (lb.short_region == 0) {
            a.loops = std::move(lb.loops);
            break;
        }
        // Split the longest anchor gap of the offending polyline at its arc midpoint.
        auto& pk = picks[lb.short_polyline];
        const auto& s = arcs[lb.short_polyline];
        std::size_t gap = 0;
        double widest = -1.0;
        for (std::size_t k = 0; k + 1 < pk.size(); ++k)
            if (s[pk[k + 1]] - s[pk[k]] > widest) {
                widest = s[pk[k + 1]] - s[pk[k]];
                gap = k;
            }
        if (gap + 1 >= pk.size() || pk[gap + 1] - pk[gap] < 2 || attempt > 4 * a.K + 16)
            throw InvalidArgument("region " + std::to_string(lb.short_region) +
                                  " border collapses to fewer than 3 anchors");
        const double mid = 0.5 * (s[pk[gap]] + s[pk[gap + 1]]);
        int best = pk[gap] + 1;
        for (int i = pk[gap] + 1; i < pk[gap + 1]; ++i)
            if (std::abs(s[i] - mid) < std::abs(s[best] - mid)) best = i;
        pk.insert(pk.begin() + static_cast<std::ptrdiff_t>(gap) + 1, best);
    }

    // Border edges of the abstracted mesh.
    for (int p = 0; p < static_cast<int>(a.polylines.size()); ++p) {
        const auto& an = a.polylines[p].anchors;
        const std::size_t n = an.size();
        const std::size_t count = a.polylines[p].closed ? n : n - 1;
        for (std::size_t k = 0; k < count; ++k) {
            BorderEdge e{an[k], an[(k + 1) % n], p, 0.0};
            e.rest_length = (a.anchors[e.a].position - a.anchors[e.b].position).norm();
            if (!(e.rest_length > 0.0)) throw InvalidArgument("zero-length abstracted border edge");
            a.edges.push_back(e);
        }
    }
    double total = 0.0;
    for (const auto& e : a.edges) total += e.rest_length;
    a.mean_edge_length = a.edges.empty() ? 0.0 : total / static_cast<double>(a.edges.size());

    // Initial quantities.
    std::vector<Vec3> area_vec(a.K, Vec3::Zero()), centroid_sum(a.K, Vec3::Zero());
    std::vector<double> area_sum(a.K, 0.0);
    for (int f = 0; f < m.face_count(); ++f) {
        if (L[f] <= 0) continue;
        const double ar = m.face_area(f);
        area_vec[L[f] - 1] += m.face_area_vector(f);
        centroid_sum[L[f] - 1] += ar * m.face_centroid(f);
        area_sum[L[f] - 1] += ar;
    }
    const std::vector<Vec3> pos = a.anchor_positions();
    a.initials.resize(a.K);
    for (int r = 1; r <= a.K; ++r) {
        auto& in = a.initials[r - 1];
        const double len = area_vec[r - 1].norm();
        in.surface_normal = len > 0.0 ? Vec3(area_vec[r - 1] / len) : Vec3::UnitZ();
        in.surface_area = area_sum[r - 1];
        in.surface_centroid = area_sum[r - 1] > 0.0 ? Vec3(centroid_sum[r - 1] / area_sum[r - 1])
                                                    : Vec3::Zero();
        const LoopGeometry g = loop_geometry(pos, a.loops[r - 1], in.surface_normal);
        if (g.degenerate_normal)
            spdlog::warn("region {}: degenerate anchor loop normal, using surface normal", r);
        if (!(g.area > 0.0))
            throw InvalidArgument("region " + std::to_string(r) + " anchor loop has no area");
        in.normal = g.normal;
        in.centroid = g.centroid;
        in.area = g.area;
    }

    spdlog::debug("abstracted mesh: {} anchors, {} polylines, {} border edges, spacing {}",
                  a.anchors.size(), a.polylines.size(), a.edges.size(), a.spacing);
    return a;
}

bool is_simple_polygon(const std::vector<Eigen::Vector2d>& poly) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    auto orient2 = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
        const double v = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
        return (v > 0) - (v < 0);
    };
    auto on_segment = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p) {
        return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
               std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
    };
    auto intersects = [&](const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                          const Eigen::Vector2d& q1, const Eigen::Vector2d& q2) {
        const int o1 = orient2(p1, p2, q1), o2 = orient2(p1, p2, q2);
        const int o3 = orient2(q1, q2, p1), o4 = orient2(q1, q2, p2);
        if (o1 != o2 && o3 != o4) return true;
        if (o1 == 0 && on_segment(p1, p2, q1)) return true;
        if (o2 == 0 && on_segment(p1, p2, q2)) return true;
        if (o3 == 0 && on_segment(q1, q2, p1)) return true;
        if (o4 == 0 && on_segment(q1, q2, p2)) return true;
        return false;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            if (intersects(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return false;
        }
    return true;
}

std::vector<std::array<int, 3>> ear_clip(const std::vector<Eigen::Vector2d>& poly) {
    std::vector<int> idx(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) idx[i] = static_cast<int>(i);
    auto cross = [&](int a, int b, int c) {
        const Eigen::Vector2d u = poly[b] - poly[a], v = poly[c] - poly[a];
        return u.x() * v.y() - u.y() * v.x();
    };
    auto inside = [&](int a, int b, int c, int p) {
        return cross(a, b, p) >= 0 && cross(b, c, p) >= 0 && cross(c, a, p) >= 0;
    };
    std::vector<std::array<int, 3>> tris;
    while (idx.size() > 3) {
        const std::size_t n = idx.size();
        bool clipped = false;
        for (std::size_t k = 0; k < n; ++k) {
            const int a = idx[(k + n - 1) % n], b = idx[k], c = idx[(k + 1) % n];
            if (cross(a, b, c) <= 0) continue;
            bool ear = true;
            for (int p : idx)
                if (p != a && p != b && p != c && inside(a, b, c, p)) {
                    ear = false;
                    break;
                }
            if (!ear) continue;
            tris.push_back({a, b, c});
            idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(k));
            clipped = true;
            break;
        }
        if (!clipped) return {};
    }
    tris.push_back({idx[0], idx[1], idx[2]});
    return tris;
}

RegionTriangulation triangulate_regions(const AbstractedMesh& a) {
    std::vector<Vec3> verts = a.anchor_positions();
    std::vector<Triangle> tris;
    RegionTriangulation out;
    for (int r = 1; r <= a.K; ++r) {
        const auto& cycles = a.loop(r);
        const LoopGeometry g = loop_geometry(verts, cycles, a.initial(r).normal);
        bool done = false;
        if (cycles.size() == 1) {
            const auto& cyc = cycles.front();
            const Vec3 n = g.normal;
            const Vec3 u = n.unitOrthogonal();
            const Vec3 v = n.cross(u);
            std::vector<Eigen::Vector2d> poly;
            for (int id : cyc) {
                const Vec3 d = verts[id] - g.centroid;
                poly.emplace_back(d.dot(u), d.dot(v));
            }
            if (is_simple_polygon(poly)) {
                const auto ears = ear_clip(poly);
                if (!ears.empty()) {
                    for (const auto& t : ears) {
                        tris.push_back({cyc[t[0]], cyc[t[1]], cyc[t[2]]});
                        out.face_region.push_back(r);
                    }
                    done = true;
                }
            }
        }
        if (!done) {
            // Centroid fan; adds one vertex.
            const int c = static_cast<int>(verts.size());
            verts.push_back(g.centroid);
            for (const auto& cyc : cycles)
                for (std::size_t k = 0; k < cyc.size(); ++k) {
                    tris.push_back({c, cyc[k], cyc[(k + 1) % cyc.size()]});
                    out.face_region.push_back(r);
                }
            out.fan_fallback_regions.push_back(r);
        }
    }
    out.mesh = Mesh(std::move(verts), std::move(tris));
    return out;
}

namespace {
nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }
Vec3 json_vec(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }
}  // namespace

nlohmann::json to_json(const AbstractedMesh& a) {
    nlohmann::json j;
    j["K"] = a.K;
    j["spacing"] = a.spacing;
    j["mean_edge_length"] = a.mean_edge_length;
    auto& anchors = j["anchors"] = nlohmann::json::array();
    for (const auto& an : a.anchors)
        anchors.push_back({{"position", vec_json(an.position)},
                           {"vertex", an.source_vertex},
                           {"fixed", an.on_open_boundary}});
    auto& polys = j["polylines"] = nlohmann::json::array();
    for (const auto& p : a.polylines)
        polys.push_back({{"regions", {p.region_right, p.region_left}},
                         {"closed", p.closed},
                         {"anchors", p.anchors},
                         {"vertices", p.vertices},
                         {"length", p.length}});
    j["loops"] = a.loops;
    auto& init = j["initials"] = nlohmann::json::array();
    for (const auto& in : a.initials)
        init.push_back({{"area", in.area},
                        {"normal", vec_json(in.normal)},
                        {"centroid", vec_json(in.centroid)},
                        {"surface_normal", vec_json(in.surface_normal)},
                        {"surface_centroid", vec_json(in.surface_centroid)},
                        {"surface_area", in.surface_area}});
    auto& edges = j["edges"] = nlohmann::json::array();
    for (const auto& e : a.edges) edges.push_back({e.a, e.b, e.polyline, e.rest_length});
    return j;
}

AbstractedMesh abstracted_mesh_from_json(const nlohmann::json& j) {
    try {
        AbstractedMesh a;
        a.K = j.at("K").get<int>();
        a.spacing = j.at("spacing").get<double>();
        a.mean_edge_length = j.at("mean_edge_length").get<double>();
        for (const auto& an : j.at("anchors"))
            a.anchors.push_back({json_vec(an.at("position")), an.at("vertex").get<int>(),
                                 an.at("fixed").get<bool>()});
        for (const auto& p : j.at("polylines")) {
            BoundaryPolyline pl;
            pl.region_right = p.at("regions").at(0).get<int>();
            pl.region_left = p.at("regions").at(1).get<int>();
            pl.closed = p.at("closed").get<bool>();
            pl.anchors = p.at("anchors").get<std::vector<int>>();
            pl.vertices = p.at("vertices").get<std::vector<int>>();
            pl.length = p.at("length").get<double>();
            a.polylines.push_back(std::move(pl));
        }
        a.loops = j.at("loops").get<std::vector<LoopCycles>>();
        for (const auto& in : j.at("initials")) {
            RegionInitials ri;
            ri.area = in.at("area").get<double>();
            ri.normal = json_vec(in.at("normal"));
            ri.centroid = json_vec(in.at("centroid"));
            ri.surface_normal = json_vec(in.at("surface_normal"));
            ri.surface_centroid = json_vec(in.at("surface_centroid"));
            ri.surface_area = in.at("surface_area").get<double>();
            a.initials.push_back(ri);
        }
        for (const auto& e : j.at("edges"))
            a.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>(),
                               e.at(3).get<double>()});
        return a;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("abstracted mesh JSON: ") + e.what());
    }
}

}  // namespace planehead
