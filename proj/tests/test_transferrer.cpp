#include "planehead/fixtures.hpp"
#include "planehead/transferrer.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <random>

using namespace planehead;

namespace {

// One-cell-wide strip of right triangles along x, cells [0, n).
struct Strip {
    Mesh mesh;
    RegionLabeling labels;
};

Strip strip(int n) {
    std::vector<Vec3> v;
    for (int i = 0; i <= n; ++i) {
        v.emplace_back(i, 0, 0);
        v.emplace_back(i, 1, 0);
    }
    std::vector<Triangle> t;
    std::vector<int> l;
    for (int i = 0; i < n; ++i) {
        const int a = 2 * i, b = 2 * i + 2, c = 2 * i + 3, d = 2 * i + 1;
        t.push_back({a, b, c});
        t.push_back({a, c, d});
        const int lab = i == 0 ? 2 : (i == n - 1 ? 3 : 1);
        l.push_back(lab);
        l.push_back(lab);
    }
    return {Mesh(v, t), {3, l}};
}

void check_partition(const SkinningPyramid& p) {
    for (int l = 0; l < p.levels(); ++l)
        for (int v = 0; v < p.vertex_count(); ++v) {
            double s = 0;
            for (const auto& [r, w] : p.weights(l, v)) {
                CHECK(w >= 0.0);
                s += w;
            }
            CHECK(std::abs(s - 1.0) <= 1e-12);
        }
}

}  // namespace

TEST_CASE("pyramid level 0 follows the face-count rule") {
    const auto f = fixtures::face(40, 54, 12);
    const SkinningPyramid p = build_skinning_pyramid(f.mesh, f.labels, 4);
    const Mesh& m = f.mesh;
    for (int v = 0; v < m.vertex_count(); ++v) {
        std::map<int, double> count;
        for (int t : m.vertex_faces(v)) count[f.labels.face_labels[t]] += 1.0;
        const double total = static_cast<double>(m.vertex_faces(v).size());
        const auto w = p.weights(0, v);
        REQUIRE(w.size() == count.size());
        for (const auto& [r, x] : w) CHECK(x == doctest::Approx(count.at(r) / total).epsilon(1e-15));
        if (count.size() == 1) CHECK(w[0].second == 1.0);
    }
}

TEST_CASE("pyramid: three faces in one region and one in another") {
    // fan of four triangles around vertex 0
    const Mesh m({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}},
                 {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 1}});
    const RegionLabeling labels{2, {1, 1, 1, 2}};
    const SkinningPyramid p = build_skinning_pyramid(m, labels, 1);
    const auto w = p.weights(0, 0);
    REQUIRE(w.size() == 2);
    CHECK(w[0].first == 1);
    CHECK(w[0].second == 0.75);
    CHECK(w[1].first == 2);
    CHECK(w[1].second == 0.25);
}

TEST_CASE("pyramid partition of unity, schedule and limits") {
    const auto f = fixtures::face(60, 80, 32);
    const SkinningPyramid p = build_skinning_pyramid(f.mesh, f.labels, 8);
    CHECK(p.levels() == 8);
    CHECK(p.schedule() == std::vector<int>{0, 1, 2, 4, 8, 16, 32, 64});
    check_partition(p);
    CHECK_THROWS_AS(build_skinning_pyramid(f.mesh, f.labels, 13), InvalidArgument);
    CHECK_THROWS_AS(build_skinning_pyramid(f.mesh, f.labels, 0), InvalidArgument);
}

TEST_CASE("pyramid smoothing is uniform neighbour averaging") {
    const auto f = fixtures::face(30, 40, 6);
    const Mesh& m = f.mesh;
    SkinningPyramid::Options opt;
    opt.levels = 2;
    opt.prune_threshold = 0.0;
    const SkinningPyramid p(m, f.labels, opt);
    for (int v = 0; v < m.vertex_count(); v += 7) {
        std::map<int, double> expect;
        for (int u : m.vertex_neighbors(v))
            for (const auto& [r, w] : p.weights(0, u)) expect[r] += w / static_cast<double>(m.vertex_neighbors(v).size());
        const auto got = p.weights(1, v);
        REQUIRE(got.size() == expect.size());
        for (const auto& [r, w] : got) CHECK(w == doctest::Approx(expect.at(r)).epsilon(1e-14));
    }
}

TEST_CASE("pyramid interpolation between levels") {
    const auto f = fixtures::face(30, 40, 6);
    const SkinningPyramid p = build_skinning_pyramid(f.mesh, f.labels, 4);
    for (int v = 0; v < f.mesh.vertex_count(); v += 13) {
        const RegionWeights w = p.interpolated(v, 1.25);
        std::map<int, double> expect;
        for (const auto& [r, x] : p.weights(1, v)) expect[r] += 0.75 * x;
        for (const auto& [r, x] : p.weights(2, v)) expect[r] += 0.25 * x;
        double s = 0;
        for (const auto& [r, x] : w) {
            CHECK(x == doctest::Approx(expect.at(r)));
            s += x;
        }
        CHECK(s == doctest::Approx(1.0));
        const RegionWeights top = p.interpolated(v, 3.0);
        const auto last = p.weights(3, v);
        REQUIRE(top.size() == last.size());
        for (std::size_t k = 0; k < top.size(); ++k) CHECK(top[k].second == doctest::Approx(last[k].second));
    }
}

TEST_CASE("diffusion: constant data is reproduced") {
    const auto f = fixtures::face(60, 80, 32);
    const RegionAdjacency adj = region_adjacency(f.mesh, f.labels);
    std::map<RegionPair, double> values;
    for (const auto& [k, len] : adj.boundary_length) values[k] = 2.0;
    const ScaleField s = diffuse_smoothing_scale(f.mesh, f.labels, values);
    for (double x : s.values) CHECK(std::abs(x - 2.0) <= 1e-12);
}

TEST_CASE("diffusion: maximum principle") {
    const auto f = fixtures::face(60, 80, 32);
    const RegionAdjacency adj = region_adjacency(f.mesh, f.labels);
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 7.0);
    for (int trial = 0; trial < 3; ++trial) {
        std::map<RegionPair, double> values;
        double lo = 1e30, hi = -1e30;
        for (const auto& [k, len] : adj.boundary_length) {
            values[k] = u(rng);
            lo = std::min(lo, values[k]);
            hi = std::max(hi, values[k]);
        }
        const ScaleField s = diffuse_smoothing_scale(f.mesh, f.labels, values);
        for (double x : s.values) {
            CHECK(x >= lo - 1e-12);
            CHECK(x <= hi + 1e-12);
        }
    }
}

TEST_CASE("diffusion: path ramp against a dense solve") {
    const int n = 12;
    const Strip st = strip(n);
    const ScaleField s = diffuse_smoothing_scale(st.mesh, st.labels, {{{1, 2}, 0.0}, {{1, 3}, 1.0}});
    CHECK(s.isolated_vertices.empty());
    // dense oracle on region 1
    std::vector<int> faces;
    for (int t = 0; t < st.mesh.face_count(); ++t)
        if (st.labels.face_labels[t] == 1) faces.push_back(t);
    const CotanLaplacian L = cotangent_laplacian_faces(st.mesh, faces);
    const Eigen::MatrixXd D(L.matrix);
    const int nv = static_cast<int>(L.vertices.size());
    std::vector<int> unknown, known;
    Eigen::VectorXd g(nv);
    for (int k = 0; k < nv; ++k) {
        const double x = st.mesh.vertices()[L.vertices[k]].x();
        if (x == 1.0 || x == n - 1.0) {
            known.push_back(k);
            g[k] = x == 1.0 ? 0.0 : 1.0;
        } else {
            unknown.push_back(k);
        }
    }
    Eigen::MatrixXd A(unknown.size(), unknown.size());
    Eigen::VectorXd b(unknown.size());
    for (std::size_t i = 0; i < unknown.size(); ++i) {
        b[i] = 0;
        for (int k : known) b[i] -= D(unknown[i], k) * g[k];
        for (std::size_t j = 0; j < unknown.size(); ++j) A(i, j) = D(unknown[i], unknown[j]);
    }
    const Eigen::VectorXd x = A.fullPivLu().solve(b);
    for (std::size_t i = 0; i < unknown.size(); ++i) {
        const int v = L.vertices[unknown[i]];
        CHECK(std::abs(s.values[v] - x[i]) <= 1e-10);
        CHECK(std::abs(s.values[v] - (st.mesh.vertices()[v].x() - 1.0) / (n - 2.0)) <= 1e-10);
    }
}

TEST_CASE("diffusion: factorizations are reused across value changes") {
    const auto f = fixtures::face(40, 54, 12);
    SmoothingScaleSolver solver(f.mesh, f.labels);
    const RegionAdjacency adj = region_adjacency(f.mesh, f.labels);
    std::map<RegionPair, double> values;
    for (const auto& [k, len] : adj.boundary_length) values[k] = 1.0;
    solver.solve(values);
    const int first = solver.factorization_count();
    CHECK(first > 0);
    for (auto& [k, v] : values) v = 3.0;
    solver.solve(values);
    CHECK(solver.factorization_count() == first);
    // dropping a value changes a Dirichlet set
    values.erase(values.begin());
    solver.solve(values);
    CHECK(solver.factorization_count() > first);
}

TEST_CASE("diffusion: regions without values get zero") {
    const Strip st = strip(8);
    const ScaleField s = diffuse_smoothing_scale(st.mesh, st.labels, {});
    for (double x : s.values) CHECK(x == 0.0);
}

TEST_CASE("diffusion is invariant under region relabeling") {
    const auto f = fixtures::face(40, 54, 12);
    const RegionAdjacency adj = region_adjacency(f.mesh, f.labels);
    std::map<RegionPair, double> values;
    double k = 0.5;
    for (const auto& [key, len] : adj.boundary_length) values[key] = (k += 0.37);
    const ScaleField a = diffuse_smoothing_scale(f.mesh, f.labels, values);
    // permute ids 1..K
    const int K = f.labels.K;
    auto perm = [&](int r) { return r == 0 ? 0 : (r % K) + 1; };
    RegionLabeling relabeled = f.labels;
    for (auto& l : relabeled.face_labels) l = perm(l);
    std::map<RegionPair, double> pv;
    for (const auto& [key, v] : values) pv[make_pair_key(perm(key.first), perm(key.second))] = v;
    const ScaleField b = diffuse_smoothing_scale(f.mesh, relabeled, pv);
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(std::abs(a.values[i] - b.values[i]) <= 1e-10);
}

TEST_CASE("apply_transfer") {
    const auto f = fixtures::face(40, 54, 12);
    const SkinningPyramid p = build_skinning_pyramid(f.mesh, f.labels, 4);
    const int K = f.labels.K;
    const std::vector<double> zero(f.mesh.vertex_count(), 0.0);

    SUBCASE("identity transforms") {
        const std::vector<AffineTransform> T(K);
        const auto out = apply_transfer(f.mesh, T, p, std::vector<double>(f.mesh.vertex_count(), 2.3));
        for (int v = 0; v < f.mesh.vertex_count(); ++v) {
            const Vec3& a = f.mesh.vertices()[v];
            CHECK((out[v] - a).norm() <= 1e-15 * std::max(1.0, a.norm()));
        }
    }
    SUBCASE("single-weight vertices get exactly T_r v") {
        std::vector<AffineTransform> T(K);
        for (int r = 0; r < K; ++r) {
            T[r].linear = Eigen::AngleAxisd(0.1 * (r + 1), Vec3::UnitZ()).toRotationMatrix();
            T[r].translation = Vec3(0.01 * r, 0, 0);
        }
        const auto out = apply_transfer(f.mesh, T, p, zero);
        for (int v = 0; v < f.mesh.vertex_count(); ++v) {
            const auto w = p.weights(0, v);
            if (w.size() != 1) continue;
            const Vec3 expect = w[0].first == 0 ? f.mesh.vertices()[v] : T[w[0].first - 1].apply(f.mesh.vertices()[v]);
            CHECK((out[v] - expect).norm() <= 1e-15);
        }
    }
    SUBCASE("blending translations") {
        const Mesh m({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}}, {{0, 1, 2}, {1, 3, 2}});
        const RegionLabeling labels{2, {1, 2}};
        const SkinningPyramid q = build_skinning_pyramid(m, labels, 1);
        std::vector<AffineTransform> T(2);
        T[0].translation = Vec3(1, 0, 0);
        T[1].translation = Vec3(0, 0, 3);
        const auto out = apply_transfer(m, T, q, std::vector<double>(4, 0.0));
        // vertices 1 and 2 touch one face of each region
        CHECK((out[1] - m.vertices()[1] - Vec3(0.5, 0, 1.5)).norm() < 1e-15);
        CHECK((out[2] - m.vertices()[2] - Vec3(0.5, 0, 1.5)).norm() < 1e-15);
        CHECK((out[0] - m.vertices()[0] - Vec3(1, 0, 0)).norm() < 1e-15);
    }
    SUBCASE("outside vertices stay put and scale is clamped") {
        std::vector<AffineTransform> T(K);
        for (auto& t : T) t.translation = Vec3(0.2, 0.1, -0.3);
        const auto hi = apply_transfer(f.mesh, T, p, std::vector<double>(f.mesh.vertex_count(), 50.0));
        const auto top = apply_transfer(f.mesh, T, p, std::vector<double>(f.mesh.vertex_count(), 3.0));
        for (int v = 0; v < f.mesh.vertex_count(); ++v) {
            CHECK(hi[v] == top[v]);
            const auto w = p.weights(3, v);
            if (w.size() == 1 && w[0].first == 0) CHECK(hi[v] == f.mesh.vertices()[v]);
        }
    }
    SUBCASE("size mismatches") {
        const std::vector<AffineTransform> T(K);
        CHECK_THROWS_AS(apply_transfer(f.mesh, T, p, std::vector<double>(3, 0.0)), InvalidArgument);
    }
}

TEST_CASE("boundary smoothing values") {
    const auto f = fixtures::face(40, 54, 12);
    const RegionAdjacency adj = region_adjacency(f.mesh, f.labels);
    StyleParams params;
    params.smoothing = 1.5;
    const auto first = adj.boundary_length.begin()->first;
    params.edge_smoothing[first] = 4.0;
    const auto values = boundary_smoothing_values(adj, params);
    CHECK(values.size() == adj.boundary_length.size());
    for (const auto& [k, v] : values) CHECK(v == (k == first ? 4.0 : 1.5));
}
