#include "helpers.hpp"

#include "planehead/fixtures.hpp"
#include "planehead/stylizer.hpp"

#include <doctest.h>

#include <random>

using namespace planehead;

namespace {

double normal_angle_deg(const OptimizationState& st) {
    return std::acos(std::clamp(st.proxies[0].normal.dot(st.proxies[1].normal), -1.0, 1.0)) * 180.0 / M_PI;
}

Mesh scaled(const Mesh& m, double s, const Vec3& t = Vec3::Zero()) {
    std::vector<Vec3> v = m.vertices();
    for (auto& p : v) p = s * p + t;
    return Mesh(v, m.triangles());
}

// Anchors of the hinge rigidly refolded to half-angle beta about the y axis.
std::vector<Vec3> refold(const AbstractedMesh& a, double beta) {
    std::vector<Vec3> out;
    for (const auto& an : a.anchors) {
        const Vec3& p = an.position;
        const double r = std::hypot(p.x(), p.z());
        const double sx = p.x() < 0 ? -1.0 : 1.0;
        out.emplace_back(sx * r * std::cos(beta), p.y(), r * std::sin(beta));
    }
    return out;
}

}  // namespace

TEST_CASE("style params validation and JSON") {
    StyleParams p;
    CHECK_NOTHROW(p.validate());
    p.lambda_d = 3.0;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p.lambda_d = -0.1;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = {};
    p.mu = 1.5;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = {};
    p.region_mu[3] = -0.2;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = {};
    p.lambda_a = -1;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);

    StyleParams q;
    q.lambda_d = 1.6;
    q.mu = 0.25;
    q.smoothing = 2.5;
    q.edge_scale[{1, 4}] = 2.0;
    q.edge_smoothing[{2, 3}] = 1.5;
    q.region_mu[5] = 0.75;
    const StyleParams back = style_params_from_json(to_json(q));
    CHECK(to_json(back) == to_json(q));
    CHECK(back.scale_for(4, 1) == 2.0);
    CHECK(back.scale_for(1, 2) == 1.0);
    CHECK(back.smoothing_for(3, 2) == 1.5);
    CHECK(back.smoothing_for(1, 2) == 2.5);
    CHECK(back.mu_for(5) == 0.75);
    CHECK(back.mu_for(6) == 0.25);
    // missing keys keep the base
    const StyleParams partial = style_params_from_json({{"lambda_d", 0.5}}, q);
    CHECK(partial.lambda_d == 0.5);
    CHECK(partial.mu == 0.25);
}

TEST_CASE("default edge weights") {
    SUBCASE("single boundary") {
        const auto h = fixtures::hinge(8, 20);
        const auto w = default_edge_weights(build_abstracted_mesh(h.mesh, h.labels));
        REQUIRE(w.size() == 1);
        CHECK(w.begin()->second == doctest::Approx(1.0));
    }
    SUBCASE("lengths 1 and 3") {
        AbstractedMesh a;
        a.K = 3;
        a.polylines.push_back({1, 2, false, {}, {}, 1.0});
        a.polylines.push_back({2, 3, false, {}, {}, 3.0});
        a.polylines.push_back({kOpenBoundary, 3, false, {}, {}, 7.0});
        const auto w = default_edge_weights(a);
        CHECK(w.at({1, 2}) == doctest::Approx(0.5));
        CHECK(w.at({2, 3}) == doctest::Approx(1.5));
        CHECK(w.size() == 2);
    }
    SUBCASE("mean is one") {
        const auto f = fixtures::face(60, 80, 32);
        const auto w = default_edge_weights(build_abstracted_mesh(f.mesh, f.labels));
        double sum = 0;
        for (const auto& [k, v] : w) sum += v;
        CHECK(sum / static_cast<double>(w.size()) == doctest::Approx(1.0));
    }
}

TEST_CASE("dot-product rewrite identity") {
    std::mt19937_64 rng(2);
    for (int k = 0; k < 1000; ++k) {
        const Vec3 a = testutil::random_unit(rng), b = testutil::random_unit(rng);
        CHECK(std::abs(0.5 * (a + b).squaredNorm() - 1.0 - a.dot(b)) <= 1e-12);
    }
}

TEST_CASE("exaggeration term on hinge configurations") {
    StyleParams p;
    p.lambda_d = 1.0;
    SUBCASE("coplanar squares contribute 2, flatness 0") {
        const auto h = fixtures::hinge(8, 0);
        const AbstractedMesh a = build_abstracted_mesh(h.mesh, h.labels);
        const StyleProblem prob(a, p);
        const EnergyBreakdown b = prob.breakdown(a.anchor_positions());
        CHECK(b.style == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(b.flatness < 1e-28);
    }
    SUBCASE("random fold angles match direct dot products") {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> u(0.0, 170.0);
        for (int k = 0; k < 20; ++k) {
            const auto h = fixtures::hinge(4, u(rng));
            const AbstractedMesh a = build_abstracted_mesh(h.mesh, h.labels);
            p.lambda_d = 0.1 * k;
            const StyleProblem prob(a, p);
            const auto anchors = a.anchor_positions();
            const auto px = prob.proxies(anchors);
            const double w = prob.edge_weights().begin()->second;
            const EnergyBreakdown b = prob.breakdown(anchors);
            CHECK(std::abs(b.style - p.lambda_d * w * (px[0].normal.dot(px[1].normal) + 1.0)) <= 1e-12);
            CHECK(std::abs(b.style_dot - p.lambda_d * w * px[0].normal.dot(px[1].normal)) <= 1e-12);
        }
    }
    SUBCASE("opposing normals contribute 0") {
        const auto h = fixtures::hinge(4, 180);
        const AbstractedMesh a = build_abstracted_mesh(h.mesh, h.labels);
        const StyleProblem prob(a, p);
        CHECK(prob.breakdown(a.anchor_positions()).style < 1e-20);
    }
}

TEST_CASE("flatness residual") {
    const auto h = fixtures::hinge(4, 30);
    const AbstractedMesh a = build_abstracted_mesh(h.mesh, h.labels);
    StyleParams p;
    p.lambda_f = 4.0;
    const StyleProblem prob(a, p);
    auto anchors = a.anchor_positions();
    const auto px = prob.proxies(anchors);
    const Eigen::VectorXd r = prob.style_residuals(anchors, px);
    Eigen::Index k = static_cast<Eigen::Index>(prob.edge_weights().size());
    for (int reg = 1; reg <= a.K; ++reg)
        for (const auto& cyc : a.loop(reg))
            for (int id : cyc) {
                const double expect = 2.0 * px[reg - 1].normal.dot(px[reg - 1].centroid - anchors[id]);
                CHECK(r[k++] == doctest::Approx(expect).epsilon(1e-12));
            }
    CHECK(k == r.size());
}

TEST_CASE("regularizer residuals") {
    const auto f = fixtures::face(40, 54, 12);
    const AbstractedMesh a = build_abstracted_mesh(f.mesh, f.labels);
    const StyleParams p;
    const StyleProblem prob(a, p);
    const auto anchors = a.anchor_positions();

    SUBCASE("undeformed state is zero") {
        const Eigen::VectorXd r = prob.reg_residuals(anchors, prob.proxies(anchors));
        CHECK(r.cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("uniform scale by two") {
        std::vector<Vec3> big = anchors;
        for (auto& v : big) v *= 2.0;
        const Eigen::VectorXd r = prob.reg_residuals(big, prob.proxies(big));
        for (int k = 0; k < a.K; ++k) CHECK(r[k] == doctest::Approx(std::sqrt(p.lambda_a) * (1 - 4.0)));
        for (std::size_t e = 0; e < a.edges.size(); ++e)
            CHECK(r[a.K + static_cast<Eigen::Index>(e)] == doctest::Approx(-std::sqrt(p.lambda_e)));
    }
    SUBCASE("scaling state and initials together") {
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> u(-1, 1);
        std::vector<Vec3> moved = anchors;
        for (auto& v : moved) v += 0.05 * Vec3(u(rng), u(rng), u(rng));
        const Eigen::VectorXd r1 = prob.reg_residuals(moved, prob.proxies(moved));
        const double s = 3.7;
        const Mesh ms = scaled(f.mesh, s);
        const AbstractedMesh as = build_abstracted_mesh(ms, f.labels);
        const StyleProblem ps(as, p);
        std::vector<Vec3> moved_s = moved;
        for (auto& v : moved_s) v *= s;
        const Eigen::VectorXd r2 = ps.reg_residuals(moved_s, ps.proxies(moved_s));
        REQUIRE(r1.size() == r2.size());
        CHECK((r1 - r2).cwiseAbs().maxCoeff() < 1e-9);
    }
    SUBCASE("vertex and normal weights") {
        std::vector<Vec3> moved = anchors;
        moved[0] += Vec3(0.01, 0, 0);
        const Eigen::VectorXd r = prob.reg_residuals(moved, prob.proxies(moved));
        const Eigen::Index off = a.K + static_cast<Eigen::Index>(a.edges.size());
        const double vw = std::sqrt(p.lambda_v / (2 * a.mean_edge_length * a.mean_edge_length));
        CHECK(r[off] == doctest::Approx(vw * 0.01));
        const auto px = prob.proxies(moved);
        const Eigen::Index noff = off + 3 * static_cast<Eigen::Index>(a.anchors.size());
        for (int reg = 1; reg <= a.K; ++reg)
            for (int c = 0; c < 3; ++c)
                CHECK(r[noff + 3 * (reg - 1) + c] ==
                      doctest::Approx(std::sqrt(0.5) * (px[reg - 1].normal[c] - a.initial(reg).normal[c])));
    }
}

TEST_CASE("translation equivariance of the total energy") {
    const auto f = fixtures::face(40, 54, 12);
    const AbstractedMesh a = build_abstracted_mesh(f.mesh, f.labels);
    StyleParams p;
    p.lambda_d = 1.3;
    p.mu = 0.4;
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Vec3> state = a.anchor_positions();
    for (auto& v : state) v += 0.03 * Vec3(u(rng), u(rng), u(rng));
    const Vec3 t(3.5, -2.0, 7.25);
    const AbstractedMesh at = build_abstracted_mesh(scaled(f.mesh, 1.0, t), f.labels);
    std::vector<Vec3> state_t = state;
    for (auto& v : state_t) v += t;
    const double e1 = StyleProblem(a, p).energy(state);
    const double e2 = StyleProblem(at, p).energy(state_t);
    CHECK(std::abs(e1 - e2) <= 1e-10 * std::max(1.0, e1));
}

TEST_CASE("Lanteri residual forms") {
    const double lv = 60.0, ebar = 0.3;
    LanteriTerm abs_t{LanteriKind::absolute_position, "a", {Vec3(0.1, 0.2, 0.3), Vec3(0.1, 0.2, 0.3)},
                      {RegionWeights{{1, 0.7}, {2, 0.3}}, RegionWeights{{1, 0.7}, {2, 0.3}}}};
    LanteriTerm rel_p{LanteriKind::relative_position, "b", {Vec3(1, 0, 0), Vec3(0, 1, 0.5)},
                      {RegionWeights{{1, 1.0}}, RegionWeights{{0, 0.2}, {2, 0.8}}}};
    LanteriTerm rel_d{LanteriKind::relative_distance, "c", {Vec3(-1, 0.3, 0), Vec3(0.4, 0.1, 0.2)},
                      {RegionWeights{{2, 0.5}, {3, 0.5}}, RegionWeights{{1, 0.25}, {3, 0.75}}}};
    const std::vector<LanteriTerm> terms{abs_t, rel_p, rel_d};

    SUBCASE("identity transforms give zero") {
        const std::vector<AffineTransform> T(3);
        CHECK(lanteri_residuals(terms, T, lv, ebar).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("common translation") {
        const Vec3 t(0.3, -0.2, 0.5);
        std::vector<AffineTransform> T(3);
        for (auto& x : T) x.translation = t;
        // weights that include region 0 do not translate fully; use only region >= 1 terms here
        const std::vector<LanteriTerm> sub{abs_t, rel_d};
        const Eigen::VectorXd r = lanteri_residuals(sub, T, lv, ebar);
        REQUIRE(r.size() == 4);
        CHECK((r.head<3>() - std::sqrt(lv / (2 * ebar * ebar)) * t).norm() < 1e-12);
        CHECK(std::abs(r[3]) < 1e-12);
    }
    SUBCASE("random affine set against direct evaluation") {
        std::mt19937_64 rng(21);
        std::uniform_real_distribution<double> u(-1, 1);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<AffineTransform> T(3);
            for (auto& x : T) {
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) x.linear(i, j) = (i == j) + 0.3 * u(rng);
                x.translation = Vec3(u(rng), u(rng), u(rng));
            }
            auto apply = [&](const RegionWeights& w, const Vec3& p) {
                Vec3 q = Vec3::Zero();
                for (const auto& [reg, wt] : w) q += wt * (reg == 0 ? p : T[reg - 1].apply(p));
                return q;
            };
            const Eigen::VectorXd r = lanteri_residuals(terms, T, lv, ebar);
            REQUIRE(r.size() == 7);
            const Vec3 ra = std::sqrt(lv / (2 * ebar * ebar)) * (apply(abs_t.weights[0], abs_t.points[0]) - abs_t.points[0]);
            const Vec3 d0 = rel_p.points[0] - rel_p.points[1];
            const Vec3 rb = std::sqrt(lv / 2) *
                            ((apply(rel_p.weights[0], rel_p.points[0]) - apply(rel_p.weights[1], rel_p.points[1])) - d0) /
                            d0.norm();
            const Vec3 e0 = rel_d.points[0] - rel_d.points[1];
            const double rc = std::sqrt(lv / 2) *
                              ((apply(rel_d.weights[0], rel_d.points[0]) - apply(rel_d.weights[1], rel_d.points[1])).norm() -
                               e0.norm()) /
                              e0.norm();
            CHECK((r.head<3>() - ra).norm() <= 1e-12 * std::max(1.0, ra.norm()));
            CHECK((r.segment<3>(3) - rb).norm() <= 1e-12);
            CHECK(std::abs(r[6] - rc) <= 1e-12);
        }
    }
    SUBCASE("coincident landmarks are rejected") {
        LanteriTerm bad = rel_d;
        bad.points[1] = bad.points[0];
        CHECK_THROWS_AS(bad.check(), InvalidArgument);
        AbstractedMesh a = build_abstracted_mesh(fixtures::cube(), fixtures::cube_face_labels());
        CHECK_THROWS_AS(StyleProblem(a, StyleParams{}, {bad}), InvalidArgument);
    }
}

TEST_CASE("zero-style fixpoint") {
    const auto f = fixtures::face(60, 80, 32);
    const AbstractedMesh a = build_abstracted_mesh(f.mesh, f.labels);
    StyleParams p;
    p.lambda_d = 0.0;
    p.lambda_f = 0.0;
    const OptimizationState st = optimize(a, p);
    const double tol = 1e-8 * f.mesh.bbox_diagonal();
    for (std::size_t i = 0; i < a.anchors.size(); ++i)
        CHECK((st.anchors[i] - a.anchors[i].position).norm() <= tol);
}

TEST_CASE("LM trace, fixed anchors and termination") {
    const auto f = fixtures::face(60, 80, 32);
    const AbstractedMesh a = build_abstracted_mesh(f.mesh, f.labels);
    StyleParams p;
    p.lambda_d = 1.6;
    p.mu = 0.3;
    const OptimizationState st = optimize(a, p);
    CHECK(st.iterations > 0);
    CHECK(st.iterations <= 200);
    for (std::size_t k = 1; k < st.energy_trace.size(); ++k) CHECK(st.energy_trace[k] < st.energy_trace[k - 1]);
    for (std::size_t i = 0; i < a.anchors.size(); ++i)
        if (a.anchors[i].on_open_boundary) {
            CHECK(st.fixed[i]);
            CHECK(st.anchors[i].x() == a.anchors[i].position.x());
            CHECK(st.anchors[i].y() == a.anchors[i].position.y());
            CHECK(st.anchors[i].z() == a.anchors[i].position.z());
        }
    CHECK(st.termination != Termination::damping_limit);
    CHECK(st.breakdown.total() == doctest::Approx(st.energy_trace.back()));

    OptimizeOptions capped;
    capped.max_iterations = 1;
    CHECK(optimize(a, p, {}, capped).iterations == 1);

    OptimizeOptions warm;
    warm.warm_start = st.anchors;
    const OptimizationState again = optimize(a, p, {}, warm);
    CHECK(again.energy_trace.front() == doctest::Approx(st.energy_trace.back()));
    CHECK(again.iterations <= 3);
}

TEST_CASE("no free variables and bad starts") {
    const auto h = fixtures::hinge(4, 30);
    const AbstractedMesh a = build_abstracted_mesh(h.mesh, h.labels);
    const OptimizationState st = optimize(a, StyleParams{});
    CHECK(st.termination == Termination::no_free_variables);
    OptimizeOptions o;
    o.fixed_override = std::vector<char>(a.anchors.size(), 0);
    o.warm_start = a.anchor_positions();
    (*o.warm_start)[1] = Vec3(std::nan(""), 0, 0);
    CHECK_THROWS_AS(optimize(a, StyleParams{}, {}, o), Error);
    o.fixed_override = std::vector<char>(1, 0);
    CHECK_THROWS_AS(optimize(a, StyleParams{}, {}, o), InvalidArgument);
}

TEST_CASE("finite-difference gradient matches J^T r") {
    const auto f = fixtures::face(40, 54, 12);
    const AbstractedMesh a = build_abstracted_mesh(f.mesh, f.labels);
    StyleParams p;
    p.lambda_d = 1.1;
    p.mu = 0.5;
    const StyleProblem prob(a, p);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Vec3> x = a.anchor_positions();
    for (auto& v : x) v += 0.02 * Vec3(u(rng), u(rng), u(rng));
    const Eigen::VectorXd r = prob.residuals(x);
    const double h = 1e-6 * a.mean_edge_length;
    for (std::size_t i = 0; i < x.size(); i += 3)
        for (int c = 0; c < 3; ++c) {
            std::vector<Vec3> xp = x, xm = x;
            xp[i][c] += h;
            xm[i][c] -= h;
            const Eigen::VectorXd rp = prob.residuals(xp);
            const double jtr = 2.0 * ((rp - r) / h).dot(r);
            const double grad = (prob.energy(xp) - prob.energy(xm)) / (2 * h);
            CHECK(std::abs(jtr - grad) <= 1e-4 * std::max(std::abs(grad), 1e-3));
        }
}

TEST_CASE("hinge exaggeration is monotone and matches a 1-D oracle") {
    const auto h = fixtures::hinge(8, 30);
    const AbstractedMesh a = build_abstracted_mesh(h.mesh, h.labels);
    std::vector<char> fixed(a.anchors.size());
    for (std::size_t i = 0; i < fixed.size(); ++i) fixed[i] = std::abs(a.anchors[i].position.x()) < 1e-12;
    OptimizeOptions o;
    o.fixed_override = fixed;
    double previous = -1.0;
    for (double ld : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5}) {
        StyleParams p;
        p.lambda_d = ld;
        const StyleProblem prob(a, p);
        const OptimizationState st = optimize(prob, o);
        const double angle = normal_angle_deg(st);
        if (ld > 0) CHECK(angle > previous);
        previous = angle;
        // dense search over the rigid fold family
        double best_beta = 0, best_e = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= 18000; ++k) {
            const double beta = (k * 0.005) * M_PI / 180.0;
            const double e = prob.energy(refold(a, beta));
            if (e < best_e) {
                best_e = e;
                best_beta = beta;
            }
        }
        CHECK(std::abs(angle - 2 * best_beta * 180 / M_PI) <= 1.0);
    }
}
