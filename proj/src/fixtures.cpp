#include "planehead/fixtures.hpp"

#include "planehead/mesh_io.hpp"
#include "planehead/segmenter.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace planehead::fixtures {

Mesh cube() {
    std::vector<Vec3> v;
    for (int i = 0; i < 8; ++i) v.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
    const int quads[6][4] = {{0, 4, 6, 2}, {1, 3, 7, 5}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 2, 3, 1}, {4, 5, 7, 6}};
    std::vector<Triangle> t;
    for (const auto& q : quads) {
        t.push_back({q[0], q[1], q[2]});
        t.push_back({q[0], q[2], q[3]});
    }
    return Mesh(std::move(v), std::move(t));
}

RegionLabeling cube_face_labels() {
    RegionLabeling l;
    l.K = 6;
    for (int f = 0; f < 12; ++f) l.face_labels.push_back(f / 2 + 1);
    return l;
}

namespace {

// (nx x ny) vertex grid; the cell diagonal mirrors at x = 0 so the mesh is symmetric.
std::vector<Triangle> grid_triangles(int nx, int ny, bool mirror_diagonal) {
    std::vector<Triangle> t;
    t.reserve(2 * (nx - 1) * (ny - 1));
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            const int a = j * nx + i, b = a + 1, c = a + nx + 1, d = a + nx;
            if (mirror_diagonal && 2 * i + 1 < nx - 1) {
                t.push_back({a, b, d});
                t.push_back({b, c, d});
            } else {
                t.push_back({a, b, c});
                t.push_back({a, c, d});
            }
        }
    return t;
}

double gauss(double x, double y, double cx, double cy, double sx, double sy) {
    const double dx = (x - cx) / sx, dy = (y - cy) / sy;
    return std::exp(-0.5 * (dx * dx + dy * dy));
}

constexpr double kHalfWidth = 1.2, kHalfHeight = 1.6;
constexpr double kFaceRx = 0.95, kFaceRy = 1.25;

struct Seed {
    double x, y;
};

// Region seeds loosely following the planes of the head; pairs are mirrored.
std::vector<Seed> face_seeds() {
    const std::vector<Seed> midline = {{0, 0.95}, {0, 0.62}, {0, 0.30}, {0, -0.12}, {0, -0.42}, {0, -0.95}};
    const std::vector<Seed> side = {{0.35, 0.85}, {0.65, 0.80}, {0.38, 0.50}, {0.33, 0.27}, {0.70, 0.35},
                                    {0.42, 0.10}, {0.14, 0.06}, {0.35, -0.08}, {0.64, 0.02}, {0.55, -0.40},
                                    {0.25, -0.58}, {0.60, -0.78}, {0.25, -0.90}};
    std::vector<Seed> out;
    // Interleave so that any prefix stays roughly symmetric.
    std::size_t m = 0;
    for (const auto& s : side) {
        if (m < midline.size()) out.push_back(midline[m++]);
        out.push_back(s);
        out.push_back({-s.x, s.y});
    }
    while (m < midline.size()) out.push_back(midline[m++]);
    return out;
}

const std::map<std::string, Seed>& landmark_points() {
    static const std::map<std::string, Seed> pts = {
        {landmark::inner_eye_L, {0.20, 0.28}},  {landmark::inner_eye_R, {-0.20, 0.28}},
        {landmark::outer_eye_L, {0.55, 0.28}},  {landmark::outer_eye_R, {-0.55, 0.28}},
        {landmark::brow_mid_L, {0.36, 0.52}},   {landmark::brow_mid_R, {-0.36, 0.52}},
        {landmark::mouth_L, {0.22, -0.53}},     {landmark::mouth_R, {-0.22, -0.53}},
        {landmark::nose_tip, {0.0, -0.18}},     {landmark::nose_bridge, {0.0, 0.36}},
        {landmark::chin, {0.0, -1.0}},          {landmark::ear_base_L, {1.1, 0.0}},
        {landmark::ear_base_R, {-1.1, 0.0}},    {landmark::ear_notch_L, {1.1, 0.15}},
        {landmark::ear_notch_R, {-1.1, 0.15}},  {landmark::nostril_L, {0.13, -0.20}},
        {landmark::nostril_R, {-0.13, -0.20}},
    };
    return pts;
}

}  // namespace

Mesh grid(int n, double size, double x0, double y0) {
    if (n < 2) throw InvalidArgument("grid needs n >= 2");
    std::vector<Vec3> v;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) v.emplace_back(x0 + size * i / (n - 1), y0 + size * j / (n - 1), 0.0);
    return Mesh(std::move(v), grid_triangles(n, n, false));
}

Hinge hinge(int n, double fold_degrees) {
    if (n < 1) throw InvalidArgument("hinge needs n >= 1");
    const int nx = 2 * n + 1, ny = n + 1;
    const double beta = 0.5 * fold_degrees * std::numbers::pi / 180.0;
    std::vector<Vec3> v;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double x = -1.0 + 2.0 * i / (nx - 1), y = static_cast<double>(j) / n;
            v.emplace_back(x * std::cos(beta), y, std::abs(x) * std::sin(beta));
        }
    Hinge h{Mesh(std::move(v), grid_triangles(nx, ny, false)), {}};
    h.labels.K = 2;
    for (int f = 0; f < h.mesh.face_count(); ++f)
        h.labels.face_labels.push_back(h.mesh.face_centroid(f).x() < 0.0 ? 1 : 2);
    return h;
}

Mesh uv_sphere(int rings, int segments) {
    if (rings < 1 || segments < 3) throw InvalidArgument("uv_sphere needs rings >= 1, segments >= 3");
    std::vector<Vec3> v;
    v.emplace_back(0, 0, 1);
    for (int r = 1; r <= rings; ++r) {
        const double th = std::numbers::pi * r / (rings + 1);
        for (int s = 0; s < segments; ++s) {
            const double ph = 2.0 * std::numbers::pi * s / segments;
            v.emplace_back(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
        }
    }
    v.emplace_back(0, 0, -1);
    const int south = static_cast<int>(v.size()) - 1;
    auto idx = [&](int r, int s) { return 1 + (r - 1) * segments + (s % segments); };
    std::vector<Triangle> t;
    for (int s = 0; s < segments; ++s) t.push_back({0, idx(1, s), idx(1, s + 1)});
    for (int r = 1; r < rings; ++r)
        for (int s = 0; s < segments; ++s) {
            t.push_back({idx(r, s), idx(r + 1, s), idx(r + 1, s + 1)});
            t.push_back({idx(r, s), idx(r + 1, s + 1), idx(r, s + 1)});
        }
    for (int s = 0; s < segments; ++s) t.push_back({south, idx(rings, s + 1), idx(rings, s)});
    return Mesh(std::move(v), std::move(t));
}

Mesh icosphere(int levels) {
    const double p = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {{-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
                           {0, -1, -p}, {0, 1, -p}, {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}};
    for (auto& x : v) x.normalize();
    std::vector<Triangle> t = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                               {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                               {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                               {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int l = 0; l < levels; ++l) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            if (auto it = mid.find(key); it != mid.end()) return it->second;
            v.push_back((v[a] + v[b]).normalized());
            return mid[key] = static_cast<int>(v.size()) - 1;
        };
        std::vector<Triangle> next;
        for (const auto& [a, b, c] : t) {
            const int ab = midpoint(a, b), bc = midpoint(b, c), ca = midpoint(c, a);
            next.push_back({a, ab, ca});
            next.push_back({b, bc, ab});
            next.push_back({c, ca, bc});
            next.push_back({ab, bc, ca});
        }
        t = std::move(next);
    }
    return Mesh(std::move(v), std::move(t));
}

double face_height(double x, double y) {
    const double q = (x / 1.25) * (x / 1.25) + (y / 1.7) * (y / 1.7);
    double z = 0.8 * std::max(0.0, 1.0 - q);
    for (double s : {-1.0, 1.0}) {
        z -= 0.14 * gauss(x, y, s * 0.36, 0.28, 0.16, 0.11);  // eye socket
        z += 0.07 * gauss(x, y, s * 0.36, 0.50, 0.22, 0.07);  // brow ridge
        z += 0.06 * gauss(x, y, s * 0.50, -0.15, 0.20, 0.20); // cheek
        z += 0.05 * gauss(x, y, s * 0.12, -0.16, 0.06, 0.06); // nostril wing
    }
    // Nose: a ridge rising from the bridge to the tip, then falling off.
    const double t = std::clamp((0.36 - y) / 0.54, 0.0, 1.0);
    const double below = std::max(0.0, -0.18 - y);
    z += 0.22 * t * std::exp(-0.5 * (x / 0.07) * (x / 0.07)) * std::exp(-0.5 * (below / 0.05) * (below / 0.05));
    z += 0.06 * gauss(x, y, 0.0, -0.50, 0.20, 0.05);   // lips
    z -= 0.02 * gauss(x, y, 0.0, -0.56, 0.22, 0.02);   // mouth line
    z += 0.10 * gauss(x, y, 0.0, -0.95, 0.20, 0.12);   // chin
    return z;
}

Face face(int nx, int ny, int K) {
    if (nx < 8 || ny < 8) throw InvalidArgument("face grid too small");
    const auto seeds = face_seeds();
    if (K < 1 || K > static_cast<int>(seeds.size())) throw InvalidArgument("face fixture K must be in [1, 32]");
    std::vector<Vec3> v;
    v.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double x = -kHalfWidth + 2.0 * kHalfWidth * i / (nx - 1);
            const double y = -kHalfHeight + 2.0 * kHalfHeight * j / (ny - 1);
            v.emplace_back(x, y, face_height(x, y));
        }
    Face out{Mesh(std::move(v), grid_triangles(nx, ny, true)), {}, {}};

    std::vector<int> labels(out.mesh.face_count(), 0);
    for (int f = 0; f < out.mesh.face_count(); ++f) {
        const Vec3 c = out.mesh.face_centroid(f);
        const double q = (c.x() / kFaceRx) * (c.x() / kFaceRx) + (c.y() / kFaceRy) * (c.y() / kFaceRy);
        if (q > 1.0) continue;
        int best = 0;
        double bd = 1e300;
        for (int s = 0; s < K; ++s) {
            const double d = (c.x() - seeds[s].x) * (c.x() - seeds[s].x) + (c.y() - seeds[s].y) * (c.y() - seeds[s].y);
            if (d < bd) {
                bd = d;
                best = s + 1;
            }
        }
        labels[f] = best;
    }
    out.labels = clean_labels(out.mesh, std::move(labels));

    for (const auto& [name, p] : landmark_points()) {
        int best = 0;
        double bd = 1e300;
        for (int i = 0; i < out.mesh.vertex_count(); ++i) {
            const Vec3& q = out.mesh.vertices()[i];
            const double d = (q.x() - p.x) * (q.x() - p.x) + (q.y() - p.y) * (q.y() - p.y);
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        out.landmarks.index[name] = best;
    }
    return out;
}

void write_all(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const Mesh c = cube();
    save_obj(dir / "cube.obj", c.vertices(), c.triangles());
    save_labels(dir / "cube_labels.json", cube_face_labels());
    const Hinge h = hinge();
    save_obj(dir / "hinge.obj", h.mesh.vertices(), h.mesh.triangles());
    save_labels(dir / "hinge_labels.json", h.labels);
    const Mesh s = uv_sphere(150, 200);
    save_ply(dir / "sphere30k.ply", s.vertices(), s.triangles());
    const Face f = face();
    save_ply(dir / "face.ply", f.mesh.vertices(), f.mesh.triangles());
    save_labels(dir / "face_labels.json", f.labels);
    write_json_file(dir / "face_landmarks.json", to_json(f.landmarks));
    const Face t = face(60, 80);
    save_ply(dir / "template.ply", t.mesh.vertices(), t.mesh.triangles());
    save_labels(dir / "template_labels.json", t.labels);
}

}  // namespace planehead::fixtures
