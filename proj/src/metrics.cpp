#include "planehead/metrics.hpp"

#include "planehead/mesh_io.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace planehead {

namespace lmn = landmark;

int LandmarkSet::at(const std::string& name) const {
    const auto it = index.find(name);
    if (it == index.end()) throw InvalidArgument("missing landmark: " + name);
    return it->second;
}

void LandmarkSet::validate(int vertex_count) const {
    for (const auto& [name, v] : index)
        if (v < 0 || v >= vertex_count)
            throw InvalidArgument("landmark " + name + " index " + std::to_string(v) + " out of range");
    for (const auto& [name, v] : index) {
        if (name.size() < 2 || name.substr(name.size() - 2) != "_L") continue;
        const std::string other = name.substr(0, name.size() - 2) + "_R";
        if (const auto it = index.find(other); it != index.end() && it->second == v)
            throw InvalidArgument("landmarks " + name + " and " + other + " share vertex " + std::to_string(v));
    }
}

nlohmann::json to_json(const LandmarkSet& lm) {
    nlohmann::json j;
    j["landmarks"] = nlohmann::json::object();
    for (const auto& [name, v] : lm.index) j["landmarks"][name] = v;
    return j;
}

LandmarkSet landmarks_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("landmarks") || !j["landmarks"].is_object())
        throw ParseError("landmark document needs a \"landmarks\" object");
    LandmarkSet lm;
    for (const auto& [name, v] : j["landmarks"].items()) {
        if (!v.is_number_integer()) throw ParseError("landmark " + name + " is not a vertex index");
        lm.index[name] = v.get<int>();
    }
    return lm;
}

LandmarkSet load_landmarks(const std::filesystem::path& path) {
    return landmarks_from_json(read_json_file(path));
}

std::vector<LanteriConstraint> build_lanteri_constraints(const LandmarkSet& lm) {
    using K = LanteriKind;
    static const std::vector<LanteriConstraint> table = {
        {K::relative_distance, "mouth_width", {lmn::mouth_L, lmn::mouth_R}},
        {K::relative_distance, "nose_length", {lmn::nose_bridge, lmn::nose_tip}},
        {K::relative_distance, "chin_to_brow_L", {lmn::chin, lmn::brow_mid_L}},
        {K::relative_distance, "chin_to_brow_R", {lmn::chin, lmn::brow_mid_R}},
        {K::relative_distance, "mouth_to_nostril_L", {lmn::mouth_L, lmn::nostril_L}},
        {K::relative_distance, "mouth_to_nostril_R", {lmn::mouth_R, lmn::nostril_R}},
        {K::relative_distance, "inner_eye_span", {lmn::inner_eye_L, lmn::inner_eye_R}},
        {K::absolute_position, "chin_position", {lmn::chin}},
        {K::absolute_position, "nose_tip_position", {lmn::nose_tip}},
    };
    std::vector<LanteriConstraint> out;
    if (lm.index.empty()) return out;
    for (const auto& c : table) {
        const auto missing = std::find_if(c.landmarks.begin(), c.landmarks.end(),
                                          [&](const std::string& n) { return !lm.has(n); });
        if (missing != c.landmarks.end()) {
            spdlog::warn("skipping Lanteri constraint {}: landmark {} missing", c.label, *missing);
            continue;
        }
        out.push_back(c);
    }
    return out;
}

std::optional<double> MeasureReport::get(char measure) const {
    switch (measure) {
        case 'A': return A;
        case 'B': return B;
        case 'C': return C;
        case 'D': return D;
        default: throw InvalidArgument(std::string("unknown measure ") + measure);
    }
}

namespace {

double plane_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c, const char* what) {
    const Vec3 n = (b - a).cross(c - a);
    const double scale = std::max({(b - a).squaredNorm(), (c - a).squaredNorm(), (c - b).squaredNorm()});
    if (!(n.norm() > 1e-12 * scale)) throw InvalidArgument(std::string("collinear landmarks for ") + what);
    return std::abs(n.normalized().dot(p - a));
}

}  // namespace

MeasureReport eye_socket_measures(const std::map<std::string, Vec3>& pts) {
    MeasureReport r;
    auto has = [&](std::initializer_list<const char*> names) {
        return std::all_of(names.begin(), names.end(), [&](const char* n) { return pts.count(n) > 0; });
    };
    if (!has({lmn::ear_base_L, lmn::ear_base_R})) return r;
    const double span = (pts.at(lmn::ear_base_L) - pts.at(lmn::ear_base_R)).norm();
    if (!(span > 0.0)) throw InvalidArgument("ear-base landmarks coincide");
    auto mid = [&](const char* a, const char* b) { return 0.5 * (pts.at(a) + pts.at(b)); };
    const bool inner = has({lmn::inner_eye_L, lmn::inner_eye_R});
    const bool outer = has({lmn::outer_eye_L, lmn::outer_eye_R});
    if (has({lmn::brow_mid_L, lmn::brow_mid_R, lmn::chin})) {
        const Vec3 &a = pts.at(lmn::brow_mid_L), &b = pts.at(lmn::brow_mid_R), &c = pts.at(lmn::chin);
        if (inner) r.A = plane_distance(mid(lmn::inner_eye_L, lmn::inner_eye_R), a, b, c, "brow-chin plane") / span;
        if (outer) r.B = plane_distance(mid(lmn::outer_eye_L, lmn::outer_eye_R), a, b, c, "brow-chin plane") / span;
    }
    if (has({lmn::nose_bridge, lmn::mouth_L, lmn::mouth_R})) {
        const Vec3 &a = pts.at(lmn::nose_bridge), &b = pts.at(lmn::mouth_L), &c = pts.at(lmn::mouth_R);
        if (inner) r.C = plane_distance(mid(lmn::inner_eye_L, lmn::inner_eye_R), a, b, c, "nose-mouth plane") / span;
        if (outer) r.D = plane_distance(mid(lmn::outer_eye_L, lmn::outer_eye_R), a, b, c, "nose-mouth plane") / span;
    }
    return r;
}

MeasureReport eye_socket_measures(const LandmarkSet& lm, std::span<const Vec3> positions) {
    std::map<std::string, Vec3> pts;
    for (const auto& [name, v] : lm.index) {
        if (v < 0 || v >= static_cast<int>(positions.size()))
            throw InvalidArgument("landmark " + name + " index out of range");
        pts[name] = positions[v];
    }
    return eye_socket_measures(pts);
}

double percent_increase(double human, double sculpt) {
    if (human == 0.0) throw InvalidArgument("percent increase from zero");
    return 100.0 * (sculpt - human) / human;
}

double mean_of(std::vector<double> v) {
    if (v.empty()) throw InvalidArgument("mean of empty set");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
    if (v.empty()) throw InvalidArgument("median of empty set");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ComparisonTable aggregate_measures(std::span<const MeasureReport> human,
                                   std::span<const MeasureReport> sculpt) {
    if (human.empty() || sculpt.empty()) throw InvalidArgument("aggregate_measures needs two nonempty groups");
    ComparisonTable t;
    for (char m : {'A', 'B', 'C', 'D'}) {
        std::vector<double> h, s;
        for (const auto& r : human)
            if (auto v = r.get(m)) h.push_back(*v);
        for (const auto& r : sculpt)
            if (auto v = r.get(m)) s.push_back(*v);
        if (h.empty() || s.empty()) continue;
        MeasureStats st;
        st.human_count = static_cast<int>(h.size());
        st.sculpt_count = static_cast<int>(s.size());
        st.human_mean = mean_of(h);
        st.sculpt_mean = mean_of(s);
        st.human_median = median_of(h);
        st.sculpt_median = median_of(s);
        st.mean_increase = percent_increase(st.human_mean, st.sculpt_mean);
        st.median_increase = percent_increase(st.human_median, st.sculpt_median);
        t.measures[m] = st;
    }
    return t;
}

namespace {

std::string fmt(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

}  // namespace

std::string ComparisonTable::to_csv() const {
    std::ostringstream os;
    os << "statistic,group";
    for (const auto& [m, st] : measures) os << ',' << m;
    os << '\n';
    auto row = [&](const char* stat, const char* group, auto get, int digits) {
        os << stat << ',' << group;
        for (const auto& [m, st] : measures) os << ',' << fmt(get(st), digits);
        os << '\n';
    };
    row("mean", "human", [](const MeasureStats& s) { return s.human_mean; }, 4);
    row("mean", "sculpt", [](const MeasureStats& s) { return s.sculpt_mean; }, 4);
    row("mean", "% increase", [](const MeasureStats& s) { return s.mean_increase; }, 1);
    row("median", "human", [](const MeasureStats& s) { return s.human_median; }, 4);
    row("median", "sculpt", [](const MeasureStats& s) { return s.sculpt_median; }, 4);
    row("median", "% increase", [](const MeasureStats& s) { return s.median_increase; }, 1);
    return os.str();
}

std::string ComparisonTable::to_text() const {
    std::ostringstream os;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-8s %-11s", "", "");
    os << buf;
    for (const auto& [m, st] : measures) {
        std::snprintf(buf, sizeof buf, " %9c", m);
        os << buf;
    }
    os << '\n';
    auto row = [&](const char* stat, const char* group, auto get, int digits) {
        std::snprintf(buf, sizeof buf, "%-8s %-11s", stat, group);
        os << buf;
        for (const auto& [m, st] : measures) {
            std::snprintf(buf, sizeof buf, " %9s", fmt(get(st), digits).c_str());
            os << buf;
        }
        os << '\n';
    };
    row("Mean", "Human", [](const MeasureStats& s) { return s.human_mean; }, 3);
    row("", "Sculpt", [](const MeasureStats& s) { return s.sculpt_mean; }, 3);
    row("", "% Increase", [](const MeasureStats& s) { return s.mean_increase; }, 1);
    row("Median", "Human", [](const MeasureStats& s) { return s.human_median; }, 3);
    row("", "Sculpt", [](const MeasureStats& s) { return s.sculpt_median; }, 3);
    row("", "% Increase", [](const MeasureStats& s) { return s.median_increase; }, 1);
    return os.str();
}

}  // namespace planehead
