#pragma once

#include "planehead/geometry.hpp"
#include "planehead/stylizer.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace planehead {

namespace landmark {
inline constexpr const char* inner_eye_L = "inner_eye_L";
inline constexpr const char* inner_eye_R = "inner_eye_R";
inline constexpr const char* outer_eye_L = "outer_eye_L";
inline constexpr const char* outer_eye_R = "outer_eye_R";
inline constexpr const char* brow_mid_L = "brow_mid_L";
inline constexpr const char* brow_mid_R = "brow_mid_R";
inline constexpr const char* mouth_L = "mouth_L";
inline constexpr const char* mouth_R = "mouth_R";
inline constexpr const char* nose_tip = "nose_tip";
inline constexpr const char* nose_bridge = "nose_bridge";
inline constexpr const char* chin = "chin";
inline constexpr const char* ear_base_L = "ear_base_L";
inline constexpr const char* ear_base_R = "ear_base_R";
inline constexpr const char* ear_notch_L = "ear_notch_L";
inline constexpr const char* ear_notch_R = "ear_notch_R";
inline constexpr const char* nostril_L = "nostril_L";
inline constexpr const char* nostril_R = "nostril_R";
inline constexpr const char* sternum = "sternum";
}  // namespace landmark

// Named fiducials mapped to vertex indices.
struct LandmarkSet {
    std::map<std::string, int> index;

    bool has(const std::string& name) const { return index.count(name) > 0; }
    int at(const std::string& name) const;
    // Throws InvalidArgument for indices outside [0, vertex_count) or a left/right
    // pair sharing one vertex.
    void validate(int vertex_count) const;
};

nlohmann::json to_json(const LandmarkSet& lm);
LandmarkSet landmarks_from_json(const nlohmann::json& j);
LandmarkSet load_landmarks(const std::filesystem::path& path);

// The nine measurements: seven relative distances and two absolute positions.
// Constraints with a missing landmark are skipped with a warning.
std::vector<LanteriConstraint> build_lanteri_constraints(const LandmarkSet& lm);

struct MeasureReport {
    std::optional<double> A, B, C, D;

    // Throws InvalidArgument for letters other than A-D.
    std::optional<double> get(char measure) const;
};

// Unsigned point-plane distances normalized by the ear-base span. Measures whose
// landmarks are missing are left empty; collinear plane landmarks throw InvalidArgument.
MeasureReport eye_socket_measures(const LandmarkSet& lm, std::span<const Vec3> positions);
// Same with named points given directly.
MeasureReport eye_socket_measures(const std::map<std::string, Vec3>& points);

struct MeasureStats {
    double human_mean = 0.0, sculpt_mean = 0.0;
    double human_median = 0.0, sculpt_median = 0.0;
    double mean_increase = 0.0;    // percent
    double median_increase = 0.0;  // percent
    int human_count = 0, sculpt_count = 0;
};

struct ComparisonTable {
    std::map<char, MeasureStats> measures;  // 'A'..'D', present when both groups have values

    std::string to_csv() const;
    std::string to_text() const;
};

double percent_increase(double human, double sculpt);
double mean_of(std::vector<double> v);
double median_of(std::vector<double> v);

// Throws InvalidArgument when either group is empty.
ComparisonTable aggregate_measures(std::span<const MeasureReport> human,
                                   std::span<const MeasureReport> sculpt);

}  // namespace planehead
