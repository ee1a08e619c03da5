#pragma once

#include "planehead/geometry.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace testutil {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("planehead_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline planehead::Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    planehead::Vec3 v;
    do {
        v = {g(rng), g(rng), g(rng)};
    } while (v.norm() < 1e-6);
    return v.normalized();
}

}  // namespace testutil
