#pragma once

#include "planehead/mesh.hpp"

#include <cstdint>
#include <vector>

namespace planehead {

struct VsaProxy {
    int region = 0;
    Vec3 normal = Vec3::UnitZ();
    int seed_face = -1;
};

struct VsaResult {
    RegionLabeling labels;
    std::vector<VsaProxy> proxies;
    // L2,1 energy after every Lloyd iteration (partition + refit).
    std::vector<double> energy_trace;
    int iterations = 0;
};

// Variational shape approximation with L2,1 (normal) error. Regions are 1..K.
// Throws InvalidArgument when K < 1, K > face count, or the mesh is disconnected.
VsaResult vsa_segment(const Mesh& m, int K, int max_iters = 50, std::uint64_t seed = 0);

// sum_t A_t |n_t - n_{r(t)}|^2, proxies indexed by region - 1.
double vsa_energy(const Mesh& m, const RegionLabeling& labels, const std::vector<VsaProxy>& proxies);

struct LabeledTemplate {
    Mesh mesh;
    RegionLabeling labels;
};

struct LabelTransferOptions {
    // Regions below this fraction of the total labeled area merge into a neighbor.
    double min_area_fraction = 1e-3;
};

// Nearest-vertex label transfer from a template already aligned to `input`.
RegionLabeling transfer_labels(const Mesh& input, const LabeledTemplate& tmpl,
                               const LabelTransferOptions& options = {});

// Majority of three vertex labels; all-distinct ties go to the lowest id.
int majority_label(int a, int b, int c);

// Splits face-disconnected components of every nonzero label into separate regions,
// merges tiny regions into their longest-boundary neighbor and compacts ids to 1..K.
RegionLabeling clean_labels(const Mesh& m, std::vector<int> face_labels,
                            double min_area_fraction = 1e-3);

// Brute-force-free nearest neighbour lookup over a fixed point set (uniform grid).
class PointGrid {
public:
    explicit PointGrid(const std::vector<Vec3>& points);
    int nearest(const Vec3& q) const;

private:
    std::int64_t cell_key(int x, int y, int z) const;
    std::array<int, 3> cell_of(const Vec3& p) const;

    const std::vector<Vec3>& points_;
    Vec3 origin_;
    double cell_ = 1.0;
    std::array<int, 3> dims_{1, 1, 1};
    std::vector<int> offsets_, items_;
};

}  // namespace planehead
