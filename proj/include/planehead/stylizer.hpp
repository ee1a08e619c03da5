#pragma once

#include "planehead/abstractor.hpp"
#include "planehead/proxy.hpp"
#include "planehead/transforms.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace planehead {

using RegionPair = std::pair<int, int>;  // (i, j), i < j

inline RegionPair make_pair_key(int i, int j) { return {std::min(i, j), std::max(i, j)}; }

struct StyleParams {
    double lambda_d = 1.0;  // exaggeration, [0, 3)
    double lambda_f = 1.0;  // flatness
    double lambda_a = 10.0;
    double lambda_e = 4.0;
    double lambda_v = 60.0;  // vertex and Lanteri terms
    double lambda_n = 1.0;
    double mu = 0.0;         // global planarization, [0, 1]
    double smoothing = 0.0;  // default smoothing scale for every boundary
    std::map<RegionPair, double> edge_scale;      // s_ij multiplies w_ij
    std::map<RegionPair, double> edge_smoothing;  // per-boundary smoothing scale
    std::map<int, double> region_mu;

    double mu_for(int r) const;
    double scale_for(int i, int j) const;
    double smoothing_for(int i, int j) const;
    // Throws InvalidArgument when a weight is negative, lambda_d is outside [0, 3),
    // or a planarization amount is outside [0, 1].
    void validate() const;
};

nlohmann::json to_json(const StyleParams& p);
// Missing keys keep the values already in `base`.
StyleParams style_params_from_json(const nlohmann::json& j, StyleParams base = {});

enum class LanteriKind { absolute_position, relative_position, relative_distance };

const char* to_string(LanteriKind kind);
LanteriKind lanteri_kind_from_string(const std::string& s);

// A constraint over named landmarks; geometry is bound later.
struct LanteriConstraint {
    LanteriKind kind = LanteriKind::relative_distance;
    std::string label;
    std::vector<std::string> landmarks;  // 1 for absolute, 2 for relative kinds
};

nlohmann::json to_json(const std::vector<LanteriConstraint>& cs);
std::vector<LanteriConstraint> lanteri_constraints_from_json(const nlohmann::json& j);

// A constraint bound to reference positions and frozen skinning weights.
struct LanteriTerm {
    LanteriKind kind = LanteriKind::relative_distance;
    std::string label;
    std::array<Vec3, 2> points{Vec3::Zero(), Vec3::Zero()};
    std::array<RegionWeights, 2> weights;
    // Throws InvalidArgument for coincident landmarks in a relative term.
    void check() const;
    double reference_distance() const { return (points[0] - points[1]).norm(); }
};

// Residuals of the three Lanteri forms given current region transforms
// (transforms[r - 1] for region r, region 0 is the identity).
Eigen::VectorXd lanteri_residuals(std::span<const LanteriTerm> terms,
                                  std::span<const AffineTransform> transforms, double lambda_v,
                                  double mean_edge_length);

// w_ij = boundary length / mean boundary length over adjacent region pairs (both >= 1).
std::map<RegionPair, double> default_edge_weights(const AbstractedMesh& a);

struct EnergyBreakdown {
    double style = 0.0;     // sum of squared exaggeration residuals (offset form)
    double flatness = 0.0;
    double area = 0.0;
    double edge = 0.0;
    double vertex = 0.0;
    double normal = 0.0;
    double lanteri = 0.0;
    // lambda_d * sum w_ij n_i.n_j: exaggeration energy without the constant offset.
    double style_dot = 0.0;

    double total() const { return style + flatness + area + edge + vertex + normal + lanteri; }
};

// Residual system over anchor positions.
class StyleProblem {
public:
    StyleProblem(const AbstractedMesh& a, StyleParams params, std::vector<LanteriTerm> lanteri = {});

    const AbstractedMesh& mesh() const { return *mesh_; }
    const StyleParams& params() const { return params_; }
    const std::map<RegionPair, double>& edge_weights() const { return weights_; }
    const std::vector<LanteriTerm>& lanteri() const { return lanteri_; }

    std::vector<PlaneProxy> proxies(std::span<const Vec3> anchors) const;  // index r - 1
    // Proxies of the undeformed anchor loops (the "before" state of each region).
    const std::vector<PlaneProxy>& initial_proxies() const { return initial_; }
    // Full-resolution region planes used for planarization.
    const std::vector<PlaneProxy>& planarization_planes() const { return planes_; }
    std::vector<AffineTransform> region_transforms(std::span<const PlaneProxy> current) const;

    Eigen::VectorXd style_residuals(std::span<const Vec3> anchors,
                                    std::span<const PlaneProxy> current) const;
    Eigen::VectorXd reg_residuals(std::span<const Vec3> anchors,
                                  std::span<const PlaneProxy> current) const;
    Eigen::VectorXd lanteri_residuals(std::span<const PlaneProxy> current) const;
    Eigen::VectorXd residuals(std::span<const Vec3> anchors) const;

    double energy(std::span<const Vec3> anchors) const;  // sum of squared residuals
    EnergyBreakdown breakdown(std::span<const Vec3> anchors) const;

private:
    std::vector<double> loop_area(std::span<const Vec3> anchors) const;

    const AbstractedMesh* mesh_;
    StyleParams params_;
    std::vector<LanteriTerm> lanteri_;
    std::map<RegionPair, double> weights_;
    std::vector<PlaneProxy> initial_;
    std::vector<PlaneProxy> planes_;
    std::vector<std::vector<int>> loop_anchors_;  // all anchors of each region loop
};

enum class Termination {
    function_tolerance,
    gradient_tolerance,
    max_iterations,
    time_budget,
    damping_limit,
    no_free_variables,
};

const char* to_string(Termination t);

struct OptimizeOptions {
    int max_iterations = 200;
    double function_tolerance = 1e-6;
    double gradient_tolerance = 1e-8;
    double fd_step_factor = 1e-6;  // times the abstracted mean edge length
    double time_budget_seconds = 0.0;  // 0: unlimited
    std::optional<std::vector<char>> fixed_override;
    std::optional<std::vector<Vec3>> warm_start;
};

struct OptimizationState {
    std::vector<Vec3> anchors;
    std::vector<char> fixed;
    std::vector<PlaneProxy> proxies;  // index r - 1
    int iterations = 0;
    std::vector<double> energy_trace;  // initial energy, then each accepted step
    Termination termination = Termination::max_iterations;
    EnergyBreakdown breakdown;
};

// Levenberg-Marquardt over the free anchor coordinates with a forward-difference
// Jacobian. Throws Error when the starting energy is not finite.
OptimizationState optimize(const StyleProblem& problem, const OptimizeOptions& options = {});
OptimizationState optimize(const AbstractedMesh& a, const StyleParams& params,
                           const std::vector<LanteriTerm>& lanteri = {},
                           const OptimizeOptions& options = {});

}  // namespace planehead
