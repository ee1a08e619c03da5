#include "planehead/stylizer.hpp"

#include <spdlog/spdlog.h>

#include <Eigen/Cholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace planehead {

double StyleParams::mu_for(int r) const {
    const auto it = region_mu.find(r);
    return it == region_mu.end() ? mu : it->second;
}

double StyleParams::scale_for(int i, int j) const {
    const auto it = edge_scale.find(make_pair_key(i, j));
    return it == edge_scale.end() ? 1.0 : it->second;
}

double StyleParams::smoothing_for(int i, int j) const {
    const auto it = edge_smoothing.find(make_pair_key(i, j));
    return it == edge_smoothing.end() ? smoothing : it->second;
}

void StyleParams::validate() const {
    auto nonneg = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw InvalidArgument(std::string(name) + " must be a finite value >= 0");
    };
    nonneg(lambda_d, "lambda_d");
    nonneg(lambda_f, "lambda_f");
    nonneg(lambda_a, "lambda_a");
    nonneg(lambda_e, "lambda_e");
    nonneg(lambda_v, "lambda_v");
    nonneg(lambda_n, "lambda_n");
    nonneg(smoothing, "smoothing");
    if (!(lambda_d < 3.0)) throw InvalidArgument("lambda_d must lie in [0, 3)");
    auto unit = [](double v, const std::string& name) {
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(name + " must lie in [0, 1]");
    };
    unit(mu, "mu");
    for (const auto& [r, m] : region_mu) unit(m, "mu for region " + std::to_string(r));
    for (const auto& [k, s] : edge_scale) nonneg(s, "edge scale");
    for (const auto& [k, s] : edge_smoothing) nonneg(s, "edge smoothing");
}

namespace {

nlohmann::json pair_map_json(const std::map<RegionPair, double>& m) {
    auto arr = nlohmann::json::array();
    for (const auto& [k, v] : m) arr.push_back({{"regions", {k.first, k.second}}, {"value", v}});
    return arr;
}

std::map<RegionPair, double> pair_map_from_json(const nlohmann::json& arr) {
    std::map<RegionPair, double> out;
    for (const auto& e : arr) {
        const int i = e.at("regions").at(0).get<int>();
        const int j = e.at("regions").at(1).get<int>();
        out[make_pair_key(i, j)] = e.at("value").get<double>();
    }
    return out;
}

}  // namespace

nlohmann::json to_json(const StyleParams& p) {
    nlohmann::json j;
    j["lambda_d"] = p.lambda_d;
    j["lambda_f"] = p.lambda_f;
    j["lambda_a"] = p.lambda_a;
    j["lambda_e"] = p.lambda_e;
    j["lambda_v"] = p.lambda_v;
    j["lambda_n"] = p.lambda_n;
    j["mu"] = p.mu;
    j["smoothing"] = p.smoothing;
    j["edge_scale"] = pair_map_json(p.edge_scale);
    j["edge_smoothing"] = pair_map_json(p.edge_smoothing);
    auto mus = nlohmann::json::array();
    for (const auto& [r, m] : p.region_mu) mus.push_back({{"region", r}, {"mu", m}});
    j["region_mu"] = mus;
    return j;
}

StyleParams style_params_from_json(const nlohmann::json& j, StyleParams base) {
    try {
        auto get = [&](const char* key, double& out) {
            if (j.contains(key)) out = j.at(key).get<double>();
        };
        get("lambda_d", base.lambda_d);
        get("lambda_f", base.lambda_f);
        get("lambda_a", base.lambda_a);
        get("lambda_e", base.lambda_e);
        get("lambda_v", base.lambda_v);
        get("lambda_n", base.lambda_n);
        get("mu", base.mu);
        get("smoothing", base.smoothing);
        if (j.contains("edge_scale")) base.edge_scale = pair_map_from_json(j.at("edge_scale"));
        if (j.contains("edge_smoothing"))
            base.edge_smoothing = pair_map_from_json(j.at("edge_smoothing"));
        if (j.contains("region_mu")) {
            base.region_mu.clear();
            for (const auto& e : j.at("region_mu"))
                base.region_mu[e.at("region").get<int>()] = e.at("mu").get<double>();
        }
        return base;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("style params JSON: ") + e.what());
    }
}

const char* to_string(LanteriKind kind) {
    switch (kind) {
        case LanteriKind::absolute_position: return "absolute_position";
        case LanteriKind::relative_position: return "relative_position";
        case LanteriKind::relative_distance: return "relative_distance";
    }
    return "unknown";
}

LanteriKind lanteri_kind_from_string(const std::string& s) {
    if (s == "absolute_position") return LanteriKind::absolute_position;
    if (s == "relative_position") return LanteriKind::relative_position;
    if (s == "relative_distance") return LanteriKind::relative_distance;
    throw ParseError("unknown Lanteri constraint kind '" + s + "'");
}

nlohmann::json to_json(const std::vector<LanteriConstraint>& cs) {
    auto arr = nlohmann::json::array();
    for (const auto& c : cs)
        arr.push_back({{"kind", to_string(c.kind)}, {"label", c.label}, {"landmarks", c.landmarks}});
    return {{"constraints", arr}};
}

std::vector<LanteriConstraint> lanteri_constraints_from_json(const nlohmann::json& j) {
    try {
        std::vector<LanteriConstraint> out;
        for (const auto& e : j.at("constraints")) {
            LanteriConstraint c;
            c.kind = lanteri_kind_from_string(e.at("kind").get<std::string>());
            c.label = e.value("label", std::string{});
            c.landmarks = e.at("landmarks").get<std::vector<std::string>>();
            const std::size_t need = c.kind == LanteriKind::absolute_position ? 1 : 2;
            if (c.landmarks.size() != need)
                throw ParseError("constraint '" + c.label + "' needs " + std::to_string(need) +
                                 " landmark(s)");
            out.push_back(std::move(c));
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("constraints JSON: ") + e.what());
    }
}

void LanteriTerm::check() const {
    if (kind != LanteriKind::absolute_position && !(reference_distance() > 0.0))
        throw InvalidArgument("Lanteri constraint '" + label + "' uses coincident landmarks");
}

Eigen::VectorXd lanteri_residuals(std::span<const LanteriTerm> terms,
                                  std::span<const AffineTransform> transforms, double lambda_v,
                                  double mean_edge_length) {
    std::size_t n = 0;
    for (const auto& t : terms) n += t.kind == LanteriKind::relative_distance ? 1 : 3;
    Eigen::VectorXd r(static_cast<Eigen::Index>(n));
    Eigen::Index k = 0;
    const double abs_w = std::sqrt(lambda_v / (2.0 * mean_edge_length * mean_edge_length));
    const double rel_w = std::sqrt(lambda_v / 2.0);
    for (const auto& t : terms) {
        const Vec3 q0 = blend_transforms(t.weights[0], transforms).apply(t.points[0]);
        if (t.kind == LanteriKind::absolute_position) {
            r.segment<3>(k) = abs_w * (q0 - t.points[0]);
            k += 3;
            continue;
        }
        const Vec3 q1 = blend_transforms(t.weights[1], transforms).apply(t.points[1]);
        const Vec3 d0 = t.points[0] - t.points[1];
        const double len0 = d0.norm();
        if (t.kind == LanteriKind::relative_position) {
            r.segment<3>(k) = rel_w * ((q0 - q1) - d0) / len0;
            k += 3;
        } else {
            r[k++] = rel_w * ((q0 - q1).norm() - len0) / len0;
        }
    }
    return r;
}

std::map<RegionPair, double> default_edge_weights(const AbstractedMesh& a) {
    std::map<RegionPair, double> len;
    for (const auto& p : a.polylines)
        if (p.region_right >= 1) len[make_pair_key(p.region_right, p.region_left)] += p.length;
    if (len.empty()) return len;
    double mean = 0.0;
    for (const auto& [k, l] : len) mean += l;
    mean /= static_cast<double>(len.size());
    for (auto& [k, l] : len) l /= mean;
    return len;
}

StyleProblem::StyleProblem(const AbstractedMesh& a, StyleParams params,
                           std::vector<LanteriTerm> lanteri)
    : mesh_(&a), params_(std::move(params)), lanteri_(std::move(lanteri)) {
    params_.validate();
    for (const auto& t : lanteri_) t.check();
    weights_ = default_edge_weights(a);
    for (auto& [k, w] : weights_) w *= params_.scale_for(k.first, k.second);
    initial_.resize(a.K);
    planes_.resize(a.K);
    loop_anchors_.resize(a.K);
    for (int r = 1; r <= a.K; ++r) {
        initial_[r - 1] = {r, a.initial(r).normal, a.initial(r).centroid};
        planes_[r - 1] = {r, a.initial(r).surface_normal, a.initial(r).surface_centroid};
        for (const auto& cyc : a.loop(r))
            loop_anchors_[r - 1].insert(loop_anchors_[r - 1].end(), cyc.begin(), cyc.end());
    }
}

std::vector<PlaneProxy> StyleProblem::proxies(std::span<const Vec3> anchors) const {
    std::vector<PlaneProxy> out(mesh_->K);
    for (int r = 1; r <= mesh_->K; ++r) {
        const LoopGeometry g = loop_geometry(anchors, mesh_->loop(r), initial_[r - 1].normal);
        out[r - 1] = {r, g.normal, g.centroid};
    }
    return out;
}

std::vector<double> StyleProblem::loop_area(std::span<const Vec3> anchors) const {
    std::vector<double> out(mesh_->K);
    for (int r = 1; r <= mesh_->K; ++r)
        out[r - 1] = loop_geometry(anchors, mesh_->loop(r), initial_[r - 1].normal).area;
    return out;
}

std::vector<AffineTransform> StyleProblem::region_transforms(std::span<const PlaneProxy> current) const {
    std::vector<AffineTransform> out(mesh_->K);
    for (int r = 1; r <= mesh_->K; ++r)
        out[r - 1] = stylization_transform(initial_[r - 1], current[r - 1], planes_[r - 1],
                                           params_.mu_for(r));
    return out;
}

Eigen::VectorXd StyleProblem::style_residuals(std::span<const Vec3> anchors,
                                              std::span<const PlaneProxy> current) const {
    std::size_t n = weights_.size();
    for (const auto& l : loop_anchors_) n += l.size();
    Eigen::VectorXd r(static_cast<Eigen::Index>(n));
    Eigen::Index k = 0;
    // n_i.n_j = 1/2 |n_i + n_j|^2 - 1; the constant is dropped.
    for (const auto& [pair, w] : weights_) {
        const Vec3 s = current[pair.first - 1].normal + current[pair.second - 1].normal;
        r[k++] = std::sqrt(params_.lambda_d * w / 2.0) * s.norm();
    }
    const double fw = std::sqrt(params_.lambda_f);
    for (int reg = 1; reg <= mesh_->K; ++reg) {
        const PlaneProxy& p = current[reg - 1];
        for (int id : loop_anchors_[reg - 1]) r[k++] = fw * p.normal.dot(p.centroid - anchors[id]);
    }
    return r;
}

Eigen::VectorXd StyleProblem::reg_residuals(std::span<const Vec3> anchors,
                                            std::span<const PlaneProxy> current) const {
    const AbstractedMesh& a = *mesh_;
    const std::size_t n = a.K + a.edges.size() + 3 * a.anchors.size() + 3 * a.K;
    Eigen::VectorXd r(static_cast<Eigen::Index>(n));
    Eigen::Index k = 0;
    const std::vector<double> area = loop_area(anchors);
    const double aw = std::sqrt(params_.lambda_a);
    for (int reg = 1; reg <= a.K; ++reg) r[k++] = aw * (1.0 - area[reg - 1] / a.initial(reg).area);
    const double ew = std::sqrt(params_.lambda_e);
    for (const auto& e : a.edges)
        r[k++] = ew * (1.0 - (anchors[e.a] - anchors[e.b]).norm() / e.rest_length);
    const double ebar = a.mean_edge_length;
    const double vw = std::sqrt(params_.lambda_v / (2.0 * ebar * ebar));
    for (std::size_t i = 0; i < a.anchors.size(); ++i) {
        r.segment<3>(k) = vw * (anchors[i] - a.anchors[i].position);
        k += 3;
    }
    const double nw = std::sqrt(params_.lambda_n / 2.0);
    for (int reg = 1; reg <= a.K; ++reg) {
        r.segment<3>(k) = nw * (current[reg - 1].normal - a.initial(reg).normal);
        k += 3;
    }
    return r;
}

Eigen::VectorXd StyleProblem::lanteri_residuals(std::span<const PlaneProxy> current) const {
    if (lanteri_.empty()) return {};
    const auto transforms = region_transforms(current);
    return planehead::lanteri_residuals(lanteri_, transforms, params_.lambda_v,
                                        mesh_->mean_edge_length);
}

Eigen::VectorXd StyleProblem::residuals(std::span<const Vec3> anchors) const {
    const auto current = proxies(anchors);
    const Eigen::VectorXd s = style_residuals(anchors, current);
    const Eigen::VectorXd g = reg_residuals(anchors, current);
    const Eigen::VectorXd l = lanteri_residuals(current);
    Eigen::VectorXd r(s.size() + g.size() + l.size());
    r << s, g, l;
    return r;
}

double StyleProblem::energy(std::span<const Vec3> anchors) const {
    return residuals(anchors).squaredNorm();
}

EnergyBreakdown StyleProblem::breakdown(std::span<const Vec3> anchors) const {
    const AbstractedMesh& a = *mesh_;
    const auto current = proxies(anchors);
    EnergyBreakdown b;
    const Eigen::VectorXd s = style_residuals(anchors, current);
    const auto npairs = static_cast<Eigen::Index>(weights_.size());
    b.style = s.head(npairs).squaredNorm();
    b.flatness = s.tail(s.size() - npairs).squaredNorm();
    for (const auto& [pair, w] : weights_)
        b.style_dot += params_.lambda_d * w *
                       current[pair.first - 1].normal.dot(current[pair.second - 1].normal);
    const Eigen::VectorXd g = reg_residuals(anchors, current);
    Eigen::Index k = 0;
    b.area = g.segment(k, a.K).squaredNorm();
    k += a.K;
    const auto ne = static_cast<Eigen::Index>(a.edges.size());
    b.edge = g.segment(k, ne).squaredNorm();
    k += ne;
    const auto nv = static_cast<Eigen::Index>(3 * a.anchors.size());
    b.vertex = g.segment(k, nv).squaredNorm();
    k += nv;
    b.normal = g.segment(k, 3 * a.K).squaredNorm();
    b.lanteri = lanteri_residuals(current).squaredNorm();
    return b;
}

const char* to_string(Termination t) {
    switch (t) {
        case Termination::function_tolerance: return "function_tolerance";
        case Termination::gradient_tolerance: return "gradient_tolerance";
        case Termination::max_iterations: return "max_iterations";
        case Termination::time_budget: return "time_budget";
        case Termination::damping_limit: return "damping_limit";
        case Termination::no_free_variables: return "no_free_variables";
    }
    return "unknown";
}

OptimizationState optimize(const StyleProblem& problem, const OptimizeOptions& options) {
    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();
    const AbstractedMesh& a = problem.mesh();
    const std::size_t na = a.anchors.size();

    OptimizationState st;
    st.fixed.resize(na);
    if (options.fixed_override) {
        if (options.fixed_override->size() != na) throw InvalidArgument("fixed mask size mismatch");
        st.fixed = *options.fixed_override;
    } else {
        for (std::size_t i = 0; i < na; ++i) st.fixed[i] = a.anchors[i].on_open_boundary;
    }
    st.anchors = a.anchor_positions();
    if (options.warm_start) {
        if (options.warm_start->size() != na) throw InvalidArgument("warm start size mismatch");
        for (std::size_t i = 0; i < na; ++i)
            if (!st.fixed[i]) st.anchors[i] = (*options.warm_start)[i];
    }

    std::vector<int> free_ids;
    for (std::size_t i = 0; i < na; ++i)
        if (!st.fixed[i]) free_ids.push_back(static_cast<int>(i));
    const auto nvar = static_cast<Eigen::Index>(3 * free_ids.size());

    auto unpack = [&](const Eigen::VectorXd& x, std::vector<Vec3>& pos) {
        for (std::size_t k = 0; k < free_ids.size(); ++k)
            pos[free_ids[k]] = x.segment<3>(static_cast<Eigen::Index>(3 * k));
    };
    Eigen::VectorXd x(nvar);
    for (std::size_t k = 0; k < free_ids.size(); ++k)
        x.segment<3>(static_cast<Eigen::Index>(3 * k)) = st.anchors[free_ids[k]];

    std::vector<Vec3> work = st.anchors;
    Eigen::VectorXd r = problem.residuals(work);
    double energy = r.squaredNorm();
    if (!std::isfinite(energy)) throw Error("non-finite stylization energy at start");
    st.energy_trace.push_back(energy);

    auto finish = [&](Termination why) {
        unpack(x, st.anchors);
        st.termination = why;
        st.proxies = problem.proxies(st.anchors);
        st.breakdown = problem.breakdown(st.anchors);
        spdlog::debug("optimize: {} after {} iterations, energy {}", to_string(why), st.iterations,
                      st.energy_trace.back());
        return st;
    };

    if (nvar == 0) return finish(Termination::no_free_variables);

    const double h = options.fd_step_factor * a.mean_edge_length;
    const Eigen::Index m = r.size();
    Eigen::MatrixXd J(m, nvar);
    double damping = -1.0;
    double nu = 2.0;
    bool need_jacobian = true;
    Eigen::VectorXd g;
    Eigen::MatrixXd JtJ;

    for (st.iterations = 0; st.iterations < options.max_iterations;) {
        if (options.time_budget_seconds > 0.0 &&
            std::chrono::duration<double>(Clock::now() - start).count() > options.time_budget_seconds)
            return finish(Termination::time_budget);

        if (need_jacobian) {
            unpack(x, work);
            for (Eigen::Index c = 0; c < nvar; ++c) {
                const int anchor = free_ids[static_cast<std::size_t>(c / 3)];
                const int axis = static_cast<int>(c % 3);
                const double saved = work[anchor][axis];
                work[anchor][axis] = saved + h;
                J.col(c) = (problem.residuals(work) - r) / h;
                work[anchor][axis] = saved;
            }
            g = J.transpose() * r;
            JtJ = J.transpose() * J;
            need_jacobian = false;
            if (g.lpNorm<Eigen::Infinity>() < options.gradient_tolerance)
                return finish(Termination::gradient_tolerance);
            if (damping < 0.0) damping = 1e-4 * std::max(JtJ.diagonal().maxCoeff(), 1e-12);
        }

        Eigen::MatrixXd A = JtJ;
        const double diag_floor = 1e-9 * std::max(JtJ.diagonal().maxCoeff(), 1e-12);
        for (Eigen::Index i = 0; i < nvar; ++i) A(i, i) += damping * std::max(JtJ(i, i), diag_floor);
        const Eigen::VectorXd step = A.ldlt().solve(-g);
        ++st.iterations;

        const Eigen::VectorXd x_new = x + step;
        unpack(x_new, work);
        const Eigen::VectorXd r_new = problem.residuals(work);
        const double e_new = r_new.squaredNorm();

        if (std::isfinite(e_new) && e_new < energy) {
            // Gain ratio against the linear model.
            const double predicted = -(2.0 * step.dot(g) + step.dot(JtJ * step));
            const double rho = predicted > 0.0 ? (energy - e_new) / predicted : 0.0;
            const double decrease = energy - e_new;
            const double previous = energy;
            x = x_new;
            r = r_new;
            energy = e_new;
            st.energy_trace.push_back(energy);
            need_jacobian = true;
            damping *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
            nu = 2.0;
            if (decrease <= options.function_tolerance * previous)
                return finish(Termination::function_tolerance);
        } else {
            damping *= nu;
            nu *= 2.0;
            if (damping > 1e32) return finish(Termination::damping_limit);
        }
    }
    return finish(Termination::max_iterations);
}

OptimizationState optimize(const AbstractedMesh& a, const StyleParams& params,
                           const std::vector<LanteriTerm>& lanteri, const OptimizeOptions& options) {
    const StyleProblem problem(a, params, lanteri);
    return optimize(problem, options);
}

}  // namespace planehead
