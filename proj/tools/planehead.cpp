#include "planehead/abstractor.hpp"
#include "planehead/mesh_io.hpp"
#include "planehead/metrics.hpp"
#include "planehead/segmenter.hpp"
#include "planehead/server.hpp"
#include "planehead/service.hpp"
#include "planehead/session.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace planehead;

namespace {

// Usage problems and out-of-range parameters.
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void setup_logging() {
    spdlog::set_level(spdlog::level::info);
    if (const char* level = std::getenv("PLANEHEAD_LOG")) {
        const auto parsed = spdlog::level::from_str(level);
        if (parsed == spdlog::level::off && std::string(level) != "off")
            spdlog::warn("PLANEHEAD_LOG={} is not a log level", level);
        else
            spdlog::set_level(parsed);
    }
    spdlog::set_pattern("[%l] %v");
}

struct StyleFlags {
    std::optional<double> lambda_d, mu, smooth_default;
    std::string params_path;
    std::string landmarks_path;
    bool no_lanteri = false;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--lambda-d", lambda_d, "Exaggeration weight, [0, 3)");
        cmd->add_option("--mu", mu, "Global planarization, [0, 1]");
        cmd->add_option("--smooth-default", smooth_default, "Smoothing scale for every boundary");
        cmd->add_option("--params", params_path, "StyleParams JSON")->check(CLI::ExistingFile);
        cmd->add_option("--landmarks", landmarks_path, "Landmark JSON")->check(CLI::ExistingFile);
        cmd->add_flag("--no-lanteri", no_lanteri, "Disable Lanteri constraints");
    }

    // Flag > params file > defaults.
    StyleParams resolve(StyleParams p = {}) const {
        if (!params_path.empty()) p = style_params_from_json(read_json_file(params_path), p);
        if (lambda_d) p.lambda_d = *lambda_d;
        if (mu) p.mu = *mu;
        if (smooth_default) p.smoothing = *smooth_default;
        if (p.smoothing < 0.0) throw InvalidArgument("smoothing scale must be >= 0");
        p.validate();
        return p;
    }
};

void print_trace(const OptimizationState& st) {
    const auto& t = st.energy_trace;
    std::printf("optimization: %d iterations, %s\n", st.iterations, to_string(st.termination));
    std::printf("energy: %.9g -> %.9g", t.front(), t.back());
    if (t.size() > 2) std::printf(" (after step 1: %.9g)", t[1]);
    std::printf("\n");
    const auto& b = st.breakdown;
    std::printf("terms: style %.6g flatness %.6g area %.6g edge %.6g vertex %.6g normal %.6g lanteri %.6g\n",
                b.style, b.flatness, b.area, b.edge, b.vertex, b.normal, b.lanteri);
}

fs::path default_template_labels(const fs::path& tmpl) {
    return tmpl.parent_path() / (tmpl.stem().string() + "_labels.json");
}

int cmd_segment(const std::string& mesh_path, const std::string& mode, int k, const std::string& tmpl,
                std::string tmpl_labels, int max_iters, std::uint64_t seed, const std::string& out) {
    const Mesh m = load_mesh(mesh_path);
    RegionLabeling labels;
    if (mode == "vsa") {
        if (k < 1) throw UsageError("--k must be >= 1 for --mode vsa");
        const VsaResult r = vsa_segment(m, k, max_iters, seed);
        std::printf("vsa: K=%d, %d iterations, energy %.9g\n", r.labels.K, r.iterations,
                    r.energy_trace.empty() ? 0.0 : r.energy_trace.back());
        labels = r.labels;
    } else {
        if (tmpl.empty()) throw UsageError("--mode template needs --template PATH");
        if (tmpl_labels.empty()) tmpl_labels = default_template_labels(tmpl).string();
        LabeledTemplate t{load_mesh(tmpl), load_labels(tmpl_labels)};
        check_labeling(t.mesh, t.labels);
        labels = transfer_labels(m, t);
        std::printf("template: K=%d\n", labels.K);
    }
    save_labels(out, labels);
    return 0;
}

int cmd_abstract(const std::string& mesh_path, const std::string& labels_path, const std::string& out,
                 const std::string& tri) {
    const Mesh m = load_mesh(mesh_path);
    const RegionLabeling labels = load_labels(labels_path);
    const AbstractedMesh a = build_abstracted_mesh(m, labels);
    int fixed = 0;
    for (const auto& x : a.anchors) fixed += x.on_open_boundary;
    std::printf("abstracted mesh: %zu anchors (%d fixed), %zu polylines, %zu border edges, K=%d\n",
                a.anchors.size(), fixed, a.polylines.size(), a.edges.size(), a.K);
    write_json_file(out, to_json(a));
    if (!tri.empty()) {
        const RegionTriangulation t = triangulate_regions(a);
        save_mesh(tri, t.mesh.vertices(), t.mesh.triangles());
        if (!t.fan_fallback_regions.empty())
            spdlog::warn("{} regions used the fan fallback", t.fan_fallback_regions.size());
    }
    return 0;
}

int cmd_stylize(const std::string& mesh_path, const std::string& labels_path, const std::string& from_session,
                const StyleFlags& flags, const std::string& out, std::string session_out) {
    std::unique_ptr<Session> session;
    StyleParams params;
    bool lanteri = !flags.no_lanteri;
    fs::path mesh_file;
    if (!from_session.empty()) {
        const SessionFile sf = load_session(from_session);
        session = open_session(sf);
        mesh_file = sf.mesh_path;
        params = flags.resolve(sf.params);
        lanteri = sf.lanteri_enabled && !flags.no_lanteri;
    } else {
        if (mesh_path.empty() || labels_path.empty()) throw UsageError("stylize needs MESH and LABELS (or --from-session)");
        params = flags.resolve();
        mesh_file = mesh_path;
        LandmarkSet lm;
        if (!flags.landmarks_path.empty()) lm = load_landmarks(flags.landmarks_path);
        session = std::make_unique<Session>(load_mesh(mesh_path), load_labels(labels_path), lm);
    }
    if (lanteri && session->constraints().empty()) lanteri = false;
    std::printf("abstracted mesh: %zu anchors, K=%d; Lanteri constraints: %s\n", session->abstracted().anchors.size(),
                session->abstracted().K,
                lanteri ? std::to_string(session->constraints().size()).c_str() : "off");
    const StylizeResult r = session->stylize(params, lanteri);
    print_trace(r.state);
    std::printf("timing: optimize %.1f ms, transfer %.1f ms\n", 1e3 * r.optimize_seconds, 1e3 * r.transfer_seconds);
    save_mesh(out, r.positions, session->mesh().triangles());
    if (session_out.empty()) session_out = out + ".session.json";
    save_session(session_out, make_session_file(*session, mesh_file, params, lanteri));
    std::printf("wrote %s and %s\n", out.c_str(), session_out.c_str());
    return 0;
}

MeasureReport parse_values(const std::string& s) {
    MeasureReport r;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq != 1 || item.size() < 3) throw UsageError("measure values look like A=0.069,B=0.033");
        double v = 0.0;
        try {
            v = std::stod(item.substr(2));
        } catch (const std::exception&) {
            throw UsageError("bad number in '" + item + "'");
        }
        switch (item[0]) {
            case 'A': r.A = v; break;
            case 'B': r.B = v; break;
            case 'C': r.C = v; break;
            case 'D': r.D = v; break;
            default: throw UsageError("unknown measure in '" + item + "'");
        }
    }
    return r;
}

MeasureReport measure_scan(const std::string& item) {
    const auto colon = item.rfind(':');
    if (colon == std::string::npos || colon == 0) throw UsageError("scans are given as MESH:LANDMARKS");
    const RawMesh raw = read_mesh_file(item.substr(0, colon));
    const LandmarkSet lm = load_landmarks(item.substr(colon + 1));
    lm.validate(static_cast<int>(raw.vertices.size()));
    const MeasureReport r = eye_socket_measures(lm, raw.vertices);
    if (!r.A && !r.B && !r.C && !r.D)
        throw InvalidArgument("no measure computable from " + item + " (missing landmarks)");
    return r;
}

int cmd_analyze(const std::vector<std::string>& human, const std::vector<std::string>& sculpt,
                const std::vector<std::string>& human_values, const std::vector<std::string>& sculpt_values,
                const std::string& csv) {
    std::vector<MeasureReport> h, s;
    for (const auto& x : human) h.push_back(measure_scan(x));
    for (const auto& x : human_values) h.push_back(parse_values(x));
    for (const auto& x : sculpt) s.push_back(measure_scan(x));
    for (const auto& x : sculpt_values) s.push_back(parse_values(x));
    if (h.empty() || s.empty()) throw UsageError("analyze needs at least one scan or value set per group");
    const ComparisonTable t = aggregate_measures(h, s);
    std::fputs(t.to_text().c_str(), stdout);
    if (!csv.empty()) {
        std::ofstream f(csv);
        if (!f) throw Error("cannot write " + csv);
        f << t.to_csv();
    }
    return 0;
}

int cmd_serve(const std::string& mesh_path, const std::string& labels_path, const std::string& from_session,
              const StyleFlags& flags, int port, double budget_ms) {
    std::unique_ptr<Session> session;
    StyleParams params;
    bool lanteri = !flags.no_lanteri;
    if (!from_session.empty()) {
        const SessionFile sf = load_session(from_session);
        session = open_session(sf);
        params = flags.resolve(sf.params);
        lanteri = sf.lanteri_enabled && !flags.no_lanteri;
    } else {
        if (mesh_path.empty() || labels_path.empty()) throw UsageError("serve needs MESH and LABELS (or --from-session)");
        params = flags.resolve();
        LandmarkSet lm;
        if (!flags.landmarks_path.empty()) lm = load_landmarks(flags.landmarks_path);
        session = std::make_unique<Session>(load_mesh(mesh_path), load_labels(labels_path), lm);
    }
    if (port < 0 || port > 65535) throw UsageError("--port out of range");
    SessionEngine::Options opts;
    opts.budget_seconds = budget_ms / 1000.0;
    SessionEngine engine(*session, params, lanteri && !session->constraints().empty(), opts);
    LiveServer server(engine, static_cast<unsigned short>(port));
    server.stop_on_signals();
    std::printf("listening on ws://127.0.0.1:%u\n", server.port());
    std::fflush(stdout);
    server.run();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Sculptor's-planes stylization of triangle meshes"};
    app.require_subcommand(1);
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "Seed for all randomness")->capture_default_str();

    auto* seg = app.add_subcommand("segment", "Segment a mesh into regions");
    std::string seg_mesh, seg_mode = "vsa", seg_tmpl, seg_tmpl_labels, seg_out;
    int seg_k = 32, seg_iters = 50;
    seg->add_option("mesh", seg_mesh, "Input mesh (OBJ/PLY)")->required()->check(CLI::ExistingFile);
    seg->add_option("--mode", seg_mode, "vsa or template")->check(CLI::IsMember({"vsa", "template"}))->capture_default_str();
    seg->add_option("--k", seg_k, "Region count (vsa)")->capture_default_str();
    seg->add_option("--max-iters", seg_iters, "Lloyd iterations (vsa)")->capture_default_str();
    seg->add_option("--template", seg_tmpl, "Pre-aligned template mesh")->check(CLI::ExistingFile);
    seg->add_option("--template-labels", seg_tmpl_labels, "Template labels (default: <template>_labels.json)");
    seg->add_option("-o,--output", seg_out, "Labels JSON")->required();
    seg->add_option("--seed", seed, "Seed for VSA seeding")->capture_default_str();

    auto* abs = app.add_subcommand("abstract", "Build the abstracted mesh");
    std::string abs_mesh, abs_labels, abs_out, abs_tri;
    abs->add_option("mesh", abs_mesh)->required()->check(CLI::ExistingFile);
    abs->add_option("labels", abs_labels)->required()->check(CLI::ExistingFile);
    abs->add_option("-o,--output", abs_out, "Abstracted mesh JSON")->required();
    abs->add_option("--triangulation", abs_tri, "Display triangulation (OBJ/PLY)");

    auto* sty = app.add_subcommand("stylize", "Optimize and transfer a stylization");
    std::string sty_mesh, sty_labels, sty_out, sty_session, sty_from;
    StyleFlags sty_flags;
    sty->add_option("mesh", sty_mesh)->check(CLI::ExistingFile);
    sty->add_option("labels", sty_labels)->check(CLI::ExistingFile);
    sty->add_option("-o,--output", sty_out, "Deformed mesh (OBJ/PLY)")->required();
    sty->add_option("--session", sty_session, "Session file to write (default: <output>.session.json)");
    sty->add_option("--from-session", sty_from, "Reuse a saved session")->check(CLI::ExistingFile);
    sty_flags.add_to(sty);

    auto* ana = app.add_subcommand("analyze", "Compare eye-socket measures of two groups");
    std::vector<std::string> ana_h, ana_s, ana_hv, ana_sv;
    std::string ana_csv;
    ana->add_option("--human", ana_h, "MESH:LANDMARKS per human scan");
    ana->add_option("--sculpt", ana_s, "MESH:LANDMARKS per sculpture scan");
    ana->add_option("--human-values", ana_hv, "Measures given directly, e.g. A=0.069,B=0.033");
    ana->add_option("--sculpt-values", ana_sv, "Measures given directly");
    ana->add_option("--csv", ana_csv, "Also write the table as CSV");

    auto* srv = app.add_subcommand("serve", "Run the live stylization service");
    std::string srv_mesh, srv_labels, srv_from;
    StyleFlags srv_flags;
    int srv_port = 7870;
    double srv_budget = 100.0;
    srv->add_option("mesh", srv_mesh)->check(CLI::ExistingFile);
    srv->add_option("labels", srv_labels)->check(CLI::ExistingFile);
    srv->add_option("--from-session", srv_from)->check(CLI::ExistingFile);
    srv->add_option("--port", srv_port)->capture_default_str();
    srv->add_option("--budget-ms", srv_budget, "Optimization budget per run")->capture_default_str();
    srv_flags.add_to(srv);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*seg) return cmd_segment(seg_mesh, seg_mode, seg_k, seg_tmpl, seg_tmpl_labels, seg_iters, seed, seg_out);
        if (*abs) return cmd_abstract(abs_mesh, abs_labels, abs_out, abs_tri);
        if (*sty) return cmd_stylize(sty_mesh, sty_labels, sty_from, sty_flags, sty_out, sty_session);
        if (*ana) return cmd_analyze(ana_h, ana_s, ana_hv, ana_sv, ana_csv);
        if (*srv) return cmd_serve(srv_mesh, srv_labels, srv_from, srv_flags, srv_port, srv_budget);
    } catch (const UsageError& e) {
        spdlog::error("{}", e.what());
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        spdlog::error("{}", e.what());
        return kExitUsage;
    } catch (const ValidationError& e) {
        spdlog::error("{}", e.what());
        return 1;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
