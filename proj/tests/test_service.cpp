#include "helpers.hpp"

#include "planehead/fixtures.hpp"
#include "planehead/mesh_io.hpp"
#include "planehead/service.hpp"

#include <doctest.h>

using namespace planehead;
using namespace std::chrono_literals;
using json = nlohmann::json;

namespace {

std::unique_ptr<Session> small_session() {
    auto f = fixtures::face(40, 54, 12);
    return std::make_unique<Session>(std::move(f.mesh), f.labels, f.landmarks);
}

SessionEngine::Options manual() { return {0.0, false}; }

double max_displacement(const Frame& a, const Frame& b) {
    double d = 0;
    for (std::size_t i = 0; i < a.positions.size(); ++i) d = std::max(d, (a.positions[i] - b.positions[i]).norm());
    return d;
}

}  // namespace

TEST_CASE("frame encoding") {
    const std::vector<Vec3> pts{{1, 2, 3}, {-0.5, 0.25, 1e-3}};
    const std::string bytes = encode_frame(42, pts);
    CHECK(bytes.size() == 12 + 24);
    const DecodedFrame f = decode_frame(bytes);
    CHECK(f.revision == 42);
    REQUIRE(f.positions.size() == 6);
    CHECK(f.positions[0] == 1.0f);
    CHECK(f.positions[5] == 1e-3f);
    // little-endian header
    CHECK(static_cast<unsigned char>(bytes[0]) == 42);
    CHECK(static_cast<unsigned char>(bytes[8]) == 2);
    CHECK_THROWS_AS(decode_frame(bytes.substr(0, 20)), ParseError);
    CHECK_THROWS_AS(decode_frame("abc"), ParseError);
    CHECK(encode_frame(1, std::vector<Vec3>(30000)).size() == 12 + 360000);
}

TEST_CASE("message kinds") {
    for (auto k : {MessageKind::set_global, MessageKind::set_edge_weight, MessageKind::set_edge_smoothing,
                   MessageKind::set_face_planarization, MessageKind::toggle_lanteri, MessageKind::request_export,
                   MessageKind::mesh_frame, MessageKind::energy_report, MessageKind::error})
        CHECK(message_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(message_kind_from_string("bogus"), InvalidArgument);
}

TEST_CASE("engine starts at revision 0 and produces a first frame") {
    auto s = small_session();
    SessionEngine engine(*s, StyleParams{}, true, manual());
    CHECK(engine.revision() == 0);
    CHECK(engine.latest_frame()->positions.size() == static_cast<std::size_t>(s->mesh().vertex_count()));
    const json conn = engine.connectivity_message();
    CHECK(conn["kind"] == "connectivity");
    CHECK(conn["vertex_count"] == s->mesh().vertex_count());
    CHECK(conn["triangles"].size() == 3 * static_cast<std::size_t>(s->mesh().face_count()));
    CHECK(conn["hash"] == connectivity_hash(s->mesh()));
    CHECK(engine.step());
    CHECK(engine.revision() == 1);
    CHECK_FALSE(engine.step());
    CHECK(engine.revision() == 1);
    const auto frame = engine.latest_frame();
    CHECK(frame->energy_report["kind"] == "energy_report");
    CHECK(frame->energy_report["revision"] == 1);
    CHECK(decode_frame(frame->bytes).revision == 1);
}

TEST_CASE("set_global lambda_d produces a new, displaced frame") {
    auto s = small_session();
    StyleParams p;
    p.lambda_d = 0.0;
    SessionEngine engine(*s, p, true, manual());
    engine.wait_idle(10s);
    const auto before = engine.latest_frame();
    const json ack = engine.handle_message({{"kind", "set_global"}, {"param", "lambda_d"}, {"value", 1.0}});
    CHECK(ack["kind"] == "ack");
    CHECK(ack["changed"] == true);
    CHECK(engine.step());
    const auto after = engine.latest_frame();
    CHECK(after->revision == before->revision + 1);
    CHECK(max_displacement(*before, *after) > 0.0);
    CHECK(engine.params().lambda_d == 1.0);
}

TEST_CASE("duplicate messages are idempotent") {
    auto s = small_session();
    SessionEngine engine(*s, StyleParams{}, true, manual());
    engine.wait_idle(10s);
    const json msg{{"kind", "set_edge_weight"}, {"regions", {s->abstracted().region_pairs()[0].first,
                                                              s->abstracted().region_pairs()[0].second}},
                   {"scale", 2.0}};
    CHECK(engine.handle_message(msg)["changed"] == true);
    engine.wait_idle(10s);
    const auto rev = engine.revision();
    const json state = to_json(engine.params());
    const json again = engine.handle_message(msg);
    CHECK(again["kind"] == "ack");
    CHECK(again["changed"] == false);
    CHECK_FALSE(engine.step());
    CHECK(engine.revision() == rev);
    CHECK(to_json(engine.params()) == state);
}

TEST_CASE("edits arriving together run once with the final value") {
    auto s = small_session();
    SessionEngine engine(*s, StyleParams{}, true, manual());
    engine.wait_idle(10s);
    const int runs = engine.runs();
    for (double v : {0.3, 0.9, 1.7, 2.2, 1.2})
        engine.handle_message({{"kind", "set_global"}, {"param", "lambda_d"}, {"value", v}});
    CHECK(engine.step());
    CHECK(engine.runs() == runs + 1);
    CHECK_FALSE(engine.step());
    CHECK(engine.params().lambda_d == 1.2);
    // same result as a single edit to 1.2 from scratch
    auto s2 = small_session();
    StyleParams p;
    p.lambda_d = 1.2;
    SessionEngine direct(*s2, p, true, manual());
    direct.wait_idle(10s);
    // warm and cold starts agree up to the optimizer tolerance
    CHECK(max_displacement(*direct.latest_frame(), *engine.latest_frame()) < 1e-2 * s->mesh().mean_edge_length());
}

TEST_CASE("threaded engine: latest wins and converges") {
    auto s = small_session();
    SessionEngine engine(*s, StyleParams{}, true, {0.1, true});
    REQUIRE(engine.wait_idle(30s));
    const int runs = engine.runs();
    for (int k = 1; k <= 20; ++k)
        engine.handle_message({{"kind", "set_global"}, {"param", "mu"}, {"value", 0.05 * k}});
    REQUIRE(engine.wait_idle(30s));
    CHECK(engine.params().mu == doctest::Approx(1.0));
    CHECK(engine.runs() - runs < 20);
    CHECK(engine.latest_frame()->energy_report["converged"] == true);
    const auto rev = engine.revision();
    std::this_thread::sleep_for(200ms);
    CHECK(engine.revision() == rev);
}

TEST_CASE("invalid edits leave the state unchanged") {
    auto s = small_session();
    SessionEngine engine(*s, StyleParams{}, true, manual());
    engine.wait_idle(10s);
    const json state = to_json(engine.params());
    const auto rev = engine.revision();
    const std::vector<json> bad{
        {{"kind", "set_global"}, {"param", "lambda_d"}, {"value", 5.0}},
        {{"kind", "set_global"}, {"param", "mu"}, {"value", -0.1}},
        {{"kind", "set_global"}, {"param", "nope"}, {"value", 1.0}},
        {{"kind", "set_global"}, {"param", "lambda_a"}},
        {{"kind", "set_edge_weight"}, {"regions", {1, 1}}, {"scale", 2.0}},
        {{"kind", "set_edge_weight"}, {"regions", {1, 999}}, {"scale", 2.0}},
        {{"kind", "set_edge_weight"}, {"regions", {1, 2, 3}}, {"scale", 2.0}},
        {{"kind", "set_edge_smoothing"}, {"regions", {1, 999}}, {"value", 1.0}},
        {{"kind", "set_face_planarization"}, {"region", 0}, {"mu", 0.5}},
        {{"kind", "set_face_planarization"}, {"region", 1}, {"mu", 1.5}},
        {{"kind", "toggle_lanteri"}, {"enabled", "yes"}},
        {{"kind", "mesh_frame"}},
        {{"kind", "unknown_kind"}},
        {{"nokind", 1}},
        json::array(),
    };
    for (const auto& msg : bad) {
        const json reply = engine.handle_message(msg);
        CHECK(reply["kind"] == "error");
        CHECK(reply["message"].is_string());
    }
    CHECK(engine.handle_text("{not json")["kind"] == "error");
    CHECK(to_json(engine.params()) == state);
    CHECK_FALSE(engine.step());
    CHECK(engine.revision() == rev);
}

TEST_CASE("per-edge smoothing and per-face planarization edits") {
    auto s = small_session();
    SessionEngine engine(*s, StyleParams{}, true, manual());
    engine.wait_idle(10s);
    const auto key = s->adjacency().boundary_length.rbegin()->first;
    CHECK(engine.handle_message({{"kind", "set_global"}, {"param", "smoothing"}, {"value", 3.0}})["kind"] == "ack");
    CHECK(engine.handle_message({{"kind", "set_edge_smoothing"}, {"regions", {key.first, key.second}}, {"value", 3.0}})["kind"] == "ack");
    const ScaleField sf = s->scale_field(engine.params());
    for (double v : sf.values) CHECK(std::abs(v - 3.0) <= 1e-12);
    CHECK(engine.handle_message({{"kind", "set_face_planarization"}, {"region", 2}, {"mu", 1.0}})["changed"] == true);
    CHECK(engine.params().mu_for(2) == 1.0);
    CHECK(engine.handle_message({{"kind", "toggle_lanteri"}, {"enabled", false}})["changed"] == true);
    CHECK_FALSE(engine.lanteri_enabled());
    CHECK(engine.step());
}

TEST_CASE("export writes the latest frame") {
    testutil::TempDir dir("export");
    auto s = small_session();
    StyleParams p;
    p.lambda_d = 1.5;
    SessionEngine engine(*s, p, true, manual());
    engine.wait_idle(10s);
    const auto frame = engine.latest_frame();
    const std::string path = (dir / "out.obj").string();
    const json reply = engine.handle_message({{"kind", "request_export"}, {"path", path}});
    CHECK(reply["kind"] == "ack");
    CHECK(reply["revision"] == frame->revision);
    const Mesh out = load_mesh(path);
    REQUIRE(out.vertex_count() == static_cast<int>(frame->positions.size()));
    CHECK(out.triangles() == s->mesh().triangles());
    const DecodedFrame streamed = decode_frame(frame->bytes);
    for (int i = 0; i < out.vertex_count(); ++i)
        for (int c = 0; c < 3; ++c) CHECK(static_cast<float>(out.vertices()[i][c]) == streamed.positions[3 * i + c]);
    const json bad = engine.handle_message({{"kind", "request_export"}, {"path", (dir / "no/such/dir.obj").string()}});
    CHECK(bad["kind"] == "error");
}

TEST_CASE("frame listener sees every published frame") {
    auto s = small_session();
    SessionEngine engine(*s, StyleParams{}, true, manual());
    std::vector<std::uint64_t> seen;
    engine.set_frame_listener([&](std::shared_ptr<const Frame> f) { seen.push_back(f->revision); });
    engine.wait_idle(10s);
    engine.handle_message({{"kind", "set_global"}, {"param", "lambda_d"}, {"value", 2.0}});
    engine.wait_idle(10s);
    REQUIRE(seen.size() >= 2);
    for (std::size_t i = 1; i < seen.size(); ++i) CHECK(seen[i] == seen[i - 1] + 1);
    CHECK(seen.back() == engine.revision());
}
