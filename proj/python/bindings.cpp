#include "planehead/fixtures.hpp"
#include "planehead/mesh_io.hpp"
#include "planehead/segmenter.hpp"
#include "planehead/service.hpp"
#include "planehead/session.hpp"
#include "planehead/transforms.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace planehead;

namespace {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Faces = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

std::vector<Vec3> to_vec3(const Points& p) {
    std::vector<Vec3> out(p.rows());
    for (Eigen::Index i = 0; i < p.rows(); ++i) out[i] = p.row(i).transpose();
    return out;
}

Points to_points(std::span<const Vec3> v) {
    Points out(v.size(), 3);
    for (std::size_t i = 0; i < v.size(); ++i) out.row(i) = v[i].transpose();
    return out;
}

Faces to_faces(const std::vector<Triangle>& t) {
    Faces out(t.size(), 3);
    for (std::size_t i = 0; i < t.size(); ++i) out.row(i) << t[i][0], t[i][1], t[i][2];
    return out;
}

Mesh make_mesh(const Points& v, const Faces& f) {
    std::vector<Triangle> t(f.rows());
    for (Eigen::Index i = 0; i < f.rows(); ++i) t[i] = {f(i, 0), f(i, 1), f(i, 2)};
    return Mesh(to_vec3(v), std::move(t));
}

RegionLabeling make_labels(const std::vector<int>& labels) {
    int k = 0;
    for (int l : labels) k = std::max(k, l);
    return {k, labels};
}

py::dict measures_dict(const MeasureReport& r) {
    py::dict d;
    for (char m : {'A', 'B', 'C', 'D'}) {
        const auto v = r.get(m);
        d[py::str(std::string(1, m))] = v ? py::cast(*v) : py::none();
    }
    return d;
}

// Holds the mesh-derived state; Session itself is not movable.
class PySession {
public:
    PySession(const Points& v, const Faces& f, const std::vector<int>& labels,
              const std::map<std::string, int>& landmarks)
        : session_(std::make_unique<Session>(make_mesh(v, f), make_labels(labels), LandmarkSet{landmarks})) {}

    Points stylize(const std::string& params_json, bool lanteri) {
        const StyleParams p = style_params_from_json(nlohmann::json::parse(params_json));
        StylizeResult r;
        {
            py::gil_scoped_release nogil;
            r = session_->stylize(p, lanteri);
        }
        last_ = std::move(r);
        return to_points(last_->positions);
    }

    int anchor_count() const { return static_cast<int>(session_->abstracted().anchors.size()); }
    int region_count() const { return session_->labels().K; }
    int constraint_count() const { return static_cast<int>(session_->constraints().size()); }
    py::dict last_report() const {
        if (!last_) throw Error("stylize has not run");
        py::dict d;
        d["iterations"] = last_->state.iterations;
        d["energy"] = last_->state.energy_trace.back();
        d["optimize_seconds"] = last_->optimize_seconds;
        d["transfer_seconds"] = last_->transfer_seconds;
        return d;
    }

private:
    std::unique_ptr<Session> session_;
    std::optional<StylizeResult> last_;
};

}  // namespace

PYBIND11_MODULE(_planehead, m) {
    m.doc() = "Sculptor's-planes mesh stylization";

    static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
    static py::exception<InvalidArgument> invalid(m, "InvalidArgument", error.ptr());
    static py::exception<ParseError> parse(m, "ParseError", error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const InvalidArgument& e) {
            py::set_error(invalid, e.what());
        } catch (const ParseError& e) {
            py::set_error(parse, e.what());
        } catch (const Error& e) {
            py::set_error(error, e.what());
        }
    });

    m.def("load_mesh", [](const std::string& path) {
        const Mesh mesh = load_mesh(path);
        return py::make_tuple(to_points(mesh.vertices()), to_faces(mesh.triangles()));
    }, py::arg("path"), "Read an OBJ/PLY file; returns (vertices, faces).");

    m.def("save_mesh", [](const std::string& path, const Points& v, const Faces& f) {
        const Mesh mesh = make_mesh(v, f);
        save_mesh(path, mesh.vertices(), mesh.triangles());
    }, py::arg("path"), py::arg("vertices"), py::arg("faces"));

    m.def("vsa_segment", [](const Points& v, const Faces& f, int k, int max_iters, std::uint64_t seed) {
        const Mesh mesh = make_mesh(v, f);
        py::gil_scoped_release nogil;
        return vsa_segment(mesh, k, max_iters, seed).labels.face_labels;
    }, py::arg("vertices"), py::arg("faces"), py::arg("k"), py::arg("max_iters") = 50, py::arg("seed") = 0,
       "Per-face region labels in 1..k.");

    m.def("rotation_between", [](const Vec3& n, const Vec3& np) -> Mat3 { return rotation_between(n, np); },
          py::arg("n"), py::arg("n_prime"));

    m.def("eye_socket_measures", [](const Points& v, const std::map<std::string, int>& landmarks) {
        return measures_dict(eye_socket_measures(LandmarkSet{landmarks}, to_vec3(v)));
    }, py::arg("vertices"), py::arg("landmarks"));

    m.def("face_fixture", [](int nx, int ny, int k) {
        auto f = fixtures::face(nx, ny, k);
        return py::make_tuple(to_points(f.mesh.vertices()), to_faces(f.mesh.triangles()), f.labels.face_labels,
                              f.landmarks.index);
    }, py::arg("nx") = 150, py::arg("ny") = 200, py::arg("k") = 32,
       "Synthetic head; returns (vertices, faces, labels, landmarks).");

    m.def("encode_frame", [](std::uint64_t revision, const Points& v) {
        return py::bytes(encode_frame(revision, to_vec3(v)));
    }, py::arg("revision"), py::arg("vertices"));
    m.def("decode_frame", [](const py::bytes& b) {
        const DecodedFrame f = decode_frame(std::string(b));
        Eigen::Matrix<float, Eigen::Dynamic, 3, Eigen::RowMajor> pts(f.positions.size() / 3, 3);
        std::copy(f.positions.begin(), f.positions.end(), pts.data());
        return py::make_tuple(f.revision, pts);
    }, py::arg("data"));

    py::class_<PySession>(m, "_Session")
        .def(py::init<const Points&, const Faces&, const std::vector<int>&, const std::map<std::string, int>&>(),
             py::arg("vertices"), py::arg("faces"), py::arg("labels"), py::arg("landmarks"))
        .def("stylize", &PySession::stylize, py::arg("params_json"), py::arg("lanteri"))
        .def_property_readonly("anchor_count", &PySession::anchor_count)
        .def_property_readonly("region_count", &PySession::region_count)
        .def_property_readonly("constraint_count", &PySession::constraint_count)
        .def("last_report", &PySession::last_report);
}
