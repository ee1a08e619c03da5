#include "planehead/mesh_io.hpp"

#include <spdlog/spdlog.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace planehead {

namespace fs = std::filesystem;

namespace {

std::string lower_ext(const fs::path& p) {
    std::string ext = p.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

std::vector<char> slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RawMesh read_obj(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    RawMesh out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag)) continue;
        if (tag == "v") {
            Vec3 p;
            if (!(ss >> p.x() >> p.y() >> p.z()))
                throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad vertex");
            out.vertices.push_back(p);
        } else if (tag == "f") {
            std::vector<int> poly;
            std::string tok;
            while (ss >> tok) {
                // "v", "v/vt", "v//vn", "v/vt/vn"; negative indices are relative.
                const auto slash = tok.find('/');
                int idx = 0;
                try {
                    idx = std::stoi(tok.substr(0, slash));
                } catch (const std::exception&) {
                    throw ParseError(path.string() + ":" + std::to_string(lineno) +
                                     ": bad face index '" + tok + "'");
                }
                if (idx == 0)
                    throw ParseError(path.string() + ":" + std::to_string(lineno) +
                                     ": face index 0");
                poly.push_back(idx > 0 ? idx - 1 : static_cast<int>(out.vertices.size()) + idx);
            }
            if (poly.size() < 3)
                throw ParseError(path.string() + ":" + std::to_string(lineno) +
                                 ": face with fewer than 3 vertices");
            for (std::size_t k = 1; k + 1 < poly.size(); ++k)
                out.triangles.push_back({poly[0], poly[k], poly[k + 1]});
        }
    }
    return out;
}

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

PlyType parse_ply_type(const std::string& s) {
    if (s == "char" || s == "int8") return PlyType::i8;
    if (s == "uchar" || s == "uint8") return PlyType::u8;
    if (s == "short" || s == "int16") return PlyType::i16;
    if (s == "ushort" || s == "uint16") return PlyType::u16;
    if (s == "int" || s == "int32") return PlyType::i32;
    if (s == "uint" || s == "uint32") return PlyType::u32;
    if (s == "float" || s == "float32") return PlyType::f32;
    if (s == "double" || s == "float64") return PlyType::f64;
    throw ParseError("unknown PLY type '" + s + "'");
}

std::size_t ply_size(PlyType t) {
    switch (t) {
        case PlyType::i8:
        case PlyType::u8: return 1;
        case PlyType::i16:
        case PlyType::u16: return 2;
        case PlyType::i32:
        case PlyType::u32:
        case PlyType::f32: return 4;
        case PlyType::f64: return 8;
    }
    return 0;
}

struct PlyProperty {
    std::string name;
    PlyType type = PlyType::f32;
    bool is_list = false;
    PlyType count_type = PlyType::u8;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> props;
};

class PlyCursor {
public:
    PlyCursor(const std::vector<char>& data, std::size_t pos, bool binary)
        : data_(data), pos_(pos), binary_(binary) {}

    double read(PlyType t) {
        if (!binary_) return read_ascii();
        const std::size_t n = ply_size(t);
        if (pos_ + n > data_.size()) throw ParseError("PLY body truncated");
        const char* p = data_.data() + pos_;
        pos_ += n;
        // Host is assumed little-endian (x86/ARM).
        switch (t) {
            case PlyType::i8: return static_cast<double>(*reinterpret_cast<const std::int8_t*>(p));
            case PlyType::u8: return static_cast<double>(*reinterpret_cast<const std::uint8_t*>(p));
            case PlyType::i16: return load<std::int16_t>(p);
            case PlyType::u16: return load<std::uint16_t>(p);
            case PlyType::i32: return load<std::int32_t>(p);
            case PlyType::u32: return load<std::uint32_t>(p);
            case PlyType::f32: return load<float>(p);
            case PlyType::f64: return load<double>(p);
        }
        return 0.0;
    }

private:
    template <class T>
    static double load(const char* p) {
        T v;
        std::memcpy(&v, p, sizeof(T));
        return static_cast<double>(v);
    }

    double read_ascii() {
        while (pos_ < data_.size() && std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
        if (pos_ >= data_.size()) throw ParseError("PLY body truncated");
        const char* begin = data_.data() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) throw ParseError("PLY: malformed number");
        pos_ += static_cast<std::size_t>(end - begin);
        return v;
    }

    const std::vector<char>& data_;
    std::size_t pos_;
    bool binary_;
};

RawMesh read_ply(const fs::path& path) {
    const std::vector<char> data = slurp(path);
    std::size_t pos = 0;
    auto next_line = [&]() -> std::string {
        if (pos >= data.size()) throw ParseError("PLY header truncated");
        const std::size_t start = pos;
        while (pos < data.size() && data[pos] != '\n') ++pos;
        std::string line(data.data() + start, data.data() + pos);
        if (pos < data.size()) ++pos;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };

    if (next_line() != "ply") throw ParseError(path.string() + ": missing 'ply' magic");
    bool binary = false;
    std::vector<PlyElement> elements;
    for (;;) {
        const std::string line = next_line();
        std::istringstream ss(line);
        std::string kw;
        ss >> kw;
        if (kw == "end_header") break;
        if (kw == "format") {
            std::string fmt;
            ss >> fmt;
            if (fmt == "ascii") binary = false;
            else if (fmt == "binary_little_endian") binary = true;
            else throw ParseError(path.string() + ": unsupported PLY format " + fmt);
        } else if (kw == "element") {
            PlyElement el;
            ss >> el.name >> el.count;
            elements.push_back(el);
        } else if (kw == "property") {
            if (elements.empty()) throw ParseError("PLY property before element");
            PlyProperty prop;
            std::string type;
            ss >> type;
            if (type == "list") {
                std::string ct, it;
                ss >> ct >> it >> prop.name;
                prop.is_list = true;
                prop.count_type = parse_ply_type(ct);
                prop.type = parse_ply_type(it);
            } else {
                prop.type = parse_ply_type(type);
                ss >> prop.name;
            }
            elements.back().props.push_back(prop);
        }
        // comment / obj_info lines ignored
    }

    RawMesh out;
    PlyCursor cur(data, pos, binary);
    for (const auto& el : elements) {
        int ix = -1, iy = -1, iz = -1, ilist = -1;
        for (int k = 0; k < static_cast<int>(el.props.size()); ++k) {
            const auto& n = el.props[k].name;
            if (n == "x") ix = k;
            if (n == "y") iy = k;
            if (n == "z") iz = k;
            if (el.props[k].is_list && (n == "vertex_indices" || n == "vertex_index")) ilist = k;
        }
        const bool is_vertex = el.name == "vertex";
        const bool is_face = el.name == "face";
        if (is_vertex && (ix < 0 || iy < 0 || iz < 0))
            throw ParseError(path.string() + ": vertex element lacks x/y/z");
        if (is_face && ilist < 0) throw ParseError(path.string() + ": face element lacks indices");
        std::vector<double> scalars(el.props.size());
        std::vector<int> poly;
        for (std::size_t i = 0; i < el.count; ++i) {
            for (int k = 0; k < static_cast<int>(el.props.size()); ++k) {
                const auto& prop = el.props[k];
                if (prop.is_list) {
                    const auto n = static_cast<std::size_t>(cur.read(prop.count_type));
                    if (k == ilist) poly.clear();
                    for (std::size_t j = 0; j < n; ++j) {
                        const double v = cur.read(prop.type);
                        if (k == ilist) poly.push_back(static_cast<int>(v));
                    }
                } else {
                    scalars[k] = cur.read(prop.type);
                }
            }
            if (is_vertex) {
                out.vertices.emplace_back(scalars[ix], scalars[iy], scalars[iz]);
            } else if (is_face) {
                if (poly.size() < 3) throw ParseError(path.string() + ": face with < 3 vertices");
                for (std::size_t k = 1; k + 1 < poly.size(); ++k)
                    out.triangles.push_back({poly[0], poly[k], poly[k + 1]});
            }
        }
    }
    return out;
}

}  // namespace

RawMesh read_mesh_file(const fs::path& path) {
    const std::string ext = lower_ext(path);
    if (ext == ".obj") return read_obj(path);
    if (ext == ".ply") return read_ply(path);
    throw ParseError("unsupported mesh format '" + ext + "' (expected .obj or .ply)");
}

Mesh load_mesh(const fs::path& path) {
    RawMesh raw = read_mesh_file(path);
    Mesh m;
    try {
        m = Mesh(std::move(raw.vertices), std::move(raw.triangles));
    } catch (const InvalidArgument& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    ValidationReport report = validate_mesh(m);
    if (!report.ok()) {
        std::ostringstream msg;
        msg << path.string() << ": " << report.defects.size() << " mesh defect(s), first: "
            << to_string(report.defects.front().kind) << " #" << report.defects.front().element;
        throw ValidationError(msg.str(), std::move(report));
    }
    spdlog::debug("loaded {}: {} vertices, {} faces", path.string(), m.vertex_count(),
                  m.face_count());
    return m;
}

void save_obj(const fs::path& path, std::span<const Vec3> positions,
              std::span<const Triangle> triangles) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << std::setprecision(17);
    for (const auto& p : positions) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    for (const auto& t : triangles)
        out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    if (!out) throw Error("write failed: " + path.string());
}

void save_ply(const fs::path& path, std::span<const Vec3> positions,
              std::span<const Triangle> triangles, PlyEncoding encoding) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    const bool binary = encoding == PlyEncoding::binary_little_endian;
    out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
        << "element vertex " << positions.size() << "\n"
        << "property double x\nproperty double y\nproperty double z\n"
        << "element face " << triangles.size() << "\n"
        << "property list uchar int vertex_indices\nend_header\n";
    if (binary) {
        for (const auto& p : positions) {
            const double xyz[3] = {p.x(), p.y(), p.z()};
            out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
        }
        for (const auto& t : triangles) {
            const std::uint8_t n = 3;
            const std::int32_t idx[3] = {t[0], t[1], t[2]};
            out.write(reinterpret_cast<const char*>(&n), 1);
            out.write(reinterpret_cast<const char*>(idx), sizeof(idx));
        }
    } else {
        out << std::setprecision(17);
        for (const auto& p : positions) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
        for (const auto& t : triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    }
    if (!out) throw Error("write failed: " + path.string());
}

void save_mesh(const fs::path& path, std::span<const Vec3> positions,
               std::span<const Triangle> triangles) {
    const std::string ext = lower_ext(path);
    if (ext == ".obj") return save_obj(path, positions, triangles);
    if (ext == ".ply") return save_ply(path, positions, triangles);
    throw InvalidArgument("unsupported output format '" + ext + "'");
}

nlohmann::json labels_to_json(const RegionLabeling& labels) {
    return {{"K", labels.K}, {"face_labels", labels.face_labels}};
}

RegionLabeling labels_from_json(const nlohmann::json& j) {
    try {
        RegionLabeling out;
        out.K = j.at("K").get<int>();
        out.face_labels = j.at("face_labels").get<std::vector<int>>();
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("labels JSON: ") + e.what());
    }
}

nlohmann::json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_json_file(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(1) << '\n';
}

RegionLabeling load_labels(const fs::path& path) { return labels_from_json(read_json_file(path)); }

void save_labels(const fs::path& path, const RegionLabeling& labels) {
    write_json_file(path, labels_to_json(labels));
}

std::string file_content_hash(const fs::path& path) {
    const std::vector<char> data = slurp(path);
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : data) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 1099511628211ULL;
    }
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << h;
    return ss.str();
}

}  // namespace planehead
