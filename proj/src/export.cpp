#include "ls3d/dataset_io.hpp"
#include "ls3d/errors.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ls3d {

ExportFormat parse_export_format(const std::string& text) {
    if (text == "obj") return ExportFormat::obj;
    if (text == "ply") return ExportFormat::ply;
    if (text == "csv") return ExportFormat::csv;
    throw ConfigError("unknown export format '" + text + "' (expected obj, ply or csv)");
}

const char* extension(ExportFormat format) {
    switch (format) {
        case ExportFormat::obj: return "obj";
        case ExportFormat::ply: return "ply";
        case ExportFormat::csv: return "csv";
    }
    return "csv";
}

namespace {

std::string fmt_point(const Vec3& p, char sep) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.9f%c%.9f%c%.9f", p.x(), sep, p.y(), sep, p.z());
    return buf;
}

void write_wireframe(std::ostream& out, std::span<const LineSegment3D> segs, ExportFormat format) {
    if (format == ExportFormat::obj) {
        for (const auto& s : segs) out << "v " << fmt_point(s.p1, ' ') << "\nv " << fmt_point(s.p2, ' ') << '\n';
        for (std::size_t i = 0; i < segs.size(); ++i) out << "l " << 2 * i + 1 << ' ' << 2 * i + 2 << '\n';
        return;
    }
    out << "ply\nformat ascii 1.0\nelement vertex " << 2 * segs.size()
        << "\nproperty double x\nproperty double y\nproperty double z\nelement edge " << segs.size()
        << "\nproperty int vertex1\nproperty int vertex2\nend_header\n";
    for (const auto& s : segs) out << fmt_point(s.p1, ' ') << '\n' << fmt_point(s.p2, ' ') << '\n';
    for (std::size_t i = 0; i < segs.size(); ++i) out << 2 * i << ' ' << 2 * i + 1 << '\n';
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double to_double(const std::string& s, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InputError(where + ": '" + s + "' is not a finite number");
    }
}

long to_long(const std::string& s, const std::string& where) {
    try {
        std::size_t used = 0;
        const long v = std::stol(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InputError(where + ": '" + s + "' is not an integer");
    }
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

void export_segments(std::ostream& out, std::span<const SegmentRecord> segments, ExportFormat format) {
    if (format != ExportFormat::csv) {
        std::vector<LineSegment3D> segs;
        for (const auto& r : segments) segs.push_back(r.segment);
        write_wireframe(out, segs, format);
        return;
    }
    out << "kf_id,method,x1,y1,z1,x2,y2,z2\n";
    for (const auto& r : segments)
        out << r.keyframe_id << ',' << r.method << ',' << fmt_point(r.segment.p1, ',') << ','
            << fmt_point(r.segment.p2, ',') << '\n';
}

void export_segments(const std::string& path, std::span<const SegmentRecord> segments, ExportFormat format) {
    auto out = open_out(path);
    export_segments(out, segments, format);
}

std::vector<SegmentRecord> make_records(std::span<const LineSegment3D> segments, const std::string& method) {
    std::vector<SegmentRecord> out;
    out.reserve(segments.size());
    for (const auto& s : segments) out.push_back({s.keyframe_id, method, s});
    return out;
}

std::vector<SegmentRecord> read_segments_csv(std::istream& in, const std::string& source) {
    std::vector<SegmentRecord> out;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        strip_cr(line);
        if (line.empty()) continue;
        if (row == 1 && line.rfind("kf_id", 0) == 0) continue;
        const std::string where = source + ":" + std::to_string(row);
        const auto f = split(line, ',');
        if (f.size() != 8) throw InputError(where + ": expected 8 fields, got " + std::to_string(f.size()));
        SegmentRecord r;
        r.keyframe_id = int(to_long(f[0], where));
        r.method = f[1];
        r.segment.p1 = Vec3(to_double(f[2], where), to_double(f[3], where), to_double(f[4], where));
        r.segment.p2 = Vec3(to_double(f[5], where), to_double(f[6], where), to_double(f[7], where));
        r.segment.frame = FrameTag::world;
        r.segment.keyframe_id = r.keyframe_id;
        out.push_back(r);
    }
    return out;
}

std::vector<SegmentRecord> read_segments_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return read_segments_csv(in, path);
}

void export_clusters(std::ostream& out, std::span<const Cluster> clusters, ExportFormat format) {
    if (format != ExportFormat::csv) {
        std::vector<LineSegment3D> segs;
        for (const auto& c : clusters) segs.push_back(c.representative);
        write_wireframe(out, segs, format);
        return;
    }
    out << "cluster_id,member_count,x1,y1,z1,x2,y2,z2,member_ids\n";
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        const Cluster& c = clusters[i];
        out << i << ',' << c.members.size() << ',' << fmt_point(c.representative.p1, ',') << ','
            << fmt_point(c.representative.p2, ',') << ',';
        for (std::size_t m = 0; m < c.members.size(); ++m) out << (m ? ";" : "") << c.members[m];
        out << '\n';
    }
}

void export_clusters(const std::string& path, std::span<const Cluster> clusters, ExportFormat format) {
    auto out = open_out(path);
    export_clusters(out, clusters, format);
}

std::vector<LineSegment3D> read_clusters_csv(std::istream& in, const std::string& source) {
    std::vector<LineSegment3D> out;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        strip_cr(line);
        if (line.empty()) continue;
        if (row == 1 && line.rfind("cluster_id", 0) == 0) continue;
        const std::string where = source + ":" + std::to_string(row);
        const auto f = split(line, ',');
        if (f.size() != 9) throw InputError(where + ": expected 9 fields, got " + std::to_string(f.size()));
        LineSegment3D s;
        s.p1 = Vec3(to_double(f[2], where), to_double(f[3], where), to_double(f[4], where));
        s.p2 = Vec3(to_double(f[5], where), to_double(f[6], where), to_double(f[7], where));
        s.frame = FrameTag::world;
        out.push_back(s);
    }
    return out;
}

namespace {

struct PlyProperty {
    std::string type;
    std::string name;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> props;
    bool has_list = false;
};

std::size_t type_size(const std::string& t, const std::string& path) {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "float" || t == "int32" || t == "uint32" || t == "float32") return 4;
    if (t == "double" || t == "float64") return 8;
    throw InputError("'" + path + "': unsupported PLY property type '" + t + "'");
}

double read_binary(const char* p, const std::string& t) {
    auto get = [p]<typename T>(T) {
        T v;
        std::memcpy(&v, p, sizeof v);
        return double(v);
    };
    if (t == "char" || t == "int8") return get(std::int8_t{});
    if (t == "uchar" || t == "uint8") return get(std::uint8_t{});
    if (t == "short" || t == "int16") return get(std::int16_t{});
    if (t == "ushort" || t == "uint16") return get(std::uint16_t{});
    if (t == "int" || t == "int32") return get(std::int32_t{});
    if (t == "uint" || t == "uint32") return get(std::uint32_t{});
    if (t == "float" || t == "float32") return get(float{});
    return get(double{});
}

}  // namespace

std::vector<Vec3> read_ply_points(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::string line;
    std::getline(in, line);
    strip_cr(line);
    if (line != "ply") throw InputError("'" + path + "' is not a PLY file");

    std::string format;
    std::vector<PlyElement> elements;
    while (std::getline(in, line)) {
        strip_cr(line);
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "end_header") break;
        if (key == "format") {
            ss >> format;
        } else if (key == "element") {
            PlyElement e;
            ss >> e.name >> e.count;
            elements.push_back(e);
        } else if (key == "property") {
            if (elements.empty()) throw InputError("'" + path + "': property before element");
            PlyProperty p;
            ss >> p.type;
            if (p.type == "list") {
                elements.back().has_list = true;
                std::string a, b;
                ss >> a >> b;
            }
            ss >> p.name;
            elements.back().props.push_back(p);
        }
    }
    if (format != "ascii" && format != "binary_little_endian")
        throw InputError("'" + path + "': unsupported PLY format '" + format + "'");
    if (elements.empty() || elements.front().name != "vertex")
        throw InputError("'" + path + "': vertex must be the first element");
    const PlyElement& v = elements.front();
    if (v.has_list) throw InputError("'" + path + "': list properties on vertices are not supported");
    int ix = -1, iy = -1, iz = -1;
    for (std::size_t i = 0; i < v.props.size(); ++i) {
        if (v.props[i].name == "x") ix = int(i);
        if (v.props[i].name == "y") iy = int(i);
        if (v.props[i].name == "z") iz = int(i);
    }
    if (ix < 0 || iy < 0 || iz < 0) throw InputError("'" + path + "': vertex element lacks x, y or z");

    std::vector<Vec3> points;
    points.reserve(v.count);
    std::vector<double> vals(v.props.size());
    if (format == "ascii") {
        for (std::size_t n = 0; n < v.count; ++n) {
            for (auto& x : vals)
                if (!(in >> x)) throw InputError("'" + path + "': truncated vertex data at vertex " + std::to_string(n));
            points.emplace_back(vals[std::size_t(ix)], vals[std::size_t(iy)], vals[std::size_t(iz)]);
        }
    } else {
        std::size_t stride = 0;
        std::vector<std::size_t> offsets;
        for (const auto& p : v.props) {
            offsets.push_back(stride);
            stride += type_size(p.type, path);
        }
        std::vector<char> buf(stride);
        for (std::size_t n = 0; n < v.count; ++n) {
            if (!in.read(buf.data(), std::streamsize(stride)))
                throw InputError("'" + path + "': truncated vertex data at vertex " + std::to_string(n));
            for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = read_binary(buf.data() + offsets[i], v.props[i].type);
            points.emplace_back(vals[std::size_t(ix)], vals[std::size_t(iy)], vals[std::size_t(iz)]);
        }
    }
    for (const auto& p : points)
        if (!p.allFinite()) throw InputError("'" + path + "': non-finite vertex");
    return points;
}

void write_ply_points(const std::string& path, std::span<const Vec3> points) {
    auto out = open_out(path);
    out << "ply\nformat ascii 1.0\nelement vertex " << points.size()
        << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
    for (const auto& p : points) out << fmt_point(p, ' ') << '\n';
}

}  // namespace ls3d
