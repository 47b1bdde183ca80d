#include "willmore/mesh_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace willmore {

namespace {

static_assert(std::endian::native == std::endian::little, "PLY I/O assumes a little-endian host");

std::string lower_extension(const std::filesystem::path& path)
{
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

[[noreturn]] void fail_at(std::size_t line, const std::string& what)
{
    throw ParseError(what + " at line " + std::to_string(line));
}

double parse_double(std::string_view token, std::size_t line)
{
    // from_chars for double is available in libstdc++ 11
    double value = 0.0;
    const auto* first = token.data();
    const auto* last = token.data() + token.size();
    if (!token.empty() && token.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) fail_at(line, "parse error: bad number '" + std::string(token) + "'");
    return value;
}

long parse_index(std::string_view token, std::size_t line)
{
    const auto slash = token.find('/');
    if (slash != std::string_view::npos) token = token.substr(0, slash);
    long value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        fail_at(line, "parse error: bad face index '" + std::string(token) + "'");
    return value;
}

}  // namespace

RawMesh read_obj(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    RawMesh raw;
    std::string text;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        std::istringstream line(text);
        std::string tag;
        if (!(line >> tag) || tag.front() == '#') continue;
        std::vector<std::string> tokens;
        for (std::string t; line >> t;) tokens.push_back(t);
        if (tag == "v") {
            if (tokens.size() < 3) fail_at(line_no, "parse error: vertex needs 3 coordinates");
            raw.vertices.emplace_back(parse_double(tokens[0], line_no), parse_double(tokens[1], line_no),
                                      parse_double(tokens[2], line_no));
        } else if (tag == "f") {
            if (tokens.size() != 3) fail_at(line_no, "non-triangle face");
            Face face{};
            for (std::size_t k = 0; k < 3; ++k) {
                const long idx = parse_index(tokens[k], line_no);
                const long n = static_cast<long>(raw.vertices.size());
                const long zero_based = idx > 0 ? idx - 1 : n + idx;
                if (idx == 0 || zero_based < 0 || zero_based >= n) fail_at(line_no, "index out of range");
                face[k] = static_cast<int>(zero_based);
            }
            raw.faces.push_back(face);
        } else {
            ++raw.ignored_records;
        }
    }
    return raw;
}

RawMesh read_ply(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    std::getline(in, line);
    ++line_no;
    if (line != "ply") fail_at(line_no, "parse error: missing ply magic");

    long num_vertices = -1;
    long num_faces = -1;
    std::vector<std::string> vertex_types;
    std::string current;
    std::string count_type;
    std::string index_type;
    bool binary_le = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream tokens(line);
        std::string word;
        tokens >> word;
        if (word == "format") {
            std::string fmt;
            tokens >> fmt;
            binary_le = fmt == "binary_little_endian";
        } else if (word == "element") {
            long n = 0;
            tokens >> current >> n;
            if (current == "vertex") num_vertices = n;
            else if (current == "face") num_faces = n;
            else fail_at(line_no, "parse error: unsupported element " + current);
        } else if (word == "property") {
            std::string type;
            tokens >> type;
            if (current == "vertex") {
                vertex_types.push_back(type);
            } else if (current == "face") {
                if (type != "list") fail_at(line_no, "parse error: face property must be a list");
                tokens >> count_type >> index_type;
            }
        } else if (word == "end_header") {
            break;
        }
    }
    if (!binary_le) throw ParseError("only binary_little_endian PLY is supported");
    if (num_vertices < 0 || num_faces < 0 || vertex_types.size() < 3)
        throw ParseError("parse error: incomplete PLY header");
    const bool doubles = vertex_types[0] == "double" || vertex_types[0] == "float64";
    const bool floats = vertex_types[0] == "float" || vertex_types[0] == "float32";
    if (!doubles && !floats) throw ParseError("parse error: unsupported vertex property type");
    if (vertex_types.size() != 3) throw ParseError("parse error: only x y z vertex properties supported");
    if (!(count_type == "uchar" || count_type == "uint8") || !(index_type == "int" || index_type == "int32"))
        throw ParseError("parse error: face list must be uchar/int");

    RawMesh raw;
    raw.vertices.resize(static_cast<std::size_t>(num_vertices));
    for (auto& p : raw.vertices) {
        for (int k = 0; k < 3; ++k) {
            if (doubles) {
                double x = 0.0;
                in.read(reinterpret_cast<char*>(&x), sizeof x);
                p[k] = x;
            } else {
                float x = 0.0F;
                in.read(reinterpret_cast<char*>(&x), sizeof x);
                p[k] = x;
            }
        }
    }
    raw.faces.resize(static_cast<std::size_t>(num_faces));
    for (std::size_t f = 0; f < raw.faces.size(); ++f) {
        std::uint8_t count = 0;
        in.read(reinterpret_cast<char*>(&count), 1);
        if (count != 3) throw ParseError("non-triangle face at face " + std::to_string(f));
        std::int32_t idx[3];
        in.read(reinterpret_cast<char*>(idx), sizeof idx);
        for (int k = 0; k < 3; ++k) {
            if (idx[k] < 0 || idx[k] >= num_vertices)
                throw ParseError("index out of range at face " + std::to_string(f));
            raw.faces[f][static_cast<std::size_t>(k)] = idx[k];
        }
    }
    if (!in) throw ParseError("parse error: truncated PLY body");
    return raw;
}

Mesh load_mesh(const std::filesystem::path& path)
{
    const auto ext = lower_extension(path);
    RawMesh raw;
    if (ext == ".obj") raw = read_obj(path);
    else if (ext == ".ply") raw = read_ply(path);
    else throw ParseError("unknown mesh extension '" + ext + "'");
    return Mesh(std::move(raw.vertices), std::move(raw.faces));
}

void save_obj(const Mesh& mesh, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path.string());
    out << std::setprecision(17);
    for (const auto& p : mesh.positions()) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    for (const auto& f : mesh.faces()) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    if (!out) throw ParseError("write failed for " + path.string());
}

void save_ply(const Mesh& mesh, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path.string());
    out << "ply\nformat binary_little_endian 1.0\n"
        << "element vertex " << mesh.num_vertices() << "\n"
        << "property double x\nproperty double y\nproperty double z\n"
        << "element face " << mesh.num_faces() << "\n"
        << "property list uchar int vertex_indices\nend_header\n";
    for (const auto& p : mesh.positions()) out.write(reinterpret_cast<const char*>(p.data()), 3 * sizeof(double));
    for (const auto& f : mesh.faces()) {
        const std::uint8_t count = 3;
        out.write(reinterpret_cast<const char*>(&count), 1);
        const std::int32_t idx[3] = {f[0], f[1], f[2]};
        out.write(reinterpret_cast<const char*>(idx), sizeof idx);
    }
    if (!out) throw ParseError("write failed for " + path.string());
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path)
{
    const auto ext = lower_extension(path);
    if (ext == ".ply") save_ply(mesh, path);
    else save_obj(mesh, path);
}

}  // namespace willmore
