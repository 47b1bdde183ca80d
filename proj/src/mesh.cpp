#include "willmore/mesh.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace willmore {

namespace {

constexpr double kDegenerateRelativeArea = 1e-12;

std::uint64_t edge_key(int a, int b)
{
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (lo << 32) | hi;
}

struct HalfedgeRecord {
    std::uint64_t key;
    int halfedge;
};

// Halfedges grouped by undirected edge.
std::vector<HalfedgeRecord> sorted_halfedges(std::span<const Face> faces,
                                             const std::vector<char>& face_ok)
{
    std::vector<HalfedgeRecord> records;
    records.reserve(faces.size() * 3);
    for (std::size_t f = 0; f < faces.size(); ++f) {
        if (!face_ok[f]) continue;
        for (int k = 0; k < 3; ++k) {
            const int a = faces[f][static_cast<std::size_t>(k)];
            const int b = faces[f][static_cast<std::size_t>((k + 1) % 3)];
            records.push_back({edge_key(a, b), static_cast<int>(3 * f) + k});
        }
    }
    std::sort(records.begin(), records.end(), [](const HalfedgeRecord& x, const HalfedgeRecord& y) {
        return x.key != y.key ? x.key < y.key : x.halfedge < y.halfedge;
    });
    return records;
}

int from_of(std::span<const Face> faces, int h)
{
    return faces[static_cast<std::size_t>(h / 3)][static_cast<std::size_t>(h % 3)];
}

int next_of(int h) { return 3 * (h / 3) + (h % 3 + 1) % 3; }
int prev_of(int h) { return 3 * (h / 3) + (h % 3 + 2) % 3; }

double bbox_diagonal_of(std::span<const Vec3> vertices)
{
    if (vertices.empty()) return 0.0;
    Eigen::AlignedBox3d box;
    for (const auto& p : vertices) box.extend(p);
    return box.diagonal().norm();
}

struct UnionFind {
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x)
    {
        while (parent[static_cast<std::size_t>(x)] != x) {
            auto& p = parent[static_cast<std::size_t>(x)];
            p = parent[static_cast<std::size_t>(p)];
            x = p;
        }
        return x;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
    std::vector<int> parent;
};

}  // namespace

std::string_view to_string(ViolationKind kind)
{
    switch (kind) {
    case ViolationKind::non_finite_position: return "non-finite position";
    case ViolationKind::index_out_of_range: return "index out of range";
    case ViolationKind::repeated_vertex: return "repeated vertex in face";
    case ViolationKind::degenerate_face: return "degenerate face";
    case ViolationKind::boundary_edge: return "boundary edge";
    case ViolationKind::non_manifold_edge: return "non-manifold edge";
    case ViolationKind::inconsistent_orientation: return "inconsistent orientation";
    case ViolationKind::non_manifold_vertex: return "non-manifold vertex";
    case ViolationKind::isolated_vertex: return "isolated vertex";
    case ViolationKind::disconnected: return "disconnected";
    case ViolationKind::invalid_euler_characteristic: return "invalid euler characteristic";
    }
    return "unknown";
}

void ValidationReport::add(ViolationKind kind, long index, std::string detail)
{
    entries_.push_back({kind, index, std::move(detail)});
}

std::size_t ValidationReport::count(ViolationKind kind) const
{
    return static_cast<std::size_t>(std::count_if(
        entries_.begin(), entries_.end(), [kind](const Violation& v) { return v.kind == kind; }));
}

std::string ValidationReport::summary() const
{
    std::map<ViolationKind, std::size_t> counts;
    for (const auto& e : entries_) ++counts[e.kind];
    std::ostringstream out;
    bool first = true;
    for (const auto& [kind, n] : counts) {
        if (!first) out << '\n';
        first = false;
        // pluralise the label: "boundary edge" -> "boundary edges"
        std::string label(to_string(kind));
        if (kind == ViolationKind::boundary_edge || kind == ViolationKind::non_manifold_edge
            || kind == ViolationKind::degenerate_face || kind == ViolationKind::non_manifold_vertex
            || kind == ViolationKind::isolated_vertex)
            label += 's';
        out << label << ": " << n;
    }
    return out.str();
}

ValidationReport validate(std::span<const Vec3> vertices, std::span<const Face> faces,
                          Boundary boundary)
{
    ValidationReport report;
    const int nv = static_cast<int>(vertices.size());

    for (int v = 0; v < nv; ++v)
        if (!vertices[static_cast<std::size_t>(v)].allFinite())
            report.add(ViolationKind::non_finite_position, v);

    const double diag = bbox_diagonal_of(vertices);
    std::vector<char> face_ok(faces.size(), 1);
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const auto& face = faces[f];
        bool in_range = true;
        for (int idx : face) in_range = in_range && idx >= 0 && idx < nv;
        if (!in_range) {
            report.add(ViolationKind::index_out_of_range, static_cast<long>(f));
            face_ok[f] = 0;
            continue;
        }
        if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
            report.add(ViolationKind::repeated_vertex, static_cast<long>(f));
            face_ok[f] = 0;
            continue;
        }
        const Vec3& p0 = vertices[static_cast<std::size_t>(face[0])];
        const Vec3& p1 = vertices[static_cast<std::size_t>(face[1])];
        const Vec3& p2 = vertices[static_cast<std::size_t>(face[2])];
        const double area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
        if (!(area > kDegenerateRelativeArea * diag * diag))
            report.add(ViolationKind::degenerate_face, static_cast<long>(f));
    }

    const auto records = sorted_halfedges(faces, face_ok);
    std::vector<int> twin(faces.size() * 3, -1);
    std::vector<char> vertex_bad(static_cast<std::size_t>(nv), 0);
    std::size_t num_edges = 0;
    bool topology_ok = true;
    for (std::size_t i = 0; i < records.size();) {
        std::size_t j = i;
        while (j < records.size() && records[j].key == records[i].key) ++j;
        ++num_edges;
        const std::size_t multiplicity = j - i;
        const int h0 = records[i].halfedge;
        const int a = from_of(faces, h0);
        const int b = from_of(faces, next_of(h0));
        const auto mark = [&] {
            vertex_bad[static_cast<std::size_t>(a)] = 1;
            vertex_bad[static_cast<std::size_t>(b)] = 1;
            topology_ok = false;
        };
        if (multiplicity == 1) {
            if (boundary == Boundary::forbidden) {
                report.add(ViolationKind::boundary_edge, std::min(a, b),
                           std::to_string(a) + "-" + std::to_string(b));
                topology_ok = false;
            }
        } else if (multiplicity > 2) {
            report.add(ViolationKind::non_manifold_edge, std::min(a, b),
                       std::to_string(a) + "-" + std::to_string(b) + " shared by "
                           + std::to_string(multiplicity) + " faces");
            mark();
        } else {
            const int h1 = records[i + 1].halfedge;
            if (from_of(faces, h0) == from_of(faces, h1)) {
                report.add(ViolationKind::inconsistent_orientation, std::min(a, b),
                           std::to_string(a) + "-" + std::to_string(b));
                mark();
            } else {
                twin[static_cast<std::size_t>(h0)] = h1;
                twin[static_cast<std::size_t>(h1)] = h0;
            }
        }
        i = j;
    }

    // Vertex fans: walk around each vertex through twins and require a
    // single cycle (or a single path when boundaries are allowed).
    std::vector<std::vector<int>> outgoing(static_cast<std::size_t>(nv));
    for (std::size_t f = 0; f < faces.size(); ++f) {
        if (!face_ok[f]) continue;
        for (int k = 0; k < 3; ++k)
            outgoing[static_cast<std::size_t>(faces[f][static_cast<std::size_t>(k)])].push_back(
                static_cast<int>(3 * f) + k);
    }
    for (int v = 0; v < nv; ++v) {
        const auto& out = outgoing[static_cast<std::size_t>(v)];
        if (out.empty()) {
            report.add(ViolationKind::isolated_vertex, v);
            continue;
        }
        if (vertex_bad[static_cast<std::size_t>(v)]) continue;
        std::size_t visited = 1;
        bool hit_boundary = false;
        int h = out.front();
        for (;;) {
            const int t = twin[static_cast<std::size_t>(prev_of(h))];
            if (t < 0) {
                hit_boundary = true;
                break;
            }
            if (t == out.front()) break;
            h = t;
            if (++visited > out.size()) break;
        }
        if (hit_boundary) {
            h = out.front();
            for (;;) {
                const int t = twin[static_cast<std::size_t>(h)];
                if (t < 0) break;
                h = next_of(t);
                if (++visited > out.size()) break;
            }
        }
        if (visited != out.size()) {
            report.add(ViolationKind::non_manifold_vertex, v);
            topology_ok = false;
        }
    }

    UnionFind components(faces.size());
    for (std::size_t h = 0; h < twin.size(); ++h)
        if (twin[h] >= 0) components.unite(static_cast<int>(h / 3), twin[h] / 3);
    std::unordered_set<int> roots;
    for (std::size_t f = 0; f < faces.size(); ++f)
        if (face_ok[f]) roots.insert(components.find(static_cast<int>(f)));
    if (roots.size() > 1) {
        report.add(ViolationKind::disconnected, -1,
                   std::to_string(roots.size()) + " face components");
        topology_ok = false;
    }

    if (boundary == Boundary::forbidden && topology_ok && report.empty()) {
        const long chi = static_cast<long>(nv) - static_cast<long>(num_edges)
                         + static_cast<long>(faces.size());
        if (chi > 2 || chi % 2 != 0)
            report.add(ViolationKind::invalid_euler_characteristic, -1, "chi = " + std::to_string(chi));
    }
    if (faces.empty()) report.add(ViolationKind::disconnected, -1, "no faces");
    return report;
}

Mesh::Mesh(std::vector<Vec3> vertices, std::vector<Face> faces, Boundary boundary)
    : positions_(std::move(vertices))
{
    const auto report = validate(positions_, faces, boundary);
    if (!report.empty()) throw MeshError("invalid mesh: " + report.summary());

    auto topo = std::make_shared<Topology>();
    topo->num_vertices = static_cast<int>(positions_.size());
    const std::vector<char> all_ok(faces.size(), 1);
    const auto records = sorted_halfedges(faces, all_ok);
    topo->twin.assign(faces.size() * 3, -1);
    for (std::size_t i = 0; i < records.size();) {
        std::size_t j = i;
        while (j < records.size() && records[j].key == records[i].key) ++j;
        const int h0 = records[i].halfedge;
        const int a = from_of(faces, h0);
        const int b = from_of(faces, next_of(h0));
        topo->edges.push_back({std::min(a, b), std::max(a, b)});
        if (j - i == 2) {
            topo->twin[static_cast<std::size_t>(h0)] = records[i + 1].halfedge;
            topo->twin[static_cast<std::size_t>(records[i + 1].halfedge)] = h0;
        } else {
            ++topo->num_boundary_edges;
        }
        i = j;
    }

    topo->corner_offset.assign(positions_.size() + 1, 0);
    for (const auto& face : faces)
        for (int v : face) ++topo->corner_offset[static_cast<std::size_t>(v) + 1];
    std::partial_sum(topo->corner_offset.begin(), topo->corner_offset.end(),
                     topo->corner_offset.begin());
    topo->corners.resize(faces.size() * 3);
    std::vector<int> fill(topo->corner_offset.begin(), topo->corner_offset.end() - 1);
    for (std::size_t f = 0; f < faces.size(); ++f)
        for (int k = 0; k < 3; ++k)
            topo->corners[static_cast<std::size_t>(fill[static_cast<std::size_t>(faces[f][static_cast<std::size_t>(k)])]++)] =
                static_cast<int>(3 * f) + k;
    topo->faces = std::move(faces);
    topology_ = std::move(topo);
}

Mesh::Mesh(std::vector<Vec3> positions, std::shared_ptr<const Topology> topology)
    : positions_(std::move(positions)), topology_(std::move(topology))
{
}

Mesh Mesh::with_positions(std::vector<Vec3> positions) const
{
    if (positions.size() != positions_.size())
        throw MeshError("with_positions: vertex count mismatch");
    for (const auto& p : positions)
        if (!p.allFinite()) throw MeshError("with_positions: non-finite position");
    return Mesh(std::move(positions), topology_);
}

std::span<const int> Mesh::vertex_corners(int v) const
{
    const auto& t = *topology_;
    const auto begin = static_cast<std::size_t>(t.corner_offset[static_cast<std::size_t>(v)]);
    const auto end = static_cast<std::size_t>(t.corner_offset[static_cast<std::size_t>(v) + 1]);
    return std::span<const int>(t.corners).subspan(begin, end - begin);
}

std::vector<int> Mesh::vertex_neighbors(int v) const
{
    std::vector<int> out;
    for (int c : vertex_corners(v)) {
        out.push_back(to(c));
        out.push_back(from(prev(c)));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

int Mesh::euler_characteristic() const { return num_vertices() - num_edges() + num_faces(); }

double Mesh::bbox_diagonal() const { return bbox_diagonal_of(positions_); }

Vec3 Mesh::centroid() const
{
    Vec3 c = Vec3::Zero();
    for (const auto& p : positions_) c += p;
    return c / static_cast<double>(positions_.size());
}

EulerGenus euler_genus(const Mesh& mesh)
{
    if (!mesh.closed()) throw MeshError("euler_genus: mesh has boundary");
    const int chi = mesh.euler_characteristic();
    if (chi > 2 || chi % 2 != 0)
        throw MeshError("euler_genus: invalid euler characteristic " + std::to_string(chi));
    return {chi, (2 - chi) / 2};
}

double diameter_brute_force(std::span<const Vec3> points, Exec exec)
{
    const long n = static_cast<long>(points.size());
    double best = 0.0;
    if (exec == Exec::parallel) {
#pragma omp parallel for reduction(max : best) schedule(dynamic, 64)
        for (long i = 0; i < n; ++i)
            for (long j = i + 1; j < n; ++j)
                best = std::max(best, (points[static_cast<std::size_t>(i)] - points[static_cast<std::size_t>(j)]).squaredNorm());
    } else {
        for (long i = 0; i < n; ++i)
            for (long j = i + 1; j < n; ++j)
                best = std::max(best, (points[static_cast<std::size_t>(i)] - points[static_cast<std::size_t>(j)]).squaredNorm());
    }
    return std::sqrt(best);
}

namespace {

struct PointNode {
    Eigen::AlignedBox3d box;
    int begin = 0;
    int end = 0;
    int left = -1;
    int right = -1;
};

double max_box_distance2(const Eigen::AlignedBox3d& a, const Eigen::AlignedBox3d& b)
{
    double d2 = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double d = std::max(std::abs(a.max()[k] - b.min()[k]), std::abs(b.max()[k] - a.min()[k]));
        d2 += d * d;
    }
    return d2;
}

double diameter_branch_and_bound(std::span<const Vec3> input)
{
    std::vector<Vec3> pts(input.begin(), input.end());
    std::vector<PointNode> nodes;
    constexpr int kLeaf = 16;
    // iterative build
    nodes.push_back({{}, 0, static_cast<int>(pts.size())});
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const int b = nodes[i].begin;
        const int e = nodes[i].end;
        Eigen::AlignedBox3d box;
        for (int k = b; k < e; ++k) box.extend(pts[static_cast<std::size_t>(k)]);
        nodes[i].box = box;
        if (e - b <= kLeaf) continue;
        int axis = 0;
        box.diagonal().maxCoeff(&axis);
        const int mid = b + (e - b) / 2;
        std::nth_element(pts.begin() + b, pts.begin() + mid, pts.begin() + e,
                         [axis](const Vec3& x, const Vec3& y) { return x[axis] < y[axis]; });
        nodes[i].left = static_cast<int>(nodes.size());
        nodes.push_back({{}, b, mid});
        nodes[i].right = static_cast<int>(nodes.size());
        nodes.push_back({{}, mid, e});
    }

    // seed with extreme points along the axes
    double best = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
        const auto [lo, hi] = std::minmax_element(
            pts.begin(), pts.end(), [axis](const Vec3& x, const Vec3& y) { return x[axis] < y[axis]; });
        best = std::max(best, (*lo - *hi).squaredNorm());
    }

    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [ia, ib] = stack.back();
        stack.pop_back();
        const auto& a = nodes[static_cast<std::size_t>(ia)];
        const auto& b = nodes[static_cast<std::size_t>(ib)];
        if (max_box_distance2(a.box, b.box) <= best) continue;
        const bool a_leaf = a.left < 0;
        const bool b_leaf = b.left < 0;
        if (a_leaf && b_leaf) {
            for (int i = a.begin; i < a.end; ++i)
                for (int j = b.begin; j < b.end; ++j)
                    best = std::max(best, (pts[static_cast<std::size_t>(i)] - pts[static_cast<std::size_t>(j)]).squaredNorm());
            continue;
        }
        if (ia == ib) {
            stack.push_back({a.left, a.left});
            stack.push_back({a.right, a.right});
            stack.push_back({a.left, a.right});
        } else if (!a_leaf && (b_leaf || a.end - a.begin >= b.end - b.begin)) {
            stack.push_back({a.left, ib});
            stack.push_back({a.right, ib});
        } else {
            stack.push_back({ia, b.left});
            stack.push_back({ia, b.right});
        }
    }
    return std::sqrt(best);
}

}  // namespace

double diameter(const Mesh& mesh, Exec exec)
{
    constexpr int kBruteForceLimit = 20000;
    if (mesh.num_vertices() <= kBruteForceLimit) return diameter_brute_force(mesh.positions(), exec);
    return diameter_branch_and_bound(mesh.positions());
}

SubMesh::SubMesh(const Mesh& parent, std::vector<int> faces) : parent_(parent), faces_(std::move(faces))
{
    if (faces_.empty()) throw MeshError("SubMesh: empty face subset");
    std::sort(faces_.begin(), faces_.end());
    faces_.erase(std::unique(faces_.begin(), faces_.end()), faces_.end());
    std::vector<char> member(static_cast<std::size_t>(parent_.num_faces()), 0);
    for (int f : faces_) {
        if (f < 0 || f >= parent_.num_faces()) throw MeshError("SubMesh: face index out of range");
        member[static_cast<std::size_t>(f)] = 1;
    }

    // edge connectivity
    std::vector<char> seen(member.size(), 0);
    std::vector<int> queue{faces_.front()};
    seen[static_cast<std::size_t>(faces_.front())] = 1;
    std::size_t reached = 0;
    while (!queue.empty()) {
        const int f = queue.back();
        queue.pop_back();
        ++reached;
        for (int k = 0; k < 3; ++k) {
            const int t = parent_.twin(3 * f + k);
            if (t < 0) continue;
            const int g = Mesh::face_of(t);
            if (member[static_cast<std::size_t>(g)] && !seen[static_cast<std::size_t>(g)]) {
                seen[static_cast<std::size_t>(g)] = 1;
                queue.push_back(g);
            }
        }
    }
    if (reached != faces_.size()) throw MeshError("SubMesh: face subset is not edge-connected");

    std::map<int, int> boundary_from;  // from-vertex -> boundary halfedge
    for (int f : faces_) {
        for (int k = 0; k < 3; ++k) {
            const int h = 3 * f + k;
            const int t = parent_.twin(h);
            if (t >= 0 && member[static_cast<std::size_t>(Mesh::face_of(t))]) continue;
            if (!boundary_from.emplace(parent_.from(h), h).second)
                throw MeshError("SubMesh: boundary loops touch at vertex " + std::to_string(parent_.from(h)));
        }
    }
    while (!boundary_from.empty()) {
        std::vector<int> loop;
        int v = boundary_from.begin()->first;
        while (true) {
            const auto it = boundary_from.find(v);
            if (it == boundary_from.end()) break;
            loop.push_back(v);
            v = parent_.to(it->second);
            boundary_from.erase(it);
        }
        if (v != loop.front()) throw MeshError("SubMesh: open boundary chain");
        loops_.push_back(std::move(loop));
    }
}

double SubMesh::boundary_length() const
{
    double length = 0.0;
    for (const auto& loop : loops_)
        for (std::size_t i = 0; i < loop.size(); ++i)
            length += (parent_.position(loop[i]) - parent_.position(loop[(i + 1) % loop.size()])).norm();
    return length;
}

}  // namespace willmore
