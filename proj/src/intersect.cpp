#include "willmore/intersect.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

namespace willmore {

namespace {

using Vec2 = Eigen::Vector2d;

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_intersect_2d(const Vec2& p0, const Vec2& p1, const Vec2& q0, const Vec2& q1, double eps)
{
    const Vec2 r = p1 - p0;
    const Vec2 s = q1 - q0;
    const double d1 = cross2(r, q0 - p0);
    const double d2 = cross2(r, q1 - p0);
    const double d3 = cross2(s, p0 - q0);
    const double d4 = cross2(s, p1 - q0);
    const double tol = eps * (r.norm() + s.norm());
    if (((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol))
        && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol)))
        return true;
    const auto on_segment = [tol](const Vec2& a, const Vec2& b, const Vec2& p, double d) {
        if (std::abs(d) > tol) return false;
        return p.x() >= std::min(a.x(), b.x()) - tol && p.x() <= std::max(a.x(), b.x()) + tol
               && p.y() >= std::min(a.y(), b.y()) - tol && p.y() <= std::max(a.y(), b.y()) + tol;
    };
    return on_segment(p0, p1, q0, d1) || on_segment(p0, p1, q1, d2) || on_segment(q0, q1, p0, d3)
           || on_segment(q0, q1, p1, d4);
}

bool point_in_triangle_2d(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c, double eps)
{
    const double d0 = cross2(b - a, p - a);
    const double d1 = cross2(c - b, p - b);
    const double d2 = cross2(a - c, p - c);
    const bool has_neg = d0 < -eps || d1 < -eps || d2 < -eps;
    const bool has_pos = d0 > eps || d1 > eps || d2 > eps;
    return !(has_neg && has_pos);
}

bool coplanar_intersect(const Vec3& normal, const std::array<Vec3, 3>& a, const std::array<Vec3, 3>& b,
                        double eps)
{
    int drop = 0;
    normal.cwiseAbs().maxCoeff(&drop);
    const int i0 = (drop + 1) % 3;
    const int i1 = (drop + 2) % 3;
    std::array<Vec2, 3> pa;
    std::array<Vec2, 3> pb;
    for (int k = 0; k < 3; ++k) {
        pa[static_cast<std::size_t>(k)] = {a[static_cast<std::size_t>(k)][i0], a[static_cast<std::size_t>(k)][i1]};
        pb[static_cast<std::size_t>(k)] = {b[static_cast<std::size_t>(k)][i0], b[static_cast<std::size_t>(k)][i1]};
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (segments_intersect_2d(pa[static_cast<std::size_t>(i)], pa[static_cast<std::size_t>((i + 1) % 3)],
                                      pb[static_cast<std::size_t>(j)], pb[static_cast<std::size_t>((j + 1) % 3)], eps))
                return true;
    return point_in_triangle_2d(pa[0], pb[0], pb[1], pb[2], eps)
           || point_in_triangle_2d(pb[0], pa[0], pa[1], pa[2], eps);
}

// Interval of the triangle on the line L(t) = O + t*D, from signed plane
// distances d of its vertices to the other triangle's plane.
bool interval_on_line(const std::array<double, 3>& proj, const std::array<double, 3>& d, double& lo, double& hi)
{
    // find the vertex alone on its side
    int solo = -1;
    if ((d[0] > 0) != (d[1] > 0) && (d[1] > 0) == (d[2] > 0)) solo = 0;
    else if ((d[1] > 0) != (d[0] > 0) && (d[0] > 0) == (d[2] > 0)) solo = 1;
    else if ((d[2] > 0) != (d[0] > 0) && (d[0] > 0) == (d[1] > 0)) solo = 2;
    // handle zeros: treat a zero vertex as the solo one if the others straddle
    if (d[0] == 0.0 || d[1] == 0.0 || d[2] == 0.0) {
        std::array<double, 2> pts{};
        int n = 0;
        for (int k = 0; k < 3 && n < 2; ++k)
            if (d[static_cast<std::size_t>(k)] == 0.0) pts[static_cast<std::size_t>(n++)] = proj[static_cast<std::size_t>(k)];
        for (int k = 0; k < 3 && n < 2; ++k) {
            const int m = (k + 1) % 3;
            const double dk = d[static_cast<std::size_t>(k)];
            const double dm = d[static_cast<std::size_t>(m)];
            if ((dk > 0 && dm < 0) || (dk < 0 && dm > 0))
                pts[static_cast<std::size_t>(n++)] =
                    proj[static_cast<std::size_t>(k)]
                    + (proj[static_cast<std::size_t>(m)] - proj[static_cast<std::size_t>(k)]) * dk / (dk - dm);
        }
        if (n == 0) return false;
        if (n == 1) pts[1] = pts[0];
        lo = std::min(pts[0], pts[1]);
        hi = std::max(pts[0], pts[1]);
        return true;
    }
    if (solo < 0) return false;
    const auto s = static_cast<std::size_t>(solo);
    const auto a = static_cast<std::size_t>((solo + 1) % 3);
    const auto b = static_cast<std::size_t>((solo + 2) % 3);
    const double t0 = proj[s] + (proj[a] - proj[s]) * d[s] / (d[s] - d[a]);
    const double t1 = proj[s] + (proj[b] - proj[s]) * d[s] / (d[s] - d[b]);
    lo = std::min(t0, t1);
    hi = std::max(t0, t1);
    return true;
}

}  // namespace

bool triangles_intersect(const Vec3& a0, const Vec3& a1, const Vec3& a2,
                         const Vec3& b0, const Vec3& b1, const Vec3& b2, double eps)
{
    const std::array<Vec3, 3> a{a0, a1, a2};
    const std::array<Vec3, 3> b{b0, b1, b2};

    const Vec3 na = (a1 - a0).cross(a2 - a0).normalized();
    std::array<double, 3> db{};
    for (std::size_t k = 0; k < 3; ++k) {
        db[k] = na.dot(b[k] - a0);
        if (std::abs(db[k]) < eps) db[k] = 0.0;
    }
    if ((db[0] > 0 && db[1] > 0 && db[2] > 0) || (db[0] < 0 && db[1] < 0 && db[2] < 0)) return false;

    const Vec3 nb = (b1 - b0).cross(b2 - b0).normalized();
    std::array<double, 3> da{};
    for (std::size_t k = 0; k < 3; ++k) {
        da[k] = nb.dot(a[k] - b0);
        if (std::abs(da[k]) < eps) da[k] = 0.0;
    }
    if ((da[0] > 0 && da[1] > 0 && da[2] > 0) || (da[0] < 0 && da[1] < 0 && da[2] < 0)) return false;

    if (da[0] == 0.0 && da[1] == 0.0 && da[2] == 0.0) return coplanar_intersect(na, a, b, eps);

    const Vec3 dir = na.cross(nb);
    if (dir.norm() < eps) return coplanar_intersect(na, a, b, eps);
    int axis = 0;
    dir.cwiseAbs().maxCoeff(&axis);
    std::array<double, 3> pa{};
    std::array<double, 3> pb{};
    for (std::size_t k = 0; k < 3; ++k) {
        pa[k] = a[k][axis];
        pb[k] = b[k][axis];
    }
    double alo = 0, ahi = 0, blo = 0, bhi = 0;
    if (!interval_on_line(pa, da, alo, ahi)) return false;
    if (!interval_on_line(pb, db, blo, bhi)) return false;
    const double slack = eps;
    return !(ahi < blo - slack || bhi < alo - slack);
}

namespace {

struct BvhNode {
    Eigen::AlignedBox3d box;
    int begin = 0;
    int end = 0;
    int left = -1;
    int right = -1;
};

struct FaceBvh {
    std::vector<BvhNode> nodes;
    std::vector<int> order;
};

FaceBvh build_bvh(const std::vector<Eigen::AlignedBox3d>& boxes)
{
    constexpr int kLeaf = 4;
    FaceBvh bvh;
    bvh.order.resize(boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) bvh.order[i] = static_cast<int>(i);
    std::vector<Vec3> centers(boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) centers[i] = boxes[i].center();
    bvh.nodes.push_back({{}, 0, static_cast<int>(boxes.size())});
    for (std::size_t i = 0; i < bvh.nodes.size(); ++i) {
        const int b = bvh.nodes[i].begin;
        const int e = bvh.nodes[i].end;
        Eigen::AlignedBox3d box;
        Eigen::AlignedBox3d center_box;
        for (int k = b; k < e; ++k) {
            box.extend(boxes[static_cast<std::size_t>(bvh.order[static_cast<std::size_t>(k)])]);
            center_box.extend(centers[static_cast<std::size_t>(bvh.order[static_cast<std::size_t>(k)])]);
        }
        bvh.nodes[i].box = box;
        if (e - b <= kLeaf) continue;
        int axis = 0;
        center_box.diagonal().maxCoeff(&axis);
        const int mid = b + (e - b) / 2;
        std::nth_element(bvh.order.begin() + b, bvh.order.begin() + mid, bvh.order.begin() + e,
                         [&](int x, int y) {
                             return centers[static_cast<std::size_t>(x)][axis] < centers[static_cast<std::size_t>(y)][axis];
                         });
        bvh.nodes[i].left = static_cast<int>(bvh.nodes.size());
        bvh.nodes.push_back({{}, b, mid});
        bvh.nodes[i].right = static_cast<int>(bvh.nodes.size());
        bvh.nodes.push_back({{}, mid, e});
    }
    return bvh;
}

bool share_vertex(const Face& a, const Face& b)
{
    for (int x : a)
        for (int y : b)
            if (x == y) return true;
    return false;
}

std::vector<Vec3> normalized_positions(const Mesh& mesh)
{
    const Vec3 c = mesh.centroid();
    const double diag = mesh.bbox_diagonal();
    const double scale = diag > 0.0 ? 1.0 / diag : 1.0;
    std::vector<Vec3> out(mesh.positions().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (mesh.positions()[i] - c) * scale;
    return out;
}

constexpr double kIntersectionEps = 1e-12;

// Smallest j > i whose face intersects face i, or -1.
int first_partner(int i, const FaceBvh& bvh, const std::vector<Eigen::AlignedBox3d>& boxes,
                  const std::vector<Vec3>& p, const std::vector<Face>& faces)
{
    const auto& fi = faces[static_cast<std::size_t>(i)];
    const auto& box = boxes[static_cast<std::size_t>(i)];
    int best = -1;
    std::vector<int> stack{0};
    while (!stack.empty()) {
        const auto& node = bvh.nodes[static_cast<std::size_t>(stack.back())];
        stack.pop_back();
        if (!node.box.intersects(box)) continue;
        if (node.left >= 0) {
            stack.push_back(node.left);
            stack.push_back(node.right);
            continue;
        }
        for (int k = node.begin; k < node.end; ++k) {
            const int j = bvh.order[static_cast<std::size_t>(k)];
            if (j <= i || (best >= 0 && j >= best)) continue;
            if (!boxes[static_cast<std::size_t>(j)].intersects(box)) continue;
            const auto& fj = faces[static_cast<std::size_t>(j)];
            if (share_vertex(fi, fj)) continue;
            if (triangles_intersect(p[static_cast<std::size_t>(fi[0])], p[static_cast<std::size_t>(fi[1])],
                                    p[static_cast<std::size_t>(fi[2])], p[static_cast<std::size_t>(fj[0])],
                                    p[static_cast<std::size_t>(fj[1])], p[static_cast<std::size_t>(fj[2])],
                                    kIntersectionEps))
                best = j;
        }
    }
    return best;
}

}  // namespace

IntersectionResult self_intersects(const Mesh& mesh, Exec exec)
{
    const auto p = normalized_positions(mesh);
    const auto& faces = mesh.faces();
    const int nf = mesh.num_faces();
    std::vector<Eigen::AlignedBox3d> boxes(faces.size());
    for (std::size_t f = 0; f < faces.size(); ++f) {
        Eigen::AlignedBox3d b;
        for (int v : faces[f]) b.extend(p[static_cast<std::size_t>(v)]);
        b.min().array() -= kIntersectionEps;
        b.max().array() += kIntersectionEps;
        boxes[f] = b;
    }
    const auto bvh = build_bvh(boxes);

    IntersectionResult result;
    if (exec == Exec::serial) {
        for (int i = 0; i < nf; ++i) {
            const int j = first_partner(i, bvh, boxes, p, faces);
            if (j >= 0) {
                result.intersects = true;
                result.witness = std::make_pair(i, j);
                return result;
            }
        }
        return result;
    }

    std::atomic<int> best_i{std::numeric_limits<int>::max()};
    std::vector<int> partner(faces.size(), -1);
#pragma omp parallel for schedule(dynamic, 64)
    for (int i = 0; i < nf; ++i) {
        if (i > best_i.load(std::memory_order_relaxed)) continue;
        const int j = first_partner(i, bvh, boxes, p, faces);
        if (j < 0) continue;
        partner[static_cast<std::size_t>(i)] = j;
        int cur = best_i.load();
        while (i < cur && !best_i.compare_exchange_weak(cur, i)) {
        }
    }
    const int i = best_i.load();
    if (i != std::numeric_limits<int>::max()) {
        result.intersects = true;
        result.witness = std::make_pair(i, partner[static_cast<std::size_t>(i)]);
    }
    return result;
}

IntersectionResult self_intersects_brute_force(const Mesh& mesh)
{
    const auto p = normalized_positions(mesh);
    const auto& faces = mesh.faces();
    IntersectionResult result;
    for (std::size_t i = 0; i < faces.size(); ++i) {
        for (std::size_t j = i + 1; j < faces.size(); ++j) {
            if (share_vertex(faces[i], faces[j])) continue;
            const auto& a = faces[i];
            const auto& b = faces[j];
            if (triangles_intersect(p[static_cast<std::size_t>(a[0])], p[static_cast<std::size_t>(a[1])],
                                    p[static_cast<std::size_t>(a[2])], p[static_cast<std::size_t>(b[0])],
                                    p[static_cast<std::size_t>(b[1])], p[static_cast<std::size_t>(b[2])],
                                    kIntersectionEps)) {
                result.intersects = true;
                result.witness = std::make_pair(static_cast<int>(i), static_cast<int>(j));
                return result;
            }
        }
    }
    return result;
}

}  // namespace willmore
