#include "willmore/operators.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace willmore {

FaceGeometry face_geometry(const Vec3& p0, const Vec3& p1, const Vec3& p2)
{
    const std::array<const Vec3*, 3> p{&p0, &p1, &p2};
    const double two_area = (p1 - p0).cross(p2 - p0).norm();
    FaceGeometry g{};
    g.area = 0.5 * two_area;
    std::array<double, 3> dot{};
    for (std::size_t k = 0; k < 3; ++k) {
        const Vec3& a = *p[k];
        const Vec3& b = *p[(k + 1) % 3];
        const Vec3& c = *p[(k + 2) % 3];
        dot[k] = (b - a).dot(c - a);
        g.cot[k] = dot[k] / two_area;
    }
    g.obtuse = dot[0] < 0.0 || dot[1] < 0.0 || dot[2] < 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        if (g.obtuse) {
            g.mixed[k] = dot[k] < 0.0 ? 0.5 * g.area : 0.25 * g.area;
        } else {
            const Vec3& a = *p[k];
            const double l_next = (*p[(k + 1) % 3] - a).squaredNorm();  // opposite corner k+2
            const double l_prev = (*p[(k + 2) % 3] - a).squaredNorm();  // opposite corner k+1
            g.mixed[k] = (l_next * g.cot[(k + 2) % 3] + l_prev * g.cot[(k + 1) % 3]) / 8.0;
        }
    }
    return g;
}

double degenerate_area_threshold(const Mesh& mesh)
{
    const double diag = mesh.bbox_diagonal();
    return 1e-12 * diag * diag;
}

namespace {

[[noreturn]] void throw_degenerate(int f)
{
    throw MeshError("degenerate face " + std::to_string(f));
}

}  // namespace

LaplacianData laplacian_data(const Mesh& mesh, Exec exec)
{
    const auto& faces = mesh.faces();
    const auto& x = mesh.positions();
    const int nf = mesh.num_faces();
    const auto nv = static_cast<std::size_t>(mesh.num_vertices());
    const double min_area = degenerate_area_threshold(mesh);
    LaplacianData out{VertexVectorField(nv, Vec3::Zero()), VertexScalarField(nv, 0.0)};

    if (exec == Exec::serial) {
        for (int f = 0; f < nf; ++f) {
            const auto& face = faces[static_cast<std::size_t>(f)];
            const auto g = face_geometry(x[static_cast<std::size_t>(face[0])], x[static_cast<std::size_t>(face[1])],
                                         x[static_cast<std::size_t>(face[2])]);
            if (!(g.area > min_area)) throw_degenerate(f);
            for (std::size_t k = 0; k < 3; ++k) {
                const auto i = static_cast<std::size_t>(face[(k + 1) % 3]);
                const auto j = static_cast<std::size_t>(face[(k + 2) % 3]);
                const Vec3 flux = 0.5 * g.cot[k] * (x[j] - x[i]);
                out.laplacian[i] += flux;
                out.laplacian[j] -= flux;
                out.area[static_cast<std::size_t>(face[k])] += g.mixed[k];
            }
        }
        return out;
    }

    std::vector<Vec3> corner_lap(static_cast<std::size_t>(nf) * 3);
    std::vector<double> corner_area(static_cast<std::size_t>(nf) * 3);
    int bad_face = -1;
#pragma omp parallel for schedule(static)
    for (int f = 0; f < nf; ++f) {
        const auto& face = faces[static_cast<std::size_t>(f)];
        const Vec3& p0 = x[static_cast<std::size_t>(face[0])];
        const Vec3& p1 = x[static_cast<std::size_t>(face[1])];
        const Vec3& p2 = x[static_cast<std::size_t>(face[2])];
        const auto g = face_geometry(p0, p1, p2);
        if (!(g.area > min_area)) {
#pragma omp critical
            bad_face = f;
        }
        const std::array<const Vec3*, 3> p{&p0, &p1, &p2};
        for (std::size_t k = 0; k < 3; ++k) {
            const Vec3& a = *p[k];
            corner_lap[3 * static_cast<std::size_t>(f) + k] =
                0.5 * g.cot[(k + 2) % 3] * (*p[(k + 1) % 3] - a) + 0.5 * g.cot[(k + 1) % 3] * (*p[(k + 2) % 3] - a);
            corner_area[3 * static_cast<std::size_t>(f) + k] = g.mixed[k];
        }
    }
    if (bad_face >= 0) throw_degenerate(bad_face);

    const int n = mesh.num_vertices();
#pragma omp parallel for schedule(static)
    for (int v = 0; v < n; ++v) {
        Vec3 lap = Vec3::Zero();
        double area = 0.0;
        for (int c : mesh.vertex_corners(v)) {
            lap += corner_lap[static_cast<std::size_t>(c)];
            area += corner_area[static_cast<std::size_t>(c)];
        }
        out.laplacian[static_cast<std::size_t>(v)] = lap;
        out.area[static_cast<std::size_t>(v)] = area;
    }
    return out;
}

VertexScalarField vertex_areas(const Mesh& mesh, Exec exec) { return laplacian_data(mesh, exec).area; }

Eigen::SparseMatrix<double> cotan_laplacian(const Mesh& mesh)
{
    const auto& faces = mesh.faces();
    const auto& x = mesh.positions();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(faces.size() * 12);
    for (const auto& face : faces) {
        const auto g = face_geometry(x[static_cast<std::size_t>(face[0])], x[static_cast<std::size_t>(face[1])],
                                     x[static_cast<std::size_t>(face[2])]);
        for (std::size_t k = 0; k < 3; ++k) {
            const int i = face[(k + 1) % 3];
            const int j = face[(k + 2) % 3];
            const double w = 0.5 * g.cot[k];
            triplets.emplace_back(i, j, w);
            triplets.emplace_back(j, i, w);
            triplets.emplace_back(i, i, -w);
            triplets.emplace_back(j, j, -w);
        }
    }
    Eigen::SparseMatrix<double> L(mesh.num_vertices(), mesh.num_vertices());
    L.setFromTriplets(triplets.begin(), triplets.end());
    return L;
}

VertexVectorField vertex_normals(const Mesh& mesh)
{
    const auto& x = mesh.positions();
    VertexVectorField n(x.size(), Vec3::Zero());
    for (const auto& face : mesh.faces()) {
        // |cross| = 2 * area, so the raw cross product is already area-weighted
        const Vec3 w = (x[static_cast<std::size_t>(face[1])] - x[static_cast<std::size_t>(face[0])])
                           .cross(x[static_cast<std::size_t>(face[2])] - x[static_cast<std::size_t>(face[0])]);
        for (int v : face) n[static_cast<std::size_t>(v)] += w;
    }
    for (auto& v : n) {
        const double len = v.norm();
        if (len > 0.0) v /= len;
    }
    return n;
}

MeanCurvature mean_curvature(const Mesh& mesh, Exec exec)
{
    const auto data = laplacian_data(mesh, exec);
    MeanCurvature out;
    out.normal = vertex_normals(mesh);
    const std::size_t n = data.area.size();
    out.vector.resize(n);
    out.scalar.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(data.area[i] > 0.0)) throw MeshError("zero vertex area at vertex " + std::to_string(i));
        out.vector[i] = data.laplacian[i] / (2.0 * data.area[i]);
        out.scalar[i] = -out.vector[i].dot(out.normal[i]);
    }
    return out;
}

VertexScalarField angle_defects(const Mesh& mesh)
{
    const auto& x = mesh.positions();
    VertexScalarField defect(x.size(), 2.0 * std::numbers::pi);
    for (const auto& face : mesh.faces()) {
        for (std::size_t k = 0; k < 3; ++k) {
            const Vec3& a = x[static_cast<std::size_t>(face[k])];
            const Vec3 u = x[static_cast<std::size_t>(face[(k + 1) % 3])] - a;
            const Vec3 v = x[static_cast<std::size_t>(face[(k + 2) % 3])] - a;
            defect[static_cast<std::size_t>(face[k])] -= std::atan2(u.cross(v).norm(), u.dot(v));
        }
    }
    return defect;
}

VertexScalarField gauss_curvature(const Mesh& mesh)
{
    auto k = angle_defects(mesh);
    const auto area = vertex_areas(mesh);
    for (std::size_t i = 0; i < k.size(); ++i) k[i] /= area[i];
    return k;
}

}  // namespace willmore
