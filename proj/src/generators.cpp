#include "willmore/generators.hpp"

#include "willmore/functionals.hpp"
#include "willmore/intersect.hpp"
#include "willmore/operators.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace willmore {

TorusSpec clifford_torus_spec(int nu, int nv) { return {1.0, std::numbers::sqrt2, nu, nv}; }

Mesh icosphere(int subdivisions)
{
    if (subdivisions < 0 || subdivisions > 7)
        throw MeshError("icosphere: subdivisions must be in [0, 7], got " + std::to_string(subdivisions));
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v{{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& p : v) p.normalize();
    std::vector<Face> f{{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                        {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
                        {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
    for (int level = 0; level < subdivisions; ++level) {
        std::map<std::pair<int, int>, int> midpoint;
        const auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            const auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            v.push_back((v[static_cast<std::size_t>(a)] + v[static_cast<std::size_t>(b)]).normalized());
            const int id = static_cast<int>(v.size()) - 1;
            midpoint.emplace(key, id);
            return id;
        };
        std::vector<Face> next;
        next.reserve(f.size() * 4);
        for (const auto& [a, b, c] : f) {
            const int ab = mid(a, b);
            const int bc = mid(b, c);
            const int ca = mid(c, a);
            next.push_back({a, ab, ca});
            next.push_back({b, bc, ab});
            next.push_back({c, ca, bc});
            next.push_back({ab, bc, ca});
        }
        f = std::move(next);
    }
    return Mesh(std::move(v), std::move(f));
}

namespace {

std::vector<Face> grid_faces(int nu, int nv)
{
    std::vector<Face> faces;
    faces.reserve(static_cast<std::size_t>(2 * nu * nv));
    const auto id = [nv](int i, int j) { return i * nv + j; };
    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
            const int a = id(i, j);
            const int b = id((i + 1) % nu, j);
            const int c = id((i + 1) % nu, (j + 1) % nv);
            const int d = id(i, (j + 1) % nv);
            faces.push_back({a, b, c});
            faces.push_back({a, c, d});
        }
    }
    return faces;
}

}  // namespace

Mesh torus(const TorusSpec& spec)
{
    if (!(spec.tube_radius > 0.0) || !(spec.ring_radius > spec.tube_radius))
        throw MeshError("torus: need 0 < r < R");
    if (spec.nu < 8 || spec.nv < 8) throw MeshError("torus: grid resolution must be at least 8x8");
    if (!(spec.u_warp > 0.0) || !(spec.v_warp > 0.0)) throw MeshError("torus: warp factors must be positive");
    const auto warp = [](double t, double k) { return 2.0 * std::atan(k * std::tan(0.5 * t)); };
    std::vector<Vec3> v;
    v.reserve(static_cast<std::size_t>(spec.nu * spec.nv));
    for (int i = 0; i < spec.nu; ++i) {
        const double u = warp(2.0 * std::numbers::pi * i / spec.nu, spec.u_warp);
        for (int j = 0; j < spec.nv; ++j) {
            const double w = warp(2.0 * std::numbers::pi * j / spec.nv, spec.v_warp);
            const double rho = spec.ring_radius + spec.tube_radius * std::cos(w);
            v.emplace_back(rho * std::cos(u), rho * std::sin(u), spec.tube_radius * std::sin(w));
        }
    }
    return Mesh(std::move(v), grid_faces(spec.nu, spec.nv));
}

Mesh figure_eight_torus(double ring_radius, double amplitude, int nu, int nv)
{
    std::vector<Vec3> v;
    for (int i = 0; i < nu; ++i) {
        const double u = 2.0 * std::numbers::pi * i / nu;
        for (int j = 0; j < nv; ++j) {
            // half-step offset keeps samples off the crossing point
            const double w = 2.0 * std::numbers::pi * (j + 0.5) / nv;
            const double rho = ring_radius + amplitude * std::cos(w);
            v.emplace_back(rho * std::cos(u), rho * std::sin(u), amplitude * std::sin(w) * std::cos(w));
        }
    }
    return Mesh(std::move(v), grid_faces(nu, nv));
}

Mesh flat_grid(int nx, int ny, double spacing)
{
    std::vector<Vec3> v;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) v.emplace_back(i * spacing, j * spacing, 0.0);
    const auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    std::vector<Face> f;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return Mesh(std::move(v), std::move(f), Boundary::allowed);
}

Mesh sphere_inversion(const Mesh& mesh, const InversionSpec& spec)
{
    if (!(spec.radius > 0.0)) throw MeshError("sphere_inversion: radius must be positive");
    const double rho2 = spec.radius * spec.radius;
    std::vector<Vec3> out;
    out.reserve(mesh.positions().size());
    for (const auto& p : mesh.positions()) {
        const Vec3 d = p - spec.center;
        const double d2 = d.squaredNorm();
        if (!(std::sqrt(d2) > 1e-6 * spec.radius))
            throw MeshError("sphere_inversion: centre lies on the surface");
        out.push_back(spec.center + rho2 * d / d2);
    }
    Mesh image = mesh.with_positions(std::move(out));
    if (signed_volume(image) >= 0.0) return image;
    auto faces = image.faces();
    for (auto& f : faces) std::swap(f[1], f[2]);
    return Mesh(image.positions(), std::move(faces));
}

Mesh perturb(const Mesh& mesh, double amplitude, std::uint64_t seed)
{
    if (amplitude < 0.0 || amplitude > 0.1) throw MeshError("perturb: amplitude must be in [0, 0.1]");
    if (amplitude == 0.0) return mesh;
    const auto normals = vertex_normals(mesh);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<double> noise(normals.size());
    for (auto& n : noise) n = unit(rng);
    const double diag = mesh.bbox_diagonal();

    double amp = amplitude;
    for (int attempt = 0; attempt <= 3; ++attempt, amp *= 0.5) {
        std::vector<Vec3> x = mesh.positions();
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += amp * diag * noise[i] * normals[i];
        if (!validate(x, mesh.faces(), mesh.closed() ? Boundary::forbidden : Boundary::allowed).empty()) continue;
        Mesh candidate = mesh.with_positions(std::move(x));
        if (!self_intersects(candidate).intersects) return candidate;
    }
    throw MeshError("perturb: every amplitude down to " + std::to_string(amp * 2.0) + " self-intersects");
}

Mesh transformed(const Mesh& mesh, const Eigen::Matrix3d& linear, const Vec3& translation)
{
    std::vector<Vec3> x = mesh.positions();
    for (auto& p : x) p = linear * p + translation;
    if (linear.determinant() >= 0.0) return mesh.with_positions(std::move(x));
    auto faces = mesh.faces();
    for (auto& f : faces) std::swap(f[1], f[2]);
    return Mesh(std::move(x), std::move(faces), mesh.closed() ? Boundary::forbidden : Boundary::allowed);
}

Mesh scaled(const Mesh& mesh, double s) { return transformed(mesh, s * Eigen::Matrix3d::Identity()); }

}  // namespace willmore
