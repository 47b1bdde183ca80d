#pragma once

#include "willmore/generators.hpp"
#include "willmore/mesh.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <vector>

namespace fixtures {

using willmore::Face;
using willmore::Mesh;
using willmore::Vec3;

inline constexpr double kPi = std::numbers::pi;

inline bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

inline Mesh tetrahedron()
{
    return Mesh({Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)},
                {Face{0, 1, 2}, Face{0, 3, 1}, Face{0, 2, 3}, Face{1, 3, 2}});
}

// Grid torus sampled at half-step angles so that the quad around (u, v) = (0, 0)
// is planar (x = const). Faces wound outward.
struct HalfStepTorus {
    std::vector<Vec3> v;
    std::vector<Face> f;
    int nu, nv;
    int id(int i, int j) const { return ((i % nu + nu) % nu) * nv + (j % nv + nv) % nv; }
};

inline HalfStepTorus half_step_torus(double r, double big_r, int nu, int nv)
{
    HalfStepTorus t{{}, {}, nu, nv};
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
            const double u = (i + 0.5) * 2 * kPi / nu, w = (j + 0.5) * 2 * kPi / nv;
            t.v.emplace_back((big_r + r * std::cos(w)) * std::cos(u), (big_r + r * std::cos(w)) * std::sin(u), r * std::sin(w));
        }
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
            const int a = t.id(i, j), b = t.id(i + 1, j), c = t.id(i + 1, j + 1), d = t.id(i, j + 1);
            t.f.push_back({a, b, c});
            t.f.push_back({a, c, d});
        }
    return t;
}

// Two tori glued along a removed quad: genus 2, chi = -2, embedded.
inline Mesh genus_two(int nu = 16, int nv = 12)
{
    const double r = 1.0, big_r = 2.0;
    auto t = half_step_torus(r, big_r, nu, nv);
    // quad (nu-1, nv-1) spans u, v in (-step/2, step/2): all four corners share x
    const int a = t.id(nu - 1, nv - 1), b = t.id(0, nv - 1), c = t.id(0, 0), d = t.id(nu - 1, 0);
    const double x0 = t.v[static_cast<std::size_t>(a)].x();
    std::vector<Face> faces;
    for (const auto& face : t.f) {
        const bool removed = (face == Face{a, b, c}) || (face == Face{a, c, d});
        if (!removed) faces.push_back(face);
    }
    const int n = static_cast<int>(t.v.size());
    std::vector<Vec3> pos = t.v;
    std::map<int, int> glue{{a, a}, {b, b}, {c, c}, {d, d}};
    std::vector<int> copy(static_cast<std::size_t>(n));
    int next = n;
    for (int k = 0; k < n; ++k) {
        if (glue.count(k)) {
            copy[static_cast<std::size_t>(k)] = k;
            continue;
        }
        copy[static_cast<std::size_t>(k)] = next++;
        Vec3 p = t.v[static_cast<std::size_t>(k)];
        p.x() = 2 * x0 - p.x();
        pos.push_back(p);
    }
    const std::size_t half = faces.size();
    for (std::size_t k = 0; k < half; ++k) {
        const auto& fc = faces[k];
        // mirror reverses orientation
        faces.push_back({copy[static_cast<std::size_t>(fc[0])], copy[static_cast<std::size_t>(fc[2])],
                         copy[static_cast<std::size_t>(fc[1])]});
    }
    return Mesh(std::move(pos), std::move(faces));
}

// Small meshes for gradient oracles: perturbed spheres and tori, <= 500 vertices.
inline Mesh oracle_mesh(int seed)
{
    if (seed % 2 == 0) return willmore::perturb(willmore::icosphere(2), 0.02, static_cast<std::uint64_t>(seed));
    willmore::TorusSpec spec;
    spec.tube_radius = 1.0;
    spec.ring_radius = 2.2;
    spec.nu = 20;
    spec.nv = 12;
    return willmore::perturb(willmore::torus(spec), 0.01, static_cast<std::uint64_t>(seed));
}

// Central differences of f at every coordinate, step h.
inline std::vector<Vec3> central_difference(const Mesh& mesh, const std::function<double(const Mesh&)>& f, double h)
{
    std::vector<Vec3> g(mesh.positions().size(), Vec3::Zero());
    auto x = mesh.positions();
    for (std::size_t i = 0; i < x.size(); ++i)
        for (int k = 0; k < 3; ++k) {
            const double keep = x[i][k];
            x[i][k] = keep + h;
            const double fp = f(mesh.with_positions(x));
            x[i][k] = keep - h;
            const double fm = f(mesh.with_positions(x));
            x[i][k] = keep;
            g[i][k] = (fp - fm) / (2 * h);
        }
    return g;
}

// max |a - b| / max |b|
inline double max_norm_rel(const std::vector<Vec3>& a, const std::vector<Vec3>& b)
{
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, (a[i] - b[i]).cwiseAbs().maxCoeff());
        den = std::max(den, b[i].cwiseAbs().maxCoeff());
    }
    return num / den;
}

inline Eigen::Matrix3d rotation(double ax, double ay, double az)
{
    return (Eigen::AngleAxisd(az, Vec3::UnitZ()) * Eigen::AngleAxisd(ay, Vec3::UnitY()) *
            Eigen::AngleAxisd(ax, Vec3::UnitX()))
        .toRotationMatrix();
}

}  // namespace fixtures
