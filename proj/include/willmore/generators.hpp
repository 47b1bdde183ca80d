#pragma once

#include "willmore/mesh.hpp"

#include <Eigen/Geometry>

#include <cstdint>

namespace willmore {

struct TorusSpec {
    double tube_radius = 1.0;  // r
    double ring_radius = 2.0;  // R > r
    int nu = 64;               // samples around the ring
    int nv = 64;               // samples around the tube
    // Angular warp t -> 2 atan(k tan(t / 2)) per direction; k < 1 clusters
    // samples near angle 0 (the outer equator at u = 0). k = 1 is uniform.
    double u_warp = 1.0;
    double v_warp = 1.0;
};

/// Clifford torus: tube radius 1, ring radius sqrt(2).
TorusSpec clifford_torus_spec(int nu = 96, int nv = 96);

struct InversionSpec {
    Vec3 center = Vec3::Zero();
    double radius = 1.0;
};

/// Icosahedron subdivided `subdivisions` times (0..7), vertices on the unit sphere.
Mesh icosphere(int subdivisions);

/// Grid torus of revolution about the z axis, all diagonals split the same way.
Mesh torus(const TorusSpec& spec);

/// Revolution of the figure-eight profile (R + a cos v, a sin v cos v); the
/// tube crosses itself along a circle, so the mesh is not embedded.
Mesh figure_eight_torus(double ring_radius, double amplitude, int nu, int nv);

/// Open (nx x ny)-cell planar grid with unit spacing, each cell split along
/// the same diagonal. Boundary edges allowed.
Mesh flat_grid(int nx, int ny, double spacing = 1.0);

/// x -> c + rho^2 (x - c)/|x - c|^2, faces rewound so that the signed
/// volume stays positive. Throws MeshError when the centre is within
/// 1e-6 rho of a vertex.
Mesh sphere_inversion(const Mesh& mesh, const InversionSpec& spec);

/// Normal-directed noise: amplitude * bbox diagonal * U(-1, 1) per vertex.
/// Halves the amplitude (up to 3 times) if the result self-intersects or
/// fails validation, then throws MeshError.
Mesh perturb(const Mesh& mesh, double amplitude, std::uint64_t seed);

/// Applies x -> A x + t to every vertex.
Mesh transformed(const Mesh& mesh, const Eigen::Matrix3d& linear, const Vec3& translation = Vec3::Zero());
Mesh scaled(const Mesh& mesh, double s);

}  // namespace willmore
