#pragma once

#include "willmore/mesh.hpp"

#include <Eigen/SparseCore>

#include <array>
#include <vector>

namespace willmore {

using VertexScalarField = std::vector<double>;
using VertexVectorField = std::vector<Vec3>;

// Sign conventions
// ----------------
// * Faces are counter-clockwise seen from outside; face normals point out.
// * The cotan Laplacian L is the discrete negative Laplace-Beltrami: L_ij =
//   (cot a + cot b)/2 off the diagonal, L_ii = -sum_j L_ij, so L <= 0.
// * Hvec_i = (L Phi)_i / (2 A_i). On the outward unit sphere Hvec = -Phi,
//   i.e. it points inward with length 1.
// * Scalar H_i = <Hvec_i, -n_i>, positive on convex surfaces.
// * K_i = (2 pi - sum of corner angles) / A_i.

/// Per-face quantities shared by every kernel. `cot[k]` is the cotangent
/// of the interior angle at corner k; `mixed[k]` the mixed-area share of
/// corner k (Voronoi, or 1/2 and 1/4 of the area for obtuse triangles).
struct FaceGeometry {
    std::array<double, 3> cot;
    std::array<double, 3> mixed;
    double area;
    bool obtuse;
};

FaceGeometry face_geometry(const Vec3& p0, const Vec3& p1, const Vec3& p2);

/// (L Phi) and mixed vertex areas in one pass over the faces.
struct LaplacianData {
    VertexVectorField laplacian;  // (L Phi)_i
    VertexScalarField area;       // mixed area A_i
};

/// Throws MeshError on degenerate faces.
LaplacianData laplacian_data(const Mesh& mesh, Exec exec = Exec::parallel);

VertexScalarField vertex_areas(const Mesh& mesh, Exec exec = Exec::parallel);

Eigen::SparseMatrix<double> cotan_laplacian(const Mesh& mesh);

struct MeanCurvature {
    VertexVectorField vector;  // Hvec
    VertexScalarField scalar;  // <Hvec, -n>
    VertexVectorField normal;  // area-weighted unit vertex normal
};

MeanCurvature mean_curvature(const Mesh& mesh, Exec exec = Exec::parallel);

/// Area-weighted face-normal average, unit length.
VertexVectorField vertex_normals(const Mesh& mesh);

/// 2 pi minus the corner angle sum at each vertex (pi minus it on boundary
/// vertices is not special-cased: callers use closed meshes).
VertexScalarField angle_defects(const Mesh& mesh);

/// K_i = defect_i / A_i.
VertexScalarField gauss_curvature(const Mesh& mesh);

/// Relative threshold under which a face counts as degenerate.
double degenerate_area_threshold(const Mesh& mesh);

}  // namespace willmore
