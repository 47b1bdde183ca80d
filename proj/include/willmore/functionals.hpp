#pragma once

#include "willmore/mesh.hpp"

#include <string>

namespace willmore {

/// Sum_i |Hvec_i|^2 A_i.
double willmore_energy(const Mesh& mesh, Exec exec = Exec::parallel);

/// The Gauss-Bonnet equivalent forms, evaluated with the same |Hvec|^2 and
/// the angle-defect Gauss curvature:
///   dn_form      = 1/4 sum (4|H|^2 - 2K) A + pi chi
///   umbilic_form =     sum (|H|^2 - K) A + 2 pi chi
struct WillmoreForms {
    double dn_form;
    double umbilic_form;
};

WillmoreForms willmore_alt_forms(const Mesh& mesh);

double surface_area(const Mesh& mesh);

/// (1/6) sum det[p0 - c, p1 - c, p2 - c] with c the vertex centroid. No
/// embeddedness check; used on the hot paths of the flow.
double signed_volume(const Mesh& mesh);

/// signed_volume, after checking the mesh is closed and embedded. Throws
/// MeshError("volume undefined for non-embedded mesh") otherwise.
double enclosed_volume(const Mesh& mesh);

/// area^3 / volume^2 of an embedded mesh; throws if volume <= 0.
double iso_ratio(const Mesh& mesh);

/// |Area - sum_i H_i <Phi_i - c, n_i> A_i| / Area with H_i the scalar
/// mean curvature and n_i the vertex normal. Zero for a smooth closed
/// surface (Minkowski); on meshes it is pure discretization error.
double minkowski_residual(const Mesh& mesh);

/// |2 Area + 2 sum_i <Phi_i - c, Hvec_i> A_i| / (2 Area). Identically zero
/// up to roundoff for the cotan Laplacian, kept as a consistency probe.
double minkowski_vector_residual(const Mesh& mesh);

/// |sum_i defect_i - 2 pi chi| / (2 pi max(1, |chi|)).
double gauss_bonnet_residual(const Mesh& mesh);

struct EnergyReport {
    double willmore_H2 = 0;
    double willmore_dn_form = 0;
    double willmore_umbilic_form = 0;
    double cross_form_spread = 0;  // max pairwise |difference| / willmore_H2
    double area = 0;
    double volume = 0;
    double iso = 0;
    double gauss_bonnet_residual = 0;
    double minkowski_residual = 0;
    int chi = 0;
    int genus = 0;
    bool embedded = true;

    /// key = value lines.
    std::string to_key_value() const;
    static std::string csv_header();
    std::string to_csv_row() const;
};

/// Full report for a closed mesh. Volume and iso are reported as NaN
/// ("nan" in text) for self-intersecting meshes.
EnergyReport energy_report(const Mesh& mesh);

struct BoundaryBound {
    double lhs = 0;               // 4 pi
    double rhs = 0;               // W(patch) + 2 length / d
    double patch_willmore = 0;
    double boundary_length = 0;
    double distance = 0;          // sup over patch vertices of distance to the boundary
    bool vacuous = false;         // no boundary, or d == 0
    bool holds = false;           // rhs >= 4 pi (1 - slack)
};

/// Monotonicity-with-boundary estimate on a patch. W(patch) uses the
/// parent mesh curvature restricted to the patch faces' mixed-area shares.
BoundaryBound boundary_bound_check(const SubMesh& patch, double slack = 0.05);

struct SimonCheck {
    double area_over_willmore = 0;
    double diameter_squared = 0;
    bool holds = false;
};

/// Area / W <= diam^2 (1 + 1e-9).
SimonCheck simon_check(const Mesh& mesh);

}  // namespace willmore
