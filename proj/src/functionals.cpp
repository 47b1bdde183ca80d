#include "willmore/functionals.hpp"

#include "willmore/intersect.hpp"
#include "willmore/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace willmore {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt17(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

double total_defect(const Mesh& mesh)
{
    const auto d = angle_defects(mesh);
    double s = 0.0;
    for (double x : d) s += x;
    return s;
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b)
{
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (p - (a + t * ab)).norm();
}

}  // namespace

double willmore_energy(const Mesh& mesh, Exec exec)
{
    const auto data = laplacian_data(mesh, exec);
    double w = 0.0;
    for (std::size_t i = 0; i < data.area.size(); ++i)
        w += data.laplacian[i].squaredNorm() / (4.0 * data.area[i]);
    return w;
}

WillmoreForms willmore_alt_forms(const Mesh& mesh)
{
    const double w = willmore_energy(mesh);
    const double defect = total_defect(mesh);
    const double chi = mesh.euler_characteristic();
    // sum K_i A_i is the total angle defect
    return {w - 0.5 * defect + kPi * chi, w - defect + 2.0 * kPi * chi};
}

double surface_area(const Mesh& mesh)
{
    const auto& x = mesh.positions();
    double a = 0.0;
    for (const auto& f : mesh.faces())
        a += 0.5 * (x[static_cast<std::size_t>(f[1])] - x[static_cast<std::size_t>(f[0])])
                       .cross(x[static_cast<std::size_t>(f[2])] - x[static_cast<std::size_t>(f[0])])
                       .norm();
    return a;
}

double signed_volume(const Mesh& mesh)
{
    const Vec3 c = mesh.centroid();
    const auto& x = mesh.positions();
    double six_v = 0.0;
    for (const auto& f : mesh.faces()) {
        const Vec3 a = x[static_cast<std::size_t>(f[0])] - c;
        const Vec3 b = x[static_cast<std::size_t>(f[1])] - c;
        const Vec3 d = x[static_cast<std::size_t>(f[2])] - c;
        six_v += a.dot(b.cross(d));
    }
    return six_v / 6.0;
}

double enclosed_volume(const Mesh& mesh)
{
    if (!mesh.closed()) throw MeshError("volume undefined for open mesh");
    if (self_intersects(mesh).intersects) throw MeshError("volume undefined for non-embedded mesh");
    return signed_volume(mesh);
}

double iso_ratio(const Mesh& mesh)
{
    const double v = enclosed_volume(mesh);
    if (!(v > 0.0)) throw MeshError("iso_ratio: non-positive enclosed volume");
    const double a = surface_area(mesh);
    return a * a * a / (v * v);
}

double minkowski_residual(const Mesh& mesh)
{
    const auto hc = mean_curvature(mesh);
    const auto area = vertex_areas(mesh);
    const Vec3 c = mesh.centroid();
    double total_area = 0.0;
    double support = 0.0;
    for (std::size_t i = 0; i < area.size(); ++i) {
        total_area += area[i];
        support += hc.scalar[i] * (mesh.positions()[i] - c).dot(hc.normal[i]) * area[i];
    }
    return std::abs(total_area - support) / total_area;
}

double minkowski_vector_residual(const Mesh& mesh)
{
    const auto data = laplacian_data(mesh);
    const Vec3 c = mesh.centroid();
    double total_area = 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < data.area.size(); ++i) {
        total_area += data.area[i];
        s += 0.5 * (mesh.positions()[i] - c).dot(data.laplacian[i]);
    }
    return std::abs(total_area + s) / total_area;
}

double gauss_bonnet_residual(const Mesh& mesh)
{
    const double chi = mesh.euler_characteristic();
    return std::abs(total_defect(mesh) - 2.0 * kPi * chi) / (2.0 * kPi * std::max(1.0, std::abs(chi)));
}

EnergyReport energy_report(const Mesh& mesh)
{
    const auto eg = euler_genus(mesh);
    EnergyReport r;
    r.chi = eg.chi;
    r.genus = eg.genus;
    r.willmore_H2 = willmore_energy(mesh);
    const auto forms = willmore_alt_forms(mesh);
    r.willmore_dn_form = forms.dn_form;
    r.willmore_umbilic_form = forms.umbilic_form;
    const double spread = std::max({std::abs(r.willmore_H2 - r.willmore_dn_form),
                                    std::abs(r.willmore_H2 - r.willmore_umbilic_form),
                                    std::abs(r.willmore_dn_form - r.willmore_umbilic_form)});
    r.cross_form_spread = spread / std::abs(r.willmore_H2);
    r.area = surface_area(mesh);
    r.embedded = !self_intersects(mesh).intersects;
    if (r.embedded) {
        r.volume = signed_volume(mesh);
        r.iso = r.volume > 0.0 ? r.area * r.area * r.area / (r.volume * r.volume)
                               : std::numeric_limits<double>::quiet_NaN();
    } else {
        r.volume = std::numeric_limits<double>::quiet_NaN();
        r.iso = std::numeric_limits<double>::infinity();
    }
    r.gauss_bonnet_residual = gauss_bonnet_residual(mesh);
    r.minkowski_residual = minkowski_residual(mesh);
    return r;
}

std::string EnergyReport::to_key_value() const
{
    std::ostringstream out;
    out << "willmore_H2 = " << fmt17(willmore_H2) << '\n'
        << "willmore_dn_form = " << fmt17(willmore_dn_form) << '\n'
        << "willmore_umbilic_form = " << fmt17(willmore_umbilic_form) << '\n'
        << "cross_form_spread = " << fmt17(cross_form_spread) << '\n'
        << "area = " << fmt17(area) << '\n'
        << "volume = " << fmt17(volume) << '\n'
        << "iso = " << fmt17(iso) << '\n'
        << "gauss_bonnet_residual = " << fmt17(gauss_bonnet_residual) << '\n'
        << "minkowski_residual = " << fmt17(minkowski_residual) << '\n'
        << "chi = " << chi << '\n'
        << "genus = " << genus << '\n'
        << "embedded = " << (embedded ? "true" : "false") << '\n';
    return out.str();
}

std::string EnergyReport::csv_header()
{
    return "willmore_H2,willmore_dn_form,willmore_umbilic_form,cross_form_spread,area,volume,iso,"
           "gauss_bonnet_residual,minkowski_residual,chi,genus,embedded";
}

std::string EnergyReport::to_csv_row() const
{
    std::ostringstream out;
    out << fmt17(willmore_H2) << ',' << fmt17(willmore_dn_form) << ',' << fmt17(willmore_umbilic_form) << ','
        << fmt17(cross_form_spread) << ',' << fmt17(area) << ',' << fmt17(volume) << ',' << fmt17(iso) << ','
        << fmt17(gauss_bonnet_residual) << ',' << fmt17(minkowski_residual) << ',' << chi << ',' << genus << ','
        << (embedded ? 1 : 0);
    return out.str();
}

BoundaryBound boundary_bound_check(const SubMesh& patch, double slack)
{
    BoundaryBound out;
    out.lhs = 4.0 * kPi;
    const Mesh& mesh = patch.parent();
    const auto hc = mean_curvature(mesh);
    const auto& x = mesh.positions();
    for (int f : patch.faces()) {
        const auto& face = mesh.faces()[static_cast<std::size_t>(f)];
        const auto g = face_geometry(x[static_cast<std::size_t>(face[0])], x[static_cast<std::size_t>(face[1])],
                                     x[static_cast<std::size_t>(face[2])]);
        for (std::size_t k = 0; k < 3; ++k)
            out.patch_willmore += hc.vector[static_cast<std::size_t>(face[k])].squaredNorm() * g.mixed[k];
    }
    if (!patch.has_boundary()) {
        out.vacuous = true;
        out.rhs = out.patch_willmore;
        return out;
    }
    out.boundary_length = patch.boundary_length();

    std::vector<char> in_patch(static_cast<std::size_t>(mesh.num_vertices()), 0);
    for (int f : patch.faces())
        for (int v : mesh.faces()[static_cast<std::size_t>(f)]) in_patch[static_cast<std::size_t>(v)] = 1;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (!in_patch[static_cast<std::size_t>(v)]) continue;
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& loop : patch.boundary_loops())
            for (std::size_t i = 0; i < loop.size(); ++i)
                nearest = std::min(nearest, point_segment_distance(x[static_cast<std::size_t>(v)],
                                                                   x[static_cast<std::size_t>(loop[i])],
                                                                   x[static_cast<std::size_t>(loop[(i + 1) % loop.size()])]));
        out.distance = std::max(out.distance, nearest);
    }
    if (!(out.distance > 0.0)) {
        out.vacuous = true;
        out.rhs = std::numeric_limits<double>::infinity();
        return out;
    }
    out.rhs = out.patch_willmore + 2.0 * out.boundary_length / out.distance;
    out.holds = out.rhs >= out.lhs * (1.0 - slack);
    return out;
}

SimonCheck simon_check(const Mesh& mesh)
{
    SimonCheck out;
    const double w = willmore_energy(mesh);
    const double d = diameter(mesh);
    out.area_over_willmore = surface_area(mesh) / w;
    out.diameter_squared = d * d;
    out.holds = out.area_over_willmore <= out.diameter_squared * (1.0 + 1e-9);
    return out;
}

}  // namespace willmore
