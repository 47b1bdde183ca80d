#include "fixtures.hpp"

#include "willmore/functionals.hpp"
#include "willmore/generators.hpp"
#include "willmore/operators.hpp"

#include <doctest.h>

#include <random>

using namespace willmore;
using namespace fixtures;

namespace {

double total(const VertexScalarField& v)
{
    double s = 0;
    for (double x : v) s += x;
    return s;
}

// max relative error of |H| and K against 1 on the unit sphere
std::pair<double, double> sphere_errors(int subdiv)
{
    const auto m = icosphere(subdiv);
    const auto h = mean_curvature(m);
    const auto k = gauss_curvature(m);
    double eh = 0, ek = 0;
    for (int i = 0; i < m.num_vertices(); ++i) {
        eh = std::max(eh, std::abs(h.scalar[static_cast<std::size_t>(i)] - 1.0));
        ek = std::max(ek, std::abs(k[static_cast<std::size_t>(i)] - 1.0));
    }
    return {eh, ek};
}

}  // namespace

TEST_CASE("vertex areas")
{
    SUBCASE("icosahedron: one twelfth each")
    {
        const auto m = icosphere(0);
        const auto a = vertex_areas(m);
        for (double x : a) CHECK(x == doctest::Approx(surface_area(m) / 12).epsilon(1e-12));
    }
    SUBCASE("partition of unity")
    {
        for (const auto& m : {icosphere(3), perturb(icosphere(2), 0.05, 2), torus(clifford_torus_spec(16, 24))})
            CHECK(std::abs(total(vertex_areas(m)) - surface_area(m)) <= 1e-12 * surface_area(m));
    }
    SUBCASE("flat grid interior cell")
    {
        const auto g = flat_grid(10, 10);
        const auto a = vertex_areas(g);
        // interior vertex (5, 5): six right triangles, Voronoi cell is the unit square
        const int v = 5 * 11 + 5;
        CHECK(a[static_cast<std::size_t>(v)] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("cotan Laplacian")
{
    const auto m = perturb(icosphere(3), 0.02, 1);
    const auto L = cotan_laplacian(m);
    const Eigen::MatrixXd dense = Eigen::MatrixXd(L);
    CHECK((dense - dense.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * dense.cwiseAbs().maxCoeff());

    const Eigen::VectorXd ones = Eigen::VectorXd::Constant(m.num_vertices(), 3.7);
    CHECK((L * ones).cwiseAbs().maxCoeff() <= 1e-12 * 3.7 * dense.cwiseAbs().maxCoeff());

    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0, 1);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd u(m.num_vertices());
        for (auto& x : u) x = n(rng);
        CHECK(u.dot(L * u) <= 1e-12 * u.squaredNorm());
    }

    SUBCASE("linear field on a flat grid is harmonic inside")
    {
        const auto g = flat_grid(10, 10);
        const auto Lg = cotan_laplacian(g);
        Eigen::VectorXd u(g.num_vertices());
        for (int i = 0; i < g.num_vertices(); ++i) u[i] = 2.0 * g.position(i).x() - 0.7 * g.position(i).y() + 1.0;
        const Eigen::VectorXd lu = Lg * u;
        for (int i = 0; i < g.num_vertices(); ++i) {
            const auto& p = g.position(i);
            if (p.x() > 0 && p.x() < 10 && p.y() > 0 && p.y() < 10) CHECK(std::abs(lu[i]) < 1e-10);
        }
    }

    SUBCASE("sphere: L Phi / A is -2 Phi")
    {
        const auto s = icosphere(4);
        const auto d = laplacian_data(s);
        double err = 0;
        for (int i = 0; i < s.num_vertices(); ++i) {
            const Vec3 q = d.laplacian[static_cast<std::size_t>(i)] / d.area[static_cast<std::size_t>(i)];
            err = std::max(err, (q + 2 * s.position(i)).norm() / 2.0);
        }
        CHECK(err < 0.02);
    }

    SUBCASE("matrix and matrix-free paths agree")
    {
        const auto d = laplacian_data(m);
        Eigen::MatrixXd x(m.num_vertices(), 3);
        for (int i = 0; i < m.num_vertices(); ++i) x.row(i) = m.position(i).transpose();
        const Eigen::MatrixXd lx = L * x;
        for (int i = 0; i < m.num_vertices(); ++i)
            CHECK((lx.row(i).transpose() - d.laplacian[static_cast<std::size_t>(i)]).norm() < 1e-12);
    }
}

TEST_CASE("mean curvature")
{
    SUBCASE("unit sphere: |H| = 1, Hvec inward")
    {
        const auto m = icosphere(4);
        const auto h = mean_curvature(m);
        for (int i = 0; i < m.num_vertices(); ++i) {
            const auto k = static_cast<std::size_t>(i);
            CHECK(h.vector[k].norm() == doctest::Approx(1.0).epsilon(0.02));
            CHECK(h.vector[k].dot(m.position(i)) < 0);
            CHECK(h.scalar[k] > 0);
        }
    }
    SUBCASE("radius two sphere: H = 1/2")
    {
        const auto m = scaled(icosphere(4), 2.0);
        for (double x : mean_curvature(m).scalar) CHECK(x == doctest::Approx(0.5).epsilon(0.02));
    }
    SUBCASE("flat grid interior")
    {
        const auto g = flat_grid(8, 8);
        const auto h = mean_curvature(g);
        for (int i = 0; i < g.num_vertices(); ++i) {
            const auto& p = g.position(i);
            if (p.x() > 0 && p.x() < 8 && p.y() > 0 && p.y() < 8) CHECK(h.vector[static_cast<std::size_t>(i)].norm() < 1e-10);
        }
    }
    SUBCASE("serial and parallel agree")
    {
        const auto m = perturb(icosphere(3), 0.03, 2);
        const auto a = mean_curvature(m, Exec::serial);
        const auto b = mean_curvature(m, Exec::parallel);
        for (std::size_t i = 0; i < a.vector.size(); ++i) {
            CHECK((a.vector[i] - b.vector[i]).norm() <= 1e-12 * (1 + a.vector[i].norm()));
            CHECK(std::abs(a.scalar[i] - b.scalar[i]) <= 1e-12 * (1 + std::abs(a.scalar[i])));
        }
        const auto la = laplacian_data(m, Exec::serial), lb = laplacian_data(m, Exec::parallel);
        for (std::size_t i = 0; i < la.area.size(); ++i) CHECK(std::abs(la.area[i] - lb.area[i]) <= 1e-14);
    }
    SUBCASE("rigid motion and scaling")
    {
        const auto m = perturb(icosphere(2), 0.03, 3);
        const auto R = rotation(0.4, 1.2, -0.8);
        const auto moved = transformed(m, R, Vec3(1, 2, 3));
        const auto big = scaled(m, 3.0);
        const auto h = mean_curvature(m), hm = mean_curvature(moved), hb = mean_curvature(big);
        const auto a = vertex_areas(m), ab = vertex_areas(big);
        const auto k = gauss_curvature(m), kb = gauss_curvature(big), km = gauss_curvature(moved);
        for (std::size_t i = 0; i < h.vector.size(); ++i) {
            CHECK((R * h.vector[i] - hm.vector[i]).norm() <= 1e-10 * h.vector[i].norm());
            CHECK((h.vector[i] / 3.0 - hb.vector[i]).norm() <= 1e-10 * h.vector[i].norm());
            CHECK(ab[i] == doctest::Approx(9 * a[i]).epsilon(1e-10));
            CHECK(kb[i] == doctest::Approx(k[i] / 9).epsilon(1e-9));
            CHECK(km[i] == doctest::Approx(k[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("Gauss curvature")
{
    const auto [eh4, ek4] = sphere_errors(4);
    CHECK(ek4 < 0.03);
    CHECK(eh4 < 0.02);

    TorusSpec spec;
    spec.nu = spec.nv = 32;
    const auto t = torus(spec);
    const auto k = gauss_curvature(t);
    const auto a = vertex_areas(t);
    double s = 0;
    for (std::size_t i = 0; i < k.size(); ++i) s += k[i] * a[i];
    CHECK(std::abs(s) < 1e-9);

    SUBCASE("sphere errors shrink with refinement")
    {
        auto prev = sphere_errors(2);
        for (int n = 3; n <= 5; ++n) {
            const auto cur = sphere_errors(n);
            CHECK(cur.first < prev.first);
            CHECK(cur.second < prev.second);
            prev = cur;
        }
    }
}

TEST_CASE("degenerate face is rejected by the operators")
{
    auto m = icosphere(1);
    auto x = m.positions();
    const auto& f = m.faces()[0];
    x[static_cast<std::size_t>(f[2])] = 0.5 * (x[static_cast<std::size_t>(f[0])] + x[static_cast<std::size_t>(f[1])]);
    CHECK_THROWS_AS(laplacian_data(m.with_positions(x)), MeshError);
}
