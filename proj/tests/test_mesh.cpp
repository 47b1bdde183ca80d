#include "fixtures.hpp"

#include "willmore/generators.hpp"
#include "willmore/intersect.hpp"
#include "willmore/mesh.hpp"
#include "willmore/mesh_io.hpp"
#include "willmore/operators.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>

using namespace willmore;
using namespace fixtures;

namespace {

std::filesystem::path temp_file(const std::string& name)
{
    return std::filesystem::temp_directory_path() / ("willmore_test_" + name);
}

void write_text(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream out(p);
    out << text;
}

}  // namespace

TEST_CASE("validate: icosahedron is clean")
{
    const auto m = icosphere(0);
    CHECK(validate(m.positions(), m.faces()).empty());
}

TEST_CASE("validate: removing a face opens three boundary edges")
{
    const auto m = icosphere(0);
    auto faces = m.faces();
    faces.pop_back();
    const auto report = validate(m.positions(), faces);
    CHECK(report.count(ViolationKind::boundary_edge) == 3);
    CHECK(report.summary().find("boundary edges: 3") != std::string::npos);
    CHECK_THROWS_AS(Mesh(m.positions(), faces), MeshError);
    CHECK_NOTHROW(Mesh(m.positions(), faces, Boundary::allowed));
}

TEST_CASE("validate: two tetrahedra glued on a face give three non-manifold edges")
{
    std::vector<Vec3> v{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(0, 0, -1)};
    std::vector<Face> f{{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {0, 3, 2}, {0, 1, 2}, {0, 4, 1}, {1, 4, 2}, {0, 2, 4}};
    // oracle: count undirected edge multiplicities directly
    std::map<std::pair<int, int>, int> mult;
    for (const auto& face : f)
        for (int k = 0; k < 3; ++k) {
            const int a = face[static_cast<std::size_t>(k)], b = face[static_cast<std::size_t>((k + 1) % 3)];
            ++mult[{std::min(a, b), std::max(a, b)}];
        }
    int over = 0;
    for (const auto& [e, n] : mult) over += n > 2;
    REQUIRE(over == 3);
    CHECK(validate(v, f).count(ViolationKind::non_manifold_edge) == 3);
}

TEST_CASE("validate: other violation kinds")
{
    const auto m = icosphere(0);
    auto v = m.positions();
    auto f = m.faces();
    SUBCASE("index out of range")
    {
        f[0][0] = 99;
        CHECK(validate(v, f).count(ViolationKind::index_out_of_range) >= 1);
    }
    SUBCASE("non-finite position")
    {
        v[3].x() = std::nan("");
        CHECK(validate(v, f).count(ViolationKind::non_finite_position) == 1);
    }
    SUBCASE("flipped face")
    {
        std::swap(f[5][0], f[5][1]);
        CHECK(validate(v, f).count(ViolationKind::inconsistent_orientation) >= 1);
    }
    SUBCASE("isolated vertex")
    {
        v.emplace_back(5, 5, 5);
        CHECK(validate(v, f).count(ViolationKind::isolated_vertex) == 1);
    }
    SUBCASE("degenerate face")
    {
        v[f[0][1]] = v[f[0][0]];
        CHECK(!validate(v, f).empty());
    }
    SUBCASE("idempotent")
    {
        std::swap(f[2][0], f[2][1]);
        const auto a = validate(v, f).summary();
        CHECK(a == validate(v, f).summary());
    }
}

TEST_CASE("euler_genus")
{
    CHECK(euler_genus(icosphere(0)).chi == 2);
    CHECK(euler_genus(icosphere(0)).genus == 0);
    TorusSpec spec;
    spec.nu = spec.nv = 8;
    const auto t = euler_genus(torus(spec));
    CHECK(t.chi == 0);
    CHECK(t.genus == 1);

    const auto g2 = genus_two();
    // oracle: count V, E, F of the glued mesh
    std::map<std::pair<int, int>, int> edges;
    for (const auto& face : g2.faces())
        for (int k = 0; k < 3; ++k) {
            const int a = face[static_cast<std::size_t>(k)], b = face[static_cast<std::size_t>((k + 1) % 3)];
            ++edges[{std::min(a, b), std::max(a, b)}];
        }
    const int chi = g2.num_vertices() - static_cast<int>(edges.size()) + g2.num_faces();
    CHECK(chi == -2);
    CHECK(euler_genus(g2).chi == -2);
    CHECK(euler_genus(g2).genus == 2);
    CHECK_FALSE(self_intersects(g2).intersects);
}

TEST_CASE("self_intersects")
{
    CHECK_FALSE(self_intersects(icosphere(3)).intersects);

    SUBCASE("figure-eight revolution crosses itself")
    {
        const auto m = figure_eight_torus(2.0, 0.6, 24, 24);
        const auto r = self_intersects(m);
        REQUIRE(r.intersects);
        REQUIRE(r.witness);
        const auto& fa = m.faces()[static_cast<std::size_t>(r.witness->first)];
        const auto& fb = m.faces()[static_cast<std::size_t>(r.witness->second)];
        // witness rechecked directly in normalised coordinates
        const double s = 1.0 / m.bbox_diagonal();
        const Vec3 c = m.centroid();
        auto p = [&](int i) { return Vec3((m.position(i) - c) * s); };
        CHECK(triangles_intersect(p(fa[0]), p(fa[1]), p(fa[2]), p(fb[0]), p(fb[1]), p(fb[2])));
        for (int i : fa)
            for (int j : fb) CHECK(i != j);
        CHECK(self_intersects_brute_force(m).intersects);
    }

    SUBCASE("coarse Clifford torus matches all-pairs test")
    {
        const auto m = torus(clifford_torus_spec(16, 16));
        CHECK_FALSE(self_intersects_brute_force(m).intersects);
        CHECK_FALSE(self_intersects(m).intersects);
        CHECK_FALSE(self_intersects(m, Exec::serial).intersects);
    }

    SUBCASE("rigid motion invariance")
    {
        const auto m = figure_eight_torus(2.0, 0.6, 20, 20);
        const auto moved = transformed(m, rotation(0.3, -1.1, 2.0), Vec3(4, -2, 7));
        CHECK(self_intersects(moved).intersects);
        const auto s = transformed(icosphere(2), rotation(0.3, -1.1, 2.0), Vec3(4, -2, 7));
        CHECK_FALSE(self_intersects(s).intersects);
    }

    SUBCASE("serial and parallel agree with brute force on random perturbations")
    {
        for (int seed = 1; seed <= 4; ++seed) {
            const auto m = perturb(icosphere(1), 0.05, static_cast<std::uint64_t>(seed));
            const bool b = self_intersects_brute_force(m).intersects;
            CHECK(self_intersects(m, Exec::serial).intersects == b);
            CHECK(self_intersects(m, Exec::parallel).intersects == b);
        }
    }
}

TEST_CASE("triangle predicate basics")
{
    const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
    CHECK(triangles_intersect(a, b, c, Vec3(0.2, 0.2, -1), Vec3(0.2, 0.2, 1), Vec3(0.3, 0.25, 1)));
    CHECK_FALSE(triangles_intersect(a, b, c, Vec3(0, 0, 1), Vec3(1, 0, 1), Vec3(0, 1, 1)));
    // coplanar overlap
    CHECK(triangles_intersect(a, b, c, Vec3(0.1, 0.1, 0), Vec3(2, 0.1, 0), Vec3(0.1, 2, 0)));
    CHECK_FALSE(triangles_intersect(a, b, c, Vec3(2, 2, 0), Vec3(3, 2, 0), Vec3(2, 3, 0)));
}

TEST_CASE("diameter")
{
    CHECK(diameter(icosphere(3)) == doctest::Approx(2.0).epsilon(1e-9));
    TorusSpec spec;
    spec.tube_radius = 1;
    spec.ring_radius = 2;
    spec.nu = spec.nv = 64;
    const auto t = torus(spec);
    CHECK(std::abs(diameter(t) - 6.0) < 1e-6);
    const auto moved = transformed(t, Eigen::Matrix3d::Identity(), Vec3(3, -1, 2));
    CHECK(diameter(moved) == doctest::Approx(diameter(t)).epsilon(1e-12));
    CHECK(diameter(scaled(t, 2.5)) == doctest::Approx(2.5 * diameter(t)).epsilon(1e-12));

    double max_edge = 0;
    for (const auto& e : t.topology().edges) max_edge = std::max(max_edge, (t.position(e[0]) - t.position(e[1])).norm());
    CHECK(diameter(t) >= max_edge);

    SUBCASE("large meshes: tree search equals brute force")
    {
        std::mt19937_64 rng(3);
        std::normal_distribution<double> n(0, 1);
        std::vector<Vec3> pts;
        for (int i = 0; i < 24000; ++i) pts.emplace_back(n(rng), 0.5 * n(rng), 2 * n(rng));
        const auto big = perturb(icosphere(6), 0.01, 5);  // 40962 vertices
        REQUIRE(big.num_vertices() > 20000);
        CHECK(diameter(big) == diameter_brute_force(big.positions()));
        CHECK(diameter_brute_force(pts, Exec::serial) == diameter_brute_force(pts, Exec::parallel));
    }
}

TEST_CASE("angle defects sum to 2 pi chi")
{
    for (const auto& m : {icosphere(3), torus(clifford_torus_spec(24, 24)), genus_two(), perturb(icosphere(2), 0.03, 9)}) {
        double s = 0;
        for (double d : angle_defects(m)) s += d;
        const double expect = 2 * kPi * m.euler_characteristic();
        CHECK(std::abs(s - expect) <= 1e-9 * std::max(1.0, std::abs(expect)));
    }
}

TEST_CASE("OBJ and PLY round trips")
{
    const auto m = perturb(icosphere(2), 0.02, 4);
    SUBCASE("obj")
    {
        const auto p = temp_file("rt.obj");
        save_obj(m, p);
        const auto back = load_mesh(p);
        REQUIRE(back.num_vertices() == m.num_vertices());
        CHECK(back.faces() == m.faces());
        for (int i = 0; i < m.num_vertices(); ++i) CHECK((back.position(i) - m.position(i)).norm() == 0.0);
    }
    SUBCASE("ply bit exact")
    {
        const auto p = temp_file("rt.ply");
        save_ply(m, p);
        const auto back = load_mesh(p);
        CHECK(back.faces() == m.faces());
        CHECK(back.positions() == m.positions());
    }
    SUBCASE("obj extras are counted and skipped")
    {
        const auto p = temp_file("extras.obj");
        write_text(p, "# comment\no thing\nv 1 1 1\nv 1 -1 -1\nv -1 1 -1\nv -1 -1 1\nvn 0 0 1\n"
                      "f 1/1/1 2/2/2 3/3/3\nf 1 4 2\nf -4 -2 -1\nf 2 4 3\n");
        const auto raw = read_obj(p);
        CHECK(raw.ignored_records == 2);
        CHECK(raw.faces.size() == 4);
        CHECK(raw.faces[2] == Face{0, 2, 3});
        CHECK_NOTHROW(load_mesh(p));
    }
}

TEST_CASE("OBJ errors")
{
    SUBCASE("quad face")
    {
        const auto p = temp_file("quad.obj");
        write_text(p, "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
        try {
            read_obj(p);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("non-triangle face at line 5") != std::string::npos);
        }
    }
    SUBCASE("index zero")
    {
        const auto p = temp_file("zero.obj");
        write_text(p, "v 0 0 0\nv 1 0 0\nv 1 1 0\nf 0 1 2\n");
        try {
            read_obj(p);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("index out of range") != std::string::npos);
        }
    }
    SUBCASE("bad number")
    {
        const auto p = temp_file("nan.obj");
        write_text(p, "v 0 zero 0\n");
        CHECK_THROWS_AS(read_obj(p), ParseError);
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(load_mesh(temp_file("does_not_exist.obj")), ParseError); }
    SUBCASE("unknown extension") { CHECK_THROWS_AS(load_mesh(temp_file("x.stl")), ParseError); }
}

TEST_CASE("SubMesh boundary loops")
{
    const auto m = icosphere(3);
    std::vector<int> upper;
    for (int f = 0; f < m.num_faces(); ++f) {
        const auto& t = m.faces()[static_cast<std::size_t>(f)];
        if ((m.position(t[0]).z() + m.position(t[1]).z() + m.position(t[2]).z()) / 3 > 0) upper.push_back(f);
    }
    const SubMesh patch(m, upper);
    CHECK(patch.boundary_loops().size() == 1);
    // face selection leaves a zigzag boundary, longer than the equator
    CHECK(patch.boundary_length() > 2 * kPi);
    CHECK(patch.boundary_length() < 2 * kPi * 1.15);

    std::vector<int> all(static_cast<std::size_t>(m.num_faces()));
    for (int f = 0; f < m.num_faces(); ++f) all[static_cast<std::size_t>(f)] = f;
    CHECK_FALSE(SubMesh(m, all).has_boundary());

    // two far-apart faces are not edge-connected
    CHECK_THROWS_AS(SubMesh(m, {upper.front(), upper.back()}), MeshError);
}
