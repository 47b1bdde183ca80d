#include "fixtures.hpp"

#include "willmore/flow.hpp"
#include "willmore/functionals.hpp"
#include "willmore/generators.hpp"
#include "willmore/operators.hpp"

#include <doctest.h>

#include <sstream>

using namespace willmore;
using namespace fixtures;

namespace {

double dot(const VertexVectorField& a, const VertexVectorField& b)
{
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i].dot(b[i]);
    return s;
}

double norm(const VertexVectorField& a) { return std::sqrt(dot(a, a)); }

TorusSpec small_torus(double big_r, int n)
{
    TorusSpec s;
    s.tube_radius = 1.0;
    s.ring_radius = big_r;
    s.nu = s.nv = n;
    return s;
}

}  // namespace

TEST_CASE("gradients match central differences")
{
    for (int seed = 1; seed <= 10; ++seed) {
        CAPTURE(seed);
        const auto m = oracle_mesh(seed);
        REQUIRE(m.num_vertices() <= 500);
        const double h = 1e-6 * m.bbox_diagonal();
        const auto fw = central_difference(m, [](const Mesh& x) { return willmore_energy(x, Exec::serial); }, h);
        const auto fa = central_difference(m, surface_area, h);
        const auto fv = central_difference(m, signed_volume, h);
        const auto cg = constraint_gradients(m);
        CHECK(max_norm_rel(willmore_gradient(m), fw) < 1e-5);
        CHECK(max_norm_rel(cg.area, fa) < 1e-7);
        CHECK(max_norm_rel(cg.volume, fv) < 1e-7);
    }
}

TEST_CASE("Clifford torus gradient matches central differences")
{
    const auto m = torus(clifford_torus_spec(20, 20));
    const double h = 1e-6 * m.bbox_diagonal();
    const auto fw = central_difference(m, [](const Mesh& x) { return willmore_energy(x); }, h);
    const auto g = willmore_gradient(m);
    // near-zero gradient on the minimiser: compare against the energy scale instead
    double num = 0;
    for (std::size_t i = 0; i < g.size(); ++i) num = std::max(num, (g[i] - fw[i]).cwiseAbs().maxCoeff());
    CHECK(num < 1e-5 * std::max(1.0, norm(fw)));
}

TEST_CASE("gradient kernels: serial and parallel agree")
{
    const auto m = perturb(icosphere(3), 0.03, 4);
    const auto a = willmore_gradient(m, Exec::serial);
    const auto b = willmore_gradient(m, Exec::parallel);
    CHECK(max_norm_rel(b, a) < 1e-12);
    VertexVectorField g;
    const double w = willmore_energy_and_gradient(m, g);
    CHECK(w == doctest::Approx(willmore_energy(m)).epsilon(1e-13));
    CHECK(max_norm_rel(g, a) < 1e-12);
}

TEST_CASE("gradient symmetries")
{
    SUBCASE("sphere: zero on the icosahedron, tangential part shrinks under refinement")
    {
        const auto g0 = willmore_gradient(icosphere(0));
        CHECK(norm(g0) < 1e-12);
        double prev = 1.0;
        for (int s = 2; s <= 4; ++s) {
            const auto m = icosphere(s);
            const auto g = willmore_gradient(m);
            double radial = 0, gmax = 0, tmax = 0;
            for (int i = 0; i < m.num_vertices(); ++i) {
                const Vec3& gi = g[static_cast<std::size_t>(i)];
                radial += gi.dot(m.position(i));
                gmax = std::max(gmax, gi.norm());
                tmax = std::max(tmax, gi.cross(m.position(i).normalized()).norm());
            }
            CHECK(std::abs(radial) <= 1e-10 * norm(g) * std::sqrt(m.num_vertices()));
            CHECK(tmax / gmax < prev);
            prev = tmax / gmax;
        }
        CHECK(prev < 0.03);
    }
    SUBCASE("rotation equivariance")
    {
        const auto m = perturb(icosphere(2), 0.03, 5);
        const auto R = rotation(0.7, -0.2, 1.9);
        const auto gm = willmore_gradient(transformed(m, R, Vec3(3, 0, 1)));
        const auto g = willmore_gradient(m);
        VertexVectorField rg;
        for (const auto& v : g) rg.push_back(R * v);
        CHECK(max_norm_rel(gm, rg) < 1e-9);
    }
    SUBCASE("constraint gradients")
    {
        const auto m = icosphere(4);
        const auto cg = constraint_gradients(m);
        Vec3 sum = Vec3::Zero();
        for (const auto& v : cg.volume) sum += v;
        CHECK(sum.norm() <= 1e-10 * norm(cg.volume));
        const auto a = vertex_areas(m);
        const auto n = vertex_normals(m);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK((cg.area[i] - 2 * a[i] * n[i]).norm() <= 0.03 * 2 * a[i]);
    }
}

TEST_CASE("projection is orthogonal to both constraint gradients")
{
    for (int seed = 1; seed <= 5; ++seed) {
        const auto m = oracle_mesh(seed);
        const auto cg = constraint_gradients(m);
        const auto g = willmore_gradient(m);
        const auto p = project_gradient(g, cg, surface_area(m), signed_volume(m));
        CHECK_FALSE(p.singular);
        CHECK(std::abs(dot(p.projected, cg.area)) <= 1e-10 * norm(p.projected) * norm(cg.area) + 1e-14 * norm(g) * norm(cg.area));
        CHECK(std::abs(dot(p.projected, cg.volume)) <= 1e-10 * norm(p.projected) * norm(cg.volume) + 1e-14 * norm(g) * norm(cg.volume));
    }
    SUBCASE("round sphere: parallel constraint gradients take the fallback")
    {
        const auto m = icosphere(0);
        const auto cg = constraint_gradients(m);
        const auto p = project_gradient(willmore_gradient(m), cg, surface_area(m), signed_volume(m));
        CHECK(p.singular);
    }
}

TEST_CASE("constrained step")
{
    FlowConfig cfg;
    SUBCASE("round sphere at its own constraints does not move")
    {
        const auto m = icosphere(0);
        StepState state;
        const auto r = constrained_step(m, cfg, measure_constraints(m), state);
        CHECK(r.accepted);
        CHECK(r.diagnostics.stationary);
        CHECK(r.diagnostics.projected_gradient < 1e-6);
        CHECK(r.diagnostics.step == 0.0);
        CHECK(r.mesh.positions() == m.positions());
    }
    SUBCASE("perturbed sphere: first step decreases W and keeps constraints")
    {
        const auto m = perturb(icosphere(3), 0.03, 1);
        const auto targets = measure_constraints(m);
        StepState state;
        const auto r = constrained_step(m, cfg, targets, state);
        REQUIRE(r.accepted);
        CHECK(willmore_energy(r.mesh) < willmore_energy(m));
        CHECK(std::abs(surface_area(r.mesh) - targets.area) <= 1e-8 * targets.area);
        CHECK(std::abs(signed_volume(r.mesh) - targets.volume) <= 1e-8 * targets.volume);
        auto s = state;
        for (int k = 0; k < 10; ++k) {
            const auto next = constrained_step(r.mesh, cfg, targets, s);
            if (!next.accepted) break;
            CHECK(std::abs(surface_area(next.mesh) - targets.area) <= 1e-8 * targets.area);
        }
    }
}

TEST_CASE("restoration reaches the targets")
{
    const auto m = perturb(icosphere(2), 0.02, 3);
    auto t = measure_constraints(m);
    t.area *= 1.0 + 1e-4;
    t.volume *= 1.0 - 1e-4;
    const auto r = restore_constraints(m, t, 1e-10, 10);
    REQUIRE(r.mesh);
    CHECK(std::abs(surface_area(*r.mesh) / t.area - 1) <= 1e-10);
    CHECK(std::abs(signed_volume(*r.mesh) / t.volume - 1) <= 1e-10);
}

TEST_CASE("run_flow")
{
    SUBCASE("zero iterations returns the input")
    {
        FlowConfig cfg;
        cfg.max_iterations = 0;
        const auto m = perturb(icosphere(2), 0.02, 1);
        const auto r = run_flow(m, cfg);
        CHECK(r.mesh.positions() == m.positions());
        CHECK(r.trace.rows.empty());
        CHECK(r.trace.status == FlowStatus::max_iters);
    }
    SUBCASE("torus at its own iso: monotone decrease, constraints held")
    {
        FlowConfig cfg;
        cfg.max_iterations = 1500;
        const auto m = torus(small_torus(1.6, 24));
        const double w0 = willmore_energy(m);
        const auto r = run_flow(m, cfg);
        REQUIRE_FALSE(r.trace.rows.empty());
        for (std::size_t i = 1; i < r.trace.rows.size(); ++i) CHECK(r.trace.rows[i].willmore <= r.trace.rows[i - 1].willmore);
        CHECK(r.trace.rows.back().willmore < w0);
        CHECK(r.trace.max_constraint_drift() <= 1e-8);
        for (const auto& c : r.trace.checkpoints) CHECK_FALSE(c.intersects);
    }
    SUBCASE("deterministic and rigid-motion equivariant")
    {
        FlowConfig cfg;
        cfg.max_iterations = 40;
        const auto m = perturb(icosphere(2), 0.03, 8);
        const auto a = run_flow(m, cfg);
        const auto b = run_flow(m, cfg);
        std::ostringstream sa, sb;
        a.trace.write_csv(sa);
        b.trace.write_csv(sb);
        CHECK(sa.str() == sb.str());
        const auto moved = run_flow(transformed(m, rotation(0.3, 0.2, 0.1), Vec3(2, 3, 4)), cfg);
        // roundoff grows along the trajectory; compare the early iterations
        REQUIRE(moved.trace.rows.size() >= 10);
        for (std::size_t i = 0; i < 10; ++i)
            CHECK(std::abs(moved.trace.rows[i].willmore - a.trace.rows[i].willmore) <= 1e-9 * a.trace.rows[i].willmore);
    }
    SUBCASE("trace output")
    {
        FlowConfig cfg;
        cfg.max_iterations = 5;
        const auto r = run_flow(perturb(icosphere(2), 0.02, 3), cfg);
        std::ostringstream out;
        r.trace.write_csv(out);
        const auto text = out.str();
        CHECK(text.rfind(FlowTrace::csv_header(), 0) == 0);
        CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(r.trace.rows.size()) + 1);
        CHECK(r.trace.energy_svg().find("<svg") != std::string::npos);
    }
    SUBCASE("bad config")
    {
        FlowConfig cfg;
        cfg.backtracking_factor = 1.5;
        CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
        cfg = FlowConfig{};
        cfg.gradient_tolerance = 0;
        CHECK_THROWS_AS(run_flow(icosphere(1), cfg), std::invalid_argument);
    }
}

TEST_CASE("multiplier report")
{
    FlowConfig cfg;
    cfg.max_iterations = 400;
    const auto flowed = run_flow(icosphere(3), cfg);
    const auto s = multiplier_report(flowed.mesh);
    CHECK(s.kkt_residual < 0.05);
    CHECK(s.mu > 0);
    const auto rough = multiplier_report(perturb(icosphere(3), 0.05, 2));
    CHECK(rough.kkt_residual > 0.5);
    CHECK(rough.area_only_residual > 0.5);
}
