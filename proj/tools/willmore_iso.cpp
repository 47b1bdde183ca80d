// willmore-iso: energy reports, flows, mesh generation, sweeps and checks.
#include "willmore/bounds.hpp"
#include "willmore/experiments.hpp"
#include "willmore/flow.hpp"
#include "willmore/functionals.hpp"
#include "willmore/generators.hpp"
#include "willmore/intersect.hpp"
#include "willmore/mesh_io.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/os.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>

using namespace willmore;

namespace {

constexpr double kPi = std::numbers::pi;

// exit codes
constexpr int kOk = 0;
constexpr int kNumeric = 1;
constexpr int kInput = 2;

std::string g17(double x) { return fmt::format("{:.17g}", x); }

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
    if (!out) throw ConfigError("write failed: '" + path + "'");
}

int cmd_energy(const std::string& path)
{
    const auto report = energy_report(load_mesh(path));
    fmt::print("{}", report.to_key_value());
    fmt::print("{}\n{}\n", EnergyReport::csv_header(), report.to_csv_row());
    return kOk;
}

struct FlowArgs {
    std::string mesh;
    std::string config;
    std::string out;
    std::string trace;
    std::string svg;
};

int cmd_flow(const FlowArgs& a)
{
    const auto cfg = load_config(a.config);
    const Mesh mesh = load_mesh(a.mesh);
    std::optional<ConstraintTargets> targets;
    if (cfg.target_iso) targets = targets_for_iso(mesh, *cfg.target_iso);

    const auto stem = std::filesystem::path(a.mesh).stem().string();
    const auto out_path = a.out.empty() ? stem + ".flow.obj" : a.out;
    const auto trace_path = a.trace.empty() ? stem + ".trace.csv" : a.trace;

    const auto result = run_flow(mesh, cfg.flow, targets);
    save_mesh(result.mesh, out_path);
    {
        std::ofstream out(trace_path);
        if (!out) throw ConfigError("cannot write '" + trace_path + "'");
        result.trace.write_csv(out);
    }
    if (!a.svg.empty()) write_file(a.svg, result.trace.energy_svg());

    const auto& t = result.trace;
    const double w = t.rows.empty() ? willmore_energy(result.mesh) : t.rows.back().willmore;
    fmt::print("verdict W={} W_over_4pi={} drift={} status={} approach_iterations={} iterations={} config_hash={}\n",
               g17(w), g17(w / (4 * kPi)), g17(t.max_constraint_drift()), to_string(t.status), t.approach_iterations,
               t.rows.size(), cfg.hash());
    const bool failed = t.status == FlowStatus::self_intersection || t.status == FlowStatus::approach_failed;
    return failed ? kNumeric : kOk;
}

struct GenArgs {
    std::string shape;
    std::string out;
    int subdiv = 3;
    double tube = 1.0;
    double ring = 2.0;
    double amplitude = 0.5;
    int nu = 64;
    int nv = 64;
    double perturb_amp = 0;
    std::uint64_t seed = 0;
    double stretch = 1.0;
    std::optional<double> invert_distance;
};

int cmd_gen(const GenArgs& a)
{
    std::optional<Mesh> mesh;
    if (a.shape == "icosphere") {
        mesh = icosphere(a.subdiv);
        if (a.invert_distance) mesh = sphere_inversion(*mesh, {Vec3(1.0 + *a.invert_distance, 0, 0), 1.0});
    } else if (a.shape == "clifford") {
        if (a.nu != a.nv) throw ConfigError("clifford: use --n (square grid)");
        mesh = a.invert_distance ? inverted_clifford(*a.invert_distance, a.nu) : torus(clifford_torus_spec(a.nu, a.nv));
    } else if (a.shape == "torus") {
        TorusSpec spec;
        spec.tube_radius = a.tube;
        spec.ring_radius = a.ring;
        spec.nu = a.nu;
        spec.nv = a.nv;
        if (a.invert_distance) {
            const double d = *a.invert_distance;
            spec.u_warp = d / (2.0 * (spec.ring_radius + spec.tube_radius) + d);
            spec.v_warp = d / (2.0 * spec.tube_radius + d);
            mesh = sphere_inversion(torus(spec), {Vec3(spec.ring_radius + spec.tube_radius + d, 0, 0), 1.0});
        } else {
            mesh = torus(spec);
        }
    } else if (a.shape == "figure8") {
        mesh = figure_eight_torus(a.ring, a.amplitude, a.nu, a.nv);
    } else {
        throw ConfigError("unknown shape '" + a.shape + "' (icosphere, torus, clifford, figure8)");
    }
    if (a.stretch != 1.0) {
        Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
        s(2, 2) = a.stretch;
        mesh = transformed(*mesh, s);
    }
    if (a.perturb_amp > 0) mesh = perturb(*mesh, a.perturb_amp, a.seed);
    save_mesh(*mesh, a.out);
    fmt::print("wrote {} vertices={} faces={}\n", a.out, mesh->num_vertices(), mesh->num_faces());
    return kOk;
}

struct SweepArgs {
    std::string mode;
    std::string grid;
    std::string config;
    std::string out;
    std::string curve_out = "schygulla_curve.csv";
    std::string curve;
    std::string betas;
};

int cmd_sweep(const SweepArgs& a)
{
    const auto mode = sweep_mode_from_string(a.mode);
    const auto grid = parse_grid(read_text_file(a.grid));
    auto cfg = load_config(a.config);
    if (!a.curve.empty()) cfg.curve_path = a.curve;
    if (!a.betas.empty()) cfg.beta_path = a.betas;

    std::optional<SchygullaCurve> curve;
    BetaTable betas;
    if (!cfg.beta_path.empty()) {
        try {
            betas = BetaTable::from_csv(read_text_file(cfg.beta_path));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("beta table: ") + e.what());
        }
    }
    if (mode == SweepMode::ig_probe) {
        if (cfg.curve_path.empty())
            throw ConfigError("ig_probe needs a Schygulla curve: run `willmore-iso sweep --mode schygulla` first, "
                              "then pass --curve <file> or set curve = <file>");
        try {
            curve = SchygullaCurve::from_csv(read_text_file(cfg.curve_path), false);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("curve: ") + e.what());
        }
    }

    const auto out = run_sweep(mode, grid, cfg, curve, betas);
    for (const auto& line : out.result.log) fmt::print(stderr, "{}\n", line);
    if (a.out.empty()) fmt::print("{}", out.result.to_csv());
    else write_file(a.out, out.result.to_csv());
    if (out.curve) {
        write_file(a.curve_out, out.curve->to_csv());
        fmt::print(stderr, "curve written to {}\n", a.curve_out);
    }

    bool failed = false;
    for (const auto& row : out.result.rows) failed = failed || std::isnan(row.w_min);
    return failed ? kNumeric : kOk;
}

int cmd_check(const std::string& path)
{
    const Mesh mesh = load_mesh(path);
    bool all = true;
    const auto line = [&](const std::string& name, bool pass, const std::string& detail) {
        fmt::print("{} {} {}\n", name, pass ? "PASS" : "FAIL", detail);
        all = all && pass;
    };

    const double w = willmore_energy(mesh);
    const bool intersects = self_intersects(mesh).intersects;
    const double eight_pi = li_yau_bound(2);
    line("li_yau", w >= eight_pi || !intersects,
         fmt::format("W={} 8pi={} self_intersects={}", g17(w), g17(eight_pi), intersects));

    if (intersects) {
        fmt::print("iso SKIP volume undefined for non-embedded mesh\n");
    } else {
        const double iso = iso_ratio(mesh);
        line("iso", iso >= 36.0 * kPi * (1.0 - 0.02), fmt::format("iso={} iso_over_36pi={}", g17(iso), g17(iso / (36 * kPi))));
    }

    const auto simon = simon_check(mesh);
    line("simon", simon.holds,
         fmt::format("area_over_W={} diam_squared={}", g17(simon.area_over_willmore), g17(simon.diameter_squared)));

    const double gb = gauss_bonnet_residual(mesh);
    line("gauss_bonnet", gb < 1e-9, fmt::format("residual={}", g17(gb)));

    // upper half by face centroid height
    const double zc = mesh.centroid().z();
    std::vector<int> half;
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const auto& t = mesh.faces()[static_cast<std::size_t>(f)];
        const double z = (mesh.position(t[0]).z() + mesh.position(t[1]).z() + mesh.position(t[2]).z()) / 3.0;
        if (z >= zc) half.push_back(f);
    }
    try {
        const auto bb = boundary_bound_check(SubMesh(mesh, half));
        if (bb.vacuous) {
            fmt::print("boundary_bound SKIP vacuous\n");
        } else {
            line("boundary_bound", bb.holds,
                 fmt::format("lhs={} rhs={} W_patch={} length={} d={}", g17(bb.lhs), g17(bb.rhs), g17(bb.patch_willmore),
                             g17(bb.boundary_length), g17(bb.distance)));
        }
    } catch (const MeshError& e) {
        fmt::print("boundary_bound SKIP {}\n", e.what());
    }
    return all ? kOk : kNumeric;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Discrete Willmore energy at fixed isoperimetric ratio"};
    app.require_subcommand(1);

    std::string energy_mesh;
    auto* energy = app.add_subcommand("energy", "energy report of a closed mesh");
    energy->add_option("mesh", energy_mesh, "OBJ or PLY file")->required();

    FlowArgs flow_args;
    auto* flow = app.add_subcommand("flow", "constrained Willmore flow");
    flow->add_option("mesh", flow_args.mesh, "input mesh")->required();
    flow->add_option("--config", flow_args.config, "key = value config")->required();
    flow->add_option("--out", flow_args.out, "final mesh (default <stem>.flow.obj)");
    flow->add_option("--trace", flow_args.trace, "trace CSV (default <stem>.trace.csv)");
    flow->add_option("--svg", flow_args.svg, "energy trace SVG");

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "generate a mesh");
    gen->add_option("shape", gen_args.shape, "icosphere | torus | clifford | figure8")->required();
    gen->add_option("-o,--out", gen_args.out, "output .obj or .ply")->required();
    gen->add_option("--subdiv", gen_args.subdiv, "icosphere subdivisions")->check(CLI::Range(0, 7));
    gen->add_option("--tube", gen_args.tube, "torus tube radius");
    gen->add_option("--ring", gen_args.ring, "torus / figure8 ring radius");
    gen->add_option("--amplitude", gen_args.amplitude, "figure8 profile amplitude");
    gen->add_option("--nu", gen_args.nu, "samples around the ring");
    gen->add_option("--nv", gen_args.nv, "samples around the tube");
    gen->add_option_function<int>("--n", [&](const int& n) { gen_args.nu = gen_args.nv = n; }, "square grid size");
    gen->add_option("--perturb", gen_args.perturb_amp, "normal noise, fraction of bbox diagonal");
    gen->add_option("--seed", gen_args.seed, "noise seed");
    gen->add_option("--stretch", gen_args.stretch, "z scale factor")->check(CLI::PositiveNumber);
    gen->add_option_function<double>("--invert-distance", [&](const double& d) { gen_args.invert_distance = d; },
                                     "invert in a unit sphere this far outside the surface along +x")
        ->check(CLI::PositiveNumber);

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "Schygulla curve sweep or I_1 admissibility probe");
    sweep->add_option("--mode", sweep_args.mode, "schygulla | ig_probe")->required();
    sweep->add_option("--grid", sweep_args.grid, "R values file")->required();
    sweep->add_option("--config", sweep_args.config, "key = value config")->required();
    sweep->add_option("--out", sweep_args.out, "sweep CSV (default stdout)");
    sweep->add_option("--curve-out", sweep_args.curve_out, "schygulla mode: curve CSV")->capture_default_str();
    sweep->add_option("--curve", sweep_args.curve, "ig_probe: curve CSV from a schygulla sweep");
    sweep->add_option("--betas", sweep_args.betas, "beta table CSV");

    std::string check_mesh;
    auto* check = app.add_subcommand("check", "Li-Yau, iso, Simon, Gauss-Bonnet and boundary checks");
    check->add_option("mesh", check_mesh, "OBJ or PLY file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInput;
    }

    try {
        if (*energy) return cmd_energy(energy_mesh);
        if (*flow) return cmd_flow(flow_args);
        if (*gen) return cmd_gen(gen_args);
        if (*sweep) return cmd_sweep(sweep_args);
        if (*check) return cmd_check(check_mesh);
    } catch (const ConfigError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kInput;
    } catch (const ParseError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kInput;
    } catch (const MeshError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kInput;
    } catch (const std::invalid_argument& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kInput;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kNumeric;
    }
    return kInput;
}
