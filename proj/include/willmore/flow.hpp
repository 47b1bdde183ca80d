#pragma once

#include "willmore/operators.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace willmore {

/// Exact gradient of the discrete energy sum_i |(L Phi)_i|^2 / (4 A_i) with
/// respect to vertex positions, chain rule through cotangents and mixed
/// areas (piecewise: the obtuse/Voronoi switch is not differentiable).
VertexVectorField willmore_gradient(const Mesh& mesh, Exec exec = Exec::parallel);

/// Energy and gradient from one curvature pass.
double willmore_energy_and_gradient(const Mesh& mesh, VertexVectorField& gradient, Exec exec = Exec::parallel);

struct ConstraintGradients {
    VertexVectorField area;    // d(sum face areas)/dx
    VertexVectorField volume;  // d(signed volume)/dx
};

ConstraintGradients constraint_gradients(const Mesh& mesh);

enum class Preconditioner { none, sobolev };

std::string to_string(Preconditioner p);

struct FlowConfig {
    int max_iterations = 2000;
    double gradient_tolerance = 1e-6;    // |g_proj| / |g|
    double constraint_tolerance = 1e-8;  // relative drift of area and volume
    std::optional<double> initial_step;  // max vertex displacement; default 1e-3 * sqrt(area)
    double backtracking_factor = 0.5;
    double sufficient_decrease = 1e-4;
    int restoration_max_iters = 5;
    int remesh_every = 0;  // tangential smoothing cadence, 0 = off; smoothing may raise W
    bool normal_descent = false;  // keep only the vertex-normal component of grad W
    int intersection_check_every = 25;
    int max_backtracks = 40;
    int max_approach_iterations = 4000;
    int lbfgs_memory = 8;  // curvature pairs for the descent direction, 0 = steepest descent
    Preconditioner preconditioner = Preconditioner::sobolev;  // initial inverse Hessian
    double sobolev_shift = 0.01;                              // (shift I - L)^{-1}
    std::uint64_t random_seed = 0;

    void check() const;  // throws std::invalid_argument
};

/// Area and volume the flow holds fixed.
struct ConstraintTargets {
    double area;
    double volume;
    double iso() const { return area * area * area / (volume * volume); }
};

ConstraintTargets measure_constraints(const Mesh& mesh);

/// Targets with the given iso ratio, keeping the mesh's current area.
ConstraintTargets targets_for_iso(const Mesh& mesh, double iso);

enum class FlowStatus { converged, max_iters, line_search_failed, self_intersection, approach_failed };

std::string to_string(FlowStatus status);

struct FlowRow {
    int iteration = 0;
    double willmore = 0;
    double area = 0;
    double volume = 0;
    double iso = 0;
    double projected_gradient = 0;  // |g_proj| / |g|
    double step = 0;                // max vertex displacement of the accepted step
    double mu_area = 0;
    double mu_volume = 0;
    int restoration_iterations = 0;
};

struct IntersectionCheckpoint {
    int iteration = 0;
    double willmore = 0;
    bool intersects = false;
};

struct FlowTrace {
    std::vector<FlowRow> rows;
    std::vector<IntersectionCheckpoint> checkpoints;
    FlowStatus status = FlowStatus::max_iters;
    ConstraintTargets targets{0, 0};
    double initial_willmore = 0;
    int approach_iterations = 0;

    static std::string csv_header();
    void write_csv(std::ostream& out) const;
    /// Largest relative area/volume deviation from the targets over the rows.
    double max_constraint_drift() const;
    /// Simple polyline plot of W against iteration.
    std::string energy_svg() const;
};

/// Step-size and quasi-Newton state carried between iterations.
struct StepState {
    double displacement = 0;  // trial max vertex displacement
    std::vector<std::pair<VertexVectorField, VertexVectorField>> pairs;  // (s, y), oldest first
    std::vector<Vec3> last_positions;
    VertexVectorField last_projected;

    void reset() { *this = StepState{}; }
};

struct StepDiagnostics {
    double willmore_before = 0;
    double willmore_after = 0;
    double projected_gradient = 0;     // |g_proj| / |g|
    double projected_gradient_abs = 0; // |g_proj|
    double step = 0;
    double mu_area = 0;
    double mu_volume = 0;
    int restoration_iterations = 0;
    int backtracks = 0;
    bool singular_gram = false;
    bool stationary = false;  // projected gradient below tolerance, no move made
};

struct StepResult {
    Mesh mesh;
    bool accepted = false;
    StepDiagnostics diagnostics;
};

/// One projected, line-searched, constraint-restored descent step. The
/// direction is -H g_proj projected back onto the constraint tangent space,
/// where H is the limited-memory BFGS inverse Hessian built from past
/// projected gradients on top of the preconditioner (identity or
/// (shift I - L)^{-1}). Without curvature pairs, or when the candidate is not
/// a descent direction, it falls back to -g_proj.
StepResult constrained_step(const Mesh& mesh, const FlowConfig& config, const ConstraintTargets& targets,
                            StepState& state);

struct ProjectionResult {
    VertexVectorField projected;
    double mu_area = 0;
    double mu_volume = 0;
    bool singular = false;
};

/// g - mu_A gA - mu_V gV orthogonal to both constraint gradients. When gA
/// and gV are (numerically) parallel the single iso-combined direction
/// 3 V gA - 2 A gV is used instead.
ProjectionResult project_gradient(const VertexVectorField& gradient, const ConstraintGradients& constraints,
                                  double area, double volume);

struct RestorationResult {
    std::optional<Mesh> mesh;
    int iterations = 0;
};

/// Newton iterations on x + a gA + b gV to hit the targets to `tolerance`.
RestorationResult restore_constraints(const Mesh& mesh, const ConstraintTargets& targets, double tolerance,
                                      int max_iterations);

/// Moves a mesh onto the targets gradually: constrained descent at the
/// current values interleaved with small restoration moves toward the
/// targets. Returns nullopt if the targets cannot be reached.
struct ApproachResult {
    std::optional<Mesh> mesh;
    int iterations = 0;
};

ApproachResult approach_constraints(const Mesh& mesh, const ConstraintTargets& targets, const FlowConfig& config);

struct FlowResult {
    Mesh mesh;
    FlowTrace trace;
};

/// Constrained descent until the projected gradient tolerance, the
/// iteration budget, a line-search failure or a self-intersection. With no
/// targets the mesh's own area and volume are held.
FlowResult run_flow(const Mesh& mesh, const FlowConfig& config,
                    std::optional<ConstraintTargets> targets = std::nullopt);

struct MultiplierReport {
    double mu = 0;             // <gW, gA> / <gA, gA> after scaling to unit volume
    double area_only_residual = 0;  // |gW - mu gA| / |gW|
    double mu_area = 0;        // two-constraint multipliers
    double mu_volume = 0;
    double kkt_residual = 0;   // |gW - proj_span{gA, gV} gW| / |gW|
};

MultiplierReport multiplier_report(const Mesh& mesh);

}  // namespace willmore
