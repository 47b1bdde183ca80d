#include "willmore/flow.hpp"

#include "willmore/functionals.hpp"
#include "willmore/generators.hpp"
#include "willmore/intersect.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace willmore {

namespace {

using FlatMap = Eigen::Map<Eigen::VectorXd>;
using ConstFlatMap = Eigen::Map<const Eigen::VectorXd>;

FlatMap flat(VertexVectorField& f) { return {f.empty() ? nullptr : f.front().data(), static_cast<Eigen::Index>(3 * f.size())}; }
ConstFlatMap flat(const VertexVectorField& f)
{
    return {f.empty() ? nullptr : f.front().data(), static_cast<Eigen::Index>(3 * f.size())};
}

double max_vertex_norm(const VertexVectorField& f)
{
    double m = 0.0;
    for (const auto& v : f) m = std::max(m, v.norm());
    return m;
}

// (shift I - L)^{-1} applied per coordinate, L the cotan Laplacian.
class SobolevMetric {
public:
    SobolevMetric(const Mesh& mesh, double shift) : n_(mesh.num_vertices())
    {
        Eigen::SparseMatrix<double> k = -cotan_laplacian(mesh);
        for (int i = 0; i < n_; ++i) k.coeffRef(i, i) += shift;
        solver_.compute(k);
        if (solver_.info() != Eigen::Success) throw MeshError("sobolev metric: factorization failed");
    }

    Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& v) const
    {
        // flat layout is vertex-major (x0 y0 z0 x1 ...), i.e. a 3 x n column-major block
        const Eigen::MatrixXd rhs = Eigen::Map<const Eigen::MatrixXd>(v.data(), 3, n_).transpose();
        const Eigen::MatrixXd sol = solver_.solve(rhs).transpose();
        return Eigen::Map<const Eigen::VectorXd>(sol.data(), 3 * n_);
    }

private:
    int n_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

// Gradient of the local energy terms of one face with respect to its three
// corners. `ybar` and `abar` are the adjoints dW/d(L Phi)_i and dW/dA_i of
// the face's vertices.
void face_willmore_gradient(const std::array<const Vec3*, 3>& p, const std::array<Vec3, 3>& ybar,
                            const std::array<double, 3>& abar, std::array<Vec3, 3>& out)
{
    const Vec3 normal_raw = (*p[1] - *p[0]).cross(*p[2] - *p[0]);
    const double two_area = normal_raw.norm();
    const Vec3 n = normal_raw / two_area;

    std::array<Vec3, 3> edge;        // edge opposite corner c: p[c+2] - p[c+1]
    std::array<Vec3, 3> grad_two_area;
    std::array<double, 3> dot{};
    std::array<double, 3> cot{};
    for (std::size_t c = 0; c < 3; ++c) {
        edge[c] = *p[(c + 2) % 3] - *p[(c + 1) % 3];
        grad_two_area[c] = n.cross(edge[c]);
        dot[c] = (*p[(c + 1) % 3] - *p[c]).dot(*p[(c + 2) % 3] - *p[c]);
        cot[c] = dot[c] / two_area;
    }
    const bool obtuse = dot[0] < 0.0 || dot[1] < 0.0 || dot[2] < 0.0;

    out = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    for (std::size_t c = 0; c < 3; ++c) {
        const std::size_t c1 = (c + 1) % 3;
        const std::size_t c2 = (c + 2) % 3;
        const Vec3 delta = ybar[c1] - ybar[c2];
        // coefficient multiplying grad(cot_c)
        double kappa = 0.5 * delta.dot(edge[c]);
        const double half_cot = 0.5 * cot[c];
        out[c2] += half_cot * delta;
        out[c1] -= half_cot * delta;
        if (!obtuse) {
            const double s = (abar[c1] + abar[c2]) / 8.0;
            kappa += s * edge[c].squaredNorm();
            const Vec3 dl = 2.0 * s * cot[c] * edge[c];
            out[c2] += dl;
            out[c1] -= dl;
        }
        const Vec3 u = *p[c1] - *p[c];
        const Vec3 v = *p[c2] - *p[c];
        // grad cot = (grad dot - cot grad(2A)) / 2A
        out[c] += kappa * (-(u + v) - cot[c] * grad_two_area[c]) / two_area;
        out[c1] += kappa * (v - cot[c] * grad_two_area[c1]) / two_area;
        out[c2] += kappa * (u - cot[c] * grad_two_area[c2]) / two_area;
    }
    if (obtuse) {
        double sigma = 0.0;
        for (std::size_t k = 0; k < 3; ++k) sigma += abar[k] * (dot[k] < 0.0 ? 0.5 : 0.25);
        for (std::size_t j = 0; j < 3; ++j) out[j] += 0.5 * sigma * grad_two_area[j];
    }
}

}  // namespace

double willmore_energy_and_gradient(const Mesh& mesh, VertexVectorField& gradient, Exec exec)
{
    const auto data = laplacian_data(mesh, exec);
    const std::size_t nv = data.area.size();
    std::vector<Vec3> ybar(nv);
    std::vector<double> abar(nv);
    double energy = 0.0;
    for (std::size_t i = 0; i < nv; ++i) {
        const double a = data.area[i];
        const double y2 = data.laplacian[i].squaredNorm();
        energy += y2 / (4.0 * a);
        ybar[i] = data.laplacian[i] / (2.0 * a);
        abar[i] = -y2 / (4.0 * a * a);
    }

    const auto& faces = mesh.faces();
    const auto& x = mesh.positions();
    const int nf = mesh.num_faces();
    gradient.assign(nv, Vec3::Zero());

    const auto local = [&](int f, std::array<Vec3, 3>& out) {
        const auto& face = faces[static_cast<std::size_t>(f)];
        const std::array<const Vec3*, 3> p{&x[static_cast<std::size_t>(face[0])], &x[static_cast<std::size_t>(face[1])],
                                           &x[static_cast<std::size_t>(face[2])]};
        const std::array<Vec3, 3> yb{ybar[static_cast<std::size_t>(face[0])], ybar[static_cast<std::size_t>(face[1])],
                                     ybar[static_cast<std::size_t>(face[2])]};
        const std::array<double, 3> ab{abar[static_cast<std::size_t>(face[0])], abar[static_cast<std::size_t>(face[1])],
                                       abar[static_cast<std::size_t>(face[2])]};
        face_willmore_gradient(p, yb, ab, out);
    };

    if (exec == Exec::serial) {
        std::array<Vec3, 3> out;
        for (int f = 0; f < nf; ++f) {
            local(f, out);
            for (std::size_t k = 0; k < 3; ++k) gradient[static_cast<std::size_t>(faces[static_cast<std::size_t>(f)][k])] += out[k];
        }
        return energy;
    }

    std::vector<Vec3> corner(static_cast<std::size_t>(nf) * 3);
#pragma omp parallel for schedule(static)
    for (int f = 0; f < nf; ++f) {
        std::array<Vec3, 3> out;
        local(f, out);
        for (std::size_t k = 0; k < 3; ++k) corner[3 * static_cast<std::size_t>(f) + k] = out[k];
    }
    const int n = mesh.num_vertices();
#pragma omp parallel for schedule(static)
    for (int v = 0; v < n; ++v) {
        Vec3 g = Vec3::Zero();
        for (int c : mesh.vertex_corners(v)) g += corner[static_cast<std::size_t>(c)];
        gradient[static_cast<std::size_t>(v)] = g;
    }
    return energy;
}

VertexVectorField willmore_gradient(const Mesh& mesh, Exec exec)
{
    VertexVectorField g;
    willmore_energy_and_gradient(mesh, g, exec);
    return g;
}

ConstraintGradients constraint_gradients(const Mesh& mesh)
{
    const auto& x = mesh.positions();
    const Vec3 c = mesh.centroid();
    ConstraintGradients out{VertexVectorField(x.size(), Vec3::Zero()), VertexVectorField(x.size(), Vec3::Zero())};
    for (const auto& face : mesh.faces()) {
        const std::array<Vec3, 3> p{x[static_cast<std::size_t>(face[0])], x[static_cast<std::size_t>(face[1])],
                                    x[static_cast<std::size_t>(face[2])]};
        const Vec3 n = (p[1] - p[0]).cross(p[2] - p[0]).normalized();
        for (std::size_t k = 0; k < 3; ++k) {
            const Vec3& b = p[(k + 1) % 3];
            const Vec3& d = p[(k + 2) % 3];
            out.area[static_cast<std::size_t>(face[k])] += 0.5 * n.cross(d - b);
            out.volume[static_cast<std::size_t>(face[k])] += (b - c).cross(d - c) / 6.0;
        }
    }
    return out;
}

void FlowConfig::check() const
{
    if (max_iterations < 0) throw std::invalid_argument("max_iterations must be >= 0");
    if (!(gradient_tolerance > 0.0) || !(constraint_tolerance > 0.0))
        throw std::invalid_argument("tolerances must be positive");
    if (initial_step && !(*initial_step > 0.0)) throw std::invalid_argument("initial_step must be positive");
    if (!(backtracking_factor > 0.0 && backtracking_factor < 1.0))
        throw std::invalid_argument("backtracking_factor must lie in (0, 1)");
    if (!(sufficient_decrease > 0.0 && sufficient_decrease < 1.0))
        throw std::invalid_argument("sufficient_decrease must lie in (0, 1)");
    if (restoration_max_iters < 1) throw std::invalid_argument("restoration_max_iters must be >= 1");
    if (remesh_every < 0) throw std::invalid_argument("remesh_every must be >= 0");
    if (lbfgs_memory < 0) throw std::invalid_argument("lbfgs_memory must be >= 0");
    if (!(sobolev_shift > 0.0)) throw std::invalid_argument("sobolev_shift must be positive");
    if (intersection_check_every < 1) throw std::invalid_argument("intersection_check_every must be >= 1");
}

ConstraintTargets measure_constraints(const Mesh& mesh) { return {surface_area(mesh), signed_volume(mesh)}; }

ConstraintTargets targets_for_iso(const Mesh& mesh, double iso)
{
    if (!(iso > 0.0)) throw std::invalid_argument("targets_for_iso: iso must be positive");
    const double a = surface_area(mesh);
    return {a, std::sqrt(a * a * a / iso)};
}

std::string to_string(Preconditioner p) { return p == Preconditioner::sobolev ? "sobolev" : "none"; }

std::string to_string(FlowStatus status)
{
    switch (status) {
    case FlowStatus::converged: return "converged";
    case FlowStatus::max_iters: return "max_iters";
    case FlowStatus::line_search_failed: return "line_search_failed";
    case FlowStatus::self_intersection: return "self_intersection";
    case FlowStatus::approach_failed: return "approach_failed";
    }
    return "unknown";
}

ProjectionResult project_gradient(const VertexVectorField& gradient, const ConstraintGradients& constraints,
                                  double area, double volume)
{
    const auto g = flat(gradient);
    const auto a = flat(constraints.area);
    const auto v = flat(constraints.volume);
    ProjectionResult out;
    out.projected = gradient;
    auto gp = flat(out.projected);

    const double a_norm = a.norm();
    if (!(a_norm > 0.0)) throw MeshError("project_gradient: zero area gradient");
    const Eigen::VectorXd q1 = a / a_norm;
    Eigen::VectorXd w = v - q1.dot(v) * q1;
    w -= q1.dot(w) * q1;
    const double w_norm = w.norm();

    if (w_norm > 1e-8 * v.norm()) {
        const Eigen::VectorXd q2 = w / w_norm;
        const double alpha = q1.dot(g);
        gp -= alpha * q1;
        const double beta = q2.dot(gp);
        gp -= beta * q2;
        // re-orthogonalise against roundoff
        gp -= q1.dot(gp) * q1;
        gp -= q2.dot(gp) * q2;
        out.mu_volume = beta / w_norm;
        out.mu_area = (alpha - out.mu_volume * q1.dot(v)) / a_norm;
        return out;
    }

    out.singular = true;
    Eigen::VectorXd dir = 3.0 * volume * a - 2.0 * area * v;
    double scale_a = 3.0 * volume;
    double scale_v = -2.0 * area;
    if (!(dir.norm() > 1e-8 * 3.0 * std::abs(volume) * a_norm)) {
        // iso is stationary here (round sphere): the span is the area direction
        dir = a;
        scale_a = 1.0;
        scale_v = 0.0;
    }
    const double d_norm = dir.norm();
    const Eigen::VectorXd q = dir / d_norm;
    const double alpha = q.dot(g);
    gp -= alpha * q;
    gp -= q.dot(gp) * q;
    const double mu = alpha / d_norm;
    out.mu_area = mu * scale_a;
    out.mu_volume = mu * scale_v;
    return out;
}

namespace {

bool within(const ConstraintTargets& t, double area, double volume, double tol)
{
    return std::abs(area - t.area) <= tol * std::abs(t.area) && std::abs(volume - t.volume) <= tol * std::abs(t.volume);
}

}  // namespace

RestorationResult restore_constraints(const Mesh& mesh, const ConstraintTargets& targets, double tolerance,
                                      int max_iterations)
{
    RestorationResult out;
    std::vector<Vec3> x = mesh.positions();
    Mesh current = mesh;
    for (int it = 0;; ++it) {
        const double area = surface_area(current);
        const double volume = signed_volume(current);
        if (!std::isfinite(area) || !std::isfinite(volume)) return out;
        // aim well inside the tolerance so drift cannot creep up to it
        const bool ok = within(targets, area, volume, tolerance);
        if (ok && (it == max_iterations || within(targets, area, volume, 1e-3 * tolerance))) {
            out.mesh = std::move(current);
            out.iterations = it;
            return out;
        }
        if (it == max_iterations) return out;
        const auto cg = constraint_gradients(current);
        const auto a = flat(cg.area);
        const auto v = flat(cg.volume);
        Eigen::Matrix2d gram;
        gram << a.dot(a), a.dot(v), a.dot(v), v.dot(v);
        const Eigen::Vector2d rhs(targets.area - area, targets.volume - volume);
        // symmetric 2x2: pseudo-inverse through its eigen-decomposition
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(gram);
        const auto& lambda = eig.eigenvalues();
        const double cutoff = 1e-12 * lambda.cwiseAbs().maxCoeff();
        Eigen::Vector2d coeff = Eigen::Vector2d::Zero();
        for (int k = 0; k < 2; ++k)
            if (std::abs(lambda[k]) > cutoff)
                coeff += eig.eigenvectors().col(k) * (eig.eigenvectors().col(k).dot(rhs) / lambda[k]);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = current.position(static_cast<int>(i)) + coeff[0] * cg.area[i] + coeff[1] * cg.volume[i];
        try {
            current = mesh.with_positions(x);
        } catch (const MeshError&) {
            return out;
        }
    }
}

StepResult constrained_step(const Mesh& mesh, const FlowConfig& config, const ConstraintTargets& targets,
                            StepState& state)
{
    StepResult result{mesh, false, {}};
    auto& diag = result.diagnostics;

    VertexVectorField g;
    const double energy = willmore_energy_and_gradient(mesh, g);
    if (config.normal_descent) {
        const auto nrm = vertex_normals(mesh);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = g[i].dot(nrm[i]) * nrm[i];
    }
    const auto cg = constraint_gradients(mesh);
    const auto proj = project_gradient(g, cg, surface_area(mesh), signed_volume(mesh));
    const double g_norm = flat(g).norm();
    const double p_norm = flat(proj.projected).norm();

    diag.willmore_before = energy;
    diag.willmore_after = energy;
    diag.mu_area = proj.mu_area;
    diag.mu_volume = proj.mu_volume;
    diag.singular_gram = proj.singular;
    diag.projected_gradient_abs = p_norm;
    const double area = surface_area(mesh);
    const double scale = std::sqrt(area);
    // absolute floor: on symmetric meshes the gradient itself is roundoff
    const double floor = 1e-8 * energy * std::sqrt(static_cast<double>(mesh.num_vertices())) / scale;
    diag.projected_gradient = p_norm / std::max(g_norm, floor);

    if (p_norm == 0.0 || diag.projected_gradient <= config.gradient_tolerance) {
        diag.stationary = true;
        result.accepted = true;
        return result;
    }

    if (!(state.displacement > 0.0)) state.displacement = config.initial_step.value_or(1e-3 * scale);
    const double max_displacement = 0.05 * scale;
    const auto& x = mesh.positions();
    std::optional<SobolevMetric> metric;
    if (config.preconditioner == Preconditioner::sobolev) metric.emplace(mesh, config.sobolev_shift);

    if (config.lbfgs_memory > 0) {
        if (state.last_positions.size() == x.size()) {
            VertexVectorField sv(x.size());
            VertexVectorField yv(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) {
                sv[i] = x[i] - state.last_positions[i];
                yv[i] = proj.projected[i] - state.last_projected[i];
            }
            const double sy = flat(sv).dot(flat(yv));
            if (sy > 1e-10 * flat(sv).norm() * flat(yv).norm()) {
                state.pairs.emplace_back(std::move(sv), std::move(yv));
                if (state.pairs.size() > static_cast<std::size_t>(config.lbfgs_memory))
                    state.pairs.erase(state.pairs.begin());
            }
        }
        state.last_positions = x;
        state.last_projected = proj.projected;
    }

    const auto steepest = [&] {
        VertexVectorField d(proj.projected.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = -proj.projected[i];
        return d;
    };
    // two-loop recursion on the stored pairs
    const auto quasi_newton = [&]() -> std::optional<VertexVectorField> {
        if (state.pairs.empty()) return std::nullopt;
        Eigen::VectorXd q = flat(proj.projected);
        std::vector<double> alpha(state.pairs.size());
        for (std::size_t k = state.pairs.size(); k-- > 0;) {
            const auto sk = flat(state.pairs[k].first);
            const auto yk = flat(state.pairs[k].second);
            alpha[k] = sk.dot(q) / yk.dot(sk);
            q -= alpha[k] * yk;
        }
        const auto s_new = flat(state.pairs.back().first);
        const auto y_new = flat(state.pairs.back().second);
        if (metric) {
            const Eigen::VectorXd hy = metric->apply(y_new);
            q = metric->apply(q) * (s_new.dot(y_new) / y_new.dot(hy));
        } else {
            q *= s_new.dot(y_new) / y_new.squaredNorm();
        }
        for (std::size_t k = 0; k < state.pairs.size(); ++k) {
            const auto sk = flat(state.pairs[k].first);
            const auto yk = flat(state.pairs[k].second);
            const double beta = yk.dot(q) / yk.dot(sk);
            q += (alpha[k] - beta) * sk;
        }
        VertexVectorField d(x.size());
        flat(d) = -q;
        // back onto the tangent space of the constraints
        auto tangent = project_gradient(d, cg, surface_area(mesh), signed_volume(mesh)).projected;
        const double slope = flat(tangent).dot(flat(proj.projected));
        if (!(slope < -1e-12 * flat(tangent).norm() * p_norm)) return std::nullopt;
        return tangent;
    };

    std::vector<Vec3> trial(x.size());
    const auto search = [&](const VertexVectorField& d, bool scaled) {
        const double slope = flat(d).dot(flat(proj.projected));
        const double d_max = max_vertex_norm(d);
        // scaled directions start at t = 1; steepest descent at the remembered displacement
        double t = scaled ? std::min(1.0, max_displacement / d_max) : std::min(state.displacement, max_displacement) / d_max;
        for (int bt = 0; bt <= config.max_backtracks; ++bt, t *= config.backtracking_factor) {
            diag.backtracks = bt;
            for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = x[i] + t * d[i];
            try {
                auto restored = restore_constraints(mesh.with_positions(trial), targets, config.constraint_tolerance,
                                                    config.restoration_max_iters);
                if (!restored.mesh) continue;
                const double trial_energy = willmore_energy(*restored.mesh);
                if (!(trial_energy < energy && trial_energy <= energy + config.sufficient_decrease * t * slope))
                    continue;
                const double moved = t * d_max;
                diag.willmore_after = trial_energy;
                diag.step = moved;
                diag.restoration_iterations = restored.iterations;
                result.mesh = std::move(*restored.mesh);
                result.accepted = true;
                state.displacement = std::min(2.0 * moved, max_displacement);
                return true;
            } catch (const MeshError&) {
                continue;
            }
        }
        return false;
    };

    if (config.lbfgs_memory > 0) {
        if (auto d = quasi_newton()) {
            if (search(*d, true)) return result;
        }
        state.pairs.clear();
    }
    search(steepest(), false);
    return result;
}

namespace {

// Tangential uniform-Laplacian relaxation, then constraint restoration.
std::optional<Mesh> smooth_tangentially(const Mesh& mesh, const ConstraintTargets& targets, const FlowConfig& config)
{
    const auto normals = vertex_normals(mesh);
    std::vector<Vec3> x = mesh.positions();
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const auto nbrs = mesh.vertex_neighbors(v);
        Vec3 avg = Vec3::Zero();
        for (int u : nbrs) avg += mesh.position(u);
        avg /= static_cast<double>(nbrs.size());
        Vec3 delta = avg - mesh.position(v);
        const Vec3& n = normals[static_cast<std::size_t>(v)];
        delta -= delta.dot(n) * n;
        x[static_cast<std::size_t>(v)] += 0.5 * delta;
    }
    try {
        auto restored = restore_constraints(mesh.with_positions(std::move(x)), targets, config.constraint_tolerance,
                                            config.restoration_max_iters);
        if (!restored.mesh) return std::nullopt;
        return restored.mesh;
    } catch (const MeshError&) {
        return std::nullopt;
    }
}

}  // namespace

ApproachResult approach_constraints(const Mesh& mesh, const ConstraintTargets& targets, const FlowConfig& config)
{
    ApproachResult out;
    Mesh current = mesh;
    StepState state;
    double rate = 0.02;
    for (int it = 0; it < config.max_approach_iterations; ++it) {
        const auto now = measure_constraints(current);
        if (within(targets, now.area, now.volume, config.constraint_tolerance)) {
            out.mesh = std::move(current);
            out.iterations = it;
            return out;
        }
        // hold the current values for a smoothing descent step
        auto held = restore_constraints(current, now, config.constraint_tolerance, config.restoration_max_iters);
        if (held.mesh) {
            auto step = constrained_step(*held.mesh, config, now, state);
            current = std::move(step.mesh);
            if (!step.accepted) state.reset();
        }
        const auto clamp_ratio = [rate](double target, double value) {
            return value * std::clamp(target / value, 1.0 - rate, 1.0 + rate);
        };
        const auto base = measure_constraints(current);
        const ConstraintTargets intermediate{clamp_ratio(targets.area, base.area),
                                             clamp_ratio(targets.volume, base.volume)};
        auto moved = restore_constraints(current, intermediate, config.constraint_tolerance,
                                         config.restoration_max_iters);
        if (moved.mesh) {
            current = std::move(*moved.mesh);
            // the target move is not a descent step, so its curvature pair is meaningless
            state.pairs.clear();
            state.last_positions.clear();
            rate = std::min(1.5 * rate, 0.1);
        } else {
            rate *= 0.5;
            if (rate < 1e-7) break;
        }
        out.iterations = it + 1;
    }
    return out;
}

FlowResult run_flow(const Mesh& mesh, const FlowConfig& config, std::optional<ConstraintTargets> targets)
{
    config.check();
    FlowResult result{mesh, {}};
    auto& trace = result.trace;
    trace.targets = targets.value_or(measure_constraints(mesh));
    trace.status = FlowStatus::max_iters;
    if (config.max_iterations == 0) {
        trace.initial_willmore = willmore_energy(mesh);
        return result;
    }

    Mesh current = mesh;
    {
        const auto now = measure_constraints(current);
        if (!within(trace.targets, now.area, now.volume, config.constraint_tolerance)) {
            auto approached = approach_constraints(current, trace.targets, config);
            trace.approach_iterations = approached.iterations;
            if (!approached.mesh) {
                trace.status = FlowStatus::approach_failed;
                return result;
            }
            current = std::move(*approached.mesh);
        }
    }

    double energy = willmore_energy(current);
    trace.initial_willmore = energy;
    const auto checkpoint = [&](int iteration) {
        const bool hit = self_intersects(current).intersects;
        trace.checkpoints.push_back({iteration, energy, hit});
        return hit;
    };
    if (checkpoint(0)) {
        trace.status = FlowStatus::self_intersection;
        result.mesh = std::move(current);
        return result;
    }

    StepState state;
    int last_checked = 0;
    for (int it = 1; it <= config.max_iterations; ++it) {
        auto step = constrained_step(current, config, trace.targets, state);
        if (step.diagnostics.stationary) {
            trace.status = FlowStatus::converged;
            break;
        }
        if (!step.accepted) {
            trace.status = FlowStatus::line_search_failed;
            break;
        }
        current = std::move(step.mesh);
        energy = step.diagnostics.willmore_after;
        const auto now = measure_constraints(current);
        FlowRow row;
        row.iteration = it;
        row.willmore = energy;
        row.area = now.area;
        row.volume = now.volume;
        row.iso = now.iso();
        row.projected_gradient = step.diagnostics.projected_gradient;
        row.step = step.diagnostics.step;
        row.mu_area = step.diagnostics.mu_area;
        row.mu_volume = step.diagnostics.mu_volume;
        row.restoration_iterations = step.diagnostics.restoration_iterations;
        trace.rows.push_back(row);

        if (config.remesh_every > 0 && it % config.remesh_every == 0) {
            if (auto smoothed = smooth_tangentially(current, trace.targets, config)) {
                current = std::move(*smoothed);
                energy = willmore_energy(current);
                trace.rows.back().willmore = energy;
                state.reset();
            }
        }
        if (it % config.intersection_check_every == 0) {
            last_checked = it;
            if (checkpoint(it)) {
                trace.status = FlowStatus::self_intersection;
                break;
            }
        }
    }
    const int last = trace.rows.empty() ? 0 : trace.rows.back().iteration;
    if (trace.status != FlowStatus::self_intersection && last != last_checked && checkpoint(last))
        trace.status = FlowStatus::self_intersection;
    result.mesh = std::move(current);
    return result;
}

std::string FlowTrace::csv_header()
{
    return "iteration,willmore,area,volume,iso,projected_gradient,step,mu_area,mu_volume,restoration_iterations";
}

void FlowTrace::write_csv(std::ostream& out) const
{
    const auto old = out.precision(17);
    out << csv_header() << '\n';
    for (const auto& r : rows)
        out << r.iteration << ',' << r.willmore << ',' << r.area << ',' << r.volume << ',' << r.iso << ','
            << r.projected_gradient << ',' << r.step << ',' << r.mu_area << ',' << r.mu_volume << ','
            << r.restoration_iterations << '\n';
    out.precision(old);
}

double FlowTrace::max_constraint_drift() const
{
    double drift = 0.0;
    for (const auto& r : rows) {
        drift = std::max(drift, std::abs(r.area - targets.area) / std::abs(targets.area));
        drift = std::max(drift, std::abs(r.volume - targets.volume) / std::abs(targets.volume));
    }
    return drift;
}

std::string FlowTrace::energy_svg() const
{
    constexpr double kWidth = 640;
    constexpr double kHeight = 360;
    constexpr double kPad = 40;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!rows.empty()) {
        double lo = initial_willmore;
        double hi = initial_willmore;
        for (const auto& r : rows) {
            lo = std::min(lo, r.willmore);
            hi = std::max(hi, r.willmore);
        }
        if (hi - lo < 1e-12) hi = lo + 1.0;
        const double last = std::max(1, rows.back().iteration);
        const auto px = [&](double it) { return kPad + (kWidth - 2 * kPad) * it / last; };
        const auto py = [&](double w) { return kHeight - kPad - (kHeight - 2 * kPad) * (w - lo) / (hi - lo); };
        out << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
        out << std::setprecision(6) << px(0) << ',' << py(initial_willmore);
        for (const auto& r : rows) out << ' ' << px(r.iteration) << ',' << py(r.willmore);
        out << "\"/>\n";
        out << "<text x=\"" << kPad << "\" y=\"20\" font-size=\"12\">W: " << std::setprecision(8) << initial_willmore
            << " -> " << rows.back().willmore << " (" << rows.back().iteration << " iterations)</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

MultiplierReport multiplier_report(const Mesh& mesh)
{
    const double volume = signed_volume(mesh);
    if (!(volume > 0.0)) throw MeshError("multiplier_report: non-positive volume");
    const Mesh unit = scaled(mesh, std::cbrt(1.0 / volume));
    VertexVectorField g;
    willmore_energy_and_gradient(unit, g);
    const auto cg = constraint_gradients(unit);
    const auto gw = flat(g);
    const auto ga = flat(cg.area);
    const double aa = ga.squaredNorm();
    if (!(aa > 0.0)) throw MeshError("multiplier_report: zero area gradient");
    MultiplierReport out;
    const double g_norm = gw.norm();
    out.mu = gw.dot(ga) / aa;
    const auto proj = project_gradient(g, cg, surface_area(unit), signed_volume(unit));
    out.mu_area = proj.mu_area;
    out.mu_volume = proj.mu_volume;
    if (g_norm > 0.0) {
        out.area_only_residual = (gw - out.mu * ga).norm() / g_norm;
        out.kkt_residual = flat(proj.projected).norm() / g_norm;
    }
    return out;
}

}  // namespace willmore
