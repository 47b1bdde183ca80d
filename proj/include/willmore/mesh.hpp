#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace willmore {

using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Thrown for invalid meshes, degenerate geometry and topology queries on
/// meshes that do not satisfy their preconditions.
class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Execution policy for the data-parallel kernels. `serial` selects the
/// straightforward reference loops, `parallel` the OpenMP versions.
enum class Exec { serial, parallel };

/// Whether boundary edges are an error. Closed surfaces are the default;
/// open patches (flat grids, caps) are accepted only when asked for.
enum class Boundary { forbidden, allowed };

enum class ViolationKind {
    non_finite_position,
    index_out_of_range,
    repeated_vertex,
    degenerate_face,
    boundary_edge,
    non_manifold_edge,
    inconsistent_orientation,
    non_manifold_vertex,
    isolated_vertex,
    disconnected,
    invalid_euler_characteristic,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    long index;  // offending vertex, face or edge (first vertex) index; -1 for global
    std::string detail;
};

class ValidationReport {
public:
    void add(ViolationKind kind, long index, std::string detail = {});

    bool empty() const { return entries_.empty(); }
    std::size_t count(ViolationKind kind) const;
    const std::vector<Violation>& entries() const { return entries_; }

    /// One line per violation kind, e.g. "boundary edges: 3".
    std::string summary() const;

private:
    std::vector<Violation> entries_;
};

/// Checks arbitrary vertex/face arrays against the mesh invariants. Never
/// throws; every problem becomes a report entry.
ValidationReport validate(std::span<const Vec3> vertices, std::span<const Face> faces,
                          Boundary boundary = Boundary::forbidden);

/// Immutable connectivity shared between meshes with the same faces.
/// Halfedge `3*f + k` runs from faces[f][k] to faces[f][(k+1)%3].
struct Topology {
    std::vector<Face> faces;
    std::vector<int> twin;           // -1 on boundary halfedges
    std::vector<int> corner_offset;  // CSR: vertex -> corners (3*f + k)
    std::vector<int> corners;
    std::vector<std::array<int, 2>> edges;  // unique undirected edges, sorted pairs
    int num_vertices = 0;
    int num_boundary_edges = 0;
};

class Mesh {
public:
    /// Builds the halfedge structure; throws MeshError carrying the
    /// validation summary when the arrays violate an invariant.
    Mesh(std::vector<Vec3> vertices, std::vector<Face> faces,
         Boundary boundary = Boundary::forbidden);

    /// Same connectivity, new positions. Only size and finiteness are
    /// checked; geometric degeneracy surfaces in the operators.
    Mesh with_positions(std::vector<Vec3> positions) const;

    const std::vector<Vec3>& positions() const { return positions_; }
    const Vec3& position(int v) const { return positions_[static_cast<std::size_t>(v)]; }
    const std::vector<Face>& faces() const { return topology_->faces; }
    const Topology& topology() const { return *topology_; }

    int num_vertices() const { return topology_->num_vertices; }
    int num_faces() const { return static_cast<int>(topology_->faces.size()); }
    int num_edges() const { return static_cast<int>(topology_->edges.size()); }
    bool closed() const { return topology_->num_boundary_edges == 0; }

    int twin(int h) const { return topology_->twin[static_cast<std::size_t>(h)]; }
    static int face_of(int h) { return h / 3; }
    static int next(int h) { return 3 * (h / 3) + (h % 3 + 1) % 3; }
    static int prev(int h) { return 3 * (h / 3) + (h % 3 + 2) % 3; }
    int from(int h) const { return faces()[static_cast<std::size_t>(h / 3)][static_cast<std::size_t>(h % 3)]; }
    int to(int h) const { return from(next(h)); }

    std::span<const int> vertex_corners(int v) const;
    std::vector<int> vertex_neighbors(int v) const;

    int euler_characteristic() const;
    double bbox_diagonal() const;
    Vec3 centroid() const;

private:
    Mesh(std::vector<Vec3> positions, std::shared_ptr<const Topology> topology);

    std::vector<Vec3> positions_;
    std::shared_ptr<const Topology> topology_;
};

struct EulerGenus {
    int chi;
    int genus;
};

/// chi = V - E + F and genus = (2 - chi)/2 of a closed mesh.
EulerGenus euler_genus(const Mesh& mesh);

/// Max pairwise vertex distance. Exact at every size: brute force up to
/// 20000 vertices, branch-and-bound over a point k-d tree above that.
double diameter(const Mesh& mesh, Exec exec = Exec::parallel);
double diameter_brute_force(std::span<const Vec3> points, Exec exec = Exec::parallel);

/// Face subset of a parent mesh with its induced boundary loops.
class SubMesh {
public:
    /// Throws MeshError if the faces are not edge-connected or the boundary
    /// loops are not disjoint simple cycles.
    SubMesh(const Mesh& parent, std::vector<int> faces);

    const Mesh& parent() const { return parent_; }
    const std::vector<int>& faces() const { return faces_; }
    const std::vector<std::vector<int>>& boundary_loops() const { return loops_; }
    bool has_boundary() const { return !loops_.empty(); }
    double boundary_length() const;

private:
    Mesh parent_;
    std::vector<int> faces_;
    std::vector<std::vector<int>> loops_;
};

}  // namespace willmore
