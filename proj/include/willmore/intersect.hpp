#pragma once

#include "willmore/mesh.hpp"

#include <optional>
#include <utility>

namespace willmore {

struct IntersectionResult {
    bool intersects = false;
    /// Smallest (i, j) face pair, i < j, found intersecting.
    std::optional<std::pair<int, int>> witness;
};

/// Triangle-triangle overlap test (interval test on the line of plane
/// intersection, 2D edge/containment test for coplanar pairs). `eps` is an
/// absolute distance tolerance; callers pass unit-normalised coordinates.
bool triangles_intersect(const Vec3& a0, const Vec3& a1, const Vec3& a2,
                         const Vec3& b0, const Vec3& b1, const Vec3& b2, double eps = 1e-12);

/// True iff two faces that share no vertex intersect. Uses a bounding-volume
/// hierarchy over face boxes; coordinates are centred and scaled by the
/// bounding-box diagonal before testing.
IntersectionResult self_intersects(const Mesh& mesh, Exec exec = Exec::parallel);

/// All-pairs reference used by the tests.
IntersectionResult self_intersects_brute_force(const Mesh& mesh);

}  // namespace willmore
