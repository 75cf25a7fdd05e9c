#pragma once

#include <cstdint>
#include <vector>

#include "degctrl/geometry.hpp"
#include "degctrl/mesh.hpp"

namespace degctrl {

enum class RegionCase : std::uint8_t { Interior, Offcenter };

/// Element-level decomposition of the domain around the degeneracy point.
/// omega is the inner control core, omega0 the full control region; eps is
/// the radius of the excluded neighborhood of the origin. Membership is by
/// element barycenter. Immutable after construction.
struct RegionTags {
    std::vector<int> omega_elems;
    std::vector<int> omega0_elems;
    double eps = 0.0;
    double eps0 = 0.0;
    RegionCase region_case = RegionCase::Interior;

    RegionSpec omega_spec{BallSpec{{0, 0}, 0}};
    RegionSpec omega0_spec{BallSpec{{0, 0}, 0}};

    std::vector<std::uint8_t> element_mask;  // bit 0: omega0, bit 1: omega

    bool in_omega0(int t) const { return element_mask[t] & 1; }
    bool in_omega(int t) const { return element_mask[t] & 2; }
};

/// Tags elements by barycenter and validates the geometric case invariants:
///   interior:  every triangle meeting the ball of radius 6*eps lies in omega0;
///   offcenter: no omega triangle meets the ball of radius 2*eps.
/// Also requires omega ⊂ omega0 elementwise and eps in (0, eps0/9) with
/// eps0 below the origin-to-boundary distance.
/// Throws CaseViolation / NestingViolation / ValidationError on rejection.
RegionTags tag_regions(const Mesh& mesh, const RegionSpec& omega_spec,
                       const RegionSpec& omega0_spec, double eps, double eps0,
                       RegionCase region_case);

/// Re-validates tags against a mesh (used after refinement or import).
void check_region_tags(const Mesh& mesh, const RegionTags& tags);

/// Rebuilds tags from a stored element bitmask (mesh import path).
RegionTags tags_from_masks(const Mesh& mesh, const std::vector<std::uint8_t>& masks,
                           double eps, double eps0, RegionCase region_case,
                           const RegionSpec& omega_spec, const RegionSpec& omega0_spec);

}  // namespace degctrl
