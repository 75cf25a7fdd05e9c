#include "degctrl/regions.hpp"

#include <limits>
#include <string>

#include "degctrl/errors.hpp"

namespace degctrl {

namespace {

double origin_boundary_distance(const Mesh& mesh) {
    double d = std::numeric_limits<double>::max();
    for (const auto& be : mesh.boundary_edges)
        d = std::min(d, point_segment_distance({0, 0}, mesh.vertices[be.a], mesh.vertices[be.b]));
    return d;
}

void validate_case(const Mesh& mesh, const RegionTags& tags) {
    if (tags.region_case == RegionCase::Interior) {
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            if (mesh.distance_to_origin(t) < 6.0 * tags.eps && !tags.in_omega0(t)) {
                throw CaseViolation(
                    "tag_regions: triangle " + std::to_string(t) +
                    " meets the 6*eps ball but is not in omega0 (interior case needs "
                    "Omega_{6eps} inside omega0)");
            }
        }
    } else {
        for (int t : tags.omega_elems) {
            if (mesh.distance_to_origin(t) < 2.0 * tags.eps) {
                throw CaseViolation(
                    "tag_regions: omega triangle " + std::to_string(t) +
                    " meets the 2*eps ball (offcenter case needs Omega_{2eps} disjoint "
                    "from closure of omega)");
            }
        }
    }
}

}  // namespace

RegionTags tag_regions(const Mesh& mesh, const RegionSpec& omega_spec,
                       const RegionSpec& omega0_spec, double eps, double eps0,
                       RegionCase region_case) {
    const double d0 = origin_boundary_distance(mesh);
    if (!(eps0 > 0.0 && eps0 < d0))
        throw ValidationError("tag_regions: eps0 must lie in (0, distance from origin to boundary)");
    if (!(eps > 0.0 && eps < eps0 / 9.0))
        throw ValidationError("tag_regions: eps must lie in (0, eps0/9)");

    RegionTags tags;
    tags.eps = eps;
    tags.eps0 = eps0;
    tags.region_case = region_case;
    tags.omega_spec = omega_spec;
    tags.omega0_spec = omega0_spec;
    tags.element_mask.assign(mesh.num_triangles(), 0);

    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Vec2 bc = mesh.barycenter(t);
        const bool in0 = region_contains(omega0_spec, bc);
        const bool in = region_contains(omega_spec, bc);
        if (in && !in0)
            throw NestingViolation("tag_regions: omega element " + std::to_string(t) +
                                   " outside omega0 (closure of omega must lie in omega0)");
        if (in0) {
            tags.element_mask[t] |= 1;
            tags.omega0_elems.push_back(t);
        }
        if (in) {
            tags.element_mask[t] |= 2;
            tags.omega_elems.push_back(t);
        }
    }
    if (tags.omega0_elems.empty()) throw ValidationError("tag_regions: omega0 captured no elements");
    if (tags.omega_elems.empty()) throw ValidationError("tag_regions: omega captured no elements");

    validate_case(mesh, tags);
    return tags;
}

void check_region_tags(const Mesh& mesh, const RegionTags& tags) {
    if (static_cast<int>(tags.element_mask.size()) != mesh.num_triangles())
        throw ValidationError("check_region_tags: mask size mismatch");
    for (int t : tags.omega_elems)
        if (!tags.in_omega0(t)) throw NestingViolation("check_region_tags: omega not inside omega0");
    validate_case(mesh, tags);
}

RegionTags tags_from_masks(const Mesh& mesh, const std::vector<std::uint8_t>& masks,
                           double eps, double eps0, RegionCase region_case,
                           const RegionSpec& omega_spec, const RegionSpec& omega0_spec) {
    if (static_cast<int>(masks.size()) != mesh.num_triangles())
        throw ValidationError("tags_from_masks: mask size mismatch");
    RegionTags tags;
    tags.eps = eps;
    tags.eps0 = eps0;
    tags.region_case = region_case;
    tags.omega_spec = omega_spec;
    tags.omega0_spec = omega0_spec;
    tags.element_mask = masks;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        if (masks[t] & 1) tags.omega0_elems.push_back(t);
        if (masks[t] & 2) tags.omega_elems.push_back(t);
    }
    check_region_tags(mesh, tags);
    return tags;
}

}  // namespace degctrl
