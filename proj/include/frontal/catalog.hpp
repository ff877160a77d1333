#pragma once

#include "frontal/scene.hpp"
#include "frontal/scene_file.hpp"

#include <string>
#include <vector>

namespace frontal {

struct ExpectedValue {
    /// "tau", "regular_part", "singular_part", "sigma_length", "singular_points"
    /// or "sigma_curves".
    std::string quantity;
    double value = 0.0;
    double tolerance = 0.0;
    std::string note;
};

struct CatalogEntry {
    std::string name;
    std::string description;
    /// Default parameter values; overridable when loading.
    ParameterMap parameters;
};

const std::vector<CatalogEntry>& catalog_entries();
bool is_catalog_name(const std::string& name);

/// Scene text of a built-in, in the scene file format.
std::string catalog_text(const std::string& name);

/// Expected values for the given parameters (defaults filled in).
std::vector<ExpectedValue> catalog_expected(const std::string& name, const ParameterMap& overrides = {});

FrontalScene load_catalog_scene(const std::string& name, const ParameterMap& overrides = {});

/// Chart sections covering the unit sphere S^2 by six cube faces with
/// equiangular coordinates; each binds x1, x2, x3 to the point of the sphere.
std::string cube_sphere_charts();

} // namespace frontal
