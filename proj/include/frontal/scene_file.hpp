#pragma once

#include "frontal/geometry.hpp"
#include "frontal/scene.hpp"

#include <map>
#include <string>
#include <string_view>

namespace frontal {

using ParameterMap = std::map<std::string, double>;

/**
 * Scene text format, one `key = value` per line, `#` starts a comment:
 *
 *   id = flat_disk
 *   dim = 2
 *   ambient = 3
 *   domain = sphere                # circle | sphere | torus | germ-window | other
 *   betti = 1, 0, 1
 *   orientation_sign = 1
 *   param k = 2/3                  # constant, overridable when loading
 *   let s = sqrt(1 + x1^2)         # named sub-expression
 *   f = (x1, x2, 0)                # default for every chart
 *   normal_frame = (0, 0, 1)       # r vectors separated by ';'
 *
 *   [chart.north]
 *   vars = a, b
 *   box = (-pi/4, pi/4), (-pi/4, pi/4)
 *   periodic = false, false
 *   core = (-pi/4, pi/4), (-pi/4, pi/4)   # defaults to the box
 *   let x1 = ...
 *   tangent = (...)                # curves, instead of normal_frame
 *
 * Top-level `let`, `f`, `normal_frame` and `tangent` may refer to names bound
 * later inside chart sections; they are resolved per chart.
 */
SceneSpec parse_scene(std::string_view text, const ParameterMap& overrides = {});

/// Parses, builds and validates. A validation failure raises SceneError
/// carrying the violation summary.
FrontalScene load_scene_text(std::string_view text, const ParameterMap& overrides = {},
                             int validation_samples = 24);

FrontalScene load_scene_file(const std::string& path, const ParameterMap& overrides = {});

/// A path to a scene file, or the name of a built-in catalog scene.
FrontalScene load_scene(const std::string& path_or_name, const ParameterMap& overrides = {});

/// One-line summary of a failed validation.
std::string describe_validation(const ValidationReport& report);

} // namespace frontal
