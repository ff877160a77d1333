#include "frontal/catalog.hpp"

#include "frontal/errors.hpp"

#include <cmath>
#include <numbers>

namespace frontal {

namespace {

constexpr double kPi = std::numbers::pi;

struct Face {
    const char* id;
    const char* x1;
    const char* x2;
    const char* x3;
};

// (a, b) = (tan al, tan be); every face is positively oriented for the outward normal
constexpr Face kFaces[] = {
    {"pz", "ta", "tb", "1"},  {"nz", "tb", "ta", "-1"}, {"px", "1", "ta", "tb"},
    {"nx", "-1", "tb", "ta"}, {"py", "tb", "1", "ta"},  {"ny", "ta", "-1", "tb"},
};

std::string curve_scene(const std::string& id, const std::string& f, const std::string& e) {
    return "id = " + id +
           "\n"
           "dim = 1\n"
           "ambient = 2\n"
           "domain = circle\n"
           "betti = 1, 1\n"
           "orientation_sign = 1\n"
           "\n"
           "[chart.t]\n"
           "vars = t\n"
           "box = (0, 2*pi)\n"
           "periodic = true\n"
           "f = " + f + "\n"
           "tangent = " + e + "\n";
}

std::string sphere_scene(const std::string& id, const std::string& head, const std::string& f,
                         const std::string& frame) {
    return "id = " + id +
           "\n"
           "dim = 2\n"
           "ambient = 3\n"
           "domain = sphere\n"
           "betti = 1, 0, 1\n"
           "orientation_sign = 1\n" +
           head + "f = " + f + "\nnormal_frame = " + frame + "\n\n" + cube_sphere_charts();
}

double fk_regular(double k) { return 4.0 * (1.0 - 1.0 / std::sqrt(1.0 + 2.25 * k * k)); }

double param(const std::string& name, const ParameterMap& defaults, const ParameterMap& overrides) {
    const auto it = overrides.find(name);
    return it != overrides.end() ? it->second : defaults.at(name);
}

} // namespace

std::string cube_sphere_charts() {
    std::string out;
    for (const auto& face : kFaces) {
        out += std::string("[chart.") + face.id +
               "]\n"
               "vars = al, be\n"
               "box = (-pi/4, pi/4), (-pi/4, pi/4)\n"
               "periodic = false, false\n"
               "let ta = tan(al)\n"
               "let tb = tan(be)\n"
               "let rr = sqrt(1 + ta^2 + tb^2)\n"
               "let x1 = " + face.x1 + " / rr\n" +
               "let x2 = " + face.x2 + " / rr\n" +
               "let x3 = " + face.x3 + " / rr\n\n";
    }
    return out;
}

const std::vector<CatalogEntry>& catalog_entries() {
    static const std::vector<CatalogEntry> entries = {
        {"unit_circle", "unit circle in the plane", {}},
        {"ellipse", "ellipse (2 cos t, sin t)", {}},
        {"segment", "segment frontal (cos t, 0) with constant tangent", {}},
        {"astroid", "astroid (cos^3 t, sin^3 t) with four cusps", {}},
        {"flat_disk", "sphere folded onto the unit disk, f = (x1, x2, 0)", {}},
        {"fk", "f_k = (x1, x2, k x3^3) on the unit sphere", {{"k", 2.0 / 3.0}}},
        {"round_sphere", "unit sphere", {}},
        {"torus", "torus of revolution with radii R > rho", {{"R", 2.0}, {"rho", 1.0}}},
        {"a3_germ", "A_3 germ in R^4 on the window [-1, 1]^3, y-linear variant", {}},
    };
    return entries;
}

bool is_catalog_name(const std::string& name) {
    for (const auto& e : catalog_entries())
        if (e.name == name)
            return true;
    return false;
}

std::string catalog_text(const std::string& name) {
    if (name == "unit_circle")
        return curve_scene(name, "(cos(t), sin(t))", "(-sin(t), cos(t))");
    if (name == "ellipse")
        return curve_scene(name, "(2*cos(t), sin(t))",
                           "(-2*sin(t) / sqrt(4*sin(t)^2 + cos(t)^2), cos(t) / sqrt(4*sin(t)^2 + cos(t)^2))");
    if (name == "segment")
        return curve_scene(name, "(cos(t), 0)", "(-1, 0)");
    if (name == "astroid")
        return curve_scene(name, "(cos(t)^3, sin(t)^3)", "(-cos(t), sin(t))");
    if (name == "flat_disk")
        return sphere_scene(name, "", "(x1, x2, 0)", "(0, 0, 1)");
    if (name == "fk")
        return sphere_scene(name,
                            "param k = 2/3\n"
                            "let w = sqrt(1 + 9*k^2*x3^2*(x1^2 + x2^2))\n",
                            "(x1, x2, k*x3^3)", "(3*k*x3*x1 / w, 3*k*x3*x2 / w, 1 / w)");
    if (name == "round_sphere")
        return sphere_scene(name, "", "(x1, x2, x3)", "(x1, x2, x3)");
    if (name == "torus")
        return "id = torus\n"
               "dim = 2\n"
               "ambient = 3\n"
               "domain = torus\n"
               "betti = 1, 2, 1\n"
               "orientation_sign = 1\n"
               "param R = 2\n"
               "param rho = 1\n"
               "\n"
               "[chart.uv]\n"
               "vars = u, v\n"
               "box = (0, 2*pi), (0, 2*pi)\n"
               "periodic = true, true\n"
               "f = ((R + rho*cos(v))*cos(u), (R + rho*cos(v))*sin(u), rho*sin(v))\n"
               "normal_frame = (cos(v)*cos(u), cos(v)*sin(u), sin(v))\n";
    if (name == "a3_germ")
        return "id = a3_germ\n"
               "dim = 3\n"
               "ambient = 4\n"
               "domain = germ-window\n"
               "orientation_sign = 1\n"
               "\n"
               "[chart.window]\n"
               "vars = t, x, y\n"
               "box = (-1, 1), (-1, 1), (-1, 1)\n"
               "let q = sqrt(1 + t^2 + t^4 + t^6)\n"
               "f = (4*t^5 + t^2*x + 2*t^3*y, 5*t^4 + 2*t*x + 3*t^2*y, x, y)\n"
               "normal_frame = (1 / q, -t / q, t^2 / q, t^3 / q)\n";
    throw SceneError("unknown catalog scene '" + name + "'");
}

std::vector<ExpectedValue> catalog_expected(const std::string& name, const ParameterMap& overrides) {
    const CatalogEntry* entry = nullptr;
    for (const auto& e : catalog_entries())
        if (e.name == name)
            entry = &e;
    if (!entry)
        throw SceneError("unknown catalog scene '" + name + "'");
    if (name == "unit_circle")
        return {{"tau", 2.0, 1e-9, "convex closed curve"},
                {"regular_part", 2.0, 1e-9, "total turning 2 pi"},
                {"singular_points", 0.0, 0.0, "immersion"}};
    if (name == "ellipse")
        return {{"tau", 2.0, 1e-8, "convex closed curve"},
                {"regular_part", 2.0, 1e-8, "total turning 2 pi"},
                {"singular_points", 0.0, 0.0, "immersion"}};
    if (name == "segment")
        return {{"tau", 2.0, 1e-12, "segment: constant tangent plus two endpoints"},
                {"regular_part", 0.0, 1e-12, "constant tangent field"},
                {"singular_points", 2.0, 0.0, "t = 0 and t = pi"}};
    if (name == "astroid")
        return {{"tau", 6.0, 1e-6, "one full turn of e plus four cusps"},
                {"regular_part", 2.0, 1e-6, "|e'| = 1"},
                {"singular_points", 4.0, 0.0, "cusps at t = k pi / 2"}};
    if (name == "flat_disk")
        return {{"tau", 2.0, 1e-6, "equality case: convex planar image bounded by f(Sigma)"},
                {"regular_part", 0.0, 1e-9, "the Gauss map is constant"},
                {"singular_part", 2.0, 1e-6, "unit circle, curvature 1"},
                {"sigma_length", 2.0 * kPi, 1e-6, "image of Sigma is the unit circle"},
                {"sigma_curves", 1.0, 0.0, "the equator"}};
    if (name == "fk") {
        const double k = param("k", entry->parameters, overrides);
        const double g = fk_regular(k);
        return {{"tau", 2.0 + g, 1e-5, "Gauss map of each hemisphere folds twice over a polar cap"},
                {"regular_part", g, 1e-5, "4 (1 - 1/sqrt(1 + 9 k^2 / 4))"},
                {"singular_part", 2.0, 1e-6, "unit circle at the equator"},
                {"sigma_length", 2.0 * kPi, 1e-6, "image of the equator is the unit circle"},
                {"sigma_curves", 1.0, 0.0, "the equator"}};
    }
    if (name == "round_sphere")
        return {{"tau", 2.0, 1e-6, "Gauss map is the identity"},
                {"regular_part", 2.0, 1e-6, "area 4 pi over 2 pi"},
                {"singular_part", 0.0, 0.0, "immersion"},
                {"sigma_curves", 0.0, 0.0, "immersion"}};
    if (name == "torus")
        return {{"tau", 4.0, 1e-4, "tight torus, equal to the Betti sum"},
                {"regular_part", 4.0, 1e-4, "int |K| dA = 8 pi"},
                {"singular_part", 0.0, 0.0, "immersion"},
                {"sigma_curves", 0.0, 0.0, "immersion"}};
    return {};
}

FrontalScene load_catalog_scene(const std::string& name, const ParameterMap& overrides) {
    return load_scene_text(catalog_text(name), overrides);
}

} // namespace frontal
