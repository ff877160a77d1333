#include "frontal/integrate.hpp"
#include "frontal/parallel.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace frontal;
using testing_support::kPi;

namespace {

CurvatureReport tau_of(const FrontalScene& s, double tol = 1e-6) {
    IntegrationOptions opt;
    opt.tol = tol;
    return total_absolute_curvature(s, detect_singular_set(s), opt);
}

// f_k is a graph of revolution over both hemispheres; its Gauss map turns to
// the angle atan(max |h'|) = atan(3k/2) and back on each, so
// int |K| dA = 8 pi (1 - cos atan(3k/2)).
double fk_regular_oracle(double k) { return 4.0 * (1.0 - 1.0 / std::sqrt(1.0 + 2.25 * k * k)); }

} // namespace

TEST(Quadrature, Gk15IsExactOnPolynomials) {
    const auto r = gk15([](double x) { return std::pow(x, 20); }, 0.0, 1.0);
    EXPECT_NEAR(r.value, 1.0 / 21.0, 1e-15);
    EXPECT_EQ(r.evaluations, 15);
    // the embedded Gauss rule is exact to degree 13, so the estimate vanishes there
    const auto q = gk15([](double x) { return std::pow(x, 13); }, 0.0, 1.0);
    EXPECT_NEAR(q.value, 1.0 / 14.0, 1e-15);
    EXPECT_LT(q.error, 1e-14);
}

TEST(Quadrature, Adaptive1d) {
    EXPECT_NEAR(integrate_1d([](double x) { return std::sin(x); }, 0.0, kPi, 1e-12).value, 2.0, 1e-13);
    const auto r = integrate_1d([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-10);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 2.0 / 3.0, 1e-10);
    EXPECT_GT(r.pieces, 1);
    EXPECT_NEAR(integrate_1d([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, 1e-12).value,
                0.045 + 0.245, 1e-12);
}

TEST(Quadrature, Adaptive2d) {
    CubatureOptions opt;
    opt.abs_tol = 1e-10;
    const auto e = integrate_2d([](double x, double y) { return std::exp(x + y); }, {0, 1}, {0, 1}, opt);
    EXPECT_NEAR(e.value, (std::exp(1.0) - 1) * (std::exp(1.0) - 1), 1e-10);
    opt.abs_tol = 1e-7;
    const auto k = integrate_2d([](double x, double y) { return std::abs(x - y); }, {0, 1}, {0, 1}, opt);
    EXPECT_TRUE(k.converged);
    EXPECT_NEAR(k.value, 1.0 / 3.0, 1e-7);
}

TEST(Quadrature, PairwiseSum) {
    std::vector<double> v(1000);
    std::iota(v.begin(), v.end(), 1.0);
    EXPECT_DOUBLE_EQ(pairwise_sum(v.data(), v.size()), 500500.0);
    EXPECT_EQ(pairwise_sum(v.data(), 0), 0.0);
}

TEST(FkReference, ClosedForm) {
    // the printed integral reduces to 6k / sqrt(1 + k^2/4) after s = sin t
    for (double k : {0.1, 0.5, 2.0 / 3.0, 1.0, 3.0})
        EXPECT_NEAR(example_fk_reference(k), 6 * k / std::sqrt(1 + k * k / 4), 1e-10) << k;
    EXPECT_NEAR(example_fk_reference(2.0 / 3.0), 12.0 / std::sqrt(10.0), 1e-10);
    // n = 1: (6 / pi) int_{-1}^{1} k / (1 + k^2 s^2 / 4) ds = (24 / pi) atan(k / 2)
    EXPECT_NEAR(example_fk_reference(0.8, 1), 24 / kPi * std::atan(0.4), 1e-10);
}

TEST(FkReference, BoundsAndLimit) {
    for (double k : {0.01, 0.3, 2.0 / 3.0, 2.0, 10.0}) {
        EXPECT_LT(example_fk_reference(k), 6 * k);
        EXPECT_GT(example_fk_reference(k), 0.0);
    }
    EXPECT_LT(example_fk_reference(1e-6), 1e-5);
}

TEST(TauCurve, Examples) {
    struct Case {
        const char* name;
        double regular;
        int count;
    };
    for (const Case c : {Case{"unit_circle", 2.0, 0}, Case{"ellipse", 2.0, 0}, Case{"segment", 0.0, 2},
                         Case{"astroid", 2.0, 4}}) {
        const auto s = load_catalog_scene(c.name);
        const auto r = tau_curve(s, detect_singular_points_curve(s));
        EXPECT_NEAR(r.regular_part, c.regular, 1e-9) << c.name;
        EXPECT_EQ(r.singular_point_count, c.count) << c.name;
        EXPECT_DOUBLE_EQ(r.singular_part, c.count) << c.name;
        EXPECT_DOUBLE_EQ(r.tau, r.regular_part + r.singular_part) << c.name;
        EXPECT_EQ(r.dim, 1);
    }
}

TEST(TauCurve, TurnDensityMatchesCurvatureOnArcs) {
    for (const char* name : {"unit_circle", "ellipse", "astroid"}) {
        const auto s = load_catalog_scene(name);
        const auto sigma = detect_singular_points_curve(s);
        EXPECT_NEAR(curvature_integral_regular_arcs(s, sigma), tau_curve(s, sigma).regular_part, 1e-8) << name;
    }
}

TEST(TauSurface, FlatDisk) {
    const auto r = tau_of(load_catalog_scene("flat_disk"));
    EXPECT_NEAR(r.regular_part, 0.0, 1e-9);
    EXPECT_NEAR(r.singular_part, 2.0, 1e-6);
    ASSERT_EQ(r.curve_length.size(), 1u);
    EXPECT_NEAR(r.curve_length[0], 2 * kPi, 1e-8);
    EXPECT_FALSE(r.second_kind_encountered);
}

TEST(TauSurface, RoundSphereAndTorus) {
    const auto sphere = tau_of(load_catalog_scene("round_sphere"));
    EXPECT_NEAR(sphere.regular_part, 2.0, 1e-6);
    EXPECT_EQ(sphere.singular_part, 0.0);
    const auto torus = tau_of(load_catalog_scene("torus"));
    EXPECT_NEAR(torus.tau, 4.0, 1e-5);
    const auto fat = tau_of(load_catalog_scene("torus", {{"R", 3.0}, {"rho", 2.5}}));
    EXPECT_NEAR(fat.tau, 4.0, 1e-5);
}

TEST(TauSurface, FkAgainstGaussMapOracle) {
    for (double k : {2.0 / 3.0, 0.25, 1.5}) {
        const auto r = tau_of(load_catalog_scene("fk", {{"k", k}}));
        EXPECT_NEAR(r.regular_part, fk_regular_oracle(k), 1e-5) << k;
        EXPECT_NEAR(r.singular_part, 2.0, 1e-6) << k;
        EXPECT_LE(std::abs(r.regular_part - fk_regular_oracle(k)), std::max(r.regular_error, 1e-6) * 10);
    }
}

TEST(TauSurface, SwallowtailIsRejectedWithoutOverride) {
    const std::string text = "id = swallowtail\n"
                             "dim = 2\n"
                             "ambient = 3\n"
                             "domain = germ-window\n"
                             "[chart.w]\n"
                             "vars = u, v\n"
                             "box = (-1, 1), (-1, 1)\n"
                             "let q = sqrt(1 + u^2 + u^4)\n"
                             "f = (3*u^4 + u^2*v, 4*u^3 + 2*u*v, v)\n"
                             "normal_frame = (1 / q, -u / q, u^2 / q)\n";
    const auto s = load_scene_text(text);
    const auto set = detect_singular_set(s);
    EXPECT_ANY_THROW(tau_singular_surface(s, set.curves));
    const auto part = tau_singular_surface(s, set.curves, 1e-6, true);
    EXPECT_TRUE(part.second_kind_encountered);
    EXPECT_TRUE(std::isfinite(part.value));
}

TEST(TauProperty, AtLeastTwoOnClosedScenes) {
    for (const auto& e : catalog_entries()) {
        const auto s = load_catalog_scene(e.name);
        if (!s.closed())
            continue;
        EXPECT_GE(tau_of(s).tau, 2.0 - 1e-6) << e.name;
    }
}

TEST(TauProperty, RigidMotionAndScaleInvariance) {
    std::mt19937_64 rng(71);
    const auto fk = load_catalog_scene("fk");
    const double base = tau_of(fk).tau;
    const Eigen::MatrixXd R = testing_support::random_rotation(3, rng);
    EXPECT_NEAR(tau_of(transformed(fk, R, Eigen::Vector3d(1, 2, -3))).tau, base, 1e-6);
    EXPECT_NEAR(tau_of(transformed(fk, R, Eigen::Vector3d::Zero(), 3.5)).tau, base, 1e-6);
    const auto astroid = load_catalog_scene("astroid");
    const auto moved = transformed(astroid, testing_support::random_rotation(2, rng), Eigen::Vector2d(4, 1), 0.2);
    EXPECT_NEAR(tau_of(moved).tau, 6.0, 1e-9);
}

TEST(TauProperty, TighterToleranceConverges) {
    const auto fk = load_catalog_scene("fk");
    const double exact = 2.0 + fk_regular_oracle(2.0 / 3.0);
    double previous = 1.0;
    for (double tol : {1e-3, 5e-4, 2.5e-4}) {
        const auto r = tau_of(fk, tol);
        const double err = std::abs(r.tau - exact);
        EXPECT_LT(err, tol) << tol;
        EXPECT_LE(r.regular_error, previous);
        previous = r.regular_error;
    }
}

TEST(TauProperty, DeterministicAcrossThreadCounts) {
    const auto fk = load_catalog_scene("fk");
    set_thread_count(1);
    const auto a = tau_of(fk);
    set_thread_count(4);
    const auto b = tau_of(fk);
    const auto c = tau_of(fk);
    set_thread_count(0);
    EXPECT_EQ(a.tau, b.tau);
    EXPECT_EQ(b.tau, c.tau);
    EXPECT_EQ(a.regular_error, b.regular_error);
    EXPECT_EQ(a.evaluations, b.evaluations);
}
