#include "frontal/errors.hpp"
#include "frontal/singular.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <Eigen/SVD>

#include <algorithm>

using namespace frontal;
using testing_support::kPi;

namespace {

std::string swallowtail_text() {
    return "id = swallowtail\n"
           "dim = 2\n"
           "ambient = 3\n"
           "domain = germ-window\n"
           "[chart.w]\n"
           "vars = u, v\n"
           "box = (-1, 1), (-1, 1)\n"
           "let q = sqrt(1 + u^2 + u^4)\n"
           "f = (3*u^4 + u^2*v, 4*u^3 + 2*u*v, v)\n"
           "normal_frame = (1 / q, -u / q, u^2 / q)\n";
}

// lambda = sin(t)^3 vanishes to third order at 0 and pi
std::string flat_cusp_text() {
    return "id = flat_cusp\n"
           "dim = 1\n"
           "ambient = 2\n"
           "domain = circle\n"
           "[chart.t]\n"
           "vars = t\n"
           "box = (0, 2*pi)\n"
           "periodic = true\n"
           "f = (cos(t)^3 / 3 - cos(t), 0)\n"
           "tangent = (1, 0)\n";
}

std::vector<double> sorted_params(const std::vector<SingularPoint>& pts) {
    std::vector<double> t;
    for (const auto& p : pts)
        t.push_back(p.coords[0]);
    std::sort(t.begin(), t.end());
    return t;
}

double closed_length(const SingularCurve& c) {
    return c.arc_length.back() + (c.vertices.back().image - c.vertices.front().image).norm();
}

// germ: Sigma is x = -10 t^3 - 3 t y, the null direction is d/dt, and the
// second-kind locus is y = -10 t^2
std::vector<double> germ_sigma(double t, double y) { return {t, -10 * t * t * t - 3 * t * y, y}; }

} // namespace

TEST(CurvePoints, Segment) {
    const auto s = load_catalog_scene("segment");
    const auto pts = detect_singular_points_curve(s);
    ASSERT_EQ(pts.size(), 2u);
    const auto t = sorted_params(pts);
    EXPECT_NEAR(t[0], 0.0, 1e-10);
    EXPECT_NEAR(t[1], kPi, 1e-10);
    for (const auto& p : pts) {
        EXPECT_LT(std::abs(p.lambda), 1e-12);
        EXPECT_EQ(p.kind, PointKind::First);
        EXPECT_TRUE(p.cusp);
        ASSERT_TRUE(p.ak.has_value());
        EXPECT_EQ(*p.ak, 1);
    }
}

TEST(CurvePoints, Astroid) {
    const auto s = load_catalog_scene("astroid");
    const auto t = sorted_params(detect_singular_points_curve(s));
    ASSERT_EQ(t.size(), 4u);
    for (int i = 0; i < 4; ++i)
        EXPECT_NEAR(t[static_cast<std::size_t>(i)], i * kPi / 2, 1e-10);
}

TEST(CurvePoints, CircleAndEllipseHaveNone) {
    EXPECT_TRUE(detect_singular_points_curve(load_catalog_scene("unit_circle")).empty());
    EXPECT_TRUE(detect_singular_points_curve(load_catalog_scene("ellipse")).empty());
}

TEST(CurvePoints, DegenerateRootIsNotAdmissible) {
    const auto s = load_scene_text(flat_cusp_text());
    const auto set = detect_singular_set(s);
    bool degenerate = false;
    for (const auto& p : set.points)
        degenerate = degenerate || p.kind == PointKind::Degenerate;
    EXPECT_TRUE(degenerate);
    EXPECT_EQ(admissibility_check(s, set).verdict, Verdict::NotAdmissible);
}

TEST(SingularCurves, FlatDiskEquator) {
    const auto s = load_catalog_scene("flat_disk");
    const auto curves = detect_singular_curves(s);
    ASSERT_EQ(curves.size(), 1u);
    const auto& c = curves[0];
    EXPECT_TRUE(c.closed);
    EXPECT_NEAR(closed_length(c), 2 * kPi, 1e-3);
    for (const auto& v : c.vertices) {
        EXPECT_LT(std::abs(v.lambda), 1e-10);
        EXPECT_NEAR(v.image.norm(), 1.0, 1e-9);
        EXPECT_EQ(v.kind, PointKind::First);
        ASSERT_TRUE(v.ak.has_value());
        EXPECT_EQ(*v.ak, 1);
    }
}

TEST(SingularCurves, FkEquator) {
    const auto s = load_catalog_scene("fk");
    const auto curves = detect_singular_curves(s);
    ASSERT_EQ(curves.size(), 1u);
    EXPECT_TRUE(curves[0].closed);
    EXPECT_NEAR(closed_length(curves[0]), 2 * kPi, 1e-3);
    for (const auto& v : curves[0].vertices)
        EXPECT_NEAR(v.image[2], 0.0, 1e-9);
}

TEST(SingularCurves, RegularSurfacesHaveNone) {
    EXPECT_TRUE(detect_singular_curves(load_catalog_scene("round_sphere")).empty());
    EXPECT_TRUE(detect_singular_curves(load_catalog_scene("torus")).empty());
}

TEST(SingularCurves, SwallowtailHasOneSecondKindPoint) {
    const auto s = load_scene_text(swallowtail_text());
    const auto set = detect_singular_set(s);
    ASSERT_EQ(set.curves.size(), 1u);
    EXPECT_FALSE(set.curves[0].closed);
    for (const auto& v : set.curves[0].vertices)
        EXPECT_NEAR(v.coords[1], -6 * v.coords[0] * v.coords[0], 1e-9);
    ASSERT_EQ(set.second_kind.size(), 1u);
    const auto& p = set.second_kind[0];
    EXPECT_NEAR(p.coords[0], 0.0, 1e-8);
    EXPECT_NEAR(p.coords[1], 0.0, 1e-8);
    EXPECT_EQ(p.kind, PointKind::Second);
    ASSERT_TRUE(p.ak.has_value());
    EXPECT_EQ(*p.ak, 2);
    EXPECT_EQ(admissibility_check(s, set).verdict, Verdict::Admissible);
}

TEST(SingularCurves, SecondKindIffImageVelocityVanishes) {
    // along the swallowtail cuspidal edge, df(c') vanishes exactly where eta is tangent to Sigma
    const auto s = load_scene_text(swallowtail_text());
    for (double u0 : {-0.3, -0.1, -0.02, 0.0, 0.05, 0.2}) {
        const double a[2] = {u0 - 1e-3, -6 * (u0 - 1e-3) * (u0 - 1e-3)};
        const double b[2] = {u0 + 1e-3, -6 * (u0 + 1e-3) * (u0 + 1e-3)};
        const auto smp = sigma_sample(s, 0, a, b, 0.5, 2);
        const double speed = smp.image_d1.norm() / smp.du.norm();
        const auto p = analyze_point(s, 0, smp.u);
        if (std::abs(u0) > 0.01) {
            EXPECT_EQ(p.kind, PointKind::First) << u0;
            EXPECT_GT(speed, 1e-4);
        } else if (u0 == 0.0) {
            EXPECT_EQ(p.kind, PointKind::Second);
            EXPECT_LT(speed, 1e-9);
        }
    }
}

TEST(NullDirection, KernelOfDifferential) {
    const auto s = load_catalog_scene("a3_germ");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-0.5, 0.5);
    for (int i = 0; i < 20; ++i) {
        const auto u = germ_sigma(d(rng), d(rng));
        if (std::abs(u[1]) > 1)
            continue;
        const auto pe = s.evaluate(0, u, 2);
        const auto nd = null_direction(s, pe);
        EXPECT_NEAR(std::abs(nd.eta[0]), 1.0, 1e-9);
        EXPECT_NEAR((differential_matrix(pe) * nd.eta).norm(), 0.0, 1e-9);
        EXPECT_FALSE(nd.ambiguous);
        EXPECT_GE(nd.eta.dot(signed_volume_density(s, pe).gradient), 0.0);
    }
    const auto disk = load_scene_text(testing_support::latlong_disk_text());
    const double u[2] = {0.4, 0.0};
    const auto nd = null_direction(disk, disk.evaluate(0, u, 2));
    EXPECT_NEAR(nd.eta[0], 0.0, 1e-12);
    EXPECT_NEAR(nd.eta[1], 1.0, 1e-12);
}

TEST(Kind, GermFirstAndSecond) {
    const auto s = load_catalog_scene("a3_germ");
    const auto first = analyze_point(s, 0, germ_sigma(0.3, 0.1));
    EXPECT_EQ(first.kind, PointKind::First);
    ASSERT_TRUE(first.ak.has_value());
    EXPECT_EQ(*first.ak, 1);
    const auto second = analyze_point(s, 0, germ_sigma(0.3, -0.9));
    EXPECT_EQ(second.kind, PointKind::Second);
    ASSERT_TRUE(second.ak.has_value());
    EXPECT_EQ(*second.ak, 2);
    EXPECT_FALSE(second.ak_inconclusive);
    EXPECT_EQ(ak_classify(s, second, 2).jacobian_rank, 2);
}

TEST(Kind, RatioMatchesClosedForm) {
    // lambda = D (20 t^3 + 2 x + 6 t y) with D > 0, so on Sigma
    // eta . grad lambda / |grad lambda| = |60 t^2 + 6 y| / |(60 t^2 + 6 y, 2, 6 t)|
    const auto s = load_catalog_scene("a3_germ");
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> d(-0.6, 0.6);
    for (int i = 0; i < 40; ++i) {
        const double t = d(rng), y = d(rng);
        const auto u = germ_sigma(t, y);
        if (std::abs(u[1]) > 1)
            continue;
        const auto p = analyze_point(s, 0, u);
        const double a = 60 * t * t + 6 * y;
        EXPECT_NEAR(p.kind_ratio, std::abs(a) / std::sqrt(a * a + 4 + 36 * t * t), 1e-9);
        EXPECT_EQ(p.kind == PointKind::Second, p.kind_ratio < kKindThreshold);
    }
}

TEST(Kind, StableUnderReparametrization) {
    const auto s = load_catalog_scene("a3_germ");
    Eigen::Matrix3d A;
    A << 0.0, 0.5, 0.0, -2.0, 0.0, 0.0, 0.0, 0.0, 0.7;
    const Eigen::Vector3d b(0.05, -0.02, 0.01);
    const auto r = reparametrized(s, A, b);
    for (const auto& [t, y] : std::vector<std::pair<double, double>>{{0.3, 0.1}, {0.3, -0.9}, {-0.2, 0.4}, {0.25, -0.625}}) {
        const auto u = germ_sigma(t, y);
        const Eigen::Vector3d v = A.inverse() * (Eigen::Vector3d(u[0], u[1], u[2]) - b);
        const auto p = analyze_point(s, 0, u);
        const auto q = analyze_point(r, 0, std::vector<double>{v[0], v[1], v[2]});
        EXPECT_EQ(p.kind, q.kind);
        EXPECT_EQ(p.ak, q.ak);
        EXPECT_NEAR((p.image - q.image).norm(), 0.0, 1e-12);
    }
}

TEST(Kind, FiniteDifferenceRankOracle) {
    const auto s = load_catalog_scene("a3_germ");
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> d(-0.6, 0.6);
    auto pos = [&](const std::vector<double>& u) { return s.position(0, u); };
    auto frame = [&](const std::vector<double>& u) {
        const auto pe = s.evaluate(0, u, 0);
        Eigen::Vector4d e;
        for (int k = 0; k < 4; ++k)
            e[k] = pe.frame[0][static_cast<std::size_t>(k)].value();
        return e;
    };
    auto fd_lambda = [&](const std::vector<double>& u) {
        Eigen::Matrix4d m;
        for (int a = 0; a < 3; ++a)
            m.col(a) = testing_support::central_difference(pos, u, a, 1e-5);
        m.col(3) = frame(u);
        return m.determinant();
    };
    int seconds = 0;
    for (int i = 0; i < 60; ++i) {
        const double t = d(rng);
        const double y = i % 3 == 0 ? -10 * t * t : d(rng);
        const auto u = germ_sigma(t, y);
        if (std::abs(u[1]) > 1 || std::abs(y) > 1)
            continue;
        Eigen::Matrix<double, 4, 3> df;
        for (int a = 0; a < 3; ++a)
            df.col(a) = testing_support::central_difference(pos, u, a, 1e-5);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(df, Eigen::ComputeFullV);
        const auto sv = svd.singularValues();
        const int rank = (sv.array() > 1e-6 * sv[0]).count();
        EXPECT_EQ(rank, 2);
        const Eigen::Vector3d eta = svd.matrixV().col(2);
        Eigen::Vector3d grad;
        for (int a = 0; a < 3; ++a) {
            auto up = u, dn = u;
            up[static_cast<std::size_t>(a)] += 1e-4;
            dn[static_cast<std::size_t>(a)] -= 1e-4;
            grad[a] = (fd_lambda(up) - fd_lambda(dn)) / 2e-4;
        }
        const double ratio = std::abs(eta.dot(grad)) / grad.norm();
        const auto p = analyze_point(s, 0, u);
        EXPECT_TRUE(p.rank_ok);
        EXPECT_NEAR(p.kind_ratio, ratio, 1e-4);
        const bool fd_second = ratio < 1e-4;
        EXPECT_EQ(p.kind == PointKind::Second, fd_second) << t << " " << y;
        seconds += fd_second;
    }
    EXPECT_GT(seconds, 5);
}

TEST(Ak, DiskAndGerm) {
    const auto disk = load_scene_text(testing_support::latlong_disk_text());
    const auto p = analyze_point(disk, 0, std::vector<double>{1.0, 0.0});
    const auto ak = ak_classify(disk, p, 2);
    ASSERT_TRUE(ak.k.has_value());
    EXPECT_EQ(*ak.k, 1);
    EXPECT_NEAR(std::abs(ak.lambda1), 1.0, 1e-12);
    const auto germ = load_catalog_scene("a3_germ");
    const auto q = analyze_point(germ, 0, germ_sigma(-0.2, -0.4));
    const auto bk = ak_classify(germ, q, 2);
    ASSERT_TRUE(bk.k.has_value());
    EXPECT_EQ(*bk.k, 2);
    EXPECT_LT(std::abs(bk.lambda1), 1e-9);
    EXPECT_GT(std::abs(bk.lambda2), 1e-3);
}

TEST(GermSampling, ResidualsAndKinds) {
    const auto s = load_catalog_scene("a3_germ");
    const auto set = detect_singular_set(s);
    EXPECT_GT(set.points.size(), 100u);
    for (const auto& p : set.points) {
        EXPECT_LT(std::abs(p.lambda), 1e-8 * s.scale(0).lambda_max);
        EXPECT_NEAR(p.coords[1], -10 * std::pow(p.coords[0], 3) - 3 * p.coords[0] * p.coords[2], 1e-8);
    }
    ASSERT_FALSE(set.second_kind.empty());
    for (const auto& p : set.second_kind) {
        EXPECT_NEAR(p.coords[2], -10 * p.coords[0] * p.coords[0], 1e-6);
        EXPECT_EQ(p.kind, PointKind::Second);
    }
    EXPECT_EQ(admissibility_check(s, set).verdict, Verdict::Admissible);
}

TEST(Admissibility, CatalogCurvesAndSurfaces) {
    for (const char* name : {"unit_circle", "segment", "astroid", "flat_disk", "fk", "round_sphere", "torus"}) {
        const auto s = load_catalog_scene(name);
        const auto rep = admissibility_check(s, detect_singular_set(s));
        EXPECT_EQ(rep.verdict, Verdict::Admissible) << name;
        EXPECT_TRUE(rep.all_nondegenerate) << name;
        EXPECT_TRUE(rep.second_kind.empty()) << name;
    }
}

TEST(ChartDelta, ShortWayOnPeriodicAxes) {
    const auto s = load_catalog_scene("unit_circle");
    const double a[1] = {0.1};
    const double b[1] = {2 * kPi - 0.1};
    EXPECT_NEAR(chart_delta(s, 0, a, b)[0], -0.2, 1e-12);
}

TEST(SigmaSample, StaysOnSigma) {
    const auto s = load_scene_text(testing_support::latlong_disk_text());
    const double a[2] = {0.2, 0.0};
    const double b[2] = {0.3, 0.0};
    for (double t : {0.0, 0.25, 0.5, 1.0}) {
        const auto smp = sigma_sample(s, 0, a, b, t, 3);
        EXPECT_NEAR(smp.lambda.value, 0.0, 1e-14);
        EXPECT_NEAR(smp.u[0], 0.2 + 0.1 * t, 1e-14);
        EXPECT_NEAR(smp.image_d1.norm(), 0.1, 1e-12);
        EXPECT_NEAR(smp.image_d2.norm(), 0.01, 1e-12);
    }
}
