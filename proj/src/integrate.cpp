#include "frontal/integrate.hpp"

#include "frontal/errors.hpp"
#include "frontal/geometry.hpp"
#include "frontal/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace frontal {

namespace {

constexpr double kPi = std::numbers::pi;

// kappa |c'| for a curve with velocity a and acceleration b, in any dimension
double turning_density(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double aa = a.squaredNorm();
    if (aa == 0.0)
        return 0.0;
    const double bb = b.squaredNorm();
    const double ab = a.dot(b);
    return std::sqrt(std::max(0.0, aa * bb - ab * ab)) / aa;
}

void require_admissible(const std::vector<SingularPoint>& pts) {
    for (const auto& p : pts)
        if (p.kind == PointKind::Degenerate)
            throw AdmissibilityError("degenerate singular point at t = " + format_number(p.coords[0]));
}

} // namespace

CurvatureReport tau_curve(const FrontalScene& scene, const std::vector<SingularPoint>& sigma,
                          const IntegrationOptions& options) {
    if (scene.n() != 1)
        throw EvalError("tau_curve needs a curve scene");
    require_admissible(sigma);
    CurvatureReport rep;
    rep.dim = 1;
    const double tol = options.curve_tol * kPi / scene.chart_count();
    for (int ci = 0; ci < scene.chart_count(); ++ci) {
        const Interval core = scene.chart(ci).core[0];
        const auto q = integrate_1d([&](double t) { return curve_turn_density(scene, ci, t); }, core.lo,
                                    core.hi, tol, 16);
        if (!q.converged)
            throw AccuracyError("curve regular part did not converge", q.value / kPi, q.error / kPi);
        rep.chart_regular.push_back(q.value / kPi);
        rep.regular_error += q.error / kPi;
        rep.evaluations += q.evaluations;
    }
    rep.regular_part = pairwise_sum(rep.chart_regular.data(), rep.chart_regular.size());
    rep.singular_point_count = static_cast<int>(sigma.size());
    rep.singular_part = static_cast<double>(sigma.size());
    rep.tau = rep.regular_part + rep.singular_part;
    return rep;
}

RegularPart tau_regular_surface(const FrontalScene& scene, double tol, long max_cells) {
    if (scene.n() != 2 || scene.r() != 1)
        throw EvalError("the surface pipeline needs a codimension-one surface");
    RegularPart out;
    CubatureOptions opt;
    opt.abs_tol = 2.0 * kPi * tol / scene.chart_count();
    opt.max_cells = max_cells;
    for (int ci = 0; ci < scene.chart_count(); ++ci) {
        const auto& core = scene.chart(ci).core;
        const auto q = integrate_2d(
            [&](double x, double y) {
                const double u[2] = {x, y};
                return std::abs(gauss_pullback_density(scene, scene.evaluate(ci, u, 1)));
            },
            core[0], core[1], opt);
        if (!q.converged)
            throw AccuracyError("surface regular part did not reach tolerance on chart '" +
                                    scene.chart(ci).id + "'",
                                q.value / (2.0 * kPi), q.error / (2.0 * kPi));
        out.per_chart.push_back(q.value / (2.0 * kPi));
        out.error += q.error / (2.0 * kPi);
        out.evaluations += q.evaluations;
    }
    out.value = pairwise_sum(out.per_chart.data(), out.per_chart.size());
    return out;
}

namespace {

// integral over every valid segment of a traced curve, in segment order
template <class F>
QuadResult integrate_along(const FrontalScene& scene, const SingularCurve& c, double tol, int order, F&& density) {
    const std::size_t ns = c.segment_count();
    const double per = std::max(1e-14, tol / std::max<std::size_t>(ns, 1));
    std::vector<QuadResult> parts(ns);
    parallel_for(ns, [&](std::size_t i) {
        if (!c.segment_valid(i))
            return;
        const auto& a = c.vertices[i];
        const auto& b = c.vertices[(i + 1) % c.vertices.size()];
        parts[i] = integrate_1d(
            [&](double s) {
                const auto smp = sigma_sample(scene, a.chart, a.coords, b.coords, s, order);
                return density(smp);
            },
            0.0, 1.0, per, 1, 64);
    });
    std::vector<double> vals(ns), errs(ns);
    QuadResult out;
    out.converged = true;
    for (std::size_t i = 0; i < ns; ++i) {
        vals[i] = parts[i].value;
        errs[i] = parts[i].error;
        out.evaluations += parts[i].evaluations;
    }
    out.value = pairwise_sum(vals.data(), ns);
    out.error = pairwise_sum(errs.data(), ns);
    out.converged = out.error <= tol;
    return out;
}

} // namespace

double singular_curve_length(const FrontalScene& scene, const SingularCurve& curve, double tol) {
    return integrate_along(scene, curve, tol, 2, [](const SigmaSample& s) { return s.image_d1.norm(); }).value;
}

SingularPart tau_singular_surface(const FrontalScene& scene, const std::vector<SingularCurve>& curves,
                                  double tol, bool allow_second_kind) {
    SingularPart out;
    for (const auto& c : curves) {
        if (!c.second_kind_segments.empty())
            out.second_kind_encountered = true;
        for (const auto& v : c.vertices) {
            if (v.kind == PointKind::Degenerate)
                throw AdmissibilityError("degenerate singular point on a traced curve");
            if (v.kind == PointKind::Second)
                out.second_kind_encountered = true;
        }
    }
    if (out.second_kind_encountered && !allow_second_kind)
        throw AdmissibilityError(
            "singular curve passes through second-kind points; rerun with --allow-second-kind");
    out.extrapolation_used = out.second_kind_encountered;
    const double per_curve_tol = kPi * tol / std::max<std::size_t>(curves.size(), 1);
    for (const auto& c : curves) {
        const auto q = integrate_along(scene, c, per_curve_tol, 3, [](const SigmaSample& s) {
            return turning_density(s.image_d1, s.image_d2);
        });
        if (!q.converged)
            throw AccuracyError("singular part did not reach tolerance", q.value / kPi, q.error / kPi);
        out.per_curve.push_back(q.value / kPi);
        out.error += q.error / kPi;
        out.length.push_back(singular_curve_length(scene, c));
    }
    out.value = pairwise_sum(out.per_curve.data(), out.per_curve.size());
    return out;
}

CurvatureReport total_absolute_curvature(const FrontalScene& scene, const SingularSet& sigma,
                                         const IntegrationOptions& options) {
    if (!scene.closed())
        throw EvalError("total absolute curvature needs a closed domain");
    if (scene.n() == 1)
        return tau_curve(scene, sigma.points, options);
    if (scene.n() != 2)
        throw EvalError("total absolute curvature is implemented for curves and surfaces");
    CurvatureReport rep;
    rep.dim = 2;
    const auto reg = tau_regular_surface(scene, options.tol, options.max_cells);
    const auto sing = tau_singular_surface(scene, sigma.curves, options.tol, options.allow_second_kind);
    rep.regular_part = reg.value;
    rep.regular_error = reg.error;
    rep.chart_regular = reg.per_chart;
    rep.evaluations = reg.evaluations;
    rep.singular_part = sing.value;
    rep.singular_error = sing.error;
    rep.curve_singular = sing.per_curve;
    rep.curve_length = sing.length;
    rep.second_kind_encountered = sing.second_kind_encountered;
    rep.extrapolation_used = sing.extrapolation_used;
    rep.tau = rep.regular_part + rep.singular_part;
    return rep;
}

double curvature_integral_regular_arcs(const FrontalScene& scene, const std::vector<SingularPoint>& sigma,
                                       double tol) {
    if (scene.n() != 1)
        throw EvalError("curvature integral needs a curve scene");
    double total = 0.0;
    for (int ci = 0; ci < scene.chart_count(); ++ci) {
        const Interval core = scene.chart(ci).core[0];
        std::vector<double> cuts{core.lo};
        for (const auto& p : sigma)
            if (p.chart == ci && p.coords[0] > core.lo && p.coords[0] < core.hi)
                cuts.push_back(p.coords[0]);
        cuts.push_back(core.hi);
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const auto q = integrate_1d(
                [&](double t) {
                    const double u[1] = {t};
                    const PointEval pe = scene.evaluate(ci, u, 2);
                    Eigen::VectorXd d1(scene.m()), d2(scene.m());
                    for (int i = 0; i < scene.m(); ++i) {
                        d1[i] = pe.f[static_cast<std::size_t>(i)].d(0);
                        d2[i] = pe.f[static_cast<std::size_t>(i)].d2(0, 0);
                    }
                    return curvature_from_derivatives(d1, d2) * d1.norm();
                },
                cuts[k], cuts[k + 1], tol, 8);
            total += q.value;
        }
    }
    return total / kPi;
}

double example_fk_reference(double k, int n) {
    if (!(k > 0.0))
        return 0.0;
    auto sphere_volume = [](int d) {
        return 2.0 * std::pow(kPi, 0.5 * (d + 1)) / std::tgamma(0.5 * (d + 1));
    };
    const double c = 6.0 * sphere_volume(n - 1) / sphere_volume(n);
    const auto q = integrate_1d(
        [&](double t) {
            const double s = k * std::sin(t);
            return k * std::abs(std::cos(t)) / std::pow(1.0 + s * s / 4.0, 0.5 * (n + 1));
        },
        -0.5 * kPi, 0.5 * kPi, 1e-13, 4);
    return c * q.value;
}

} // namespace frontal
