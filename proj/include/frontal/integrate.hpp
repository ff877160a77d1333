#pragma once

#include "frontal/quadrature.hpp"
#include "frontal/scene.hpp"
#include "frontal/singular.hpp"

#include <vector>

namespace frontal {

struct IntegrationOptions {
    /// Absolute tolerance on the normalized surface parts.
    double tol = 1e-6;
    /// Absolute tolerance on the normalized curve regular part.
    double curve_tol = 1e-9;
    bool allow_second_kind = false;
    long max_cells = 400000;
};

/// Total absolute curvature split into its regular and singular parts.
struct CurvatureReport {
    int dim = 0;
    double tau = 0.0;
    double regular_part = 0.0;
    double singular_part = 0.0;
    double regular_error = 0.0;
    double singular_error = 0.0;
    std::vector<double> chart_regular;
    std::vector<double> curve_singular;
    /// Image length of each traced singular curve (surfaces).
    std::vector<double> curve_length;
    /// #Sigma for curves.
    int singular_point_count = 0;
    bool second_kind_encountered = false;
    bool extrapolation_used = false;
    long evaluations = 0;
};

/// Curves: regular part (1/pi) int |e'| dt over every chart core; singular part #Sigma.
CurvatureReport tau_curve(const FrontalScene& scene, const std::vector<SingularPoint>& sigma,
                          const IntegrationOptions& options = {});

struct RegularPart {
    double value = 0.0;
    double error = 0.0;
    std::vector<double> per_chart;
    long evaluations = 0;
};

/// (1/2pi) int |det(N_u, N_v, N)| du dv over the chart cores.
RegularPart tau_regular_surface(const FrontalScene& scene, double tol = 1e-6, long max_cells = 400000);

struct SingularPart {
    double value = 0.0;
    double error = 0.0;
    std::vector<double> per_curve;
    std::vector<double> length;
    bool second_kind_encountered = false;
    bool extrapolation_used = false;
};

/// (1/pi) int kappa ds along every traced singular curve.
SingularPart tau_singular_surface(const FrontalScene& scene, const std::vector<SingularCurve>& curves,
                                  double tol = 1e-6, bool allow_second_kind = false);

/// Image length of one traced singular curve.
double singular_curve_length(const FrontalScene& scene, const SingularCurve& curve, double tol = 1e-10);

/// Dispatches on the dimension and assembles the report.
CurvatureReport total_absolute_curvature(const FrontalScene& scene, const SingularSet& sigma,
                                         const IntegrationOptions& options = {});

/// (1/pi) int kappa |g'| dt over the regular arcs between singular parameters,
/// using the curvature formula directly.
double curvature_integral_regular_arcs(const FrontalScene& scene, const std::vector<SingularPoint>& sigma,
                                       double tol = 1e-11);

/// The one-dimensional integral printed for the f_k family:
/// (6 vol(S^{n-1}) / vol(S^n)) int_{-pi/2}^{pi/2} k |cos t| / (1 + (k sin t)^2 / 4)^{(n+1)/2} dt.
double example_fk_reference(double k, int n = 2);

} // namespace frontal
