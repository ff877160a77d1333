#pragma once

#include "frontal/scene.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace frontal {

/// Regularity threshold relative to the chart-local max |lambda|.
inline constexpr double kRegularityThreshold = 1e-10;
/// Frame orthonormality and tangency tolerance.
inline constexpr double kFrameTolerance = 1e-9;
/// Gram matrices worse conditioned than this are treated as singular.
inline constexpr double kGramConditionLimit = 1e12;

/// Determinant of a square matrix of jets, given as columns.
Jet jet_determinant(const std::vector<std::vector<Jet>>& columns);

/// Columns f_1..f_n of df as jets (one order lower than `at`).
std::vector<std::vector<Jet>> differential_jets(const PointEval& at);

/// The n ambient vectors f_i = df(d/du_i). Needs order >= 1.
std::vector<Eigen::VectorXd> differential(const PointEval& at);

Eigen::MatrixXd differential_matrix(const PointEval& at);

struct LambdaValue {
    double value = 0.0;
    Eigen::VectorXd gradient;  // empty when `at` has order < 2
    Eigen::MatrixXd hessian;   // empty when `at` has order < 3
    Jet jet;
};

/// Signed volume density det(f_1..f_n, E_1..E_r) times the scene orientation
/// sign, with chart derivatives up to order(at) - 1.
LambdaValue signed_volume_density(const FrontalScene& scene, const PointEval& at);

/// True when |lambda| exceeds the regularity threshold of the chart.
bool is_regular(const FrontalScene& scene, int chart, double lambda);

struct ValidationReport {
    int samples = 0;
    double max_norm_error = 0.0;
    double max_orthogonality_error = 0.0;
    double max_tangency_error = 0.0;
    double max_parallel_error = 0.0;
    int vanishing_cells = 0;
    std::vector<std::string> failures;

    bool passed() const { return failures.empty(); }
};

/// Checks frame orthonormality, frame tangency (f_i . E_j = 0) or tangent
/// parallelism for curves, and density of regular points on a grid of each core.
ValidationReport frontal_validate(const FrontalScene& scene, int samples_per_axis);

/**
 * Shape operator A_xi in the chart basis, for the normal field
 * xi = sum_j coeffs[j] E_j, from the Weingarten relation
 * D_X xi = -df(A_xi X) + normal part.
 *
 * Throws RegularityError when the Gram matrix of df is near singular.
 */
Eigen::MatrixXd shape_operator(const FrontalScene& scene, const PointEval& at,
                               const Eigen::VectorXd& coeffs);

/// det A_xi.
double lipschitz_killing(const FrontalScene& scene, const PointEval& at,
                         const Eigen::VectorXd& coeffs);

/// det(N_u, N_v, N) for codimension-one surfaces, times the orientation sign;
/// equals lipschitz_killing * lambda at regular points and stays smooth on the
/// singular set.
double gauss_pullback_density(const FrontalScene& scene, const PointEval& at);

/// Curvature of a curve at a regular parameter:
/// sqrt(|g''|^2 |g'|^2 - (g''.g')^2) / |g'|^3.
double curve_curvature(const FrontalScene& scene, int chart, double t);

/// Same formula from first and second derivative vectors.
double curvature_from_derivatives(const Eigen::VectorXd& d1, const Eigen::VectorXd& d2);

/// |e'(t)|, smooth through singular points.
double curve_turn_density(const FrontalScene& scene, int chart, double t);

} // namespace frontal
