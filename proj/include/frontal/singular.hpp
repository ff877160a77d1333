#pragma once

#include "frontal/geometry.hpp"
#include "frontal/scene.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace frontal {

/// Degenerate when |grad lambda| < this times the chart-grid max |grad lambda|.
inline constexpr double kDegeneracyThreshold = 1e-8;
/// Second kind when |eta . grad lambda| / |grad lambda| is below this.
inline constexpr double kKindThreshold = 1e-6;
/// Second-kind points closer than this many tracing steps are not isolated.
inline constexpr int kIsolationSteps = 10;

enum class PointKind { First, Second, Degenerate };
const char* kind_name(PointKind k);

struct SingularPoint {
    int chart = 0;
    std::vector<double> coords;
    Eigen::VectorXd image;
    double lambda = 0.0;
    Eigen::VectorXd gradient;
    /// Unit kernel vector of df in chart coordinates.
    Eigen::VectorXd null_direction;
    PointKind kind = PointKind::First;
    /// k such that the point is A_{k+1}; empty when no k <= 2 qualifies.
    std::optional<int> ak;
    bool ak_inconclusive = false;
    /// |eta . grad lambda| / |grad lambda|.
    double kind_ratio = 0.0;
    /// d lambda(eta) with the orientation used during classification.
    double dlambda_eta = 0.0;
    /// Numeric rank of df is exactly n - 1.
    bool rank_ok = true;
    bool near_tangency = false;
    /// Curves: second derivative of the map is non-zero (generalized cusp).
    bool cusp = false;
    /// Position on a traced curve (n = 2), when known.
    int curve = -1;
    int segment = -1;
};

struct SingularCurve {
    std::vector<SingularPoint> vertices;
    bool closed = false;
    /// Unit chart tangent of the singular set at each vertex, oriented along the traversal.
    std::vector<Eigen::VectorXd> tangents;
    /// Cumulative image chord length at each vertex.
    std::vector<double> arc_length;
    /// Largest chart distance between consecutive vertices in the same chart.
    double step_bound = 0.0;
    /// Segments containing a located second-kind point (filled by detect_singular_set).
    std::vector<int> second_kind_segments;

    /// Segment i -> i+1 (wrapping for closed curves) lies in one chart and has
    /// positive length.
    bool segment_valid(std::size_t i) const;
    std::size_t segment_count() const {
        return closed ? vertices.size() : (vertices.empty() ? 0 : vertices.size() - 1);
    }
};

struct DetectionOptions {
    /// Marching-squares cells per axis on each chart core.
    int grid = 256;
    /// Sign-scan cells per chart for curves.
    int curve_grid = 4096;
    /// Sampling lines per axis pair and cells per line for n = 3.
    int germ_lines = 24;
    int germ_cells = 64;
};

struct SingularSet {
    int dim = 0;
    /// Isolated points (n = 1) or samples of the singular hypersurface (n = 3).
    std::vector<SingularPoint> points;
    /// Traced curves (n = 2).
    std::vector<SingularCurve> curves;
    /// Located second-kind points (refined).
    std::vector<SingularPoint> second_kind;
    bool refined_grid = false;
    std::vector<std::string> warnings;
};

/// Roots of lambda on each chart core of a curve, refined to |lambda| < 1e-12.
std::vector<SingularPoint> detect_singular_points_curve(const FrontalScene& scene, int grid = 4096);

/// Marching squares on each chart core, edge roots refined onto lambda = 0,
/// polylines stitched across charts by image position.
std::vector<SingularCurve> detect_singular_curves(const FrontalScene& scene, int grid = 256,
                                                  bool* refined = nullptr);

/// Samples of the singular set of a 3-dimensional germ from axis-parallel line scans.
std::vector<SingularPoint> sample_singular_set(const FrontalScene& scene, int lines, int cells);

/// Everything in one call, dispatched on the dimension.
SingularSet detect_singular_set(const FrontalScene& scene, const DetectionOptions& options = {});

struct NullDirection {
    Eigen::VectorXd eta;
    Eigen::VectorXd singular_values;  // descending
    bool ambiguous = false;
};

/// Smallest right singular vector of df. With `reference`, the sign is chosen to
/// agree with it; otherwise eta . grad lambda >= 0, falling back to a
/// lexicographic rule when that product vanishes.
NullDirection null_direction(const FrontalScene& scene, const PointEval& at,
                             const Eigen::VectorXd* reference = nullptr);

/// d lambda(eta) at an arbitrary chart point, eta oriented along `reference`.
double lambda_eta(const FrontalScene& scene, int chart, std::span<const double> u,
                  const Eigen::VectorXd& reference);

PointKind classify_kind(const FrontalScene& scene, const SingularPoint& p);

struct AkResult {
    std::optional<int> k;
    bool inconclusive = false;
    double lambda0 = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    int jacobian_rank = 0;
};

/// Chain lambda, lambda' = d lambda(eta), lambda'' = d lambda'(eta) and the
/// rank of the Jacobian of (lambda, ..., lambda^{(k-1)}).
AkResult ak_classify(const FrontalScene& scene, const SingularPoint& p, int k_max = 2);

/// Builds a fully classified singular point at `coords` (assumed on lambda = 0).
SingularPoint analyze_point(const FrontalScene& scene, int chart, std::span<const double> coords);

/// Gauss-Newton on psi = (lambda, lambda') from a nearby seed; empty if it fails.
std::optional<SingularPoint> refine_second_kind(const FrontalScene& scene, int chart,
                                                std::span<const double> seed);

/// Chart difference b - a, taking the short way round on periodic axes.
Eigen::VectorXd chart_delta(const FrontalScene& scene, int chart, std::span<const double> a,
                            std::span<const double> b);

/**
 * A point on the singular set between two nearby singular points a and b of one
 * chart: c(s) = a + s (b - a) + mu(s) m with m normal to the chord and
 * lambda(c(s)) = 0. Derivatives with respect to s are exact from jets.
 */
struct SigmaSample {
    std::vector<double> u;
    Eigen::VectorXd du;   // c'(s)
    Eigen::VectorXd ddu;  // c''(s), needs order 3
    PointEval eval;
    LambdaValue lambda;
    Eigen::VectorXd image_d1;  // df(c')
    Eigen::VectorXd image_d2;  // D2f(c', c') + df(c''), needs order 3
};

SigmaSample sigma_sample(const FrontalScene& scene, int chart, std::span<const double> a,
                         std::span<const double> b, double s, int order);

enum class Verdict { Admissible, NotAdmissible, Inconclusive };
const char* verdict_name(Verdict v);

struct AdmissibilityReport {
    bool all_nondegenerate = true;
    std::vector<SingularPoint> second_kind;
    bool second_kind_discrete = true;
    Verdict verdict = Verdict::Admissible;
    std::vector<std::string> notes;
};

AdmissibilityReport admissibility_check(const FrontalScene& scene, const SingularSet& set);

} // namespace frontal
