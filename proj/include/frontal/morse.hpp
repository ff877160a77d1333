#pragma once

#include "frontal/integrate.hpp"
#include "frontal/scene.hpp"
#include "frontal/singular.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace frontal {

enum class Locus { Regular, FirstKind, SecondKind };
enum class MorseStatus { NonDegenerate, Degenerate, Unknown };
const char* locus_name(Locus l);
const char* morse_name(MorseStatus m);

struct HeightCritical {
    int chart = 0;
    std::vector<double> coords;
    Eigen::VectorXd image;
    Locus locus = Locus::Regular;
    MorseStatus morse = MorseStatus::Unknown;
    /// det[f_ij . w] in chart coordinates.
    double hessian_det = 0.0;
    /// Factor pair at first-kind points: v . w and the second derivative along Sigma.
    double v_dot_w = 0.0;
    double reduced = 0.0;
    double height = 0.0;
    double residual = 0.0;
    /// Traced curve and segment (surfaces, singular locus).
    int curve = -1;
    int segment = -1;
};

struct MorseOptions {
    /// Seeding cells per axis on each chart core (surfaces).
    int seed_grid = 96;
    /// Scan cells per chart for curves.
    int curve_grid = 1024;
    /// Relative threshold below which Hessian factors count as zero.
    double degeneracy = 1e-8;
};

/**
 * Critical points of height functions h_w = f . w for one scene.
 *
 * The constructor samples df on the seeding grid once; each query is then a
 * sign-change scan followed by Newton (regular locus) and a scan along the
 * traced singular set (singular locus).
 */
class HeightSampler {
public:
    HeightSampler(const FrontalScene& scene, const SingularSet& sigma, MorseOptions options = {});
    ~HeightSampler();
    HeightSampler(const HeightSampler&) = delete;
    HeightSampler& operator=(const HeightSampler&) = delete;

    std::vector<HeightCritical> critical_points(const Eigen::VectorXd& w) const;
    HeightCritical morse_test(const Eigen::VectorXd& w, HeightCritical c) const;

    const FrontalScene& scene() const { return scene_; }

private:
    struct Grid;
    const FrontalScene& scene_;
    const SingularSet& sigma_;
    MorseOptions options_;
    std::unique_ptr<Grid> grid_;

    std::vector<HeightCritical> surface_regular(const Eigen::VectorXd& w) const;
    std::vector<HeightCritical> surface_singular(const Eigen::VectorXd& w) const;
    std::vector<HeightCritical> curve_points(const Eigen::VectorXd& w) const;
};

std::vector<HeightCritical> height_critical_points(const FrontalScene& scene, const Eigen::VectorXd& w,
                                                   const SingularSet& sigma, const MorseOptions& options = {});

HeightCritical morse_test(const FrontalScene& scene, const Eigen::VectorXd& w, const HeightCritical& c,
                          const SingularSet& sigma, const MorseOptions& options = {});

struct MorseEstimate {
    std::uint64_t seed = 0;
    int samples = 0;
    std::vector<int> counts;
    std::vector<Eigen::VectorXd> directions;
    double mean = 0.0;
    double standard_error = 0.0;
    int rejected = 0;
    int min_count = 0;
    int max_count = 0;
    /// Rejected fraction reached 5 %.
    bool flagged = false;
    std::optional<Eigen::VectorXd> witness;
};

/// Uniform directions on the sphere from per-sample generators seeded by
/// (seed, sample index); directions giving a degenerate or unknown critical
/// point are redrawn and counted.
MorseEstimate tau_monte_carlo(const FrontalScene& scene, const SingularSet& sigma, int samples,
                              std::uint64_t seed, const MorseOptions& options = {});

/// Unit direction drawn for sample `index`, attempt `attempt`.
Eigen::VectorXd sample_direction(int dim, std::uint64_t seed, int index, int attempt);

struct ReebWitness {
    std::optional<Eigen::VectorXd> direction;
    /// A sampled height function with exactly two critical points exists.
    bool sphere_implied = false;
    /// The declared Betti numbers are those of a sphere.
    bool betti_sphere = false;
};

ReebWitness reeb_witness(const FrontalScene& scene, const MorseEstimate& estimate);

struct VerdictRecord {
    std::string name;
    /// "pass", "fail" or "inapplicable".
    std::string status;
    std::string summary;
    std::vector<std::pair<std::string, double>> values;
};

std::vector<VerdictRecord> verify_inequality(const FrontalScene& scene, const CurvatureReport& report,
                                             const MorseEstimate* estimate);

struct EqualityReport {
    double planar_residual = 0.0;
    /// Residual to the best (n+1)-plane.
    double span_residual = 0.0;
    double hull_distance = 0.0;
    double hausdorff = 0.0;
    double hausdorff_tolerance = 0.0;
    bool planar = false;
    bool convex = false;
    bool boundary = false;
    bool applicable = true;
    bool equality_case = false;
    /// Tight case: tau = 2 forces the image into an (n+1)-plane.
    VerdictRecord span_verdict;
    /// Equality case for frontals whose singular points are all of the first kind.
    VerdictRecord verdict;
};

EqualityReport equality_case_check(const FrontalScene& scene, const SingularSet& sigma, double tau);

/// 2-D convex hull (monotone chain), counter-clockwise, without repeated endpoint.
std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> points);

} // namespace frontal
