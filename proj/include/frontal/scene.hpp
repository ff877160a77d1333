#pragma once

#include "frontal/expr.hpp"
#include "frontal/jet.hpp"
#include "frontal/program.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace frontal {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
};

enum class DomainKind { Circle, Sphere, Torus, GermWindow, Other };

const char* domain_name(DomainKind d);
DomainKind parse_domain(const std::string& label);

/// One local parametrization of the abstract domain.
struct Chart {
    std::string id;
    std::vector<std::string> vars;
    std::vector<Interval> box;
    std::vector<bool> periodic;
    /// Sub-box in which this chart is authoritative. Cores of a scene tile the domain.
    std::vector<Interval> core;
    std::vector<Expression> f;
    /// Orthonormal normal frame E_1..E_r, each an ambient vector.
    std::vector<std::vector<Expression>> frame;
    /// Unit tangent field e (curves only); alternative to `frame`.
    std::vector<Expression> tangent;
};

struct SceneSpec {
    std::string id;
    int dim = 0;
    int ambient = 0;
    DomainKind domain = DomainKind::Other;
    std::vector<Chart> charts;
    std::vector<int> betti;
    int orientation_sign = 1;
    std::map<std::string, double> parameters;
};

/// Jets of every scene field at one chart point.
struct PointEval {
    int chart = 0;
    std::vector<double> coords;
    int order = 0;
    std::vector<Jet> f;
    std::vector<std::vector<Jet>> frame;
    /// Unit tangent (curves): supplied, or the cofactor vector of the frame.
    std::vector<Jet> tangent;
};

/**
 * A parametrized frontal with its generalized Gauss map.
 *
 * Immutable after construction; the expressions of every chart are compiled
 * into one shared program, and `evaluate` is safe to call concurrently.
 */
class FrontalScene {
public:
    explicit FrontalScene(SceneSpec spec);

    const SceneSpec& spec() const { return *spec_; }
    const std::string& id() const { return spec_->id; }
    int n() const { return spec_->dim; }
    int m() const { return spec_->ambient; }
    int r() const { return spec_->ambient - spec_->dim; }
    int chart_count() const { return static_cast<int>(spec_->charts.size()); }
    const Chart& chart(int i) const { return spec_->charts.at(i); }
    bool closed() const { return spec_->domain != DomainKind::GermWindow; }
    bool has_tangent() const;

    PointEval evaluate(int chart, std::span<const double> coords, int order) const;

    /// Ambient image point f(u).
    Eigen::VectorXd position(int chart, std::span<const double> coords) const;

    /// Maps coordinates on periodic axes back into the chart box.
    std::vector<double> wrap(int chart, std::span<const double> coords) const;

    /// Chart-scale magnitudes sampled on a fixed grid of each chart core:
    /// max |lambda| and max |grad lambda|.
    struct ChartScale {
        double lambda_max = 0.0;
        double grad_max = 0.0;
    };
    const ChartScale& scale(int chart) const;

private:
    struct Compiled;
    std::shared_ptr<const SceneSpec> spec_;
    std::shared_ptr<const Compiled> compiled_;
};

/// New scene with f -> scale * (R f + t) and frame/tangent -> R E.
FrontalScene transformed(const FrontalScene& scene, const Eigen::MatrixXd& rotation,
                         const Eigen::VectorXd& translation, double scale = 1.0);

/// New scene with chart coordinates replaced by u = A v + b on every chart.
FrontalScene reparametrized(const FrontalScene& scene, const Eigen::MatrixXd& A,
                            const Eigen::VectorXd& b);

} // namespace frontal
