#include "frontal/scene.hpp"

#include "frontal/errors.hpp"
#include "frontal/geometry.hpp"

#include <cmath>
#include <mutex>

namespace frontal {

const char* domain_name(DomainKind d) {
    switch (d) {
    case DomainKind::Circle: return "circle";
    case DomainKind::Sphere: return "sphere";
    case DomainKind::Torus: return "torus";
    case DomainKind::GermWindow: return "germ-window";
    case DomainKind::Other: return "other";
    }
    return "other";
}

DomainKind parse_domain(const std::string& label) {
    if (label == "circle") return DomainKind::Circle;
    if (label == "sphere") return DomainKind::Sphere;
    if (label == "torus") return DomainKind::Torus;
    if (label == "germ-window") return DomainKind::GermWindow;
    if (label == "other") return DomainKind::Other;
    throw SceneError("unknown domain label '" + label + "'");
}

struct FrontalScene::Compiled {
    struct ChartProgram {
        Program program;
        int frame_offset = 0;
        int tangent_offset = -1;
    };
    std::vector<ChartProgram> charts;

    mutable std::vector<std::once_flag> scale_once;
    mutable std::vector<ChartScale> scales;

    explicit Compiled(std::size_t n) : scale_once(n), scales(n) {}
};

namespace {

void check_spec(const SceneSpec& s) {
    if (s.dim < 1 || s.dim > 3)
        throw SceneError("dim must be 1, 2 or 3");
    if (s.ambient <= s.dim)
        throw SceneError("ambient dimension must exceed dim");
    if (s.ambient > 4 && s.dim > 1)
        throw SceneError("ambient dimension above 4 is only supported for curves");
    if (s.charts.empty())
        throw SceneError("scene has no charts");
    if (s.orientation_sign != 1 && s.orientation_sign != -1)
        throw SceneError("orientation_sign must be +1 or -1");
    if (!s.betti.empty() && static_cast<int>(s.betti.size()) != s.dim + 1)
        throw SceneError("betti must list b0..bn");
    const std::size_t n = static_cast<std::size_t>(s.dim);
    const std::size_t m = static_cast<std::size_t>(s.ambient);
    const std::size_t r = m - n;
    for (const auto& c : s.charts) {
        const std::string where = "chart '" + c.id + "': ";
        if (c.vars.size() != n)
            throw SceneError(where + "expected " + std::to_string(n) + " variables");
        if (c.box.size() != n || c.core.size() != n || c.periodic.size() != n)
            throw SceneError(where + "box, core and periodic flags must have one entry per axis");
        for (std::size_t i = 0; i < n; ++i) {
            if (!(c.box[i].lo < c.box[i].hi))
                throw SceneError(where + "empty box interval");
            if (c.core[i].lo < c.box[i].lo - 1e-12 || c.core[i].hi > c.box[i].hi + 1e-12 ||
                !(c.core[i].lo < c.core[i].hi))
                throw SceneError(where + "core must be a non-empty sub-box of the box");
        }
        if (c.f.size() != m)
            throw SceneError(where + "f must have exactly " + std::to_string(m) + " components");
        const bool has_frame = !c.frame.empty();
        const bool has_tangent = !c.tangent.empty();
        if (has_frame && c.frame.size() != r)
            throw SceneError(where + "normal_frame must list " + std::to_string(r) + " vectors");
        for (const auto& v : c.frame)
            if (v.size() != m)
                throw SceneError(where + "frame vectors need " + std::to_string(m) + " components");
        if (has_tangent && n != 1)
            throw SceneError(where + "a tangent field is only meaningful for curves");
        if (has_tangent && c.tangent.size() != m)
            throw SceneError(where + "tangent needs " + std::to_string(m) + " components");
        if (!has_frame && !has_tangent)
            throw SceneError(where + "either normal_frame or tangent is required");
        if (has_frame && has_tangent)
            throw SceneError(where + "give normal_frame or tangent, not both");
    }
}

std::vector<Jet> cofactor_vector(const std::vector<std::vector<Jet>>& frame, int m,
                                 const Jet& zero) {
    // e_k = det(unit_k, E_1, ..., E_r); then det(v, E_1..E_r) = v . e
    std::vector<Jet> e(static_cast<std::size_t>(m), zero);
    for (int k = 0; k < m; ++k) {
        std::vector<std::vector<Jet>> cols;
        std::vector<Jet> unit(static_cast<std::size_t>(m), zero);
        unit[k] = zero + 1.0;
        cols.push_back(unit);
        for (const auto& v : frame)
            cols.push_back(v);
        e[k] = jet_determinant(cols);
    }
    return e;
}

} // namespace

FrontalScene::FrontalScene(SceneSpec spec)
    : spec_(std::make_shared<const SceneSpec>(std::move(spec))) {
    check_spec(*spec_);
    auto compiled = std::make_shared<Compiled>(spec_->charts.size());
    for (const auto& c : spec_->charts) {
        Compiled::ChartProgram cp{Program(c.vars), 0, -1};
        for (const auto& e : c.f)
            cp.program.add(e);
        cp.frame_offset = static_cast<int>(c.f.size());
        for (const auto& v : c.frame)
            for (const auto& e : v)
                cp.program.add(e);
        if (!c.tangent.empty()) {
            cp.tangent_offset = static_cast<int>(cp.program.output_count());
            for (const auto& e : c.tangent)
                cp.program.add(e);
        }
        compiled->charts.push_back(std::move(cp));
    }
    compiled_ = compiled;
}

bool FrontalScene::has_tangent() const {
    return n() == 1;
}

PointEval FrontalScene::evaluate(int chart, std::span<const double> coords, int order) const {
    const auto& cp = compiled_->charts.at(chart);
    const auto& c = spec_->charts[chart];
    thread_local Program::Workspace ws;
    thread_local std::vector<Jet> out;
    cp.program.evaluate(coords, order, ws, out);

    PointEval pe;
    pe.chart = chart;
    pe.coords.assign(coords.begin(), coords.end());
    pe.order = order;
    const int m_ = m();
    pe.f.assign(out.begin(), out.begin() + m_);
    for (std::size_t j = 0; j < c.frame.size(); ++j) {
        auto first = out.begin() + cp.frame_offset + static_cast<long>(j) * m_;
        pe.frame.emplace_back(first, first + m_);
    }
    if (n() == 1) {
        if (cp.tangent_offset >= 0) {
            auto first = out.begin() + cp.tangent_offset;
            pe.tangent.assign(first, first + m_);
        } else {
            pe.tangent = cofactor_vector(pe.frame, m_, Jet(n(), order));
        }
    }
    return pe;
}

Eigen::VectorXd FrontalScene::position(int chart, std::span<const double> coords) const {
    const PointEval pe = evaluate(chart, coords, 0);
    Eigen::VectorXd p(m());
    for (int k = 0; k < m(); ++k)
        p[k] = pe.f[k].value();
    return p;
}

std::vector<double> FrontalScene::wrap(int chart, std::span<const double> coords) const {
    const auto& c = spec_->charts.at(chart);
    std::vector<double> u(coords.begin(), coords.end());
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!c.periodic[i])
            continue;
        const double w = c.box[i].width();
        u[i] = c.box[i].lo + std::fmod(std::fmod(u[i] - c.box[i].lo, w) + w, w);
    }
    return u;
}

const FrontalScene::ChartScale& FrontalScene::scale(int chart) const {
    std::call_once(compiled_->scale_once.at(chart), [&] {
        const auto& c = spec_->charts[chart];
        const int dim = n();
        const int per_axis = dim == 1 ? 1024 : dim == 2 ? 64 : 16;
        ChartScale s;
        std::vector<int> idx(static_cast<std::size_t>(dim), 0);
        std::vector<double> u(static_cast<std::size_t>(dim));
        for (;;) {
            for (int i = 0; i < dim; ++i)
                u[i] = c.core[i].lo + c.core[i].width() * (idx[i] + 0.5) / per_axis;
            try {
                const auto lam = signed_volume_density(*this, evaluate(chart, u, 2));
                s.lambda_max = std::max(s.lambda_max, std::abs(lam.value));
                s.grad_max = std::max(s.grad_max, lam.gradient.norm());
            } catch (const EvalError&) {
            }
            int k = 0;
            while (k < dim && ++idx[k] == per_axis)
                idx[k++] = 0;
            if (k == dim)
                break;
        }
        compiled_->scales[chart] = s;
    });
    return compiled_->scales[chart];
}

namespace {

Expression affine(const Eigen::MatrixXd& M, const Eigen::VectorXd& t, double scale,
                  const std::vector<Expression>& v, int row) {
    Expression acc = Expression::number(t.size() ? t[row] : 0.0);
    bool first = t.size() == 0 || t[row] == 0.0;
    for (int k = 0; k < M.cols(); ++k) {
        if (M(row, k) == 0.0)
            continue;
        Expression term = Expression::number(M(row, k)) * v[k];
        acc = first ? term : acc + term;
        first = false;
    }
    if (first)
        acc = Expression::number(0.0);
    return scale == 1.0 ? acc : Expression::number(scale) * acc;
}

} // namespace

FrontalScene transformed(const FrontalScene& scene, const Eigen::MatrixXd& rotation,
                         const Eigen::VectorXd& translation, double scale) {
    SceneSpec spec = scene.spec();
    const int m = scene.m();
    if (rotation.rows() != m || rotation.cols() != m || translation.size() != m)
        throw SceneError("transform dimensions do not match the ambient space");
    const Eigen::VectorXd none;
    for (auto& c : spec.charts) {
        std::vector<Expression> f(static_cast<std::size_t>(m));
        for (int k = 0; k < m; ++k)
            f[k] = affine(rotation, translation, scale, c.f, k);
        c.f = f;
        for (auto& v : c.frame) {
            std::vector<Expression> w(static_cast<std::size_t>(m));
            for (int k = 0; k < m; ++k)
                w[k] = affine(rotation, none, 1.0, v, k);
            v = w;
        }
        if (!c.tangent.empty()) {
            std::vector<Expression> w(static_cast<std::size_t>(m));
            for (int k = 0; k < m; ++k)
                w[k] = affine(rotation, none, 1.0, c.tangent, k);
            c.tangent = w;
        }
    }
    spec.id += "_transformed";
    return FrontalScene(std::move(spec));
}

FrontalScene reparametrized(const FrontalScene& scene, const Eigen::MatrixXd& A,
                            const Eigen::VectorXd& b) {
    const int n = scene.n();
    if (A.rows() != n || A.cols() != n || b.size() != n)
        throw SceneError("reparametrization dimensions do not match the chart dimension");
    // Boxes map to boxes only under signed permutations composed with scalings.
    std::vector<int> source(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        int nonzero = 0;
        for (int j = 0; j < n; ++j)
            if (A(i, j) != 0.0) {
                source[i] = j;
                ++nonzero;
            }
        if (nonzero != 1)
            throw SceneError("reparametrization must be a scaled signed permutation");
    }
    SceneSpec spec = scene.spec();
    for (auto& c : spec.charts) {
        std::vector<std::string> vars(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j)
            vars[j] = c.vars[j] + "_r";
        std::map<std::string, Expression> bind;
        std::vector<Interval> box(static_cast<std::size_t>(n)), core(box);
        std::vector<bool> periodic(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const int j = source[i];
            const double a = A(i, j);
            bind[c.vars[i]] =
                Expression::number(a) * Expression::variable(vars[j]) + Expression::number(b[i]);
            auto pull = [&](const Interval& iv) {
                const double p = (iv.lo - b[i]) / a, q = (iv.hi - b[i]) / a;
                return Interval{std::min(p, q), std::max(p, q)};
            };
            box[j] = pull(c.box[i]);
            core[j] = pull(c.core[i]);
            periodic[j] = c.periodic[i];
        }
        for (auto& e : c.f)
            e = e.substitute(bind);
        for (auto& v : c.frame)
            for (auto& e : v)
                e = e.substitute(bind);
        for (auto& e : c.tangent)
            e = e.substitute(bind);
        c.vars = vars;
        c.box = box;
        c.core = core;
        c.periodic = periodic;
    }
    spec.id += "_reparametrized";
    return FrontalScene(std::move(spec));
}

} // namespace frontal
