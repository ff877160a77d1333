#include "frontal/geometry.hpp"

#include "frontal/errors.hpp"

#include <cmath>

namespace frontal {

Jet jet_determinant(const std::vector<std::vector<Jet>>& cols) {
    const std::size_t m = cols.size();
    if (m == 0)
        throw EvalError("empty determinant");
    for (const auto& c : cols)
        if (c.size() != m)
            throw EvalError("determinant of a non-square jet matrix");
    if (m == 1)
        return cols[0][0];
    if (m == 2)
        return cols[0][0] * cols[1][1] - cols[1][0] * cols[0][1];
    // Laplace expansion along the first column
    Jet acc = Jet(cols[0][0].nvars(), cols[0][0].order());
    bool first = true;
    for (std::size_t row = 0; row < m; ++row) {
        std::vector<std::vector<Jet>> minor;
        for (std::size_t c = 1; c < m; ++c) {
            std::vector<Jet> col;
            for (std::size_t k = 0; k < m; ++k)
                if (k != row)
                    col.push_back(cols[c][k]);
            minor.push_back(std::move(col));
        }
        Jet term = cols[0][row] * jet_determinant(minor);
        if (row % 2)
            term = -term;
        if (first) {
            acc = term;
            first = false;
        } else {
            acc += term;
        }
    }
    return acc;
}

std::vector<std::vector<Jet>> differential_jets(const PointEval& at) {
    if (at.order < 1)
        throw EvalError("differential needs a jet of order >= 1");
    const int n = static_cast<int>(at.coords.size());
    std::vector<std::vector<Jet>> cols(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (const auto& fk : at.f)
            cols[i].push_back(fk.diff(i));
    return cols;
}

std::vector<Eigen::VectorXd> differential(const PointEval& at) {
    if (at.order < 1)
        throw EvalError("differential needs a jet of order >= 1");
    const int n = static_cast<int>(at.coords.size());
    const int m = static_cast<int>(at.f.size());
    std::vector<Eigen::VectorXd> out(static_cast<std::size_t>(n), Eigen::VectorXd(m));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < m; ++k)
            out[i][k] = at.f[k].d(i);
    return out;
}

Eigen::MatrixXd differential_matrix(const PointEval& at) {
    const auto cols = differential(at);
    Eigen::MatrixXd J(at.f.size(), cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i)
        J.col(static_cast<long>(i)) = cols[i];
    return J;
}

LambdaValue signed_volume_density(const FrontalScene& scene, const PointEval& at) {
    const auto fcols = differential_jets(at);
    const int n = scene.n();
    Jet lam;
    if (n == 1) {
        // det(g', E_1..E_r) = g' . e with e the cofactor (or supplied) tangent
        const auto& e = at.tangent;
        lam = fcols[0][0] * e[0].truncated(at.order - 1);
        for (std::size_t k = 1; k < e.size(); ++k)
            lam += fcols[0][k] * e[k].truncated(at.order - 1);
    } else {
        if (at.frame.empty())
            throw FrameError("scene has no normal frame");
        auto cols = fcols;
        for (const auto& v : at.frame) {
            std::vector<Jet> col;
            for (const auto& c : v)
                col.push_back(c.truncated(at.order - 1));
            cols.push_back(std::move(col));
        }
        lam = jet_determinant(cols);
    }
    lam *= static_cast<double>(scene.spec().orientation_sign);

    LambdaValue out;
    out.jet = lam;
    out.value = lam.value();
    if (lam.order() >= 1) {
        out.gradient.resize(n);
        for (int i = 0; i < n; ++i)
            out.gradient[i] = lam.d(i);
    }
    if (lam.order() >= 2) {
        out.hessian.resize(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out.hessian(i, j) = lam.d2(i, j);
    }
    return out;
}

bool is_regular(const FrontalScene& scene, int chart, double lambda) {
    return std::abs(lambda) > kRegularityThreshold * scene.scale(chart).lambda_max;
}

namespace {

Eigen::VectorXd values(const std::vector<Jet>& v) {
    Eigen::VectorXd x(static_cast<long>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k)
        x[static_cast<long>(k)] = v[k].value();
    return x;
}

} // namespace

ValidationReport frontal_validate(const FrontalScene& scene, int samples_per_axis) {
    ValidationReport rep;
    const int n = scene.n();
    const int s = std::max(samples_per_axis, 2);
    for (int ci = 0; ci < scene.chart_count(); ++ci) {
        const auto& chart = scene.chart(ci);
        const bool supplied_tangent = !chart.tangent.empty();
        const double lam_scale = scene.scale(ci).lambda_max;
        // node grid (s+1)^n over the core
        int total = 1;
        for (int i = 0; i < n; ++i)
            total *= (s + 1);
        std::vector<char> vanish(static_cast<std::size_t>(total), 0);
        std::vector<double> u(static_cast<std::size_t>(n));
        for (int lin = 0; lin < total; ++lin) {
            int rem = lin;
            for (int i = 0; i < n; ++i) {
                const int k = rem % (s + 1);
                rem /= (s + 1);
                u[i] = chart.core[i].lo + chart.core[i].width() * k / s;
            }
            PointEval pe;
            try {
                pe = scene.evaluate(ci, u, 1);
            } catch (const EvalError& e) {
                rep.failures.push_back("chart '" + chart.id + "': evaluation failed: " + e.what());
                continue;
            }
            ++rep.samples;
            const auto df = differential(pe);
            for (std::size_t a = 0; a < pe.frame.size(); ++a) {
                const Eigen::VectorXd Ea = values(pe.frame[a]);
                rep.max_norm_error = std::max(rep.max_norm_error, std::abs(Ea.norm() - 1.0));
                for (std::size_t b = a + 1; b < pe.frame.size(); ++b)
                    rep.max_orthogonality_error =
                        std::max(rep.max_orthogonality_error, std::abs(Ea.dot(values(pe.frame[b]))));
                for (const auto& fi : df)
                    rep.max_tangency_error = std::max(
                        rep.max_tangency_error, std::abs(fi.dot(Ea)) / std::max(1.0, fi.norm()));
            }
            if (supplied_tangent) {
                const Eigen::VectorXd e = values(pe.tangent);
                rep.max_norm_error = std::max(rep.max_norm_error, std::abs(e.norm() - 1.0));
                const double g = df[0].norm();
                if (g > 1e-6) {
                    const Eigen::VectorXd perp = df[0] - df[0].dot(e) * e;
                    rep.max_parallel_error = std::max(rep.max_parallel_error, perp.norm() / g);
                }
            }
            const double lam = signed_volume_density(scene, pe).value;
            vanish[static_cast<std::size_t>(lin)] = std::abs(lam) <= 1e-14 * std::max(lam_scale, 1e-300);
        }
        // a cell whose corners all vanish means lambda is identically zero there
        int cells = 1;
        for (int i = 0; i < n; ++i)
            cells *= s;
        for (int cell = 0; cell < cells; ++cell) {
            std::vector<int> base(static_cast<std::size_t>(n));
            int rem = cell;
            for (int i = 0; i < n; ++i) {
                base[i] = rem % s;
                rem /= s;
            }
            bool all = true;
            for (int corner = 0; corner < (1 << n) && all; ++corner) {
                int lin = 0, stride = 1;
                for (int i = 0; i < n; ++i) {
                    lin += (base[i] + ((corner >> i) & 1)) * stride;
                    stride *= (s + 1);
                }
                all = vanish[static_cast<std::size_t>(lin)] != 0;
            }
            if (all)
                ++rep.vanishing_cells;
        }
    }
    auto check = [&](double v, const char* what) {
        if (!(v < kFrameTolerance))
            rep.failures.push_back(std::string(what) + " violation " + format_number(v));
    };
    check(rep.max_norm_error, "frame norm");
    check(rep.max_orthogonality_error, "frame orthogonality");
    check(rep.max_tangency_error, "frame tangency");
    check(rep.max_parallel_error, "tangent parallelism");
    if (rep.vanishing_cells > 0)
        rep.failures.push_back("lambda vanishes identically on " +
                               std::to_string(rep.vanishing_cells) + " grid cells");
    return rep;
}

Eigen::MatrixXd shape_operator(const FrontalScene& scene, const PointEval& at,
                               const Eigen::VectorXd& coeffs) {
    const int n = scene.n();
    const int m = scene.m();
    if (at.frame.size() != static_cast<std::size_t>(coeffs.size()))
        throw FrameError("normal coefficients do not match the frame size");
    const auto df = differential(at);
    Eigen::MatrixXd G(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            G(i, j) = df[i].dot(df[j]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
    const auto& sv = svd.singularValues();
    if (sv[n - 1] <= 0.0 || sv[0] / sv[n - 1] > kGramConditionLimit)
        throw RegularityError("shape operator requested at a singular point");
    // M(i, j) = <d_i xi, f_j>
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd dxi = Eigen::VectorXd::Zero(m);
        for (std::size_t a = 0; a < at.frame.size(); ++a)
            for (int k = 0; k < m; ++k)
                dxi[k] += coeffs[static_cast<long>(a)] * at.frame[a][k].d(i);
        for (int j = 0; j < n; ++j)
            M(i, j) = dxi.dot(df[j]);
    }
    return -G.ldlt().solve(M.transpose());
}

double lipschitz_killing(const FrontalScene& scene, const PointEval& at,
                         const Eigen::VectorXd& coeffs) {
    return shape_operator(scene, at, coeffs).determinant();
}

double gauss_pullback_density(const FrontalScene& scene, const PointEval& at) {
    if (scene.n() != 2 || scene.r() != 1)
        throw EvalError("pullback density is defined for surfaces of codimension one");
    const auto& N = at.frame.at(0);
    Eigen::Matrix3d D;
    for (int k = 0; k < 3; ++k) {
        D(k, 0) = N[k].d(0);
        D(k, 1) = N[k].d(1);
        D(k, 2) = N[k].value();
    }
    return scene.spec().orientation_sign * D.determinant();
}

double curvature_from_derivatives(const Eigen::VectorXd& d1, const Eigen::VectorXd& d2) {
    const double a = d1.squaredNorm();
    const double b = d2.squaredNorm();
    const double c = d1.dot(d2);
    const double num = std::sqrt(std::max(0.0, b * a - c * c));
    return num / (a * std::sqrt(a));
}

double curve_curvature(const FrontalScene& scene, int chart, double t) {
    if (scene.n() != 1)
        throw EvalError("curve curvature needs a curve");
    const double u[1] = {t};
    const PointEval pe = scene.evaluate(chart, u, 2);
    const double lam = signed_volume_density(scene, pe).value;
    if (!is_regular(scene, chart, lam))
        throw RegularityError("curvature requested at a singular parameter");
    const int m = scene.m();
    Eigen::VectorXd d1(m), d2(m);
    for (int k = 0; k < m; ++k) {
        d1[k] = pe.f[k].d(0);
        d2[k] = pe.f[k].d2(0, 0);
    }
    return curvature_from_derivatives(d1, d2);
}

double curve_turn_density(const FrontalScene& scene, int chart, double t) {
    if (scene.n() != 1)
        throw EvalError("turn density needs a curve");
    const double u[1] = {t};
    const PointEval pe = scene.evaluate(chart, u, 1);
    double s = 0.0;
    for (const auto& e : pe.tangent)
        s += e.d(0) * e.d(0);
    return std::sqrt(s);
}

} // namespace frontal
