#include "frontal/singular.hpp"

#include "frontal/errors.hpp"
#include "frontal/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace frontal {

namespace {

// Interior grid nodes are shifted off the symmetric lines of the chart by this
// fraction of a cell.
constexpr double kGridOffset = 0.3819660112501051;
constexpr double kChainThreshold = 1e-4;
constexpr double kRankThreshold = 1e-6;
constexpr double kStitchTolerance = 1e-7;

Eigen::VectorXd image_of(const PointEval& pe) {
    Eigen::VectorXd x(static_cast<long>(pe.f.size()));
    for (std::size_t k = 0; k < pe.f.size(); ++k)
        x[static_cast<long>(k)] = pe.f[k].value();
    return x;
}

double lambda_value(const FrontalScene& scene, int chart, std::span<const double> u) {
    return signed_volume_density(scene, scene.evaluate(chart, u, 1)).value;
}

bool is_cyclic(const Chart& c, int axis) {
    return c.periodic[axis] &&
           std::abs(c.core[axis].width() - c.box[axis].width()) <= 1e-12 * c.box[axis].width();
}

// Root of lambda on the segment p + s (q - p), s in [0, 1], given a sign change.
std::vector<double> edge_root(const FrontalScene& scene, int chart, const std::vector<double>& p,
                              const std::vector<double>& q, double lp, double lq) {
    const std::size_t n = p.size();
    const double tol = 1e-13 * std::max(scene.scale(chart).lambda_max, 1e-300);
    double s0 = 0.0, s1 = 1.0;
    double g0 = lp;
    (void)lq;
    double s = (lp == lq) ? 0.5 : std::clamp(lp / (lp - lq), 0.0, 1.0);
    std::vector<double> u(n);
    auto at = [&](double t) {
        for (std::size_t i = 0; i < n; ++i)
            u[i] = p[i] + t * (q[i] - p[i]);
    };
    for (int it = 0; it < 80; ++it) {
        at(s);
        const auto lam = signed_volume_density(scene, scene.evaluate(chart, u, 2));
        const double g = lam.value;
        if (std::abs(g) <= tol)
            break;
        // keep the bracket: g0 has the sign class of the s0 end
        if ((g >= 0.0) == (g0 >= 0.0)) {
            s0 = s;
            g0 = g;
        } else {
            s1 = s;
        }
        double dg = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            dg += lam.gradient[static_cast<long>(i)] * (q[i] - p[i]);
        double next = (dg != 0.0) ? s - g / dg : 0.5 * (s0 + s1);
        if (!(next > s0 && next < s1))
            next = 0.5 * (s0 + s1);
        if (std::abs(s1 - s0) <= 4.0 * std::numeric_limits<double>::epsilon()) {
            s = 0.5 * (s0 + s1);
            break;
        }
        s = next;
    }
    at(s);
    return u;
}

struct AxisGrid {
    std::vector<double> nodes;
    bool cyclic = false;
    double period = 0.0;

    int cells() const { return cyclic ? static_cast<int>(nodes.size()) : static_cast<int>(nodes.size()) - 1; }
    int count() const { return static_cast<int>(nodes.size()); }
    // coordinate of node k as reached from cell k-1 (unwrapped across the seam)
    double coord(int k) const {
        if (cyclic && k == count())
            return nodes[0] + period;
        return nodes[static_cast<std::size_t>(k)];
    }
    int index(int k) const { return (cyclic && k == count()) ? 0 : k; }
};

AxisGrid make_axis(const Chart& c, int axis, int cells) {
    AxisGrid g;
    const Interval core = c.core[axis];
    g.cyclic = is_cyclic(c, axis);
    g.period = c.box[axis].width();
    if (g.cyclic) {
        for (int i = 0; i < cells; ++i)
            g.nodes.push_back(core.lo + core.width() * (i + kGridOffset) / cells);
    } else {
        g.nodes.push_back(core.lo);
        for (int i = 0; i < cells; ++i)
            g.nodes.push_back(core.lo + core.width() * (i + kGridOffset) / cells);
        g.nodes.push_back(core.hi);
    }
    return g;
}

struct ChartTrace {
    std::vector<std::vector<std::vector<double>>> open;
    std::vector<std::vector<std::vector<double>>> closed;
    bool hidden = false;
};

ChartTrace trace_chart(const FrontalScene& scene, int ci, int N) {
    const Chart& chart = scene.chart(ci);
    const AxisGrid gx = make_axis(chart, 0, N);
    const AxisGrid gy = make_axis(chart, 1, N);
    const int nx = gx.count(), ny = gy.count();
    const int cx = gx.cells(), cy = gy.cells();

    std::vector<double> val(static_cast<std::size_t>(nx) * ny);
    parallel_for(static_cast<std::size_t>(nx), [&](std::size_t i) {
        for (int j = 0; j < ny; ++j) {
            const double u[2] = {gx.nodes[i], gy.nodes[static_cast<std::size_t>(j)]};
            val[i * ny + static_cast<std::size_t>(j)] = lambda_value(scene, ci, u);
        }
    });
    auto V = [&](int i, int j) { return val[static_cast<std::size_t>(gx.index(i)) * ny + gy.index(j)]; };
    auto cls = [&](int i, int j) { return V(i, j) >= 0.0; };

    const long hcount = static_cast<long>(cx) * ny;
    auto hid = [&](int i, int j) { return static_cast<long>(i) * ny + gy.index(j); };
    auto vid = [&](int i, int j) { return hcount + static_cast<long>(gx.index(i)) * cy + j; };

    struct Edge {
        long id;
        std::vector<double> p, q;
        double lp, lq;
    };
    std::vector<Edge> edges;
    for (int i = 0; i < cx; ++i)
        for (int j = 0; j < ny; ++j)
            if (cls(i, j) != cls(i + 1, j))
                edges.push_back({hid(i, j), {gx.coord(i), gy.nodes[static_cast<std::size_t>(j)]},
                                 {gx.coord(i + 1), gy.nodes[static_cast<std::size_t>(j)]}, V(i, j), V(i + 1, j)});
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < cy; ++j)
            if (cls(i, j) != cls(i, j + 1))
                edges.push_back({vid(i, j), {gx.nodes[static_cast<std::size_t>(i)], gy.coord(j)},
                                 {gx.nodes[static_cast<std::size_t>(i)], gy.coord(j + 1)}, V(i, j), V(i, j + 1)});
    std::vector<std::vector<double>> roots(edges.size());
    parallel_for(edges.size(), [&](std::size_t k) {
        const Edge& e = edges[k];
        roots[k] = scene.wrap(ci, edge_root(scene, ci, e.p, e.q, e.lp, e.lq));
    });
    std::unordered_map<long, std::size_t> root_of;
    for (std::size_t k = 0; k < edges.size(); ++k)
        root_of.emplace(edges[k].id, k);

    ChartTrace out;
    const double grad = scene.scale(ci).grad_max;
    std::vector<std::array<long, 2>> segs;
    for (int i = 0; i < cx; ++i) {
        for (int j = 0; j < cy; ++j) {
            const bool c0 = cls(i, j), c1 = cls(i + 1, j), c2 = cls(i + 1, j + 1), c3 = cls(i, j + 1);
            const long e[4] = {hid(i, j), vid(i + 1, j), hid(i, j + 1), vid(i, j)};
            const bool x[4] = {c0 != c1, c1 != c2, c3 != c2, c0 != c3};
            const int crossed = x[0] + x[1] + x[2] + x[3];
            if (crossed == 2) {
                long a = -1, b = -1;
                for (int k = 0; k < 4; ++k)
                    if (x[k]) {
                        if (a < 0)
                            a = e[k];
                        else
                            b = e[k];
                    }
                segs.push_back({a, b});
            } else if (crossed == 4) {
                const double u[2] = {0.5 * (gx.coord(i) + gx.coord(i + 1)), 0.5 * (gy.coord(j) + gy.coord(j + 1))};
                const bool cc = lambda_value(scene, ci, u) >= 0.0;
                if (cc == c0) {
                    segs.push_back({e[0], e[1]});
                    segs.push_back({e[2], e[3]});
                } else {
                    segs.push_back({e[3], e[0]});
                    segs.push_back({e[1], e[2]});
                }
            } else if (!out.hidden) {
                // a pair of crossings can hide inside a cell whose corners agree
                const double w = gx.coord(i + 1) - gx.coord(i), h = gy.coord(j + 1) - gy.coord(j);
                const double lmin = std::min({std::abs(V(i, j)), std::abs(V(i + 1, j)),
                                              std::abs(V(i + 1, j + 1)), std::abs(V(i, j + 1))});
                if (lmin < std::hypot(w, h) * grad) {
                    for (int a = 1; a <= 3 && !out.hidden; ++a)
                        for (int b = 1; b <= 3 && !out.hidden; ++b) {
                            const double u[2] = {gx.coord(i) + w * a / 4.0, gy.coord(j) + h * b / 4.0};
                            if ((lambda_value(scene, ci, u) >= 0.0) != c0)
                                out.hidden = true;
                        }
                }
            }
        }
    }

    std::unordered_map<long, std::vector<int>> adj;
    for (std::size_t s = 0; s < segs.size(); ++s) {
        adj[segs[s][0]].push_back(static_cast<int>(s));
        adj[segs[s][1]].push_back(static_cast<int>(s));
    }
    std::vector<char> used(segs.size(), 0);
    auto walk = [&](long start) {
        std::vector<long> chain{start};
        long cur = start;
        for (;;) {
            int next = -1;
            for (int s : adj[cur])
                if (!used[static_cast<std::size_t>(s)]) {
                    next = s;
                    break;
                }
            if (next < 0)
                break;
            used[static_cast<std::size_t>(next)] = 1;
            cur = segs[static_cast<std::size_t>(next)][0] == cur ? segs[static_cast<std::size_t>(next)][1]
                                                                 : segs[static_cast<std::size_t>(next)][0];
            chain.push_back(cur);
        }
        return chain;
    };
    auto to_coords = [&](const std::vector<long>& chain) {
        std::vector<std::vector<double>> pts;
        for (long id : chain)
            pts.push_back(roots[root_of.at(id)]);
        return pts;
    };
    // open chains start at boundary edges (degree one); deterministic order by edge id
    std::vector<long> ends;
    for (const auto& [id, list] : adj)
        if (list.size() == 1)
            ends.push_back(id);
    std::sort(ends.begin(), ends.end());
    for (long id : ends) {
        if (used[static_cast<std::size_t>(adj[id][0])])
            continue;
        out.open.push_back(to_coords(walk(id)));
    }
    for (std::size_t s = 0; s < segs.size(); ++s) {
        if (used[s])
            continue;
        auto chain = walk(segs[s][0]);
        if (chain.size() > 1 && chain.front() == chain.back())
            chain.pop_back();
        out.closed.push_back(to_coords(chain));
    }
    return out;
}

struct Vertex {
    int chart;
    std::vector<double> u;
    Eigen::VectorXd x;
};

using Piece = std::vector<Vertex>;

double end_distance(const Vertex& a, const Vertex& b) { return (a.x - b.x).norm(); }

std::optional<int> ak_from_ratio(PointKind kind) {
    if (kind == PointKind::First)
        return 1;
    return std::nullopt;
}

} // namespace

const char* kind_name(PointKind k) {
    switch (k) {
    case PointKind::First: return "first";
    case PointKind::Second: return "second";
    case PointKind::Degenerate: return "degenerate";
    }
    return "degenerate";
}

const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::Admissible: return "admissible";
    case Verdict::NotAdmissible: return "not admissible";
    case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

bool SingularCurve::segment_valid(std::size_t i) const {
    if (i >= segment_count())
        return false;
    const auto& a = vertices[i];
    const auto& b = vertices[(i + 1) % vertices.size()];
    return a.chart == b.chart && (a.image - b.image).norm() > 1e-13;
}

Eigen::VectorXd chart_delta(const FrontalScene& scene, int chart, std::span<const double> a,
                            std::span<const double> b) {
    const Chart& c = scene.chart(chart);
    Eigen::VectorXd d(static_cast<long>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        double v = b[i] - a[i];
        if (c.periodic[i]) {
            const double w = c.box[i].width();
            v -= w * std::round(v / w);
        }
        d[static_cast<long>(i)] = v;
    }
    return d;
}

NullDirection null_direction(const FrontalScene& scene, const PointEval& at,
                             const Eigen::VectorXd* reference) {
    const int n = scene.n();
    const Eigen::MatrixXd J = differential_matrix(at);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullV);
    NullDirection nd;
    nd.singular_values = svd.singularValues();
    nd.eta = svd.matrixV().col(n - 1);
    if (n >= 2)
        nd.ambiguous = nd.singular_values[n - 1] * 10.0 > nd.singular_values[n - 2];
    if (reference && reference->size() == n) {
        if (nd.eta.dot(*reference) < 0.0)
            nd.eta = -nd.eta;
        return nd;
    }
    double along = 0.0, gnorm = 0.0;
    if (at.order >= 2) {
        const auto lam = signed_volume_density(scene, at);
        along = nd.eta.dot(lam.gradient);
        gnorm = lam.gradient.norm();
    }
    if (std::abs(along) > 1e-12 * gnorm && gnorm > 0.0) {
        if (along < 0.0)
            nd.eta = -nd.eta;
    } else {
        for (int i = 0; i < n; ++i)
            if (std::abs(nd.eta[i]) > 1e-12) {
                if (nd.eta[i] < 0.0)
                    nd.eta = -nd.eta;
                break;
            }
    }
    return nd;
}

double lambda_eta(const FrontalScene& scene, int chart, std::span<const double> u,
                  const Eigen::VectorXd& reference) {
    const PointEval pe = scene.evaluate(chart, u, 2);
    const auto lam = signed_volume_density(scene, pe);
    const auto nd = null_direction(scene, pe, &reference);
    return lam.gradient.dot(nd.eta);
}

PointKind classify_kind(const FrontalScene& scene, const SingularPoint& p) {
    const double g = p.gradient.norm();
    if (g < kDegeneracyThreshold * scene.scale(p.chart).grad_max)
        return PointKind::Degenerate;
    if (scene.n() == 1)
        return PointKind::First;
    return std::abs(p.null_direction.dot(p.gradient)) / g > kKindThreshold ? PointKind::First
                                                                           : PointKind::Second;
}

namespace {

Eigen::VectorXd gradient_of_lambda1(const FrontalScene& scene, int chart, std::span<const double> u,
                                    const Eigen::VectorXd& ref) {
    const int n = scene.n();
    constexpr double h = 1e-6;
    Eigen::VectorXd g(n);
    std::vector<double> v(u.begin(), u.end());
    for (int i = 0; i < n; ++i) {
        v[i] = u[i] + h;
        const double fp = lambda_eta(scene, chart, v, ref);
        v[i] = u[i] - h;
        const double fm = lambda_eta(scene, chart, v, ref);
        v[i] = u[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

} // namespace

AkResult ak_classify(const FrontalScene& scene, const SingularPoint& p, int k_max) {
    AkResult r;
    const int n = scene.n();
    const PointEval pe = scene.evaluate(p.chart, p.coords, 2);
    const auto lam = signed_volume_density(scene, pe);
    const double g = lam.gradient.norm();
    r.lambda0 = lam.value;
    if (g < kDegeneracyThreshold * scene.scale(p.chart).grad_max || g == 0.0)
        return r;
    const Eigen::VectorXd eta = null_direction(scene, pe, &p.null_direction).eta;
    r.lambda1 = lam.gradient.dot(eta);
    r.jacobian_rank = 1;
    if (std::abs(r.lambda1) / g > kKindThreshold || n == 1) {
        // for curves every non-degenerate point has lambda' = grad lambda != 0
        r.k = 1;
        return r;
    }
    if (k_max < 2)
        return r;

    auto diff = [&](double h) {
        std::vector<double> a(p.coords), b(p.coords);
        for (int i = 0; i < n; ++i) {
            a[i] += h * eta[i];
            b[i] -= h * eta[i];
        }
        return (lambda_eta(scene, p.chart, a, eta) - lambda_eta(scene, p.chart, b, eta)) / (2.0 * h);
    };
    constexpr double h = 1e-5;
    r.lambda2 = (4.0 * diff(0.5 * h) - diff(h)) / 3.0;

    Eigen::MatrixXd J(2, n);
    J.row(0) = lam.gradient.transpose() / g;
    const Eigen::VectorXd g1 = gradient_of_lambda1(scene, p.chart, p.coords, eta);
    const double g1n = g1.norm();
    if (g1n == 0.0)
        return r;
    J.row(1) = g1.transpose() / g1n;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    const double ratio = svd.singularValues()[1] / svd.singularValues()[0];
    r.jacobian_rank = ratio > kRankThreshold ? 2 : 1;
    const double chain = std::abs(r.lambda2) / g;
    if ((ratio > kRankThreshold * 0.1 && ratio < kRankThreshold * 10.0) ||
        (chain > kChainThreshold * 0.1 && chain < kChainThreshold * 10.0))
        r.inconclusive = true;
    if (chain > kChainThreshold && r.jacobian_rank == 2)
        r.k = 2;
    return r;
}

SingularPoint analyze_point(const FrontalScene& scene, int chart, std::span<const double> coords) {
    SingularPoint p;
    p.chart = chart;
    p.coords.assign(coords.begin(), coords.end());
    const PointEval pe = scene.evaluate(chart, coords, 2);
    const auto lam = signed_volume_density(scene, pe);
    p.image = image_of(pe);
    p.lambda = lam.value;
    p.gradient = lam.gradient;
    const auto nd = null_direction(scene, pe);
    p.null_direction = nd.eta;
    const int n = scene.n();
    const double g = p.gradient.norm();
    p.dlambda_eta = p.gradient.dot(p.null_direction);
    p.kind_ratio = g > 0.0 ? std::abs(p.dlambda_eta) / g : 0.0;
    if (n == 1) {
        p.rank_ok = true;
        double dd = 0.0;
        for (const auto& c : pe.f)
            dd += c.d2(0, 0) * c.d2(0, 0);
        p.cusp = std::sqrt(dd) > kDegeneracyThreshold * scene.scale(chart).grad_max;
    } else {
        const auto& sv = nd.singular_values;
        const double cut = std::sqrt(std::numeric_limits<double>::epsilon()) * sv[0];
        p.rank_ok = sv[n - 1] <= cut && sv[n - 2] > cut;
    }
    p.kind = classify_kind(scene, p);
    if (p.kind == PointKind::Degenerate || nd.ambiguous) {
        p.kind = PointKind::Degenerate;
        return p;
    }
    p.near_tangency = n >= 2 && p.kind_ratio < 10.0 * kKindThreshold;
    if (p.kind == PointKind::First) {
        p.ak = ak_from_ratio(p.kind);
    } else {
        const auto ak = ak_classify(scene, p, 2);
        p.ak = ak.k;
        p.ak_inconclusive = ak.inconclusive;
    }
    return p;
}

std::optional<SingularPoint> refine_second_kind(const FrontalScene& scene, int chart,
                                                std::span<const double> seed) {
    const int n = scene.n();
    if (n < 2)
        return std::nullopt;
    std::vector<double> u(seed.begin(), seed.end());
    Eigen::VectorXd ref = null_direction(scene, scene.evaluate(chart, u, 2)).eta;
    const double lscale = std::max(scene.scale(chart).lambda_max, 1e-300);
    bool ok = false;
    for (int it = 0; it < 40; ++it) {
        const PointEval pe = scene.evaluate(chart, u, 2);
        const auto lam = signed_volume_density(scene, pe);
        ref = null_direction(scene, pe, &ref).eta;
        const double l1 = lam.gradient.dot(ref);
        const double g = lam.gradient.norm();
        if (std::abs(lam.value) <= 1e-13 * lscale && std::abs(l1) <= 1e-11 * g) {
            ok = true;
            break;
        }
        Eigen::MatrixXd J(2, n);
        J.row(0) = lam.gradient.transpose();
        J.row(1) = gradient_of_lambda1(scene, chart, u, ref).transpose();
        const Eigen::Vector2d psi(lam.value, l1);
        const Eigen::VectorXd step = J.completeOrthogonalDecomposition().solve(-psi);
        for (int i = 0; i < n; ++i)
            u[i] += step[i];
        if (!step.allFinite() || step.norm() > 1.0)
            return std::nullopt;
        if (step.norm() < 1e-15) {
            ok = std::abs(lam.value) <= 1e-10 * lscale;
            break;
        }
    }
    if (!ok)
        return std::nullopt;
    const Chart& c = scene.chart(chart);
    for (int i = 0; i < n; ++i)
        if (!c.periodic[i] && (u[i] < c.box[i].lo || u[i] > c.box[i].hi))
            return std::nullopt;
    u = scene.wrap(chart, u);
    SingularPoint p = analyze_point(scene, chart, u);
    if (p.kind == PointKind::First)
        p.kind = PointKind::Second;  // converged onto lambda = lambda' = 0
    return p;
}

SigmaSample sigma_sample(const FrontalScene& scene, int chart, std::span<const double> a,
                         std::span<const double> b, double s, int order) {
    const Eigen::VectorXd d = chart_delta(scene, chart, a, b);
    const double L = d.norm();
    if (!(L > 0.0))
        throw EvalError("degenerate singular-set segment");
    const Eigen::Vector2d m(-d[1] / L, d[0] / L);
    SigmaSample out;
    out.u.assign(a.begin(), a.end());
    const double tol = 1e-14 * std::max(scene.scale(chart).lambda_max, 1e-300);
    double mu = 0.0;
    for (int it = 0; it < 40; ++it) {
        for (int i = 0; i < 2; ++i)
            out.u[i] = a[i] + s * d[i] + mu * m[i];
        const auto lam = signed_volume_density(scene, scene.evaluate(chart, out.u, 2));
        const double gm = lam.gradient.dot(m);
        if (std::abs(lam.value) <= tol || gm == 0.0)
            break;
        const double step = lam.value / gm;
        mu -= step;
        if (std::abs(step) < 1e-16 * (1.0 + std::abs(mu))) {
            for (int i = 0; i < 2; ++i)
                out.u[i] = a[i] + s * d[i] + mu * m[i];
            break;
        }
    }
    out.eval = scene.evaluate(chart, out.u, std::max(order, 2));
    out.lambda = signed_volume_density(scene, out.eval);
    const double gm = out.lambda.gradient.dot(m);
    const double mu1 = -out.lambda.gradient.dot(d) / gm;
    out.du = d + mu1 * Eigen::VectorXd(m);
    const Eigen::MatrixXd J = differential_matrix(out.eval);
    out.image_d1 = J * out.du;
    if (order >= 3) {
        const double mu2 = -(out.du.transpose() * out.lambda.hessian * out.du)(0, 0) / gm;
        out.ddu = mu2 * Eigen::VectorXd(m);
        Eigen::VectorXd second(J.rows());
        for (long k = 0; k < J.rows(); ++k) {
            const Jet& c = out.eval.f[static_cast<std::size_t>(k)];
            double acc = 0.0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    acc += c.d2(i, j) * out.du[i] * out.du[j];
            second[k] = acc;
        }
        out.image_d2 = second + J * out.ddu;
    }
    return out;
}

std::vector<SingularPoint> detect_singular_points_curve(const FrontalScene& scene, int grid) {
    if (scene.n() != 1)
        throw EvalError("curve detection needs a curve scene");
    std::vector<SingularPoint> out;
    for (int ci = 0; ci < scene.chart_count(); ++ci) {
        const Chart& chart = scene.chart(ci);
        const AxisGrid ax = make_axis(chart, 0, grid);
        const int nn = ax.count(), nc = ax.cells();
        std::vector<double> val(static_cast<std::size_t>(nn));
        parallel_for(val.size(), [&](std::size_t i) {
            const double u[1] = {ax.nodes[i]};
            val[i] = lambda_value(scene, ci, u);
        });
        const double grad = scene.scale(ci).grad_max;
        const double lscale = std::max(scene.scale(ci).lambda_max, 1e-300);
        std::vector<std::vector<double>> brackets;
        for (int k = 0; k < nc; ++k) {
            const double a = ax.coord(k), b = ax.coord(k + 1);
            const double la = val[static_cast<std::size_t>(ax.index(k))];
            const double lb = val[static_cast<std::size_t>(ax.index(k + 1))];
            const bool change = (la >= 0.0) != (lb >= 0.0);
            if (!change && std::min(std::abs(la), std::abs(lb)) >= (b - a) * grad)
                continue;
            // two refinement levels of 16 sub-cells each
            constexpr int sub = 256;
            std::vector<double> sv(sub + 1);
            sv[0] = la;
            sv[sub] = lb;
            for (int s = 1; s < sub; ++s) {
                const double u[1] = {a + (b - a) * s / sub};
                sv[static_cast<std::size_t>(s)] = lambda_value(scene, ci, u);
            }
            int changes = 0, where = -1;
            for (int s = 0; s < sub; ++s)
                if ((sv[static_cast<std::size_t>(s)] >= 0.0) != (sv[static_cast<std::size_t>(s) + 1] >= 0.0)) {
                    ++changes;
                    where = s;
                }
            if (changes > 1 || (!change && changes > 0))
                throw ResolutionError("chart '" + chart.id + "': several roots of lambda near t = " +
                                      format_number(a) + "; use a finer curve grid");
            if (changes == 1)
                brackets.push_back({a + (b - a) * where / sub, a + (b - a) * (where + 1) / sub,
                                    sv[static_cast<std::size_t>(where)],
                                    sv[static_cast<std::size_t>(where) + 1]});
        }
        std::vector<SingularPoint> pts(brackets.size());
        parallel_for(brackets.size(), [&](std::size_t k) {
            const auto& br = brackets[k];
            double lo = br[0], hi = br[1];
            const bool lo_pos = br[2] >= 0.0;
            double t = (br[2] == br[3]) ? 0.5 * (lo + hi) : std::clamp(lo + (hi - lo) * br[2] / (br[2] - br[3]), lo, hi);
            for (int it = 0; it < 100; ++it) {
                const double u[1] = {t};
                const auto lam = signed_volume_density(scene, scene.evaluate(ci, u, 2));
                if (std::abs(lam.value) <= 1e-13 * lscale)
                    break;
                if ((lam.value >= 0.0) == lo_pos)
                    lo = t;
                else
                    hi = t;
                double next = t - lam.value / lam.gradient[0];
                if (!(next > lo && next < hi))
                    next = 0.5 * (lo + hi);
                if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
                    break;
                t = next;
            }
            const double u[1] = {t};
            pts[k] = analyze_point(scene, ci, scene.wrap(ci, u));
        });
        for (auto& p : pts)
            if (!is_cyclic(chart, 0) && (p.coords[0] < chart.core[0].lo || p.coords[0] >= chart.core[0].hi))
                continue;
            else
                out.push_back(std::move(p));
    }
    std::sort(out.begin(), out.end(), [](const SingularPoint& a, const SingularPoint& b) {
        if (a.chart != b.chart)
            return a.chart < b.chart;
        return a.coords[0] < b.coords[0];
    });
    return out;
}

std::vector<SingularCurve> detect_singular_curves(const FrontalScene& scene, int grid, bool* refined) {
    if (scene.n() != 2)
        throw EvalError("curve tracing needs a surface scene");
    std::vector<Piece> open, closed;
    bool any_refined = false;
    for (int ci = 0; ci < scene.chart_count(); ++ci) {
        ChartTrace tr = trace_chart(scene, ci, grid);
        if (tr.hidden) {
            tr = trace_chart(scene, ci, 4 * grid);
            any_refined = true;
        }
        auto convert = [&](const std::vector<std::vector<double>>& pts) {
            Piece piece;
            for (const auto& u : pts)
                piece.push_back({ci, u, scene.position(ci, u)});
            return piece;
        };
        for (const auto& pl : tr.open)
            open.push_back(convert(pl));
        for (const auto& pl : tr.closed)
            closed.push_back(convert(pl));
    }
    if (refined)
        *refined = any_refined;

    std::vector<std::pair<Piece, bool>> curves;
    for (auto& p : closed)
        curves.emplace_back(std::move(p), true);
    std::vector<char> taken(open.size(), 0);
    for (std::size_t start = 0; start < open.size(); ++start) {
        if (taken[start])
            continue;
        taken[start] = 1;
        Piece cur = open[start];
        bool is_closed = false;
        for (int pass = 0; pass < 2 && !is_closed; ++pass) {
            for (;;) {
                if (cur.size() > 2 && end_distance(cur.back(), cur.front()) < kStitchTolerance &&
                    cur.back().chart != cur.front().chart) {
                    is_closed = true;
                    break;
                }
                double best = kStitchTolerance;
                std::size_t best_j = open.size();
                bool reverse = false;
                for (std::size_t j = 0; j < open.size(); ++j) {
                    if (taken[j])
                        continue;
                    const double dh = end_distance(cur.back(), open[j].front());
                    const double dt = end_distance(cur.back(), open[j].back());
                    if (dh < best) {
                        best = dh;
                        best_j = j;
                        reverse = false;
                    }
                    if (dt < best) {
                        best = dt;
                        best_j = j;
                        reverse = true;
                    }
                }
                if (best_j == open.size())
                    break;
                taken[best_j] = 1;
                Piece next = open[best_j];
                if (reverse)
                    std::reverse(next.begin(), next.end());
                cur.insert(cur.end(), next.begin(), next.end());
            }
            if (!is_closed)
                std::reverse(cur.begin(), cur.end());
        }
        if (!is_closed) {
            if (scene.closed())
                throw TracingError("singular curve ends inside the domain near " +
                                   format_number(cur.front().x[0]) + ", " + format_number(cur.front().x[1]) +
                                   " (chart '" + scene.chart(cur.front().chart).id + "')");
            std::reverse(cur.begin(), cur.end());
        }
        curves.emplace_back(std::move(cur), is_closed);
    }

    std::vector<SingularCurve> out;
    for (auto& [piece, is_closed] : curves) {
        SingularCurve c;
        c.closed = is_closed;
        c.vertices.resize(piece.size());
        parallel_for(piece.size(), [&](std::size_t i) {
            c.vertices[i] = analyze_point(scene, piece[i].chart, piece[i].u);
        });
        const std::size_t nv = c.vertices.size();
        c.tangents.resize(nv);
        c.arc_length.assign(nv, 0.0);
        for (std::size_t i = 0; i < nv; ++i) {
            const auto& v = c.vertices[i];
            Eigen::VectorXd t(2);
            t << -v.gradient[1], v.gradient[0];
            const double tn = t.norm();
            if (tn > 0.0)
                t /= tn;
            Eigen::VectorXd dir = Eigen::VectorXd::Zero(2);
            if (c.segment_valid(i))
                dir = chart_delta(scene, v.chart, v.coords, c.vertices[(i + 1) % nv].coords);
            else if (i > 0 && c.segment_valid(i - 1))
                dir = chart_delta(scene, v.chart, c.vertices[i - 1].coords, v.coords);
            else if (i == 0 && c.closed && c.segment_valid(nv - 1))
                dir = chart_delta(scene, v.chart, c.vertices[nv - 1].coords, v.coords);
            if (t.dot(dir) < 0.0)
                t = -t;
            c.tangents[i] = t;
        }
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < nv; ++i) {
            acc += (c.vertices[i + 1].image - c.vertices[i].image).norm();
            c.arc_length[i + 1] = acc;
        }
        for (std::size_t i = 0; i < c.segment_count(); ++i)
            if (c.segment_valid(i))
                c.step_bound = std::max(c.step_bound, chart_delta(scene, c.vertices[i].chart, c.vertices[i].coords,
                                                                  c.vertices[(i + 1) % nv].coords)
                                                          .norm());
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<SingularPoint> sample_singular_set(const FrontalScene& scene, int lines, int cells) {
    const int n = scene.n();
    if (n != 3)
        throw EvalError("singular-set sampling is for 3-dimensional domains");
    struct Line {
        int chart, axis;
        std::vector<double> base;
    };
    std::vector<Line> all;
    for (int ci = 0; ci < scene.chart_count(); ++ci) {
        const Chart& c = scene.chart(ci);
        for (int axis = 0; axis < 3; ++axis) {
            const int b = (axis + 1) % 3, d = (axis + 2) % 3;
            for (int i = 0; i < lines; ++i)
                for (int j = 0; j < lines; ++j) {
                    std::vector<double> u(3);
                    u[b] = c.core[b].lo + c.core[b].width() * (i + 0.5) / lines;
                    u[d] = c.core[d].lo + c.core[d].width() * (j + 0.5) / lines;
                    all.push_back({ci, axis, u});
                }
        }
    }
    std::vector<std::vector<SingularPoint>> found(all.size());
    parallel_for(all.size(), [&](std::size_t li) {
        const Line& L = all[li];
        const Chart& c = scene.chart(L.chart);
        const Interval core = c.core[L.axis];
        const double lscale = std::max(scene.scale(L.chart).lambda_max, 1e-300);
        std::vector<double> u = L.base;
        auto lam_at = [&](double s) {
            u[L.axis] = s;
            return lambda_value(scene, L.chart, u);
        };
        double prev_s = core.lo, prev = lam_at(core.lo);
        for (int k = 1; k <= cells; ++k) {
            const double s = core.lo + core.width() * k / cells;
            const double cur = lam_at(s);
            if ((prev >= 0.0) != (cur >= 0.0)) {
                double lo = prev_s, hi = s;
                const bool lo_pos = prev >= 0.0;
                double t = std::clamp(lo + (hi - lo) * prev / (prev - cur), lo, hi);
                for (int it = 0; it < 100; ++it) {
                    u[L.axis] = t;
                    const auto lam = signed_volume_density(scene, scene.evaluate(L.chart, u, 2));
                    if (std::abs(lam.value) <= 1e-13 * lscale)
                        break;
                    if ((lam.value >= 0.0) == lo_pos)
                        lo = t;
                    else
                        hi = t;
                    double next = t - lam.value / lam.gradient[L.axis];
                    if (!(next > lo && next < hi))
                        next = 0.5 * (lo + hi);
                    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
                        break;
                    t = next;
                }
                u[L.axis] = t;
                found[li].push_back(analyze_point(scene, L.chart, u));
            }
            prev_s = s;
            prev = cur;
        }
    });
    std::vector<SingularPoint> out;
    for (auto& f : found)
        for (auto& p : f)
            out.push_back(std::move(p));
    return out;
}

namespace {

void locate_second_kind_on_curves(const FrontalScene& scene, SingularSet& set) {
    for (std::size_t ci = 0; ci < set.curves.size(); ++ci) {
        auto& c = set.curves[ci];
        const std::size_t nv = c.vertices.size();
        if (nv < 2)
            continue;
        // orient eta continuously along the trace
        std::vector<Eigen::VectorXd> eta(nv);
        std::vector<double> l1(nv);
        eta[0] = c.vertices[0].null_direction;
        for (std::size_t i = 0; i < nv; ++i) {
            const auto& v = c.vertices[i];
            eta[i] = v.null_direction;
            if (i > 0 && c.vertices[i - 1].chart == v.chart && eta[i].dot(eta[i - 1]) < 0.0)
                eta[i] = -eta[i];
            const double g = v.gradient.norm();
            l1[i] = g > 0.0 ? v.gradient.dot(eta[i]) / g : 0.0;
            if (v.kind == PointKind::Second) {
                set.second_kind.push_back(v);
                set.second_kind.back().curve = static_cast<int>(ci);
                set.second_kind.back().segment = static_cast<int>(i);
                c.second_kind_segments.push_back(static_cast<int>(i));
            }
        }
        for (std::size_t i = 0; i < c.segment_count(); ++i) {
            const std::size_t j = (i + 1) % nv;
            if (!c.segment_valid(i) || j == 0)
                continue;
            if (c.vertices[i].kind != PointKind::First || c.vertices[j].kind != PointKind::First)
                continue;
            if ((l1[i] > 0.0) == (l1[j] > 0.0))
                continue;
            const auto& a = c.vertices[i];
            const auto& b = c.vertices[j];
            auto f = [&](double s) {
                const auto smp = sigma_sample(scene, a.chart, a.coords, b.coords, s, 2);
                return std::make_pair(lambda_eta(scene, a.chart, smp.u, eta[i]), smp.u);
            };
            double lo = 0.0, hi = 1.0;
            std::vector<double> u;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const auto [v, pos] = f(mid);
                u = pos;
                if ((v > 0.0) == (l1[i] > 0.0))
                    lo = mid;
                else
                    hi = mid;
            }
            SingularPoint p = analyze_point(scene, a.chart, scene.wrap(a.chart, u));
            if (p.kind == PointKind::First)
                p.kind = PointKind::Second;
            p.curve = static_cast<int>(ci);
            p.segment = static_cast<int>(i);
            set.second_kind.push_back(p);
            c.second_kind_segments.push_back(static_cast<int>(i));
            set.warnings.push_back("second-kind point on curve " + std::to_string(ci) + " near vertex " +
                                   std::to_string(i));
        }
    }
}

} // namespace

SingularSet detect_singular_set(const FrontalScene& scene, const DetectionOptions& options) {
    SingularSet set;
    set.dim = scene.n();
    if (scene.n() == 1) {
        set.points = detect_singular_points_curve(scene, options.curve_grid);
    } else if (scene.n() == 2) {
        set.curves = detect_singular_curves(scene, options.grid, &set.refined_grid);
        if (set.refined_grid)
            set.warnings.push_back("hidden sign change found; traced at 4x resolution");
        locate_second_kind_on_curves(scene, set);
    } else {
        set.points = sample_singular_set(scene, options.germ_lines, options.germ_cells);
        std::vector<SingularPoint> seeds;
        for (const auto& p : set.points)
            if (p.kind != PointKind::Degenerate && p.kind_ratio < 0.3)
                seeds.push_back(p);
        std::vector<std::optional<SingularPoint>> refined(seeds.size());
        parallel_for(seeds.size(), [&](std::size_t i) {
            refined[i] = refine_second_kind(scene, seeds[i].chart, seeds[i].coords);
        });
        for (auto& r : refined) {
            if (!r)
                continue;
            bool dup = false;
            for (const auto& q : set.second_kind)
                if (q.chart == r->chart && (q.image - r->image).norm() < 1e-6)
                    dup = true;
            if (!dup)
                set.second_kind.push_back(*r);
        }
    }
    return set;
}

AdmissibilityReport admissibility_check(const FrontalScene& scene, const SingularSet& set) {
    AdmissibilityReport rep;
    rep.second_kind = set.second_kind;
    auto scan = [&](const SingularPoint& p) {
        if (p.kind == PointKind::Degenerate)
            rep.all_nondegenerate = false;
    };
    for (const auto& p : set.points)
        scan(p);
    for (const auto& c : set.curves)
        for (const auto& v : c.vertices)
            scan(v);
    if (scene.n() == 2) {
        // second-kind hits closer than kIsolationSteps segments along one curve
        for (std::size_t ci = 0; ci < set.curves.size(); ++ci) {
            std::vector<int> idx;
            for (const auto& s : set.second_kind)
                if (s.curve == static_cast<int>(ci))
                    idx.push_back(s.segment);
            std::sort(idx.begin(), idx.end());
            for (std::size_t a = 0; a + 1 < idx.size(); ++a)
                if (idx[a + 1] - idx[a] <= kIsolationSteps)
                    rep.second_kind_discrete = false;
        }
    } else if (scene.n() == 3) {
        for (const auto& s : set.second_kind) {
            const auto ak = ak_classify(scene, s, 2);
            if (ak.inconclusive)
                rep.notes.push_back("rank of (lambda, lambda') is ambiguous at a second-kind point");
            else if (ak.jacobian_rank < 2)
                rep.second_kind_discrete = false;
        }
        if (!set.second_kind.empty())
            rep.notes.push_back("second-kind locus sampled at " + std::to_string(set.second_kind.size()) +
                                " points; regular where (lambda, lambda') has rank 2");
    }
    for (const auto& w : set.warnings)
        rep.notes.push_back(w);
    if (!rep.all_nondegenerate || !rep.second_kind_discrete)
        rep.verdict = Verdict::NotAdmissible;
    else {
        bool inconclusive = false;
        for (const auto& s : rep.second_kind)
            inconclusive = inconclusive || s.ak_inconclusive;
        rep.verdict = inconclusive ? Verdict::Inconclusive : Verdict::Admissible;
    }
    return rep;
}

} // namespace frontal
