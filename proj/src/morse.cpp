#include "frontal/morse.hpp"

#include "frontal/errors.hpp"
#include "frontal/geometry.hpp"
#include "frontal/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace frontal {

namespace {

constexpr double kGridOffset = 0.3819660112501051;
constexpr double kRootTol = 1e-13;

Eigen::VectorXd image_of(const PointEval& pe) {
    Eigen::VectorXd x(static_cast<long>(pe.f.size()));
    for (std::size_t k = 0; k < pe.f.size(); ++k)
        x[static_cast<long>(k)] = pe.f[k].value();
    return x;
}

Eigen::MatrixXd height_hessian(const PointEval& pe, const Eigen::VectorXd& w) {
    const int n = static_cast<int>(pe.coords.size());
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t k = 0; k < pe.f.size(); ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                H(i, j) += pe.f[k].d2(i, j) * w[static_cast<long>(k)];
    return H;
}

bool cyclic_axis(const Chart& c, int axis) {
    return c.periodic[axis] &&
           std::abs(c.core[axis].width() - c.box[axis].width()) <= 1e-12 * c.box[axis].width();
}

std::vector<double> axis_nodes(const Chart& c, int axis, int cells) {
    std::vector<double> nodes;
    const Interval core = c.core[axis];
    if (!cyclic_axis(c, axis))
        nodes.push_back(core.lo);
    for (int i = 0; i < cells; ++i)
        nodes.push_back(core.lo + core.width() * (i + kGridOffset) / cells);
    if (!cyclic_axis(c, axis))
        nodes.push_back(core.hi);
    return nodes;
}

bool in_core(const Chart& c, std::span<const double> u) {
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (cyclic_axis(c, static_cast<int>(i)))
            continue;
        if (u[i] < c.core[i].lo || u[i] >= c.core[i].hi)
            return false;
    }
    return true;
}

// Illinois false position on [a, b] with fa, fb of opposite sign
template <class F>
double bracket_root(F&& f, double a, double b, double fa, double fb) {
    int side = 0;
    double c = a;
    for (int it = 0; it < 100; ++it) {
        c = (a * fb - b * fa) / (fb - fa);
        if (!(c > std::min(a, b) && c < std::max(a, b)))
            c = 0.5 * (a + b);
        const double fc = f(c);
        if (fc == 0.0 || std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(c)))
            break;
        if ((fc > 0.0) == (fb > 0.0)) {
            b = c;
            fb = fc;
            if (side == -1)
                fa *= 0.5;
            side = -1;
        } else {
            a = c;
            fa = fc;
            if (side == 1)
                fb *= 0.5;
            side = 1;
        }
        if (std::abs(fc) <= kRootTol * (1.0 + std::abs(fa) + std::abs(fb)) * 1e-3)
            break;
    }
    return c;
}

} // namespace

const char* locus_name(Locus l) {
    switch (l) {
    case Locus::Regular: return "regular";
    case Locus::FirstKind: return "first-kind";
    case Locus::SecondKind: return "second-kind";
    }
    return "regular";
}

const char* morse_name(MorseStatus m) {
    switch (m) {
    case MorseStatus::NonDegenerate: return "non-degenerate";
    case MorseStatus::Degenerate: return "degenerate";
    case MorseStatus::Unknown: return "unknown";
    }
    return "unknown";
}

struct HeightSampler::Grid {
    struct ChartGrid {
        std::vector<double> x, y;
        bool cx = false, cy = false;
        // df columns at nodes, m values each
        std::vector<double> fu, fv;
        // curves: tangent e at nodes
        std::vector<double> e;
    };
    std::vector<ChartGrid> charts;
    double first_scale = 0.0;
    double second_scale = 0.0;
    // per traced curve, unit ambient tangent at each vertex
    std::vector<std::vector<Eigen::VectorXd>> tangents;
};

HeightSampler::HeightSampler(const FrontalScene& scene, const SingularSet& sigma, MorseOptions options)
    : scene_(scene), sigma_(sigma), options_(options), grid_(std::make_unique<Grid>()) {
    const int n = scene.n();
    const int m = scene.m();
    if (n > 2)
        throw EvalError("height functions are sampled on curves and surfaces only");
    std::vector<double> first(static_cast<std::size_t>(scene.chart_count()), 0.0);
    std::vector<double> second(first.size(), 0.0);
    grid_->charts.resize(first.size());
    parallel_for(first.size(), [&](std::size_t ci) {
        const Chart& c = scene.chart(static_cast<int>(ci));
        auto& g = grid_->charts[ci];
        if (n == 1) {
            g.x = axis_nodes(c, 0, options_.curve_grid);
            g.cx = cyclic_axis(c, 0);
            g.e.resize(g.x.size() * static_cast<std::size_t>(m));
            for (std::size_t i = 0; i < g.x.size(); ++i) {
                const double u[1] = {g.x[i]};
                const PointEval pe = scene.evaluate(static_cast<int>(ci), u, 2);
                double a = 0.0, b = 0.0;
                for (int k = 0; k < m; ++k) {
                    g.e[i * m + static_cast<std::size_t>(k)] = pe.tangent[static_cast<std::size_t>(k)].value();
                    a += pe.f[static_cast<std::size_t>(k)].d(0) * pe.f[static_cast<std::size_t>(k)].d(0);
                    b += pe.f[static_cast<std::size_t>(k)].d2(0, 0) * pe.f[static_cast<std::size_t>(k)].d2(0, 0);
                }
                first[ci] = std::max(first[ci], std::sqrt(a));
                second[ci] = std::max(second[ci], std::sqrt(b));
            }
            return;
        }
        g.x = axis_nodes(c, 0, options_.seed_grid);
        g.y = axis_nodes(c, 1, options_.seed_grid);
        g.cx = cyclic_axis(c, 0);
        g.cy = cyclic_axis(c, 1);
        const std::size_t nodes = g.x.size() * g.y.size();
        g.fu.resize(nodes * static_cast<std::size_t>(m));
        g.fv.resize(nodes * static_cast<std::size_t>(m));
        for (std::size_t i = 0; i < g.x.size(); ++i)
            for (std::size_t j = 0; j < g.y.size(); ++j) {
                const double u[2] = {g.x[i], g.y[j]};
                const PointEval pe = scene.evaluate(static_cast<int>(ci), u, 2);
                const std::size_t base = (i * g.y.size() + j) * static_cast<std::size_t>(m);
                double a = 0.0, b = 0.0;
                for (int k = 0; k < m; ++k) {
                    const Jet& f = pe.f[static_cast<std::size_t>(k)];
                    g.fu[base + static_cast<std::size_t>(k)] = f.d(0);
                    g.fv[base + static_cast<std::size_t>(k)] = f.d(1);
                    a += f.d(0) * f.d(0) + f.d(1) * f.d(1);
                    b += f.d2(0, 0) * f.d2(0, 0) + 2.0 * f.d2(0, 1) * f.d2(0, 1) + f.d2(1, 1) * f.d2(1, 1);
                }
                first[ci] = std::max(first[ci], std::sqrt(a));
                second[ci] = std::max(second[ci], std::sqrt(b));
            }
    });
    grid_->first_scale = *std::max_element(first.begin(), first.end());
    grid_->second_scale = *std::max_element(second.begin(), second.end());

    for (const auto& curve : sigma.curves) {
        std::vector<Eigen::VectorXd> t(curve.vertices.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            const auto& v = curve.vertices[i];
            const Eigen::MatrixXd J = differential_matrix(scene.evaluate(v.chart, v.coords, 1));
            Eigen::VectorXd a = J * curve.tangents[i];
            const double an = a.norm();
            t[i] = an > 0.0 ? Eigen::VectorXd(a / an) : a;
        }
        grid_->tangents.push_back(std::move(t));
    }
}

HeightSampler::~HeightSampler() = default;

std::vector<HeightCritical> HeightSampler::surface_regular(const Eigen::VectorXd& w) const {
    std::vector<HeightCritical> out;
    const int m = scene_.m();
    for (int ci = 0; ci < scene_.chart_count(); ++ci) {
        const Chart& chart = scene_.chart(ci);
        const auto& g = grid_->charts[static_cast<std::size_t>(ci)];
        const int nx = static_cast<int>(g.x.size()), ny = static_cast<int>(g.y.size());
        std::vector<double> g1(static_cast<std::size_t>(nx) * ny), g2(g1.size());
        for (std::size_t k = 0; k < g1.size(); ++k) {
            double a = 0.0, b = 0.0;
            for (int c = 0; c < m; ++c) {
                a += g.fu[k * m + static_cast<std::size_t>(c)] * w[c];
                b += g.fv[k * m + static_cast<std::size_t>(c)] * w[c];
            }
            g1[k] = a;
            g2[k] = b;
        }
        const int cx = g.cx ? nx : nx - 1;
        const int cy = g.cy ? ny : ny - 1;
        const double px = chart.box[0].width(), py = chart.box[1].width();
        const double lam_band = 1e-8 * scene_.scale(ci).lambda_max;
        std::vector<HeightCritical> found;
        for (int i = 0; i < cx; ++i) {
            for (int j = 0; j < cy; ++j) {
                const int i1 = (i + 1) % nx, j1 = (j + 1) % ny;
                const std::size_t idx[4] = {static_cast<std::size_t>(i) * ny + j, static_cast<std::size_t>(i1) * ny + j,
                                            static_cast<std::size_t>(i1) * ny + j1, static_cast<std::size_t>(i) * ny + j1};
                double lo1 = g1[idx[0]], hi1 = lo1, lo2 = g2[idx[0]], hi2 = lo2;
                for (int k = 1; k < 4; ++k) {
                    lo1 = std::min(lo1, g1[idx[k]]);
                    hi1 = std::max(hi1, g1[idx[k]]);
                    lo2 = std::min(lo2, g2[idx[k]]);
                    hi2 = std::max(hi2, g2[idx[k]]);
                }
                if (!(lo1 <= 0.0 && hi1 >= 0.0 && lo2 <= 0.0 && hi2 >= 0.0))
                    continue;
                const double x0 = g.x[static_cast<std::size_t>(i)];
                const double x1 = (i1 == 0 && g.cx) ? g.x[0] + px : g.x[static_cast<std::size_t>(i1)];
                const double y0 = g.y[static_cast<std::size_t>(j)];
                const double y1 = (j1 == 0 && g.cy) ? g.y[0] + py : g.y[static_cast<std::size_t>(j1)];
                const double diag = std::hypot(x1 - x0, y1 - y0);
                std::vector<double> u{0.5 * (x0 + x1), 0.5 * (y0 + y1)};
                const std::vector<double> start = u;
                bool ok = false;
                double res = 0.0;
                for (int it = 0; it < 30; ++it) {
                    const PointEval pe = scene_.evaluate(ci, u, 2);
                    Eigen::Vector2d grad;
                    grad[0] = 0.0;
                    grad[1] = 0.0;
                    for (int c = 0; c < m; ++c) {
                        grad[0] += pe.f[static_cast<std::size_t>(c)].d(0) * w[c];
                        grad[1] += pe.f[static_cast<std::size_t>(c)].d(1) * w[c];
                    }
                    res = grad.norm();
                    if (res <= kRootTol * std::max(grid_->first_scale, 1.0)) {
                        ok = true;
                        break;
                    }
                    const Eigen::MatrixXd H = height_hessian(pe, w);
                    const double det = H.determinant();
                    if (det == 0.0 || !std::isfinite(det))
                        break;
                    const Eigen::Vector2d step = H.inverse() * grad;
                    u[0] -= step[0];
                    u[1] -= step[1];
                    if (std::hypot(u[0] - start[0], u[1] - start[1]) > 3.0 * diag)
                        break;
                }
                if (!ok)
                    continue;
                u = scene_.wrap(ci, u);
                if (!in_core(chart, u))
                    continue;
                const PointEval pe = scene_.evaluate(ci, u, 1);
                if (std::abs(signed_volume_density(scene_, pe).value) <= lam_band)
                    continue;
                bool dup = false;
                for (const auto& f : found)
                    if (chart_delta(scene_, ci, f.coords, u).norm() < 1e-6)
                        dup = true;
                if (dup)
                    continue;
                HeightCritical hc;
                hc.chart = ci;
                hc.coords = u;
                hc.image = image_of(pe);
                hc.locus = Locus::Regular;
                hc.height = hc.image.dot(w);
                hc.residual = res;
                found.push_back(std::move(hc));
            }
        }
        for (auto& f : found)
            out.push_back(std::move(f));
    }
    return out;
}

std::vector<HeightCritical> HeightSampler::surface_singular(const Eigen::VectorXd& w) const {
    std::vector<HeightCritical> out;
    for (std::size_t ci = 0; ci < sigma_.curves.size(); ++ci) {
        const auto& curve = sigma_.curves[ci];
        const auto& tan = grid_->tangents[ci];
        const std::size_t nv = curve.vertices.size();
        for (std::size_t i = 0; i < curve.segment_count(); ++i) {
            if (!curve.segment_valid(i))
                continue;
            const std::size_t j = (i + 1) % nv;
            const double gi = tan[i].dot(w), gj = tan[j].dot(w);
            if ((gi > 0.0) == (gj > 0.0))
                continue;
            const auto& a = curve.vertices[i];
            const auto& b = curve.vertices[j];
            auto h = [&](double s) {
                return sigma_sample(scene_, a.chart, a.coords, b.coords, s, 2).image_d1.dot(w);
            };
            double h0 = h(0.0), h1 = h(1.0);
            double s;
            if ((h0 > 0.0) != (h1 > 0.0)) {
                s = bracket_root(h, 0.0, 1.0, h0, h1);
            } else {
                double lo = 0.0, hi = 1.0;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if ((h(mid) > 0.0) == (gi > 0.0))
                        lo = mid;
                    else
                        hi = mid;
                }
                s = 0.5 * (lo + hi);
            }
            const auto smp = sigma_sample(scene_, a.chart, a.coords, b.coords, s, 2);
            // a reversal of the image tangent (second-kind point) is not a critical point
            const Eigen::MatrixXd J = differential_matrix(smp.eval);
            if ((J.transpose() * w).norm() > 1e-6 * std::max(grid_->first_scale, 1.0))
                continue;
            HeightCritical hc;
            hc.chart = a.chart;
            hc.coords = scene_.wrap(a.chart, smp.u);
            hc.image = image_of(smp.eval);
            hc.locus = (a.kind == PointKind::First && b.kind == PointKind::First) ? Locus::FirstKind
                                                                                 : Locus::SecondKind;
            hc.height = hc.image.dot(w);
            hc.residual = std::abs(smp.image_d1.dot(w)) / std::max(smp.du.norm(), 1e-300);
            hc.curve = static_cast<int>(ci);
            hc.segment = static_cast<int>(i);
            out.push_back(std::move(hc));
        }
    }
    return out;
}

std::vector<HeightCritical> HeightSampler::curve_points(const Eigen::VectorXd& w) const {
    std::vector<HeightCritical> out;
    const int m = scene_.m();
    for (int ci = 0; ci < scene_.chart_count(); ++ci) {
        const Chart& chart = scene_.chart(ci);
        const auto& g = grid_->charts[static_cast<std::size_t>(ci)];
        const int nn = static_cast<int>(g.x.size());
        std::vector<double> v(static_cast<std::size_t>(nn));
        for (int i = 0; i < nn; ++i) {
            double a = 0.0;
            for (int k = 0; k < m; ++k)
                a += g.e[static_cast<std::size_t>(i) * m + static_cast<std::size_t>(k)] * w[k];
            v[static_cast<std::size_t>(i)] = a;
        }
        auto ew = [&](double t) {
            const double u[1] = {t};
            const PointEval pe = scene_.evaluate(ci, u, 0);
            double a = 0.0;
            for (int k = 0; k < m; ++k)
                a += pe.tangent[static_cast<std::size_t>(k)].value() * w[k];
            return a;
        };
        const int cells = g.cx ? nn : nn - 1;
        for (int i = 0; i < cells; ++i) {
            const int i1 = (i + 1) % nn;
            const double a = g.x[static_cast<std::size_t>(i)];
            const double b = (i1 == 0 && g.cx) ? g.x[0] + chart.box[0].width() : g.x[static_cast<std::size_t>(i1)];
            const double fa = v[static_cast<std::size_t>(i)], fb = v[static_cast<std::size_t>(i1)];
            if ((fa >= 0.0) == (fb >= 0.0))
                continue;
            const double t = bracket_root(ew, a, b, fa, fb);
            std::vector<double> u = scene_.wrap(ci, std::vector<double>{t});
            if (!in_core(chart, u))
                continue;
            HeightCritical hc;
            hc.chart = ci;
            hc.coords = u;
            hc.image = scene_.position(ci, u);
            hc.locus = Locus::Regular;
            hc.height = hc.image.dot(w);
            hc.residual = std::abs(ew(t));
            out.push_back(std::move(hc));
        }
    }
    for (const auto& p : sigma_.points) {
        HeightCritical hc;
        hc.chart = p.chart;
        hc.coords = p.coords;
        hc.image = p.image;
        hc.locus = p.kind == PointKind::First ? Locus::FirstKind : Locus::SecondKind;
        hc.height = p.image.dot(w);
        out.push_back(std::move(hc));
    }
    return out;
}

HeightCritical HeightSampler::morse_test(const Eigen::VectorXd& w, HeightCritical c) const {
    const PointEval pe = scene_.evaluate(c.chart, c.coords, 2);
    const double tol = options_.degeneracy * std::max(grid_->second_scale, 1e-300);
    const Eigen::MatrixXd H = height_hessian(pe, w);
    c.hessian_det = H.determinant();
    if (c.locus == Locus::SecondKind) {
        c.morse = MorseStatus::Unknown;
        return c;
    }
    if (scene_.n() == 1) {
        // h'' = g'' . w at every critical point of a curve
        c.v_dot_w = H(0, 0);
        c.reduced = 1.0;
        bool ok = std::abs(H(0, 0)) > tol;
        if (c.locus == Locus::Regular) {
            const double lam = signed_volume_density(scene_, pe).value;
            ok = ok && !(std::abs(lam) <= 1e-8 * scene_.scale(c.chart).lambda_max);
        }
        c.morse = ok ? MorseStatus::NonDegenerate : MorseStatus::Degenerate;
        return c;
    }
    if (c.locus == Locus::Regular) {
        c.morse = std::abs(c.hessian_det) > tol * grid_->second_scale ? MorseStatus::NonDegenerate
                                                                      : MorseStatus::Degenerate;
        return c;
    }
    const auto lam = signed_volume_density(scene_, pe);
    const Eigen::VectorXd eta = null_direction(scene_, pe).eta;
    Eigen::VectorXd t(2);
    t << -lam.gradient[1], lam.gradient[0];
    t /= std::max(t.norm(), 1e-300);
    c.v_dot_w = eta.dot(H * eta);
    c.reduced = t.dot(H * t);
    c.morse = (std::abs(c.v_dot_w) > tol && std::abs(c.reduced) > tol) ? MorseStatus::NonDegenerate
                                                                       : MorseStatus::Degenerate;
    return c;
}

std::vector<HeightCritical> HeightSampler::critical_points(const Eigen::VectorXd& w) const {
    std::vector<HeightCritical> out;
    if (scene_.n() == 1) {
        out = curve_points(w);
    } else {
        auto sing = surface_singular(w);
        auto reg = surface_regular(w);
        for (auto& r : reg) {
            bool dup = false;
            for (const auto& s : sing)
                if ((s.image - r.image).norm() < 1e-6)
                    dup = true;
            if (!dup)
                out.push_back(std::move(r));
        }
        for (auto& s : sing)
            out.push_back(std::move(s));
    }
    for (auto& c : out)
        c = morse_test(w, std::move(c));
    return out;
}

std::vector<HeightCritical> height_critical_points(const FrontalScene& scene, const Eigen::VectorXd& w,
                                                   const SingularSet& sigma, const MorseOptions& options) {
    HeightSampler sampler(scene, sigma, options);
    return sampler.critical_points(w);
}

HeightCritical morse_test(const FrontalScene& scene, const Eigen::VectorXd& w, const HeightCritical& c,
                          const SingularSet& sigma, const MorseOptions& options) {
    HeightSampler sampler(scene, sigma, options);
    return sampler.morse_test(w, c);
}

Eigen::VectorXd sample_direction(int dim, std::uint64_t seed, int index, int attempt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd w(dim);
    for (int a = 0; a <= attempt; ++a) {
        do {
            for (int k = 0; k < dim; ++k)
                w[k] = normal(rng);
        } while (w.norm() < 1e-12);
    }
    return w / w.norm();
}

MorseEstimate tau_monte_carlo(const FrontalScene& scene, const SingularSet& sigma, int samples,
                              std::uint64_t seed, const MorseOptions& options) {
    if (!scene.closed())
        throw EvalError("Monte Carlo estimate needs a closed domain");
    if (samples <= 0)
        throw EvalError("sample count must be positive");
    HeightSampler sampler(scene, sigma, options);
    const int dim = scene.m();
    constexpr int kMaxAttempts = 200;
    std::vector<int> counts(static_cast<std::size_t>(samples));
    std::vector<int> rejects(counts.size());
    std::vector<Eigen::VectorXd> dirs(counts.size());
    parallel_for(counts.size(), [&](std::size_t i) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(i)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
            Eigen::VectorXd w(dim);
            do {
                for (int k = 0; k < dim; ++k)
                    w[k] = normal(rng);
            } while (w.norm() < 1e-12);
            w /= w.norm();
            const auto crit = sampler.critical_points(w);
            bool good = true;
            for (const auto& c : crit)
                good = good && c.morse == MorseStatus::NonDegenerate;
            if (good) {
                counts[i] = static_cast<int>(crit.size());
                dirs[i] = w;
                return;
            }
            ++rejects[i];
        }
        throw ConditioningError("no Morse height function found after repeated resampling");
    });
    MorseEstimate est;
    est.seed = seed;
    est.samples = samples;
    est.counts = counts;
    est.directions = dirs;
    est.rejected = std::accumulate(rejects.begin(), rejects.end(), 0);
    const double rate = static_cast<double>(est.rejected) / (samples + est.rejected);
    if (rate > 0.25)
        throw ConditioningError("rejected " + std::to_string(est.rejected) + " of " +
                                std::to_string(samples + est.rejected) + " directions");
    est.flagged = rate >= 0.05;
    long total = 0;
    for (int c : counts)
        total += c;
    est.mean = static_cast<double>(total) / samples;
    double ss = 0.0;
    for (int c : counts)
        ss += (c - est.mean) * (c - est.mean);
    est.standard_error = samples > 1 ? std::sqrt(ss / (samples - 1) / samples) : 0.0;
    est.min_count = *std::min_element(counts.begin(), counts.end());
    est.max_count = *std::max_element(counts.begin(), counts.end());
    for (int i = 0; i < samples; ++i)
        if (counts[static_cast<std::size_t>(i)] == 2) {
            est.witness = dirs[static_cast<std::size_t>(i)];
            break;
        }
    return est;
}

ReebWitness reeb_witness(const FrontalScene& scene, const MorseEstimate& estimate) {
    ReebWitness r;
    r.direction = estimate.witness;
    r.sphere_implied = estimate.witness.has_value();
    const auto& b = scene.spec().betti;
    if (!b.empty()) {
        r.betti_sphere = b.front() == 1 && b.back() == 1;
        for (std::size_t i = 1; i + 1 < b.size(); ++i)
            r.betti_sphere = r.betti_sphere && b[i] == 0;
    }
    return r;
}

std::vector<VerdictRecord> verify_inequality(const FrontalScene& scene, const CurvatureReport& report,
                                             const MorseEstimate* estimate) {
    constexpr double kTol = 1e-4;
    std::vector<VerdictRecord> out;
    const auto& b = scene.spec().betti;
    const double bsum = std::accumulate(b.begin(), b.end(), 0.0);
    const double tau = report.tau;
    {
        VerdictRecord v;
        v.name = "lower_bound";
        if (b.empty()) {
            v.status = "inapplicable";
            v.summary = "no Betti numbers declared";
        } else {
            const bool pass = tau >= bsum - kTol;
            const bool tight = std::abs(tau - bsum) < kTol;
            v.status = pass ? "pass" : "fail";
            v.summary = !pass ? "total absolute curvature below the Betti sum"
                              : tight ? "equality (tight)" : "strict inequality";
            v.values = {{"tau", tau}, {"betti_sum", bsum}, {"tight", tight ? 1.0 : 0.0}};
        }
        out.push_back(v);
    }
    {
        VerdictRecord v;
        v.name = "sphere_recognition";
        if (tau >= 3.0) {
            v.status = "inapplicable";
            v.summary = "tau >= 3";
        } else if (!estimate) {
            v.status = "inapplicable";
            v.summary = "no Monte Carlo estimate";
        } else {
            const auto w = reeb_witness(scene, *estimate);
            v.status = (w.sphere_implied && (b.empty() || w.betti_sphere)) ? "pass" : "fail";
            v.summary = w.sphere_implied ? "height function with two critical points found"
                                         : "no two-critical-point direction among samples";
            v.values = {{"witness", w.sphere_implied ? 1.0 : 0.0}, {"betti_sphere", w.betti_sphere ? 1.0 : 0.0}};
        }
        out.push_back(v);
    }
    constexpr double kTwoPi = 2.0 * 3.141592653589793;
    if (scene.n() == 2 && !b.empty()) {
        VerdictRecord v;
        v.name = "surface_curvature_bound";
        const double genus = 0.5 * b[1];
        const double lhs = kTwoPi * (report.regular_part + report.singular_part);
        const double rhs = kTwoPi * (2.0 + 2.0 * genus);
        v.status = lhs >= rhs - kTwoPi * kTol ? "pass" : "fail";
        v.summary = "int |K| dV + 2 int kappa ds against 2 pi (2 + 2g)";
        v.values = {{"lhs", lhs}, {"rhs", rhs}, {"genus", genus}};
        out.push_back(v);
    } else if (scene.n() == 1) {
        VerdictRecord v;
        v.name = "fenchel_type";
        const double lhs = report.regular_part + report.singular_part;
        v.status = lhs >= 2.0 - kTol ? "pass" : "fail";
        v.summary = "(1/pi) int kappa ds + #Sigma >= 2";
        v.values = {{"lhs", lhs}, {"singular_points", static_cast<double>(report.singular_point_count)}};
        out.push_back(v);
    }
    return out;
}

std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> p) {
    std::sort(p.begin(), p.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    p.erase(std::unique(p.begin(), p.end()), p.end());
    if (p.size() < 3)
        return p;
    auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    std::vector<Eigen::Vector2d> h(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0.0)
            --k;
        h[k++] = p[i];
    }
    for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
        while (k >= t && cross(h[k - 2], h[k - 1], p[i - 1]) <= 0.0)
            --k;
        h[k++] = p[i - 1];
    }
    h.resize(k - 1);
    return h;
}

namespace {

double segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    const Eigen::Vector2d d = b - a;
    const double l = d.squaredNorm();
    const double t = l > 0.0 ? std::clamp((p - a).dot(d) / l, 0.0, 1.0) : 0.0;
    return (a + t * d - p).norm();
}

} // namespace

EqualityReport equality_case_check(const FrontalScene& scene, const SingularSet& sigma, double tau) {
    EqualityReport rep;
    const int n = scene.n();
    const int m = scene.m();
    std::vector<Eigen::VectorXd> mpts;
    const int per_axis = n == 1 ? 2048 : 48;
    for (int ci = 0; ci < scene.chart_count(); ++ci) {
        const auto& core = scene.chart(ci).core;
        if (n == 1) {
            for (int i = 0; i < per_axis; ++i) {
                const double u[1] = {core[0].lo + core[0].width() * (i + 0.5) / per_axis};
                mpts.push_back(scene.position(ci, u));
            }
        } else if (n == 2) {
            for (int i = 0; i <= per_axis; ++i)
                for (int j = 0; j <= per_axis; ++j) {
                    const double u[2] = {core[0].lo + core[0].width() * i / per_axis,
                                         core[1].lo + core[1].width() * j / per_axis};
                    mpts.push_back(scene.position(ci, u));
                }
        }
    }
    std::vector<Eigen::VectorXd> spts;
    double spacing = 0.0;
    bool all_first = true;
    if (n == 1) {
        for (const auto& p : sigma.points) {
            spts.push_back(p.image);
            all_first = all_first && p.kind == PointKind::First;
        }
    } else {
        for (const auto& c : sigma.curves) {
            for (std::size_t i = 0; i < c.vertices.size(); ++i) {
                spts.push_back(c.vertices[i].image);
                all_first = all_first && c.vertices[i].kind == PointKind::First;
                if (c.segment_valid(i))
                    spacing = std::max(spacing, (c.vertices[(i + 1) % c.vertices.size()].image - c.vertices[i].image).norm());
            }
        }
        all_first = all_first && sigma.second_kind.empty();
    }

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
    for (const auto& x : mpts)
        mean += x;
    mean /= static_cast<double>(std::max<std::size_t>(mpts.size(), 1));
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m, m);
    double diam = 0.0;
    for (const auto& x : mpts) {
        C += (x - mean) * (x - mean).transpose();
        diam = std::max(diam, (x - mean).norm());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    const Eigen::MatrixXd B = eig.eigenvectors().rightCols(n);
    auto residual_to = [&](int k) {
        if (k >= m)
            return 0.0;
        const Eigen::MatrixXd P = eig.eigenvectors().rightCols(k);
        double r = 0.0;
        for (const auto& x : mpts)
            r = std::max(r, ((x - mean) - P * (P.transpose() * (x - mean))).norm());
        for (const auto& x : spts)
            r = std::max(r, ((x - mean) - P * (P.transpose() * (x - mean))).norm());
        return r;
    };
    rep.planar_residual = residual_to(n);
    rep.span_residual = residual_to(n + 1);
    const double scale = std::max(1.0, diam);
    rep.planar = rep.planar_residual < 1e-8 * scale;

    const bool tight = std::abs(tau - 2.0) < 1e-4;
    rep.span_verdict.name = "affine_span";
    if (!tight) {
        rep.span_verdict.status = "inapplicable";
        rep.span_verdict.summary = "tau != 2";
    } else {
        const bool ok = rep.span_residual < 1e-6 * scale;
        rep.span_verdict.status = ok ? "pass" : "fail";
        rep.span_verdict.summary = "image lies in an (n+1)-dimensional affine subspace";
    }
    rep.span_verdict.values = {{"residual", rep.span_residual}};

    rep.applicable = !spts.empty() && all_first;
    if (!spts.empty()) {
        if (n == 1) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (const auto& x : mpts) {
                const double y = B.col(0).dot(x - mean);
                lo = std::min(lo, y);
                hi = std::max(hi, y);
            }
            std::vector<double> ys;
            for (const auto& x : spts) {
                const double y = B.col(0).dot(x - mean);
                lo = std::min(lo, y);
                hi = std::max(hi, y);
                ys.push_back(y);
            }
            for (double y : ys)
                rep.hull_distance = std::max(rep.hull_distance, std::min(std::abs(y - lo), std::abs(y - hi)));
            double dlo = std::numeric_limits<double>::infinity(), dhi = dlo;
            for (double y : ys) {
                dlo = std::min(dlo, std::abs(y - lo));
                dhi = std::min(dhi, std::abs(y - hi));
            }
            rep.hausdorff = std::max({dlo, dhi, rep.hull_distance});
            rep.hausdorff_tolerance = 1e-7 * scale;
        } else {
            std::vector<Eigen::Vector2d> all, sig;
            for (const auto& x : mpts) {
                const Eigen::VectorXd y = B.transpose() * (x - mean);
                all.emplace_back(y[0], y[1]);
            }
            for (const auto& x : spts) {
                const Eigen::VectorXd y = B.transpose() * (x - mean);
                all.emplace_back(y[0], y[1]);
                sig.emplace_back(y[0], y[1]);
            }
            const auto hull = convex_hull(all);
            auto to_boundary = [&](const Eigen::Vector2d& p) {
                double d = std::numeric_limits<double>::infinity();
                for (std::size_t k = 0; k < hull.size(); ++k)
                    d = std::min(d, segment_distance(p, hull[k], hull[(k + 1) % hull.size()]));
                return d;
            };
            for (const auto& p : sig)
                rep.hull_distance = std::max(rep.hull_distance, to_boundary(p));
            double back = 0.0;
            for (std::size_t k = 0; k < hull.size(); ++k) {
                const Eigen::Vector2d probes[2] = {hull[k], 0.5 * (hull[k] + hull[(k + 1) % hull.size()])};
                for (const auto& q : probes) {
                    double d = std::numeric_limits<double>::infinity();
                    for (const auto& p : sig)
                        d = std::min(d, (p - q).norm());
                    back = std::max(back, d);
                }
            }
            rep.hausdorff = std::max(back, rep.hull_distance);
            rep.hausdorff_tolerance = 2.0 * spacing;
        }
        rep.convex = rep.hull_distance < 1e-7 * scale;
        rep.boundary = rep.hausdorff <= rep.hausdorff_tolerance;
    }

    rep.verdict.name = "convex_equality_case";
    rep.verdict.values = {{"tau", tau},
                          {"planar_residual", rep.planar_residual},
                          {"hull_distance", rep.hull_distance},
                          {"hausdorff", rep.hausdorff},
                          {"hausdorff_tolerance", rep.hausdorff_tolerance}};
    if (!rep.applicable) {
        rep.verdict.status = "inapplicable";
        rep.verdict.summary = spts.empty() ? "no singular points" : "singular set has points that are not of the first kind";
        return rep;
    }
    const bool conditions = rep.planar && rep.convex && rep.boundary;
    rep.equality_case = tight && conditions;
    rep.verdict.status = (tight == conditions) ? "pass" : "fail";
    rep.verdict.summary = rep.equality_case ? "equality case: image is a convex domain of an n-plane bounded by f(Sigma)"
                          : conditions     ? "convex planar image but tau != 2"
                          : tight          ? "tau = 2 but the image is not a convex planar domain"
                                           : "not an equality case";
    rep.verdict.values.emplace_back("equality_case", rep.equality_case ? 1.0 : 0.0);
    return rep;
}

} // namespace frontal
