#include "frontal/quadrature.hpp"

#include "frontal/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace frontal {

namespace {

constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre
constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// 15 abscissae in [-1, 1] with Kronrod and Gauss weights (0 for non-Gauss nodes)
struct Rule {
    std::array<double, 15> x{};
    std::array<double, 15> wk{};
    std::array<double, 15> wg{};
};

Rule make_rule() {
    Rule r;
    int k = 0;
    for (int i = 0; i < 7; ++i) {
        r.x[k] = -kNodes[i];
        r.wk[k] = kKronrod[i];
        r.wg[k] = (i % 2 == 1) ? kGauss[i / 2] : 0.0;
        ++k;
    }
    r.x[k] = 0.0;
    r.wk[k] = kKronrod[7];
    r.wg[k] = kGauss[3];
    ++k;
    for (int i = 6; i >= 0; --i) {
        r.x[k] = kNodes[i];
        r.wk[k] = kKronrod[i];
        r.wg[k] = (i % 2 == 1) ? kGauss[i / 2] : 0.0;
        ++k;
    }
    return r;
}

const Rule& rule() {
    static const Rule r = make_rule();
    return r;
}

} // namespace

double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += v[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

QuadResult gk15(const std::function<double(double)>& f, double a, double b) {
    const Rule& r = rule();
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double k = 0.0, g = 0.0;
    for (int i = 0; i < 15; ++i) {
        const double y = f(c + h * r.x[i]);
        k += r.wk[i] * y;
        g += r.wg[i] * y;
    }
    QuadResult q;
    q.value = k * h;
    q.error = std::abs((k - g) * h);
    q.evaluations = 15;
    q.pieces = 1;
    q.converged = true;
    return q;
}

QuadResult integrate_1d(const std::function<double(double)>& f, double a, double b, double abs_tol,
                        int initial_panels, int max_panels) {
    struct Panel {
        double a, b, value, error;
    };
    auto worse = [](const Panel& p, const Panel& q) {
        if (p.error != q.error)
            return p.error < q.error;
        return p.a > q.a;
    };
    std::priority_queue<Panel, std::vector<Panel>, decltype(worse)> heap(worse);
    QuadResult out;
    const int n0 = std::max(initial_panels, 1);
    double total_err = 0.0;
    for (int i = 0; i < n0; ++i) {
        const double lo = a + (b - a) * i / n0;
        const double hi = (i + 1 == n0) ? b : a + (b - a) * (i + 1) / n0;
        const auto q = gk15(f, lo, hi);
        heap.push({lo, hi, q.value, q.error});
        total_err += q.error;
        out.evaluations += 15;
    }
    std::vector<Panel> done;
    int panels = n0;
    while (total_err > abs_tol && panels < max_panels && !heap.empty()) {
        Panel p = heap.top();
        heap.pop();
        const double m = 0.5 * (p.a + p.b);
        if (!(m > p.a && m < p.b)) {
            done.push_back(p);
            continue;
        }
        const auto l = gk15(f, p.a, m);
        const auto r = gk15(f, m, p.b);
        out.evaluations += 30;
        total_err += l.error + r.error - p.error;
        heap.push({p.a, m, l.value, l.error});
        heap.push({m, p.b, r.value, r.error});
        ++panels;
    }
    while (!heap.empty()) {
        done.push_back(heap.top());
        heap.pop();
    }
    std::sort(done.begin(), done.end(), [](const Panel& p, const Panel& q) { return p.a < q.a; });
    std::vector<double> vals, errs;
    for (const auto& p : done) {
        vals.push_back(p.value);
        errs.push_back(p.error);
    }
    out.value = pairwise_sum(vals.data(), vals.size());
    out.error = pairwise_sum(errs.data(), errs.size());
    out.pieces = static_cast<int>(done.size());
    out.converged = out.error <= abs_tol;
    return out;
}

QuadResult integrate_2d(const std::function<double(double, double)>& f, Interval x, Interval y,
                        const CubatureOptions& opt) {
    struct Cell {
        double x0, x1, y0, y1, value, error;
        bool splittable;
    };
    const Rule& r = rule();
    const double min_w = x.width() * opt.subdivision_floor;
    const double min_h = y.width() * opt.subdivision_floor;
    auto eval = [&](Cell& c) {
        const double cx = 0.5 * (c.x0 + c.x1), hx = 0.5 * (c.x1 - c.x0);
        const double cy = 0.5 * (c.y0 + c.y1), hy = 0.5 * (c.y1 - c.y0);
        double k = 0.0, g = 0.0;
        for (int i = 0; i < 15; ++i) {
            const double xi = cx + hx * r.x[i];
            double kr = 0.0, gr = 0.0;
            for (int j = 0; j < 15; ++j) {
                const double v = f(xi, cy + hy * r.x[j]);
                kr += r.wk[j] * v;
                gr += r.wg[j] * v;
            }
            k += r.wk[i] * kr;
            g += r.wg[i] * gr;
        }
        c.value = k * hx * hy;
        c.error = std::abs(k - g) * hx * hy;
        c.splittable = (c.x1 - c.x0) > 2.0 * min_w && (c.y1 - c.y0) > 2.0 * min_h;
    };

    const int n0 = std::max(opt.initial_cells_per_axis, 1);
    std::vector<Cell> cells;
    for (int i = 0; i < n0; ++i)
        for (int j = 0; j < n0; ++j) {
            Cell c{};
            c.x0 = x.lo + x.width() * i / n0;
            c.x1 = (i + 1 == n0) ? x.hi : x.lo + x.width() * (i + 1) / n0;
            c.y0 = y.lo + y.width() * j / n0;
            c.y1 = (j + 1 == n0) ? y.hi : y.lo + y.width() * (j + 1) / n0;
            cells.push_back(c);
        }
    parallel_for(cells.size(), [&](std::size_t i) { eval(cells[i]); });

    auto worse = [](const Cell& p, const Cell& q) {
        if (p.error != q.error)
            return p.error < q.error;
        if (p.x0 != q.x0)
            return p.x0 > q.x0;
        return p.y0 > q.y0;
    };
    std::priority_queue<Cell, std::vector<Cell>, decltype(worse)> heap(worse);
    std::vector<Cell> frozen;
    double total_err = 0.0;
    for (const auto& c : cells) {
        total_err += c.error;
        if (c.splittable)
            heap.push(c);
        else
            frozen.push_back(c);
    }
    QuadResult out;
    out.evaluations = 225L * static_cast<long>(cells.size());
    long count = static_cast<long>(cells.size());
    constexpr std::size_t kBatch = 32;
    int rounds = 0;
    while (total_err > opt.abs_tol && !heap.empty() && count + 3 <= opt.max_cells) {
        std::vector<Cell> parents;
        // refine only cells that matter: stop the batch at cells far below the worst one
        const double worst = heap.top().error;
        while (!heap.empty() && parents.size() < kBatch &&
               count + 3 * static_cast<long>(parents.size() + 1) <= opt.max_cells &&
               (parents.empty() || heap.top().error > 1e-3 * worst)) {
            parents.push_back(heap.top());
            heap.pop();
        }
        std::vector<Cell> kids(parents.size() * 4);
        for (std::size_t p = 0; p < parents.size(); ++p) {
            const Cell& c = parents[p];
            const double mx = 0.5 * (c.x0 + c.x1), my = 0.5 * (c.y0 + c.y1);
            kids[4 * p + 0] = {c.x0, mx, c.y0, my, 0, 0, true};
            kids[4 * p + 1] = {mx, c.x1, c.y0, my, 0, 0, true};
            kids[4 * p + 2] = {c.x0, mx, my, c.y1, 0, 0, true};
            kids[4 * p + 3] = {mx, c.x1, my, c.y1, 0, 0, true};
        }
        parallel_for(kids.size(), [&](std::size_t i) { eval(kids[i]); });
        out.evaluations += 225L * static_cast<long>(kids.size());
        for (const auto& c : parents)
            total_err -= c.error;
        for (const auto& c : kids) {
            total_err += c.error;
            if (c.splittable)
                heap.push(c);
            else
                frozen.push_back(c);
        }
        count += 3 * static_cast<long>(parents.size());
        if (++rounds % 64 == 0) {
            // resynchronise the running error sum
            auto copy = heap;
            double s = 0.0;
            while (!copy.empty()) {
                s += copy.top().error;
                copy.pop();
            }
            for (const auto& c : frozen)
                s += c.error;
            total_err = s;
        }
    }
    std::vector<Cell> leaves = std::move(frozen);
    while (!heap.empty()) {
        leaves.push_back(heap.top());
        heap.pop();
    }
    std::sort(leaves.begin(), leaves.end(), [](const Cell& p, const Cell& q) {
        if (p.x0 != q.x0)
            return p.x0 < q.x0;
        return p.y0 < q.y0;
    });
    std::vector<double> vals, errs;
    vals.reserve(leaves.size());
    errs.reserve(leaves.size());
    for (const auto& c : leaves) {
        vals.push_back(c.value);
        errs.push_back(c.error);
    }
    out.value = pairwise_sum(vals.data(), vals.size());
    out.error = pairwise_sum(errs.data(), errs.size());
    out.pieces = static_cast<int>(leaves.size());
    out.converged = out.error <= opt.abs_tol;
    return out;
}

} // namespace frontal
