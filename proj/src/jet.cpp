#include "frontal/jet.hpp"

#include "frontal/errors.hpp"

#include <cmath>
#include <vector>

namespace frontal {

namespace {

struct Product {
    std::int8_t a, b, out;
};

struct Layout {
    // monomials[v][i] are exponent tuples for nvars = v + 1
    std::array<std::array<std::array<int, kMaxJetVars>, kMaxJetCoeffs>, kMaxJetVars> monomials{};
    // index[v][e0][e1][e2], -1 if the monomial is not stored
    std::array<std::array<std::array<std::array<int, 4>, 4>, 4>, kMaxJetVars> index{};
    std::array<std::array<double, kMaxJetCoeffs>, kMaxJetVars> factorial{};
    std::array<std::array<int, kMaxJetOrder + 1>, kMaxJetVars> sizes{};
    // products[v][order]: all (a, b) pairs whose product stays within `order`
    std::array<std::array<std::vector<Product>, kMaxJetOrder + 1>, kMaxJetVars> products;

    Layout() {
        for (int v = 0; v < kMaxJetVars; ++v) {
            for (auto& p : index[v])
                for (auto& q : p)
                    q.fill(-1);
            int n = 0;
            for (int deg = 0; deg <= kMaxJetOrder; ++deg) {
                for (int e0 = deg; e0 >= 0; --e0) {
                    for (int e1 = deg - e0; e1 >= 0; --e1) {
                        const int e2 = deg - e0 - e1;
                        if ((v < 1 && e1 > 0) || (v < 2 && e2 > 0))
                            continue;
                        monomials[v][n] = {e0, e1, e2};
                        index[v][e0][e1][e2] = n;
                        factorial[v][n] = std::tgamma(e0 + 1.0) * std::tgamma(e1 + 1.0) *
                                          std::tgamma(e2 + 1.0);
                        ++n;
                    }
                }
                sizes[v][deg] = n;
            }
            for (int order = 0; order <= kMaxJetOrder; ++order) {
                const int sz = sizes[v][order];
                for (int a = 0; a < sz; ++a) {
                    for (int b = 0; b < sz; ++b) {
                        const auto& ea = monomials[v][a];
                        const auto& eb = monomials[v][b];
                        const int d = ea[0] + ea[1] + ea[2] + eb[0] + eb[1] + eb[2];
                        if (d > order)
                            continue;
                        const int out = index[v][ea[0] + eb[0]][ea[1] + eb[1]][ea[2] + eb[2]];
                        products[v][order].push_back(
                            {static_cast<std::int8_t>(a), static_cast<std::int8_t>(b),
                             static_cast<std::int8_t>(out)});
                    }
                }
            }
        }
    }
};

const Layout& layout() {
    static const Layout instance;
    return instance;
}

void check_layout(int nvars, int order) {
    if (nvars < 1 || nvars > kMaxJetVars || order < 0 || order > kMaxJetOrder)
        throw EvalError("jet layout out of range: " + std::to_string(nvars) + " variables, order " +
                        std::to_string(order));
}

void check_compatible(const Jet& a, const Jet& b) {
    if (a.nvars() != b.nvars())
        throw EvalError("jets over different variable counts");
}

} // namespace

int jet_size(int nvars, int order) {
    check_layout(nvars, order);
    return layout().sizes[nvars - 1][order];
}

Jet::Jet(int nvars, int order)
    : nvars_(static_cast<std::int8_t>(nvars)), order_(static_cast<std::int8_t>(order)) {
    check_layout(nvars, order);
}

Jet Jet::constant(double value, int nvars, int order) {
    Jet j(nvars, order);
    j.c_[0] = value;
    return j;
}

Jet Jet::variable(int index, double value, int nvars, int order) {
    Jet j(nvars, order);
    if (index < 0 || index >= nvars)
        throw EvalError("variable index out of range");
    j.c_[0] = value;
    if (order >= 1)
        j.c_[1 + index] = 1.0;
    return j;
}

int Jet::size() const noexcept { return layout().sizes[nvars_ - 1][order_]; }

std::array<int, kMaxJetVars> Jet::exponents(int index) const {
    return layout().monomials[nvars_ - 1][index];
}

double Jet::partial(std::array<int, kMaxJetVars> e) const {
    for (int i = 0; i < kMaxJetVars; ++i)
        if (e[i] < 0 || (i >= nvars_ && e[i] > 0))
            throw EvalError("partial derivative multi-index out of range");
    if (e[0] + e[1] + e[2] > order_)
        throw EvalError("partial derivative above jet order");
    const auto& L = layout();
    const int idx = L.index[nvars_ - 1][e[0]][e[1]][e[2]];
    return c_[idx] * L.factorial[nvars_ - 1][idx];
}

double Jet::d(int i) const {
    std::array<int, kMaxJetVars> e{};
    e.at(i) += 1;
    return partial(e);
}

double Jet::d2(int i, int j) const {
    std::array<int, kMaxJetVars> e{};
    e.at(i) += 1;
    e.at(j) += 1;
    return partial(e);
}

double Jet::d3(int i, int j, int k) const {
    std::array<int, kMaxJetVars> e{};
    e.at(i) += 1;
    e.at(j) += 1;
    e.at(k) += 1;
    return partial(e);
}

Jet Jet::diff(int i) const {
    if (order_ < 1)
        throw EvalError("cannot differentiate an order-0 jet");
    if (i < 0 || i >= nvars_)
        throw EvalError("derivative variable out of range");
    const auto& L = layout();
    const int v = nvars_ - 1;
    Jet out(nvars_, order_ - 1);
    const int sz = out.size();
    for (int k = 0; k < sz; ++k) {
        auto e = L.monomials[v][k];
        e[i] += 1;
        const int src = L.index[v][e[0]][e[1]][e[2]];
        out.c_[k] = c_[src] * e[i];
    }
    return out;
}

Jet Jet::truncated(int order) const {
    if (order >= order_)
        return *this;
    Jet out(nvars_, order);
    const int sz = out.size();
    for (int k = 0; k < sz; ++k)
        out.c_[k] = c_[k];
    return out;
}

Jet& Jet::operator+=(const Jet& other) {
    check_compatible(*this, other);
    if (other.order_ < order_)
        *this = truncated(other.order_);
    const int sz = size();
    for (int k = 0; k < sz; ++k)
        c_[k] += other.c_[k];
    return *this;
}

Jet& Jet::operator-=(const Jet& other) {
    check_compatible(*this, other);
    if (other.order_ < order_)
        *this = truncated(other.order_);
    const int sz = size();
    for (int k = 0; k < sz; ++k)
        c_[k] -= other.c_[k];
    return *this;
}

Jet& Jet::operator*=(double s) {
    const int sz = size();
    for (int k = 0; k < sz; ++k)
        c_[k] *= s;
    return *this;
}

Jet& Jet::operator+=(double s) {
    c_[0] += s;
    return *this;
}

Jet operator-(Jet a) {
    const int sz = a.size();
    for (int k = 0; k < sz; ++k)
        a.c_[k] = -a.c_[k];
    return a;
}

Jet operator*(const Jet& a, const Jet& b) {
    check_compatible(a, b);
    const int order = std::min(a.order_, b.order_);
    Jet out(a.nvars_, order);
    if (order == 0) {
        out.c_[0] = a.c_[0] * b.c_[0];
        return out;
    }
    for (const auto& p : layout().products[a.nvars_ - 1][order])
        out.c_[p.out] += a.c_[p.a] * b.c_[p.b];
    return out;
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

Jet compose(const Jet& a, const std::array<double, 4>& g) {
    // g(a0 + delta) = sum_m g^(m)(a0) / m! * delta^m, delta nilpotent of degree > order
    Jet delta = a;
    delta.c_[0] = 0.0;
    Jet out = Jet::constant(g[0], a.nvars_, a.order_);
    Jet power = delta;
    double inv_factorial = 1.0;
    for (int m = 1; m <= a.order_; ++m) {
        inv_factorial /= m;
        if (g[m] != 0.0) {
            const int sz = out.size();
            const double s = g[m] * inv_factorial;
            for (int k = 0; k < sz; ++k)
                out.c_[k] += s * power.c_[k];
        }
        if (m < a.order_)
            power = power * delta;
    }
    return out;
}

Jet sin(const Jet& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    return compose(a, {s, c, -s, -c});
}

Jet cos(const Jet& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    return compose(a, {c, -s, -c, s});
}

Jet tan(const Jet& a) {
    if (std::abs(std::cos(a.value())) < 1e-300)
        throw EvalError("tan evaluated at a pole");
    const double t = std::tan(a.value());
    const double sec2 = 1.0 + t * t;
    return compose(a, {t, sec2, 2.0 * t * sec2, 2.0 * sec2 * (1.0 + 3.0 * t * t)});
}

Jet exp(const Jet& a) {
    const double e = std::exp(a.value());
    return compose(a, {e, e, e, e});
}

Jet log(const Jet& a) {
    const double x = a.value();
    if (!(x > 0.0))
        throw EvalError("log of non-positive value " + std::to_string(x));
    return compose(a, {std::log(x), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)});
}

Jet sqrt(const Jet& a) {
    const double x = a.value();
    if (!(x > 0.0))
        throw EvalError("sqrt of non-positive value " + std::to_string(x));
    const double s = std::sqrt(x);
    return compose(a, {s, 0.5 / s, -0.25 / (s * x), 0.375 / (s * x * x)});
}

Jet reciprocal(const Jet& a) {
    const double x = a.value();
    if (x == 0.0 || !std::isfinite(x))
        throw EvalError("division by zero");
    const double r = 1.0 / x;
    return compose(a, {r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r});
}

Jet pow(const Jet& a, double p) {
    const double x = a.value();
    const bool integral = std::floor(p) == p && std::abs(p) < 1e9;
    if (!integral && !(x > 0.0))
        throw EvalError("non-integer power of non-positive base " + std::to_string(x));
    if (integral && p < 0.0 && x == 0.0)
        throw EvalError("negative power of zero");
    std::array<double, 4> g{};
    double falling = 1.0;
    for (int m = 0; m <= 3; ++m) {
        if (integral && p >= 0.0 && m > p) {
            g[m] = 0.0;
        } else {
            g[m] = falling * std::pow(x, p - m);
        }
        falling *= (p - m);
    }
    return compose(a, g);
}

} // namespace frontal
