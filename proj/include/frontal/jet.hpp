#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace frontal {

inline constexpr int kMaxJetOrder = 3;
inline constexpr int kMaxJetVars = 3;
inline constexpr int kMaxJetCoeffs = 20;

/**
 * Truncated multivariate Taylor polynomial of a scalar at a point.
 *
 * Coefficients are stored in the monomial basis (c_alpha = d^alpha f / alpha!),
 * graded by total degree, so a jet of order k is a prefix of the order-3 layout.
 * Binary operations between jets of different order truncate to the lower one.
 */
class Jet {
public:
    Jet() = default;
    Jet(int nvars, int order);

    static Jet constant(double value, int nvars, int order);
    static Jet variable(int index, double value, int nvars, int order);

    int nvars() const noexcept { return nvars_; }
    int order() const noexcept { return order_; }
    int size() const noexcept;

    double value() const noexcept { return c_[0]; }

    /// Partial derivative for a multi-index given as exponents per variable.
    double partial(std::array<int, kMaxJetVars> exponents) const;
    double d(int i) const;
    double d2(int i, int j) const;
    double d3(int i, int j, int k) const;

    /// d/du_i of the jet, one order lower.
    Jet diff(int i) const;
    Jet truncated(int order) const;

    double coefficient(int index) const { return c_[index]; }
    std::array<int, kMaxJetVars> exponents(int index) const;

    Jet& operator+=(const Jet& other);
    Jet& operator-=(const Jet& other);
    Jet& operator*=(double s);
    Jet& operator+=(double s);

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(const Jet& a, const Jet& b);
    friend Jet operator/(const Jet& a, const Jet& b);
    friend Jet operator-(Jet a);
    friend Jet operator+(Jet a, double s) { return a += s; }
    friend Jet operator+(double s, Jet a) { return a += s; }
    friend Jet operator-(Jet a, double s) { return a += -s; }
    friend Jet operator-(double s, const Jet& a) { return -a + s; }
    friend Jet operator*(Jet a, double s) { return a *= s; }
    friend Jet operator*(double s, Jet a) { return a *= s; }

    /// g(a) given g and its first three derivatives at a.value().
    friend Jet compose(const Jet& a, const std::array<double, 4>& derivatives);

private:
    std::array<double, kMaxJetCoeffs> c_{};
    std::int8_t nvars_ = 1;
    std::int8_t order_ = 0;
};

/// Number of Taylor coefficients for the given layout.
int jet_size(int nvars, int order);

Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet tan(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet reciprocal(const Jet& a);
/// a^p for a constant exponent. Integer p allows any base (non-zero if p < 0);
/// non-integer p requires a positive base.
Jet pow(const Jet& a, double p);

} // namespace frontal
