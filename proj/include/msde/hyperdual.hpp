#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace msde {

/// Truncated polynomial algebra over three nilpotent generators e0, e1, e2
/// (ei * ei = 0). A coefficient is kept per subset of generators, so one
/// evaluation of f(x + e0*u + e1*v + e2*w) carries the value together with the
/// mixed directional derivatives Df[u], D2f[u,v] and D3f[u,v,w].
struct HyperDual {
    // comp[S]: coefficient of the product of generators in bitmask S.
    std::array<double, 8> comp{};

    HyperDual() = default;
    HyperDual(double value) { comp[0] = value; }  // NOLINT: implicit by design

    double value() const { return comp[0]; }

    HyperDual& operator+=(const HyperDual& o) {
        for (int s = 0; s < 8; ++s) comp[s] += o.comp[s];
        return *this;
    }
    HyperDual& operator-=(const HyperDual& o) {
        for (int s = 0; s < 8; ++s) comp[s] -= o.comp[s];
        return *this;
    }

    friend HyperDual operator+(HyperDual a, const HyperDual& b) { return a += b; }
    friend HyperDual operator-(HyperDual a, const HyperDual& b) { return a -= b; }
    friend HyperDual operator-(const HyperDual& a) {
        HyperDual r;
        for (int s = 0; s < 8; ++s) r.comp[s] = -a.comp[s];
        return r;
    }

    friend HyperDual operator*(const HyperDual& a, const HyperDual& b) {
        HyperDual r;
        for (int s = 0; s < 8; ++s) {
            double acc = a.comp[0] * b.comp[s];
            // proper nonempty sub-masks of s
            for (int sub = (s - 1) & s; sub != 0; sub = (sub - 1) & s) {
                acc += a.comp[sub] * b.comp[s ^ sub];
            }
            if (s != 0) acc += a.comp[s] * b.comp[0];
            r.comp[s] = acc;
        }
        return r;
    }

    HyperDual& operator*=(const HyperDual& o) { return *this = *this * o; }

    friend HyperDual operator/(const HyperDual& a, const HyperDual& b) {
        return a * reciprocal(b);
    }

    /// Nilpotent part (value removed).
    HyperDual nilpotent() const {
        HyperDual n = *this;
        n.comp[0] = 0.0;
        return n;
    }

    static HyperDual reciprocal(const HyperDual& g) {
        const double g0 = g.comp[0];
        const HyperDual n = g.nilpotent() * (1.0 / g0);
        const HyperDual n2 = n * n;
        return (HyperDual(1.0) - n + n2 - n2 * n) * (1.0 / g0);
    }
};

// Transcendentals via the order-3 Taylor expansion around the value; the
// nilpotent part truncates the series exactly.
inline HyperDual taylor3(double f0, double f1, double f2, double f3, const HyperDual& x) {
    const HyperDual n = x.nilpotent();
    const HyperDual n2 = n * n;
    return HyperDual(f0) + n * f1 + n2 * (f2 / 2.0) + n2 * n * (f3 / 6.0);
}

inline HyperDual exp(const HyperDual& x) {
    const double e = std::exp(x.value());
    return taylor3(e, e, e, e, x);
}

inline HyperDual log(const HyperDual& x) {
    const double v = x.value();
    return taylor3(std::log(v), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v), x);
}

inline HyperDual sin(const HyperDual& x) {
    const double s = std::sin(x.value()), c = std::cos(x.value());
    return taylor3(s, c, -s, -c, x);
}

inline HyperDual cos(const HyperDual& x) {
    const double s = std::sin(x.value()), c = std::cos(x.value());
    return taylor3(c, -s, -c, s, x);
}

inline HyperDual sqrt(const HyperDual& x) {
    const double v = x.value();
    const double r = std::sqrt(v);
    return taylor3(r, 0.5 / r, -0.25 / (r * v), 0.375 / (r * v * v), x);
}

using HDVector = std::vector<HyperDual>;

}  // namespace msde
