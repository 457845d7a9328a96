#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "prodsat/error.hpp"
#include "prodsat/mhs.hpp"

namespace prodsat {

// Dense polynomial, coeffs[k] multiplies x^k.
struct UnivariatePoly {
    CVec coeffs;

    UnivariatePoly() = default;
    explicit UnivariatePoly(CVec c) : coeffs(std::move(c)) {}
    static UnivariatePoly constant(cdouble c) { return UnivariatePoly(CVec{c}); }
    static UnivariatePoly monomial(cdouble c, std::size_t k) {
        CVec v(k + 1, 0.0);
        v[k] = c;
        return UnivariatePoly(std::move(v));
    }

    // Index of the highest nonzero coefficient, or -1 for the zero polynomial.
    int degree() const {
        for (std::size_t k = coeffs.size(); k-- > 0;)
            if (coeffs[k] != cdouble(0)) return static_cast<int>(k);
        return -1;
    }

    double norm() const {
        double s = 0;
        for (auto c : coeffs) s += std::norm(c);
        return std::sqrt(s);
    }

    double max_abs() const {
        double m = 0;
        for (auto c : coeffs) m = std::max(m, std::abs(c));
        return m;
    }

    // Drops leading coefficients below rel * max|c|.
    UnivariatePoly trimmed(double rel = 0.0) const {
        double cut = rel * max_abs();
        std::size_t n = coeffs.size();
        while (n > 0 && std::abs(coeffs[n - 1]) <= cut) --n;
        return UnivariatePoly(CVec(coeffs.begin(), coeffs.begin() + n));
    }

    cdouble operator()(cdouble x) const {
        cdouble r = 0;
        for (std::size_t k = coeffs.size(); k-- > 0;) r = r * x + coeffs[k];
        return r;
    }

    UnivariatePoly derivative() const {
        if (coeffs.size() <= 1) return UnivariatePoly(CVec{0.0});
        CVec d(coeffs.size() - 1);
        for (std::size_t k = 1; k < coeffs.size(); ++k) d[k - 1] = coeffs[k] * static_cast<double>(k);
        return UnivariatePoly(std::move(d));
    }

    friend UnivariatePoly operator+(const UnivariatePoly& a, const UnivariatePoly& b) {
        CVec c(std::max(a.coeffs.size(), b.coeffs.size()), 0.0);
        for (std::size_t k = 0; k < a.coeffs.size(); ++k) c[k] += a.coeffs[k];
        for (std::size_t k = 0; k < b.coeffs.size(); ++k) c[k] += b.coeffs[k];
        return UnivariatePoly(std::move(c));
    }
    friend UnivariatePoly operator+(const UnivariatePoly& a, cdouble s) {
        UnivariatePoly r = a;
        if (r.coeffs.empty()) r.coeffs.push_back(0.0);
        r.coeffs[0] += s;
        return r;
    }
    friend UnivariatePoly operator-(const UnivariatePoly& a) {
        UnivariatePoly r = a;
        for (auto& c : r.coeffs) c = -c;
        return r;
    }
    friend UnivariatePoly operator*(const UnivariatePoly& a, cdouble s) {
        UnivariatePoly r = a;
        for (auto& c : r.coeffs) c *= s;
        return r;
    }
    friend UnivariatePoly operator*(const UnivariatePoly& a, const UnivariatePoly& b) {
        if (a.coeffs.empty() || b.coeffs.empty()) return UnivariatePoly(CVec{0.0});
        CVec c(a.coeffs.size() + b.coeffs.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
            if (a.coeffs[i] == cdouble(0)) continue;
            for (std::size_t j = 0; j < b.coeffs.size(); ++j) c[i + j] += a.coeffs[i] * b.coeffs[j];
        }
        return UnivariatePoly(std::move(c));
    }
};

namespace detail {

// p(z) / p'(z) evaluated through the reversed polynomial when |z| > 1.
inline cdouble newton_ratio(const CVec& c, cdouble z, cdouble& pz, double& scale) {
    const std::size_t n = c.size() - 1;
    if (std::abs(z) <= 1.0) {
        cdouble p = c[n], dp = 0;
        double s = std::abs(c[n]);
        double az = std::abs(z);
        for (std::size_t k = n; k-- > 0;) {
            dp = dp * z + p;
            p = p * z + c[k];
            s = s * az + std::abs(c[k]);
        }
        pz = p;
        scale = s;
        return dp == cdouble(0) ? cdouble(0) : p / dp;
    }
    cdouble w = 1.0 / z;
    cdouble r = c[0], dr = 0;
    double s = std::abs(c[0]);
    double aw = std::abs(w);
    for (std::size_t k = 1; k <= n; ++k) {
        dr = dr * w + r;
        r = r * w + c[k];
        s = s * aw + std::abs(c[k]);
    }
    // p(z) = z^n rev(w); p'/p = n/z - w^2 rev'(w)/rev(w).
    pz = r;  // scaled by z^-n, consistent with scale
    scale = s;
    if (r == cdouble(0)) return 0;
    cdouble logd = static_cast<double>(n) * w - w * w * dr / r;
    return logd == cdouble(0) ? cdouble(0) : 1.0 / logd;
}

inline CVec aberth_initial(const CVec& c) {
    const int n = static_cast<int>(c.size()) - 1;
    // Upper convex hull of (k, log|c_k|).
    std::vector<int> hull;
    for (int k = 0; k <= n; ++k) {
        if (c[k] == cdouble(0)) continue;
        auto y = [&](int i) { return std::log(std::abs(c[i])); };
        while (hull.size() >= 2) {
            int i = hull[hull.size() - 2], j = hull.back();
            if ((y(j) - y(i)) * (k - i) <= (y(k) - y(i)) * (j - i))
                hull.pop_back();
            else
                break;
        }
        hull.push_back(k);
    }
    CVec z;
    const double two_pi = 2 * std::numbers::pi;
    for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
        int i = hull[h], j = hull[h + 1];
        double u = std::pow(std::abs(c[i] / c[j]), 1.0 / (j - i));
        for (int m = 0; m < j - i; ++m) {
            double ang = two_pi * m / (j - i) + two_pi * i / n + 0.7;
            z.push_back(std::polar(u, ang));
        }
    }
    return z;
}

} // namespace detail

// All roots with multiplicity by Aberth-Ehrlich iteration. Each root satisfies
// the relative backward-error test |p(z)| <= tol * sum_k |c_k| |z|^k.
inline CVec roots_univariate(const UnivariatePoly& poly, double tol = 1e-10, int max_iter = 2000) {
    UnivariatePoly p = poly.trimmed(1e-14);
    int n = p.degree();
    if (n < 1) throw InputError("roots_univariate: degree must be at least 1");
    CVec roots;
    std::size_t low = 0;
    while (p.coeffs[low] == cdouble(0)) ++low;
    for (std::size_t k = 0; k < low; ++k) roots.push_back(0.0);
    CVec c(p.coeffs.begin() + low, p.coeffs.end());
    n = static_cast<int>(c.size()) - 1;
    if (n == 0) return roots;
    cdouble lead = c.back();
    for (auto& x : c) x /= lead;
    if (n == 1) {
        roots.push_back(-c[0]);
        return roots;
    }
    if (n == 2) {
        cdouble b = c[1], cc = c[0];
        cdouble disc = std::sqrt(b * b - 4.0 * cc);
        cdouble q = -0.5 * (b + (std::real(std::conj(b) * disc) >= 0 ? disc : -disc));
        cdouble r1 = q;
        cdouble r2 = q == cdouble(0) ? cdouble(0) : cc / q;
        roots.push_back(r1);
        roots.push_back(r2);
        return roots;
    }

    CVec z = detail::aberth_initial(c);
    std::vector<char> done(n, 0);
    const double eps = std::numeric_limits<double>::epsilon();
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        int active = 0;
        for (int i = 0; i < n; ++i) {
            if (done[i]) continue;
            cdouble pz;
            double scale;
            cdouble ratio = detail::newton_ratio(c, z[i], pz, scale);
            if (std::abs(pz) <= 4 * eps * scale) {
                done[i] = 1;
                continue;
            }
            ++active;
            cdouble s = 0;
            for (int j = 0; j < n; ++j)
                if (j != i) s += 1.0 / (z[i] - z[j]);
            cdouble delta = ratio / (1.0 - ratio * s);
            z[i] -= delta;
            if (std::abs(delta) <= 2 * eps * std::abs(z[i])) done[i] = 1;
        }
        if (active == 0) break;
    }
    // Newton polish; keeps a step only when the backward error improves.
    for (int i = 0; i < n; ++i)
        for (int it = 0; it < 3; ++it) {
            cdouble pz;
            double scale;
            cdouble ratio = detail::newton_ratio(c, z[i], pz, scale);
            cdouble cand = z[i] - ratio;
            cdouble pc;
            double sc;
            detail::newton_ratio(c, cand, pc, sc);
            if (std::abs(pc) / sc < std::abs(pz) / scale)
                z[i] = cand;
            else
                break;
        }
    std::ostringstream log;
    bool ok = true;
    for (int i = 0; i < n; ++i) {
        cdouble pz;
        double scale;
        detail::newton_ratio(c, z[i], pz, scale);
        double be = std::abs(pz) / scale;
        if (!(be <= tol)) {
            ok = false;
            log << " root " << i << " = " << z[i] << " backward error " << be << ";";
        }
    }
    if (!ok)
        throw Refusal("roots_univariate: no convergence after " + std::to_string(iter) + " iterations (degree " +
                      std::to_string(n) + "):" + log.str());
    roots.insert(roots.end(), z.begin(), z.end());
    return roots;
}

inline UnivariatePoly poly_from_roots(const CVec& roots) {
    UnivariatePoly p = UnivariatePoly::constant(1.0);
    for (auto r : roots) p = p * UnivariatePoly(CVec{-r, 1.0});
    return p;
}

} // namespace prodsat
