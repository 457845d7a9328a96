#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>

#include "prodsat/bezout.hpp"
#include "prodsat/error.hpp"
#include "prodsat/mhs.hpp"
#include "prodsat/univariate.hpp"

namespace prodsat {

using Rational = boost::multiprecision::cpp_rational;

struct ComplexRational {
    Rational re, im;
};

// Monic univariate polynomial with big-integer exponents.
struct SparsePoly {
    BigInt degree = 0;
    std::map<BigInt, cdouble> terms;  // exponent -> coefficient, zero coefficients not stored
    bool monic = true;

    std::size_t term_count() const { return terms.size(); }

    void validate() const {
        if (terms.empty()) throw InputError("sparse poly: no terms");
        if (terms.begin()->first < 0) throw InputError("sparse poly: negative exponent");
        if (terms.rbegin()->first != degree) throw InputError("sparse poly: degree does not match the leading term");
        for (const auto& [e, c] : terms)
            if (c == cdouble(0)) throw InputError("sparse poly: stored zero coefficient");
        if (monic && terms.rbegin()->second != cdouble(1)) throw InputError("sparse poly: monic flag but leading coefficient is not 1");
    }

    // Lowest exponent t with p = x^t * (polynomial with nonzero constant term).
    BigInt trailing_power() const { return terms.begin()->first; }

    SparsePoly without_trailing_power() const {
        SparsePoly q;
        BigInt t = trailing_power();
        for (const auto& [e, c] : terms) q.terms[e - t] = c;
        q.degree = degree - t;
        q.monic = monic;
        return q;
    }

    bool coefficients_within_degree_bound() const {
        double d = degree.convert_to<double>();
        for (const auto& [e, c] : terms)
            if (std::abs(c) > d) return false;
        return true;
    }

    cdouble evaluate_double(cdouble x) const {
        cdouble s = 0;
        for (const auto& [e, c] : terms) {
            cdouble p = 1, b = x;
            BigInt k = e;
            while (k > 0) {
                if (bit_test(k, 0)) p *= b;
                b *= b;
                k >>= 1;
            }
            s += c * p;
        }
        return s;
    }

    // Dense coefficients; refuses degrees beyond `cap`.
    UnivariatePoly to_dense(std::size_t cap = 1 << 20) const {
        if (degree > cap) throw Refusal("sparse poly: degree too large for a dense representation");
        CVec c(degree.convert_to<std::size_t>() + 1, 0.0);
        for (const auto& [e, v] : terms) c[e.convert_to<std::size_t>()] = v;
        return UnivariatePoly(std::move(c));
    }
};

inline SparsePoly sparse_from_dense(const CVec& c) {
    SparsePoly p;
    for (std::size_t k = 0; k < c.size(); ++k)
        if (c[k] != cdouble(0)) p.terms[BigInt(k)] = c[k];
    if (p.terms.empty()) throw InputError("sparse poly: zero polynomial");
    p.degree = p.terms.rbegin()->first;
    p.monic = p.terms.rbegin()->second == cdouble(1);
    return p;
}

inline std::size_t ceil_log2(const BigInt& v) {
    if (v <= 1) return 0;
    BigInt w = v - 1;
    return msb(w) + 1;
}

// Largest |x| for which the truncated evaluation is guaranteed: 1 + (log2 d + 1)^2 / d.
inline double evaluation_radius(const BigInt& d) {
    double dd = d.convert_to<double>();
    if (dd < 1) return 1;
    double lg = std::log2(dd) + 1;
    return 1 + lg * lg / dd;
}

// Fixed-point complex number value = (re + i im) / 2^K.
struct FixedComplex {
    BigInt re, im;
};

namespace detail {

inline BigInt rational_to_fixed(const Rational& r, std::size_t K) {
    BigInt num = boost::multiprecision::numerator(r) << K;
    return num / boost::multiprecision::denominator(r);
}

inline BigInt double_to_fixed(double v, std::size_t K) {
    return rational_to_fixed(Rational(v), K);
}

inline FixedComplex fixed_mul(const FixedComplex& a, const FixedComplex& b, std::size_t K) {
    return {(a.re * b.re - a.im * b.im) >> K, (a.re * b.im + a.im * b.re) >> K};
}

} // namespace detail

struct TruncatedValue {
    FixedComplex value;
    std::size_t precision = 0;  // K

    ComplexRational exact() const {
        BigInt den = BigInt(1) << precision;
        return {Rational(value.re, den), Rational(value.im, den)};
    }
    cdouble approx() const {
        auto e = exact();
        return {e.re.convert_to<double>(), e.im.convert_to<double>()};
    }
};

inline std::size_t truncated_precision(const SparsePoly& p, double abs_x, std::size_t L) {
    std::size_t K = L + ceil_log2(BigInt(p.term_count())) + 64 + 2 * ceil_log2(p.degree);
    if (abs_x > 1) K += static_cast<std::size_t>(std::ceil(p.degree.convert_to<double>() * std::log2(abs_x)));
    return K;
}

// p(x) by square-and-multiply in fixed point with K fractional bits; every
// product is truncated back to K bits.
inline TruncatedValue eval_truncated(const SparsePoly& p, const ComplexRational& x, std::size_t L) {
    p.validate();
    double ax = std::hypot(x.re.convert_to<double>(), x.im.convert_to<double>());
    if (ax > evaluation_radius(p.degree))
        throw Refusal("eval_truncated: |x| = " + std::to_string(ax) + " is outside the guaranteed regime |x| <= " +
                      std::to_string(evaluation_radius(p.degree)));
    const std::size_t K = truncated_precision(p, ax, L);
    FixedComplex xf{detail::rational_to_fixed(x.re, K), detail::rational_to_fixed(x.im, K)};
    const BigInt one = BigInt(1) << K;

    std::size_t bits = p.degree > 0 ? msb(p.degree) + 1 : 1;
    std::vector<FixedComplex> sq{xf};  // x^(2^k)
    for (std::size_t k = 1; k < bits; ++k) sq.push_back(detail::fixed_mul(sq.back(), sq.back(), K));

    FixedComplex sum{0, 0};
    for (const auto& [e, c] : p.terms) {
        FixedComplex pw{one, 0};
        bool first = true;
        for (std::size_t k = 0; k < bits; ++k) {
            if (!bit_test(e, k)) continue;
            pw = first ? sq[k] : detail::fixed_mul(pw, sq[k], K);
            first = false;
        }
        FixedComplex cf{detail::double_to_fixed(c.real(), K), detail::double_to_fixed(c.imag(), K)};
        FixedComplex t = detail::fixed_mul(cf, pw, K);
        sum.re += t.re;
        sum.im += t.im;
    }
    return {sum, K};
}

inline TruncatedValue eval_truncated(const SparsePoly& p, cdouble x, std::size_t L) {
    return eval_truncated(p, ComplexRational{Rational(x.real()), Rational(x.imag())}, L);
}

struct Annulus {
    double lower = 0, upper = 0;
};

// 1/(1+d^2) <= |x| <= 1 + ln(sqrt(s) d)/d for the polynomial with x-powers factored out.
inline Annulus root_annulus(const SparsePoly& p) {
    p.validate();
    SparsePoly q = p.without_trailing_power();
    if (q.degree == 0) throw InputError("root_annulus: constant polynomial after factoring x-powers");
    double d = q.degree.convert_to<double>();
    double s = static_cast<double>(q.term_count());
    return {1 / (1 + d * d), 1 + std::log(std::sqrt(s) * d) / d};
}

} // namespace prodsat
