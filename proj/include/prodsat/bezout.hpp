#pragma once

#include <map>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "prodsat/hypergraph.hpp"
#include "prodsat/mhs.hpp"

namespace prodsat {

using BigInt = boost::multiprecision::cpp_int;

// Element of Z[H_1..H_n]/(H_j^{caps_j + 1}).
struct TruncatedRingElement {
    std::vector<int> caps;
    std::map<std::vector<int>, BigInt> coeffs;  // zero coefficients never stored

    static TruncatedRingElement one(std::vector<int> caps) {
        TruncatedRingElement r;
        r.coeffs[std::vector<int>(caps.size(), 0)] = 1;
        r.caps = std::move(caps);
        return r;
    }

    bool is_zero() const { return coeffs.empty(); }

    BigInt coefficient(const std::vector<int>& exps) const {
        auto it = coeffs.find(exps);
        return it == coeffs.end() ? BigInt(0) : it->second;
    }

    // Multiply by the linear form sum_j delta_j H_j, dropping exponents above the caps.
    void multiply_linear(const std::vector<int>& delta) {
        if (delta.size() != caps.size()) throw InputError("chow: class has wrong number of generators");
        std::map<std::vector<int>, BigInt> next;
        for (const auto& [exps, c] : coeffs)
            for (std::size_t j = 0; j < delta.size(); ++j) {
                if (delta[j] == 0 || exps[j] >= caps[j]) continue;
                auto e = exps;
                ++e[j];
                next[e] += c * delta[j];
            }
        coeffs = std::move(next);
    }

    friend bool operator==(const TruncatedRingElement&, const TruncatedRingElement&) = default;

    std::string to_string() const {
        if (coeffs.empty()) return "0";
        std::string out;
        for (const auto& [exps, c] : coeffs) {
            if (!out.empty()) out += " + ";
            out += c.str();
            for (std::size_t j = 0; j < exps.size(); ++j)
                if (exps[j] > 0) out += "*H" + std::to_string(j + 1) + "^" + std::to_string(exps[j]);
        }
        return out;
    }
};

// classes[i][j] = delta_j of the i-th class; caps[j] = d_j - 1.
inline TruncatedRingElement chow_product(const std::vector<std::vector<int>>& classes, const std::vector<int>& caps) {
    for (const auto& c : classes)
        for (int d : c)
            if (d < 0) throw InputError("chow: negative class coefficient");
    auto r = TruncatedRingElement::one(caps);
    for (const auto& c : classes) {
        r.multiply_linear(c);
        if (r.is_zero()) break;
    }
    return r;
}

namespace detail {
inline std::vector<int> group_caps(const std::vector<int>& group_sizes) {
    std::vector<int> caps;
    for (int s : group_sizes) {
        if (s < 1) throw InputError("bezout: group size must be positive");
        caps.push_back(s - 1);
    }
    return caps;
}
} // namespace detail

// group_sizes holds n_j + 1, the number of variables per group.
inline BigInt bezout_number(const DegreeMatrix& degrees, const std::vector<int>& group_sizes) {
    auto caps = detail::group_caps(group_sizes);
    for (const auto& row : degrees)
        if (row.size() != caps.size()) throw InputError("bezout: degree row length differs from group count");
    return chow_product(degrees, caps).coefficient(caps);
}

inline BigInt bezout_number(const MultiHomSystem& f) { return bezout_number(f.degrees(), f.group_sizes); }

// One vertex per group with weight n_j, one edge per equation on its touched groups.
inline WeightedHypergraph bezout_hypergraph(const DegreeMatrix& degrees, const std::vector<int>& group_sizes) {
    WeightedHypergraph h;
    h.weights = detail::group_caps(group_sizes);
    for (const auto& row : degrees) {
        if (row.size() != group_sizes.size()) throw InputError("bezout: degree row length differs from group count");
        std::vector<int> e;
        for (std::size_t j = 0; j < row.size(); ++j)
            if (row[j] > 0) e.push_back(static_cast<int>(j));
        if (e.empty()) throw InputError("bezout: equation of total degree 0");
        h.edges.push_back(std::move(e));
    }
    return h;
}

inline bool bezout_nonzero(const DegreeMatrix& degrees, const std::vector<int>& group_sizes) {
    return has_wsdr(bezout_hypergraph(degrees, group_sizes));
}

inline bool bezout_nonzero(const MultiHomSystem& f) { return bezout_nonzero(f.degrees(), f.group_sizes); }

// Degree data whose Bezout number counts the WSDRs of h (one group per vertex, n_j = w(v)).
inline std::pair<DegreeMatrix, std::vector<int>> degrees_of_hypergraph(const WeightedHypergraph& h) {
    DegreeMatrix d(h.edge_count(), std::vector<int>(h.vertex_count(), 0));
    for (std::size_t i = 0; i < h.edge_count(); ++i)
        for (int v : h.edges[i]) d[i][v] = 1;
    std::vector<int> sizes;
    for (int w : h.weights) sizes.push_back(w + 1);
    return {d, sizes};
}

} // namespace prodsat
