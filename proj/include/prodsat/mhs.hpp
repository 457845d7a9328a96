#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "prodsat/error.hpp"

namespace prodsat {

using cdouble = std::complex<double>;
using CVec = std::vector<cdouble>;

// Per-equation per-group total degrees d_{i,j}.
using DegreeMatrix = std::vector<std::vector<int>>;

struct VarPower {
    int group = 0;
    int var = 0;
    int pow = 0;
    friend bool operator==(const VarPower&, const VarPower&) = default;
    friend auto operator<=>(const VarPower&, const VarPower&) = default;
};

struct MhsTerm {
    std::vector<VarPower> exps;  // sorted by (group, var), pow > 0
    cdouble coeff;
};

struct MhsEquation {
    std::vector<MhsTerm> terms;
};

// Groups Z_j of size n_j + 1; each equation multi-homogeneous in the groups.
struct MultiHomSystem {
    std::vector<int> group_sizes;
    std::vector<MhsEquation> equations;

    std::size_t group_count() const { return group_sizes.size(); }

    // Sorts and merges factors of every monomial; rejects malformed terms.
    void canonicalize() {
        for (auto& eq : equations)
            for (auto& t : eq.terms) {
                std::sort(t.exps.begin(), t.exps.end());
                std::vector<VarPower> merged;
                for (const auto& f : t.exps) {
                    if (f.group < 0 || f.group >= static_cast<int>(group_sizes.size()))
                        throw InputError("mhs: group index out of range");
                    if (f.var < 0 || f.var >= group_sizes[f.group]) throw InputError("mhs: variable index out of range");
                    if (f.pow < 0) throw InputError("mhs: negative exponent");
                    if (f.pow == 0) continue;
                    if (!merged.empty() && merged.back().group == f.group && merged.back().var == f.var)
                        merged.back().pow += f.pow;
                    else
                        merged.push_back(f);
                }
                t.exps = std::move(merged);
            }
    }

    // d_{i,j}; throws if some equation is not multi-homogeneous.
    DegreeMatrix degrees() const {
        DegreeMatrix d(equations.size(), std::vector<int>(group_sizes.size(), 0));
        for (std::size_t i = 0; i < equations.size(); ++i) {
            const auto& eq = equations[i];
            if (eq.terms.empty()) throw InputError("mhs: equation " + std::to_string(i) + " has no terms");
            for (std::size_t t = 0; t < eq.terms.size(); ++t) {
                std::vector<int> tot(group_sizes.size(), 0);
                for (const auto& f : eq.terms[t].exps) tot[f.group] += f.pow;
                if (t == 0)
                    d[i] = tot;
                else if (tot != d[i])
                    throw InputError("mhs: equation " + std::to_string(i) + " is not multi-homogeneous");
            }
            if (std::all_of(d[i].begin(), d[i].end(), [](int x) { return x == 0; }))
                throw InputError("mhs: equation " + std::to_string(i) + " has total degree 0");
        }
        return d;
    }

    void normalize() {
        for (std::size_t i = 0; i < equations.size(); ++i) {
            double s = 0;
            for (const auto& t : equations[i].terms) s += std::norm(t.coeff);
            s = std::sqrt(s);
            if (!(s > 0)) throw InputError("mhs: equation " + std::to_string(i) + " has zero coefficients");
            for (auto& t : equations[i].terms) t.coeff /= s;
        }
    }

    void validate() const {
        for (int s : group_sizes)
            if (s < 1) throw InputError("mhs: group size must be positive");
        (void)degrees();
    }

    cdouble evaluate(std::size_t i, const std::vector<CVec>& y) const {
        cdouble sum = 0;
        for (const auto& t : equations.at(i).terms) {
            cdouble p = t.coeff;
            for (const auto& f : t.exps) p *= std::pow(y.at(f.group).at(f.var), f.pow);
            sum += p;
        }
        return sum;
    }
};

} // namespace prodsat
