#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "prodsat/qsat.hpp"

namespace prodsat {

inline constexpr double kVanishTol = 1e-12;

struct TransferResult {
    CVec xbar;  // x̄_j = sum conj(phi_{i..j}) v_1[i_1]...v_{k-1}[i_{k-1}]
    CVec g;     // (x̄_2, -x̄_1): the forced last qubit
    bool vanished = false;
};

// Forced assignment of the missing slot of a qubit constraint. partial holds the
// other slots in listed order; target is the position of the missing slot.
inline TransferResult transfer_at(const CVec& amps, const std::vector<CVec>& partial, std::size_t target) {
    const std::size_t k = partial.size() + 1;
    if (k < 2) throw InputError("transfer: need at least a 2-local constraint");
    if (amps.size() != (std::size_t{1} << k)) throw InputError("transfer: amplitude count is not 2^k");
    if (target >= k) throw InputError("transfer: target slot out of range");
    std::vector<const CVec*> vals(k, nullptr);
    double norms = 1;
    for (std::size_t s = 0, p = 0; s < k; ++s) {
        if (s == target) continue;
        if (partial[p].size() != 2) throw InputError("transfer: partial assignment is not a qubit");
        vals[s] = &partial[p];
        norms *= vec_norm(partial[p]);
        ++p;
    }
    CVec bra(amps.size());
    double phin = 0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        bra[i] = std::conj(amps[i]);
        phin += std::norm(amps[i]);
    }
    TransferResult r;
    r.xbar = detail::contract_slots<cdouble>(bra, std::vector<int>(k, 2), vals, cdouble(0));
    r.g = {r.xbar[1], -r.xbar[0]};
    r.vanished = vec_norm(r.xbar) <= kVanishTol * norms * std::sqrt(phin);
    return r;
}

inline TransferResult transfer(const CVec& amps, const std::vector<CVec>& partial) {
    return transfer_at(amps, partial, partial.size());
}

// 2-local constraint with x̄ = (a·v, b·v); g ∝ (b_1 x + b_2 y, -(a_1 x + a_2 y)).
inline CVec gadget_linear(const std::array<cdouble, 2>& a, const std::array<cdouble, 2>& b) {
    CVec amps(4);
    for (int i = 0; i < 2; ++i) {
        amps[i * 2 + 0] = std::conj(a[i]);
        amps[i * 2 + 1] = std::conj(b[i]);
    }
    if (!(vec_norm(amps) > 0)) throw InputError("gadget_linear: a and b are both zero");
    return normalized(amps);
}

// 3-local constraint with x̄ = (sum a_p m_p, sum b_p m_p) over the products
// m = (x1 x2, x1 y2, y1 x2, y1 y2) of the first two qubits.
inline CVec gadget_quadratic(const std::array<cdouble, 4>& a, const std::array<cdouble, 4>& b) {
    CVec amps(8);
    for (int p = 0; p < 4; ++p) {
        amps[p * 2 + 0] = std::conj(a[p]);
        amps[p * 2 + 1] = std::conj(b[p]);
    }
    if (!(vec_norm(amps) > 0)) throw InputError("gadget_quadratic: a and b are both zero");
    return normalized(amps);
}

inline CVec equality_gadget() { return gadget_linear({0.0, -1.0}, {1.0, 0.0}); }

} // namespace prodsat
