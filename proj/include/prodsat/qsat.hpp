#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "prodsat/hypergraph.hpp"
#include "prodsat/mhs.hpp"

namespace prodsat {

struct Constraint {
    std::vector<int> qudits;  // listed order; first is most significant in amps
    CVec amps;                // unit norm
};

struct QsatInstance {
    std::vector<int> dims;
    std::vector<Constraint> constraints;

    std::size_t qudit_count() const { return dims.size(); }
    std::size_t constraint_count() const { return constraints.size(); }

    std::size_t amp_length(const Constraint& c) const {
        std::size_t len = 1;
        for (int q : c.qudits) len *= static_cast<std::size_t>(dims.at(q));
        return len;
    }

    bool all_qubits() const {
        for (int d : dims)
            if (d != 2) return false;
        return true;
    }

    void validate() const {
        for (int d : dims)
            if (d < 2) throw InputError("instance: qudit dimension below 2");
        for (std::size_t i = 0; i < constraints.size(); ++i) {
            const auto& c = constraints[i];
            std::string tag = "instance: constraint " + std::to_string(i);
            if (c.qudits.empty()) throw InputError(tag + " acts on no qudits");
            std::vector<int> s(c.qudits);
            std::sort(s.begin(), s.end());
            if (std::adjacent_find(s.begin(), s.end()) != s.end()) throw InputError(tag + " repeats a qudit");
            if (s.front() < 0 || s.back() >= static_cast<int>(dims.size())) throw InputError(tag + " qudit out of range");
            if (c.amps.size() != amp_length(c)) throw InputError(tag + " has wrong amplitude count");
            double nrm = 0;
            for (auto a : c.amps) nrm += std::norm(a);
            if (std::abs(std::sqrt(nrm) - 1.0) > 1e-12) throw InputError(tag + " is not unit norm");
        }
    }
};

// Normalizes only when the norm is off by more than the tolerance, so unit
// vectors pass through bit-exact.
inline CVec unit_amps(CVec amps) {
    double nrm = 0;
    for (auto a : amps) nrm += std::norm(a);
    nrm = std::sqrt(nrm);
    if (!(nrm > 0)) throw InputError("constraint amplitudes are zero");
    if (std::abs(nrm - 1.0) > 1e-12)
        for (auto& a : amps) a /= nrm;
    return amps;
}

inline Constraint make_constraint(std::vector<int> qudits, CVec amps) {
    return Constraint{std::move(qudits), unit_amps(std::move(amps))};
}

// Bra coefficients: the constraint as a multilinear form sum conj(amp) prod x.
inline CVec bra_coeffs(const Constraint& c) {
    CVec b(c.amps.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::conj(c.amps[i]);
    return b;
}

struct ProductState {
    std::vector<CVec> locals;
};

inline double vec_norm(const CVec& v) {
    double s = 0;
    for (auto a : v) s += std::norm(a);
    return std::sqrt(s);
}

inline CVec normalized(CVec v) {
    double n = vec_norm(v);
    if (!(n > 0)) throw InputError("zero local vector");
    for (auto& a : v) a /= n;
    return v;
}

inline ProductState normalized(const ProductState& s) {
    ProductState r;
    for (const auto& v : s.locals) r.locals.push_back(normalized(v));
    return r;
}

namespace detail {

// Contracts a row-major coefficient tensor with values on the non-free slots.
// values[s] == nullptr marks slot s free; the result is row-major over free slots.
template <class T>
std::vector<T> contract_slots(const CVec& coeffs, const std::vector<int>& slot_dims,
                              const std::vector<const std::vector<T>*>& values, const T& zero) {
    const std::size_t k = slot_dims.size();
    std::size_t out_len = 1;
    for (std::size_t s = 0; s < k; ++s)
        if (!values[s]) out_len *= slot_dims[s];
    std::vector<T> out(out_len, zero);
    std::vector<int> idx(k, 0);
    for (std::size_t flat = 0; flat < coeffs.size(); ++flat) {
        if (coeffs[flat] != cdouble(0)) {
            T term = zero;
            bool first = true;
            std::size_t o = 0;
            for (std::size_t s = 0; s < k; ++s) {
                if (values[s]) {
                    const T& x = (*values[s])[idx[s]];
                    term = first ? x : term * x;
                    first = false;
                } else {
                    o = o * slot_dims[s] + idx[s];
                }
            }
            if (first)
                out[o] = out[o] + coeffs[flat];
            else
                out[o] = out[o] + term * coeffs[flat];
        }
        for (std::size_t s = k; s-- > 0;) {
            if (++idx[s] < slot_dims[s]) break;
            idx[s] = 0;
        }
    }
    return out;
}

} // namespace detail

// <phi| (x) psi_v> for unnormalized locals.
inline cdouble overlap(const QsatInstance& inst, const Constraint& c, const ProductState& s) {
    std::vector<int> sd;
    std::vector<const CVec*> vals;
    for (int q : c.qudits) {
        sd.push_back(inst.dims[q]);
        vals.push_back(&s.locals[q]);
    }
    return detail::contract_slots<cdouble>(bra_coeffs(c), sd, vals, cdouble(0))[0];
}

struct EnergyReport {
    double total = 0;
    double max_per_constraint = 0;
    std::vector<double> per_constraint;  // |<phi_i| psi>|^2
};

inline void check_state(const QsatInstance& inst, const ProductState& s) {
    if (s.locals.size() != inst.dims.size()) throw InputError("state: wrong number of locals");
    for (std::size_t q = 0; q < inst.dims.size(); ++q)
        if (static_cast<int>(s.locals[q].size()) != inst.dims[q])
            throw InputError("state: local " + std::to_string(q) + " has wrong dimension");
}

inline EnergyReport energy(const QsatInstance& inst, const ProductState& state) {
    check_state(inst, state);
    ProductState s = normalized(state);
    EnergyReport r;
    for (const auto& c : inst.constraints) {
        double e = std::norm(overlap(inst, c, s));
        r.per_constraint.push_back(e);
        r.total += e;
        r.max_per_constraint = std::max(r.max_per_constraint, e);
    }
    return r;
}

inline WeightedHypergraph underlying_hypergraph(const QsatInstance& inst) {
    WeightedHypergraph h;
    for (int d : inst.dims) h.weights.push_back(d - 1);
    for (const auto& c : inst.constraints) h.edges.push_back(c.qudits);
    return h;
}

// Classes [V_i] = sum_{v in e_i} H_v with caps d_v - 1.
inline std::pair<std::vector<std::vector<int>>, std::vector<int>> chow_classes(const QsatInstance& inst) {
    std::vector<std::vector<int>> classes;
    for (const auto& c : inst.constraints) {
        std::vector<int> delta(inst.dims.size(), 0);
        for (int q : c.qudits) delta[q] = 1;
        classes.push_back(std::move(delta));
    }
    std::vector<int> caps;
    for (int d : inst.dims) caps.push_back(d - 1);
    return {classes, caps};
}

inline CVec random_unit_vector(std::size_t len, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    CVec v(len);
    for (auto& a : v) {
        double re = g(rng);
        double im = g(rng);
        a = {re, im};
    }
    return normalized(v);
}

inline QsatInstance random_instance(const std::vector<int>& dims, const std::vector<std::vector<int>>& edges,
                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    QsatInstance inst;
    inst.dims = dims;
    for (const auto& e : edges) {
        Constraint c{e, {}};
        c.amps = random_unit_vector(inst.amp_length(c), rng);
        inst.constraints.push_back(std::move(c));
    }
    inst.validate();
    return inst;
}

inline QsatInstance gen_cycle(int dim, int n, std::uint64_t seed) {
    if (n < 3) throw InputError("gen_cycle: need n >= 3");
    std::vector<std::vector<int>> edges;
    for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
    return random_instance(std::vector<int>(n, dim), edges, seed);
}

// Vertex and constraint indices of the pinwheel graph.
struct PinwheelLayout {
    int n = 0;
    // v_0 is vertex 0; v_{j,k} is 2^j - 1 + k.
    int vertex(int j, int k) const { return j == 0 ? 0 : (1 << j) - 1 + k; }
    int vertex_count() const { return (1 << (n + 1)) - 1; }
    std::vector<std::vector<int>> ring;   // ring[j-1][k]: constraint of e_{j,k} on (v_{j,k}, v_{j,k+1})
    std::vector<std::vector<int>> spoke;  // spoke[j-1][k]: constraint of eps_{j,k} on (parent, v_{j,k})
    int closing[2] = {-1, -1};            // constraints of eps_0, eps_1 on (v_0, endpoint)
    int closing_endpoint[2] = {-1, -1};   // v_{n, 2^{n-i}-1}
};

struct Pinwheel {
    QsatInstance instance;
    PinwheelLayout layout;
};

inline PinwheelLayout pinwheel_layout(int n) {
    if (n < 1) throw InputError("pinwheel: need n >= 1");
    if (n > 20) throw Refusal("pinwheel: n = " + std::to_string(n) + " exceeds the size limit 20");
    PinwheelLayout L;
    L.n = n;
    int idx = 0;
    L.ring.resize(n);
    L.spoke.resize(n);
    for (int j = 1; j <= n; ++j)
        for (int k = 0; k < (1 << j); ++k) L.ring[j - 1].push_back(idx++);
    for (int j = 1; j <= n; ++j)
        for (int k = 0; k < (1 << j); ++k) L.spoke[j - 1].push_back(idx++);
    for (int i = 0; i < 2; ++i) {
        L.closing[i] = idx++;
        L.closing_endpoint[i] = L.vertex(n, (1 << (n - i)) - 1);
    }
    return L;
}

inline std::vector<std::vector<int>> pinwheel_edges(const PinwheelLayout& L) {
    std::vector<std::vector<int>> edges;
    for (int j = 1; j <= L.n; ++j)
        for (int k = 0; k < (1 << j); ++k) edges.push_back({L.vertex(j, k), L.vertex(j, (k + 1) % (1 << j))});
    for (int j = 1; j <= L.n; ++j)
        for (int k = 0; k < (1 << j); ++k) edges.push_back({L.vertex(j - 1, k / 2), L.vertex(j, k)});
    for (int i = 0; i < 2; ++i) edges.push_back({0, L.closing_endpoint[i]});
    return edges;
}

inline Pinwheel gen_pinwheel(int n, std::uint64_t seed) {
    Pinwheel p;
    p.layout = pinwheel_layout(n);
    p.instance = random_instance(std::vector<int>(p.layout.vertex_count(), 3), pinwheel_edges(p.layout), seed);
    return p;
}

// f(e_{j,k}) = f(eps_{j,k}) = v_{j,k}, f(eps_i) = v_0.
inline Wsdr pinwheel_canonical_wsdr(const PinwheelLayout& L) {
    Wsdr f;
    f.assignment.assign(2 * L.vertex_count(), -1);
    for (int j = 1; j <= L.n; ++j)
        for (int k = 0; k < (1 << j); ++k) {
            f.assignment[L.ring[j - 1][k]] = L.vertex(j, k);
            f.assignment[L.spoke[j - 1][k]] = L.vertex(j, k);
        }
    f.assignment[L.closing[0]] = 0;
    f.assignment[L.closing[1]] = 0;
    return f;
}

// One group per qudit; one multilinear equation per constraint with coefficients conj(amps).
inline MultiHomSystem to_mhs(const QsatInstance& inst) {
    inst.validate();
    MultiHomSystem f;
    f.group_sizes = inst.dims;
    for (const auto& c : inst.constraints) {
        MhsEquation eq;
        std::vector<int> idx(c.qudits.size(), 0);
        for (std::size_t flat = 0; flat < c.amps.size(); ++flat) {
            if (c.amps[flat] != cdouble(0)) {
                MhsTerm t;
                for (std::size_t s = 0; s < c.qudits.size(); ++s) t.exps.push_back({c.qudits[s], idx[s], 1});
                std::sort(t.exps.begin(), t.exps.end());
                t.coeff = std::conj(c.amps[flat]);
                eq.terms.push_back(std::move(t));
            }
            for (std::size_t s = c.qudits.size(); s-- > 0;) {
                if (++idx[s] < inst.dims[c.qudits[s]]) break;
                idx[s] = 0;
            }
        }
        f.equations.push_back(std::move(eq));
    }
    return f;
}

inline long long entangled_subspace_max_dim(const std::vector<int>& dims) {
    long long prod = 1, sum = 0;
    for (int d : dims) {
        if (d < 2) throw InputError("entangled_subspace_max_dim: dimensions must be >= 2");
        if (__builtin_mul_overflow(prod, static_cast<long long>(d), &prod))
            throw Refusal("entangled_subspace_max_dim: product overflows 64 bits");
        sum += d;
    }
    return prod - sum + static_cast<long long>(dims.size()) - 1;
}

// Clauses of signed 1-based literals (DIMACS style).
struct CnfFormula {
    int variable_count = 0;
    std::vector<std::vector<int>> clauses;

    void validate() const {
        for (const auto& c : clauses) {
            if (c.empty()) throw InputError("cnf: empty clause");
            for (int lit : c)
                if (lit == 0 || std::abs(lit) > variable_count) throw InputError("cnf: literal out of range");
        }
    }

    bool satisfied_by(const std::vector<bool>& a) const {
        for (const auto& c : clauses) {
            bool ok = false;
            for (int lit : c) ok = ok || (a[std::abs(lit) - 1] == (lit > 0));
            if (!ok) return false;
        }
        return true;
    }
};

// Matches clauses to distinct variables and sets each matched literal true.
inline std::variant<std::vector<bool>, HallViolation> solve_sat_with_sdr(const CnfFormula& cnf) {
    cnf.validate();
    WeightedHypergraph h;
    h.weights.assign(cnf.variable_count, 1);
    for (const auto& c : cnf.clauses) {
        std::vector<int> e;
        for (int lit : c) e.push_back(std::abs(lit) - 1);
        std::sort(e.begin(), e.end());
        e.erase(std::unique(e.begin(), e.end()), e.end());
        h.edges.push_back(std::move(e));
    }
    auto r = find_wsdr(h);
    if (auto* hv = std::get_if<HallViolation>(&r)) return *hv;
    const auto& f = std::get<Wsdr>(r);
    std::vector<bool> a(cnf.variable_count, false);
    for (std::size_t i = 0; i < cnf.clauses.size(); ++i) {
        int v = f.assignment[i];
        for (int lit : cnf.clauses[i])
            if (std::abs(lit) - 1 == v) {
                a[v] = lit > 0;
                break;
            }
    }
    return a;
}

} // namespace prodsat
