#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "prodsat/bezout.hpp"
#include "prodsat/qsat.hpp"
#include "prodsat/univariate.hpp"

namespace prodsat {

// z = f(x, y) for x in C^2, y in C^d.
inline CVec f_map(const CVec& x, const CVec& y) {
    if (x.size() != 2 || y.empty()) throw InputError("f_map: need x in C^2 and nonempty y");
    if (!(vec_norm(x) > 0) || !(vec_norm(y) > 0)) throw InputError("f_map: zero input");
    const std::size_t d = y.size();
    CVec z(d + 1);
    z[0] = x[0] * y[0];
    z[1] = x[1] * y[d - 1];
    for (std::size_t i = 0; i + 2 <= d; ++i) z[i + 2] = x[0] * y[i + 1] - x[1] * y[i];
    return z;
}

// Distance of a/|a| from the line through b.
inline double proportionality_residual(const CVec& a, const CVec& b) {
    CVec u = normalized(a), v = normalized(b);
    cdouble ip = 0;
    for (std::size_t i = 0; i < u.size(); ++i) ip += std::conj(v[i]) * u[i];
    double s = 0;
    for (std::size_t i = 0; i < u.size(); ++i) s += std::norm(u[i] - ip * v[i]);
    return std::sqrt(s);
}

struct Preimage {
    CVec x, y;
    double residual = 0;
};

inline Preimage f_preimage(const CVec& z) {
    if (z.size() < 2) throw InputError("f_preimage: need z of length at least 2");
    const double s = vec_norm(z);
    if (!(s > 0)) throw InputError("f_preimage: zero input");
    const std::size_t d = z.size() - 1;
    std::vector<Preimage> cands;

    if (std::abs(z[0]) <= 1e-8 * s) {
        Preimage p;
        p.x = {0.0, 1.0};
        p.y.assign(d, 0.0);
        p.y[d - 1] = z[1];
        for (std::size_t i = 0; i + 2 <= d; ++i) p.y[i] = -z[i + 2];
        if (vec_norm(p.y) > 0) {
            p.residual = proportionality_residual(f_map(p.x, p.y), z);
            cands.push_back(p);
        }
    }
    if (z[0] != cdouble(0)) {
        CVec w(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) w[i] = z[i] / z[0];
        // y_0 = 1, y_k = w_{k+1} + t y_{k-1}; then t y_{d-1}(t) = w_1.
        std::vector<UnivariatePoly> yp{UnivariatePoly::constant(1.0)};
        const UnivariatePoly t(CVec{0.0, 1.0});
        for (std::size_t k = 1; k < d; ++k) yp.push_back(t * yp[k - 1] + w[k + 1]);
        UnivariatePoly eq = t * yp[d - 1] + (-w[1]);
        for (cdouble r : roots_univariate(eq, 1e-9)) {
            Preimage p;
            p.x = {1.0, r};
            for (const auto& q : yp) p.y.push_back(q(r));
            p.residual = proportionality_residual(f_map(p.x, p.y), z);
            cands.push_back(p);
        }
    }
    if (cands.empty()) throw Refusal("f_preimage: no candidate preimage");
    auto best = std::min_element(cands.begin(), cands.end(),
                                 [](const Preimage& a, const Preimage& b) { return a.residual < b.residual; });
    if (!(best->residual <= 1e-8))
        throw Refusal("f_preimage: best round-trip residual " + std::to_string(best->residual) + " too large");
    return *best;
}

struct SplitStep {
    int qudit = 0;                // index of z; becomes the qubit x
    int dim = 0;                  // d + 1
    std::vector<int> new_indices; // {x, y}; y is appended at the end
};

struct SplitMapChain {
    std::vector<SplitStep> splits;
};

inline std::pair<QsatInstance, SplitStep> split_qudit(const QsatInstance& inst, int q) {
    if (q < 0 || q >= static_cast<int>(inst.dims.size())) throw InputError("split_qudit: index out of range");
    const int D = inst.dims[q];
    if (D < 3) throw InputError("split_qudit: qudit dimension must be at least 3");
    const int d = D - 1;
    const int y = static_cast<int>(inst.dims.size());

    // z_j = sum over (a, b, coeff) of coeff * x_a * y_b.
    struct Term {
        int a, b;
        double c;
    };
    std::vector<std::vector<Term>> m(D);
    m[0] = {{0, 0, 1.0}};
    m[1] = {{1, d - 1, 1.0}};
    for (int i = 0; i + 2 <= d; ++i) m[i + 2] = {{0, i + 1, 1.0}, {1, i, -1.0}};

    QsatInstance out;
    out.dims = inst.dims;
    out.dims[q] = 2;
    out.dims.push_back(d);
    for (const auto& c : inst.constraints) {
        auto pos = std::find(c.qudits.begin(), c.qudits.end(), q);
        if (pos == c.qudits.end()) {
            out.constraints.push_back(c);
            continue;
        }
        const std::size_t s = pos - c.qudits.begin();
        std::size_t suffix = 1;
        for (std::size_t t = s + 1; t < c.qudits.size(); ++t) suffix *= inst.dims[c.qudits[t]];
        Constraint nc;
        nc.qudits = c.qudits;
        nc.qudits.insert(nc.qudits.begin() + s + 1, y);
        CVec amps(c.amps.size() / D * 2 * d, 0.0);
        for (std::size_t flat = 0; flat < c.amps.size(); ++flat) {
            std::size_t suf = flat % suffix;
            std::size_t j = (flat / suffix) % D;
            std::size_t pre = flat / suffix / D;
            for (const auto& t : m[j]) {
                std::size_t nf = (pre * 2 * d + static_cast<std::size_t>(t.a * d + t.b)) * suffix + suf;
                amps[nf] += c.amps[flat] * t.c;
            }
        }
        nc.amps = unit_amps(std::move(amps));
        out.constraints.push_back(std::move(nc));
    }
    return {out, SplitStep{q, D, {q, y}}};
}

// Splits the highest-index qudit of dimension >= 3 until all are qubits.
inline std::pair<QsatInstance, SplitMapChain> reduce_to_qubits(const QsatInstance& inst) {
    inst.validate();
    QsatInstance cur = inst;
    SplitMapChain chain;
    while (true) {
        int q = -1;
        for (int i = static_cast<int>(cur.dims.size()); i-- > 0;)
            if (cur.dims[i] >= 3) {
                q = i;
                break;
            }
        if (q < 0) break;
        auto [next, step] = split_qudit(cur, q);
        cur = std::move(next);
        chain.splits.push_back(std::move(step));
    }
    return {cur, chain};
}

// Qubits that replace each of the first `original` qudits, in split order.
inline std::vector<std::vector<int>> chain_qubit_map(const SplitMapChain& chain, int original) {
    std::vector<int> head;                   // head[i] = original qudit owning index i
    for (int i = 0; i < original; ++i) head.push_back(i);
    std::vector<std::vector<int>> qubits(original);
    std::vector<int> tail(original);  // current y of each original qudit
    for (int i = 0; i < original; ++i) tail[i] = i;
    for (const auto& s : chain.splits) {
        int y = s.new_indices[1];
        if (static_cast<int>(head.size()) <= y) head.resize(y + 1, -1);
        int o = head[s.qudit];
        head[y] = o;
        qubits[o].push_back(s.qudit);
        tail[o] = y;
    }
    for (int i = 0; i < original; ++i) qubits[i].push_back(tail[i]);
    return qubits;
}

enum class Transport { lift, push };

inline ProductState transport_solution(const SplitMapChain& chain, const ProductState& state, Transport dir) {
    ProductState s = state;
    if (dir == Transport::lift) {
        for (const auto& st : chain.splits) {
            if (static_cast<int>(s.locals.size()) != st.new_indices[1] ||
                static_cast<int>(s.locals[st.qudit].size()) != st.dim)
                throw InputError("transport: state does not match the chain's source layout");
            Preimage p = f_preimage(s.locals[st.qudit]);
            s.locals[st.qudit] = normalized(p.x);
            s.locals.push_back(normalized(p.y));
        }
    } else {
        for (auto it = chain.splits.rbegin(); it != chain.splits.rend(); ++it) {
            int y = it->new_indices[1];
            if (static_cast<int>(s.locals.size()) != y + 1 || s.locals[it->qudit].size() != 2)
                throw InputError("transport: state does not match the chain's target layout");
            s.locals[it->qudit] = normalized(f_map(s.locals[it->qudit], s.locals[y]));
            s.locals.pop_back();
        }
    }
    return s;
}

inline long long antisymmetric_dimension(int nj) {
    long long s = nj + 1;
    return s * s - (s + 1) * s / 2;
}

inline CVec singlet_amps() {
    const double r = 1.0 / std::sqrt(2.0);
    return {0.0, r, -r, 0.0};
}

struct MhsCompilation {
    QsatInstance pre_reduction;                        // copies as qudits of size n_j + 1
    std::vector<std::vector<int>> copies;              // copies[j][c]: qudit index before reduction
    QsatInstance instance;                             // qubit instance
    SplitMapChain chain;
    std::vector<std::vector<std::vector<int>>> copy_qubits;  // [j][c][k]
    std::size_t equation_count = 0;                    // clauses 0..n-1 are the equations, then singlets
    Wsdr sdr;
};

inline MhsCompilation mhs_to_prodsat(const MultiHomSystem& input) {
    MultiHomSystem f = input;
    f.canonicalize();
    f.normalize();
    const DegreeMatrix deg = f.degrees();
    const std::size_t groups = f.group_sizes.size();
    long long need = 0;
    for (int s : f.group_sizes) {
        if (s < 2) throw InputError("mhs_to_prodsat: every group needs at least 2 variables");
        need += s - 1;
    }
    if (static_cast<long long>(f.equations.size()) != need)
        throw Refusal("mhs_to_prodsat: need exactly sum n_j = " + std::to_string(need) + " equations, got " +
                      std::to_string(f.equations.size()));
    auto wres = find_wsdr(bezout_hypergraph(deg, f.group_sizes));
    if (auto* hv = std::get_if<HallViolation>(&wres)) {
        std::string xs;
        for (int e : hv->edge_subset) xs += " " + std::to_string(e);
        throw Refusal("mhs_to_prodsat: Bezout number is zero; Hall violation on equations {" + xs + " } with capacity " +
                      std::to_string(hv->witness_size));
    }
    const Wsdr& groups_of = std::get<Wsdr>(wres);

    MhsCompilation out;
    out.equation_count = f.equations.size();
    out.copies.resize(groups);
    for (std::size_t j = 0; j < groups; ++j) {
        int cj = 0;
        for (const auto& row : deg) cj = std::max(cj, row[j]);
        for (int c = 0; c < cj; ++c) {
            out.copies[j].push_back(static_cast<int>(out.pre_reduction.dims.size()));
            out.pre_reduction.dims.push_back(f.group_sizes[j]);
        }
    }
    for (std::size_t i = 0; i < f.equations.size(); ++i) {
        Constraint c;
        std::vector<int> slot_dims;
        for (std::size_t j = 0; j < groups; ++j)
            for (int t = 0; t < deg[i][j]; ++t) {
                c.qudits.push_back(out.copies[j][t]);
                slot_dims.push_back(f.group_sizes[j]);
            }
        c.amps.assign(out.pre_reduction.amp_length(c), 0.0);
        for (const auto& term : f.equations[i].terms) {
            // A monomial's group-j variables, sorted, fill the group's slots in order.
            std::vector<int> idx;
            for (std::size_t j = 0; j < groups; ++j)
                for (const auto& vp : term.exps)
                    if (vp.group == static_cast<int>(j))
                        for (int p = 0; p < vp.pow; ++p) idx.push_back(vp.var);
            std::size_t flat = 0;
            for (std::size_t s = 0; s < idx.size(); ++s) flat = flat * slot_dims[s] + idx[s];
            c.amps[flat] += std::conj(term.coeff);
        }
        c.amps = unit_amps(std::move(c.amps));
        out.pre_reduction.constraints.push_back(std::move(c));
    }
    out.pre_reduction.validate();

    auto [qinst, chain] = reduce_to_qubits(out.pre_reduction);
    out.instance = std::move(qinst);
    out.chain = std::move(chain);
    auto qmap = chain_qubit_map(out.chain, static_cast<int>(out.pre_reduction.dims.size()));
    out.copy_qubits.resize(groups);
    for (std::size_t j = 0; j < groups; ++j)
        for (int qd : out.copies[j]) out.copy_qubits[j].push_back(qmap[qd]);

    // Equations assigned to group j take the first copy's qubits; singlet (c, c+1, k)
    // takes qubit k of copy c+1.
    out.sdr.assignment.assign(out.equation_count, -1);
    std::vector<int> used(groups, 0);
    for (std::size_t i = 0; i < out.equation_count; ++i) {
        int j = groups_of.assignment[i];
        out.sdr.assignment[i] = out.copy_qubits[j][0][used[j]++];
    }
    for (std::size_t j = 0; j < groups; ++j)
        for (std::size_t c = 0; c + 1 < out.copy_qubits[j].size(); ++c)
            for (std::size_t k = 0; k < out.copy_qubits[j][c].size(); ++k) {
                out.instance.constraints.push_back(
                    Constraint{{out.copy_qubits[j][c][k], out.copy_qubits[j][c + 1][k]}, singlet_amps()});
                out.sdr.assignment.push_back(out.copy_qubits[j][c + 1][k]);
            }
    out.instance.validate();
    if (!is_valid_wsdr(underlying_hypergraph(out.instance), out.sdr))
        throw Refusal("mhs_to_prodsat: internal error, SDR certificate does not validate");
    return out;
}

struct MhsExtraction {
    std::vector<CVec> y;               // one unit vector per group
    std::vector<double> residuals;     // |f_k(Y)| with normalized equations
    double singlet_residual = 0;       // max |<singlet| q q'>| over singlet clauses
    double copy_disagreement = 0;      // max proportionality residual between copies
};

inline MhsExtraction extract_mhs_solution(const MultiHomSystem& input, const MhsCompilation& comp,
                                          const ProductState& state) {
    MultiHomSystem f = input;
    f.canonicalize();
    f.normalize();
    check_state(comp.instance, state);
    MhsExtraction r;
    auto en = energy(comp.instance, state);
    for (std::size_t i = comp.equation_count; i < en.per_constraint.size(); ++i)
        r.singlet_residual = std::max(r.singlet_residual, std::sqrt(en.per_constraint[i]));
    ProductState pre = transport_solution(comp.chain, normalized(state), Transport::push);
    for (std::size_t j = 0; j < comp.copies.size(); ++j) {
        r.y.push_back(normalized(pre.locals[comp.copies[j][0]]));
        for (std::size_t c = 1; c < comp.copies[j].size(); ++c)
            r.copy_disagreement =
                std::max(r.copy_disagreement, proportionality_residual(pre.locals[comp.copies[j][c]], r.y.back()));
    }
    for (std::size_t i = 0; i < f.equations.size(); ++i) r.residuals.push_back(std::abs(f.evaluate(i, r.y)));
    return r;
}

} // namespace prodsat
