#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "prodsat/hypergraph.hpp"
#include "prodsat/qsat.hpp"
#include "prodsat/reductions.hpp"
#include "prodsat/transfer.hpp"
#include "prodsat/univariate.hpp"

namespace prodsat {

struct SolveOptions {
    double eps = 1e-8;       // bound on every residual |<phi_i|psi>|
    int degree_cap = 4096;   // coefficient count of propagated polynomials
    std::uint64_t seed = 1;
    int starts = 64;         // multistart budget
    int threads = 1;
    bool polish = true;      // Newton refinement when the first pass misses eps
};

// residuals[i] = |<phi_i| psi>| with unit locals, i.e. the square root of the
// per-constraint energy.
struct SolveReport {
    bool success = false;
    std::string method;
    std::string message;
    std::optional<ProductState> state;
    std::vector<double> residuals;
    double max_residual = std::numeric_limits<double>::infinity();
    int violated = -1;                 // worst constraint when verification fails
    int recursion_depth = 0;
    int radius = 0;
    int non_extending = 0;
    int root_calls = 0;                // calls into roots_univariate
    std::vector<int> closing_degrees;
    std::vector<int> closing_degree_bounds;
    std::optional<cdouble> chosen_root;  // u_0 = (x, 1) on qubit closing_variable
    int closing_variable = -1;
    std::vector<cdouble> alternatives;
    bool polished = false;
    int starts_used = 0;
    double seconds = 0;
    std::vector<std::string> notes;
};

// ---------------------------------------------------------------- verify

namespace detail {

struct Neumaier {
    double sum = 0, comp = 0;
    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

inline CVec unit_compensated(const CVec& v) {
    Neumaier s;
    for (auto a : v) s.add(std::norm(a));
    double n = std::sqrt(s.value());
    if (!(n > 0)) throw InputError("verify: zero local vector");
    CVec r(v);
    for (auto& a : r) a /= n;
    return r;
}

} // namespace detail

// Recomputes every residual with compensated sums, independent of energy().
inline SolveReport verify(const QsatInstance& inst, const ProductState& state, double eps) {
    inst.validate();
    check_state(inst, state);
    std::vector<CVec> u;
    for (const auto& v : state.locals) u.push_back(detail::unit_compensated(v));
    SolveReport r;
    r.method = "verify";
    r.state = state;
    r.max_residual = 0;
    for (std::size_t ci = 0; ci < inst.constraints.size(); ++ci) {
        const auto& c = inst.constraints[ci];
        const std::size_t k = c.qudits.size();
        std::vector<int> idx(k, 0);
        detail::Neumaier re, im;
        for (std::size_t flat = 0; flat < c.amps.size(); ++flat) {
            cdouble p = std::conj(c.amps[flat]);
            for (std::size_t s = 0; s < k; ++s) p *= u[c.qudits[s]][idx[s]];
            re.add(p.real());
            im.add(p.imag());
            for (std::size_t s = k; s-- > 0;) {
                if (++idx[s] < inst.dims[c.qudits[s]]) break;
                idx[s] = 0;
            }
        }
        double res = std::hypot(re.value(), im.value());
        r.residuals.push_back(res);
        if (res > r.max_residual || r.violated < 0) {
            if (res >= r.max_residual) r.violated = static_cast<int>(ci);
            r.max_residual = std::max(r.max_residual, res);
        }
    }
    r.success = r.max_residual <= eps;
    if (r.success) r.violated = -1;
    r.message = r.success ? "all residuals within eps" : "constraint " + std::to_string(r.violated) + " exceeds eps";
    return r;
}

// ---------------------------------------------------------------- Newton

namespace detail {

inline ProductState random_state(const QsatInstance& inst, std::mt19937_64& rng) {
    ProductState s;
    for (int d : inst.dims) s.locals.push_back(random_unit_vector(d, rng));
    return s;
}

inline ProductState fill_unassigned(const QsatInstance& inst, const std::vector<std::optional<CVec>>& a) {
    ProductState s;
    for (std::size_t q = 0; q < inst.dims.size(); ++q) {
        if (a[q]) {
            s.locals.push_back(*a[q]);
        } else {
            CVec e(inst.dims[q], 0.0);
            e[0] = 1.0;
            s.locals.push_back(e);
        }
    }
    return s;
}

inline double total_energy(const QsatInstance& inst, const ProductState& s) { return energy(inst, s).total; }

struct NewtonRun {
    ProductState state;
    double max_residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

// Gauss-Newton in per-qudit affine charts (largest component held fixed);
// minimum-norm steps make under-determined systems converge too.
inline NewtonRun newton_run(const QsatInstance& inst, ProductState s, int max_iter, double target) {
    const std::size_t n = inst.dims.size(), m = inst.constraints.size();
    NewtonRun out;
    s = normalized(s);
    double cur = total_energy(inst, s);
    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it;
        if (std::sqrt(energy(inst, s).max_per_constraint) <= target) break;
        std::vector<int> pivot(n), col0(n);
        int cols = 0;
        for (std::size_t q = 0; q < n; ++q) {
            int p = 0;
            for (int i = 1; i < inst.dims[q]; ++i)
                if (std::abs(s.locals[q][i]) > std::abs(s.locals[q][p])) p = i;
            pivot[q] = p;
            col0[q] = cols;
            cols += inst.dims[q] - 1;
        }
        Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(m, cols);
        Eigen::VectorXcd F(m);
        for (std::size_t ci = 0; ci < m; ++ci) {
            const auto& c = inst.constraints[ci];
            F(ci) = overlap(inst, c, s);
            CVec bra = bra_coeffs(c);
            std::vector<int> sd;
            for (int q : c.qudits) sd.push_back(inst.dims[q]);
            for (std::size_t slot = 0; slot < c.qudits.size(); ++slot) {
                std::vector<const CVec*> vals;
                for (std::size_t t = 0; t < c.qudits.size(); ++t) vals.push_back(t == slot ? nullptr : &s.locals[c.qudits[t]]);
                CVec grad = contract_slots<cdouble>(bra, sd, vals, cdouble(0));
                int q = c.qudits[slot];
                for (int i = 0, col = col0[q]; i < inst.dims[q]; ++i) {
                    if (i == pivot[q]) continue;
                    J(ci, col++) = grad[i];
                }
            }
        }
        Eigen::VectorXcd delta = J.completeOrthogonalDecomposition().solve(-F);
        bool accepted = false;
        for (double t = 1.0; t > 1e-6; t *= 0.5) {
            ProductState trial = s;
            for (std::size_t q = 0; q < n; ++q)
                for (int i = 0, col = col0[q]; i < inst.dims[q]; ++i) {
                    if (i == pivot[q]) continue;
                    trial.locals[q][i] += t * delta(col++);
                }
            trial = normalized(trial);
            double e = total_energy(inst, trial);
            if (e < cur) {
                s = std::move(trial);
                cur = e;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    out.state = s;
    out.max_residual = std::sqrt(energy(inst, s).max_per_constraint);
    return out;
}

// Runs starts in index order, `threads` at a time; the lowest-index start that
// reaches eps wins, so the outcome does not depend on the thread count.
template <class Run>
std::pair<int, std::vector<NewtonRun>> multistart(int starts, int threads, double eps, Run run) {
    threads = std::max(1, threads);
    std::vector<NewtonRun> results(starts);
    for (int base = 0; base < starts; base += threads) {
        int hi = std::min(starts, base + threads);
        if (threads == 1) {
            results[base] = run(base);
        } else {
            std::vector<std::thread> pool;
            for (int i = base; i < hi; ++i) pool.emplace_back([&, i] { results[i] = run(i); });
            for (auto& t : pool) t.join();
        }
        for (int i = base; i < hi; ++i)
            if (results[i].max_residual <= eps) return {i, results};
    }
    return {-1, results};
}

inline std::uint64_t start_seed(std::uint64_t seed, int idx) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(idx)};
    std::uint32_t w[2];
    seq.generate(w, w + 2);
    return (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
}

} // namespace detail

inline ProductState newton_polish(const QsatInstance& inst, const ProductState& s, int iters = 30) {
    return detail::newton_run(inst, s, iters, 1e-15).state;
}

namespace detail {

// Verifies, polishing with Newton if the first pass misses eps.
inline void finalize(SolveReport& rep, const QsatInstance& inst, ProductState state, const SolveOptions& opt) {
    SolveReport v = verify(inst, state, opt.eps);
    if (!v.success && opt.polish && v.max_residual < 1e-2) {
        ProductState p = newton_polish(inst, state);
        SolveReport v2 = verify(inst, p, opt.eps);
        if (v2.max_residual < v.max_residual) {
            v = v2;
            state = p;
            rep.polished = true;
        }
    }
    rep.state = state;
    rep.residuals = v.residuals;
    rep.max_residual = v.max_residual;
    rep.violated = v.violated;
    rep.success = v.success;
    if (rep.message.empty()) rep.message = v.message;
    else if (!v.success) rep.message += "; " + v.message;
}

} // namespace detail

// Multistart Newton for any instance; used where no structured solver applies.
inline SolveReport solve_newton(const QsatInstance& inst, const SolveOptions& opt = {}) {
    auto t0 = std::chrono::steady_clock::now();
    inst.validate();
    SolveReport rep;
    rep.method = "newton";
    auto [win, runs] = detail::multistart(opt.starts, opt.threads, opt.eps * 1e-3, [&](int i) {
        std::mt19937_64 rng(detail::start_seed(opt.seed, i));
        return detail::newton_run(inst, detail::random_state(inst, rng), 200, 1e-15);
    });
    int pick = win;
    if (pick < 0) {
        pick = 0;
        for (int i = 1; i < static_cast<int>(runs.size()); ++i)
            if (runs[i].max_residual < runs[pick].max_residual) pick = i;
    }
    rep.starts_used = win < 0 ? opt.starts : win + 1;
    SolveOptions o = opt;
    o.polish = false;
    detail::finalize(rep, inst, runs[pick].state, o);
    if (!rep.success) rep.message = "newton: no start reached eps after " + std::to_string(opt.starts) + " starts; " + rep.message;
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// ---------------------------------------------------------------- transfer filtrations

namespace detail {

using Assignment = std::vector<std::optional<CVec>>;
using PolyPair = std::vector<UnivariatePoly>;

struct ReducedConstraint {
    int index;
    std::vector<int> free;
    CVec coeffs;
};

inline std::vector<ReducedConstraint> reduce_constraints(const QsatInstance& inst, const Assignment& a) {
    std::vector<ReducedConstraint> out;
    for (std::size_t ci = 0; ci < inst.constraints.size(); ++ci) {
        const auto& c = inst.constraints[ci];
        std::vector<const CVec*> vals;
        std::vector<int> free;
        for (int q : c.qudits) {
            vals.push_back(a[q] ? &*a[q] : nullptr);
            if (!a[q]) free.push_back(q);
        }
        if (free.empty()) continue;
        CVec red = contract_slots<cdouble>(bra_coeffs(c), std::vector<int>(c.qudits.size(), 2), vals, cdouble(0));
        if (vec_norm(red) <= kVanishTol) continue;
        out.push_back({static_cast<int>(ci), std::move(free), std::move(red)});
    }
    return out;
}

// Forced value of qubit u from constraint ci with every other slot assigned.
inline std::optional<CVec> forced(const QsatInstance& inst, int ci, const Assignment& a, int u) {
    const auto& c = inst.constraints[ci];
    std::vector<CVec> partial;
    std::size_t target = 0;
    for (std::size_t s = 0; s < c.qudits.size(); ++s) {
        if (c.qudits[s] == u) {
            target = s;
            continue;
        }
        if (!a[c.qudits[s]]) return std::nullopt;
        partial.push_back(*a[c.qudits[s]]);
    }
    TransferResult t = transfer_at(c.amps, partial, target);
    if (t.vanished) return std::nullopt;
    return normalized(t.g);
}

inline PolyPair forced_poly(const QsatInstance& inst, int ci, const std::vector<std::optional<PolyPair>>& pa, int u) {
    const auto& c = inst.constraints[ci];
    std::vector<const PolyPair*> vals;
    for (int q : c.qudits) vals.push_back(q == u ? nullptr : &*pa[q]);
    PolyPair xb = contract_slots<UnivariatePoly>(bra_coeffs(c), std::vector<int>(c.qudits.size(), 2), vals,
                                                  UnivariatePoly(CVec{0.0}));
    return {xb[1], -xb[0]};
}

inline bool poly_pair_vanishes(const PolyPair& p) { return p[0].max_abs() <= kVanishTol && p[1].max_abs() <= kVanishTol; }

struct FiltrationSolver {
    const QsatInstance& inst;
    const SolveOptions& opt;
    SolveReport& rep;

    const CVec e0 = {1.0, 0.0};

    // Numeric pass along positions; unassigned where a transfer vanished or an input is missing.
    void propagate(Assignment& a, const std::vector<ReducedConstraint>& red, const ExtendingOrder& ord,
                   const std::vector<std::size_t>& positions) {
        for (std::size_t pos : positions) {
            int u = ord.added_vertex[pos];
            if (u < 0 || a[u]) continue;
            a[u] = forced(inst, red[ord.order[pos]].index, a, u);
        }
    }

    std::vector<std::size_t> positions_except(std::size_t n, std::size_t skip) {
        std::vector<std::size_t> p;
        for (std::size_t i = 0; i < n; ++i)
            if (i != skip) p.push_back(i);
        return p;
    }

    double candidate_energy(const Assignment& a) { return total_energy(inst, fill_unassigned(inst, a)); }

    bool solve(Assignment& a, int depth, int max_depth) {
        rep.recursion_depth = std::max(rep.recursion_depth, depth);
        while (true) {
            auto red = reduce_constraints(inst, a);
            if (red.empty()) return true;

            // 1-local constraints force their qubit.
            std::vector<int> forced_by(inst.dims.size(), -1);
            bool progress = false;
            for (std::size_t r = 0; r < red.size(); ++r) {
                if (red[r].free.size() != 1) continue;
                int q = red[r].free[0];
                CVec g = normalized(CVec{red[r].coeffs[1], -red[r].coeffs[0]});
                if (forced_by[q] >= 0) {
                    const CVec& h = *a[q];
                    if (std::abs(g[0] * h[1] - g[1] * h[0]) > 1e-9) {
                        rep.notes.push_back("conflicting 1-local constraints on qubit " + std::to_string(q));
                        return false;
                    }
                    continue;
                }
                a[q] = g;
                forced_by[q] = static_cast<int>(r);
                progress = true;
            }
            if (progress) continue;

            WeightedHypergraph h;
            h.weights.assign(inst.dims.size(), 1);
            for (const auto& r : red) h.edges.push_back(r.free);
            auto ord = find_extending_order(h, 1);
            if (!ord) {
                rep.message = "residual system has no almost extending order";
                return false;
            }
            auto filt = filtration_of_order(h, *ord);
            if (ord->non_extending_count == 0) {
                for (int v : filt.foundation)
                    if (!a[v]) a[v] = e0;
                std::vector<std::size_t> all(ord->order.size());
                for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
                propagate(a, red, *ord, all);
                for (auto& v : a)
                    if (!v) v = e0;
                return true;
            }
            std::size_t close = 0;
            while (ord->added_vertex[close] >= 0) ++close;

            // deps[v]: foundation vertices v depends on, along the order up to the closing edge.
            const auto& R = filt.foundation;
            std::vector<std::vector<char>> deps(inst.dims.size(), std::vector<char>(R.size(), 0));
            for (std::size_t i = 0; i < R.size(); ++i) deps[R[i]][i] = 1;
            for (std::size_t pos = 0; pos < close; ++pos) {
                int u = ord->added_vertex[pos];
                for (int v : red[ord->order[pos]].free)
                    if (v != u)
                        for (std::size_t i = 0; i < R.size(); ++i) deps[u][i] |= deps[v][i];
            }
            int u0 = -1;
            for (std::size_t i = 0; i < R.size() && u0 < 0; ++i)
                for (int v : red[ord->order[close]].free)
                    if (deps[v][i]) {
                        u0 = R[i];
                        break;
                    }
            if (u0 < 0) u0 = R.front();
            if (R.size() > 1) {
                for (int v : R)
                    if (v != u0) a[v] = e0;
                continue;
            }
            return closing_phase(a, red, *ord, close, u0, depth, max_depth);
        }
    }

    // Completes a candidate: recursion on whatever stays unassigned, then energy.
    std::optional<std::pair<Assignment, double>> complete(Assignment t, int depth, int max_depth) {
        auto red = reduce_constraints(inst, t);
        if (!red.empty()) {
            if (depth + 1 > max_depth) {
                rep.notes.push_back("recursion limit reached (suspected degeneracy)");
            } else if (!solve(t, depth + 1, max_depth)) {
                return std::nullopt;
            }
        }
        return std::make_pair(t, candidate_energy(t));
    }

    bool closing_phase(Assignment& a, const std::vector<ReducedConstraint>& red, const ExtendingOrder& ord,
                       std::size_t close, int u0, int depth, int max_depth) {
        const int closing = red[ord.order[close]].index;
        struct Cand {
            Assignment a;
            double e;
            bool at_infinity;
            cdouble x;
        };
        std::vector<Cand> cands;
        auto numeric = [&](const CVec& v0) {
            Assignment t = a;
            t[u0] = v0;
            propagate(t, red, ord, positions_except(ord.order.size(), close));
            return t;
        };

        // u_0 = |0> first.
        if (auto c = complete(numeric(e0), depth, max_depth)) {
            double worst = std::sqrt(energy(inst, fill_unassigned(inst, c->first)).max_per_constraint);
            if (worst <= opt.eps * 1e-2) {
                a = c->first;
                rep.notes.push_back("u0 = |0> satisfies the closing constraint");
                return true;
            }
            cands.push_back({c->first, c->second, true, 0.0});
        }

        // Polynomial propagation with u_0 = x|0> + |1>.
        std::vector<std::optional<PolyPair>> pa(inst.dims.size());
        std::vector<long long> bound(inst.dims.size(), 0);
        for (std::size_t q = 0; q < inst.dims.size(); ++q)
            if (a[q]) pa[q] = PolyPair{UnivariatePoly::constant((*a[q])[0]), UnivariatePoly::constant((*a[q])[1])};
        pa[u0] = PolyPair{UnivariatePoly(CVec{0.0, 1.0}), UnivariatePoly::constant(1.0)};
        bound[u0] = 1;
        for (std::size_t pos = 0; pos < close; ++pos) {
            int u = ord.added_vertex[pos];
            int ci = red[ord.order[pos]].index;
            PolyPair g = forced_poly(inst, ci, pa, u);
            for (int v : inst.constraints[ci].qudits)
                if (v != u) bound[u] += bound[v];
            if (poly_pair_vanishes(g)) {
                g = {UnivariatePoly::constant(1.0), UnivariatePoly::constant(0.0)};
                bound[u] = 0;
            }
            if (g[0].coeffs.size() > static_cast<std::size_t>(opt.degree_cap) ||
                g[1].coeffs.size() > static_cast<std::size_t>(opt.degree_cap))
                throw Refusal("solve_almost_extending: degree cap " + std::to_string(opt.degree_cap) + " exceeded");
            pa[u] = g;
        }
        std::vector<const PolyPair*> vals;
        long long qbound = 0;
        for (int v : inst.constraints[closing].qudits) {
            vals.push_back(&*pa[v]);
            qbound += bound[v];
        }
        UnivariatePoly q = contract_slots<UnivariatePoly>(bra_coeffs(inst.constraints[closing]),
                                                          std::vector<int>(vals.size(), 2), vals,
                                                          UnivariatePoly(CVec{0.0}))[0];
        UnivariatePoly qt = q.trimmed(1e-13);
        int qdeg = qt.degree();
        rep.closing_degrees.push_back(std::max(qdeg, 0));
        rep.closing_degree_bounds.push_back(static_cast<int>(qbound));
        if (qdeg > qbound)
            throw std::logic_error("closing polynomial degree " + std::to_string(qdeg) + " exceeds its bound " +
                                   std::to_string(qbound));

        CVec roots;
        if (q.max_abs() <= kVanishTol) {
            roots = {0.0};
            rep.notes.push_back("closing polynomial vanishes identically");
        } else if (qdeg >= 1) {
            ++rep.root_calls;
            try {
                roots = roots_univariate(qt, 1e-10);
            } catch (const Refusal& e) {
                rep.notes.push_back(e.what());
            }
        }
        std::sort(roots.begin(), roots.end(), [](cdouble x, cdouble y) {
            return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag());
        });
        for (cdouble x : roots) {
            if (auto c = complete(numeric(normalized(CVec{x, 1.0})), depth, max_depth))
                cands.push_back({c->first, c->second, false, x});
        }
        if (cands.empty()) {
            rep.message = "no candidate completed";
            return false;
        }
        std::size_t best = 0;
        for (std::size_t i = 1; i < cands.size(); ++i)
            if (cands[i].e < cands[best].e) best = i;
        for (std::size_t i = 0; i < cands.size(); ++i)
            if (i != best && !cands[i].at_infinity) rep.alternatives.push_back(cands[i].x);
        if (!cands[best].at_infinity) rep.chosen_root = cands[best].x;
        rep.closing_variable = u0;
        a = cands[best].a;
        return true;
    }
};

} // namespace detail

// Transfer-filtration solver for qubit instances with an almost extending order.
inline SolveReport solve_almost_extending(const QsatInstance& inst, const SolveOptions& opt = {}) {
    auto t0 = std::chrono::steady_clock::now();
    inst.validate();
    if (!inst.all_qubits()) throw InputError("solve_almost_extending: instance must be on qubits");
    SolveReport rep;
    rep.method = "almost-extending";
    auto h = underlying_hypergraph(inst);
    auto ord = find_extending_order(h, 1);
    if (!ord) {
        rep.message = "no almost extending edge order (a <= 1) exists";
        return rep;
    }
    auto filt = filtration_of_order(h, *ord);
    rep.radius = filt.radius;
    rep.non_extending = ord->non_extending_count;
    detail::Assignment a(inst.dims.size());
    detail::FiltrationSolver fs{inst, opt, rep};
    bool ok = false;
    try {
        ok = fs.solve(a, 0, std::max(1, filt.radius));
    } catch (const Refusal& e) {
        rep.message = e.what();
    }
    if (!ok && rep.message.empty()) rep.message = "propagation failed";
    detail::finalize(rep, inst, detail::fill_unassigned(inst, a), opt);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// ---------------------------------------------------------------- cycles

using Mat2 = std::array<std::array<cdouble, 2>, 2>;

struct CycleStructure {
    std::vector<int> sites;        // cyclic order
    std::vector<int> constraints;  // constraints[i] joins sites[i] and sites[i+1 mod n]
    std::vector<bool> reversed;    // listed as (sites[i+1], sites[i])
};

// Recognizes instances whose constraints are all 2-local and form one cycle.
inline std::optional<CycleStructure> detect_cycle(const QsatInstance& inst) {
    const std::size_t n = inst.dims.size(), m = inst.constraints.size();
    if (n < 2 || m != n) return std::nullopt;
    std::vector<std::vector<int>> inc(n);
    for (std::size_t ci = 0; ci < m; ++ci) {
        if (inst.constraints[ci].qudits.size() != 2) return std::nullopt;
        for (int q : inst.constraints[ci].qudits) inc[q].push_back(static_cast<int>(ci));
    }
    for (const auto& l : inc)
        if (l.size() != 2) return std::nullopt;
    CycleStructure cs;
    std::vector<char> used(m, 0);
    int v = 0;
    for (std::size_t step = 0; step < n; ++step) {
        int c = used[inc[v][0]] ? inc[v][1] : inc[v][0];
        if (used[c]) return std::nullopt;
        used[c] = 1;
        const auto& qs = inst.constraints[c].qudits;
        int w = qs[0] == v ? qs[1] : qs[0];
        cs.sites.push_back(v);
        cs.constraints.push_back(c);
        cs.reversed.push_back(qs[0] != v);
        v = w;
    }
    if (v != 0) return std::nullopt;
    return cs;
}

namespace detail {

// Bra coefficients as a matrix B[p][q] with p on `first`, q on the other qudit.
inline std::vector<std::vector<cdouble>> oriented_bra(const QsatInstance& inst, int ci, bool reversed) {
    const auto& c = inst.constraints[ci];
    int d0 = inst.dims[c.qudits[0]], d1 = inst.dims[c.qudits[1]];
    int rows = reversed ? d1 : d0, cols = reversed ? d0 : d1;
    std::vector<std::vector<cdouble>> b(rows, std::vector<cdouble>(cols));
    for (int i = 0; i < d0; ++i)
        for (int j = 0; j < d1; ++j) {
            cdouble v = std::conj(c.amps[i * d1 + j]);
            if (reversed)
                b[j][i] = v;
            else
                b[i][j] = v;
        }
    return b;
}

// Bilinear form sum G[a][b] U_a W_b = 0 sending U to W = M U.
inline Mat2 forward_matrix(const Mat2& g) { return {{{-g[0][1], -g[1][1]}, {g[0][0], g[1][0]}}}; }

inline Mat2 mat_mul(const Mat2& a, const Mat2& b) {
    Mat2 r{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
    return r;
}

inline std::array<cdouble, 2> mat_apply(const Mat2& a, const std::array<cdouble, 2>& x) {
    return {a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]};
}

inline double norm2(const std::array<cdouble, 2>& x) { return std::sqrt(std::norm(x[0]) + std::norm(x[1])); }

inline std::array<cdouble, 2> unit2(std::array<cdouble, 2> x) {
    double n = norm2(x);
    return {x[0] / n, x[1] / n};
}

// Roots of the monic-or-not quadratic a t^2 + b t + c in a stable form.
inline std::vector<cdouble> quadratic_roots(cdouble a, cdouble b, cdouble c) {
    if (a == cdouble(0)) {
        if (b == cdouble(0)) return {};
        return {-c / b};
    }
    cdouble disc = std::sqrt(b * b - 4.0 * a * c);
    cdouble qq = -0.5 * (b + (std::real(std::conj(b) * disc) >= 0 ? disc : -disc));
    std::vector<cdouble> r{qq / a};
    r.push_back(qq == cdouble(0) ? cdouble(0) : c / qq);
    return r;
}

// Fixed directions of P: P10 X^2 + (P11 - P00) X Y - P01 Y^2 = 0, solved in the chart
// Y = 1 or, when that chart would miss a root at infinity, in the swapped chart X = 1.
inline std::vector<std::array<cdouble, 2>> closure_vectors(const Mat2& p) {
    std::vector<std::array<cdouble, 2>> out;
    cdouble a = p[1][0], b = p[1][1] - p[0][0], c = -p[0][1];
    double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
    if (scale == 0) return {{1.0, 0.0}, {0.0, 1.0}};  // P is a multiple of the identity
    if (std::abs(a) >= std::abs(c)) {
        for (auto z : quadratic_roots(a, b, c)) out.push_back(unit2({z, 1.0}));
        if (std::abs(a) <= 1e-14 * scale) out.push_back({1.0, 0.0});
    } else {
        for (auto t : quadratic_roots(c, b, a)) out.push_back(unit2({1.0, t}));
        if (std::abs(c) <= 1e-14 * scale) out.push_back({0.0, 1.0});
    }
    return out;
}

// Propagates around the cycle from x_0; where a forward transfer vanishes the
// remaining sites are filled backwards from x_0.
inline std::vector<std::array<cdouble, 2>> propagate_cycle(const std::vector<Mat2>& g, std::array<cdouble, 2> x0) {
    const std::size_t n = g.size();
    std::vector<std::array<cdouble, 2>> x(n);
    x[0] = unit2(x0);
    std::size_t i = 0;
    for (; i + 1 < n; ++i) {
        auto y = mat_apply(forward_matrix(g[i]), x[i]);
        if (norm2(y) <= kVanishTol) break;
        x[i + 1] = unit2(y);
    }
    if (i + 1 < n) {
        // Backward: site j from site j+1 through the constraint g[j].
        std::array<cdouble, 2> nxt = x[0];
        for (std::size_t j = n - 1; j > i; --j) {
            std::array<cdouble, 2> c{g[j][0][0] * nxt[0] + g[j][0][1] * nxt[1], g[j][1][0] * nxt[0] + g[j][1][1] * nxt[1]};
            std::array<cdouble, 2> u{c[1], -c[0]};
            x[j] = norm2(u) <= kVanishTol ? std::array<cdouble, 2>{1.0, 0.0} : unit2(u);
            nxt = x[j];
        }
    }
    return x;
}

struct CycleCandidates {
    std::vector<std::vector<std::array<cdouble, 2>>> sites;
};

inline CycleCandidates solve_bilinear_cycle(const std::vector<Mat2>& g) {
    Mat2 p{{{1.0, 0.0}, {0.0, 1.0}}};
    for (const auto& gi : g) {
        p = mat_mul(forward_matrix(gi), p);
        double s = 0;
        for (auto& r : p)
            for (auto v : r) s = std::max(s, std::abs(v));
        if (s > 0)
            for (auto& r : p)
                for (auto& v : r) v /= s;
    }
    CycleCandidates out;
    for (const auto& x0 : closure_vectors(p)) out.sites.push_back(propagate_cycle(g, x0));
    return out;
}

} // namespace detail

// Qubit cycle: Möbius transfer matrices multiplied around the ring, closed by
// the quadratic for the fixed directions of the product.
inline SolveReport solve_cycle_qubits(const QsatInstance& inst, const SolveOptions& opt = {}) {
    auto t0 = std::chrono::steady_clock::now();
    inst.validate();
    SolveReport rep;
    rep.method = "cycle-qubits";
    auto cs = detect_cycle(inst);
    if (!cs || !inst.all_qubits()) {
        rep.message = "instance is not a qubit cycle";
        return rep;
    }
    const std::size_t n = cs->sites.size();
    std::vector<Mat2> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto b = detail::oriented_bra(inst, cs->constraints[i], cs->reversed[i]);
        g[i] = {{{b[0][0], b[0][1]}, {b[1][0], b[1][1]}}};
    }
    auto cands = detail::solve_bilinear_cycle(g);
    std::optional<ProductState> best;
    double best_e = std::numeric_limits<double>::infinity();
    for (const auto& c : cands.sites) {
        ProductState s;
        s.locals.assign(inst.dims.size(), CVec(2));
        for (std::size_t i = 0; i < n; ++i) s.locals[cs->sites[i]] = {c[i][0], c[i][1]};
        double e = energy(inst, s).total;
        if (e < best_e) {
            best_e = e;
            best = s;
        }
    }
    if (best) detail::finalize(rep, inst, *best, opt);
    if (!rep.success) {
        rep.notes.push_back("transfer-matrix closure missed eps; falling back to the filtration solver");
        SolveReport fb = solve_almost_extending(inst, opt);
        if (fb.success) {
            fb.method = "cycle-qubits/almost-extending";
            fb.notes.insert(fb.notes.begin(), rep.notes.begin(), rep.notes.end());
            rep = fb;
        }
    }
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// alpha[i] = (alpha^1, alpha^2) for the affine constraint z^0 = alpha^1 z^1 + alpha^2 at site i.
using AffineConstraints = std::vector<std::array<cdouble, 2>>;

// The cycle together with its 1-local constraints x^0 - alpha^1 x^1 - alpha^2 x^2 = 0.
inline QsatInstance with_affine_constraints(const QsatInstance& inst, const AffineConstraints& alpha) {
    if (alpha.size() != inst.dims.size()) throw InputError("affine constraints: one pair per site expected");
    QsatInstance out = inst;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        CVec bra{1.0, -alpha[i][0], -alpha[i][1]};
        CVec amps(3);
        for (int k = 0; k < 3; ++k) amps[k] = std::conj(bra[k]);
        out.constraints.push_back(make_constraint({static_cast<int>(i)}, amps));
    }
    return out;
}

struct QutritCycleCoefficients {
    cdouble A, B, C, D;
};

// phi[p][q] are bra coefficients between site i (p) and site i+1 (q).
inline QutritCycleCoefficients qutrit_cycle_coefficients(const std::vector<std::vector<cdouble>>& phi,
                                                         const std::array<cdouble, 2>& ai,
                                                         const std::array<cdouble, 2>& aj) {
    const cdouble a1 = ai[0], a2 = ai[1], b1 = aj[0], b2 = aj[1];
    QutritCycleCoefficients k;
    k.A = phi[0][0] * a1 * b2 + phi[1][0] * b2 + phi[0][2] * a1 + phi[1][2];
    k.B = phi[0][0] * a2 * b2 + phi[0][2] * a2 + phi[2][0] * b2 + phi[2][2];
    k.C = phi[0][0] * a1 * b1 + phi[1][0] * b1 + phi[0][1] * a1 + phi[1][1];
    k.D = phi[0][0] * a2 * b1 + phi[0][1] * a2 + phi[2][0] * b1 + phi[2][1];
    return k;
}

// Qutrit cycle where each site obeys an affine 1-local constraint: the sites
// become (X1, X2) with x = (alpha^1 X1 + alpha^2 X2, X1, X2) and the cycle is a
// Möbius cycle in u = X1 / X2, u' = -(A u + B) / (C u + D).
inline SolveReport solve_cycle_qutrits(const QsatInstance& inst, const AffineConstraints& alpha,
                                       const SolveOptions& opt = {}) {
    auto t0 = std::chrono::steady_clock::now();
    inst.validate();
    SolveReport rep;
    rep.method = "cycle-qutrits";
    QsatInstance full = with_affine_constraints(inst, alpha);
    auto cs = detect_cycle(inst);
    bool qutrits = std::all_of(inst.dims.begin(), inst.dims.end(), [](int d) { return d == 3; });
    if (!cs || !qutrits) {
        rep.message = "instance is not a qutrit cycle";
        return rep;
    }
    const std::size_t n = cs->sites.size();
    std::vector<Mat2> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto b = detail::oriented_bra(inst, cs->constraints[i], cs->reversed[i]);
        auto k = qutrit_cycle_coefficients(b, alpha[cs->sites[i]], alpha[cs->sites[(i + 1) % n]]);
        // W1 (C U1 + D U2) + W2 (A U1 + B U2) = 0.
        g[i] = {{{k.C, k.A}, {k.D, k.B}}};
    }
    auto cands = detail::solve_bilinear_cycle(g);
    std::optional<ProductState> best;
    double best_e = std::numeric_limits<double>::infinity();
    for (const auto& c : cands.sites) {
        ProductState s;
        s.locals.assign(inst.dims.size(), CVec(3));
        for (std::size_t i = 0; i < n; ++i) {
            const auto& al = alpha[cs->sites[i]];
            s.locals[cs->sites[i]] = {al[0] * c[i][0] + al[1] * c[i][1], c[i][0], c[i][1]};
        }
        double e = energy(full, s).total;
        if (e < best_e) {
            best_e = e;
            best = s;
        }
    }
    if (best) detail::finalize(rep, full, *best, opt);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// Qutrit instance = 2-local cycle plus exactly one 1-local constraint per site
// with bra (b0, b1, b2), b0 != 0; alpha = (-b1/b0, -b2/b0).
struct QutritCycleSplit {
    QsatInstance cycle;
    AffineConstraints alpha;
};

inline std::optional<QutritCycleSplit> detect_qutrit_cycle(const QsatInstance& inst) {
    if (!std::all_of(inst.dims.begin(), inst.dims.end(), [](int d) { return d == 3; })) return std::nullopt;
    QutritCycleSplit out;
    out.cycle.dims = inst.dims;
    std::vector<std::optional<std::array<cdouble, 2>>> al(inst.dims.size());
    for (const auto& c : inst.constraints) {
        if (c.qudits.size() == 2) {
            out.cycle.constraints.push_back(c);
        } else if (c.qudits.size() == 1) {
            CVec b = bra_coeffs(c);
            if (al[c.qudits[0]] || std::abs(b[0]) <= 1e-12) return std::nullopt;
            al[c.qudits[0]] = std::array<cdouble, 2>{-b[1] / b[0], -b[2] / b[0]};
        } else {
            return std::nullopt;
        }
    }
    for (auto& a : al) {
        if (!a) return std::nullopt;
        out.alpha.push_back(*a);
    }
    if (!detect_cycle(out.cycle)) return std::nullopt;
    return out;
}

// Routes a full qutrit instance through solve_cycle_qutrits; residuals refer to `inst`.
inline SolveReport solve_qutrit_cycle_instance(const QsatInstance& inst, const SolveOptions& opt = {}) {
    auto split = detect_qutrit_cycle(inst);
    if (!split) {
        SolveReport r;
        r.method = "cycle-qutrits";
        r.message = "instance is not a qutrit cycle with one 1-local constraint per site";
        return r;
    }
    SolveReport r = solve_cycle_qutrits(split->cycle, split->alpha, opt);
    if (r.state) {
        SolveReport v = verify(inst, *r.state, opt.eps);
        r.residuals = v.residuals;
        r.max_residual = v.max_residual;
        r.violated = v.violated;
        r.success = v.success;
    }
    return r;
}

// ---------------------------------------------------------------- pinwheel

// Recovers the layout of a gen_pinwheel instance (constraint order as generated,
// either orientation accepted).
inline std::optional<PinwheelLayout> detect_pinwheel(const QsatInstance& inst) {
    const int V = static_cast<int>(inst.dims.size());
    int n = 0;
    while (((1 << (n + 2)) - 1) <= V) ++n;
    if (n < 1 || (1 << (n + 1)) - 1 != V || n > 20) return std::nullopt;
    if (inst.constraints.size() != static_cast<std::size_t>(2 * V)) return std::nullopt;
    for (int d : inst.dims)
        if (d != 3) return std::nullopt;
    PinwheelLayout L = pinwheel_layout(n);
    auto edges = pinwheel_edges(L);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto e = edges[i], c = inst.constraints[i].qudits;
        std::sort(e.begin(), e.end());
        std::sort(c.begin(), c.end());
        if (e != c) return std::nullopt;
    }
    return L;
}

namespace detail {

struct PinwheelEval {
    std::vector<CVec> locals;  // unnormalized
    std::vector<cdouble> residual;  // ring closures, then the two closing constraints
    bool ok = true;
};

// 3 x 2 basis of {v : c . v = 0} for a fixed pivot r (c[r] != 0 expected).
inline std::array<CVec, 2> null_basis(const CVec& c, int r) {
    std::array<CVec, 2> b;
    int col = 0;
    for (int a = 0; a < 3; ++a) {
        if (a == r) continue;
        CVec v(3, 0.0);
        v[a] = c[r];
        v[r] = -c[a];
        b[col++] = v;
    }
    return b;
}

inline int largest(const CVec& c) {
    int r = 0;
    for (int i = 1; i < static_cast<int>(c.size()); ++i)
        if (std::abs(c[i]) > std::abs(c[r])) r = i;
    return r;
}

// Unknowns: v_0 in an affine chart (s, t) and one eigen-direction per ring.
struct PinwheelPoint {
    int chart = 0;
    std::vector<cdouble> u;       // s, t, z_1 .. z_n
    std::vector<int> ring_chart;  // z_j as (z, 1) or (1, z)
    std::vector<std::vector<int>> pivots;  // frozen null-space pivots; empty = choose
};

class PinwheelSystem {
public:
    PinwheelSystem(const QsatInstance& inst, const PinwheelLayout& L) : inst_(inst), L_(L) {}

    int unknowns() const { return 2 + L_.n; }

    // Peels the rings outward from v_0: spoke constraints cut each child to a
    // 2-dimensional subspace, the ring is then a qubit-like cycle whose closure
    // asks that the product transfer P_j fixes the direction (z_j, 1).
    PinwheelEval evaluate(PinwheelPoint& pt) const {
        PinwheelEval ev;
        ev.locals.assign(inst_.dims.size(), CVec(3, 0.0));
        bool choose = pt.pivots.empty();
        if (choose) pt.pivots.resize(L_.n);
        CVec v0(3);
        v0[pt.chart] = 1.0;
        v0[(pt.chart + 1) % 3] = pt.u[0];
        v0[(pt.chart + 2) % 3] = pt.u[1];
        if (!std::isfinite(vec_norm(v0))) {
            ev.ok = false;
            return ev;
        }
        ev.locals[0] = normalized(v0);
        for (int j = 1; j <= L_.n; ++j) {
            const int K = 1 << j;
            if (choose) pt.pivots[j - 1].assign(K, 0);
            std::vector<std::array<CVec, 2>> basis(K);
            for (int k = 0; k < K; ++k) {
                int parent = L_.vertex(j - 1, k / 2);
                auto b = pair_bra(L_.spoke[j - 1][k], parent);
                CVec c(3, 0.0);
                for (int p = 0; p < 3; ++p)
                    for (int q = 0; q < 3; ++q) c[q] += b[p][q] * ev.locals[parent][p];
                double cn = vec_norm(c);
                if (!(cn > 0)) {
                    ev.ok = false;
                    return ev;
                }
                for (auto& x : c) x /= cn;
                if (choose) pt.pivots[j - 1][k] = largest(c);
                basis[k] = null_basis(c, pt.pivots[j - 1][k]);
            }
            std::vector<Mat2> g(K);
            for (int k = 0; k < K; ++k) {
                auto r = pair_bra(L_.ring[j - 1][k], L_.vertex(j, k));
                const auto& b0 = basis[k];
                const auto& b1 = basis[(k + 1) % K];
                for (int x = 0; x < 2; ++x)
                    for (int y = 0; y < 2; ++y) {
                        cdouble acc = 0;
                        for (int p = 0; p < 3; ++p)
                            for (int q = 0; q < 3; ++q) acc += r[p][q] * b0[x][p] * b1[y][q];
                        g[k][x][y] = acc;
                    }
            }
            cdouble z = pt.u[1 + j];
            std::array<cdouble, 2> x = pt.ring_chart[j - 1] == 0 ? std::array<cdouble, 2>{z, 1.0}
                                                                  : std::array<cdouble, 2>{1.0, z};
            if (!(norm2(x) > 0) || !std::isfinite(norm2(x))) {
                ev.ok = false;
                return ev;
            }
            x = unit2(x);
            const auto x0 = x;
            for (int k = 0; k < K; ++k) {
                int a = L_.vertex(j, k);
                for (int p = 0; p < 3; ++p) ev.locals[a][p] = basis[k][0][p] * x[0] + basis[k][1][p] * x[1];
                double an = vec_norm(ev.locals[a]);
                if (!(an > 0) || !std::isfinite(an)) {
                    ev.ok = false;
                    return ev;
                }
                for (auto& v : ev.locals[a]) v /= an;
                x = mat_apply(forward_matrix(g[k]), x);
                double xn = norm2(x);
                if (!(xn > 0)) {
                    ev.ok = false;
                    return ev;
                }
                x = {x[0] / xn, x[1] / xn};
            }
            ev.residual.push_back(x[0] * x0[1] - x[1] * x0[0]);
        }
        const CVec u0 = normalized(v0);
        for (int i = 0; i < 2; ++i) {
            auto b = pair_bra(L_.closing[i], 0);
            const CVec& w = ev.locals[L_.closing_endpoint[i]];
            cdouble acc = 0;
            for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 3; ++q) acc += b[p][q] * u0[p] * w[q];
            ev.residual.push_back(acc);
        }
        for (const auto& v : ev.locals)
            if (!(vec_norm(v) > 0) || !std::isfinite(vec_norm(v))) ev.ok = false;
        return ev;
    }

    // Newton merit |F|^2 and the max residual with unit locals.
    std::pair<double, double> merit(const PinwheelEval& ev) const {
        if (!ev.ok) return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
        ProductState s;
        s.locals = ev.locals;
        auto e = energy(inst_, s);
        double f = 0;
        for (auto r : ev.residual) f += std::norm(r);
        return {f, std::sqrt(e.max_per_constraint)};
    }

private:
    std::vector<std::vector<cdouble>> pair_bra(int ci, int first) const {
        return oriented_bra(inst_, ci, inst_.constraints[ci].qudits[0] != first);
    }

    const QsatInstance& inst_;
    const PinwheelLayout& L_;
};

} // namespace detail

// Pinwheel: v_0 carries two affine unknowns, each ring one eigen-direction;
// ring closures plus the two closing constraints form a square holomorphic
// system solved by seeded multistart Newton and verified afterwards.
inline SolveReport solve_pinwheel(const QsatInstance& inst, const SolveOptions& opt = {}) {
    auto t0 = std::chrono::steady_clock::now();
    inst.validate();
    SolveReport rep;
    rep.method = "pinwheel";
    auto L = detect_pinwheel(inst);
    if (!L) {
        rep.message = "instance is not a pinwheel";
        return rep;
    }
    if (L->n > 12) throw Refusal("solve_pinwheel: n beyond the supported size 12");
    detail::PinwheelSystem sys(inst, *L);
    const int N = sys.unknowns();

    auto run = [&](int idx, bool polish) {
        std::mt19937_64 rng(detail::start_seed(opt.seed, idx));
        std::normal_distribution<double> g(0.0, 1.0);
        detail::PinwheelPoint pt;
        pt.chart = idx % 3;
        for (int i = 0; i < N; ++i) pt.u.push_back({g(rng), g(rng)});
        for (int j = 0; j < L->n; ++j) pt.ring_chart.push_back(static_cast<int>(rng() & 1u));
        auto ev = sys.evaluate(pt);
        auto [cur, res] = sys.merit(ev);
        for (int it = 0; it < 100 && ev.ok && res > 1e-15; ++it) {
            // Real 2N x 2N Jacobian: the normalizations are not holomorphic.
            Eigen::MatrixXd J(2 * N, 2 * N);
            Eigen::VectorXd F(2 * N);
            for (int r = 0; r < N; ++r) {
                F(2 * r) = ev.residual[r].real();
                F(2 * r + 1) = ev.residual[r].imag();
            }
            bool bad = false;
            for (int c = 0; c < 2 * N && !bad; ++c) {
                detail::PinwheelPoint q = pt;
                double h = 1e-7 * std::max(1.0, std::abs(q.u[c / 2]));
                q.u[c / 2] += (c % 2 == 0) ? cdouble(h, 0) : cdouble(0, h);
                auto e = sys.evaluate(q);
                if (!e.ok) bad = true;
                for (int r = 0; r < N && !bad; ++r) {
                    J(2 * r, c) = (e.residual[r].real() - F(2 * r)) / h;
                    J(2 * r + 1, c) = (e.residual[r].imag() - F(2 * r + 1)) / h;
                }
            }
            if (bad) break;
            Eigen::VectorXd dr = J.fullPivLu().solve(-F);
            if (!dr.allFinite()) break;
            Eigen::VectorXcd d(N);
            for (int c = 0; c < N; ++c) d(c) = cdouble(dr(2 * c), dr(2 * c + 1));
            bool moved = false;
            for (double step = 1.0; step > 1e-4; step *= 0.5) {
                detail::PinwheelPoint q = pt;
                for (int c = 0; c < N; ++c) q.u[c] += step * d(c);
                auto e2 = sys.evaluate(q);
                auto [c2, r2] = sys.merit(e2);
                if (c2 < cur) {
                    pt = q;
                    ev = e2;
                    cur = c2;
                    res = r2;
                    moved = true;
                    break;
                }
            }
            if (!moved) break;
        }
        detail::NewtonRun out;
        out.state.locals = ev.locals;
        if (!ev.ok) {
            out.state = detail::random_state(inst, rng);
            res = std::numeric_limits<double>::infinity();
        }
        out.max_residual = res;
        if (polish && out.max_residual > opt.eps) {
            // Full-system polish from the reduced-coordinate endpoint.
            auto full = detail::newton_run(inst, out.state, 60, 1e-15);
            if (full.max_residual < out.max_residual) {
                full.iterations = -1;
                out = full;
            }
        }
        return out;
    };
    // Reduced coordinates only; then again with each start finished on the full system.
    auto [win, runs] = detail::multistart(opt.starts, opt.threads, opt.eps, [&](int i) { return run(i, false); });
    if (win < 0) {
        rep.notes.push_back("reduced Newton missed eps on every start; retrying with full-system polish");
        std::tie(win, runs) = detail::multistart(opt.starts, opt.threads, opt.eps, [&](int i) { return run(i, true); });
    }
    int pick = win;
    if (pick < 0) {
        pick = 0;
        for (int i = 1; i < static_cast<int>(runs.size()); ++i)
            if (runs[i].max_residual < runs[pick].max_residual) pick = i;
        rep.message = "pinwheel: Newton did not reach eps within " + std::to_string(opt.starts) + " starts";
    }
    rep.starts_used = win < 0 ? opt.starts : win + 1;
    if (runs[pick].iterations < 0) rep.notes.push_back("winning start finished by full-system Newton");
    rep.notes.push_back("closing edges end at v" + std::to_string(L->closing_endpoint[0]) + " and v" +
                        std::to_string(L->closing_endpoint[1]));
    detail::finalize(rep, inst, runs[pick].state, opt);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// ---------------------------------------------------------------- dispatch

enum class SolveMode { automatic, almost_extending, cycle, pinwheel, newton };

// Pinwheel fingerprint, then qubit cycle, then an almost extending order
// (after reducing qudits to qubits). Newton runs only when requested.
inline SolveReport solve(const QsatInstance& inst, SolveMode mode, const SolveOptions& opt = {}) {
    inst.validate();
    switch (mode) {
    case SolveMode::pinwheel: return solve_pinwheel(inst, opt);
    case SolveMode::newton: return solve_newton(inst, opt);
    case SolveMode::cycle:
        if (detect_qutrit_cycle(inst)) return solve_qutrit_cycle_instance(inst, opt);
        return solve_cycle_qubits(inst, opt);
    case SolveMode::almost_extending:
    case SolveMode::automatic: break;
    }
    if (mode == SolveMode::automatic) {
        if (detect_pinwheel(inst)) return solve_pinwheel(inst, opt);
        if (inst.all_qubits() && detect_cycle(inst)) return solve_cycle_qubits(inst, opt);
        if (detect_qutrit_cycle(inst)) return solve_qutrit_cycle_instance(inst, opt);
    }
    if (inst.all_qubits()) {
        SolveReport r = solve_almost_extending(inst, opt);
        if (!r.success && r.state == std::nullopt && mode == SolveMode::automatic)
            r.message += "; try --mode newton";
        return r;
    }
    auto [q, chain] = reduce_to_qubits(inst);
    SolveReport r = solve(q, mode, opt);
    r.method = "reduce-to-qubits/" + r.method;
    if (r.state) {
        ProductState pushed = transport_solution(chain, *r.state, Transport::push);
        SolveReport v = verify(inst, pushed, opt.eps);
        r.state = pushed;
        r.residuals = v.residuals;
        r.max_residual = v.max_residual;
        r.violated = v.violated;
        r.success = v.success;
    }
    return r;
}

} // namespace prodsat
